import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lclre.catalog import def3col_diagram
from lclre.lincheck import (CombinedLine, Inequality, IneqSystem,
                            LinExpr, ParamLine, PsiEntry, build_combined_line,
                            build_systems, check_certificate,
                            hall_inequalities, infeasible_over_reals,
                            load_ledger, right_closed_cuts, verify_entry)
from lclre.lines3col import global_constraints, node_line_registry

D = LinExpr.var("Delta")
d = LinExpr.var("d")


@pytest.fixture(scope="module")
def diagram():
    return def3col_diagram()


@pytest.fixture(scope="module")
def worked(diagram):
    import lclre
    import pathlib
    path = pathlib.Path(lclre.__file__).parent / "data" / "psi_def3col_worked.json"
    doc = json.loads(path.read_text())
    glob, entries = load_ledger(doc, node_line_registry(), diagram)
    return glob, entries[0]


class TestLinExpr:
    def test_algebra(self):
        e = 2 * D - 3 * d + 1
        assert e.evaluate({"Delta": 5, "d": 1}) == 8
        assert (e - e) == LinExpr(0)
        assert (e + 0).variables() == {"Delta", "d"}

    def test_dict_roundtrip(self):
        e = D - 2 * d - 1
        assert LinExpr.from_dict(e.to_dict()) == e

    def test_display(self):
        assert (D - 2 * d - 1).display() == "Delta-2*d-1"
        assert LinExpr(0).display() == "0"


class TestInequality:
    def test_integer_negation_le(self):
        q = Inequality.le(D, 2 * d + 4)
        (neg,) = q.negations()
        assert neg.rel == ">=" and neg.rhs == 2 * d + 5

    def test_integer_negation_eq_splits(self):
        q = Inequality.eq(D, 2 * d + 4)
        a, b = q.negations()
        assert {a.rel, b.rel} == {"<=", ">="}

    def test_negation_matches_semantics_on_grid(self):
        # spot-check: not(e <= v) iff e >= v+1 over integers
        q = Inequality.le(D - 2 * d, LinExpr(3))
        (neg,) = q.negations()
        for delta in range(0, 9):
            for dd in range(0, 5):
                env = {"Delta": delta, "d": dd}
                assert q.holds(env) != neg.holds(env)


class TestCuts:
    def test_worked_target_has_seven_cuts(self, diagram):
        t1 = node_line_registry()["5.1"]
        cuts = right_closed_cuts(t1, diagram)
        assert len(cuts) == 7
        assert set(map(frozenset, cuts)) == {
            frozenset(), frozenset({"_"}), frozenset({"_", "CXY"}),
            frozenset({"_", "CXY", "ACXY+"}), frozenset({"_", "CXY", "BCXY+"}),
            frozenset({"_", "CXY", "ACXY+", "BCXY+"}),
            frozenset({"_", "CXY", "ACXY+", "BCXY+", "ABCXY+"})}

    def test_single_label_line(self, diagram):
        t = ParamLine.make("t", [("C", D)], degree=D)
        assert right_closed_cuts(t, diagram) == [(), ("C",)]

    def test_antichain_of_two(self, diagram):
        # AX and BY are incomparable, so every subset is a cut
        t = ParamLine.make("t", [("AX", d), ("BY", D - d)], degree=D)
        assert len(right_closed_cuts(t, diagram)) == 4


class TestWorkedEntry:
    def test_combined_line_matches_display(self, diagram, worked):
        _, entry = worked
        C, a3 = build_combined_line(entry.left, entry.right,
                                    ("ACX", "XY"), diagram)
        assert C.labels[0] == "X"  # sup(ACX, XY)
        assert len(C.parts) == 16  # join part + 15 matching cells
        # the meet row of ACX: ACX, ACXY+, ACXY+, ABCXY+, ABCXY+
        assert C.labels[11:] == ("ACX", "ACXY+", "ACXY+", "ABCXY+", "ABCXY+")
        # row-sum equation for the third part of the left line
        eqs = [q for q in a3 if q.rel == "=="]
        row3 = next(q for q in eqs
                    if q.lhs.variables() == {f"x_3_{j}" for j in range(1, 6)})
        assert row3.rhs == D - 2 * d - 2

    def test_hall_for_first_cut(self, diagram, worked):
        _, entry = worked
        C, _ = build_combined_line(entry.left, entry.right, ("ACX", "XY"),
                                   diagram)
        t1 = entry.targets[0][0]
        ineqs = hall_inequalities(C, t1, diagram)
        assert len(ineqs) == 6  # the empty cut forces nothing and is dropped
        first = ineqs[0]
        assert first.lhs == (LinExpr.var("x_1_1") + LinExpr.var("x_1_2")
                             + LinExpr.var("x_1_3") + LinExpr.var("x_1_4")
                             + LinExpr.var("x_1_5") + LinExpr.var("x_2_1")
                             + LinExpr.var("x_3_1") + 1)
        assert first.rhs == d + 2

    def test_hall_unmatchable_label(self, diagram, worked):
        _, entry = worked
        C, _ = build_combined_line(entry.left, entry.right, ("ACX", "XY"),
                                   diagram)
        t2 = entry.targets[1][0]
        ineqs = hall_inequalities(C, t2, diagram)
        assert len(ineqs) == 4
        assert ineqs[0].lhs == LinExpr.var("x_1_1")
        assert ineqs[0].rhs == LinExpr(0)

    def test_hall_total_degree(self, diagram, worked):
        _, entry = worked
        C, _ = build_combined_line(entry.left, entry.right, ("ACX", "XY"),
                                   diagram)
        t1 = entry.targets[0][0]
        last = hall_inequalities(C, t1, diagram)[-1]
        assert last.rhs == D
        assert len(last.lhs.variables()) == 15

    def test_thirtysix_systems(self, diagram, worked):
        glob, entry = worked
        systems = build_systems(entry, glob, diagram)
        assert len(systems) == 36
        # A4: the target's free variable is pinned to the ledger expression
        k_eqs = [q for q in systems[0].inequalities
                 if q.rel == "==" and q.lhs == LinExpr.var("k1")]
        assert len(k_eqs) == 1
        assert k_eqs[0].rhs == d - LinExpr.var("x_3_2") - LinExpr.var("x_3_3")

    def test_single_target_single_condition(self, diagram):
        t = ParamLine.make("t", [("C", D)], degree=D)
        entry = PsiEntry(t, t, "C", "C", ((t, None),))
        systems = build_systems(entry, (), diagram)
        # C's only nonempty cut yields one inequality and no side constraints
        assert len(systems) == 1

    def test_first_system_is_the_paper_one(self, diagram, worked):
        glob, entry = worked
        systems = build_systems(entry, glob, diagram)
        first = systems[0]
        negs = first.inequalities[-2:]
        assert negs[0].display() == "k1 <= -1"
        assert negs[1].display() == "x_1_1 >= 1"
        res = infeasible_over_reals(first)
        assert res.infeasible
        assert check_certificate(first, res.certificate)
        # the contradiction leans on the free-variable pin, as in the
        # derivation ending in x_3_2 + x_3_3 >= d+1
        used = {i for i, m in res.certificate if m != 0}
        k_idx = next(i for i, q in enumerate(first.inequalities)
                     if q.rel == "==" and q.lhs == LinExpr.var("k1"))
        assert k_idx in used

    def test_entry_valid(self, diagram, worked):
        glob, entry = worked
        report = verify_entry(entry, glob, diagram)
        assert report.valid
        assert len(report.systems) == 36
        for s, r in zip(report.systems, report.results):
            assert r.infeasible
            assert check_certificate(s, r.certificate)

    def test_dropping_a_target_leaves_entry_unverified(self, diagram, worked):
        glob, entry = worked
        crippled = PsiEntry(entry.left, entry.right, entry.sup_left,
                            entry.sup_right, entry.targets[:1])
        report = verify_entry(crippled, glob, diagram)
        assert not report.valid
        idx = report.first_feasible
        witness = report.results[idx].witness
        assert witness is not None
        # the witness satisfies every inequality of its system exactly
        assert report.systems[idx].holds(witness)

    def test_self_targeting_combined_line_always_valid(self, diagram):
        # a target equal to one of the combined parts with the full budget
        left = node_line_registry()["1.3"]
        right = node_line_registry()["2.3"]
        # sup(AX, BY) = ABXY+; every combination is dominated by... itself:
        # use a fabricated target with one label reachable from everything
        top = ParamLine.make("top", [("_", D)], degree=D)
        entry = PsiEntry(left, right, "AX", "BY", ((top, None),))
        report = verify_entry(entry, global_constraints(), diagram)
        assert report.valid


class TestFourierMotzkin:
    def test_feasible_interval(self):
        x = LinExpr.var("x")
        s = IneqSystem(("x",), (Inequality.ge(x, 1), Inequality.le(x, 2)))
        r = infeasible_over_reals(s)
        assert not r.infeasible
        assert Fraction(1) <= r.witness["x"] <= Fraction(2)

    def test_infeasible_interval(self):
        x = LinExpr.var("x")
        s = IneqSystem(("x",), (Inequality.ge(x, 1), Inequality.le(x, 0)))
        r = infeasible_over_reals(s)
        assert r.infeasible
        assert check_certificate(s, r.certificate)

    def test_equality_substitution(self):
        x, y = LinExpr.var("x"), LinExpr.var("y")
        s = IneqSystem(("x", "y"), (
            Inequality.eq(x + y, 4),
            Inequality.ge(x, 3),
            Inequality.ge(y, 2)))
        r = infeasible_over_reals(s)
        assert r.infeasible

    def test_unconstrained_variable(self):
        s = IneqSystem(("x",), ())
        r = infeasible_over_reals(s)
        assert not r.infeasible and r.witness["x"] == 0

    def test_contradictory_equalities(self):
        x = LinExpr.var("x")
        s = IneqSystem(("x",), (Inequality.eq(x, 1), Inequality.eq(x, 2)))
        r = infeasible_over_reals(s)
        assert r.infeasible and check_certificate(s, r.certificate)


def _random_system(data, max_vars=4, max_ineqs=8) -> IneqSystem:
    n = data.draw(st.integers(1, max_vars))
    names = tuple(f"v{i}" for i in range(n))
    ineqs = []
    for _ in range(data.draw(st.integers(1, max_ineqs))):
        coeffs = {v: data.draw(st.integers(-3, 3)) for v in names}
        lhs = LinExpr.make(0, **coeffs)
        rel = data.draw(st.sampled_from(["<=", ">=", "=="]))
        rhs = LinExpr(data.draw(st.integers(-10, 25)))
        ineqs.append(Inequality(lhs, rel, rhs))
    for v in names:  # keep the confirmation grid meaningful
        ineqs.append(Inequality.ge(LinExpr.var(v), 0))
        ineqs.append(Inequality.le(LinExpr.var(v), 10))
    return IneqSystem(names, tuple(ineqs))


class TestFMProperties:
    @settings(max_examples=80, deadline=None, derandomize=True)
    @given(st.data())
    def test_verdicts_cross_checked_by_integer_grid(self, data):
        import numpy as np
        s = _random_system(data, max_vars=3, max_ineqs=5)
        r = infeasible_over_reals(s)
        grid = np.stack(np.meshgrid(
            *[np.arange(11)] * len(s.variables), indexing="ij"),
            axis=-1).reshape(-1, len(s.variables))
        ok = np.ones(len(grid), dtype=bool)
        for q in s.inequalities:
            lhs = np.zeros(len(grid))
            rhs = np.zeros(len(grid))
            for1 = dict(q.lhs.coeffs)
            for i, v in enumerate(s.variables):
                lhs += for1.get(v, 0) * grid[:, i]
                rhs += dict(q.rhs.coeffs).get(v, 0) * grid[:, i]
            lhs += q.lhs.const
            rhs += q.rhs.const
            if q.rel == "<=":
                ok &= lhs <= rhs
            elif q.rel == ">=":
                ok &= lhs >= rhs
            else:
                ok &= lhs == rhs
        any_integer_point = bool(ok.any())
        if r.infeasible:
            assert not any_integer_point
            assert check_certificate(s, r.certificate)
        else:
            assert s.holds(r.witness)

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(st.data())
    def test_elimination_order_independent(self, data):
        s = _random_system(data, max_vars=4, max_ineqs=6)
        r1 = infeasible_over_reals(s)
        # renaming variables permutes the elimination heuristic's choices
        perm = data.draw(st.permutations(range(len(s.variables))))
        renames = {s.variables[i]: f"w{perm[i]}" for i in range(len(s.variables))}

        def rename_expr(e):
            return LinExpr.make(e.const,
                                **{renames[v]: c for v, c in e.coeffs})

        s2 = IneqSystem(tuple(sorted(renames.values())),
                        tuple(Inequality(rename_expr(q.lhs), q.rel,
                                         rename_expr(q.rhs))
                              for q in s.inequalities))
        r2 = infeasible_over_reals(s2)
        assert r1.infeasible == r2.infeasible


class TestHallMatchingEquivalence:
    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(st.data())
    def test_cut_inequalities_iff_domination(self, data):
        # instantiate a combined line and a target with concrete counts and
        # compare the cut inequalities against the matching-based check
        from lclre.fixedpoint import d_dominates
        from lclre.problems import Configuration

        d_ = def3col_diagram()
        delta = data.draw(st.sampled_from([5, 6]))
        labels = data.draw(st.lists(st.sampled_from(d_.names), min_size=1,
                                    max_size=4, unique=True))
        tlabels = data.draw(st.lists(st.sampled_from(d_.names), min_size=1,
                                     max_size=3, unique=True))
        counts = [data.draw(st.integers(0, delta)) for _ in labels]
        if sum(counts) == 0:
            counts[0] = 1
        total = sum(counts)
        tcounts = [data.draw(st.integers(0, total)) for _ in tlabels]
        deficit = total - sum(tcounts)
        if deficit > 0:
            tcounts[0] += deficit
        elif deficit < 0:
            for i in range(len(tcounts)):
                take = min(-deficit, tcounts[i])
                tcounts[i] -= take
                deficit += take
        if sum(tcounts) != total:
            return
        cline = CombinedLine("c", tuple(
            (lab, LinExpr(c)) for lab, c in zip(labels, counts) if c))
        tline = ParamLine("t",
                          tuple(lab for lab, c in zip(tlabels, tcounts) if c),
                          tuple(LinExpr(c) for c in tcounts if c))
        if not tline.labels or not cline.labels:
            return
        ineqs = hall_inequalities(cline, tline, d_)
        holds = all(q.holds({}) for q in ineqs)
        big = Configuration.make(
            ((d_.id_of(lab),), e.const)
            for lab, e in zip(tline.labels, tline.exponents))
        small = Configuration.make(
            ((d_.id_of(lab),), e.const) for lab, e in cline.parts)
        assert holds == d_dominates(big, small, d_)


class TestEqualityNegationSplit:
    def test_equality_guard_doubles_the_systems(self, diagram):
        # a target with an equality regime guard negates into two systems
        reg = node_line_registry()
        left, right = reg["1.3"], reg["2.3"]
        tight = reg["6.1"]  # guard: Delta == 2d+4
        entry = PsiEntry(left, right, "AX", "BY", ((tight, None),))
        systems = build_systems(entry, global_constraints(), diagram)
        assert all(q.rel == "==" for q in tight.side_constraints)
        cuts = hall_inequalities(
            build_combined_line(left, right, ("AX", "BY"), diagram)[0],
            tight, diagram)
        # each cut condition negates into one system, the equality guard
        # into two (e <= v-1 or e >= v+1)
        assert len(systems) == 2 * len(tight.side_constraints) + len(cuts)


class TestWorkedEntryGrid:
    def test_cut_inequalities_match_matchings_on_the_worked_pair(self, diagram,
                                                                 worked):
        # instantiate the worked combined line from explicit matchings and
        # confirm the symbolic cut inequalities agree with d_dominates
        import random
        from lclre.fixedpoint import d_dominates
        from lclre.problems import Configuration

        glob, entry = worked
        C, a3 = build_combined_line(entry.left, entry.right, ("ACX", "XY"),
                                    diagram)
        rng = random.Random(7)
        for delta in (5, 6):
            dd = (delta - 3) // 2
            for _ in range(60):
                env = {"Delta": delta, "d": dd}
                f2 = rng.randint(0, dd)
                env["f2"] = f2
                # left exponents (one ACX used by the join)
                left_counts = [dd + 1, dd, delta - 2 * dd - 2]
                right_counts = [1, f2 - 1, dd - f2, dd - f2,
                                delta - 2 * dd - 1 + f2]
                if any(c < 0 for c in right_counts):
                    continue
                # random contingency table with those margins
                cols = list(right_counts)
                ok = True
                for i, r in enumerate(left_counts):
                    for j in range(5):
                        top = min(r, cols[j])
                        take = rng.randint(0, top)
                        env[f"x_{i + 1}_{j + 1}"] = take
                        r -= take
                        cols[j] -= take
                    if r:  # dump the remainder into any column with room
                        for j in range(5):
                            give = min(r, cols[j])
                            env[f"x_{i + 1}_{j + 1}"] += give
                            cols[j] -= give
                            r -= give
                        if r:
                            ok = False
                            break
                if not ok or any(c != 0 for c in cols):
                    continue
                assert all(q.holds(env) for q in a3 if q.rel == "==")
                concrete = Configuration.make(
                    ((diagram.id_of(lab),), e.evaluate(env))
                    for lab, e in C.parts if e.evaluate(env) > 0)
                for t, expr in entry.targets:
                    if t.free_var is not None:
                        env[t.free_var] = expr.evaluate(env)
                    conds = list(t.side_constraints) + \
                        hall_inequalities(C, t, diagram)
                    predicted = all(q.holds(env) for q in conds)
                    inst = t.instantiate(env)
                    if inst is None:
                        # a side constraint failed; dominance may not be
                        # tested through an invalid instantiation
                        assert not predicted
                        continue
                    target_cfg = Configuration.make(
                        ((diagram.id_of(lab),), c) for lab, c in inst)
                    assert predicted == d_dominates(target_cfg, concrete,
                                                    diagram)
