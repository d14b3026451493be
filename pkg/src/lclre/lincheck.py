"""Parametric domination checking via linear inequality infeasibility.

Node constraints of the parametric fixed points are families of *lines*:
configurations whose exponents are integer linear expressions in the degree,
the defect, and free variables.  Whether every combination of two lines is
dominated by one of a few target lines reduces, through a Hall-condition
argument over right-closed cuts of the target, to the infeasibility of
finitely many linear systems over the integers.  Infeasibility over the
reals (decided here by exact Fourier-Motzkin elimination) is sufficient.

A feasible system leaves the entry *unverified*: real solutions do not imply
integer solutions, so no "invalid" verdict is ever produced.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .diagrams import Diagram
from .problems import SearchBudgetExceeded

__all__ = [
    "LinExpr",
    "Inequality",
    "ParamLine",
    "IneqSystem",
    "PsiEntry",
    "FMResult",
    "EntryReport",
    "right_closed_cuts",
    "hall_inequalities",
    "build_combined_line",
    "build_systems",
    "infeasible_over_reals",
    "verify_entry",
    "load_ledger",
]


@dataclass(frozen=True)
class LinExpr:
    """Integer-coefficient linear expression: const + sum(coeff * var)."""

    const: int = 0
    coeffs: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def make(const: int = 0, **coeffs: int) -> "LinExpr":
        return LinExpr(const, tuple(sorted(
            (v, c) for v, c in coeffs.items() if c != 0)))

    @staticmethod
    def var(name: str, coeff: int = 1) -> "LinExpr":
        return LinExpr.make(0, **{name: coeff})

    @staticmethod
    def from_dict(doc: dict) -> "LinExpr":
        const = int(doc.get("const", 0))
        coeffs = {v: int(c) for v, c in doc.items() if v != "const"}
        return LinExpr.make(const, **coeffs)

    def to_dict(self) -> dict:
        doc = {v: c for v, c in self.coeffs}
        if self.const:
            doc["const"] = self.const
        return doc

    def _as_map(self) -> dict[str, int]:
        return dict(self.coeffs)

    def __add__(self, other):
        if isinstance(other, int):
            other = LinExpr(other)
        m = self._as_map()
        for v, c in other.coeffs:
            m[v] = m.get(v, 0) + c
        return LinExpr.make(self.const + other.const, **m)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return LinExpr.make(-self.const, **{v: -c for v, c in self.coeffs})

    def __sub__(self, other):
        if isinstance(other, int):
            other = LinExpr(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k: int):
        return LinExpr.make(self.const * k, **{v: c * k for v, c in self.coeffs})

    __rmul__ = __mul__

    def evaluate(self, env: dict):
        total = self.const
        for v, c in self.coeffs:
            total += c * env[v]
        return total

    def variables(self) -> set[str]:
        return {v for v, _ in self.coeffs}

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def display(self) -> str:
        bits = []
        for v, c in self.coeffs:
            if c == 1:
                bits.append(f"+{v}" if bits else v)
            elif c == -1:
                bits.append(f"-{v}")
            else:
                bits.append(f"{c:+d}*{v}" if bits else f"{c}*{v}")
        if self.const or not bits:
            bits.append(f"{self.const:+d}" if bits else str(self.const))
        return "".join(bits)


@dataclass(frozen=True)
class Inequality:
    lhs: LinExpr
    rel: str  # "<=", ">=", "=="
    rhs: LinExpr

    def __post_init__(self):
        if self.rel not in ("<=", ">=", "=="):
            raise ValueError(f"bad relation {self.rel!r}")

    @staticmethod
    def le(lhs, rhs) -> "Inequality":
        return Inequality(_expr(lhs), "<=", _expr(rhs))

    @staticmethod
    def ge(lhs, rhs) -> "Inequality":
        return Inequality(_expr(lhs), ">=", _expr(rhs))

    @staticmethod
    def eq(lhs, rhs) -> "Inequality":
        return Inequality(_expr(lhs), "==", _expr(rhs))

    def negations(self) -> tuple["Inequality", ...]:
        """Integer negation: not(e <= v) becomes e >= v+1, and the negated
        equality splits into the two strict sides."""
        if self.rel == "<=":
            return (Inequality(self.lhs, ">=", self.rhs + 1),)
        if self.rel == ">=":
            return (Inequality(self.lhs, "<=", self.rhs - 1),)
        return (Inequality(self.lhs, "<=", self.rhs - 1),
                Inequality(self.lhs, ">=", self.rhs + 1))

    def holds(self, env: dict) -> bool:
        a = self.lhs.evaluate(env)
        b = self.rhs.evaluate(env)
        return a <= b if self.rel == "<=" else \
            a >= b if self.rel == ">=" else a == b

    def variables(self) -> set[str]:
        return self.lhs.variables() | self.rhs.variables()

    def display(self) -> str:
        rel = {"<=": "<=", ">=": ">=", "==": "="}[self.rel]
        return f"{self.lhs.display()} {rel} {self.rhs.display()}"

    def to_json(self) -> dict:
        return {"lhs": self.lhs.to_dict(), "rel": self.rel,
                "rhs": self.rhs.to_dict()}

    @staticmethod
    def from_json(doc: dict) -> "Inequality":
        return Inequality(LinExpr.from_dict(doc["lhs"]), doc["rel"],
                          LinExpr.from_dict(doc["rhs"]))


def _expr(x) -> LinExpr:
    return x if isinstance(x, LinExpr) else LinExpr(int(x))


def _proportional(a: LinExpr, b: LinExpr) -> bool:
    """True iff a == c*b for a rational c (used to accept exponent sums that
    match the degree only under an equality regime guard)."""
    av = dict(a.coeffs)
    bv = dict(b.coeffs)
    if set(av) != set(bv) or not bv:
        return False
    items = sorted(bv)
    ratio = Fraction(av[items[0]], bv[items[0]])
    if any(Fraction(av[v], bv[v]) != ratio for v in items[1:]):
        return False
    return Fraction(a.const) == ratio * b.const


@dataclass(frozen=True)
class ParamLine:
    """A configuration family: diagram labels with symbolic exponents.

    Part order is the authored order (it fixes the matching-variable
    indices), not a canonical sort.  ``side_constraints`` carry the line's
    own existence conditions: nonnegativity of free-variable exponents and
    any degree-regime guards.
    """

    name: str
    labels: tuple[str, ...]
    exponents: tuple[LinExpr, ...]
    side_constraints: tuple[Inequality, ...] = ()
    free_var: str | None = None

    def __post_init__(self):
        if len(self.labels) != len(self.exponents):
            raise ValueError("labels and exponents differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels in a line")

    @staticmethod
    def make(name, parts, *, degree: LinExpr, side=(), free_var=None) -> "ParamLine":
        labels = tuple(lab for lab, _ in parts)
        exps = tuple(_expr(e) for _, e in parts)
        total = LinExpr(0)
        for e in exps:
            total = total + e
        residual = total - degree
        if residual != LinExpr(0) and not any(
                q.rel == "==" and _proportional(residual, q.lhs - q.rhs)
                for q in side):
            raise ValueError(
                f"line {name}: exponents sum to {total.display()}, "
                f"expected {degree.display()}")
        return ParamLine(name, labels, exps, tuple(side), free_var)

    def rename_free_var(self, new: str) -> "ParamLine":
        if self.free_var is None or self.free_var == new:
            return self
        old = self.free_var

        def sub_expr(e: LinExpr) -> LinExpr:
            m = {v if v != old else new: c for v, c in e.coeffs}
            return LinExpr.make(e.const, **m)

        return ParamLine(
            self.name,
            self.labels,
            tuple(sub_expr(e) for e in self.exponents),
            tuple(Inequality(sub_expr(q.lhs), q.rel, sub_expr(q.rhs))
                  for q in self.side_constraints),
            new)

    def exponent_of(self, label: str) -> LinExpr:
        return self.exponents[self.labels.index(label)]

    def instantiate(self, env: dict) -> list[tuple[str, int]] | None:
        """Concrete parts for the environment, or None when a guard fails.
        Every emitted exponent is checked nonnegative."""
        for q in self.side_constraints:
            if not q.holds(env):
                return None
        out = []
        for lab, e in zip(self.labels, self.exponents):
            v = e.evaluate(env)
            if v < 0:
                raise ValueError(
                    f"line {self.name}: exponent of {lab} is {v} under {env}")
            if v > 0:
                out.append((lab, v))
        return out

    def display(self) -> str:
        return " ".join(f"{lab}^({e.display()})"
                        for lab, e in zip(self.labels, self.exponents))


@dataclass(frozen=True)
class IneqSystem:
    variables: tuple[str, ...]
    inequalities: tuple[Inequality, ...]
    description: str = ""

    def __post_init__(self):
        declared = set(self.variables)
        for q in self.inequalities:
            missing = q.variables() - declared
            if missing:
                raise ValueError(f"undeclared variables {sorted(missing)}")

    def holds(self, env: dict) -> bool:
        return all(q.holds(env) for q in self.inequalities)


@dataclass(frozen=True)
class PsiEntry:
    """One verification obligation: combining ``left`` and ``right`` with the
    join on (sup_left, sup_right) is dominated by one of the targets."""

    left: ParamLine
    right: ParamLine
    sup_left: str
    sup_right: str
    targets: tuple[tuple[ParamLine, LinExpr | None], ...]

    def __post_init__(self):
        if self.sup_left not in self.left.labels:
            raise ValueError(f"{self.sup_left!r} not in left line")
        if self.sup_right not in self.right.labels:
            raise ValueError(f"{self.sup_right!r} not in right line")
        used = set()
        for line in (self.left, self.right):
            if line.free_var is not None:
                if line.free_var in used:
                    raise ValueError("free variable name reused; rename first")
                used.add(line.free_var)
        for t, expr in self.targets:
            if t.free_var is not None:
                if t.free_var in used:
                    raise ValueError("free variable name reused; rename first")
                used.add(t.free_var)
                if expr is None:
                    raise ValueError(
                        f"target {t.name} has a free variable but no expression")


def right_closed_cuts(t: ParamLine, d: Diagram) -> list[tuple[str, ...]]:
    """Subsets of the line's labels closed under in-line diagram successors,
    ordered by size then by name."""
    ids = [d.id_of(lab) for lab in t.labels]
    succ = d.succ_masks
    line_mask = 0
    for i in ids:
        line_mask |= 1 << i
    cuts = []
    for pick in itertools.product((False, True), repeat=len(ids)):
        chosen = [i for i, p in zip(ids, pick) if p]
        mask = 0
        for i in chosen:
            mask |= 1 << i
        if all(succ[i] & line_mask & ~mask == 0 for i in chosen):
            cuts.append(tuple(t.labels[k] for k, p in enumerate(pick) if p))
    cuts.sort(key=lambda c: (len(c), tuple(sorted(c))))
    return cuts


def hall_inequalities(c: ParamLine, t: ParamLine, d: Diagram) -> list[Inequality]:
    """One matching-feasibility inequality per right-closed cut of the target.

    For a cut R, the labels of the combined line whose in-target successors
    all lie in R must fit into R's exponent budget.  Cuts forcing nothing
    (identically zero left side) are dropped.
    """
    succ = d.succ_masks
    t_ids = {lab: d.id_of(lab) for lab in t.labels}
    out = []
    for cut in right_closed_cuts(t, d):
        cut_set = set(cut)
        outside = 0
        for lab in t.labels:
            if lab not in cut_set:
                outside |= 1 << t_ids[lab]
        lhs = LinExpr(0)
        forced = False
        for lab, e in zip(c.labels, c.exponents):
            if succ[d.id_of(lab)] & outside == 0:
                lhs = lhs + e
                forced = True
        if not forced:
            continue
        rhs = LinExpr(0)
        for lab, e in zip(t.labels, t.exponents):
            if lab in cut_set:
                rhs = rhs + e
        out.append(Inequality(lhs, "<=", rhs))
    return out


@dataclass(frozen=True)
class CombinedLine:
    """Like ParamLine but allowing repeated labels (distinct matching cells
    can meet at the same diagram node)."""

    name: str
    parts: tuple[tuple[str, LinExpr], ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.parts)

    @property
    def exponents(self) -> tuple[LinExpr, ...]:
        return tuple(e for _, e in self.parts)

    def display(self) -> str:
        return " ".join(f"{lab}^({e.display()})" for lab, e in self.parts)


def build_combined_line(l1: ParamLine, l2: ParamLine,
                        sup_pair: tuple[str, str],
                        d: Diagram) -> tuple[CombinedLine, list[Inequality]]:
    """The symbolic combination of two lines with the join on ``sup_pair``.

    Introduces one matching variable per part pair: x_i_j counts the slots
    where part i of the first line meets part j of the second.  Returns the
    combined line (join part first, then the meet parts in row-major order)
    and its matching constraints: nonnegativity plus row and column sums,
    with the join slot subtracted from its own row and column.
    """
    d.require_valid()
    sup_l, sup_r = sup_pair
    i_sup = l1.labels.index(sup_l)
    j_sup = l2.labels.index(sup_r)
    ids1 = [d.id_of(lab) for lab in l1.labels]
    ids2 = [d.id_of(lab) for lab in l2.labels]
    names = d.names

    parts: list[tuple[str, LinExpr]] = [
        (names[d.sup(ids1[i_sup], ids2[j_sup])], LinExpr(1))]
    constraints: list[Inequality] = []
    xvars: dict[tuple[int, int], LinExpr] = {}
    for i in range(len(ids1)):
        for j in range(len(ids2)):
            x = LinExpr.var(f"x_{i + 1}_{j + 1}")
            xvars[(i, j)] = x
            parts.append((names[d.inf(ids1[i], ids2[j])], x))
            constraints.append(Inequality.ge(x, 0))
    for i in range(len(ids1)):
        row = LinExpr(0)
        for j in range(len(ids2)):
            row = row + xvars[(i, j)]
        constraints.append(Inequality.eq(
            row, l1.exponents[i] - (1 if i == i_sup else 0)))
    for j in range(len(ids2)):
        col = LinExpr(0)
        for i in range(len(ids1)):
            col = col + xvars[(i, j)]
        constraints.append(Inequality.eq(
            col, l2.exponents[j] - (1 if j == j_sup else 0)))

    combined = CombinedLine(
        name=f"combine({l1.name},{l2.name};{sup_l},{sup_r})",
        parts=tuple(parts))
    return combined, constraints


def build_systems(entry: PsiEntry, global_ineqs, d: Diagram,
                  ) -> list[IneqSystem]:
    """All negation systems for one obligation.

    The base system collects the global degree/defect restrictions, both
    input lines' side constraints, the matching constraints of the combined
    line, and the target free-variable definitions.  For every way of
    choosing one condition per target, the chosen conditions are negated
    over the integers and appended; the obligation is valid iff every such
    system is infeasible.
    """
    combined, a3 = build_combined_line(
        entry.left, entry.right, (entry.sup_left, entry.sup_right), d)
    base: list[Inequality] = list(global_ineqs)
    base += list(entry.left.side_constraints)
    base += list(entry.right.side_constraints)
    base += a3
    target_conditions: list[list[Inequality]] = []
    for t, expr in entry.targets:
        if t.free_var is not None:
            base.append(Inequality.eq(LinExpr.var(t.free_var), expr))
        conds = list(t.side_constraints)
        conds += hall_inequalities(combined, t, d)
        target_conditions.append(conds)

    variables = _collect_variables(base, target_conditions)
    systems: list[IneqSystem] = []
    for choice in itertools.product(*target_conditions):
        negated_alternatives = [q.negations() for q in choice]
        for alt in itertools.product(*negated_alternatives):
            desc = " & ".join(f"not({q.display()})" for q in choice)
            systems.append(IneqSystem(
                variables, tuple(base) + tuple(alt), desc))
    return systems


def _collect_variables(base, target_conditions) -> tuple[str, ...]:
    seen: set[str] = set()
    for q in base:
        seen |= q.variables()
    for conds in target_conditions:
        for q in conds:
            seen |= q.variables()
    head = [v for v in ("Delta", "d") if v in seen]
    rest = sorted(seen - set(head))
    return tuple(head + rest)


# -- exact Fourier-Motzkin ----------------------------------------------------

@dataclass(frozen=True)
class FMResult:
    infeasible: bool
    # infeasible: nonnegative multipliers per original inequality index
    # (equalities may get negative multipliers); combining yields 0 >= c > 0.
    certificate: tuple[tuple[int, Fraction], ...] | None = None
    witness: dict[str, Fraction] | None = None


class _Row:
    """expr >= 0 with provenance: expr = sum(combo[i] * original_i)."""

    __slots__ = ("coeffs", "const", "combo")

    def __init__(self, coeffs: dict[str, Fraction], const: Fraction,
                 combo: dict[int, Fraction]):
        self.coeffs = {v: c for v, c in coeffs.items() if c != 0}
        self.const = const
        self.combo = combo

    def scaled(self, k: Fraction) -> "_Row":
        return _Row({v: c * k for v, c in self.coeffs.items()},
                    self.const * k,
                    {i: m * k for i, m in self.combo.items()})

    def plus(self, other: "_Row") -> "_Row":
        coeffs = dict(self.coeffs)
        for v, c in other.coeffs.items():
            coeffs[v] = coeffs.get(v, 0) + c
        combo = dict(self.combo)
        for i, m in other.combo.items():
            combo[i] = combo.get(i, 0) + m
        return _Row(coeffs, self.const + other.const, combo)

    def key(self):
        return tuple(sorted(self.coeffs.items()))


def _ge_rows(idx: int, q: Inequality):
    """Original inequality as one or two rows (expr >= 0 each).

    The combo coefficient convention: +1 means the inequality in the
    direction 'rhs - lhs >= 0' for <=, 'lhs - rhs >= 0' for >=, and
    'lhs - rhs = 0' for equalities (which may be scaled by any sign).
    """
    diff_map: dict[str, Fraction] = {}
    for v, c in q.lhs.coeffs:
        diff_map[v] = diff_map.get(v, Fraction(0)) + c
    for v, c in q.rhs.coeffs:
        diff_map[v] = diff_map.get(v, Fraction(0)) - c
    const = Fraction(q.lhs.const - q.rhs.const)
    if q.rel == "<=":
        return [_Row({v: -c for v, c in diff_map.items()}, -const, {idx: Fraction(1)})]
    if q.rel == ">=":
        return [_Row(diff_map, const, {idx: Fraction(1)})]
    # equality: lhs - rhs = 0, tracked directly (handled by substitution)
    return [_Row(diff_map, const, {idx: Fraction(1)})]


def infeasible_over_reals(system: IneqSystem, *,
                          max_rows: int = 200_000) -> FMResult:
    """Decide feasibility over the rationals by Fourier-Motzkin elimination.

    Equalities are removed first by substitution.  An infeasible verdict
    carries an exact certificate (a combination of the original constraints
    summing to a negative constant); a feasible verdict carries a rational
    witness, re-verified by substitution before returning.  Raises
    :class:`SearchBudgetExceeded` if the row count explodes.
    """
    eq_rows: list[_Row] = []
    ineq_rows: list[_Row] = []
    for idx, q in enumerate(system.inequalities):
        rows = _ge_rows(idx, q)
        (eq_rows if q.rel == "==" else ineq_rows).extend(rows)

    # substitution of equalities: var = expr over remaining variables
    solved: list[tuple[str, dict[str, Fraction], Fraction, dict[int, Fraction]]] = []
    for eq in eq_rows:
        # substitute previously solved variables first
        for var, expr_c, expr_k, combo in solved:
            c = eq.coeffs.pop(var, Fraction(0))
            if c:
                for v2, c2 in expr_c.items():
                    eq.coeffs[v2] = eq.coeffs.get(v2, Fraction(0)) + c * c2
                eq.const += c * expr_k
                for i, m in combo.items():
                    eq.combo[i] = eq.combo.get(i, Fraction(0)) + c * m
        eq.coeffs = {v: c for v, c in eq.coeffs.items() if c != 0}
        if not eq.coeffs:
            if eq.const != 0:
                scale = Fraction(-1, eq.const)  # make the sum equal -1
                cert = tuple(sorted((i, m * scale) for i, m in eq.combo.items()))
                return FMResult(True, certificate=cert)
            continue
        var = min(eq.coeffs, key=lambda v: (abs(eq.coeffs[v]) != 1, v))
        a = eq.coeffs[var]
        expr_c = {v: -c / a for v, c in eq.coeffs.items() if v != var}
        expr_k = -eq.const / a
        combo = {i: -m / a for i, m in eq.combo.items()}
        solved.append((var, expr_c, expr_k, combo))

    # substitute solved variables into the inequality rows
    work: list[_Row] = []
    for row in ineq_rows:
        for var, expr_c, expr_k, combo in solved:
            c = row.coeffs.pop(var, Fraction(0))
            if c:
                for v2, c2 in expr_c.items():
                    row.coeffs[v2] = row.coeffs.get(v2, Fraction(0)) + c * c2
                row.const += c * expr_k
                for i, m in combo.items():
                    row.combo[i] = row.combo.get(i, Fraction(0)) + c * m
        row.coeffs = {v: c for v, c in row.coeffs.items() if c != 0}
        work.append(row)

    eliminated: list[tuple[str, list[_Row]]] = []
    while True:
        contradiction = next(
            (r for r in work if not r.coeffs and r.const < 0), None)
        if contradiction is not None:
            cert = tuple(sorted((i, m) for i, m in contradiction.combo.items()
                                if m != 0))
            return FMResult(True, certificate=cert)
        vars_left = sorted({v for r in work for v in r.coeffs})
        if not vars_left:
            break
        # eliminate the variable minimizing the product of positive and
        # negative occurrence counts
        def cost(v):
            pos = sum(1 for r in work if r.coeffs.get(v, 0) > 0)
            neg = sum(1 for r in work if r.coeffs.get(v, 0) < 0)
            return (pos * neg if pos and neg else max(pos, neg), v)
        var = min(vars_left, key=cost)
        pos = [r for r in work if r.coeffs.get(var, 0) > 0]
        neg = [r for r in work if r.coeffs.get(var, 0) < 0]
        rest = [r for r in work if not r.coeffs.get(var, 0)]
        eliminated.append((var, pos + neg))
        best: dict[tuple, _Row] = {}
        for r in rest:
            k = r.key()
            if k not in best or r.const < best[k].const:
                best[k] = r
        for p in pos:
            p1 = p.scaled(Fraction(1, p.coeffs[var]))
            for q in neg:
                combo_row = p1.scaled(Fraction(1)).plus(
                    q.scaled(Fraction(-1, q.coeffs[var])))
                combo_row.coeffs.pop(var, None)
                k = combo_row.key()
                if k not in best or combo_row.const < best[k].const:
                    best[k] = combo_row
        work = list(best.values())
        if len(work) > max_rows:
            raise SearchBudgetExceeded(
                f"Fourier-Motzkin exceeded {max_rows} rows")

    # feasible: rebuild a witness back-to-front
    env: dict[str, Fraction] = {}
    for var, rows in reversed(eliminated):
        lo, hi = None, None
        for r in rows:
            rest_val = r.const
            for v, c in r.coeffs.items():
                if v != var:
                    rest_val += c * env[v]
            a = r.coeffs[var]
            bound = -rest_val / a
            if a > 0:
                lo = bound if lo is None else max(lo, bound)
            else:
                hi = bound if hi is None else min(hi, bound)
        if lo is None and hi is None:
            env[var] = Fraction(0)
        elif lo is None:
            env[var] = hi
        elif hi is None:
            env[var] = lo
        else:
            env[var] = (lo + hi) / 2
    for var, expr_c, expr_k, _ in reversed(solved):
        val = expr_k
        for v, c in expr_c.items():
            val += c * env[v]
        env[var] = val
    for v in system.variables:
        env.setdefault(v, Fraction(0))
    assert all(q.holds(env) for q in system.inequalities), \
        "witness failed exact re-verification"
    return FMResult(False, witness=dict(sorted(env.items())))


def check_certificate(system: IneqSystem,
                      certificate: tuple[tuple[int, Fraction], ...]) -> bool:
    """Exact check: the combination is nonnegative on inequalities and sums
    to a negative constant."""
    total: dict[str, Fraction] = {}
    const = Fraction(0)
    for idx, mult in certificate:
        q = system.inequalities[idx]
        if q.rel != "==" and mult < 0:
            return False
        rows = _ge_rows(idx, q)
        assert len(rows) == 1
        r = rows[0]
        for v, c in r.coeffs.items():
            total[v] = total.get(v, Fraction(0)) + mult * c
        const += mult * r.const
    return all(c == 0 for c in total.values()) and const < 0


@dataclass(frozen=True)
class EntryReport:
    valid: bool
    systems: tuple[IneqSystem, ...]
    results: tuple[FMResult, ...]

    @property
    def first_feasible(self) -> int | None:
        for i, r in enumerate(self.results):
            if not r.infeasible:
                return i
        return None


def verify_entry(entry: PsiEntry, global_ineqs, d: Diagram) -> EntryReport:
    """Valid iff every negation system is infeasible over the reals.  A
    feasible system means unverified (its witness aids diagnosis), never
    invalid."""
    systems = build_systems(entry, global_ineqs, d)
    results = tuple(infeasible_over_reals(s) for s in systems)
    return EntryReport(all(r.infeasible for r in results),
                       tuple(systems), results)


# -- ledger --------------------------------------------------------------------

def load_ledger(doc: dict, registry: dict[str, ParamLine], d: Diagram):
    """Instantiate ledger entries against a named line registry.

    Free variables are renamed apart deterministically: f1/f2 for the
    combined lines, k1..kh for the targets.
    """
    global_ineqs = tuple(Inequality.from_json(q)
                         for q in doc.get("global_constraints", []))
    entries = []
    for ent in doc["entries"]:
        left = registry[ent["left"]].rename_free_var("f1") \
            if registry[ent["left"]].free_var else registry[ent["left"]]
        right = registry[ent["right"]].rename_free_var("f2") \
            if registry[ent["right"]].free_var else registry[ent["right"]]
        targets = []
        for pos, tdoc in enumerate(ent["targets"], start=1):
            t = registry[tdoc["line"]]
            if t.free_var is not None:
                t = t.rename_free_var(f"k{pos}")
                expr = LinExpr.from_dict(tdoc["free_var_expr"])
            else:
                expr = None
            targets.append((t, expr))
        entries.append(PsiEntry(left, right, ent["sup"][0], ent["sup"][1],
                                tuple(targets)))
    return global_ineqs, entries
