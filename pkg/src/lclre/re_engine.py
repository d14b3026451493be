"""The pairwise-combination round elimination procedure.

The expensive side of a round elimination step (the universal quantifier) is
computed by repeatedly combining two configurations at a time: one matched
pair of label sets gets the union, the rest get intersections, results with
an empty set are discarded, and dominated configurations are dropped.  The
closure of this process equals the quantifier applied to the full input, and
a bounded brute-force enumeration of the quantifier is kept alongside as a
test oracle.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

from . import _engine
from ._engine import IterationCapExceeded, PruneFlags
from .problems import (Configuration, Constraint, LabelSet, Problem,
                       SearchBudgetExceeded, equal_up_to_renaming,
                       remove_unused_labels)

__all__ = [
    "CombineSpec",
    "PruneFlags",
    "IterationCapExceeded",
    "combine",
    "dominates",
    "discard_non_maximal",
    "newre",
    "exists_side",
    "re_step",
    "rere_step",
    "full_step",
    "is_fixed_point",
    "FixedPointReport",
    "brute_force_universal",
]

log = logging.getLogger("lclre")


@dataclass(frozen=True)
class CombineSpec:
    """A slot matching between two equal-degree configurations.

    ``matching[i]`` is the slot of the second configuration matched to slot
    ``i`` of the first (slots enumerate the canonical parts in order);
    ``union_slot`` is the first-configuration slot receiving the union.
    """

    matching: tuple[int, ...]
    union_slot: int


def _mask(labels: LabelSet) -> int:
    m = 0
    for i in labels:
        m |= 1 << i
    return m


def _unmask(mask: int) -> LabelSet:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _to_parts(config: Configuration) -> _engine.Parts:
    return tuple(sorted((_mask(s), c) for s, c in config.parts))


def _from_parts(parts: _engine.Parts) -> Configuration:
    return Configuration.make((_unmask(k), c) for k, c in parts)


_OPS = _engine.mask_ops(0)


def combine(c1: Configuration, c2: Configuration,
            spec: CombineSpec) -> Configuration | None:
    """Combine two configurations: union on one matched pair, intersections
    on the rest.  Returns None when a resulting set is empty."""
    if c1.degree != c2.degree:
        raise ValueError(f"degree mismatch: {c1.degree} != {c2.degree}")
    a = [_mask(s) for s in c1.slots()]
    b = [_mask(s) for s in c2.slots()]
    out = _engine.combine_slots(a, b, spec.matching, spec.union_slot, _OPS)
    if out is None:
        return None
    return Configuration.make((_unmask(k), 1) for k in out)


def dominates(big: Configuration, small: Configuration) -> bool:
    """True iff some slot bijection maps each set of ``small`` into a superset
    in ``big`` (checked as a matching feasibility, not permutation search)."""
    if big.degree != small.degree:
        raise ValueError("degree mismatch")
    return _engine.dominates(_to_parts(big), _to_parts(small), _OPS)


def discard_non_maximal(lines) -> set[Configuration]:
    """Drop every configuration strictly dominated by another in the set."""
    parts = [_to_parts(c) for c in lines]
    kept = _engine.discard_non_maximal(parts, _OPS)
    return {_from_parts(p) for p in kept}


def newre(input_constraint: Constraint, *,
          prune: PruneFlags = PruneFlags.all(),
          max_rounds: int = 10_000,
          on_round=None) -> Constraint:
    """Apply the universal quantifier to a set of condensed configurations.

    Returns the maximal configurations (an antichain under domination) whose
    every expansion lies in the expansion of the input.
    """
    if not input_constraint.lines:
        return input_constraint
    initial = [_to_parts(c) for c in input_constraint.lines]
    final, _ = _engine.closure(initial, _OPS, prune,
                               filter_initial=True,
                               max_rounds=max_rounds,
                               on_round=on_round)
    return Constraint.make([_from_parts(p) for p in final],
                           input_constraint.arity)


def exists_side(source: Constraint, new_alphabet: list[LabelSet]) -> Constraint:
    """Lift the existentially-quantified constraint onto the new alphabet.

    Each source label is replaced by the set of new labels (old-label sets)
    containing it.  Lines with a label covered by no new label are dropped
    with a warning.
    """
    containing: dict[int, tuple[int, ...]] = {}
    lines = []
    for ln in source.lines:
        old_labels = sorted(ln.labels_used())
        ok = True
        for lab in old_labels:
            if lab not in containing:
                containing[lab] = tuple(
                    i for i, s in enumerate(new_alphabet) if lab in s)
            if not containing[lab]:
                ok = False
                break
        if not ok:
            log.warning("exists_side: dropping line with uncovered label "
                        "(no new label contains it)")
            continue
        parts = []
        for s, c in ln.parts:
            members = sorted({i for lab in s for i in containing[lab]})
            parts.append((tuple(members), c))
        lines.append(Configuration.make(parts))
    return Constraint.make(lines, source.arity)


def _set_name(labels: LabelSet, old_names) -> str:
    if len(labels) == 1:
        return old_names[labels[0]]
    return "(" + ",".join(old_names[i] for i in labels) + ")"


def _assemble(old: Problem, universal: Constraint, exists_src: Constraint,
              universal_is_edge: bool) -> Problem:
    """Build the one-step problem from a computed universal side."""
    new_sets = sorted({s for ln in universal.lines for s in ln.label_sets()})
    names = [_set_name(s, old.alphabet) for s in new_sets]
    if len(set(names)) != len(names):  # defensive: user names made these collide
        names = [f"{n}#{i}" for i, n in enumerate(names)]
    index = {s: i for i, s in enumerate(new_sets)}

    uni_lines = [Configuration.make(((index[s],), c) for s, c in ln.parts)
                 for ln in universal.lines]
    uni = Constraint.make(uni_lines, universal.arity)
    exi = exists_side(exists_src, list(new_sets))

    if universal_is_edge:
        return Problem(tuple(names), exi, uni)
    return Problem(tuple(names), uni, exi)


def re_step(p: Problem, *, prune: PruneFlags = PruneFlags.all(),
            max_rounds: int = 10_000, on_round=None) -> Problem:
    """One round elimination step: universal quantifier on the edge side."""
    edge = newre(p.edge_constraint, prune=prune, max_rounds=max_rounds,
                 on_round=on_round)
    return _assemble(p, edge, p.node_constraint, universal_is_edge=True)


def rere_step(p: Problem, *, prune: PruneFlags = PruneFlags.all(),
              max_rounds: int = 10_000, on_round=None) -> Problem:
    """The dual step: universal quantifier on the node side."""
    node = newre(p.node_constraint, prune=prune, max_rounds=max_rounds,
                 on_round=on_round)
    return _assemble(p, node, p.edge_constraint, universal_is_edge=False)


def full_step(p: Problem, *, prune: PruneFlags = PruneFlags.all(),
              max_rounds: int = 10_000, on_round=None) -> Problem:
    """One full iteration of the one-round-easier sequence, pruned of labels
    that end up unused."""
    if not p.node_constraint.lines or not p.edge_constraint.lines:
        # nothing to combine; the step of an empty problem is empty
        empty_node = Constraint.make([], p.delta)
        empty_edge = Constraint.make([], p.delta_edge)
        return Problem((), empty_node, empty_edge)
    intermediate = re_step(p, prune=prune, max_rounds=max_rounds,
                           on_round=on_round)
    out = rere_step(intermediate, prune=prune, max_rounds=max_rounds,
                    on_round=on_round)
    return remove_unused_labels(out)


@dataclass(frozen=True)
class FixedPointReport:
    is_fixed_point: bool | None          # None = renaming search undecided
    intermediate: Problem | None
    stepped: Problem
    renaming: dict[str, str] | None
    diff: str | None = None


def is_fixed_point(p: Problem, *, prune: PruneFlags = PruneFlags.all(),
                   max_rounds: int = 10_000,
                   rename_budget: int = 1_000_000,
                   on_round=None) -> FixedPointReport:
    """Check whether one full step returns the problem itself (up to
    renaming); the intermediate problem is reported alongside."""
    if not p.node_constraint.lines or not p.edge_constraint.lines:
        stepped = full_step(p)
        same = not stepped.node_constraint.lines and \
            not stepped.edge_constraint.lines and \
            not p.node_constraint.lines and not p.edge_constraint.lines
        return FixedPointReport(same, None, stepped, None,
                                None if same else "degenerate problem")
    intermediate = re_step(p, prune=prune, max_rounds=max_rounds,
                           on_round=on_round)
    out = rere_step(intermediate, prune=prune, max_rounds=max_rounds,
                    on_round=on_round)
    stepped = remove_unused_labels(out)
    try:
        renaming = equal_up_to_renaming(stepped, p, budget=rename_budget)
    except SearchBudgetExceeded:
        return FixedPointReport(None, intermediate, stepped, None,
                                "renaming search budget exceeded")
    if renaming is None:
        diff = (f"stepped problem differs: {len(stepped.alphabet)} labels / "
                f"{len(stepped.expanded_node)} node / "
                f"{len(stepped.expanded_edge)} edge configurations vs "
                f"{len(p.alphabet)} / {len(p.expanded_node)} / "
                f"{len(p.expanded_edge)}")
        return FixedPointReport(False, intermediate, stepped, None, diff)
    return FixedPointReport(True, intermediate, stepped, renaming)


def brute_force_universal(input_constraint: Constraint, num_labels: int, *,
                          max_labels: int = 6,
                          max_arity: int = 4) -> Constraint:
    """Test oracle: enumerate every arity-multiset over nonempty label sets,
    keep those whose full expansion is allowed, drop dominated ones.

    Doubly exponential; refuses alphabets beyond ``max_labels`` and arities
    beyond ``max_arity``.
    """
    arity = input_constraint.arity
    if num_labels > max_labels:
        raise ValueError(f"brute force limited to {max_labels} labels")
    if arity > max_arity:
        raise ValueError(f"brute force limited to arity {max_arity}")
    allowed = input_constraint.expanded
    masks = list(range(1, 1 << num_labels))
    bits = {m: _unmask(m) for m in masks}
    good = []
    for combo in itertools.combinations_with_replacement(masks, arity):
        ok = True
        for pick in itertools.product(*(bits[m] for m in combo)):
            if tuple(sorted(pick)) not in allowed:
                ok = False
                break
        if ok:
            good.append(Configuration.make(
                (bits[m], 1) for m in combo))
    if not good:
        return Constraint.make([], arity)
    return Constraint.make(sorted(discard_non_maximal(good)), arity)
