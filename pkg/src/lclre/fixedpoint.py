"""Fixed-point generation over a target diagram.

Runs the same combine/discard closure as the round-elimination step, but
with the diagram's supremum and infimum in place of union and intersection
and with domination read off diagram reachability.  The node side is closed
under the diagram, the edge side under the reversed diagram, and edge lines
are lifted to condensed form through the successor sets.  Each surviving
line keeps one derivation tree so a trivial result can be diagnosed and the
diagram tweaked.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import _engine
from ._engine import PruneFlags
from .diagrams import Diagram, reverse
from .problems import Configuration, Constraint, Problem
from .re_engine import CombineSpec

__all__ = [
    "ProvenanceTree",
    "d_combine",
    "d_dominates",
    "fp",
    "gen_lift",
    "fixed_point",
    "trivial_witness_provenance",
    "constraint_on_diagram",
]


@lru_cache(maxsize=64)
def _diagram_ops(d: Diagram) -> _engine.LatticeOps:
    d.require_valid()
    inf_t, sup_t = d._tables
    succ = d.succ_masks
    depth = _depths(d)
    return _engine.LatticeOps(
        sup=lambda a, b: sup_t[a][b],
        inf=lambda a, b: inf_t[a][b],
        leq=lambda a, b: bool(succ[a] >> b & 1),
        potential=lambda a: depth[a],
    )


def _depths(d: Diagram) -> tuple[int, ...]:
    """Longest-path depth per node; strictly increases along reachability."""
    order = d._topo
    assert order is not None
    depth = [0] * d.size
    out: dict[int, list[int]] = {i: [] for i in range(d.size)}
    for u, v in d.edges:
        out[u].append(v)
    for u in order:
        for v in out[u]:
            depth[v] = max(depth[v], depth[u] + 1)
    return tuple(depth)


def _check_singletons(c: Configuration):
    if not c.is_concrete():
        raise ValueError(
            "diagram configurations must use single diagram labels; "
            "expand condensed lines first")


def _to_parts(c: Configuration) -> _engine.Parts:
    _check_singletons(c)
    return tuple(sorted((s[0], k) for s, k in c.parts))


def _from_parts(parts: _engine.Parts) -> Configuration:
    return Configuration.make(((k,), c) for k, c in parts)


def d_combine(c1: Configuration, c2: Configuration, spec: CombineSpec,
              d: Diagram) -> Configuration:
    """Combine under the diagram: supremum on one matched pair, infima on the
    rest.  Total on a validated diagram, so no configuration is ever lost."""
    if c1.degree != c2.degree:
        raise ValueError("degree mismatch")
    _check_singletons(c1)
    _check_singletons(c2)
    ops = _diagram_ops(d)
    a = [s[0] for s in c1.slots()]
    b = [s[0] for s in c2.slots()]
    out = _engine.combine_slots(a, b, spec.matching, spec.union_slot, ops)
    assert out is not None  # lattice validity makes sup/inf total
    return _from_parts(tuple(sorted((k, 1) for k in out)))


def d_dominates(big: Configuration, small: Configuration, d: Diagram) -> bool:
    """Domination with 'replaceable by' read as diagram reachability."""
    if big.degree != small.degree:
        raise ValueError("degree mismatch")
    return _engine.dominates(_to_parts(big), _to_parts(small), _diagram_ops(d))


@dataclass(frozen=True)
class ProvenanceTree:
    """How one output line was derived: an input line, or a combination."""

    produced: Configuration
    leaf_index: int | None = None
    left: "ProvenanceTree | None" = None
    right: "ProvenanceTree | None" = None
    spec: CombineSpec | None = None

    @property
    def is_leaf(self) -> bool:
        return self.leaf_index is not None

    def replay(self, d: Diagram) -> Configuration:
        """Recompute this node from its children (identity for leaves)."""
        if self.is_leaf:
            return self.produced
        assert self.left is not None and self.right is not None
        return d_combine(self.left.produced, self.right.produced,
                         self.spec, d)

    def to_json(self, names) -> dict:
        doc = {"produced": self.produced.display(names)}
        if self.is_leaf:
            doc["kind"] = "leaf"
            doc["input_line"] = self.leaf_index
        else:
            doc["kind"] = "combine"
            doc["matching"] = list(self.spec.matching)
            doc["union_slot"] = self.spec.union_slot
            doc["left"] = self.left.to_json(names)
            doc["right"] = self.right.to_json(names)
        return doc


def constraint_on_diagram(c: Constraint, alphabet, d: Diagram) -> Constraint:
    """Reindex a constraint from a problem alphabet onto diagram node ids.

    Problem labels are matched to diagram nodes by name; a missing name is a
    coverage violation.
    """
    mapping = {}
    for i, name in enumerate(alphabet):
        try:
            mapping[i] = d.id_of(name)
        except KeyError:
            raise ValueError(
                f"problem label {name!r} is not a diagram node") from None
    lines = [Configuration.make(
        (tuple(sorted(mapping[i] for i in s)), k) for s, k in ln.parts)
        for ln in c.lines]
    return Constraint.make(lines, c.arity) if lines else Constraint.make([], c.arity)


def expanded_input_lines(input_constraint: Constraint) -> list[Configuration]:
    """The concrete configurations a closure starts from, in the order used
    by :func:`fp`; provenance leaf indices refer to this list."""
    out = []
    for ln in input_constraint.lines:
        for concrete in sorted(ln.expand()):
            out.append(Configuration.concrete(concrete))
    return out


def fp(input_constraint: Constraint, d: Diagram, *,
       prune: PruneFlags = PruneFlags.all(),
       max_rounds: int = 10_000,
       on_round=None,
       record_provenance: bool = True):
    """Close a constraint under diagram combination.

    The input lines (condensed lines are expanded first) are reduced to the
    diagram-maximal ones, then pairs are combined until nothing new appears.
    Returns (constraint, provenance) where provenance maps each surviving
    line to a :class:`ProvenanceTree`; labels are diagram node ids.
    """
    d.require_valid()
    ops = _diagram_ops(d)
    initial = [_to_parts(c) for c in expanded_input_lines(input_constraint)]
    if not initial:
        return Constraint.make([], input_constraint.arity), {}
    final, prov = _engine.closure(initial, ops, prune,
                                  filter_initial=True,
                                  max_rounds=max_rounds,
                                  on_round=on_round,
                                  record_provenance=record_provenance)
    out = Constraint.make([_from_parts(p) for p in final],
                          input_constraint.arity)
    trees: dict[Configuration, ProvenanceTree] = {}
    if record_provenance:
        memo: dict[_engine.Parts, ProvenanceTree] = {}

        def build(parts: _engine.Parts) -> ProvenanceTree:
            if parts in memo:
                return memo[parts]
            entry = prov[parts]
            cfg = _from_parts(parts)
            if entry[0] == "leaf":
                tree = ProvenanceTree(cfg, leaf_index=entry[1])
            else:
                _, left, right, phi, u = entry
                tree = ProvenanceTree(cfg, left=build(left),
                                      right=build(right),
                                      spec=CombineSpec(phi, u))
            memo[parts] = tree
            return tree

        for p in sorted(final):
            trees[_from_parts(p)] = build(p)
    return out, trees


def gen_lift(lines: Constraint, d: Diagram) -> Constraint:
    """Replace each label of each line by its successor set in the diagram."""
    d.require_valid()
    out = []
    for ln in lines.lines:
        _check_singletons(ln)
        out.append(Configuration.make(
            (d.gen(s[0]), k) for s, k in ln.parts))
    return Constraint.make(out, lines.arity) if out \
        else Constraint.make([], lines.arity)


def fixed_point(p: Problem, d: Diagram, *,
                prune: PruneFlags = PruneFlags.all(),
                max_rounds: int = 10_000,
                on_round=None,
                record_provenance: bool = True):
    """Produce the fixed-point relaxation of ``p`` induced by diagram ``d``.

    Node side: closure under ``d``.  Edge side: closure under the reversed
    diagram, lifted through successor sets.  The result's alphabet is the
    full diagram node set.  Returns (problem, node-side provenance).
    """
    d.require_valid()
    node_in = constraint_on_diagram(p.node_constraint, p.alphabet, d)
    edge_in = constraint_on_diagram(p.edge_constraint, p.alphabet, d)
    node, prov = fp(node_in, d, prune=prune, max_rounds=max_rounds,
                    on_round=on_round, record_provenance=record_provenance)
    edge, _ = fp(edge_in, reverse(d), prune=prune, max_rounds=max_rounds,
                 on_round=on_round, record_provenance=False)
    out = Problem(d.names, node, gen_lift(edge, d))
    return out, prov


def _slot_expressions(tree: ProvenanceTree, d: Diagram) -> list[str]:
    """One sup/inf expression per slot of the produced line, leaf labels as
    names, in the produced line's slot order."""
    names = d.names

    ops = _diagram_ops(d)

    def rec(node: ProvenanceTree) -> list[str]:
        slots = [s[0] for s in node.produced.slots()]
        if node.is_leaf:
            return [names[k] for k in slots]
        left_expr = rec(node.left)
        right_expr = rec(node.right)
        a = [s[0] for s in node.left.produced.slots()]
        b = [s[0] for s in node.right.produced.slots()]
        spec = node.spec
        raw_keys = []
        raw_expr = []
        for i, x in enumerate(a):
            y = b[spec.matching[i]]
            op, key = ("⊔", ops.sup(x, y)) if i == spec.union_slot \
                else ("⊓", ops.inf(x, y))
            raw_keys.append(key)
            raw_expr.append(f"{op}({left_expr[i]},{right_expr[spec.matching[i]]})")
        # align raw slots with the canonical slot order of the produced line
        order = sorted(range(len(raw_keys)), key=lambda i: raw_keys[i])
        assert [raw_keys[i] for i in order] == list(slots)
        return [raw_expr[i] for i in order]

    return rec(tree)


def trivial_witness_provenance(p_prime: Problem, prov, d: Diagram):
    """Derivations of the lines that make the generated problem 0-round
    solvable: (line, tree, per-slot expressions) per witness, empty when the
    problem is non-trivial."""
    import itertools
    edge = p_prime.expanded_edge
    de = p_prime.delta_edge
    out = []
    for line in p_prime.node_constraint.lines:
        labs = sorted(line.labels_used())
        ok = all(tuple(sorted(m)) in edge
                 for m in itertools.combinations_with_replacement(labs, de))
        if not ok:
            continue
        tree = prov.get(line)
        if tree is None:
            continue
        out.append((line, tree, _slot_expressions(tree, d)))
    return out
