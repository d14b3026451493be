"""Target diagrams: DAGs over labels with unique per-pair infima and suprema.

A diagram drives the fixed-point combination rule.  ``Succ``/``Pred`` are
reachability (including the label itself); a valid diagram has, for every
pair, exactly one maximal common predecessor (the infimum) and exactly one
minimal common successor (the supremum).  Reachability and the inf/sup
tables are materialized once and reused by every query.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .problems import (ParseError, Problem, SearchBudgetExceeded,
                       check_label_name)

__all__ = [
    "Diagram",
    "LatticeViolation",
    "validate_lattice",
    "reverse",
    "edge_diagram",
    "right_closed_subsets",
    "default_diagram",
    "subset_diagram",
    "parse_diagram",
]


class LatticeViolation(ValueError):
    def __init__(self, kind: str, pair: tuple[str, ...]):
        self.kind = kind
        self.pair = pair
        super().__init__(f"{kind} for {pair}")


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    kind: str | None = None            # "cycle" | "no-unique-inf" | "no-unique-sup"
    pair: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Diagram:
    """Directed acyclic graph over named labels.

    ``edges`` is a generating set; reachability closure is derived, so edges
    obtainable by transitivity may be omitted from the input.
    """

    names: tuple[str, ...]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate diagram node names")
        n = len(self.names)
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise ValueError(f"bad edge ({u}, {v})")

    @staticmethod
    def build(names, edge_names) -> "Diagram":
        names = tuple(names)
        ids = {n: i for i, n in enumerate(names)}
        return Diagram(names, frozenset((ids[a], ids[b]) for a, b in edge_names))

    @property
    def size(self) -> int:
        return len(self.names)

    def id_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown diagram node {name!r}") from None

    @cached_property
    def _topo(self) -> tuple[int, ...] | None:
        """Topological order, or None if cyclic."""
        n = self.size
        out: list[list[int]] = [[] for _ in range(n)]
        indeg = [0] * n
        for u, v in self.edges:
            out[u].append(v)
            indeg[v] += 1
        queue = sorted(i for i in range(n) if indeg[i] == 0)
        order = []
        import heapq
        heapq.heapify(queue)
        while queue:
            u = heapq.heappop(queue)
            order.append(u)
            for v in out[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    heapq.heappush(queue, v)
        return tuple(order) if len(order) == n else None

    @property
    def is_acyclic(self) -> bool:
        return self._topo is not None

    @cached_property
    def succ_masks(self) -> tuple[int, ...]:
        """Bitmask of labels reachable from each label, including itself."""
        if self._topo is None:
            raise ValueError("diagram has a cycle")
        n = self.size
        succ = [1 << i for i in range(n)]
        out: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            out[u].append(v)
        for u in reversed(self._topo):
            for v in out[u]:
                succ[u] |= succ[v]
        return tuple(succ)

    @cached_property
    def pred_masks(self) -> tuple[int, ...]:
        n = self.size
        pred = [0] * n
        for i in range(n):
            m = self.succ_masks[i]
            j = 0
            while m:
                if m & 1:
                    pred[j] |= 1 << i
                m >>= 1
                j += 1
        return tuple(pred)

    def reaches(self, a: int, b: int) -> bool:
        """True iff b is reachable from a (b in Succ(a))."""
        return bool(self.succ_masks[a] >> b & 1)

    def succ_set(self, a: int) -> tuple[int, ...]:
        return _mask_bits(self.succ_masks[a])

    def gen(self, a: int) -> tuple[int, ...]:
        """gen of a label: its successor set, including the label itself."""
        return self.succ_set(a)

    def _unique_extremes(self, a: int, b: int):
        """(inf, sup) for the pair, either side None when not unique."""
        preds = self.pred_masks[a] & self.pred_masks[b]
        succs = self.succ_masks[a] & self.succ_masks[b]
        max_preds = [x for x in _mask_bits(preds)
                     if self.succ_masks[x] & preds == 1 << x]
        min_succs = [x for x in _mask_bits(succs)
                     if self.pred_masks[x] & succs == 1 << x]
        inf = max_preds[0] if len(max_preds) == 1 else None
        sup = min_succs[0] if len(min_succs) == 1 else None
        return inf, sup

    @cached_property
    def validation(self) -> ValidationResult:
        if not self.is_acyclic:
            return ValidationResult(False, "cycle", ())
        n = self.size
        for a in range(n):
            for b in range(a, n):
                inf, sup = self._unique_extremes(a, b)
                if inf is None:
                    return ValidationResult(False, "no-unique-inf",
                                            (self.names[a], self.names[b]))
                if sup is None:
                    return ValidationResult(False, "no-unique-sup",
                                            (self.names[a], self.names[b]))
        return ValidationResult(True)

    def require_valid(self):
        v = self.validation
        if not v.ok:
            raise LatticeViolation(v.kind, v.pair or ())

    @cached_property
    def _tables(self) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]]:
        self.require_valid()
        n = self.size
        inf_t = [[0] * n for _ in range(n)]
        sup_t = [[0] * n for _ in range(n)]
        for a in range(n):
            for b in range(a, n):
                inf, sup = self._unique_extremes(a, b)
                inf_t[a][b] = inf_t[b][a] = inf
                sup_t[a][b] = sup_t[b][a] = sup
        return (tuple(map(tuple, inf_t)), tuple(map(tuple, sup_t)))

    def inf(self, a: int, b: int) -> int:
        return self._tables[0][a][b]

    def sup(self, a: int, b: int) -> int:
        return self._tables[1][a][b]

    # -- serialization -------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        covered = set()
        for u, v in sorted(self.edges):
            lines.append(f"{self.names[u]} -> {self.names[v]}")
            covered.add(u)
            covered.add(v)
        for i, name in enumerate(self.names):
            if i not in covered:
                lines.append(f"node {name}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "nodes": list(self.names),
            "edges": sorted([self.names[u], self.names[v]] for u, v in self.edges),
        }

    @staticmethod
    def from_json(doc: dict) -> "Diagram":
        return Diagram.build([check_label_name(n) for n in doc["nodes"]],
                             doc["edges"])


def _mask_bits(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def parse_diagram(text: str) -> Diagram:
    """Parse the diagram text format: `a -> b` edges, `node x` declarations."""
    names: list[str] = []
    seen: set[str] = set()
    edges: list[tuple[str, str]] = []

    def add(name: str):
        check_label_name(name)
        if name not in seen:
            seen.add(name)
            names.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("node "):
            for tok in line[5:].split():
                add(tok)
            continue
        if "->" not in line:
            raise ParseError(f"expected 'a -> b' or 'node x', got {line!r}", lineno)
        left, _, right = line.partition("->")
        a, b = left.strip(), right.strip()
        if not a or not b or " " in a or " " in b:
            raise ParseError(f"malformed edge {line!r}", lineno)
        add(a)
        add(b)
        edges.append((a, b))
    return Diagram.build(sorted(names), edges)


def validate_lattice(d: Diagram) -> ValidationResult:
    """Check acyclicity and per-pair unique infimum/supremum.

    On success the reachability closure and inf/sup tables are materialized.
    """
    v = d.validation
    if v.ok:
        d._tables  # force
    return v


def reverse(d: Diagram) -> Diagram:
    return Diagram(d.names, frozenset((v, u) for u, v in d.edges))


def edge_diagram(p: Problem) -> Diagram:
    """The diagram of label replacements that preserve the edge constraint.

    There is an edge (l, l') iff l' != l and every expanded edge configuration
    containing l stays in the expanded edge constraint after replacing one
    occurrence of l with l'.
    """
    if not p.edge_constraint.lines:
        raise ValueError("edge constraint is empty")
    edge = p.expanded_edge
    n = len(p.alphabet)
    containing: list[list[tuple[int, ...]]] = [[] for _ in range(n)]
    for ln in edge:
        for lab in set(ln):
            containing[lab].append(ln)
    edges = set()
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            ok = True
            for ln in containing[a]:
                rest = list(ln)
                rest.remove(a)
                rest.append(b)
                if tuple(sorted(rest)) not in edge:
                    ok = False
                    break
            if ok:
                edges.add((a, b))
    return Diagram(p.alphabet, frozenset(edges))


def right_closed_subsets(d: Diagram, *, max_nodes: int = 24) -> list[tuple[int, ...]]:
    """All subsets S with l in S and (l, l') an edge implying l' in S.

    Enumerates 2^n masks, so it refuses diagrams with more than ``max_nodes``
    nodes.  Includes the empty set and the full node set, in canonical order
    (by size, then members).
    """
    if not d.is_acyclic:
        raise ValueError("diagram has a cycle")
    n = d.size
    if n > max_nodes:
        raise SearchBudgetExceeded(
            f"right-closed subset enumeration over {n} nodes exceeds the "
            f"{max_nodes}-node budget")
    succ = d.succ_masks
    out = []
    for mask in range(1 << n):
        closed = True
        m = mask
        while m:
            low = m & -m
            i = low.bit_length() - 1
            if succ[i] & ~mask:
                closed = False
                break
            m ^= low
        if closed:
            out.append(_mask_bits(mask))
    out.sort(key=lambda s: (len(s), s))
    return out


def _set_node_name(members: tuple[str, ...]) -> str:
    if not members:
        return "_"
    if all(len(m) == 1 for m in members):
        return "".join(members)
    return "{" + ",".join(members) + "}"


def default_diagram(p: Problem) -> Diagram:
    """Right-closed subsets of the edge diagram, ordered by strict superset.

    Subsets equal to gen(l) of an original label l keep the name of l; other
    subsets are named from their members; the empty set is named ``_``.
    Always a valid lattice: right-closed sets are closed under union and
    intersection.
    """
    ed = edge_diagram(p)
    subsets = right_closed_subsets(ed)
    gen_of = {ed.succ_masks[i]: p.alphabet[i] for i in range(len(p.alphabet))}
    names = []
    for s in subsets:
        mask = 0
        for i in s:
            mask |= 1 << i
        if mask in gen_of:
            names.append(gen_of[mask])
        else:
            names.append(_set_node_name(tuple(p.alphabet[i] for i in s)))
    sets = [frozenset(s) for s in subsets]
    edges = set()
    for i, a in enumerate(sets):
        for j, b in enumerate(sets):
            if i != j and b < a:
                edges.add((i, j))
    d = Diagram(tuple(names), frozenset(edges))
    d.require_valid()
    return d


def subset_diagram(sets, *, member_order=None) -> Diagram:
    """Diagram over the given label sets ordered by strict superset.

    ``sets`` is an iterable of collections of member tokens.  Whenever the
    collection is closed under pairwise union and intersection, the supremum
    is set intersection and the infimum is set union; in general the diagram
    is only required to validate as a lattice, which is checked here.
    """
    sets = [frozenset(s) for s in sets]
    if len(set(sets)) != len(sets):
        raise ValueError("duplicate label sets")
    if member_order is None:
        key = sorted
    else:
        pos = {m: i for i, m in enumerate(member_order)}
        def key(s):
            return sorted(s, key=lambda m: pos[m])
    names = [_set_node_name(tuple(key(s))) for s in sets]
    order = sorted(range(len(sets)), key=lambda i: (len(sets[i]), names[i]))
    sets = [sets[i] for i in order]
    names = [names[i] for i in order]
    edges = set()
    for i, a in enumerate(sets):
        for j, b in enumerate(sets):
            if i != j and b < a:
                edges.add((i, j))
    d = Diagram(tuple(names), frozenset(edges))
    d.require_valid()
    return d
