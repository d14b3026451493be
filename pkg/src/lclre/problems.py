"""Problems in the black-white formalism: labels, configurations, constraints.

A problem is a finite label alphabet plus a node constraint and an edge
constraint.  Each constraint is a set of *condensed configurations*: multisets
of label sets, where a set stands for "any one of these labels".  A condensed
configuration whose sets are all singletons is called *concrete*.

Everything here is immutable and canonicalized on construction, so equality
and hashing are structural and cheap.
"""

from __future__ import annotations

import itertools
import json
import re as _re
from dataclasses import dataclass
from functools import cached_property

__all__ = [
    "LabelSet",
    "Configuration",
    "Constraint",
    "Problem",
    "ParseError",
    "SearchBudgetExceeded",
    "parse_problem",
    "expand",
    "equal_up_to_renaming",
    "zero_round_solvable",
    "remove_unused_labels",
]

# A label set is a sorted, duplicate-free tuple of label ids.
LabelSet = tuple[int, ...]

_NAME_BAD_CHARS = set("[]^ \t\r\n")


class ParseError(ValueError):
    """Problem/diagram source text does not conform to the grammar."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", col {col}" if col is not None else "") + ")"
        super().__init__(message + where)


class SearchBudgetExceeded(Exception):
    """A bounded search ran out of budget; the answer is undecided, not 'no'."""


def check_label_name(name: str) -> str:
    if not name or any(c in _NAME_BAD_CHARS for c in name):
        raise ParseError(f"invalid label name {name!r}")
    return name


@dataclass(frozen=True, order=True)
class Configuration:
    """A multiset of label sets with run-length (exponent) storage.

    ``parts`` is sorted and merged: no two parts share the same label set and
    every multiplicity is positive.  Use :meth:`make` to build one.
    """

    parts: tuple[tuple[LabelSet, int], ...]

    @staticmethod
    def make(parts) -> "Configuration":
        merged: dict[LabelSet, int] = {}
        for labels, count in parts:
            if count <= 0:
                raise ValueError(f"multiplicity must be positive, got {count}")
            key = tuple(sorted(set(labels)))
            if not key:
                raise ValueError("empty label set in configuration")
            merged[key] = merged.get(key, 0) + count
        return Configuration(tuple(sorted(merged.items())))

    @staticmethod
    def concrete(labels) -> "Configuration":
        """Build a concrete configuration from a multiset of label ids."""
        counts: dict[int, int] = {}
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
        return Configuration(tuple(((lab,), c) for lab, c in sorted(counts.items())))

    @property
    def degree(self) -> int:
        return sum(c for _, c in self.parts)

    def is_concrete(self) -> bool:
        return all(len(s) == 1 for s, _ in self.parts)

    def label_sets(self) -> tuple[LabelSet, ...]:
        return tuple(s for s, _ in self.parts)

    def labels_used(self) -> set[int]:
        out: set[int] = set()
        for s, _ in self.parts:
            out.update(s)
        return out

    def slots(self) -> tuple[LabelSet, ...]:
        """The configuration as a flat tuple of per-slot label sets."""
        out = []
        for s, c in self.parts:
            out.extend([s] * c)
        return tuple(out)

    def expand(self) -> frozenset[tuple[int, ...]]:
        """All concrete configurations selectable from this condensed one.

        Concrete configurations are returned as sorted id tuples (multisets).
        Per-part expansion uses multiset choice, so a part [a b]^k contributes
        C(2+k-1, k) choices rather than 2^k slot assignments.
        """
        per_part = []
        for s, c in self.parts:
            per_part.append([tuple(m) for m in
                             itertools.combinations_with_replacement(s, c)])
        out = set()
        for pick in itertools.product(*per_part):
            flat: list[int] = []
            for m in pick:
                flat.extend(m)
            out.add(tuple(sorted(flat)))
        return frozenset(out)

    def display(self, names) -> str:
        chunks = []
        for s, c in self.parts:
            if len(s) == 1:
                item = names[s[0]]
            else:
                item = "[" + " ".join(names[i] for i in s) + "]"
            if c > 1:
                item += f"^{c}"
            chunks.append(item)
        return " ".join(chunks)


def expand(config: Configuration) -> frozenset[tuple[int, ...]]:
    return config.expand()


@dataclass(frozen=True)
class Constraint:
    """A set of condensed configurations, all of the same degree (arity)."""

    arity: int
    lines: tuple[Configuration, ...]

    @staticmethod
    def make(lines, arity: int | None = None) -> "Constraint":
        lines = tuple(sorted(set(lines)))
        if arity is None:
            if not lines:
                raise ValueError("cannot infer arity of an empty constraint")
            arity = lines[0].degree
        for ln in lines:
            if ln.degree != arity:
                raise ValueError(
                    f"inconsistent arity: line of degree {ln.degree} in a "
                    f"constraint of arity {arity}")
        return Constraint(arity, lines)

    @cached_property
    def expanded(self) -> frozenset[tuple[int, ...]]:
        out: set[tuple[int, ...]] = set()
        for ln in self.lines:
            out |= ln.expand()
        return frozenset(out)

    def same_expansion(self, other: "Constraint") -> bool:
        return self.arity == other.arity and self.expanded == other.expanded

    def labels_used(self) -> set[int]:
        out: set[int] = set()
        for ln in self.lines:
            out |= ln.labels_used()
        return out


@dataclass(frozen=True)
class Problem:
    """An LCL problem: alphabet plus node and edge constraints."""

    alphabet: tuple[str, ...]
    node_constraint: Constraint
    edge_constraint: Constraint

    def __post_init__(self):
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("duplicate label names")
        n = len(self.alphabet)
        for side in (self.node_constraint, self.edge_constraint):
            for lab in side.labels_used():
                if not 0 <= lab < n:
                    raise ValueError(f"label id {lab} outside alphabet")

    @property
    def delta(self) -> int:
        return self.node_constraint.arity

    @property
    def delta_edge(self) -> int:
        return self.edge_constraint.arity

    def name_of(self, lab: int) -> str:
        return self.alphabet[lab]

    def id_of(self, name: str) -> int:
        try:
            return self.alphabet.index(name)
        except ValueError:
            raise KeyError(f"unknown label {name!r}") from None

    @cached_property
    def expanded_node(self) -> frozenset[tuple[int, ...]]:
        return self.node_constraint.expanded

    @cached_property
    def expanded_edge(self) -> frozenset[tuple[int, ...]]:
        return self.edge_constraint.expanded

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        if not self.node_constraint.lines or not self.edge_constraint.lines:
            raise ValueError(
                "cannot serialize a problem with an empty constraint to text; "
                "use the JSON form")
        node = "\n".join(c.display(self.alphabet) for c in self.node_constraint.lines)
        edge = "\n".join(c.display(self.alphabet) for c in self.edge_constraint.lines)
        return node + "\n\n" + edge + "\n"

    def to_json(self) -> dict:
        def side(c: Constraint):
            return [[[ [self.alphabet[i] for i in s], k ] for s, k in ln.parts]
                    for ln in c.lines]
        return {
            "alphabet": list(self.alphabet),
            "node_arity": self.delta,
            "edge_arity": self.delta_edge,
            "node_lines": side(self.node_constraint),
            "edge_lines": side(self.edge_constraint),
        }

    @staticmethod
    def from_json(doc: dict) -> "Problem":
        alphabet = tuple(check_label_name(n) for n in doc["alphabet"])
        ids = {n: i for i, n in enumerate(alphabet)}

        def side(lines, arity):
            out = []
            for ln in lines:
                out.append(Configuration.make(
                    (tuple(ids[n] for n in labs), k) for labs, k in ln))
            return Constraint.make(out, arity)

        return Problem(
            alphabet,
            side(doc["node_lines"], doc.get("node_arity")),
            side(doc["edge_lines"], doc.get("edge_arity")),
        )

    def dumps(self) -> str:
        return canonical_json(self.to_json())


def canonical_json(doc) -> str:
    """One JSON serialization used everywhere, so outputs are byte-stable."""
    return json.dumps(doc, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


# -- parsing ---------------------------------------------------------------

_ITEM_RE = _re.compile(
    r"\[(?P<group>[^\[\]]*)\](?:\^(?P<gexp>\d+))?"
    r"|(?P<name>[^\s\[\]\^]+)(?:\^(?P<nexp>\d+))?")


def _parse_line(line: str, lineno: int):
    """One constraint line -> list of (name tuple, multiplicity)."""
    items = []
    pos = 0
    while pos < len(line):
        if line[pos].isspace():
            pos += 1
            continue
        m = _ITEM_RE.match(line, pos)
        if not m:
            raise ParseError(f"cannot read item starting at {line[pos:]!r}",
                             lineno, pos + 1)
        if m.group("group") is not None:
            names = m.group("group").split()
            if not names:
                raise ParseError("empty label group []", lineno, pos + 1)
            exp = m.group("gexp")
        else:
            names = [m.group("name")]
            exp = m.group("nexp")
        count = int(exp) if exp else 1
        if count < 1:
            raise ParseError("exponent must be a positive integer", lineno, pos + 1)
        for n in names:
            if "[" in n or "]" in n or "^" in n:
                raise ParseError(f"nested brackets in {n!r}", lineno, pos + 1)
        items.append((tuple(names), count))
        pos = m.end()
    return items


def parse_problem(text: str) -> Problem:
    """Parse the two-section problem text format.

    Node lines come first, then one blank line, then edge lines.  An item is
    a label token, a group ``[a b]``, or either followed by ``^k``.  Lines
    starting with ``#`` are comments.
    """
    sections: list[list[tuple[int, str]]] = [[]]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            if sections[-1]:
                sections.append([])
            continue
        sections[-1].append((lineno, line))
    if sections and not sections[-1]:
        sections.pop()
    if len(sections) != 2:
        raise ParseError(
            f"expected node section, blank line, edge section; "
            f"got {len(sections)} non-empty section(s)")
    for which, sec in zip(("node", "edge"), sections):
        if not sec:
            raise ParseError(f"empty {which} constraint section")

    parsed = [[(lineno, _parse_line(line, lineno)) for lineno, line in sec]
              for sec in sections]

    names = sorted({n for sec in parsed for _, items in sec
                    for nms, _ in items for n in nms})
    for n in names:
        check_label_name(n)
    ids = {n: i for i, n in enumerate(names)}

    def build(sec, which):
        lines = []
        arity = None
        for lineno, items in sec:
            cfg = Configuration.make(
                (tuple(ids[n] for n in nms), count) for nms, count in items)
            if arity is None:
                arity = cfg.degree
            elif cfg.degree != arity:
                raise ParseError(
                    f"inconsistent arity in {which} constraint: expected "
                    f"{arity}, got {cfg.degree}", lineno)
            lines.append(cfg)
        return Constraint.make(lines, arity)

    return Problem(tuple(names), build(parsed[0], "node"), build(parsed[1], "edge"))


# -- renaming equivalence ---------------------------------------------------

def _label_signatures(p: Problem, rounds: int = 3) -> list[int]:
    """Compressed occurrence signatures, refined a few rounds.

    Two labels can correspond under a renaming only if their signatures are
    equal.  The signature starts from per-side occurrence multiplicities and
    is refined with the signatures of co-occurring labels.
    """
    n = len(p.alphabet)
    node = [tuple(sorted(ln)) for ln in p.expanded_node]
    edge = [tuple(sorted(ln)) for ln in p.expanded_edge]

    def occurrences(lines):
        occ: list[list[tuple]] = [[] for _ in range(n)]
        for ln in lines:
            counts: dict[int, int] = {}
            for lab in ln:
                counts[lab] = counts.get(lab, 0) + 1
            for lab, c in counts.items():
                occ[lab].append((c, ln))
            # labels not in the line contribute nothing
        return occ

    node_occ = occurrences(node)
    edge_occ = occurrences(edge)

    sig = [0] * n
    for lab in range(n):
        base = (
            tuple(sorted(c for c, _ in node_occ[lab])),
            tuple(sorted(c for c, _ in edge_occ[lab])),
        )
        sig[lab] = hash(base)

    for _ in range(rounds):
        new = [0] * n
        for lab in range(n):
            ctx = []
            for occ in (node_occ[lab], edge_occ[lab]):
                bag = []
                for c, ln in occ:
                    bag.append((c, tuple(sorted(sig[x] for x in ln))))
                ctx.append(tuple(sorted(bag)))
            new[lab] = hash((sig[lab], ctx[0], ctx[1]))
        if new == sig:
            break
        sig = new
    return sig


def equal_up_to_renaming(p1: Problem, p2: Problem, *,
                         budget: int = 1_000_000) -> dict[str, str] | None:
    """Find a label bijection under which p1 and p2 coincide.

    Constraints are compared on their expansions, so different condensations
    of the same configuration set are equal.  Returns a name->name mapping,
    or None if no bijection exists.  Raises :class:`SearchBudgetExceeded`
    when the backtracking search exceeds ``budget`` steps (undecided).
    """
    if len(p1.alphabet) != len(p2.alphabet):
        return None
    if p1.delta != p2.delta or p1.delta_edge != p2.delta_edge:
        return None
    n1, e1 = p1.expanded_node, p1.expanded_edge
    n2, e2 = p2.expanded_node, p2.expanded_edge
    if len(n1) != len(n2) or len(e1) != len(e2):
        return None

    n = len(p1.alphabet)
    sig1 = _label_signatures(p1)
    sig2 = _label_signatures(p2)
    if sorted(sig1) != sorted(sig2):
        return None

    # candidate targets per source label, grouped by signature
    by_sig: dict[int, list[int]] = {}
    for lab in range(n):
        by_sig.setdefault(sig2[lab], []).append(lab)
    cands = [by_sig[sig1[lab]] for lab in range(n)]

    # per-label line indices for incremental checking
    lines1 = [tuple(sorted(ln)) for ln in sorted(n1)] + \
             [tuple(sorted(ln)) for ln in sorted(e1)]
    node_count = len(n1)
    touch: list[list[int]] = [[] for _ in range(n)]
    for idx, ln in enumerate(lines1):
        for lab in set(ln):
            touch[lab].append(idx)
    remaining = [len(set(ln)) for ln in lines1]

    order = sorted(range(n), key=lambda lab: (len(cands[lab]), lab))
    mapping = [-1] * n
    used = [False] * n
    steps = 0

    def line_ok(idx: int) -> bool:
        image = tuple(sorted(mapping[lab] for lab in lines1[idx]))
        return image in (n2 if idx < node_count else e2)

    def assign(pos: int) -> bool:
        nonlocal steps
        if pos == n:
            return True
        lab = order[pos]
        for target in cands[lab]:
            if used[target]:
                continue
            steps += 1
            if steps > budget:
                raise SearchBudgetExceeded(
                    f"renaming search exceeded {budget} steps")
            mapping[lab] = target
            used[target] = True
            ok = True
            completed = []
            for idx in touch[lab]:
                remaining[idx] -= 1
                completed.append(idx)
                if remaining[idx] == 0 and not line_ok(idx):
                    ok = False
                    break
            if ok and assign(pos + 1):
                return True
            for idx in completed:
                remaining[idx] += 1
            mapping[lab] = -1
            used[target] = False
        return False

    if not assign(0):
        return None

    # full verification (the incremental checks already imply this)
    remap_node = {tuple(sorted(mapping[x] for x in ln)) for ln in n1}
    remap_edge = {tuple(sorted(mapping[x] for x in ln)) for ln in e1}
    assert remap_node == set(n2) and remap_edge == set(e2)
    return {p1.alphabet[i]: p2.alphabet[mapping[i]] for i in range(n)}


# -- 0-round solvability -----------------------------------------------------

def zero_round_solvable(p: Problem) -> Configuration | None:
    """Return a witness node configuration if the problem is 0-round solvable.

    A problem is 0-round solvable iff some concrete node configuration uses
    only labels whose every delta_edge-multiset lies in the edge constraint.
    Returns the witness, or None when unsolvable.
    """
    edge = p.expanded_edge
    de = p.delta_edge
    good_cache: dict[frozenset[int], bool] = {}
    for ln in sorted(p.expanded_node):
        labs = frozenset(ln)
        ok = good_cache.get(labs)
        if ok is None:
            ok = all(tuple(sorted(m)) in edge
                     for m in itertools.combinations_with_replacement(sorted(labs), de))
            good_cache[labs] = ok
        if ok:
            return Configuration.concrete(ln)
    return None


def remove_unused_labels(p: Problem) -> Problem:
    """Drop alphabet entries appearing in no constraint line; re-densify ids."""
    used = sorted(p.node_constraint.labels_used() | p.edge_constraint.labels_used())
    if len(used) == len(p.alphabet):
        return p
    remap = {old: new for new, old in enumerate(used)}

    def conv(c: Constraint) -> Constraint:
        lines = [Configuration.make(
            (tuple(remap[i] for i in s), k) for s, k in ln.parts)
            for ln in c.lines]
        return Constraint.make(lines, c.arity)

    return Problem(tuple(p.alphabet[i] for i in used),
                   conv(p.node_constraint), conv(p.edge_constraint))
