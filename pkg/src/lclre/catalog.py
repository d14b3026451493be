"""Generators for the worked problems and diagrams used as golden fixtures.

Families:

* ``sinkless-orientation`` -- at least one outgoing edge per node.
* ``c-coloring`` -- proper coloring with ``colors`` colors.
* ``delta-coloring-fp`` -- the color-set relaxation: a node may output any
  nonempty set of colors C on Delta-|C|+1 ports and blanks elsewhere;
  neighboring sets must be disjoint.
* ``def2col-fp`` -- the 10-label relaxation of 2-coloring with defect
  Delta-2.
* ``def3col-fp`` -- the 20-label relaxation of 3-coloring with defect
  d = floor((Delta-3)/2); its node constraint is generated from the
  symbolic line families in :mod:`lclre.lines3col`.

The small worked example (1-defective 2-coloring on 3-regular graphs) and
its two diagrams ship as data rather than generators.
"""

from __future__ import annotations

import itertools

from .diagrams import Diagram, subset_diagram
from .problems import Configuration, Constraint, Problem, parse_problem

__all__ = [
    "FAMILIES",
    "generate",
    "generate_diagram",
    "toy_problem",
    "toy_default_diagram",
    "toy_tweaked_diagram",
    "three_coloring_intermediate",
]

FAMILIES = (
    "sinkless-orientation",
    "c-coloring",
    "delta-coloring-fp",
    "def2col-fp",
    "def3col-fp",
)

# display order of set members, matching the usual boxed-token style
_MEMBER_ORDER = "ABCXY+"


def _subset_name(members) -> str:
    members = set(members)
    if not members:
        return "_"
    return "".join(m for m in _MEMBER_ORDER if m in members) or \
        "".join(sorted(members))


def _problem(alphabet, node_lines, edge_lines) -> Problem:
    """Build a problem from lines given as [(label name, count), ...] with
    label-set parts spelled as tuples of names."""
    ids = {n: i for i, n in enumerate(alphabet)}

    def conv(lines):
        out = []
        for ln in lines:
            out.append(Configuration.make(
                (tuple(ids[n] for n in (part if isinstance(part, tuple) else (part,))),
                 count)
                for part, count in ln))
        return Constraint.make(out)

    return Problem(tuple(alphabet), conv(node_lines), conv(edge_lines))


def sinkless_orientation(delta: int = 3) -> Problem:
    if delta < 2:
        raise ValueError("sinkless orientation needs degree >= 2")
    return _problem(
        ["I", "O"],
        [[(("I", "O"), delta - 1), ("O", 1)]],
        [[("I", 1), ("O", 1)]],
    )


def c_coloring(colors: int, delta: int = 3) -> Problem:
    if colors < 2:
        raise ValueError("need at least 2 colors")
    names = [chr(ord("A") + i) for i in range(colors)]
    node = [[(n, delta)] for n in names]
    edge = [[(a, 1), (b, 1)] for a, b in itertools.combinations(names, 2)]
    return _problem(names, node, edge)


# -- Delta-coloring fixed point ---------------------------------------------

def _color_subsets(delta: int):
    colors = [str(i) for i in range(1, delta + 1)]
    subsets = []
    for r in range(delta + 1):
        for combo in itertools.combinations(colors, r):
            subsets.append(frozenset(combo))
    return colors, subsets


def _color_set_name(s: frozenset) -> str:
    return "".join(sorted(s)) if s else "_"


def delta_coloring_fp(delta: int) -> Problem:
    """Node lines C^(Delta-|C|+1) _^(|C|-1); the edge constraint allows the
    disjoint pairs, condensed as [subsets of C][subsets of complement] per
    complementary pair (the form the combination closure leaves unchanged)."""
    if not 2 <= delta <= 9:
        raise ValueError("delta-coloring-fp supports 2 <= delta <= 9")
    colors, subsets = _color_subsets(delta)
    names = sorted((_color_set_name(s) for s in subsets), key=lambda n: (len(n), n))
    sets = {n: frozenset(n) if n != "_" else frozenset() for n in names}
    node = []
    for n in names:
        k = len(sets[n])
        if k == 0:
            continue
        line = [(n, delta - k + 1)]
        if k > 1:
            line.append(("_", k - 1))
        node.append(line)
    full = frozenset(colors)
    edge = []
    seen = set()
    for n in names:
        c1 = sets[n]
        c2 = full - c1
        if (c2, c1) in seen:
            continue
        seen.add((c1, c2))
        down1 = tuple(m for m in names if sets[m] <= c1)
        down2 = tuple(m for m in names if sets[m] <= c2)
        edge.append([(down1, 1), (down2, 1)])
    return _problem(names, node, edge)


def delta_coloring_diagram(delta: int) -> Diagram:
    _, subsets = _color_subsets(delta)
    return subset_diagram(subsets, member_order=[str(i) for i in range(1, delta + 1)])


# -- defective 2-coloring fixed point ----------------------------------------

_DEF2_LABELS = ["_", "X", "Y", "XY", "XY+", "AX", "BY", "AXY+", "BXY+", "ABXY+"]


def _def2_sets():
    return [frozenset(n) if n != "_" else frozenset() for n in _DEF2_LABELS]


def def2col_fp(delta: int) -> Problem:
    """The 10-label fixed point of 2-coloring with defect Delta-2."""
    if delta < 4:
        raise ValueError("def2col-fp needs delta >= 4")
    node = [
        [("X", delta - 2), ("AX", 2)],
        [("Y", delta - 2), ("BY", 2)],
        [("X", delta - 1), ("AXY+", 1)],
        [("Y", delta - 1), ("BXY+", 1)],
        [("_", 1), ("XY", delta - 3), ("AXY+", 1), ("BXY+", 1)],
        [("_", 1), ("XY", delta - 2), ("ABXY+", 1)],
        [("XY", delta - 1), ("XY+", 1)],
    ]
    edge = [
        [(("BY", "Y", "_"), 1), (("AX", "X", "_"), 1)],
        [(tuple(_DEF2_LABELS), 1), ("_", 1)],
        [(("AXY+", "AX", "XY+", "XY", "X", "Y", "_"), 1), (("Y", "_"), 1)],
        [(("BXY+", "BY", "XY+", "XY", "X", "Y", "_"), 1), (("X", "_"), 1)],
        [(("XY+", "XY", "X", "Y", "_"), 1), (("XY", "X", "Y", "_"), 1)],
    ]
    return _problem(_DEF2_LABELS, node, edge)


def def2col_diagram() -> Diagram:
    return subset_diagram(_def2_sets(), member_order=_MEMBER_ORDER)


# -- defective 3-coloring fixed point ----------------------------------------

def _def3_labels():
    base = _def2_sets()
    out = []
    for s in base:
        out.append(s)
        out.append(s | {"C"})
    return out


def _maximal_lines(lines, diagram):
    """Drop lines dominated on the diagram by another line of the family.

    Some instantiations coincide or are dominated in the tight-degree regime
    (e.g. a line ending in the two-color top label loses to its sibling that
    stays inside one branch); the fixed point is the maximal subset.
    """
    from .fixedpoint import d_dominates
    from .problems import Configuration

    ids = {n: diagram.id_of(n) for n in diagram.names}
    configs = []
    for parts in lines:
        configs.append((parts, Configuration.make(
            ((ids[lab],), c) for lab, c in parts)))
    out = []
    for parts, cfg in configs:
        if any(cfg != other and d_dominates(other, cfg, diagram)
               for _, other in configs):
            continue
        out.append(parts)
    return out


# the domination-maximal edge configurations: each maximal 2-color pair with
# the third color added to exactly one side
_DEF3_MAX_EDGES = [
    ("ACX", "BY"), ("AX", "BCY"),
    ("ABCXY+", "_"), ("ABXY+", "C"),
    ("ACXY+", "Y"), ("AXY+", "CY"),
    ("BCXY+", "X"), ("BXY+", "CX"),
    ("CXY+", "XY"), ("XY+", "CXY"),
]


def def3col_fp(delta: int) -> Problem:
    """The 20-label fixed point of defective 3-coloring, defect
    d = floor((Delta-3)/2); requires Delta >= 5.

    The edge constraint is condensed through diagram successor sets of its
    maximal configurations; its expansion is every 2-color edge configuration
    with the third color added to at most one side.
    """
    from .lines3col import instantiate_node_lines

    if delta < 5:
        raise ValueError("def3col-fp needs delta >= 5")
    d = (delta - 3) // 2
    labels = sorted({_subset_name(s) for s in _def3_labels()},
                    key=lambda n: (len(n), n))

    diagram = def3col_diagram()
    node_lines = _maximal_lines(instantiate_node_lines(delta, d), diagram)
    edge = []
    for a, b in _DEF3_MAX_EDGES:
        ga = tuple(diagram.names[i] for i in diagram.gen(diagram.id_of(a)))
        gb = tuple(diagram.names[i] for i in diagram.gen(diagram.id_of(b)))
        edge.append([(ga, 1), (gb, 1)])
    return _problem(labels, node_lines, edge)


def def3col_diagram() -> Diagram:
    return subset_diagram(_def3_labels(), member_order=_MEMBER_ORDER)


# -- worked example data ------------------------------------------------------

_TOY_TEXT = """\
# 1-defective 2-coloring on 3-regular graphs
A A [A X]
B B [B Y]

[A X] [B Y]
[X Y] [X Y]
"""

_TOY_TWEAKED_DIAGRAM_TEXT = """\
# default diagram of the example problem with XY split into XY and XY'
ABXY -> AXY
ABXY -> BXY
AXY -> A
AXY -> XY'
BXY -> B
BXY -> XY'
XY' -> XY
A -> X
B -> Y
XY -> X
XY -> Y
X -> _
Y -> _
"""


def toy_problem() -> Problem:
    return parse_problem(_TOY_TEXT)


def toy_default_diagram() -> Diagram:
    from .diagrams import default_diagram

    return default_diagram(toy_problem())


def toy_tweaked_diagram() -> Diagram:
    from .diagrams import parse_diagram

    return parse_diagram(_TOY_TWEAKED_DIAGRAM_TEXT)


_THREE_COLORING_INTERMEDIATE = """\
# one-round-easier form of 3-coloring on 3-regular graphs
[A C E] [A C E] [A C E]
[B C F] [B C F] [B C F]
[D E F] [D E F] [D E F]

A F
B E
C D
"""


def three_coloring_intermediate() -> Problem:
    return parse_problem(_THREE_COLORING_INTERMEDIATE)


# -- dispatch -----------------------------------------------------------------

def generate(family: str, *, delta: int | None = None,
             colors: int | None = None) -> Problem:
    if family == "sinkless-orientation":
        return sinkless_orientation(delta if delta is not None else 3)
    if family == "c-coloring":
        if colors is None:
            raise ValueError("c-coloring needs --colors")
        return c_coloring(colors, delta if delta is not None else 3)
    if family == "delta-coloring-fp":
        if delta is None:
            raise ValueError("delta-coloring-fp needs --delta")
        return delta_coloring_fp(delta)
    if family == "def2col-fp":
        if delta is None:
            raise ValueError("def2col-fp needs --delta")
        return def2col_fp(delta)
    if family == "def3col-fp":
        if delta is None:
            raise ValueError("def3col-fp needs --delta")
        return def3col_fp(delta)
    raise ValueError(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")


def generate_diagram(family: str, *, delta: int | None = None) -> Diagram:
    if family == "delta-coloring-fp":
        if delta is None:
            raise ValueError("delta-coloring-fp needs --delta")
        return delta_coloring_diagram(delta)
    if family == "def2col-fp":
        return def2col_diagram()
    if family == "def3col-fp":
        return def3col_diagram()
    raise ValueError(f"family {family!r} has no associated diagram")
