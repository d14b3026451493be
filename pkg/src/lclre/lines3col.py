"""Symbolic node-line families of the defective-3-coloring fixed point.

The node constraint is a fixed set of parametric lines over the degree
``Delta`` and the defect ``d`` (with ``2d+3 <= Delta <= 2d+4``); some lines
carry a free integer variable ``j`` ranging over everything that keeps all
exponents nonnegative.  This registry is the single source of truth: the
catalog instantiates it for concrete degrees and the inequality verifier
consumes the same lines symbolically.

Line ids are ``case.index`` following the case split of the construction:
cases 1/2 are the two proper colors, 3/4 their relaxations, 5 the mixed
family, 6 the third-color relaxations, 7 the plain third color.
"""

from __future__ import annotations

from .lincheck import Inequality, LinExpr, ParamLine

__all__ = [
    "node_line_registry",
    "global_constraints",
    "instantiate_node_lines",
    "free_var_window",
]

_D = LinExpr.var("Delta")
_d = LinExpr.var("d")
_j = LinExpr.var("j")


def _ge0(expr) -> Inequality:
    return Inequality.ge(expr, 0)


def _line(name, parts, side=(), free=None) -> ParamLine:
    return ParamLine.make(name, parts, degree=_D, side=side, free_var=free)


def node_line_registry() -> dict[str, ParamLine]:
    D, d, j = _D, _d, _j
    # Delta > 3d+2 can hold only at the tight degree with defect 1, where
    # these lines are dominated by their unconditioned siblings; they are
    # kept for the verification ledger and filtered out of instantiations.
    big_regime = Inequality.ge(D, 3 * d + 3)
    tight_regime = Inequality.eq(D, 2 * d + 4)

    lines = [
        _line("1.1", [("_", d + 1), ("CX", d), ("ACX", D - 2 * d - 1)]),
        _line("1.2", [("X", 2 * d + 1), ("ACX", D - 2 * d - 1)]),
        _line("1.3", [("X", d), ("AX", D - d)]),

        _line("2.1", [("_", d + 1), ("CY", d), ("BCY", D - 2 * d - 1)]),
        _line("2.2", [("Y", 2 * d + 1), ("BCY", D - 2 * d - 1)]),
        _line("2.3", [("Y", d), ("BY", D - d)]),

        _line("3.1", [("_", d + 1), ("CX", d + 1), ("ACXY+", d),
                      ("ABCXY+", D - 3 * d - 2)], side=[big_regime]),
        _line("3.2", [("_", d + 1), ("CX", d + 1),
                      ("ACXY+", D - 2 * d - 2)]),
        _line("3.3", [("X", 2 * d + 2), ("ACXY+", d),
                      ("ABCXY+", D - 3 * d - 2)], side=[big_regime]),
        _line("3.4", [("X", 2 * d + 2), ("ACXY+", D - 2 * d - 2)]),
        _line("3.5", [("X", d + 1), ("AXY+", 2 * d + 1),
                      ("ABCXY+", D - 3 * d - 2)], side=[big_regime]),
        _line("3.6", [("X", d + 1), ("AXY+", D - d - 1)]),
        _line("3.7", [("X", d + 1), ("AXY+", d), ("ABXY+", D - 2 * d - 1)]),

        _line("4.1", [("_", d + 1), ("CY", d + 1), ("BCXY+", d),
                      ("ABCXY+", D - 3 * d - 2)], side=[big_regime]),
        _line("4.2", [("_", d + 1), ("CY", d + 1),
                      ("BCXY+", D - 2 * d - 2)]),
        _line("4.3", [("Y", 2 * d + 2), ("BCXY+", d),
                      ("ABCXY+", D - 3 * d - 2)], side=[big_regime]),
        _line("4.4", [("Y", 2 * d + 2), ("BCXY+", D - 2 * d - 2)]),
        _line("4.5", [("Y", d + 1), ("BXY+", 2 * d + 1),
                      ("ABCXY+", D - 3 * d - 2)], side=[big_regime]),
        _line("4.6", [("Y", d + 1), ("BXY+", D - d - 1)]),
        _line("4.7", [("Y", d + 1), ("BXY+", d), ("ABXY+", D - 2 * d - 1)]),

        _line("5.1", [("_", d + 2), ("CXY", j), ("ACXY+", d - j),
                      ("BCXY+", d - j), ("ABCXY+", D - 3 * d - 2 + j)],
              side=[_ge0(j), _ge0(d - j), _ge0(D - 3 * d - 2 + j)],
              free="j"),
        _line("5.2", [("_", LinExpr(1)), ("XY", d + 1 + j), ("ACXY+", d - j),
                      ("BCXY+", d - j), ("ABCXY+", D - 3 * d - 2 + j)],
              side=[_ge0(j), _ge0(d - j), _ge0(D - 3 * d - 2 + j)],
              free="j"),
        _line("5.3", [("_", LinExpr(1)), ("XY", j), ("AXY+", 2 * d + 1 - j),
                      ("BCXY+", d - j), ("ABCXY+", D - 3 * d - 2 + j)],
              side=[_ge0(j), _ge0(2 * d + 1 - j), _ge0(d - j),
                    _ge0(D - 3 * d - 2 + j)],
              free="j"),
        _line("5.4", [("_", LinExpr(1)), ("XY", j), ("ACXY+", d - j),
                      ("BXY+", 2 * d + 1 - j), ("ABCXY+", D - 3 * d - 2 + j)],
              side=[_ge0(j), _ge0(d - j), _ge0(2 * d + 1 - j),
                    _ge0(D - 3 * d - 2 + j)],
              free="j"),
        _line("5.5", [("_", LinExpr(1)), ("XY", j), ("AXY+", d - j),
                      ("BXY+", d - j), ("ABXY+", D - 2 * d - 1 + j)],
              side=[_ge0(j), _ge0(d - j), _ge0(D - 2 * d - 1 + j)],
              free="j"),

        _line("6.1", [("_", d + 1), ("CXY", d + 1), ("CXY+", LinExpr(1)),
                      ("ABCXY+", LinExpr(1))], side=[tight_regime]),
        _line("6.2", [("_", d + 1), ("CXY", 3 * d + 4 - D),
                      ("CXY+", 2 * D - 4 * d - 5)]),
        _line("6.3", [("XY", 2 * d + 2), ("CXY+", LinExpr(1)),
                      ("ABCXY+", LinExpr(1))], side=[tight_regime]),
        _line("6.4", [("XY", 4 * d + 5 - D), ("CXY+", 2 * D - 4 * d - 5)]),
        _line("6.5", [("XY", d + 1), ("XY+", d + 2),
                      ("ABCXY+", LinExpr(1))], side=[tight_regime]),
        _line("6.6", [("XY", 3 * d + 4 - D), ("XY+", 2 * D - 3 * d - 4)]),
        _line("6.7", [("XY", j), ("XY+", 2 * d + 3 - 2 * j),
                      ("ABXY+", D + j - 2 * d - 3)],
              side=[Inequality.ge(_j, 2), Inequality.le(_j, d + 1),
                    _ge0(D + j - 2 * d - 3)],
              free="j"),

        _line("7.1", [("_", d), ("C", D - d)]),
    ]
    return {ln.name: ln for ln in lines}


def global_constraints() -> tuple[Inequality, ...]:
    """Degree/defect regime: d >= 1, 2d+3 <= Delta <= 2d+4, Delta >= 5."""
    D, d = _D, _d
    return (
        Inequality.ge(d, 1),
        Inequality.le(D, 2 * d + 4),
        Inequality.ge(D, 2 * d + 3),
        Inequality.ge(D, 5),
    )


def free_var_window(delta: int) -> range:
    """Integer candidates for a line's free variable; the feasibility check
    against the side constraints and nonnegative exponents does the rest."""
    return range(-2 * delta, 2 * delta + 1)


def instantiate_node_lines(delta: int, d: int) -> list[list[tuple[str, int]]]:
    """All concrete node lines for one degree, as (label name, count) lists.

    Free variables range over every integer keeping all exponents
    nonnegative; fixed lines are emitted whenever their regime guard holds,
    and their exponents are asserted nonnegative.
    """
    env = {"Delta": delta, "d": d}
    out: list[list[tuple[str, int]]] = []
    for name, line in sorted(node_line_registry().items()):
        if line.free_var is None:
            parts = line.instantiate(env)
            if parts is not None:
                out.append(parts)
            continue
        for jv in free_var_window(delta):
            env2 = dict(env)
            env2[line.free_var] = jv
            if not all(q.holds(env2) for q in line.side_constraints):
                continue
            values = [e.evaluate(env2) for e in line.exponents]
            if any(v < 0 for v in values):
                continue
            out.append([(lab, v) for lab, v in zip(line.labels, values) if v > 0])
    return out
