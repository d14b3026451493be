"""Command-line entry point.

Exit codes: 0 success/verified, 1 checked-and-false (trivial problem, not a
fixed point, invalid diagram), 2 usage or input error, 3 search budget or
iteration cap exceeded (undecided).  Output on stdout is canonical and
byte-stable; progress goes to stderr when --progress is given.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import catalog
from .diagrams import (Diagram, default_diagram, parse_diagram,
                       validate_lattice)
from .fixedpoint import fixed_point, trivial_witness_provenance
from .lincheck import load_ledger, check_certificate
from .problems import (ParseError, Problem, SearchBudgetExceeded,
                       canonical_json, parse_problem, zero_round_solvable)
from .re_engine import (IterationCapExceeded, PruneFlags, full_step,
                        is_fixed_point, re_step, rere_step)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def load_problem(path: str) -> Problem:
    text = _read(path)
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return Problem.from_json(json.loads(text))
    return parse_problem(text)


def load_diagram(path: str) -> Diagram:
    text = _read(path)
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return Diagram.from_json(json.loads(text))
    return parse_diagram(text)


def _emit_problem(p: Problem, as_json: bool) -> str:
    return canonical_json(p.to_json()) + "\n" if as_json else p.to_text()


def _emit_diagram(d: Diagram, as_json: bool) -> str:
    return canonical_json(d.to_json()) + "\n" if as_json else d.to_text()


def _progress(args):
    if args.progress:
        return lambda r, n: print(f"round {r}: {n} lines", file=sys.stderr)
    return None


def _prune(args) -> PruneFlags:
    return PruneFlags.all() if args.prune else PruneFlags.none()


# -- payload builders (shared verbatim with the HTTP service) -----------------

def payload_parse(p: Problem) -> dict:
    return {"problem": p.to_json()}


def payload_step(p: Problem, out: Problem) -> dict:
    return {"input": p.to_json(), "problem": out.to_json()}


def payload_trivial(p: Problem) -> dict:
    witness = zero_round_solvable(p)
    return {
        "solvable": witness is not None,
        "witness": witness.display(p.alphabet) if witness else None,
    }


def payload_fixedpoint(p: Problem, d: Diagram, prune: PruneFlags,
                       on_round=None) -> tuple[dict, dict]:
    from .fixedpoint import constraint_on_diagram, expanded_input_lines

    out, prov = fixed_point(p, d, prune=prune, on_round=on_round)
    trivial = payload_trivial(out)
    witnesses = trivial_witness_provenance(out, prov, d)
    payload = {
        "problem": out.to_json(),
        "trivial": trivial,
        "witness_lines": [line.display(out.alphabet) for line, _, _ in witnesses],
    }
    node_in = constraint_on_diagram(p.node_constraint, p.alphabet, d)
    prov_doc = {
        "alphabet": list(d.names),
        "input_lines": [c.display(d.names)
                        for c in expanded_input_lines(node_in)],
        "lines": [
            {
                "line": line.display(out.alphabet),
                "tree": tree.to_json(d.names),
                "is_witness": any(line == w for w, _, _ in witnesses),
                "expressions": next(
                    (e for w, _, e in witnesses if w == line), None),
            }
            for line, tree in sorted(prov.items())
        ],
    }
    return payload, prov_doc


def payload_validate(d: Diagram) -> dict:
    v = validate_lattice(d)
    return {"ok": v.ok, "kind": v.kind, "pair": list(v.pair) if v.pair else None}


def payload_verify_psi(doc: dict, entry_index: int | None) -> dict:
    from .catalog import def3col_diagram
    from .lines3col import node_line_registry
    from .lincheck import verify_entry

    d = def3col_diagram()
    glob, entries = load_ledger(doc, node_line_registry(), d)
    picked = list(enumerate(entries))
    if entry_index is not None:
        picked = [(entry_index, entries[entry_index])]
    out = []
    for idx, entry in picked:
        rep = verify_entry(entry, glob, d)
        systems = []
        for s, r in zip(rep.systems, rep.results):
            rec = {"negated": s.description, "infeasible": r.infeasible}
            if r.infeasible:
                rec["certificate"] = [[i, str(m)] for i, m in r.certificate]
                rec["certificate_ok"] = check_certificate(s, r.certificate)
            else:
                rec["witness"] = {v: str(x) for v, x in r.witness.items()}
            systems.append(rec)
        out.append({
            "entry": idx,
            "left": entry.left.name,
            "right": entry.right.name,
            "sup": [entry.sup_left, entry.sup_right],
            "num_systems": len(rep.systems),
            "valid": rep.valid,
            "systems": systems,
        })
    return {"entries": out, "all_valid": all(e["valid"] for e in out)}


# -- subcommands ---------------------------------------------------------------

def cmd_parse(args) -> int:
    p = load_problem(args.problem)
    sys.stdout.write(canonical_json(payload_parse(p)) + "\n" if args.json
                     else _emit_problem(p, False))
    return EXIT_OK


def _cmd_step(args, step) -> int:
    p = load_problem(args.problem)
    out = step(p, prune=_prune(args), on_round=_progress(args))
    sys.stdout.write(canonical_json(payload_step(p, out)) + "\n" if args.json
                     else _emit_problem(out, False))
    return EXIT_OK


def cmd_fixedpoint(args) -> int:
    p = load_problem(args.problem)
    d = load_diagram(args.diagram)
    payload, prov_doc = payload_fixedpoint(p, d, _prune(args), _progress(args))
    if args.provenance:
        with open(args.provenance, "w", encoding="utf-8") as f:
            f.write(canonical_json(prov_doc) + "\n")
    if args.json:
        sys.stdout.write(canonical_json(payload) + "\n")
    else:
        out = Problem.from_json(payload["problem"])
        sys.stdout.write(_emit_problem(out, False))
        t = payload["trivial"]
        verdict = f"trivial (witness {t['witness']})" if t["solvable"] \
            else "non-trivial"
        sys.stdout.write(f"# 0-round: {verdict}\n")
    return EXIT_OK


def cmd_check_trivial(args) -> int:
    p = load_problem(args.problem)
    t = payload_trivial(p)
    if args.json:
        sys.stdout.write(canonical_json(t) + "\n")
    else:
        sys.stdout.write(
            f"trivial: witness {t['witness']}\n" if t["solvable"]
            else "non-trivial\n")
    return EXIT_FALSE if t["solvable"] else EXIT_OK


def cmd_is_fixedpoint(args) -> int:
    p = load_problem(args.problem)
    report = is_fixed_point(p, prune=_prune(args), on_round=_progress(args))
    doc = {
        "is_fixed_point": report.is_fixed_point,
        "renaming": report.renaming,
        "diff": report.diff,
    }
    if args.json:
        sys.stdout.write(canonical_json(doc) + "\n")
    elif report.is_fixed_point:
        sys.stdout.write("fixed point\n")
    else:
        sys.stdout.write(f"not a fixed point: {report.diff}\n")
    if report.is_fixed_point is None:
        return EXIT_BUDGET
    return EXIT_OK if report.is_fixed_point else EXIT_FALSE


def cmd_default_diagram(args) -> int:
    p = load_problem(args.problem)
    d = default_diagram(p)
    sys.stdout.write(_emit_diagram(d, args.json))
    return EXIT_OK


def cmd_validate_diagram(args) -> int:
    d = load_diagram(args.diagram)
    doc = payload_validate(d)
    if args.json:
        sys.stdout.write(canonical_json(doc) + "\n")
    elif doc["ok"]:
        sys.stdout.write("ok\n")
    else:
        sys.stdout.write(f"violation: {doc['kind']} for {doc['pair']}\n")
    return EXIT_OK if doc["ok"] else EXIT_FALSE


def _render_tree(tree: dict, indent: str = "") -> str:
    if tree["kind"] == "leaf":
        return f"{indent}{tree['produced']}   (input line {tree['input_line']})\n"
    head = (f"{indent}{tree['produced']}   "
            f"(matching {tree['matching']}, join slot {tree['union_slot']})\n")
    return (head + _render_tree(tree["left"], indent + "  ")
            + _render_tree(tree["right"], indent + "  "))


def cmd_trace(args) -> int:
    with open(args.provenance, "r", encoding="utf-8") as f:
        doc = json.load(f)
    entry = next((ln for ln in doc["lines"] if ln["line"] == args.line), None)
    if entry is None:
        known = ", ".join(ln["line"] for ln in doc["lines"])
        print(f"error: line {args.line!r} not in provenance (have: {known})",
              file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        sys.stdout.write(canonical_json(entry) + "\n")
        return EXIT_OK
    sys.stdout.write(_render_tree(entry["tree"]))
    if entry.get("expressions"):
        sys.stdout.write("slot expressions:\n")
        for e in entry["expressions"]:
            sys.stdout.write(f"  {e}\n")
    return EXIT_OK


def cmd_verify_psi(args) -> int:
    with open(args.ledger, "r", encoding="utf-8") as f:
        doc = json.load(f)
    out = payload_verify_psi(doc, args.entry)
    if args.json:
        sys.stdout.write(canonical_json(out) + "\n")
    else:
        for e in out["entries"]:
            verdict = "valid" if e["valid"] else "unverified"
            sys.stdout.write(
                f"entry {e['entry']}: {e['left']} x {e['right']} "
                f"sup ({e['sup'][0]},{e['sup'][1]}): {e['num_systems']} "
                f"systems, {verdict}\n")
            if not e["valid"]:
                for i, s in enumerate(e["systems"]):
                    if not s["infeasible"]:
                        sys.stdout.write(
                            f"  system {i} [{s['negated']}] feasible: "
                            f"{s['witness']}\n")
    return EXIT_OK if out["all_valid"] else EXIT_FALSE


def cmd_catalog(args) -> int:
    if args.catalog_cmd == "list":
        for fam in catalog.FAMILIES:
            sys.stdout.write(fam + "\n")
        return EXIT_OK
    # emit
    if args.diagram:
        d = catalog.generate_diagram(args.family, delta=args.delta)
        sys.stdout.write(_emit_diagram(d, args.json))
    else:
        p = catalog.generate(args.family, delta=args.delta, colors=args.colors)
        sys.stdout.write(_emit_problem(p, args.json))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve
    serve(port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lclre",
        description="Round-elimination workbench for locally checkable "
                    "labeling problems")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, progress=True):
        p.add_argument("--json", action="store_true",
                       help="machine-readable output")
        if progress:
            p.add_argument("--progress", action="store_true",
                           help="stream round progress to stderr")
            p.add_argument("--no-prune", dest="prune", action="store_false",
                           help="disable the search shortcuts")
            p.set_defaults(prune=True)

    p = sub.add_parser("parse", help="canonicalize a problem")
    p.add_argument("problem")
    common(p, progress=False)
    p.set_defaults(func=cmd_parse)

    for name, step, help_ in (
            ("re", re_step, "one-round-easier problem (universal on edges)"),
            ("rere", rere_step, "dual step (universal on nodes)"),
            ("step", full_step, "full step with unused labels removed")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("problem")
        common(p)
        p.set_defaults(func=lambda a, s=step: _cmd_step(a, s))

    p = sub.add_parser("fixedpoint", help="fixed-point relaxation for a diagram")
    p.add_argument("problem")
    p.add_argument("diagram")
    p.add_argument("--provenance", metavar="OUT",
                   help="write derivation trees to a JSON file")
    common(p)
    p.set_defaults(func=cmd_fixedpoint)

    p = sub.add_parser("check-trivial", help="0-round solvability "
                       "(exit 1 when trivial)")
    p.add_argument("problem")
    common(p, progress=False)
    p.set_defaults(func=cmd_check_trivial)

    p = sub.add_parser("is-fixedpoint", help="does one full step return the "
                       "problem itself")
    p.add_argument("problem")
    common(p)
    p.set_defaults(func=cmd_is_fixedpoint)

    p = sub.add_parser("default-diagram", help="right-closed-subset diagram")
    p.add_argument("problem")
    common(p, progress=False)
    p.set_defaults(func=cmd_default_diagram)

    p = sub.add_parser("validate-diagram", help="lattice validity "
                       "(exit 1 on violation)")
    p.add_argument("diagram")
    common(p, progress=False)
    p.set_defaults(func=cmd_validate_diagram)

    p = sub.add_parser("trace", help="show the derivation of an output line")
    p.add_argument("provenance")
    p.add_argument("line")
    common(p, progress=False)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("verify-psi", help="verify a domination ledger")
    p.add_argument("ledger")
    p.add_argument("--entry", type=int, default=None)
    common(p, progress=False)
    p.set_defaults(func=cmd_verify_psi)

    p = sub.add_parser("catalog", help="built-in problem generators")
    csub = p.add_subparsers(dest="catalog_cmd", required=True)
    c = csub.add_parser("list")
    c.set_defaults(func=cmd_catalog)
    c = csub.add_parser("emit")
    c.add_argument("family")
    c.add_argument("--delta", type=int, default=None)
    c.add_argument("--colors", type=int, default=None)
    c.add_argument("--diagram", action="store_true",
                   help="emit the family's diagram instead of the problem")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_catalog)

    p = sub.add_parser("serve", help="local JSON service for the web UI")
    p.add_argument("--port", type=int, default=None,
                   help="defaults to $LCLRE_PORT or 8321")
    p.set_defaults(func=cmd_serve)

    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ParseError, FileNotFoundError, KeyError, ValueError,
            json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (SearchBudgetExceeded, IterationCapExceeded) as e:
        print(f"undecided: {e}", file=sys.stderr)
        return EXIT_BUDGET


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
