"""Command-line entry point.

JSON goes to stdout with sorted keys, diagnostics to stderr. Exit codes:
0 on pass or full match, 2 when a property check fails or a replication
case does not match, 1 on usage, input or domain errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import map_classes as mc
from .calculus import function_from_json
from .capacities import (
    Capacity,
    OperatorCapacity,
    capacity_from_json,
    choquet_matrix,
    choquet_matrix_operator,
    inclusion_exclusion_matrix,
    sugeno_matrix,
)
from .errors import PosmapsError
from .herm import matrix_from_json, matrix_to_json
from .means import MeanSpec, mean_eval

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


def load_json(path):
    """Read a JSON file; malformed input is reported with its byte offset."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise UsageError(f"{path}: not UTF-8 at byte {exc.start}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise UsageError(f"{path}: malformed JSON at byte {offset} (line {exc.lineno}): {exc.msg}") from exc


def _load(path, what, fn):
    obj = load_json(path)
    try:
        return fn(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: invalid {what}: {exc}") from exc


# ----------------------------------------------------------------------------


def cmd_check_map(args) -> int:
    if args.campaign:
        config = load_json(args.campaign)
        if not isinstance(config, dict):
            raise UsageError(f"{args.campaign}: campaign config must be a JSON object")
    else:
        if not (args.map and args.property):
            raise UsageError("check-map needs --map and --property, or --campaign")
        config = {
            "map": args.map,
            "property": args.property,
            "dim": args.dim,
            "trials": args.trials,
            "seed": args.seed,
            "contraction_class": args.contraction_class,
        }
    try:
        mc.get_map(config["map"], int(config.get("dim", 2)))
    except KeyError as exc:
        raise UsageError(f"unknown map {config.get('map')!r}; see list-maps") from exc
    if config["property"] not in mc.PROPERTIES:
        raise UsageError(f"unknown property {config['property']!r}; choose from {', '.join(mc.PROPERTIES)}")
    print(f"seed={int(config.get('seed', 0))}", file=sys.stderr)
    try:
        report, extras = mc.run_campaign(config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for k, v in sorted(extras.items()):
        print(f"{k}={v!r}", file=sys.stderr)
    print(dumps(report.to_json()))
    return EXIT_FAIL if report.verdict == "fail" else EXIT_OK


def cmd_integrate(args) -> int:
    mu = _load(args.capacity, "capacity", capacity_from_json)
    a = _load(args.matrix, "matrix", matrix_from_json)
    if a.shape[0] != mu.n:
        raise UsageError(f"matrix dim {a.shape[0]} does not match capacity n = {mu.n}")
    if isinstance(mu, OperatorCapacity):
        if args.kind != "choquet":
            raise UsageError(f"--kind {args.kind} needs a scalar capacity")
        print(dumps(matrix_to_json(choquet_matrix_operator(mu, a))))
        return EXIT_OK
    assert isinstance(mu, Capacity)
    if args.kind == "choquet":
        val = choquet_matrix(mu, a)
    elif args.kind == "sugeno":
        val = sugeno_matrix(mu, a)
    else:
        val = inclusion_exclusion_matrix(mu, a, args.interaction, args.bound)
    print(dumps(float(val)))
    return EXIT_OK


def cmd_mean(args) -> int:
    f = _load(args.function, "function spec", function_from_json)
    a = _load(args.a, "matrix", matrix_from_json)
    b = _load(args.b, "matrix", matrix_from_json)
    print(dumps(matrix_to_json(mean_eval(MeanSpec(f), a, b))))
    return EXIT_OK


def cmd_list_maps(args) -> int:
    out = [
        {
            "name": m.name,
            "kind": m.kind,
            "in_dim": m.in_dim,
            "out_dim": m.out_dim,
            "expected_profile": m.expected_profile,
            "description": m.description,
        }
        for m in mc.builtin_maps(args.dim)
    ]
    print(dumps(out))
    return EXIT_OK


def cmd_replicate(args) -> int:
    from .replication import ledger_to_json, run_all

    print(f"seed={args.seed}", file=sys.stderr)
    entries = run_all(args.seed)
    doc = ledger_to_json(entries, args.seed)
    text = dumps(doc)
    if args.json:
        try:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise UsageError(f"{args.json}: {exc.strerror or exc}") from exc
        for e in entries:
            mark = "ok  " if e.matched else "MISS"
            print(f"{mark} {e.case.id:45s} verdict={e.report.verdict:12s} expected={e.case.expected}")
    else:
        print(text)
    n_ok = sum(e.matched for e in entries)
    print(f"{n_ok}/{len(entries)} cases matched", file=sys.stderr)
    return EXIT_OK if doc["all_matched"] else EXIT_FAIL


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="posmaps", description="Non-linear positive maps, operator means and capacity integrals.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("check-map", help="run a property campaign on a builtin map")
    c.add_argument("--map")
    c.add_argument("--property", choices=mc.PROPERTIES)
    c.add_argument("--dim", type=int, default=2)
    c.add_argument("--trials", type=int, default=200)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--contraction-class", choices=mc.CONTRACTION_CLASSES, default="positive")
    c.add_argument("--campaign", metavar="JSON", help="campaign config file (overrides the flags above)")
    c.set_defaults(fn=cmd_check_map)

    i = sub.add_parser("integrate", help="Choquet, Sugeno or inclusion-exclusion integral of a matrix")
    i.add_argument("--kind", choices=("choquet", "sugeno", "inclexcl"), required=True)
    i.add_argument("--capacity", required=True)
    i.add_argument("--matrix", required=True)
    i.add_argument("--interaction", choices=("min", "product"), default="min")
    i.add_argument("--bound", type=float, default=None, metavar="K")
    i.set_defaults(fn=cmd_integrate)

    m = sub.add_parser("mean", help="operator mean b^(1/2) f(b^(-1/2) a b^(-1/2)) b^(1/2)")
    m.add_argument("--function", required=True)
    m.add_argument("a")
    m.add_argument("b")
    m.set_defaults(fn=cmd_mean)

    lm = sub.add_parser("list-maps", help="builtin maps with their expected profiles")
    lm.add_argument("--dim", type=int, default=2)
    lm.set_defaults(fn=cmd_list_maps)

    r = sub.add_parser("replicate-paper", help="run the replication ledger")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--json", metavar="OUT")
    r.set_defaults(fn=cmd_replicate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"posmaps: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PosmapsError, ValueError) as exc:
        print(f"posmaps: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
