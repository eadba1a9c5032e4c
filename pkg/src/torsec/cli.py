"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 at least one per-alpha
precondition failure (report still written), 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from . import config as cfgmod
from .examples import CATALOG, list_examples
from .flows import FlowError, FlowSpec
from .graph import GraphError, ResourceLimitError
from .report import run

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_RESOURCE = 0, 2, 3, 4


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--flow", help="builtin flow name (overrides the config)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="builtin flow parameter; comma lists become vectors")
    p.add_argument("--alpha", action="append", default=None, metavar="A,B[,C]",
                   help="integer cohomology class (repeatable)")
    p.add_argument("--grid", type=int, nargs="+", help="cells per axis (one value or one per axis)")
    p.add_argument("--T", type=float, help="flow time per transition")
    p.add_argument("--epsilon", help='outer-approximation radius or "auto"')
    p.add_argument("--samples", type=int, help="samples per cell and axis")
    p.add_argument("--refine", type=int, help="refinement levels (level l uses factor 2**l)")
    p.add_argument("--window", type=int, help="label window for enumeration")
    p.add_argument("--level", type=float, action="append", help="cut level t in (0, 1) (repeatable)")
    p.add_argument("--max-sections", type=int, help="sections extracted per class")
    p.add_argument("--workers", type=int, help="worker threads for per-class analyses")
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-figures", action="store_true", help="skip SVG output")
    p.add_argument("--emit-graph", metavar="FILE", help="write the transition graph in the text format")
    p.add_argument("--quiet", action="store_true", help="do not print the report to stdout")


def _parse_params(items):
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise cfgmod.ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        try:
            parts = [float(v) for v in value.split(",")]
        except ValueError as exc:
            raise cfgmod.ConfigError(f"bad value in --param {item!r}") from exc
        out[key] = parts if len(parts) > 1 else parts[0]
    return out


def build_config(args, command: str) -> cfgmod.RunConfig:
    if args.config:
        cfg = cfgmod.load(args.config)
    elif args.flow in CATALOG:
        cfg = cfgmod.for_example(args.flow)
    elif args.flow:
        cfg = cfgmod.from_mapping({"flow": {"name": args.flow}})
    else:
        raise cfgmod.ConfigError("give --config or --flow")
    if args.flow and args.config or args.param:
        try:
            name = args.flow or cfg.flow.name
            params = dict(cfg.flow.params) if name == cfg.flow.name else {}
            params.update(_parse_params(args.param))
            flow = FlowSpec.builtin(name, cfg.flow.shift or None, **params)
        except FlowError as exc:
            raise cfgmod.ConfigError(str(exc)) from exc
        cfg = replace(cfg, flow=flow)
        if not args.config:
            cfg = replace(cfg, resolution=(cfg.resolution[0],) * flow.dimension)
    over = {}
    if args.alpha is not None:
        over["alphas"] = [cfgmod._alpha(a) for a in args.alpha]
    if args.grid:
        over["resolution"] = tuple(args.grid) if len(args.grid) > 1 else (args.grid[0],) * cfg.flow.dimension
    for key, attr in (("T", "T"), ("samples", "samples_per_cell"), ("refine", "refinement_levels"),
                      ("window", "window"), ("max_sections", "max_sections"), ("workers", "workers"),
                      ("out", "output_dir"), ("emit_graph", "emit_graph")):
        v = getattr(args, key)
        if v is not None:
            over[attr] = v
    if args.epsilon is not None:
        if args.epsilon == "auto":
            over["epsilon"] = "auto"
        else:
            try:
                over["epsilon"] = float(args.epsilon)
            except ValueError as exc:
                raise cfgmod.ConfigError(f"bad --epsilon {args.epsilon!r}") from exc
    if args.level:
        over["levels"] = list(args.level)
    if args.no_figures:
        over["figures"] = False
    if command != "run":
        over["commands"] = [command]
    cfg = replace(cfg, **over)
    return cfg.resolved()


def _glue_negative(argv):
    """Let negative classes through: argparse would read ``-1,0`` as an option.

    ``--alpha -1,0`` becomes ``--alpha=-1,0``; values after ``--pair`` get a
    leading space, which argparse does not treat as an option prefix.
    """
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a == "--alpha" and i + 1 < len(argv) and _negative(argv[i + 1]):
            out.append(f"--alpha={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
        if a == "--pair":
            for _ in range(2):
                if i < len(argv) and _negative(argv[i]):
                    out.append(" " + argv[i])
                    i += 1
                elif i < len(argv):
                    out.append(argv[i])
                    i += 1
    return out


def _negative(arg):
    return arg.startswith("-") and arg[1:2].isdigit()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="torsec", description="Cross-section analysis of flows on tori.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analyze": "existence, recurrence counts and cardinality per class",
        "directions": "support values per class and over a fan of covectors",
        "sections": "alpha-chain graph and windowed labelings",
        "extract": "synthesize and extract sections, with SVG figures",
        "fried-sum": "tabulate the Fried sum map for --pair classes",
        "run": "run the commands listed in the config file",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "fried-sum":
            p.add_argument("--pair", nargs=2, action="append", metavar=("A1", "A2"), default=[],
                           help="two classes to add (repeatable)")
    ex = sub.add_parser("examples", help="list the builtin fixtures")
    ex.add_argument("--json", action="store_true")
    args = parser.parse_args(_glue_negative(sys.argv[1:] if argv is None else list(argv)))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    if args.command == "examples":
        cat = list_examples()
        if args.json:
            print(json.dumps(cat, indent=2, sort_keys=True))
        else:
            for e in cat:
                print(f"{e['name']:<16} {e['locus']:<20} {e['summary']}")
        return EXIT_OK

    try:
        cfg = build_config(args, args.command)
        if args.command == "fried-sum":
            pairs = [(cfgmod._alpha(a), cfgmod._alpha(b)) for a, b in args.pair]
            cfg = replace(cfg, fried_pairs=pairs or cfg.fried_pairs)
            if not cfg.fried_pairs:
                raise cfgmod.ConfigError("fried-sum needs at least one --pair")
            cfg = cfg.resolved()
        result = run(cfg)
    except cfgmod.ConfigError as exc:
        print(f"torsec: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"torsec: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except GraphError as exc:
        print(f"torsec: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        print(json.dumps(_brief(result.report), indent=2, sort_keys=True))
    if result.precondition_failures:
        print(f"torsec: {result.precondition_failures} precondition failure(s); see report", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK


def _brief(report: dict) -> dict:
    """Short stdout view; the full document is in report.json."""
    out = []
    for a in report["alphas"]:
        b = {"alpha": a["alpha"], "existence": a["existence"]["verdict"],
             "reason": a["existence"]["reason"]}
        for key in ("cardinality", "fried_positive", "alpha_chain_count", "support"):
            if key in a:
                b[key] = a[key]
        if a["errors"]:
            b["errors"] = a["errors"]
        out.append(b)
    return {"flow": report["config"]["flow"]["name"], "alphas": out, "trend_flag": report["trend_flag"]}


if __name__ == "__main__":
    sys.exit(main())
