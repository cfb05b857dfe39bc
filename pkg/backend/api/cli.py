import argparse
import json
import logging
import sys
from typing import List, Optional

from config import Config
from models.compile_models import CompilerConfig, LayoutStats
from models.errors import CompilationError, LayoutError, ProblemParseError
from services.compiler_service import CompilerService
from services.verifier import verify, verify_compiled
from storage.json_store import (
    canonical_json,
    group_constraints,
    layout_from_dict,
    load_json,
    load_problem,
    save_layout,
)
from api.render import RENDERERS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_COMPILE = 2
EXIT_VERIFY = 3
EXIT_IO = 4


def cmd_compile(args) -> int:
    """Compile a problem file into a layout file"""
    try:
        problem = load_problem(args.input)
    except FileNotFoundError as e:
        logger.error(f"CLI: {e}")
        return EXIT_IO
    except ProblemParseError as e:
        logger.error(f"CLI: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE

    try:
        cfg = CompilerConfig.from_config(
            strategy=args.strategy,
            beam_width=args.beam_width,
            candidate_combination_depth=args.depth,
            max_layers=args.max_layers,
            rng_seed=args.seed,
            trim=not args.no_trim,
        )
        cl = CompilerService(cfg).compile(problem)
    except (CompilationError, ValueError) as e:
        logger.error(f"CLI: compilation failed - {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_COMPILE

    save_layout(args.output, cl.layout, problem, cl.layers)

    if args.verify:
        report = verify_compiled(cl)
        print(canonical_json(report.to_dict()), end="")
        if not report.passed:
            return EXIT_VERIFY
    if args.groups:
        print(canonical_json({"groups": group_constraints(problem, cl.groups)}), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    """Check a layout file against a problem file and print the report"""
    try:
        problem = load_problem(args.problem)
        data = load_json(args.layout)
    except FileNotFoundError as e:
        logger.error(f"CLI: {e}")
        return EXIT_IO
    except (ProblemParseError, json.JSONDecodeError) as e:
        logger.error(f"CLI: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE

    report = verify(data, problem, exhaustive=args.exhaustive)
    print(canonical_json(report.to_dict()), end="")
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_render(args) -> int:
    renderer = RENDERERS.get(args.format)
    if renderer is None:
        logger.error(f"CLI: unknown format '{args.format}'")
        return EXIT_IO
    try:
        data = load_json(args.layout)
    except FileNotFoundError as e:
        logger.error(f"CLI: {e}")
        return EXIT_IO
    except json.JSONDecodeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE

    drawing = renderer(data)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(drawing)
    else:
        print(drawing, end="")
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        data = load_json(args.layout)
        layout = layout_from_dict(data)
    except FileNotFoundError as e:
        logger.error(f"CLI: {e}")
        return EXIT_IO
    except (json.JSONDecodeError, LayoutError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE

    stats = LayoutStats.of(layout, data.get("layers", 0))
    print(canonical_json(stats.to_dict()), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parity-forge",
        description="Compile optimization problems into parity-architecture plaquette layouts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a problem file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--strategy", choices=["greedy", "beam"], default=None)
    p.add_argument("--beam-width", type=int, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-layers", type=int, default=None)
    p.add_argument("--no-trim", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--groups", action="store_true", help="print the constraint realised by each group")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="verify a layout against a problem")
    p.add_argument("--layout", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--exhaustive", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="draw a layout")
    p.add_argument("--layout", required=True)
    p.add_argument("--format", default="ascii")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("stats", help="summarise a layout")
    p.add_argument("--layout", required=True)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    Config.validate()
    return args.func(args)
