"""Command-line front end.

Usage:
  python -m dropmix check config.txt
  python -m dropmix synth config.txt -o graph.json [--dot graph.dot]
  python -m dropmix simulate graph.json --input config.txt
  python -m dropmix oracle config.txt [--target target.txt]
  python -m dropmix counterexample --d 3 -o out
  python -m dropmix reduce-3dm instance.txt -o out
  python -m dropmix depth1 source.txt target.txt

Exit codes: 0 affirmative, 1 negative verdict, 2 usage or input error,
3 search budget exhausted, 4 internal synthesis error.

The common options -v and --format go before or after the subcommand.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dropmix.configuration import Configuration, average, read_configuration
from dropmix.constants import (
    BUDGET_EXCEEDED,
    DEFAULT_EXTRA_BITS,
    DEFAULT_MAX_STATES,
    DEFAULT_STRATEGY,
    EXIT_INCONCLUSIVE,
    EXIT_INTERNAL,
    EXIT_NEGATIVE,
    EXIT_OK,
    EXIT_USAGE,
    REACHABLE,
)
from dropmix.graph import (
    format_steps,
    metrics,
    read_graph,
    serialize,
    simulate,
    to_dot,
)
from dropmix.hardness import (
    dinh_counterexample,
    read_3dm,
    reduce_3dm,
    reduce_3dm_sigma,
)
from dropmix.mixability import NotMixableError, is_perfectly_mixable
from dropmix.numeric import ParseError
from dropmix.oracle import BudgetExceededError, depth1_decide, reachable_bfs
from dropmix.synthesis_base import SynthesisError
from dropmix.utils import list_supported_strategies, sequence_frame, synthesize

logger = logging.getLogger(__name__)


def _emit(args, text: str, document: dict) -> None:
    if args.format == "json":
        print(json.dumps(document, indent=2, sort_keys=True))
    else:
        print(text)


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def cmd_check(args) -> int:
    C = read_configuration(args.config)
    verdict = is_perfectly_mixable(C)
    _emit(
        args,
        verdict.describe(),
        {"mixable": verdict.mixable, "reason": verdict.reason, "b": verdict.b},
    )
    return EXIT_OK if verdict else EXIT_NEGATIVE


def cmd_synth(args) -> int:
    C = read_configuration(args.config)
    result = synthesize(C, args.strategy)
    _write(Path(args.output), serialize(result.graph))
    if args.dot:
        _, values = simulate(result.graph, C)
        _write(Path(args.dot), to_dot(result.graph, values))
    if args.report:
        sequence_frame(C, result.sequence).to_csv(args.report, index=False)
    if args.log_steps and result.sequence:
        print(format_steps(result.sequence), end="")
    summary = metrics(result.graph, C)
    _emit(
        args,
        f"{len(result.sequence)} mixes, depth {summary.depth}, "
        f"max precision {summary.max_precision} ({result.path})",
        {
            "mixes": len(result.sequence),
            "depth": summary.depth,
            "max_precision": summary.max_precision,
            "path": result.path,
        },
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    G = read_graph(args.graph)
    C = read_configuration(args.input)
    outputs, _ = simulate(G, C)
    summary = metrics(G, C)
    _emit(
        args,
        f"outputs: {outputs}\n"
        f"depth: {summary.depth}\n"
        f"mixers: {summary.mixers}\n"
        f"max_precision: {summary.max_precision}",
        {
            "outputs": str(outputs),
            "depth": summary.depth,
            "mixers": summary.mixers,
            "max_precision": summary.max_precision,
        },
    )
    return EXIT_OK


def cmd_oracle(args) -> int:
    I = read_configuration(args.config)
    if args.target:
        T = read_configuration(args.target)
    else:
        mu = average(I)
        if mu is None:
            _emit(
                args,
                "UnreachableProven: average has no finite binary representation",
                {"status": "UnreachableProven", "states_explored": 0},
            )
            return EXIT_NEGATIVE
        T = Configuration({mu: I.n})
    if args.threads != 1:
        logger.info("the oracle runs single-threaded; ignoring --threads")
    verdict = reachable_bfs(I, T, args.extra_bits, args.max_states)
    text = f"{verdict.status} after {verdict.states_explored} states"
    if verdict.sequence:
        text += "\n" + format_steps(verdict.sequence).rstrip("\n")
    _emit(
        args,
        text,
        {
            "status": verdict.status,
            "states_explored": verdict.states_explored,
            "sequence": [str(step) for step in verdict.sequence or []],
        },
    )
    if verdict.status == REACHABLE:
        return EXIT_OK
    if verdict.status == BUDGET_EXCEEDED:
        return EXIT_INCONCLUSIVE
    return EXIT_NEGATIVE


def cmd_counterexample(args) -> int:
    I, T, G = dinh_counterexample(args.d)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    _write(outdir / "input.txt", I.to_text())
    _write(outdir / "target.txt", T.to_text())
    _write(outdir / "graph.json", serialize(G))
    depth = metrics(G, I).depth
    _emit(
        args,
        f"wrote {outdir}: n={I.n}, depth {depth}",
        {"n": I.n, "depth": depth, "directory": str(outdir)},
    )
    return EXIT_OK


def cmd_reduce_3dm(args) -> int:
    inst = read_3dm(args.instance)
    if args.sigma:
        I, T = reduce_3dm_sigma(inst, args.sigma)
    else:
        I, T = reduce_3dm(inst)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    _write(outdir / "input.txt", I.to_text())
    _write(outdir / "target.txt", T.to_text())
    _emit(
        args,
        f"wrote {outdir}: {I.n} droplets",
        {"n": I.n, "directory": str(outdir)},
    )
    return EXIT_OK


def cmd_depth1(args) -> int:
    I = read_configuration(args.source)
    T = read_configuration(args.target)
    pairs = depth1_decide(I, T)
    if pairs is None:
        _emit(args, "no depth-one graph", {"found": False, "pairs": []})
        return EXIT_NEGATIVE
    _emit(
        args,
        format_steps(pairs).rstrip("\n") if pairs else "all wires",
        {"found": True, "pairs": [str(step) for step in pairs]},
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dropmix",
        description="Perfect mixability of droplet configurations.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--format", choices=("text", "json"), default="text")
    # repeated on every subcommand; SUPPRESS keeps the top-level values
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v", "--verbose", action="count", default=argparse.SUPPRESS
    )
    common.add_argument(
        "--format", choices=("text", "json"), default=argparse.SUPPRESS
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "check", parents=[common], help="decide perfect mixability"
    )
    p.add_argument("config")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser(
        "synth", parents=[common], help="synthesize a perfect-mixing graph"
    )
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dot")
    p.add_argument(
        "--strategy",
        type=str.lower,
        choices=[name.lower() for name in list_supported_strategies()],
        default=DEFAULT_STRATEGY.lower(),
    )
    p.add_argument("--log-steps", action="store_true")
    p.add_argument("--report", help="write the mix table as CSV")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser(
        "simulate", parents=[common], help="evaluate a graph on an input"
    )
    p.add_argument("graph")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "oracle", parents=[common], help="brute-force reachability"
    )
    p.add_argument("config")
    p.add_argument("--target")
    p.add_argument("--extra-bits", type=int, default=DEFAULT_EXTRA_BITS)
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser(
        "counterexample", parents=[common], help="write the depth counterexample"
    )
    p.add_argument("--d", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser(
        "reduce-3dm", parents=[common], help="reduce a 3DM instance"
    )
    p.add_argument("instance")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sigma", type=int)
    p.set_defaults(func=cmd_reduce_3dm)

    p = sub.add_parser(
        "depth1", parents=[common], help="decide depth-one reachability"
    )
    p.add_argument("source")
    p.add_argument("target")
    p.set_defaults(func=cmd_depth1)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except NotMixableError as e:
        print(str(e), file=sys.stderr)
        return EXIT_NEGATIVE
    except BudgetExceededError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except SynthesisError as e:
        if args.verbose >= 2:
            logger.exception("synthesis failed")
        print(f"error: synthesis failed: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ParseError, ValueError, OSError) as e:
        if args.verbose >= 2:
            logger.exception("failed")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
