import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from pydanticquasimap.base_models import (
    ConfigError,
    CorpusError,
    PipelineIntegrityError,
    PresentationError,
    PresentationMixError,
    UnboundedFiberError,
    parse_int_matrix,
)
from pydanticquasimap.cli.corpus import run_corpus
from pydanticquasimap.cli.models import BigIBlock, InsertionBlock, JobConfig, OutputFormat, parse_config, run_job
from pydanticquasimap.cli.render import render, render_big_i, render_big_i_json
from pydanticquasimap.ifunction.models import LefschetzMode, RunMode

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTEGRITY = 3
EXIT_UNBOUNDED = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pydanticquasimap", description="Exact small I-functions of GIT quotients")
    parser.add_argument("--config", type=Path, help="job config (XML)")
    parser.add_argument("--mode", choices=[m.value for m in RunMode])
    parser.add_argument("--max-degree", type=Fraction, help="theta-degree bound, p/q allowed")
    parser.add_argument("--denominator-bound", type=int)
    parser.add_argument("--convexity", choices=[m.value for m in LefschetzMode])
    parser.add_argument("--equivariant", action="store_true", default=None)
    parser.add_argument("--big-i", metavar="SPEC", help="ORDER:POLY@ETA;ETA[:POLY@ETA...], e.g. 1:x1@1")
    parser.add_argument("--output", choices=[f.value for f in OutputFormat])
    parser.add_argument("--out", type=Path, help="write here instead of stdout")
    parser.add_argument("--corpus", nargs="?", const="", metavar="DIR", help="run the regression corpus")
    parser.add_argument("--verbose", "-v", action="count", default=0)
    return parser


def parse_big_i(spec: str) -> BigIBlock:
    order, _, rest = spec.partition(":")
    try:
        t_order = int(order)
    except ValueError as E:
        raise ConfigError(f"t-order must be an integer, got {order!r}", field="--big-i") from E
    insertions = []  # type: List[InsertionBlock]
    for part in rest.split(":") if rest else []:
        polynomial, _, characters = part.partition("@")
        if not characters:
            raise ConfigError(f"insertion {part!r} has no characters", field="--big-i")
        parse_int_matrix(characters, "--big-i")
        insertions.append(InsertionBlock(polynomial=polynomial, characters=characters))
    return BigIBlock(t_order=t_order, insertion=insertions)


def apply_overrides(config: JobConfig, args: argparse.Namespace) -> JobConfig:
    run = {}
    if args.mode:
        run["mode"] = RunMode(args.mode)
    if args.max_degree is not None:
        run["max_degree"] = args.max_degree
    if args.denominator_bound is not None:
        run["denominator_bound"] = args.denominator_bound
    if args.convexity:
        run["convexity"] = LefschetzMode(args.convexity)
    if args.equivariant:
        run["equivariant"] = True
    output = {}
    if args.output:
        output["format"] = OutputFormat(args.output)
    if args.out:
        output["destination"] = str(args.out)
    update = dict(run=config.run.copy(update=run), output=config.output.copy(update=output))
    if args.big_i:
        update["big_i"] = parse_big_i(args.big_i)
    return config.copy(update=update)


def write(text: str, destination: Optional[str]) -> None:
    if destination and destination != "-":
        Path(destination).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING)

    try:
        if args.corpus is not None:
            report = run_corpus(args.corpus or None)
            write(report.summary(), str(args.out) if args.out else None)
            return EXIT_OK if report.ok else EXIT_FAILED

        if args.config is None:
            raise ConfigError("--config is required", field="--config")
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as E:
            raise ConfigError(str(E), field="--config") from E
        config = apply_overrides(parse_config(text), args)
        result = run_job(config)
        output = config.output
        if result.big_i is not None and output.format == OutputFormat.JSON:
            text = render_big_i_json(result.big_i)
        elif result.big_i is not None:
            text = render_big_i(result.big_i, output.symbol_names, output.factored)
        else:
            text = render(result.series, output.format, output.symbol_names, output.factored)
        for diagnostic in result.series.diagnostics:
            logger.info("%s: %s", diagnostic.kind.value, diagnostic.message)
        write(text, output.destination)
        return EXIT_OK
    except (ConfigError, PresentationError, PresentationMixError, CorpusError) as E:
        sys.stderr.write(f"error: {E}\n")
        return EXIT_CONFIG
    except UnboundedFiberError as E:
        sys.stderr.write(f"unbounded enumeration: {E}\n")
        return EXIT_UNBOUNDED
    except PipelineIntegrityError as E:
        sys.stderr.write(f"pipeline integrity: {E}\n")
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
