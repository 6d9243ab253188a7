"""Command line interface.

Exit codes: 0 success, 1 I/O or parse error, 2 configuration or usage
error, 3 unsupported feature.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from . import metadata
from .anonymizers import PipelineError, SeededRng, UnsupportedError, apply_pipeline
from .config import ConfigError, parse_config
from .ela import dfg_abstraction, write_ela
from .leakage import (
    CapExceededError,
    LeakageQuery,
    UnsupportedSignatureError,
    enumerate_ol,
    estimate_ol_cardinality,
    fill_assignment,
)
from .log import ACTIVITY, RESOURCE, TIMESTAMP, InvalidLogError
from .xes import XesParseError, parse_xes, serialize_xes

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_UNSUPPORTED = 3

ELA_METHODS = {"dfg": dfg_abstraction}
ATTRIBUTE_ALIASES = {"act": ACTIVITY, "activity": ACTIVITY, "res": RESOURCE, "resource": RESOURCE, "time": TIMESTAMP}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        self.code = code
        super().__init__(message)


def write_atomic(path: Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_document(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    try:
        doc = parse_xes(data)
    except XesParseError as exc:
        raise CliError(f"{path}: {exc}", EXIT_IO) from None
    for warning in doc.warnings:
        print(f"warning: {path}: {warning}", file=sys.stderr)
    return doc


def cmd_anonymize(args: argparse.Namespace) -> int:
    doc = read_document(args.input)
    try:
        text = Path(args.pipeline).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {args.pipeline}: {exc.strerror}", EXIT_IO) from None
    try:
        config = parse_config(text)
    except ConfigError as exc:
        raise CliError(f"pipeline config: {exc}", EXIT_USAGE) from None
    except PipelineError as exc:
        code = EXIT_UNSUPPORTED if isinstance(exc.cause, UnsupportedError) else EXIT_USAGE
        raise CliError(f"pipeline config: {exc}", code) from None
    seed = config.seed if args.seed is None else args.seed
    try:
        rng = SeededRng(seed)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    try:
        result = apply_pipeline(doc, config.steps, rng)
    except PipelineError as exc:
        if isinstance(exc.cause, UnsupportedError):
            code = EXIT_UNSUPPORTED
        elif isinstance(exc.cause, InvalidLogError):
            code = EXIT_IO
        else:
            code = EXIT_USAGE
        raise CliError(f"pipeline failed at {exc}", code) from None
    try:
        data = serialize_xes(result)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    write_atomic(Path(args.output), data)
    return EXIT_OK


def cmd_metadata(args: argparse.Namespace) -> int:
    doc = read_document(args.input)
    try:
        if args.layer is not None:
            records = [metadata.get_anonymizer(doc, args.layer)]
        else:
            records = metadata.get_anonymizations(doc)
    except metadata.LayerError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    except metadata.MetadataError as exc:
        raise CliError(f"{args.input}: {exc}", EXIT_IO) from None
    if not records:
        print("no privacy metadata")
    for record in records:
        for line in metadata.format_record(record):
            print(line)
    return EXIT_OK


def cmd_ela_export(args: argparse.Namespace) -> int:
    if args.method not in ELA_METHODS:
        raise CliError(f"unsupported ELA method {args.method!r}; supported: {', '.join(sorted(ELA_METHODS))}", EXIT_UNSUPPORTED)
    doc = read_document(args.input)
    try:
        ela = ELA_METHODS[args.method](doc.log, args.origin)
    except (InvalidLogError, ValueError) as exc:
        raise CliError(str(exc), EXIT_IO) from None
    write_atomic(Path(args.output), write_ela(ela))
    return EXIT_OK


def _parse_condition(text: str | None):
    if text is None:
        return None
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise CliError(f"condition must look like 'act=VALUE', got {text!r}", EXIT_USAGE)
    return (ATTRIBUTE_ALIASES.get(name.strip(), name.strip()), value)


def cmd_leakage(args: argparse.Namespace) -> int:
    doc = read_document(args.input)
    signature = tuple(p.strip() for p in args.signature.split(",") if p.strip())
    condition = _parse_condition(args.condition)
    try:
        query = LeakageQuery(doc.log, signature, args.universe_size, condition, args.allow_null_fill)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    try:
        estimate = estimate_ol_cardinality(query)
    except UnsupportedSignatureError as exc:
        raise CliError(str(exc), EXIT_UNSUPPORTED) from None

    if not estimate.bounded:
        print("paper_estimate: unbounded")
        print("exact_count: unbounded")
        print(f"note: {estimate.note}")
        return EXIT_OK
    print(f"slots: {estimate.slots}")
    print(f"paper_estimate: {estimate.paper_estimate}")
    print(f"exact_count: {estimate.exact_count}")

    if args.enumerate:
        if args.universe is None:
            raise CliError("--enumerate needs --universe", EXIT_USAGE)
        universe = [v.strip() for v in args.universe.split(",") if v.strip()]
        try:
            candidates = enumerate_ol(query, universe, cap=args.cap)
        except CapExceededError as exc:
            raise CliError(f"cap exceeded: {exc}", EXIT_USAGE) from None
        out_dir = Path(args.output_dir) if args.output_dir else None
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
        count = 0
        for count, candidate in enumerate(candidates, start=1):
            fills = ", ".join(f"{eid}={value}" for eid, value in fill_assignment(candidate, doc.log, condition))
            print(f"candidate {count}: {fills}")
            if out_dir is not None:
                write_atomic(out_dir / f"candidate_{count:05d}.xes", serialize_xes(doc.with_log(candidate)))
        print(f"candidates: {count}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmprivacy", description="Privacy-aware publishing of XES event logs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("anonymize", help="apply an anonymization pipeline and record privacy metadata")
    p.add_argument("--input", required=True)
    p.add_argument("--pipeline", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, help="overrides the seed in the pipeline config")
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser("metadata", help="print the privacy metadata layers of an XES file")
    p.add_argument("--input", required=True)
    p.add_argument("--layer", type=int)
    p.set_defaults(func=cmd_metadata)

    p = sub.add_parser("ela-export", help="export an event log abstraction")
    p.add_argument("--input", required=True)
    p.add_argument("--method", default="dfg")
    p.add_argument("--origin", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_ela_export)

    p = sub.add_parser("leakage", help="estimate the number of potential original logs")
    p.add_argument("--input", required=True)
    p.add_argument("--signature", default="sup,event,resource")
    p.add_argument("--universe-size", type=int, required=True)
    p.add_argument("--condition", help="disclosed condition, e.g. act=r")
    p.add_argument("--allow-null-fill", action="store_true")
    p.add_argument("--enumerate", action="store_true")
    p.add_argument("--universe", help="comma-separated fill values for --enumerate")
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--output-dir", help="write each candidate as an XES file here")
    p.set_defaults(func=cmd_leakage)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
