"""``amrpe`` command line: ``parse``, ``pipeline`` and ``eval``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .amr import graph_stats, graph_to_json, read_corpus
from .errors import ConvergenceFailure, DataError, LengthMismatch
from .metrics import FEATURES, ScoredCorpus, delta_report
from .pipeline import run_pipeline

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("amrpe")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _z_range(text: str) -> range:
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return range(int(lo), int(hi) + 1)
        return range(int(text), int(text) + 1)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="amrpe", description="AMR graph encodings for LLM inputs")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    ps = sub.add_parser("parse", help="parse a Penman corpus into JSON graphs and stats")
    ps.add_argument("input")
    ps.add_argument("-o", "--out", help="JSON-lines output (default stdout)")
    ps.add_argument("--features-out", help="write {id: {depth, node_count, amr_count}} JSON")
    ps.add_argument("--strict", action="store_true")

    pp = sub.add_parser("pipeline", help="export linearizations, SPGs and encodings")
    pp.add_argument("input")
    pp.add_argument("-o", "--out", required=True)
    pp.add_argument("--config", help="key = value or JSON config file")
    for flag, typ in (("--k", int), ("--q", float), ("--sin-base", float), ("--sin-dim", int),
                      ("--d-emb", int), ("--hidden", int), ("--seed", int)):
        pp.add_argument(flag, type=typ)
    pp.add_argument("--vocab")
    pp.add_argument("--tokenizer", choices=("greedy", "whitespace"))
    pp.add_argument("--intra-index", choices=("published", "zero_based"))
    pp.add_argument("--embeddings", help="embedding table (.mat or manifest)")
    pp.add_argument("--strict", action="store_true", default=None)
    pp.add_argument("--f64", action="store_true", default=None)
    pp.add_argument("--emit-embeddings", action="store_true")
    pp.add_argument("--jobs", type=int, default=1)

    pe = sub.add_parser("eval", help="depth-stratified BLEU comparison of two systems")
    pe.add_argument("refs")
    pe.add_argument("hyps_a")
    pe.add_argument("hyps_b")
    pe.add_argument("--features", required=True, help="JSON sidecar id -> features")
    pe.add_argument("--ids", help="file with one id per line (default: sidecar key order)")
    pe.add_argument("--feature", default="depth", choices=FEATURES)
    pe.add_argument("--z", type=_z_range, default=range(1, 11), help="threshold range LO:HI")
    pe.add_argument("--direction", choices=(">=", "<="), default=">=")
    pe.add_argument("-o", "--out", required=True, help="output prefix; writes .json and .csv")
    return p


def _read_lines(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def cmd_parse(args) -> int:
    failures = []
    with open(args.input, encoding="utf-8") as fh:
        entries = read_corpus(fh, strict=args.strict, on_error=failures.append)
    _report_skipped(entries, failures)
    lines = []
    features = {}
    for e in entries:
        stats = graph_stats(e.graph).as_dict()
        lines.append(json.dumps({"id": e.id, "graph": graph_to_json(e.graph), "stats": stats}, sort_keys=True))
        features[e.id] = {"depth": stats["depth"], "node_count": stats["node_count"], "amr_count": 1}
    text = "".join(line + "\n" for line in lines)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.features_out:
        Path(args.features_out).write_text(json.dumps(features, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def _report_skipped(entries, failures) -> None:
    for err in failures:
        print(f"warning: skipped block at {err}", file=sys.stderr)
    log.info("%d entries parsed, %d skipped", len(entries), len(failures))


_CONWORKED_FLAGS = ("k", "q", "sin_base", "sin_dim", "d_emb", "hidden", "seed", "vocab", "tokenizer",
                 "intra_index", "embeddings", "strict", "f64")


def config_from_args(args) -> io.PipelineConfig:
    raw = io.read_config_file(args.config) if args.config else {}
    for name in _CONWORKED_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = value
    return io.PipelineConfig.from_mapping(raw)


def cmd_pipeline(args) -> int:
    config = config_from_args(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    failures = []
    with open(args.input, encoding="utf-8") as fh:
        entries = read_corpus(fh, strict=config.strict, on_error=failures.append)
    _report_skipped(entries, failures)
    dirs = run_pipeline(entries, config, args.out, emit_embeddings=args.emit_embeddings, jobs=args.jobs)
    log.info("wrote %d bundles to %s", len(dirs), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    refs, hyps_a, hyps_b = _read_lines(args.refs), _read_lines(args.hyps_a), _read_lines(args.hyps_b)
    if not (len(refs) == len(hyps_a) == len(hyps_b)):
        raise LengthMismatch(f"line counts differ: {len(refs)}, {len(hyps_a)}, {len(hyps_b)}")
    features = json.loads(Path(args.features).read_text(encoding="utf-8"))
    ids = _read_lines(args.ids) if args.ids else list(features)
    if len(ids) != len(refs):
        raise LengthMismatch(f"{len(ids)} ids for {len(refs)} lines")
    a = ScoredCorpus.build(ids, refs, hyps_a, features)
    b = ScoredCorpus.build(ids, refs, hyps_b, features)
    report = delta_report(a, b, args.feature, args.z, args.direction)
    Path(args.out + ".json").write_text(report.to_json() + "\n", encoding="utf-8")
    Path(args.out + ".csv").write_text(report.to_csv(), encoding="utf-8")
    return EXIT_OK


_COMMANDS = {"parse": cmd_parse, "pipeline": cmd_pipeline, "eval": cmd_eval}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("amrpe: a subcommand is required (parse, pipeline, eval)")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
