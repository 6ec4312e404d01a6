"""Command line: ``ercbench run|report|canon|ted``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ercbench.bench.config import BenchConfig, default_output_dir, with_overrides
from ercbench.bench.io import export_records
from ercbench.bench.reports import build_reports
from ercbench.bench.runner import STORE_NAME, read_store, run_benchmark
from ercbench.canon import CanonConfig, canonicalize
from ercbench.expr import parse
from ercbench.ted import as_labeled, ted


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ercbench", description=(
        "Benchmark constant optimizers inside GP symbolic regression."))
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the benchmark matrix (resumable)")
    run.add_argument("--config", type=Path, help="TOML config file")
    run.add_argument("--problems", help="comma-separated problem names")
    run.add_argument("--methods", help="comma-separated methods, e.g. bfgs,bfgs/random,noopt")
    run.add_argument("--seeds", help="replicate count, or comma-separated seed list")
    run.add_argument("--variant", choices=("standard", "specific", "both"),
                     help="basis set variant (default: from config, else standard)")
    run.add_argument("--out", type=Path, help="output directory")
    run.add_argument("--parallelism", type=int, help="worker processes")
    run.add_argument("--no-report", action="store_true", help="skip report generation")

    rep = sub.add_parser("report", help="build tables and charts from a record store")
    rep.add_argument("store", nargs="?", type=Path,
                     help=f"record store (default: <out>/{STORE_NAME})")
    rep.add_argument("--out", type=Path, help="report directory (default: <store dir>/report)")
    rep.add_argument("--ted-axis", type=int, default=10)
    rep.add_argument("--export", choices=("csv", "json"), action="append", default=[],
                     help="also export the records in this format")

    can = sub.add_parser("canon", help="print the canonical form of an expression")
    can.add_argument("expression", help='prefix expression, e.g. "(add x 1.0)"')
    can.add_argument("--precision", type=int, default=15)

    td = sub.add_parser("ted", help="tree edit distance between two expressions")
    td.add_argument("a")
    td.add_argument("b")
    td.add_argument("--raw", action="store_true", help="compare as written, no canonicalization")
    return ap


def _cmd_run(args) -> int:
    cfg = BenchConfig.load(args.config) if args.config else BenchConfig()
    variants = None
    if args.variant:
        variants = ["standard", "specific"] if args.variant == "both" else [args.variant]
    cfg = with_overrides(
        cfg,
        problems=[p for p in args.problems.split(",") if p.strip()] if args.problems else None,
        methods=args.methods, seeds=args.seeds, variants=variants, output_dir=args.out,
    )
    if args.parallelism:
        cfg.parallelism = args.parallelism
        cfg.validate()

    def progress(cell, rec):
        status = f"mse={rec.mse:.3g} ted={rec.ted} size={rec.size}" if rec.ok else "ERROR"
        logging.getLogger("ercbench").info("%s %s", cell.run_id, status)

    records = run_benchmark(cfg, progress=progress)
    failed = sum(not r.ok for r in records)
    print(f"{len(records)} records in {cfg.output_dir / STORE_NAME}"
          + (f" ({failed} failed)" if failed else ""))
    if not args.no_report and any(r.ok for r in records):
        bundle = build_reports(records, cfg.output_dir / "report", cfg.ted_axis,
                               target_size=lambda n: cfg.problem(n).target_size)
        export_records([r for r in records if r.ok], "csv", cfg.output_dir / "records.csv")
        print(f"report: {len(bundle.files)} files in {bundle.out_dir}")
    return 0


def _cmd_report(args) -> int:
    store = args.store or (default_output_dir() / STORE_NAME)
    if not store.exists():
        raise ValueError(f"record store not found: {store}")
    records = read_store(store)
    out = args.out or store.parent / "report"
    bundle = build_reports(records, out, args.ted_axis)
    ok = [r for r in records if r.ok]
    for fmt in args.export:
        export_records(ok, fmt, out / f"records.{fmt}")
    print(f"report: {len(bundle.files)} files in {out}")
    return 0


def _cmd_canon(args) -> int:
    print(canonicalize(parse(args.expression), CanonConfig(precision=args.precision)))
    return 0


def _cmd_ted(args) -> int:
    a, b = parse(args.a), parse(args.b)
    if not args.raw:
        a, b = canonicalize(a).tree, canonicalize(b).tree
    print(int(ted(as_labeled(a), as_labeled(b))))
    return 0


COMMANDS = {"run": _cmd_run, "report": _cmd_report, "canon": _cmd_canon, "ted": _cmd_ted}


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"ercbench {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
