"""Command-line interface.

Subcommands:
  run           execute the configured workloads and emit a report
  gen-graph     write the synthetic edge list a graph workload would use
  gen-bitmaps   write the category bitmaps a bitmap workload would use
  report-merge  concatenate report files into one

Exit codes: 0 success, 1 configuration error, 2 oracle mismatch,
3 I/O error.
"""

import argparse
import dataclasses
import sys

from ..errors import ConfigError, OracleMismatchError, PimError
from ..tesseract import format_edge_list
from .config import RunConfig, load_config
from .harness import run
from .report import FORMATS, emit_report, format_report, merge_reports
from .workloads import gen_bitmap_workload, synth_graph

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ORACLE = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pimsim",
        description="Processing-in-memory benchmark simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run configured workloads")
    _common_flags(p_run)
    p_run.add_argument("--format", choices=FORMATS, default="csv",
                       help="report format (default: csv)")

    p_graph = sub.add_parser("gen-graph", help="emit a synthetic edge list")
    _common_flags(p_graph, out_required=True)

    p_maps = sub.add_parser("gen-bitmaps", help="emit category bitmaps")
    _common_flags(p_maps, out_required=True)

    p_merge = sub.add_parser("report-merge", help="merge report files")
    p_merge.add_argument("inputs", nargs="+", help="report files to merge")
    p_merge.add_argument("--format", choices=FORMATS, default="csv")
    p_merge.add_argument("--out", required=True, help="merged report path")
    return parser


def _common_flags(p: argparse.ArgumentParser, out_required: bool = False) -> None:
    p.add_argument("--config", required=True, help="TOML config path")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=out_required, default=None, help="output path")


def _load(args) -> RunConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def _cmd_run(args) -> int:
    config = _load(args)
    records = run(config)
    for r in records:
        print(f"{r.workload_id}: throughput_ratio={r.throughput_ratio:.4g} "
              f"energy_ratio={r.energy_ratio:.4g} "
              f"bytes_baseline={r.bytes_moved_baseline} bytes_pim={r.bytes_moved_pim}")
    out = args.out or config.output_path
    if out:
        emit_report(records, args.format, out)
        print(f"wrote {args.format} report to {out}")
    else:
        sys.stdout.write(format_report(records, args.format))
    return EXIT_OK


def _cmd_gen_graph(args) -> int:
    config = _load(args)
    for spec in config.workloads:
        if spec.kind in ("pagerank", "bfs") and spec.synth_vertices is not None:
            edges = synth_graph(spec.synth_vertices, spec.synth_edges, config.seed)
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(f"# synthetic graph V={spec.synth_vertices} "
                         f"E={spec.synth_edges} seed={config.seed}\n")
                fh.write(format_edge_list(edges))
            print(f"wrote {len(edges)} edges to {args.out}")
            return EXIT_OK
    raise ConfigError("no graph workload with synthetic parameters in config")


def _cmd_gen_bitmaps(args) -> int:
    config = _load(args)
    for spec in config.workloads:
        if spec.kind == "bitmap_query":
            bitmaps = gen_bitmap_workload(spec.n_records, spec.n_categories, config.seed)
            digits = (spec.n_records + 3) // 4
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(f"# category bitmaps n_records={spec.n_records} "
                         f"n_categories={spec.n_categories} seed={config.seed}\n")
                for c, bitmap in enumerate(bitmaps):
                    fh.write(f"c{c} {bitmap:0{digits}x}\n")
            print(f"wrote {len(bitmaps)} bitmaps to {args.out}")
            return EXIT_OK
    raise ConfigError("no bitmap_query workload in config")


def _cmd_report_merge(args) -> int:
    merged = merge_reports(args.inputs, args.format)
    emit_report(merged, args.format, args.out)
    print(f"merged {len(args.inputs)} reports ({len(merged)} records) into {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "gen-graph": _cmd_gen_graph,
        "gen-bitmaps": _cmd_gen_bitmaps,
        "report-merge": _cmd_report_merge,
    }
    try:
        return handlers[args.command](args)
    except OracleMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except PimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
