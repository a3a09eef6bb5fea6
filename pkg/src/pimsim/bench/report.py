"""Benchmark report records and their CSV/JSON serialization.

The CSV header order is fixed; JSON is an array of flat objects with
the same keys.  Both formats round-trip through ``parse_report``.
Ratios are stored alongside the absolutes they were computed from, so a
reader can always recompute them.
"""

import csv
import io
import json
from dataclasses import asdict, dataclass, fields

from ..errors import ConfigError

CSV_HEADER = [
    "workload_id",
    "config_hash",
    "ambit_latency_ns",
    "ambit_energy_nJ",
    "baseline_latency_ns",
    "baseline_energy_nJ",
    "throughput_ratio",
    "energy_ratio",
    "bytes_moved_baseline",
    "bytes_moved_pim",
]

FORMATS = ("csv", "json")


@dataclass(frozen=True)
class ReportRecord:
    workload_id: str
    config_hash: str
    ambit_latency_ns: float
    ambit_energy_nJ: float
    baseline_latency_ns: float
    baseline_energy_nJ: float
    throughput_ratio: float
    energy_ratio: float
    bytes_moved_baseline: int
    bytes_moved_pim: int


def _check_format(fmt: str) -> None:
    if fmt not in FORMATS:
        raise ConfigError(f"report format must be one of {FORMATS}, got {fmt!r}")


def format_report(records: list[ReportRecord], fmt: str) -> str:
    _check_format(fmt)
    if not records:
        raise ConfigError("cannot emit an empty report")
    if fmt == "json":
        return json.dumps([asdict(r) for r in records], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        d = asdict(r)
        writer.writerow([d[k] for k in CSV_HEADER])
    return buf.getvalue()


def emit_report(records: list[ReportRecord], fmt: str, path: str) -> None:
    text = format_report(records, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


_FLOAT_COLUMNS = frozenset({
    "ambit_latency_ns", "ambit_energy_nJ", "baseline_latency_ns",
    "baseline_energy_nJ", "throughput_ratio", "energy_ratio",
})
_INT_COLUMNS = frozenset({"bytes_moved_baseline", "bytes_moved_pim"})


def _record_from_dict(d: dict) -> ReportRecord:
    kwargs = {}
    for f in fields(ReportRecord):
        if f.name not in d:
            raise ConfigError(f"report row is missing column {f.name!r}")
        raw = d[f.name]
        if f.name in _FLOAT_COLUMNS:
            kwargs[f.name] = float(raw)
        elif f.name in _INT_COLUMNS:
            kwargs[f.name] = int(raw)
        else:
            kwargs[f.name] = str(raw)
    return ReportRecord(**kwargs)


def parse_report_text(text: str, fmt: str) -> list[ReportRecord]:
    _check_format(fmt)
    if fmt == "json":
        return [_record_from_dict(d) for d in json.loads(text)]
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header {reader.fieldnames}")
    return [_record_from_dict(row) for row in reader]


def parse_report(path: str, fmt: str) -> list[ReportRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_report_text(fh.read(), fmt)


def merge_reports(paths: list[str], fmt: str) -> list[ReportRecord]:
    """Concatenate report files in argument order."""
    merged: list[ReportRecord] = []
    for path in paths:
        merged.extend(parse_report(path, fmt))
    return merged
