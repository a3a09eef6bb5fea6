"""Run configuration: a TOML file with one table per engine plus an
array of workload tables.

Grammar: standard TOML (the reference parser is the stdlib tomllib /
tomli).  Recognized sections, all optional except [[workload]]:

    seed = 1                 # run seed (u64); CLI --seed overrides
    output = "report.csv"    # default report path; CLI --out overrides

    [geometry]   banks, subarrays_per_bank, rows_per_subarray,
                 row_width_bits, dcc_pairs
    [cost]       tRAS_ns, tRP_ns, tRCD_ns, e_act_nJ, e_pre_nJ,
                 e_tra_factor, channel_bw_GBps,
                 channel_energy_pJ_per_byte, banks_parallel,
                 op_overhead_ns
    [baseline]   kind ("cpu_stream" | "logic_layer"), streams_read,
                 streams_written, internal_bw_multiplier,
                 internal_energy_pJ_per_byte
    [vaults]     n_vaults, queue_capacity, payload_limit_bytes,
                 header_bytes

    [[workload]] one table per workload, executed in order:
      kind = "bulk_bitwise"    op, size_bytes
      kind = "bitmap_query"    n_records, n_categories, query
      kind = "bitserial_scan"  n_records, bit_width, predicate ("LT <k>")
      kind = "pagerank"        graph_path | (synth_vertices, synth_edges),
                               iterations, damping, values_out?
      kind = "bfs"             graph_path | (synth_vertices, synth_edges),
                               source, values_out?

The config hash covers the semantic fields (geometry, cost, baseline,
vaults, workloads, seed); the output path is a delivery detail and is
excluded so the same experiment hashes identically wherever it is
written.
"""

import dataclasses
import hashlib
import json
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ..ambit import BitwiseOp
from ..cost import BaselineModel, CostParams
from ..dram import DramGeometry
from ..errors import ConfigError
from ..tesseract import VaultConfig

_WORKLOAD_KINDS = ("bulk_bitwise", "bitmap_query", "bitserial_scan", "pagerank", "bfs")


@dataclass(frozen=True)
class WorkloadSpec:
    kind: str
    op: str | None = None
    size_bytes: int | None = None
    n_records: int | None = None
    n_categories: int | None = None
    query: str | None = None
    bit_width: int | None = None
    predicate: str | None = None
    graph_path: str | None = None
    synth_vertices: int | None = None
    synth_edges: int | None = None
    iterations: int | None = None
    damping: float | None = None
    source: int | None = None
    values_out: str | None = None

    def __post_init__(self):
        if self.kind not in _WORKLOAD_KINDS:
            raise ConfigError(f"workload.kind {self.kind!r} not one of {_WORKLOAD_KINDS}")
        v = _Validator(f"workload[{self.kind}]")
        if self.kind == "bulk_bitwise":
            v.require(self, "op", "size_bytes")
            BitwiseOp.parse(self.op)
            v.positive(self, "size_bytes")
        elif self.kind == "bitmap_query":
            v.require(self, "n_records", "n_categories", "query")
            v.positive(self, "n_records", "n_categories")
        elif self.kind == "bitserial_scan":
            v.require(self, "n_records", "bit_width", "predicate")
            v.positive(self, "n_records", "bit_width")
            constant = parse_predicate(self.predicate)
            if constant >= (1 << self.bit_width):
                raise ConfigError(
                    f"workload.predicate constant {constant} needs more than "
                    f"bit_width={self.bit_width} bits")
        elif self.kind == "pagerank":
            self._require_graph(v)
            v.require(self, "iterations", "damping")
            v.positive(self, "iterations")
            if not 0 < self.damping < 1:
                raise ConfigError("workload.damping must be in (0, 1)")
        elif self.kind == "bfs":
            self._require_graph(v)
            v.require(self, "source")
            if self.source < 0:
                raise ConfigError("workload.source must be >= 0")

    def _require_graph(self, v: "_Validator") -> None:
        if self.graph_path is None:
            v.require(self, "synth_vertices", "synth_edges")
            v.positive(self, "synth_vertices")
            if self.synth_edges < 0:
                raise ConfigError("workload.synth_edges must be >= 0")

    @property
    def workload_id(self) -> str:
        if self.kind == "bulk_bitwise":
            return f"bulk_bitwise:{self.op}:{self.size_bytes}"
        if self.kind == "bitmap_query":
            return f"bitmap_query:{self.n_records}x{self.n_categories}"
        if self.kind == "bitserial_scan":
            return f"bitserial_scan:{self.n_records}w{self.bit_width}"
        graph = self.graph_path or f"v{self.synth_vertices}e{self.synth_edges}"
        if self.kind == "pagerank":
            return f"pagerank:{graph}:i{self.iterations}"
        return f"bfs:{graph}:s{self.source}"


class _Validator:
    def __init__(self, where: str):
        self.where = where

    def require(self, spec, *names):
        for name in names:
            if getattr(spec, name) is None:
                raise ConfigError(f"{self.where}: missing field {name!r}")

    def positive(self, spec, *names):
        for name in names:
            if getattr(spec, name) <= 0:
                raise ConfigError(f"{self.where}: field {name!r} must be > 0")


def parse_predicate(text: str) -> int:
    """Scan predicates are `LT <constant>`."""
    fields = text.split()
    if len(fields) != 2 or fields[0].upper() != "LT":
        raise ConfigError(f"predicate must be `LT <constant>`, got {text!r}")
    try:
        constant = int(fields[1])
    except ValueError:
        raise ConfigError(f"predicate constant {fields[1]!r} is not an integer") from None
    if constant < 0:
        raise ConfigError("predicate constant must be >= 0")
    return constant


@dataclass(frozen=True)
class RunConfig:
    geometry: DramGeometry
    cost: CostParams
    baseline: BaselineModel
    vaults: VaultConfig
    workloads: tuple[WorkloadSpec, ...]
    seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        if not self.workloads:
            raise ConfigError("config needs at least one [[workload]]")
        if not 0 <= self.seed < (1 << 64):
            raise ConfigError("seed must fit in 64 bits")


def _build(cls, table: dict, section: str):
    known = {f.name for f in dataclasses.fields(cls)}
    for key in table:
        if key not in known:
            raise ConfigError(f"[{section}] has unknown field {key!r}")
    try:
        return cls(**table)
    except TypeError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    known_top = {"seed", "output", "geometry", "cost", "baseline", "vaults", "workload"}
    for key in doc:
        if key not in known_top:
            raise ConfigError(f"unknown top-level config key {key!r}")
    workload_tables = doc.get("workload", [])
    if isinstance(workload_tables, dict):
        workload_tables = [workload_tables]
    workloads = tuple(_build(WorkloadSpec, t, "workload") for t in workload_tables)
    return RunConfig(
        geometry=_build(DramGeometry, doc.get("geometry", {}), "geometry"),
        cost=_build(CostParams, doc.get("cost", {}), "cost"),
        baseline=_build(BaselineModel, doc.get("baseline", {}), "baseline"),
        vaults=_build(VaultConfig, doc.get("vaults", {}), "vaults"),
        workloads=workloads,
        seed=doc.get("seed", 0),
        output_path=doc.get("output"),
    )


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_hash(config: RunConfig) -> str:
    """Stable 12-hex-digit digest of the semantic configuration."""
    payload = {
        "geometry": dataclasses.asdict(config.geometry),
        "cost": dataclasses.asdict(config.cost),
        "baseline": dataclasses.asdict(config.baseline),
        "vaults": dataclasses.asdict(config.vaults),
        "workloads": [dataclasses.asdict(w) for w in config.workloads],
        "seed": config.seed,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]
