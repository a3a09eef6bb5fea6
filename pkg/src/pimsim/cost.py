"""Latency and energy pricing for command traces, plus processor-centric
baseline models and speedup computation.

Pricing is per command and strictly additive:

* Activate and ActivateDcc: tRAS latency, e_act energy.
* ActivateTriple: tRAS latency, (2 * e_tra_factor - 1) * e_act energy,
  chosen so the canonical triple-activation group (TRA, copy activate,
  precharge) totals 2*tRAS + tRP and e_tra_factor * (2 * e_act) + e_pre,
  i.e. an AAP whose activation energy is scaled for three open rows.
* Precharge: tRP latency, e_pre energy.
* Read/Write bursts: tRCD + bytes/bandwidth latency, e_act plus
  bytes * channel energy; burst bytes count as channel movement.

So an AAP prices at 2*tRAS + tRP and a lone activate/precharge pair at
tRAS + tRP.  In-subarray operations issue commands only and move zero
bytes on the channel.

Parallel-eligible trace sets (bulk operations striped over banks) take
the maximum latency across banks and the sum of energies.

The default table is representative of DDR3-1600-class parts; ratios,
not absolute values, are the meaningful output.
"""

from dataclasses import dataclass, replace
from math import ceil, inf

from .ambit import BitwiseOp, CommandTrace, compile_op
from .dram import (
    Activate,
    ActivateDcc,
    ActivateTriple,
    DramGeometry,
    Precharge,
    Read,
    RowAddress,
    Write,
)
from .errors import ConfigError

CPU_STREAM = "cpu_stream"
LOGIC_LAYER = "logic_layer"


@dataclass(frozen=True)
class CostParams:
    tRAS_ns: float = 35.0
    tRP_ns: float = 15.0
    tRCD_ns: float = 15.0
    e_act_nJ: float = 2.0
    e_pre_nJ: float = 0.5
    e_tra_factor: float = 1.5
    channel_bw_GBps: float = 12.8
    channel_energy_pJ_per_byte: float = 60.0
    banks_parallel: int = 8
    # Fixed per-operation setup cost on the PIM side (command issue,
    # host round trip).  Zero by default; scaling studies set it.
    op_overhead_ns: float = 0.0

    def __post_init__(self):
        positive = (
            "tRAS_ns", "tRP_ns", "tRCD_ns", "e_act_nJ", "e_pre_nJ",
            "channel_bw_GBps", "channel_energy_pJ_per_byte",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"cost.{name} must be > 0")
        if self.e_tra_factor < 1:
            raise ConfigError("cost.e_tra_factor must be >= 1")
        if self.banks_parallel < 1:
            raise ConfigError("cost.banks_parallel must be >= 1")
        if self.op_overhead_ns < 0:
            raise ConfigError("cost.op_overhead_ns must be >= 0")

    @property
    def bytes_per_ns(self) -> float:
        return self.channel_bw_GBps  # 1 GB/s == 1 byte/ns


@dataclass(frozen=True)
class CostReport:
    latency_ns: float = 0.0
    energy_nJ: float = 0.0
    bytes_moved_on_channel: int = 0
    result_bits: int = 0

    def __post_init__(self):
        if (self.latency_ns < 0 or self.energy_nJ < 0
                or self.bytes_moved_on_channel < 0 or self.result_bits < 0):
            raise ConfigError("cost report quantities must be non-negative")

    def __add__(self, other: "CostReport") -> "CostReport":
        return CostReport(
            self.latency_ns + other.latency_ns,
            self.energy_nJ + other.energy_nJ,
            self.bytes_moved_on_channel + other.bytes_moved_on_channel,
            self.result_bits + other.result_bits,
        )


@dataclass(frozen=True)
class BaselineModel:
    """Processor-centric execution model.

    ``cpu_stream`` streams operands over the memory channel and writes
    the result back.  ``logic_layer`` uses the same stream shape with
    the stack-internal bandwidth (channel bandwidth scaled by
    ``internal_bw_multiplier``) and internal per-byte energy.
    """

    kind: str = CPU_STREAM
    streams_read: int = 2
    streams_written: int = 1
    internal_bw_multiplier: float = 10.0
    internal_energy_pJ_per_byte: float = 6.0

    def __post_init__(self):
        if self.kind not in (CPU_STREAM, LOGIC_LAYER):
            raise ConfigError(f"baseline.kind must be {CPU_STREAM!r} or {LOGIC_LAYER!r}")
        if self.streams_read < 1 or self.streams_written < 0:
            raise ConfigError("baseline stream counts out of range")
        if self.internal_bw_multiplier <= 0 or self.internal_energy_pJ_per_byte <= 0:
            raise ConfigError("baseline internal parameters must be > 0")

    def for_op(self, op: BitwiseOp) -> "BaselineModel":
        """Stream shape for one bitwise op: unary ops read one operand,
        binary ops read two; both write one result."""
        return replace(self, streams_read=1 if op.is_unary else 2, streams_written=1)

    @property
    def bandwidth_scale(self) -> float:
        return self.internal_bw_multiplier if self.kind == LOGIC_LAYER else 1.0

    def energy_per_byte_pJ(self, p: CostParams) -> float:
        if self.kind == LOGIC_LAYER:
            return self.internal_energy_pJ_per_byte
        return p.channel_energy_pJ_per_byte


def price_trace(trace: CommandTrace, p: CostParams) -> CostReport:
    """Total latency/energy of one trace, per-command additive."""
    latency = 0.0
    energy = 0.0
    bytes_moved = 0
    for cmd in trace.commands:
        if isinstance(cmd, Activate) or isinstance(cmd, ActivateDcc):
            latency += p.tRAS_ns
            energy += p.e_act_nJ
        elif isinstance(cmd, ActivateTriple):
            latency += p.tRAS_ns
            energy += (2 * p.e_tra_factor - 1) * p.e_act_nJ
        elif isinstance(cmd, Precharge):
            latency += p.tRP_ns
            energy += p.e_pre_nJ
        elif isinstance(cmd, (Read, Write)):
            n_bytes = (cmd.bit_hi - cmd.bit_lo) // 8
            latency += p.tRCD_ns + n_bytes / p.bytes_per_ns
            energy += p.e_act_nJ + n_bytes * p.channel_energy_pJ_per_byte / 1000.0
            bytes_moved += n_bytes
    result_bits = trace.result_bits if trace.commands else 0
    return CostReport(latency, energy, bytes_moved, result_bits)


def price_traces(traces: list[CommandTrace], p: CostParams) -> CostReport:
    """Price a set of traces.  Parallel-eligible traces overlap across
    banks (max of per-bank latency sums); anything else serializes."""
    if not traces:
        return CostReport()
    parallel = [t for t in traces if t.parallel_eligible]
    serial = [t for t in traces if not t.parallel_eligible]
    latency = 0.0
    energy = 0.0
    bytes_moved = 0
    result_bits = 0
    if parallel:
        per_bank: dict[int, float] = {}
        for t in parallel:
            r = price_trace(t, p)
            per_bank[t.location[0]] = per_bank.get(t.location[0], 0.0) + r.latency_ns
            energy += r.energy_nJ
            bytes_moved += r.bytes_moved_on_channel
            result_bits += r.result_bits
        latency += max(per_bank.values())
    for t in serial:
        r = price_trace(t, p)
        latency += r.latency_ns
        energy += r.energy_nJ
        bytes_moved += r.bytes_moved_on_channel
        result_bits += r.result_bits
    return CostReport(latency, energy, bytes_moved, result_bits)


def _row_op_cost(op: BitwiseOp, p: CostParams, geom: DramGeometry) -> CostReport:
    """Cost of one row-granularity op; shape does not depend on which
    data rows are named, so representative rows suffice."""
    d = geom.first_data_row
    a = RowAddress(0, 0, d)
    b = None if op.is_unary else RowAddress(0, 0, d + 1)
    trace = compile_op(geom, op, a, b, RowAddress(0, 0, d + 2))
    return price_trace(trace, p)


def ambit_throughput(op: BitwiseOp, p: CostParams,
                     geom: DramGeometry = DramGeometry()) -> float:
    """Result bits per nanosecond with banks_parallel banks running the
    same row-granularity op."""
    per_row = _row_op_cost(op, p, geom)
    return geom.row_width_bits * p.banks_parallel / per_row.latency_ns


def ambit_bulk_cost(op: BitwiseOp, n_bytes: int, p: CostParams,
                    geom: DramGeometry = DramGeometry()) -> CostReport:
    """Cost of a bulk op over n_bytes of result, striped bank-major over
    banks_parallel banks: full banks overlap, waves serialize."""
    if n_bytes <= 0:
        raise ConfigError("n_bytes must be > 0")
    bits = n_bytes * 8
    if bits % geom.row_width_bits != 0:
        raise ConfigError("bulk size must be a whole number of row chunks")
    chunks = bits // geom.row_width_bits
    waves = ceil(chunks / p.banks_parallel)
    per_row = _row_op_cost(op, p, geom)
    return CostReport(
        latency_ns=p.op_overhead_ns + waves * per_row.latency_ns,
        energy_nJ=chunks * per_row.energy_nJ,
        bytes_moved_on_channel=0,
        result_bits=bits,
    )


def stream_cost(bytes_read: int, bytes_written: int, m: BaselineModel,
                p: CostParams) -> CostReport:
    """Movement-bound cost of streaming reads and writes."""
    total = bytes_read + bytes_written
    bw = p.bytes_per_ns * m.bandwidth_scale
    return CostReport(
        latency_ns=total / bw,
        energy_nJ=total * m.energy_per_byte_pJ(p) / 1000.0,
        bytes_moved_on_channel=total,
        result_bits=bytes_written * 8,
    )


def baseline_cost(op: BitwiseOp, n_bytes: int, m: BaselineModel,
                  p: CostParams) -> CostReport:
    """Baseline cost of a bitwise op over n_bytes-long operands: every
    read stream and the result stream cross the transport once."""
    if n_bytes <= 0:
        raise ConfigError("n_bytes must be > 0")
    return stream_cost(m.streams_read * n_bytes, m.streams_written * n_bytes, m, p)


def cost_ratios(baseline: CostReport, pim: CostReport) -> tuple[float, float]:
    """(throughput_ratio, energy_ratio), baseline over PIM for identical
    logical work.  A zero PIM quantity yields an infinite ratio."""
    tp = baseline.latency_ns / pim.latency_ns if pim.latency_ns > 0 else inf
    en = baseline.energy_nJ / pim.energy_nJ if pim.energy_nJ > 0 else inf
    return tp, en


def speedup(op: BitwiseOp, size_bytes: int, p: CostParams, m: BaselineModel,
            geom: DramGeometry = DramGeometry()) -> tuple[float, float]:
    """Throughput and energy ratios of the baseline over in-DRAM
    execution for one bulk op over size_bytes of data."""
    pim = ambit_bulk_cost(op, size_bytes, p, geom)
    base = baseline_cost(op, size_bytes, m.for_op(op), p)
    return cost_ratios(base, pim)
