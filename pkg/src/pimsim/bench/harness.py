"""Executes configured workloads and produces report records.

Every workload's functional result is checked against the built-in
scalar oracle before anything is priced; a mismatch aborts the run.
Bulk workloads execute command traces on a fresh device; graph
workloads run on the vault engine and report data-movement accounting
(their latency/energy columns are movement-derived proxies, since the
vault engine has no core timing model).

The configured per-operation overhead (cost.op_overhead_ns) is charged
once per bulk operation (per gate for queries, per step for scans).
"""

from dataclasses import replace
from math import ceil

from ..ambit import (
    BitwiseOp,
    BulkAllocator,
    BulkVector,
    bulk_execute,
    execute_on_device,
    load_vector,
    scalar_bitwise,
    store_vector,
)
from ..cost import CostReport, baseline_cost, cost_ratios, price_traces, stream_cost
from ..dram import Device
from ..errors import ConfigError, OracleMismatchError
from ..tesseract import (
    VaultSystem,
    bfs_baseline_bytes,
    format_vertex_values,
    movement_summary,
    pagerank_baseline_bytes,
    parse_edge_list,
    partition_graph,
    sequential_bfs,
    sequential_pagerank,
)
from .config import RunConfig, WorkloadSpec, config_hash, parse_predicate
from .report import ReportRecord
from .workloads import (
    bitserial_scan_compile,
    eval_query,
    gen_bitmap_workload,
    gen_records,
    pack_bit_planes,
    parse_query,
    query_gates,
    random_vector,
    scan_oracle,
    synth_graph,
)

PAGERANK_TOLERANCE = 1e-9


def run(config: RunConfig) -> list[ReportRecord]:
    digest = config_hash(config)
    records = []
    for spec in config.workloads:
        if spec.kind == "bulk_bitwise":
            record = _run_bulk_bitwise(config, spec)
        elif spec.kind == "bitmap_query":
            record = _run_bitmap_query(config, spec)
        elif spec.kind == "bitserial_scan":
            record = _run_bitserial_scan(config, spec)
        else:
            record = _run_graph(config, spec)
        records.append(replace(record, config_hash=digest))
    return records


def _first_bit_mismatch(expected: int, actual: int) -> int:
    diff = expected ^ actual
    return (diff & -diff).bit_length() - 1


def _check_bits(what: str, expected: int, actual: int) -> None:
    if expected != actual:
        index = _first_bit_mismatch(expected, actual)
        raise OracleMismatchError(what, index,
                                  (expected >> index) & 1, (actual >> index) & 1)


def _record(spec: WorkloadSpec, pim: CostReport, base: CostReport) -> ReportRecord:
    tp, en = cost_ratios(base, pim)
    return ReportRecord(
        workload_id=spec.workload_id,
        config_hash="",
        ambit_latency_ns=pim.latency_ns,
        ambit_energy_nJ=pim.energy_nJ,
        baseline_latency_ns=base.latency_ns,
        baseline_energy_nJ=base.energy_nJ,
        throughput_ratio=tp,
        energy_ratio=en,
        bytes_moved_baseline=base.bytes_moved_on_channel,
        bytes_moved_pim=pim.bytes_moved_on_channel,
    )


class _BulkRun:
    """A device plus an allocator, executing one bulk op at a time."""

    def __init__(self, config: RunConfig):
        self.geom = config.geometry
        self.cost = config.cost
        self.device = Device(config.geometry, config.seed)
        self.alloc = BulkAllocator(config.geometry)
        self.pim_total = CostReport()

    def vector(self, length_bits: int, value: int | None = None) -> BulkVector:
        vec = self.alloc.allocate(length_bits)
        if value is not None:
            store_vector(self.device, vec, value)
        return vec

    def apply(self, op: BitwiseOp, a: BulkVector, b: BulkVector | None,
              dst: BulkVector) -> None:
        traces = bulk_execute(self.geom, op, a, b, dst)
        for trace in traces:
            execute_on_device(trace, self.device)
        priced = price_traces(traces, self.cost)
        overhead = CostReport(latency_ns=self.cost.op_overhead_ns)
        self.pim_total = self.pim_total + priced + overhead

    def value(self, vec: BulkVector) -> int:
        return load_vector(self.device, vec)


def _run_bulk_bitwise(config: RunConfig, spec: WorkloadSpec) -> ReportRecord:
    op = BitwiseOp.parse(spec.op)
    bits = spec.size_bytes * 8
    bulk = _BulkRun(config)
    a_val = random_vector(bits, config.seed, tag=1)
    a = bulk.vector(bits, a_val)
    b_val = None
    b = None
    if not op.is_unary:
        b_val = random_vector(bits, config.seed, tag=2)
        b = bulk.vector(bits, b_val)
    dst = bulk.vector(bits)
    bulk.apply(op, a, b, dst)
    _check_bits(spec.workload_id, scalar_bitwise(op, a_val, b_val, bits), bulk.value(dst))
    base = baseline_cost(op, spec.size_bytes, config.baseline.for_op(op), config.cost)
    return _record(spec, bulk.pim_total, base)


def _run_bitmap_query(config: RunConfig, spec: WorkloadSpec) -> ReportRecord:
    bits = spec.n_records
    bitmaps = gen_bitmap_workload(spec.n_records, spec.n_categories, config.seed)
    tree = parse_query(spec.query, spec.n_categories)
    bulk = _BulkRun(config)
    vectors = {("cat", c): bulk.vector(bits, bitmaps[c]) for c in range(spec.n_categories)}
    vector_bytes = ceil(bits / 8)
    base = CostReport()

    def operand(node) -> BulkVector:
        return vectors[("cat", node.category)] if node.op == "cat" else vectors[id(node)]

    gates = query_gates(tree)
    for gate in gates:
        dst = bulk.vector(bits)
        vectors[id(gate)] = dst
        if gate.op == "not":
            bulk.apply(BitwiseOp.NOT, operand(gate.left), None, dst)
            base = base + stream_cost(vector_bytes, vector_bytes, config.baseline, config.cost)
        else:
            op = BitwiseOp.AND if gate.op == "and" else BitwiseOp.OR
            bulk.apply(op, operand(gate.left), operand(gate.right), dst)
            base = base + stream_cost(2 * vector_bytes, vector_bytes, config.baseline, config.cost)
    _check_bits(spec.workload_id, eval_query(tree, bitmaps, bits), bulk.value(operand(tree)))
    return _record(spec, bulk.pim_total, base)


def _run_bitserial_scan(config: RunConfig, spec: WorkloadSpec) -> ReportRecord:
    constant = parse_predicate(spec.predicate)
    values = gen_records(spec.n_records, spec.bit_width, config.seed)
    planes = pack_bit_planes(values, spec.bit_width)
    steps = bitserial_scan_compile(constant, spec.bit_width)
    bits = spec.n_records
    bulk = _BulkRun(config)
    registers = {f"plane{i}": bulk.vector(bits, planes[i]) for i in range(spec.bit_width)}
    registers["lt"] = bulk.vector(bits, 0)
    registers["eq"] = bulk.vector(bits, (1 << bits) - 1)
    registers["tmp"] = bulk.vector(bits, 0)
    for step in steps:
        bulk.apply(step.op, registers[step.src_a],
                   registers[step.src_b] if step.src_b else None,
                   registers[step.dst])
    _check_bits(spec.workload_id, scan_oracle(values, constant), bulk.value(registers["lt"]))
    column_bytes = ceil(spec.n_records * spec.bit_width / 8)
    base = stream_cost(column_bytes, ceil(bits / 8), config.baseline, config.cost)
    return _record(spec, bulk.pim_total, base)


def _load_graph(config: RunConfig, spec: WorkloadSpec) -> tuple[list[tuple[int, int]], int]:
    if spec.graph_path is not None:
        with open(spec.graph_path, "r", encoding="utf-8") as fh:
            return parse_edge_list(fh.read())
    return synth_graph(spec.synth_vertices, spec.synth_edges, config.seed), spec.synth_vertices


def _run_graph(config: RunConfig, spec: WorkloadSpec) -> ReportRecord:
    edges, n_vertices = _load_graph(config, spec)
    partitions = partition_graph(edges, n_vertices, config.vaults)
    system = VaultSystem(partitions, config.vaults)
    if spec.kind == "pagerank":
        ranks = system.run_pagerank(spec.iterations, spec.damping)
        oracle = sequential_pagerank(n_vertices, edges, spec.iterations, spec.damping)
        for v in range(n_vertices):
            if abs(ranks[v] - oracle[v]) > PAGERANK_TOLERANCE:
                raise OracleMismatchError(spec.workload_id, v, oracle[v], ranks[v])
        system.ledger.baseline_bytes = pagerank_baseline_bytes(len(edges), spec.iterations)
        values = ranks
    else:
        if spec.source >= n_vertices:
            raise ConfigError(f"bfs source {spec.source} outside [0, {n_vertices})")
        distances = system.run_bfs(spec.source)
        oracle_d = sequential_bfs(n_vertices, edges, spec.source)
        for v in range(n_vertices):
            if distances[v] != oracle_d[v]:
                raise OracleMismatchError(spec.workload_id, v, oracle_d[v], distances[v])
        system.ledger.baseline_bytes = bfs_baseline_bytes(edges, distances)
        values = distances
    if spec.values_out:
        with open(spec.values_out, "w", encoding="utf-8") as fh:
            fh.write(format_vertex_values(values))
    summary = movement_summary(system.ledger, config.cost, config.baseline)
    return ReportRecord(workload_id=spec.workload_id, config_hash="", **summary)
