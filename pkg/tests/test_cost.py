"""Pricing rules, baseline models, throughput, and speedup properties."""

import dataclasses

import pytest

from pimsim.ambit import BitwiseOp, BulkAllocator, bulk_execute, compile_op, rowclone_copy
from pimsim.cost import (
    BaselineModel,
    CostParams,
    CostReport,
    ambit_bulk_cost,
    ambit_throughput,
    baseline_cost,
    cost_ratios,
    price_trace,
    price_traces,
    speedup,
    stream_cost,
)
from pimsim.dram import DramGeometry, RowAddress
from pimsim.errors import ConfigError

GEOM = DramGeometry()
P = CostParams()


def and_trace(geom=GEOM):
    d = geom.first_data_row
    return compile_op(geom, BitwiseOp.AND,
                      RowAddress(0, 0, d), RowAddress(0, 0, d + 1), RowAddress(0, 0, d + 2))


class TestPriceTrace:
    def test_and_at_defaults(self):
        # 4 activation groups at 2*tRAS + tRP each
        r = price_trace(and_trace(), P)
        assert r.latency_ns == 4 * (2 * 35 + 15) == 340
        assert r.energy_nJ == 3 * (2 * 2.0 + 0.5) + (1.5 * 2 * 2.0 + 0.5) == 20.0
        assert r.bytes_moved_on_channel == 0
        assert r.result_bits == 8192

    def test_not_at_defaults(self):
        d = GEOM.first_data_row
        trace = compile_op(GEOM, BitwiseOp.NOT,
                           RowAddress(0, 0, d), None, RowAddress(0, 0, d + 1))
        r = price_trace(trace, P)
        assert r.latency_ns == (35 + 15) + (2 * 35 + 15)
        assert r.energy_nJ == (2.0 + 0.5) + (2 * 2.0 + 0.5)

    def test_empty_trace(self):
        trace = rowclone_copy(GEOM, RowAddress(0, 0, 8), RowAddress(0, 0, 8))
        r = price_trace(trace, P)
        assert r == CostReport(0.0, 0.0, 0, 0)

    def test_additivity(self):
        t1, t2 = and_trace(), and_trace()
        combined = dataclasses.replace(t1, commands=t1.commands + t2.commands)
        lhs = price_trace(combined, P)
        rhs = price_trace(t1, P)
        assert lhs.latency_ns == 2 * rhs.latency_ns
        assert lhs.energy_nJ == 2 * rhs.energy_nJ
        assert lhs.bytes_moved_on_channel == 2 * rhs.bytes_moved_on_channel

    def test_burst_copy_moves_bytes(self):
        geom = DramGeometry(banks=2)
        trace = rowclone_copy(geom, RowAddress(0, 0, 8), RowAddress(1, 0, 8))
        r = price_trace(trace, P)
        assert r.bytes_moved_on_channel == 2 * 1024  # read + write bursts
        assert r.latency_ns == 2 * (15 + 1024 / 12.8)

    def test_in_subarray_ops_move_zero_bytes(self):
        for op in BitwiseOp:
            d = GEOM.first_data_row
            b = None if op.is_unary else RowAddress(0, 0, d + 1)
            trace = compile_op(GEOM, op, RowAddress(0, 0, d), b, RowAddress(0, 0, d + 2))
            assert price_trace(trace, P).bytes_moved_on_channel == 0


class TestPriceTraces:
    def test_eight_parallel_traces(self):
        alloc = BulkAllocator(GEOM)
        a, b, dst = (alloc.allocate(65536) for _ in range(3))
        traces = bulk_execute(GEOM, BitwiseOp.AND, a, b, dst)
        r = price_traces(traces, P)
        single = price_trace(traces[0], P)
        assert r.latency_ns == single.latency_ns == 340
        assert r.energy_nJ == 8 * single.energy_nJ

    def test_two_waves_serialize_per_bank(self):
        alloc = BulkAllocator(GEOM)
        a, b, dst = (alloc.allocate(2 * 65536) for _ in range(3))
        traces = bulk_execute(GEOM, BitwiseOp.AND, a, b, dst)
        assert price_traces(traces, P).latency_ns == 2 * 340

    def test_serial_traces_sum(self):
        traces = [and_trace(), and_trace()]
        assert price_traces(traces, P).latency_ns == 680

    def test_empty(self):
        assert price_traces([], P) == CostReport()


class TestThroughput:
    def test_default_and_throughput(self):
        tp = ambit_throughput(BitwiseOp.AND, P, GEOM)
        assert tp == pytest.approx(8192 * 8 / 340)
        assert tp * 1e9 / 8 / 1e9 == pytest.approx(24.09, abs=0.01)  # GB/s of result

    def test_bank_scaling_exact(self):
        tp1 = ambit_throughput(BitwiseOp.AND, dataclasses.replace(P, banks_parallel=1), GEOM)
        tp8 = ambit_throughput(BitwiseOp.AND, P, GEOM)
        assert tp8 == 8 * tp1

    def test_width_scaling_exact(self):
        wide = DramGeometry(row_width_bits=16384)
        assert ambit_throughput(BitwiseOp.AND, P, wide) == \
            2 * ambit_throughput(BitwiseOp.AND, P, GEOM)


class TestBaseline:
    def test_and_one_kib(self):
        r = baseline_cost(BitwiseOp.AND, 1024, BaselineModel().for_op(BitwiseOp.AND), P)
        assert r.bytes_moved_on_channel == 3072
        assert r.latency_ns == 240.0

    def test_not_stream_count(self):
        r = baseline_cost(BitwiseOp.NOT, 1024, BaselineModel().for_op(BitwiseOp.NOT), P)
        assert r.bytes_moved_on_channel == 2 * 1024

    def test_logic_layer_latency_scaling(self):
        cpu = BaselineModel(kind="cpu_stream").for_op(BitwiseOp.AND)
        ll = BaselineModel(kind="logic_layer", internal_bw_multiplier=10.0).for_op(BitwiseOp.AND)
        r_cpu = baseline_cost(BitwiseOp.AND, 4096, cpu, P)
        r_ll = baseline_cost(BitwiseOp.AND, 4096, ll, P)
        assert r_ll.latency_ns == pytest.approx(r_cpu.latency_ns / 10)

    def test_logic_layer_energy(self):
        ll = BaselineModel(kind="logic_layer", internal_energy_pJ_per_byte=6.0)
        r = stream_cost(1000, 0, ll, P)
        assert r.energy_nJ == pytest.approx(6.0)

    def test_bad_kind(self):
        with pytest.raises(ConfigError):
            BaselineModel(kind="gpu")


class TestSpeedup:
    def test_defaults_and_64kib(self):
        tp, en = speedup(BitwiseOp.AND, 65536, P, BaselineModel(), GEOM)
        assert tp > 3 and en > 3

    def test_self_ratio_is_one(self):
        pim = ambit_bulk_cost(BitwiseOp.AND, 65536, P, GEOM)
        assert cost_ratios(pim, pim) == (1.0, 1.0)

    def test_energy_ratio_invariant_under_latency_scaling(self):
        base = speedup(BitwiseOp.AND, 65536, P, BaselineModel(), GEOM)
        slow = dataclasses.replace(P, tRAS_ns=70.0, tRP_ns=30.0, tRCD_ns=30.0)
        scaled = speedup(BitwiseOp.AND, 65536, slow, BaselineModel(), GEOM)
        assert scaled[1] == base[1]
        assert scaled[0] != base[0]

    def test_more_channel_bw_never_raises_throughput_ratio(self):
        prev = None
        for bw in (6.4, 12.8, 25.6, 51.2):
            p = dataclasses.replace(P, channel_bw_GBps=bw)
            tp, _ = speedup(BitwiseOp.AND, 65536, p, BaselineModel(), GEOM)
            if prev is not None:
                assert tp <= prev
            prev = tp

    def test_more_banks_never_lowers_throughput_ratio(self):
        prev = None
        for banks in (1, 2, 4, 8):
            p = dataclasses.replace(P, banks_parallel=banks)
            tp, _ = speedup(BitwiseOp.AND, 65536, p, BaselineModel(), GEOM)
            if prev is not None:
                assert tp >= prev
            prev = tp

    def test_size_scaling_with_overhead(self):
        # With a fixed PIM-side setup cost, full-wave workloads benefit
        # more as they grow.
        p = dataclasses.replace(P, op_overhead_ns=500.0)
        wave_bytes = GEOM.row_width_bits // 8 * P.banks_parallel
        prev = 0.0
        for k in range(1, 17):
            tp, _ = speedup(BitwiseOp.AND, k * wave_bytes, p, BaselineModel(), GEOM)
            assert tp >= prev
            prev = tp

    def test_size_must_be_chunk_multiple(self):
        with pytest.raises(ConfigError):
            speedup(BitwiseOp.AND, 1000, P, BaselineModel(), GEOM)


class TestValidation:
    @pytest.mark.parametrize("kwargs", [
        {"tRAS_ns": 0}, {"e_act_nJ": -1}, {"e_tra_factor": 0.5},
        {"banks_parallel": 0}, {"channel_bw_GBps": 0}, {"op_overhead_ns": -1},
    ])
    def test_bad_params(self, kwargs):
        with pytest.raises(ConfigError):
            CostParams(**kwargs)

    def test_negative_report(self):
        with pytest.raises(ConfigError):
            CostReport(latency_ns=-1)
