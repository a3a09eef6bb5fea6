"""Trace compiler: oracle equivalence, operand preservation, trace
shapes, bulk striping, and the functional-completeness witness."""

import random
from pathlib import Path

import pytest

from pimsim.ambit import (
    COPY,
    BitwiseOp,
    BulkAllocator,
    bulk_execute,
    compile_op,
    dump_trace,
    execute,
    execute_on_device,
    load_vector,
    rowclone_copy,
    scalar_bitwise,
    store_vector,
)
from pimsim.dram import CONTROL0_ROW, Device, DramGeometry, RowAddress, init_subarray
from pimsim.errors import CompileError, PlacementError

DATA_DIR = Path(__file__).parent / "data"

GEOM64 = DramGeometry(banks=1, subarrays_per_bank=1, rows_per_subarray=18, row_width_bits=64)
ALL_OPS = list(BitwiseOp)

# (activation groups, command count) per op; width-independent.
TRACE_SHAPE = {
    BitwiseOp.NOT: (2, 5),
    BitwiseOp.AND: (4, 12),
    BitwiseOp.OR: (4, 12),
    BitwiseOp.NAND: (6, 17),
    BitwiseOp.NOR: (6, 17),
    BitwiseOp.XOR: (16, 46),
    BitwiseOp.XNOR: (18, 51),
}


def data_rows(geom, *offsets):
    return tuple(RowAddress(0, 0, geom.first_data_row + off) for off in offsets)


def run_op(geom, state, op, a_val, b_val):
    a, b, dst = data_rows(geom, 0, 1, 2)
    state._write_row(a.row, a_val, None)
    if b_val is not None:
        state._write_row(b.row, b_val, None)
    trace = compile_op(geom, op, a, None if op.is_unary else b, dst)
    execute(trace, state)
    return state.rows[dst.row]


class TestOracleEquivalence:
    @pytest.mark.parametrize("op", ALL_OPS)
    @pytest.mark.parametrize("width", [64, 1024, 8192])
    def test_matches_scalar_oracle(self, op, width):
        geom = DramGeometry(banks=1, subarrays_per_bank=1,
                            rows_per_subarray=18, row_width_bits=width)
        state = init_subarray(geom, seed=0)
        rng = random.Random(width * 1000 + hash(op.value) % 997)
        for _ in range(25):
            a = rng.getrandbits(width)
            b = None if op.is_unary else rng.getrandbits(width)
            assert run_op(geom, state, op, a, b) == scalar_bitwise(op, a, b, width)

    def test_and_example(self):
        geom = GEOM64
        state = init_subarray(geom, seed=0)
        a = 0xFF00FF00FF00FF00
        b = 0x0F0F0F0F0F0F0F0F
        assert run_op(geom, state, BitwiseOp.AND, a, b) == 0x0F000F000F000F00
        # named operands preserved
        assert state.rows[geom.first_data_row] == a
        assert state.rows[geom.first_data_row + 1] == b

    def test_and_idempotent(self):
        state = init_subarray(GEOM64, seed=0)
        x = 0xA5A5A5A55A5A5A5A
        assert run_op(GEOM64, state, BitwiseOp.AND, x, x) == x

    def test_not_involution(self):
        geom = GEOM64
        state = init_subarray(geom, seed=0)
        a, mid, dst = data_rows(geom, 0, 1, 2)
        x = 0x0123456789ABCDEF
        state._write_row(a.row, x, None)
        execute(compile_op(geom, BitwiseOp.NOT, a, None, mid), state)
        execute(compile_op(geom, BitwiseOp.NOT, mid, None, dst), state)
        assert state.rows[dst.row] == x

    @pytest.mark.parametrize("op", ALL_OPS)
    def test_operand_preservation(self, op):
        geom = GEOM64
        state = init_subarray(geom, seed=3)
        rng = random.Random(7)
        a_val, b_val = rng.getrandbits(64), rng.getrandbits(64)
        run_op(geom, state, op, a_val, None if op.is_unary else b_val)
        assert state.rows[geom.first_data_row] == a_val
        if not op.is_unary:
            assert state.rows[geom.first_data_row + 1] == b_val


class TestTraceShape:
    @pytest.mark.parametrize("op", ALL_OPS)
    @pytest.mark.parametrize("width", [64, 8192])
    def test_constant_shape(self, op, width):
        geom = DramGeometry(banks=1, subarrays_per_bank=1,
                            rows_per_subarray=18, row_width_bits=width)
        a, b, dst = data_rows(geom, 0, 1, 2)
        trace = compile_op(geom, op, a, None if op.is_unary else b, dst)
        groups, commands = TRACE_SHAPE[op]
        assert trace.activation_groups == groups
        assert len(trace.commands) == commands

    def test_and_has_three_copy_aaps_and_one_triple(self):
        a, b, dst = data_rows(GEOM64, 0, 1, 2)
        lines = dump_trace(compile_op(GEOM64, BitwiseOp.AND, a, b, dst))
        assert sum(1 for l in lines if l.startswith("AAP") and "sa" not in l) == 3
        assert sum(1 for l in lines if l.startswith("TRA")) == 1


class TestCompileErrors:
    def test_reserved_row_operand(self):
        a, dst = data_rows(GEOM64, 0, 1)
        with pytest.raises(CompileError, match="reserved"):
            compile_op(GEOM64, BitwiseOp.AND, a, RowAddress(0, 0, CONTROL0_ROW), dst)

    def test_reserved_row_destination(self):
        a, b = data_rows(GEOM64, 0, 1)
        with pytest.raises(CompileError, match="reserved"):
            compile_op(GEOM64, BitwiseOp.AND, a, b, RowAddress(0, 0, 0))

    def test_cross_subarray(self):
        geom = DramGeometry(banks=2, subarrays_per_bank=1,
                            rows_per_subarray=18, row_width_bits=64)
        a, dst = data_rows(geom, 0, 2)
        b = RowAddress(1, 0, geom.first_data_row)
        with pytest.raises(PlacementError):
            compile_op(geom, BitwiseOp.AND, a, b, dst)

    def test_operand_count(self):
        a, b, dst = data_rows(GEOM64, 0, 1, 2)
        with pytest.raises(CompileError):
            compile_op(GEOM64, BitwiseOp.NOT, a, b, dst)
        with pytest.raises(CompileError):
            compile_op(GEOM64, BitwiseOp.AND, a, None, dst)

    def test_unknown_op_name(self):
        with pytest.raises(CompileError):
            BitwiseOp.parse("nandnor")

    def test_execute_error_carries_command_index(self):
        import dataclasses

        from pimsim.dram import Precharge
        from pimsim.errors import ProtocolError

        trace = compile_op(GEOM64, BitwiseOp.AND,
                           *data_rows(GEOM64, 0, 1), data_rows(GEOM64, 2)[0])
        bad = dataclasses.replace(trace, commands=[Precharge()])
        with pytest.raises(ProtocolError, match="command 0"):
            execute(bad, init_subarray(GEOM64, seed=0))


class TestRowClone:
    def test_copy_random_row(self):
        state = init_subarray(GEOM64, seed=4)
        src, dst = data_rows(GEOM64, 0, 3)
        value = state.rows[src.row]
        trace = rowclone_copy(GEOM64, src, dst)
        assert len(trace.commands) == 3
        assert trace.op == COPY
        execute(trace, state)
        assert state.rows[dst.row] == value
        assert state.rows[src.row] == value

    def test_copy_control_zero(self):
        state = init_subarray(GEOM64, seed=4)
        dst = data_rows(GEOM64, 3)[0]
        execute(rowclone_copy(GEOM64, RowAddress(0, 0, CONTROL0_ROW), dst), state)
        assert state.rows[dst.row] == 0

    def test_self_copy_is_noop(self):
        src = data_rows(GEOM64, 0)[0]
        trace = rowclone_copy(GEOM64, src, src)
        assert trace.commands == []

    def test_cross_subarray_burst(self):
        geom = DramGeometry(banks=2, subarrays_per_bank=1,
                            rows_per_subarray=18, row_width_bits=64)
        device = Device(geom, seed=5)
        src = RowAddress(0, 0, geom.first_data_row)
        dst = RowAddress(1, 0, geom.first_data_row)
        value = device.row(src)
        trace = rowclone_copy(geom, src, dst)
        assert len(trace.commands) == 2  # read burst, write burst
        execute_on_device(trace, device)
        assert device.row(dst) == value

    def test_reserved_destination(self):
        src = data_rows(GEOM64, 0)[0]
        with pytest.raises(CompileError):
            rowclone_copy(GEOM64, src, RowAddress(0, 0, CONTROL0_ROW))


class TestBulk:
    def test_default_geometry_eight_chunks(self):
        geom = DramGeometry()
        alloc = BulkAllocator(geom)
        a, b, dst = (alloc.allocate(65536) for _ in range(3))
        traces = bulk_execute(geom, BitwiseOp.AND, a, b, dst)
        assert len(traces) == 8
        assert sorted(t.location[0] for t in traces) == list(range(8))
        assert all(t.parallel_eligible for t in traces)

    def test_empty_vectors(self):
        geom = DramGeometry()
        alloc = BulkAllocator(geom)
        a, b, dst = (alloc.allocate(0) for _ in range(3))
        assert bulk_execute(geom, BitwiseOp.AND, a, b, dst) == []

    @pytest.mark.parametrize("op", [BitwiseOp.XOR, BitwiseOp.NOR])
    def test_bulk_matches_scalar(self, op):
        geom = DramGeometry()
        device = Device(geom, seed=6)
        alloc = BulkAllocator(geom)
        bits = 16384
        rng = random.Random(13)
        a_val, b_val = rng.getrandbits(bits), rng.getrandbits(bits)
        a, b, dst = (alloc.allocate(bits) for _ in range(3))
        store_vector(device, a, a_val)
        store_vector(device, b, b_val)
        for trace in bulk_execute(geom, op, a, b, dst):
            execute_on_device(trace, device)
        assert load_vector(device, dst) == scalar_bitwise(op, a_val, b_val, bits)

    def test_partial_tail_chunk(self):
        geom = DramGeometry()
        device = Device(geom, seed=6)
        alloc = BulkAllocator(geom)
        bits = 8192 + 100
        a_val = random.Random(1).getrandbits(bits)
        a, dst = alloc.allocate(bits), alloc.allocate(bits)
        store_vector(device, a, a_val)
        for trace in bulk_execute(geom, BitwiseOp.NOT, a, None, dst):
            execute_on_device(trace, device)
        assert load_vector(device, dst) == scalar_bitwise(BitwiseOp.NOT, a_val, None, bits)

    def test_interleaving_invariance(self):
        geom = DramGeometry()
        bits = 65536
        rng = random.Random(99)
        a_val, b_val = rng.getrandbits(bits), rng.getrandbits(bits)
        finals = []
        for order_seed in (None, 1, 2):
            device = Device(geom, seed=8)
            alloc = BulkAllocator(geom)
            a, b, dst = (alloc.allocate(bits) for _ in range(3))
            store_vector(device, a, a_val)
            store_vector(device, b, b_val)
            traces = bulk_execute(geom, BitwiseOp.AND, a, b, dst)
            if order_seed is not None:
                random.Random(order_seed).shuffle(traces)
            for trace in traces:
                execute_on_device(trace, device)
            finals.append([device.subarrays[k].rows for k in sorted(device.subarrays)])
        assert finals[0] == finals[1] == finals[2]

    def test_misaligned_placements(self):
        geom = DramGeometry()
        alloc = BulkAllocator(geom)
        a = alloc.allocate(65536)
        b = alloc.allocate(8192)
        with pytest.raises(PlacementError):
            bulk_execute(geom, BitwiseOp.AND, a, b, a)

    def test_allocator_exhaustion(self):
        geom = DramGeometry(banks=1, subarrays_per_bank=1,
                            rows_per_subarray=18, row_width_bits=64)
        alloc = BulkAllocator(geom)
        with pytest.raises(PlacementError):
            for _ in range(20):
                alloc.allocate(64)


class TestFunctionalCompleteness:
    def test_full_adder_truth_table(self):
        """A 1-bit full adder from compiled AND/OR/NOT traces only.

        All 8 input rows are evaluated at once: rows a/b/cin hold the 8
        input combinations bit-per-column, and sum/carry columns must
        match the truth table.
        """
        geom = DramGeometry(banks=1, subarrays_per_bank=1,
                            rows_per_subarray=32, row_width_bits=64)
        state = init_subarray(geom, seed=0)
        d = geom.first_data_row

        def row(i):
            return RowAddress(0, 0, d + i)

        # Columns 0..7 encode (a, b, cin) = the bits of the column index.
        a_val = sum(1 << i for i in range(8) if i & 4)
        b_val = sum(1 << i for i in range(8) if i & 2)
        c_val = sum(1 << i for i in range(8) if i & 1)
        names = {}
        for idx, (name, val) in enumerate([("a", a_val), ("b", b_val), ("cin", c_val)]):
            names[name] = row(idx)
            state._write_row(row(idx).row, val, None)
        next_free = [3]

        def emit(op, x, y=None):
            dst = row(next_free[0])
            next_free[0] += 1
            execute(compile_op(geom, op, names[x], names[y] if y else None, dst), state)
            names[f"r{dst.row}"] = dst
            return f"r{dst.row}"

        def and_(x, y):
            return emit(BitwiseOp.AND, x, y)

        def or_(x, y):
            return emit(BitwiseOp.OR, x, y)

        def not_(x):
            return emit(BitwiseOp.NOT, x)

        def xor(x, y):
            return or_(and_(x, not_(y)), and_(not_(x), y))

        s = xor(xor("a", "b"), "cin")
        carry = or_(or_(and_("a", "b"), and_("a", "cin")), and_("b", "cin"))
        sum_row = state.rows[names[s].row]
        carry_row = state.rows[names[carry].row]
        for col in range(8):
            a, b, c = bool(col & 4), bool(col & 2), bool(col & 1)
            assert (sum_row >> col) & 1 == (a ^ b ^ c)
            assert (carry_row >> col) & 1 == ((a + b + c) >= 2)


class TestDumpGolden:
    @pytest.mark.parametrize("name,build", [
        ("and", lambda g: compile_op(g, BitwiseOp.AND, *data_rows(g, 0, 1), data_rows(g, 2)[0])),
        ("not", lambda g: compile_op(g, BitwiseOp.NOT, data_rows(g, 0)[0], None, data_rows(g, 2)[0])),
        ("copy", lambda g: rowclone_copy(g, *data_rows(g, 0, 2))),
    ])
    def test_matches_golden(self, name, build):
        lines = dump_trace(build(GEOM64))
        golden = (DATA_DIR / f"golden_trace_{name}.txt").read_text().splitlines()
        assert lines == golden
