"""Compiles row-level bulk bitwise operations and row copies into DRAM
command traces, and executes traces on subarray state.

Canonical sequences (AAP(x, y) is Activate(x); Activate(y); Precharge;
the second activation copies the sense-amplifier contents into y):

* AND  a b dst: AAP(a,T0) AAP(b,T1) AAP(C0,T2) TRA(T0,T1,T2) Act(dst) Pre
* OR   a b dst: same with C1 staged into T2
* NOT  a dst:   Dcc(a, pair0) Pre AAP(pair0.neg, dst)
* NAND/NOR:     AND/OR into T3, then NOT(T3, dst)
* XOR  a b dst: NOT(b,T3); AND(a,T3,T3); NOT(a,DCC0); AND(DCC0,b,DCC0);
                OR(T3,DCC0,dst)
* XNOR:         XOR into T3, then NOT(T3, dst)
* COPY src dst: one AAP (same subarray); Read/Write burst pair otherwise

Operands are always staged into temp rows before a triple activation, so
charge sharing never destroys data rows; named source rows are preserved
by every compiled trace.

Trace-shape constants (activation groups, i.e. precharge count / total
commands, independent of row width): AND/OR 4/12, NOT 2/5, NAND/NOR
6/17, XOR 16/46, XNOR 18/51, intra-subarray COPY 1/3.
"""

from dataclasses import dataclass
from enum import Enum
from math import ceil

from .dram import (
    CONTROL0_ROW,
    CONTROL1_ROW,
    Activate,
    ActivateDcc,
    ActivateTriple,
    Device,
    DramCommand,
    DramGeometry,
    Precharge,
    Read,
    RowAddress,
    RowRole,
    SubarrayState,
    Write,
    apply_command,
)
from .errors import CompileError, PlacementError, PimError


class BitwiseOp(Enum):
    NOT = "not"
    AND = "and"
    OR = "or"
    NAND = "nand"
    NOR = "nor"
    XOR = "xor"
    XNOR = "xnor"

    @property
    def is_unary(self) -> bool:
        return self is BitwiseOp.NOT

    @classmethod
    def parse(cls, name: str) -> "BitwiseOp":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise CompileError(f"unknown bitwise op {name!r}") from None


COPY = "copy"  # CommandTrace.op value for row copies

T0, T1, T2, T3 = 0, 1, 2, 3


def scalar_bitwise(op: BitwiseOp, a: int, b: int | None, width_bits: int) -> int:
    """Reference semantics on plain integers (the built-in oracle)."""
    mask = (1 << width_bits) - 1
    if op is BitwiseOp.NOT:
        return (a ^ mask) & mask
    if b is None:
        raise CompileError(f"{op.value} needs two operands")
    if op is BitwiseOp.AND:
        return a & b & mask
    if op is BitwiseOp.OR:
        return (a | b) & mask
    if op is BitwiseOp.NAND:
        return (a & b) ^ mask
    if op is BitwiseOp.NOR:
        return (a | b) ^ mask
    if op is BitwiseOp.XOR:
        return (a ^ b) & mask
    return (a ^ b) ^ mask  # XNOR


@dataclass
class CommandTrace:
    """An executable command sequence realizing one operation.

    ``location`` is the (bank, subarray) the activation commands run in;
    burst commands carry full addresses and may cross subarrays.
    """

    commands: list[DramCommand]
    op: object  # BitwiseOp or COPY
    operands: tuple[RowAddress, ...]
    destination: RowAddress
    location: tuple[int, int]
    result_bits: int
    parallel_eligible: bool = False

    @property
    def activation_groups(self) -> int:
        """Precharge count; every activation group ends in one."""
        return sum(1 for c in self.commands if isinstance(c, Precharge))


def _emit_aap(cmds: list[DramCommand], src: int, dst: int) -> None:
    cmds.append(Activate(src))
    cmds.append(Activate(dst))
    cmds.append(Precharge())


def _emit_and_or(cmds: list[DramCommand], geom: DramGeometry, a: int, b: int,
                 dst: int, use_or: bool) -> None:
    control = CONTROL1_ROW if use_or else CONTROL0_ROW
    _emit_aap(cmds, a, T0)
    _emit_aap(cmds, b, T1)
    _emit_aap(cmds, control, T2)
    cmds.append(ActivateTriple(T0, T1, T2))
    cmds.append(Activate(dst))
    cmds.append(Precharge())


def _emit_not(cmds: list[DramCommand], geom: DramGeometry, src: int, dst: int) -> None:
    _pos, neg = geom.dcc_rows(0)
    cmds.append(ActivateDcc(src, 0))
    cmds.append(Precharge())
    _emit_aap(cmds, neg, dst)


def _emit_op(cmds: list[DramCommand], geom: DramGeometry, op: BitwiseOp,
             a: int, b: int | None, dst: int) -> None:
    if op is BitwiseOp.NOT:
        _emit_not(cmds, geom, a, dst)
    elif op is BitwiseOp.AND:
        _emit_and_or(cmds, geom, a, b, dst, use_or=False)
    elif op is BitwiseOp.OR:
        _emit_and_or(cmds, geom, a, b, dst, use_or=True)
    elif op is BitwiseOp.NAND:
        _emit_and_or(cmds, geom, a, b, T3, use_or=False)
        _emit_not(cmds, geom, T3, dst)
    elif op is BitwiseOp.NOR:
        _emit_and_or(cmds, geom, a, b, T3, use_or=True)
        _emit_not(cmds, geom, T3, dst)
    elif op is BitwiseOp.XOR:
        _emit_xor(cmds, geom, a, b, dst)
    elif op is BitwiseOp.XNOR:
        _emit_xor(cmds, geom, a, b, T3)
        _emit_not(cmds, geom, T3, dst)
    else:
        raise CompileError(f"unhandled op {op!r}")


def _emit_xor(cmds: list[DramCommand], geom: DramGeometry, a: int, b: int, dst: int) -> None:
    # a XOR b == (a AND NOT b) OR (NOT a AND b).  T3 holds the left term;
    # the dual-contact cell holds NOT a and then the right term, freeing
    # T0..T2 for staging inside each AND/OR.
    dcc_pos, _ = geom.dcc_rows(0)
    _emit_not(cmds, geom, b, T3)
    _emit_and_or(cmds, geom, a, T3, T3, use_or=False)
    _emit_not(cmds, geom, a, dcc_pos)
    _emit_and_or(cmds, geom, dcc_pos, b, dcc_pos, use_or=False)
    _emit_and_or(cmds, geom, T3, dcc_pos, dst, use_or=True)


def compile_op(geom: DramGeometry, op: BitwiseOp, a: RowAddress,
               b: RowAddress | None, dst: RowAddress,
               parallel_eligible: bool = False,
               result_bits: int | None = None) -> CommandTrace:
    """Compile one full-row bitwise operation over data rows."""
    if op.is_unary != (b is None):
        raise CompileError(f"{op.value}: operand count mismatch")
    named = [("a", a), ("dst", dst)] + ([("b", b)] if b is not None else [])
    for what, addr in named:
        addr.validate(geom)
        if geom.role_of(addr.row) is not RowRole.DATA:
            raise CompileError(f"{op.value}: {what} row {addr.row} aliases a reserved row")
    loc = (a.bank, a.subarray)
    for _, addr in named:
        if (addr.bank, addr.subarray) != loc:
            raise PlacementError(f"{op.value}: operands span subarrays "
                                 f"({loc} vs {(addr.bank, addr.subarray)})")
    cmds: list[DramCommand] = []
    _emit_op(cmds, geom, op, a.row, b.row if b else None, dst.row)
    operands = (a,) if b is None else (a, b)
    return CommandTrace(
        commands=cmds,
        op=op,
        operands=operands,
        destination=dst,
        location=loc,
        result_bits=result_bits if result_bits is not None else geom.row_width_bits,
        parallel_eligible=parallel_eligible,
    )


def rowclone_copy(geom: DramGeometry, src: RowAddress, dst: RowAddress) -> CommandTrace:
    """Row-to-row copy.  Same subarray compiles to a single AAP; across
    subarrays it falls back to a Read/Write burst over the internal bus.
    A self-copy is a documented no-op (empty trace)."""
    src.validate(geom)
    dst.validate(geom)
    if geom.role_of(dst.row) is not RowRole.DATA:
        raise CompileError(f"copy: dst row {dst.row} aliases a reserved row")
    width = geom.row_width_bits
    loc = (src.bank, src.subarray)
    if src == dst:
        cmds: list[DramCommand] = []
    elif (dst.bank, dst.subarray) == loc:
        cmds = []
        _emit_aap(cmds, src.row, dst.row)
    else:
        cmds = [Read(src, 0, width), Write(dst, 0, width)]
    return CommandTrace(
        commands=cmds,
        op=COPY,
        operands=(src,),
        destination=dst,
        location=loc,
        result_bits=width if cmds else 0,
    )


def execute(trace: CommandTrace, state: SubarrayState) -> SubarrayState:
    """Run a single-subarray trace; errors carry the command index."""
    for i, cmd in enumerate(trace.commands):
        try:
            apply_command(state, cmd)
        except PimError as exc:
            raise type(exc)(f"command {i} of {_op_name(trace.op)} trace: {exc}") from exc
    return state


def execute_on_device(trace: CommandTrace, device: Device) -> None:
    """Run a trace against the whole device (handles burst copies)."""
    for i, cmd in enumerate(trace.commands):
        try:
            device.apply(trace.location, cmd)
        except PimError as exc:
            raise type(exc)(f"command {i} of {_op_name(trace.op)} trace: {exc}") from exc


def _op_name(op) -> str:
    return op.value if isinstance(op, BitwiseOp) else str(op)


# --- bulk vectors ------------------------------------------------------------


@dataclass(frozen=True)
class BulkChunk:
    addr: RowAddress
    bit_lo: int
    bit_hi: int

    @property
    def width(self) -> int:
        return self.bit_hi - self.bit_lo


@dataclass(frozen=True)
class BulkVector:
    """A logical bit vector striped over data rows, bank-major then
    row-major: chunk i lives in bank i mod B, wrapping to the next row
    once every bank (and subarray) holds a chunk."""

    length_bits: int
    placement: tuple[BulkChunk, ...]

    def __post_init__(self):
        covered = 0
        for chunk in self.placement:
            if chunk.bit_lo != 0 or chunk.width <= 0:
                raise PlacementError("chunks must start at bit 0 of their row span")
            covered += chunk.width
        if covered != self.length_bits:
            raise PlacementError(
                f"placement covers {covered} bits, vector is {self.length_bits}")


class BulkAllocator:
    """Hands out aligned vector placements over a device's data rows."""

    def __init__(self, geom: DramGeometry):
        self.geom = geom
        self._next_row = geom.first_data_row

    def allocate(self, length_bits: int) -> BulkVector:
        geom = self.geom
        if length_bits == 0:
            return BulkVector(0, ())
        width = geom.row_width_bits
        lanes = geom.banks * geom.subarrays_per_bank
        n_chunks = ceil(length_bits / width)
        rows_needed = ceil(n_chunks / lanes)
        if self._next_row + rows_needed > geom.rows_per_subarray:
            raise PlacementError(
                f"out of data rows: need {rows_needed} more, "
                f"{geom.rows_per_subarray - self._next_row} left")
        base = self._next_row
        self._next_row += rows_needed
        chunks = []
        remaining = length_bits
        for i in range(n_chunks):
            bank = i % geom.banks
            sub = (i // geom.banks) % geom.subarrays_per_bank
            row = base + i // lanes
            chunks.append(BulkChunk(RowAddress(bank, sub, row), 0, min(width, remaining)))
            remaining -= width
        return BulkVector(length_bits, tuple(chunks))


def store_vector(device: Device, vec: BulkVector, value: int) -> None:
    """Host-side load of a logical vector into its placement rows."""
    offset = 0
    for chunk in vec.placement:
        piece = (value >> offset) & ((1 << chunk.width) - 1)
        device.set_row(chunk.addr, piece)
        offset += chunk.width


def load_vector(device: Device, vec: BulkVector) -> int:
    value = 0
    offset = 0
    for chunk in vec.placement:
        piece = device.row(chunk.addr) & ((1 << chunk.width) - 1)
        value |= piece << offset
        offset += chunk.width
    return value


def _check_aligned(a: BulkVector, b: BulkVector, what: str) -> None:
    if a.length_bits != b.length_bits or len(a.placement) != len(b.placement):
        raise PlacementError(f"{what}: vector lengths differ")
    for ca, cb in zip(a.placement, b.placement):
        if (ca.addr.bank, ca.addr.subarray, ca.width) != (cb.addr.bank, cb.addr.subarray, cb.width):
            raise PlacementError(f"{what}: chunk decomposition is misaligned")


def bulk_execute(geom: DramGeometry, op: BitwiseOp, a: BulkVector,
                 b: BulkVector | None, dst: BulkVector) -> list[CommandTrace]:
    """Compile one trace per chunk.  Chunks land in distinct banks
    wherever the striping allows, and every trace is marked
    parallel-eligible: traces in distinct banks may execute in any
    interleaving with identical results."""
    _check_aligned(a, dst, op.value)
    if b is not None:
        _check_aligned(a, b, op.value)
    traces = []
    for i, chunk_a in enumerate(a.placement):
        chunk_b = b.placement[i] if b is not None else None
        chunk_d = dst.placement[i]
        traces.append(compile_op(
            geom, op, chunk_a.addr,
            chunk_b.addr if chunk_b else None,
            chunk_d.addr,
            parallel_eligible=True,
            result_bits=chunk_d.width,
        ))
    return traces


# --- trace dump --------------------------------------------------------------


def dump_trace(trace: CommandTrace) -> list[str]:
    """Render a trace one mnemonic per line.

    ``AAP src dst`` covers Activate;Activate;Precharge; the copy group
    that follows a triple activation prints as ``AAP sa dst`` (the
    source is the sense-amplifier latch).  ``TRA``/``DCC`` print the
    bare command; unmatched precharges print ``PRE``; bursts print
    ``RD``/``WR`` with bank/subarray/row and bit range.
    """
    lines = []
    cmds = trace.commands
    i = 0
    while i < len(cmds):
        c = cmds[i]
        if (isinstance(c, Activate) and i + 2 < len(cmds)
                and isinstance(cmds[i + 1], Activate)
                and isinstance(cmds[i + 2], Precharge)):
            lines.append(f"AAP {c.row} {cmds[i + 1].row}")
            i += 3
        elif (isinstance(c, Activate) and i + 1 < len(cmds)
                and isinstance(cmds[i + 1], Precharge)):
            lines.append(f"AAP sa {c.row}")
            i += 2
        elif isinstance(c, ActivateTriple):
            lines.append(f"TRA {c.row_a} {c.row_b} {c.row_c}")
            i += 1
        elif isinstance(c, ActivateDcc):
            lines.append(f"DCC {c.src_row} {c.pair}")
            i += 1
        elif isinstance(c, Precharge):
            lines.append("PRE")
            i += 1
        elif isinstance(c, Read):
            a = c.addr
            lines.append(f"RD {a.bank}/{a.subarray}/{a.row} {c.bit_lo} {c.bit_hi}")
            i += 1
        elif isinstance(c, Write):
            a = c.addr
            lines.append(f"WR {a.bank}/{a.subarray}/{a.row} {c.bit_lo} {c.bit_hi}")
            i += 1
        else:
            raise CompileError(f"cannot dump command {c!r}")
    return lines
