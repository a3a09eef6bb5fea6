"""Bit-exact functional model of DRAM subarray state and commands.

A subarray is a grid of rows sharing one set of sense amplifiers.  Rows
are modelled as Python integers (bit i of the row is ``(value >> i) & 1``)
so whole-row operations are single bitwise expressions.

Command semantics capture the charge-sharing outcome at the logical
level:

* ``Activate(r)`` latches row r into the sense amplifiers.  A further
  ``Activate(d)`` while the amplifiers are valid is the fast-copy step:
  the amplifiers drive row d (row-to-row copy without touching the
  channel).
* ``ActivateTriple(a, b, c)`` simultaneously activates three rows;
  charge sharing leaves the bitwise majority of the three values in all
  three rows and in the amplifiers.  With one operand pre-set to all
  zeros the result is AND of the other two; with all ones, OR.
* ``ActivateDcc(s, pair)`` routes row s through a dual-contact cell
  row: the positive contact stores the value, the negative contact its
  complement (captured from the amplifier's inverted node).
* ``Precharge`` closes the row buffer.

Each subarray reserves a fixed group of low rows (see ``RowRole``); all
remaining rows hold data.  Control rows are immutable after
initialization, and the two contacts of a dual-contact-cell row are kept
complementary by construction: writing either contact updates both
views.
"""

from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, ProtocolError, RoleError
from .rng import SplitMix64, stream_seed

# Reserved-row layout, per subarray, in row order:
#   rows 0..3   T0..T3     temporaries for triple-activation inputs/results
#   row  4      C0         control row, all zeros (AND idiom)
#   row  5      C1         control row, all ones  (OR idiom)
#   rows 6..7   DCC0/DCC0n first dual-contact-cell pair (pos, neg contact)
#   rows 8..9   DCC1/DCC1n second pair, only when geometry enables it
NUM_TEMP_ROWS = 4
CONTROL0_ROW = 4
CONTROL1_ROW = 5
FIRST_DCC_ROW = 6


class RowRole(Enum):
    DATA = "data"
    TEMP = "temp"
    CONTROL0 = "control0"
    CONTROL1 = "control1"
    DCC_POS = "dcc_pos"
    DCC_NEG = "dcc_neg"


@dataclass(frozen=True)
class DramGeometry:
    """Chip geometry.  Row width must be a whole number of 64-bit words;
    each subarray needs room for the reserved group plus data rows."""

    banks: int = 8
    subarrays_per_bank: int = 1
    rows_per_subarray: int = 64
    row_width_bits: int = 8192
    dcc_pairs: int = 1

    def __post_init__(self):
        for name in ("banks", "subarrays_per_bank", "rows_per_subarray", "row_width_bits"):
            if getattr(self, name) < 1:
                raise ConfigError(f"geometry.{name} must be >= 1")
        if self.row_width_bits % 64 != 0:
            raise ConfigError("geometry.row_width_bits must be a multiple of 64")
        if self.rows_per_subarray < 18:
            raise ConfigError("geometry.rows_per_subarray must be >= 18")
        if self.dcc_pairs not in (1, 2):
            raise ConfigError("geometry.dcc_pairs must be 1 or 2")

    @property
    def first_data_row(self) -> int:
        return FIRST_DCC_ROW + 2 * self.dcc_pairs

    @property
    def data_rows(self) -> int:
        return self.rows_per_subarray - self.first_data_row

    @property
    def row_mask(self) -> int:
        return (1 << self.row_width_bits) - 1

    def role_of(self, row: int) -> RowRole:
        """Row role is a pure function of the row index."""
        if not 0 <= row < self.rows_per_subarray:
            raise ConfigError(f"row index {row} out of range")
        if row < NUM_TEMP_ROWS:
            return RowRole.TEMP
        if row == CONTROL0_ROW:
            return RowRole.CONTROL0
        if row == CONTROL1_ROW:
            return RowRole.CONTROL1
        if row < self.first_data_row:
            offset = row - FIRST_DCC_ROW
            return RowRole.DCC_POS if offset % 2 == 0 else RowRole.DCC_NEG
        return RowRole.DATA

    def dcc_rows(self, pair: int) -> tuple[int, int]:
        """(positive, negative) contact rows of a dual-contact pair."""
        if not 0 <= pair < self.dcc_pairs:
            raise ConfigError(f"dcc pair {pair} not present in geometry")
        pos = FIRST_DCC_ROW + 2 * pair
        return pos, pos + 1


@dataclass(frozen=True, order=True)
class RowAddress:
    bank: int
    subarray: int
    row: int

    def validate(self, geom: DramGeometry) -> "RowAddress":
        if not 0 <= self.bank < geom.banks:
            raise ConfigError(f"bank {self.bank} out of range")
        if not 0 <= self.subarray < geom.subarrays_per_bank:
            raise ConfigError(f"subarray {self.subarray} out of range")
        if not 0 <= self.row < geom.rows_per_subarray:
            raise ConfigError(f"row {self.row} out of range")
        return self


# --- commands ---------------------------------------------------------------


@dataclass(frozen=True)
class Activate:
    row: int


@dataclass(frozen=True)
class ActivateTriple:
    row_a: int
    row_b: int
    row_c: int

    @property
    def rows(self) -> tuple[int, int, int]:
        return (self.row_a, self.row_b, self.row_c)


@dataclass(frozen=True)
class ActivateDcc:
    src_row: int
    pair: int


@dataclass(frozen=True)
class Precharge:
    pass


@dataclass(frozen=True)
class Read:
    """Controller-mediated column burst out of a row (internal bus)."""

    addr: RowAddress
    bit_lo: int
    bit_hi: int


@dataclass(frozen=True)
class Write:
    """Controller-mediated column burst into a row.  ``data`` of None
    means the payload comes from the device transfer latch (filled by
    the preceding Read)."""

    addr: RowAddress
    bit_lo: int
    bit_hi: int
    data: int | None = None


DramCommand = Activate | ActivateTriple | ActivateDcc | Precharge | Read | Write


def majority3(a: int, b: int, c: int) -> int:
    """Bitwise majority, the charge-sharing outcome of triple activation."""
    return (a & b) | (b & c) | (a & c)


@dataclass
class SubarrayState:
    """Rows plus the sense-amplifier latch of one subarray."""

    geometry: DramGeometry
    rows: list[int]
    senseamps: int = 0
    senseamp_valid: bool = False

    def row_value(self, row: int) -> int:
        return self.rows[row]

    def copy(self) -> "SubarrayState":
        return SubarrayState(self.geometry, list(self.rows), self.senseamps, self.senseamp_valid)

    # Every row write funnels through here so control-row protection and
    # dual-contact mirroring hold for all command paths.
    def _write_row(self, row: int, value: int, cmd: DramCommand) -> None:
        role = self.geometry.role_of(row)
        if role in (RowRole.CONTROL0, RowRole.CONTROL1):
            raise RoleError(f"{cmd!r} would overwrite control row {row}")
        value &= self.geometry.row_mask
        self.rows[row] = value
        if role == RowRole.DCC_POS:
            self.rows[row + 1] = value ^ self.geometry.row_mask
        elif role == RowRole.DCC_NEG:
            self.rows[row - 1] = value ^ self.geometry.row_mask


def init_subarray(geometry: DramGeometry, seed: int, bank: int = 0, subarray: int = 0) -> SubarrayState:
    """Build a subarray with deterministic contents.

    Data rows are filled from a splitmix64 stream seeded per
    (seed, bank, subarray, row); temp rows start at zero; control rows
    hold their fixed values; dual-contact pairs start complementary.
    """
    rows = [0] * geometry.rows_per_subarray
    rows[CONTROL1_ROW] = geometry.row_mask
    for pair in range(geometry.dcc_pairs):
        pos, neg = geometry.dcc_rows(pair)
        rows[neg] = geometry.row_mask  # complement of the zeroed pos contact
    words = geometry.row_width_bits // 64
    for row in range(geometry.first_data_row, geometry.rows_per_subarray):
        gen = SplitMix64(stream_seed(seed, bank, subarray, row))
        value = 0
        for w in range(words):
            value |= gen.next_u64() << (64 * w)
        rows[row] = value
    return SubarrayState(geometry=geometry, rows=rows)


def apply_command(state: SubarrayState, cmd: DramCommand) -> SubarrayState:
    """Advance a subarray by one command, in place; returns the state.

    Sequencing rules: Activate with a valid row buffer performs the
    copy step; triple and dual-contact activations need a closed row
    buffer; Precharge needs an open one.
    """
    geom = state.geometry
    if isinstance(cmd, Activate):
        if not 0 <= cmd.row < geom.rows_per_subarray:
            raise ProtocolError(f"{cmd!r}: row out of range")
        if state.senseamp_valid:
            # Back-to-back activation: amplifiers drive the destination row.
            state._write_row(cmd.row, state.senseamps, cmd)
        else:
            state.senseamps = state.rows[cmd.row]
            state.senseamp_valid = True
    elif isinstance(cmd, ActivateTriple):
        if state.senseamp_valid:
            raise ProtocolError(f"{cmd!r}: triple activation with open row buffer")
        rows = cmd.rows
        if len(set(rows)) != 3:
            raise RoleError(f"{cmd!r}: operands must be three distinct rows")
        roles = [geom.role_of(r) for r in rows]
        if RowRole.DATA in roles:
            bad = rows[roles.index(RowRole.DATA)]
            raise RoleError(f"{cmd!r}: row {bad} has data role; triple activation "
                            "is restricted to reserved rows")
        if RowRole.CONTROL0 in roles or RowRole.CONTROL1 in roles:
            raise RoleError(f"{cmd!r}: would overwrite a control row")
        for r in rows:
            partner = _dcc_partner(geom, r)
            if partner is not None and partner in rows:
                raise RoleError(f"{cmd!r}: both contacts of one dual-contact cell")
        m = majority3(state.rows[rows[0]], state.rows[rows[1]], state.rows[rows[2]])
        for r in rows:
            state._write_row(r, m, cmd)
        state.senseamps = m
        state.senseamp_valid = True
    elif isinstance(cmd, ActivateDcc):
        if state.senseamp_valid:
            raise ProtocolError(f"{cmd!r}: dual-contact activation with open row buffer")
        pos, _neg = geom.dcc_rows(cmd.pair)
        value = state.rows[cmd.src_row]
        state._write_row(pos, value, cmd)  # mirroring fills the negative contact
        state.senseamps = value
        state.senseamp_valid = True
    elif isinstance(cmd, Precharge):
        if not state.senseamp_valid:
            raise ProtocolError("Precharge with no open row buffer")
        state.senseamp_valid = False
    elif isinstance(cmd, Read):
        _check_burst_range(geom, cmd)
        # Data extraction happens at the device level (transfer latch);
        # the subarray itself is unchanged by a read burst.
    elif isinstance(cmd, Write):
        _check_burst_range(geom, cmd)
        if cmd.data is None:
            raise ProtocolError(f"{cmd!r}: write burst without data requires "
                                "device-level execution (transfer latch)")
        _apply_write(state, cmd, cmd.data)
    else:
        raise ProtocolError(f"unknown command {cmd!r}")
    return state


def _dcc_partner(geom: DramGeometry, row: int) -> int | None:
    role = geom.role_of(row)
    if role == RowRole.DCC_POS:
        return row + 1
    if role == RowRole.DCC_NEG:
        return row - 1
    return None


def _check_burst_range(geom: DramGeometry, cmd) -> None:
    if not 0 <= cmd.bit_lo < cmd.bit_hi <= geom.row_width_bits:
        raise ProtocolError(f"{cmd!r}: burst range out of row bounds")


def _apply_write(state: SubarrayState, cmd: Write, data: int) -> None:
    width = cmd.bit_hi - cmd.bit_lo
    span_mask = ((1 << width) - 1) << cmd.bit_lo
    old = state.rows[cmd.addr.row]
    new = (old & ~span_mask) | ((data << cmd.bit_lo) & span_mask)
    state._write_row(cmd.addr.row, new, cmd)


class Device:
    """All subarrays of a chip, addressable by (bank, subarray).

    Distinct subarrays are independent state machines; the device also
    owns the transfer latch used by cross-subarray burst copies.
    """

    def __init__(self, geometry: DramGeometry, seed: int = 0):
        self.geometry = geometry
        self.seed = seed
        self.subarrays: dict[tuple[int, int], SubarrayState] = {}
        for bank in range(geometry.banks):
            for sub in range(geometry.subarrays_per_bank):
                self.subarrays[(bank, sub)] = init_subarray(geometry, seed, bank, sub)
        self._latch: int | None = None

    def subarray(self, bank: int, subarray: int) -> SubarrayState:
        return self.subarrays[(bank, subarray)]

    def row(self, addr: RowAddress) -> int:
        return self.subarrays[(addr.bank, addr.subarray)].rows[addr.row]

    def set_row(self, addr: RowAddress, value: int) -> None:
        """Host-side row load (not a DRAM command; used to stage workloads)."""
        addr.validate(self.geometry)
        state = self.subarrays[(addr.bank, addr.subarray)]
        state._write_row(addr.row, value, Write(addr, 0, self.geometry.row_width_bits, value))

    def apply(self, location: tuple[int, int], cmd: DramCommand) -> None:
        """Apply one command; Read/Write bursts go through the latch."""
        if isinstance(cmd, Read):
            state = self.subarrays[(cmd.addr.bank, cmd.addr.subarray)]
            apply_command(state, cmd)
            width = cmd.bit_hi - cmd.bit_lo
            self._latch = (state.rows[cmd.addr.row] >> cmd.bit_lo) & ((1 << width) - 1)
        elif isinstance(cmd, Write):
            state = self.subarrays[(cmd.addr.bank, cmd.addr.subarray)]
            data = cmd.data
            if data is None:
                if self._latch is None:
                    raise ProtocolError(f"{cmd!r}: transfer latch is empty")
                data = self._latch
                self._latch = None
            _check_burst_range(self.geometry, cmd)
            _apply_write(state, cmd, data)
        else:
            apply_command(self.subarrays[location], cmd)


def dump_subarray(state: SubarrayState, bank: int = 0, subarray: int = 0) -> list[str]:
    """Dump rows as ``bank/subarray/row:<hex>`` lines, most significant
    hex digit first, zero padded to the row width."""
    digits = state.geometry.row_width_bits // 4
    return [
        f"{bank}/{subarray}/{row}:{state.rows[row]:0{digits}x}"
        for row in range(state.geometry.rows_per_subarray)
    ]


def dump_device(device: Device) -> list[str]:
    lines: list[str] = []
    for (bank, sub) in sorted(device.subarrays):
        lines.extend(dump_subarray(device.subarrays[(bank, sub)], bank, sub))
    return lines
