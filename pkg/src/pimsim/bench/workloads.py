"""Workload generators and lowerings: category bitmaps, the boolean
query mini-language, the bit-serial less-than scan, synthetic graphs,
and random operand vectors.  Everything is derived from the run seed
through the shared splitmix64 streams, so workloads are reproducible
byte for byte.
"""

from dataclasses import dataclass

from ..ambit import BitwiseOp
from ..errors import ConfigError
from ..rng import SplitMix64, stream_seed

# Stream tags keep the per-purpose streams of one run seed disjoint.
_TAG_VECTOR = 0x565243
_TAG_BITMAP = 0x424D50
_TAG_RECORDS = 0x524543
_TAG_GRAPH = 0x475246


def random_vector(length_bits: int, seed: int, tag: int = 0) -> int:
    gen = SplitMix64(stream_seed(seed, _TAG_VECTOR, tag))
    return gen.next_bits(length_bits)


def gen_bitmap_workload(n_records: int, n_categories: int, seed: int) -> list[int]:
    """One-hot category bitmaps: each record draws exactly one category,
    so the bitmaps partition the record set."""
    if n_records <= 0:
        raise ConfigError("n_records must be > 0")
    if n_categories <= 0:
        raise ConfigError("n_categories must be > 0")
    gen = SplitMix64(stream_seed(seed, _TAG_BITMAP))
    buffers = [bytearray((n_records + 7) // 8) for _ in range(n_categories)]
    for record in range(n_records):
        buffers[gen.next_below(n_categories)][record >> 3] |= 1 << (record & 7)
    return [int.from_bytes(buf, "little") for buf in buffers]


def gen_records(n_records: int, bit_width: int, seed: int) -> list[int]:
    gen = SplitMix64(stream_seed(seed, _TAG_RECORDS))
    return [gen.next_bits(bit_width) for _ in range(n_records)]


def pack_bit_planes(values: list[int], bit_width: int) -> list[int]:
    """Plane i holds bit i of every record (plane-major layout)."""
    n_bytes = (len(values) + 7) // 8
    buffers = [bytearray(n_bytes) for _ in range(bit_width)]
    for record, value in enumerate(values):
        byte, bit = record >> 3, 1 << (record & 7)
        for i in range(bit_width):
            if (value >> i) & 1:
                buffers[i][byte] |= bit
    return [int.from_bytes(buf, "little") for buf in buffers]


def synth_graph(n_vertices: int, n_edges: int, seed: int) -> list[tuple[int, int]]:
    """Uniform random directed edges (self-loops and duplicates allowed)."""
    if n_vertices <= 0:
        raise ConfigError("synth_vertices must be > 0")
    gen = SplitMix64(stream_seed(seed, _TAG_GRAPH))
    return [(gen.next_below(n_vertices), gen.next_below(n_vertices))
            for _ in range(n_edges)]


# --- boolean query expressions ----------------------------------------------
#
# Grammar (case-insensitive keywords):
#   expr   := term (OR term)*
#   term   := factor (AND factor)*
#   factor := NOT factor | '(' expr ')' | c<digits>


@dataclass(frozen=True)
class QueryNode:
    op: str  # "and" | "or" | "not" | "cat"
    left: "QueryNode | None" = None
    right: "QueryNode | None" = None
    category: int | None = None


def _tokenize(expr: str) -> list[str]:
    tokens = []
    i = 0
    while i < len(expr):
        ch = expr[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append(ch)
            i += 1
        else:
            j = i
            while j < len(expr) and not expr[j].isspace() and expr[j] not in "()":
                j += 1
            tokens.append(expr[i:j])
            i = j
    return tokens


class _QueryParser:
    def __init__(self, expr: str, n_categories: int):
        self.tokens = _tokenize(expr)
        self.pos = 0
        self.n_categories = n_categories
        self.expr = expr

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ConfigError(f"query {self.expr!r}: unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self) -> QueryNode:
        node = self.parse_or()
        if self.peek() is not None:
            raise ConfigError(f"query {self.expr!r}: trailing token {self.peek()!r}")
        return node

    def parse_or(self) -> QueryNode:
        node = self.parse_and()
        while self.peek() is not None and self.peek().upper() == "OR":
            self.take()
            node = QueryNode("or", node, self.parse_and())
        return node

    def parse_and(self) -> QueryNode:
        node = self.parse_factor()
        while self.peek() is not None and self.peek().upper() == "AND":
            self.take()
            node = QueryNode("and", node, self.parse_factor())
        return node

    def parse_factor(self) -> QueryNode:
        tok = self.take()
        if tok.upper() == "NOT":
            return QueryNode("not", self.parse_factor())
        if tok == "(":
            node = self.parse_or()
            closing = self.take()
            if closing != ")":
                raise ConfigError(f"query {self.expr!r}: expected ')', got {closing!r}")
            return node
        if tok.lower().startswith("c") and tok[1:].isdigit():
            cat = int(tok[1:])
            if cat >= self.n_categories:
                raise ConfigError(
                    f"query {self.expr!r}: category c{cat} out of range "
                    f"(n_categories={self.n_categories})")
            return QueryNode("cat", category=cat)
        raise ConfigError(f"query {self.expr!r}: unexpected token {tok!r}")


def parse_query(expr: str, n_categories: int) -> QueryNode:
    return _QueryParser(expr, n_categories).parse()


def eval_query(node: QueryNode, bitmaps: list[int], width_bits: int) -> int:
    """Scalar evaluation of a query tree over integer bitmaps."""
    mask = (1 << width_bits) - 1
    if node.op == "cat":
        return bitmaps[node.category] & mask
    if node.op == "not":
        return eval_query(node.left, bitmaps, width_bits) ^ mask
    left = eval_query(node.left, bitmaps, width_bits)
    right = eval_query(node.right, bitmaps, width_bits)
    return (left & right) if node.op == "and" else (left | right)


def query_gates(node: QueryNode) -> list[QueryNode]:
    """Gate nodes in evaluation (post) order."""
    if node.op == "cat":
        return []
    gates = query_gates(node.left)
    if node.right is not None:
        gates += query_gates(node.right)
    return gates + [node]


# --- bit-serial less-than scan -----------------------------------------------


@dataclass(frozen=True)
class ScanStep:
    """One bulk bitwise op over named registers: dst = op(src_a, src_b).
    Registers are `plane<i>`, `lt`, `eq`, and the scratch `tmp`."""

    op: BitwiseOp
    src_a: str
    src_b: str | None
    dst: str


def bitserial_scan_compile(constant: int, bit_width: int) -> list[ScanStep]:
    """Lower `value < constant` to bulk ops over bit planes.

    Planes run MSB to LSB carrying running `lt`/`eq` masks:
    where the constant bit is 1, records still equal so far with a 0
    bit become less-than (lt |= eq AND NOT plane; eq &= plane); where
    it is 0, records with a 1 bit drop out of equality (eq &= NOT
    plane).  The final mask is `lt`.
    """
    if bit_width <= 0:
        raise ConfigError("bit_width must be > 0")
    if constant >= (1 << bit_width):
        raise ConfigError(f"constant {constant} needs more than {bit_width} bits")
    steps: list[ScanStep] = []
    for i in range(bit_width - 1, -1, -1):
        plane = f"plane{i}"
        if (constant >> i) & 1:
            steps.append(ScanStep(BitwiseOp.NOT, plane, None, "tmp"))
            steps.append(ScanStep(BitwiseOp.AND, "eq", "tmp", "tmp"))
            steps.append(ScanStep(BitwiseOp.OR, "lt", "tmp", "lt"))
            steps.append(ScanStep(BitwiseOp.AND, "eq", plane, "eq"))
        else:
            steps.append(ScanStep(BitwiseOp.NOT, plane, None, "tmp"))
            steps.append(ScanStep(BitwiseOp.AND, "eq", "tmp", "eq"))
    return steps


def scan_oracle(values: list[int], constant: int) -> int:
    """Direct comparison: bit r set iff values[r] < constant."""
    buf = bytearray((len(values) + 7) // 8)
    for r, value in enumerate(values):
        if value < constant:
            buf[r >> 3] |= 1 << (r & 7)
    return int.from_bytes(buf, "little")
