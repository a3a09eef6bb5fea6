"""Vault-based near-memory graph engine with message-passing cores.

One simple core per vault owns a contiguous vertex range and touches
only its own partition's state.  Work on remote vertices is requested
by sending the function to the data: a remote call names a handler and
carries a small argument payload.  Blocking calls execute in the owner
before returning; non-blocking calls queue and drain at barriers in a
fixed order (ascending target vault, FIFO within a vault), so a run is
deterministic for a given schedule.  A movement ledger counts every
message against the bytes a processor-centric run would have moved.

There is no core timing model here: evaluation is functional plus data
movement accounting.
"""

import struct
from collections import deque
from dataclasses import dataclass, field
from math import ceil, inf

from .cost import BaselineModel, CostParams
from .errors import (
    ConfigError,
    GraphInputError,
    HandlerFaultError,
    ProtocolError,
    QueueFullError,
)

UNREACHED = -1

# Baseline accounting: a processor-centric run fetches one adjacency
# entry and one vertex-state record over the channel per edge traversal.
ADJACENCY_ENTRY_BYTES = 8
VERTEX_STATE_BYTES = 8


@dataclass(frozen=True)
class VaultConfig:
    n_vaults: int = 16
    queue_capacity: int = 1 << 20
    payload_limit_bytes: int = 64
    header_bytes: int = 16
    # Only contiguous ranges are implemented; the field exists so a hash
    # partitioner can slot in without a config format change.
    partitioning: str = "contiguous"

    def __post_init__(self):
        if self.n_vaults < 1:
            raise ConfigError("vaults.n_vaults must be >= 1")
        if self.queue_capacity < 1:
            raise ConfigError("vaults.queue_capacity must be >= 1")
        if self.payload_limit_bytes < 8:
            raise ConfigError("vaults.payload_limit_bytes must be >= 8")
        if self.header_bytes < 0:
            raise ConfigError("vaults.header_bytes must be >= 0")
        if self.partitioning != "contiguous":
            raise ConfigError(
                f"vaults.partitioning {self.partitioning!r} not implemented "
                "(only 'contiguous')")


@dataclass
class GraphPartition:
    """Vertex range [lo, hi) owned by one vault, its out-edge lists, and
    per-vertex state.  Lists are indexed by local offset (vertex - lo)."""

    vault_id: int
    lo: int
    hi: int
    adjacency: list[list[int]]
    vertex_state: list[float]

    def owns(self, vertex: int) -> bool:
        return self.lo <= vertex < self.hi

    def local(self, vertex: int) -> int:
        return vertex - self.lo


@dataclass(frozen=True)
class VaultMessage:
    target_vault: int
    handler: str
    args: bytes
    blocking: bool = False


@dataclass
class MovementLedger:
    """Message counts and bytes per (src, dst) vault pair, against the
    bytes a processor-centric run would move for the same workload."""

    header_bytes: int
    messages_sent: dict[tuple[int, int], int] = field(default_factory=dict)
    bytes_sent: dict[tuple[int, int], int] = field(default_factory=dict)
    baseline_bytes: int = 0

    def record(self, src: int, dst: int, payload_len: int) -> None:
        pair = (src, dst)
        self.messages_sent[pair] = self.messages_sent.get(pair, 0) + 1
        self.bytes_sent[pair] = self.bytes_sent.get(pair, 0) + self.header_bytes + payload_len

    @property
    def message_bytes(self) -> int:
        return sum(self.bytes_sent.values())

    @property
    def cross_vault_messages(self) -> int:
        return sum(n for (s, d), n in self.messages_sent.items() if s != d)

    @property
    def cross_vault_bytes(self) -> int:
        return sum(n for (s, d), n in self.bytes_sent.items() if s != d)


def partition_size(V: int, n_vaults: int) -> int:
    return ceil(V / n_vaults) if V else 0


def vertex_owner(vertex: int, V: int, n_vaults: int) -> int:
    size = partition_size(V, n_vaults)
    return vertex // size if size else 0


def partition_graph(edges: list[tuple[int, int]], V: int,
                    cfg: VaultConfig) -> list[GraphPartition]:
    """Split [0, V) into contiguous equal ranges (the tail vault takes
    the remainder) and store each edge with its source's owner."""
    size = partition_size(V, cfg.n_vaults)
    parts = []
    for vid in range(cfg.n_vaults):
        lo = min(vid * size, V)
        hi = min(lo + size, V)
        parts.append(GraphPartition(
            vault_id=vid, lo=lo, hi=hi,
            adjacency=[[] for _ in range(hi - lo)],
            vertex_state=[0.0] * (hi - lo),
        ))
    for edge in edges:
        u, w = edge
        if not (0 <= u < V and 0 <= w < V):
            raise GraphInputError(f"edge {edge} references a vertex outside [0, {V})")
        part = parts[vertex_owner(u, V, cfg.n_vaults)]
        part.adjacency[part.local(u)].append(w)
    return parts


class VaultSystem:
    """The vault array: partitions, message queues, handlers, ledger."""

    def __init__(self, partitions: list[GraphPartition], cfg: VaultConfig):
        if len(partitions) != cfg.n_vaults:
            raise ConfigError("partition count must match n_vaults")
        self.cfg = cfg
        self.partitions = partitions
        self.V = max((p.hi for p in partitions), default=0)
        self.queues: list[deque[VaultMessage]] = [deque() for _ in range(cfg.n_vaults)]
        self.ledger = MovementLedger(header_bytes=cfg.header_bytes)
        self.faults: list[list[str]] = [[] for _ in range(cfg.n_vaults)]
        self._handlers: dict[str, tuple[object, bool]] = {}
        self._blocking_depth = 0
        self.iteration_rank_sums: list[float] = []
        self._pending: list[dict[int, list[tuple[int, float]]]] = [
            {} for _ in range(cfg.n_vaults)
        ]
        self._next_frontier: list[list[int]] = [[] for _ in range(cfg.n_vaults)]
        self._register_workload_handlers()

    # -- vertex state access (through the owning partition only) --------

    def owner(self, vertex: int) -> int:
        return vertex_owner(vertex, self.V, self.cfg.n_vaults)

    def get_state(self, vertex: int) -> float:
        part = self.partitions[self.owner(vertex)]
        return part.vertex_state[part.local(vertex)]

    def _set_state(self, vault_id: int, vertex: int, value: float) -> None:
        part = self.partitions[vault_id]
        if not part.owns(vertex):
            raise ProtocolError(
                f"vault {vault_id} wrote vertex {vertex} outside [{part.lo}, {part.hi})")
        part.vertex_state[part.local(vertex)] = value

    def states(self) -> list[float]:
        out: list[float] = []
        for p in self.partitions:
            out.extend(p.vertex_state)
        return out

    # -- messaging -------------------------------------------------------

    def register_handler(self, name: str, fn, issues_blocking: bool = False) -> None:
        """Handlers run as fn(system, vault_id, args) -> bytes | None.
        Handlers that themselves issue blocking calls must say so; they
        are then barred from being invoked via a blocking call."""
        self._handlers[name] = (fn, issues_blocking)

    def remote_call(self, src_vault: int, msg: VaultMessage):
        """Send one message.  Blocking calls execute in the owner before
        returning and hand back the handler's reply; non-blocking calls
        queue until the next barrier and return None."""
        if not 0 <= msg.target_vault < self.cfg.n_vaults:
            raise ConfigError(f"target vault {msg.target_vault} out of range")
        if len(msg.args) > self.cfg.payload_limit_bytes:
            raise ConfigError(
                f"payload of {len(msg.args)} bytes exceeds limit "
                f"{self.cfg.payload_limit_bytes}")
        entry = self._handlers.get(msg.handler)
        if msg.blocking:
            if entry is None:
                raise HandlerFaultError(msg.target_vault, msg.handler, -1, "unknown handler")
            fn, issues_blocking = entry
            if issues_blocking:
                raise ProtocolError(
                    f"handler {msg.handler!r} issues blocking calls and may "
                    "not be invoked via a blocking call")
            if self._blocking_depth > 0:
                raise ProtocolError("nested blocking call from inside a blocking handler")
            self.ledger.record(src_vault, msg.target_vault, len(msg.args))
            self._blocking_depth += 1
            try:
                return fn(self, msg.target_vault, msg.args)
            finally:
                self._blocking_depth -= 1
        if entry is None:
            self.faults[msg.target_vault].append(f"unknown handler {msg.handler!r}")
            return None
        if len(self.queues[msg.target_vault]) >= self.cfg.queue_capacity:
            raise QueueFullError(
                f"vault {msg.target_vault} queue is at capacity "
                f"{self.cfg.queue_capacity}; drain via barrier")
        self.ledger.record(src_vault, msg.target_vault, len(msg.args))
        self.queues[msg.target_vault].append(msg)
        return None

    def barrier(self) -> None:
        """Drain every queued non-blocking message to completion:
        ascending target vault, FIFO within a vault, repeated until all
        queues are empty.  A handler fault aborts the run."""
        index = 0
        while any(self.queues):
            for vault in range(self.cfg.n_vaults):
                q = self.queues[vault]
                while q:
                    msg = q.popleft()
                    fn, _ = self._handlers[msg.handler]
                    try:
                        fn(self, vault, msg.args)
                    except HandlerFaultError:
                        raise
                    except Exception as exc:
                        raise HandlerFaultError(vault, msg.handler, index, str(exc)) from exc
                    index += 1

    def _schedule(self, schedule: str) -> list[int]:
        if schedule == "forward":
            return list(range(self.cfg.n_vaults))
        if schedule == "reverse":
            return list(range(self.cfg.n_vaults - 1, -1, -1))
        raise ConfigError(f"unknown schedule {schedule!r}")

    # -- workload handlers ------------------------------------------------

    def _register_workload_handlers(self) -> None:
        self.register_handler("rank.contrib", _handle_rank_contrib)
        self.register_handler("rank.get", _handle_rank_get)
        self.register_handler("bfs.visit", _handle_bfs_visit)

    # -- workloads ---------------------------------------------------------

    def run_pagerank(self, iterations: int, damping: float,
                     schedule: str = "forward") -> list[float]:
        """Push-style PageRank: per iteration every vault sends
        rank/out_degree contributions to the neighbors' owners, a
        barrier drains them, and ranks update with damping.  Rank of
        dangling vertices is redistributed uniformly (host-side scalar
        reduction, not a vault message)."""
        if not 0 < damping < 1:
            raise ConfigError("damping must be in (0, 1)")
        if iterations < 1:
            raise ConfigError("iterations must be >= 1")
        V = self.V
        if V == 0:
            return []
        order = self._schedule(schedule)
        for part in self.partitions:
            part.vertex_state = [1.0 / V] * (part.hi - part.lo)
        self.iteration_rank_sums = []
        self._pending = [{} for _ in range(self.cfg.n_vaults)]
        for _ in range(iterations):
            # Host-side scalar reduction in canonical vertex order, so the
            # float sum does not depend on the vault schedule.
            dangling = sum(
                part.vertex_state[off]
                for part in self.partitions
                for off in range(part.hi - part.lo)
                if not part.adjacency[off]
            )
            for vid in order:
                part = self.partitions[vid]
                for off in range(part.hi - part.lo):
                    u = part.lo + off
                    neighbors = part.adjacency[off]
                    if not neighbors:
                        continue
                    share = part.vertex_state[off] / len(neighbors)
                    for w in neighbors:
                        self.remote_call(vid, VaultMessage(
                            target_vault=self.owner(w),
                            handler="rank.contrib",
                            args=struct.pack("<QQd", w, u, share),
                        ))
            self.barrier()
            dangling_share = dangling / V
            base = (1.0 - damping) / V
            for vid in range(self.cfg.n_vaults):
                part = self.partitions[vid]
                pending = self._pending[vid]
                for off in range(part.hi - part.lo):
                    contribs = pending.get(part.lo + off, ())
                    # Summation in ascending source order keeps the
                    # result bit-identical across vault interleavings.
                    total = sum(c for _, c in sorted(contribs))
                    part.vertex_state[off] = base + damping * (total + dangling_share)
                pending.clear()
            self.iteration_rank_sums.append(sum(sum(p.vertex_state) for p in self.partitions))
        return self.states()

    def run_bfs(self, source: int, schedule: str = "forward") -> list[int]:
        """Level-synchronous BFS with one visit message per traversed
        edge and a barrier per level.  Unreached vertices keep the
        UNREACHED sentinel."""
        if not 0 <= source < self.V:
            raise GraphInputError(f"source {source} outside [0, {self.V})")
        order = self._schedule(schedule)
        for part in self.partitions:
            part.vertex_state = [float(UNREACHED)] * (part.hi - part.lo)
        self._next_frontier = [[] for _ in range(self.cfg.n_vaults)]
        self._set_state(self.owner(source), source, 0.0)
        frontier: list[list[int]] = [[] for _ in range(self.cfg.n_vaults)]
        frontier[self.owner(source)].append(source)
        level = 0
        while any(frontier):
            for vid in order:
                part = self.partitions[vid]
                for u in frontier[vid]:
                    for w in part.adjacency[part.local(u)]:
                        self.remote_call(vid, VaultMessage(
                            target_vault=self.owner(w),
                            handler="bfs.visit",
                            args=struct.pack("<Qq", w, level + 1),
                        ))
            self.barrier()
            frontier = self._next_frontier
            self._next_frontier = [[] for _ in range(self.cfg.n_vaults)]
            level += 1
        return [int(x) for x in self.states()]


def _handle_rank_contrib(system: VaultSystem, vault_id: int, args: bytes):
    w, u, share = struct.unpack("<QQd", args)
    part = system.partitions[vault_id]
    if not part.owns(w):
        raise ValueError(f"vertex {w} not owned by vault {vault_id}")
    system._pending[vault_id].setdefault(w, []).append((u, share))


def _handle_rank_get(system: VaultSystem, vault_id: int, args: bytes) -> bytes:
    (v,) = struct.unpack("<Q", args)
    part = system.partitions[vault_id]
    if not part.owns(v):
        raise ValueError(f"vertex {v} not owned by vault {vault_id}")
    return struct.pack("<d", part.vertex_state[part.local(v)])


def _handle_bfs_visit(system: VaultSystem, vault_id: int, args: bytes):
    w, dist = struct.unpack("<Qq", args)
    part = system.partitions[vault_id]
    if not part.owns(w):
        raise ValueError(f"vertex {w} not owned by vault {vault_id}")
    off = part.local(w)
    if part.vertex_state[off] == UNREACHED:
        part.vertex_state[off] = float(dist)
        system._next_frontier[vault_id].append(w)


# --- sequential oracles ------------------------------------------------------


def sequential_pagerank(V: int, edges: list[tuple[int, int]], iterations: int,
                        damping: float) -> list[float]:
    """Reference PageRank over the whole graph in one address space."""
    adjacency: list[list[int]] = [[] for _ in range(V)]
    for u, w in edges:
        adjacency[u].append(w)
    ranks = [1.0 / V] * V if V else []
    for _ in range(iterations):
        contrib = [0.0] * V
        dangling = 0.0
        for u in range(V):
            if adjacency[u]:
                share = ranks[u] / len(adjacency[u])
                for w in adjacency[u]:
                    contrib[w] += share
            else:
                dangling += ranks[u]
        base = (1.0 - damping) / V
        ranks = [base + damping * (contrib[v] + dangling / V) for v in range(V)]
    return ranks


def sequential_bfs(V: int, edges: list[tuple[int, int]], source: int) -> list[int]:
    adjacency: list[list[int]] = [[] for _ in range(V)]
    for u, w in edges:
        adjacency[u].append(w)
    dist = [UNREACHED] * V
    dist[source] = 0
    frontier = deque([source])
    while frontier:
        u = frontier.popleft()
        for w in adjacency[u]:
            if dist[w] == UNREACHED:
                dist[w] = dist[u] + 1
                frontier.append(w)
    return dist


def directed_edge_cut(edges: list[tuple[int, int]], V: int, n_vaults: int) -> int:
    """Edges whose endpoints live in different partitions (counting
    multiplicity): the per-iteration cross-vault message count."""
    return sum(1 for u, w in edges
               if vertex_owner(u, V, n_vaults) != vertex_owner(w, V, n_vaults))


def baseline_traversal_bytes(n_traversals: int) -> int:
    """Channel bytes a processor-centric run moves for n edge
    traversals: one adjacency entry plus one vertex-state record each."""
    return n_traversals * (ADJACENCY_ENTRY_BYTES + VERTEX_STATE_BYTES)


def pagerank_baseline_bytes(n_edges: int, iterations: int) -> int:
    return baseline_traversal_bytes(n_edges * iterations)


def bfs_baseline_bytes(edges: list[tuple[int, int]], distances: list[int]) -> int:
    reached = sum(1 for u, _ in edges if distances[u] != UNREACHED)
    return baseline_traversal_bytes(reached)


def movement_summary(ledger: MovementLedger, cost: CostParams,
                     baseline: BaselineModel) -> dict:
    """Movement-derived latency/energy proxies for a graph run.

    There is no vault timing model; the baseline side prices its bytes
    at channel bandwidth/energy and the PIM side prices cross-vault
    bytes at the stack-internal bandwidth and per-byte energy.  A run
    with zero cross-vault movement reports infinite ratios.
    """
    base_bytes = ledger.baseline_bytes
    pim_bytes = ledger.cross_vault_bytes
    base_latency = base_bytes / cost.bytes_per_ns
    base_energy = base_bytes * cost.channel_energy_pJ_per_byte / 1000.0
    internal_bw = cost.bytes_per_ns * baseline.internal_bw_multiplier
    pim_latency = pim_bytes / internal_bw
    pim_energy = pim_bytes * baseline.internal_energy_pJ_per_byte / 1000.0
    return {
        "ambit_latency_ns": pim_latency,
        "ambit_energy_nJ": pim_energy,
        "baseline_latency_ns": base_latency,
        "baseline_energy_nJ": base_energy,
        "throughput_ratio": base_latency / pim_latency if pim_latency > 0 else inf,
        "energy_ratio": base_energy / pim_energy if pim_energy > 0 else inf,
        "bytes_moved_baseline": base_bytes,
        "bytes_moved_pim": pim_bytes,
    }


# --- graph and value file I/O ------------------------------------------------


def parse_edge_list(text: str) -> tuple[list[tuple[int, int]], int]:
    """Whitespace-separated `src dst` pairs, one per line; `#` starts a
    comment.  Returns (edges, V) with V = max vertex + 1."""
    edges: list[tuple[int, int]] = []
    max_vertex = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise GraphInputError(f"line {lineno}: expected `src dst`, got {raw!r}")
        try:
            u, w = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphInputError(f"line {lineno}: non-integer vertex in {raw!r}") from None
        if u < 0 or w < 0:
            raise GraphInputError(f"line {lineno}: negative vertex in {raw!r}")
        edges.append((u, w))
        max_vertex = max(max_vertex, u, w)
    return edges, max_vertex + 1


def format_edge_list(edges: list[tuple[int, int]]) -> str:
    return "".join(f"{u} {w}\n" for u, w in edges)


def format_vertex_values(values) -> str:
    """One `vertex value` pair per line."""
    return "".join(f"{v} {x}\n" for v, x in enumerate(values))
