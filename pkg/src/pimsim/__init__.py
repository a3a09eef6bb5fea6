"""pimsim: a deterministic command-level simulator of
processing-in-memory architectures.

Two engines share a timing/energy cost model: an in-DRAM bulk bitwise
compute engine (triple-row activation for AND/OR, dual-contact-cell
rows for NOT, activate-activate-precharge row copies) and a 3D-stacked
vault engine whose per-vault cores exchange remote function calls to
run graph workloads.  A benchmark CLI runs workloads against
processor-centric baselines and emits comparison reports.
"""

from .ambit import (
    BitwiseOp,
    BulkAllocator,
    BulkVector,
    CommandTrace,
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
from .cost import (
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
from .dram import (
    Device,
    DramGeometry,
    RowAddress,
    RowRole,
    SubarrayState,
    apply_command,
    dump_device,
    dump_subarray,
    init_subarray,
    majority3,
)
from .errors import (
    CompileError,
    ConfigError,
    GraphInputError,
    HandlerFaultError,
    OracleMismatchError,
    PimError,
    PlacementError,
    ProtocolError,
    QueueFullError,
    RoleError,
)
from .tesseract import (
    GraphPartition,
    MovementLedger,
    VaultConfig,
    VaultMessage,
    VaultSystem,
    partition_graph,
    sequential_bfs,
    sequential_pagerank,
)

__version__ = "0.1.0"
