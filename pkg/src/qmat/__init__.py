"""Quantum-matrix simulation: load classical arrays into amplitudes, do
arithmetic on them with X/H/RY circuits, and read values back out with
Grover-amplified sampling."""

from .arith import (
    Selector,
    cyclic_shift,
    multiply_arrays,
    pairwise_sum_diff,
    reduce_cols,
    reduce_rows,
    reverse,
    scalar_product,
    scale_by_constant,
    square_array,
    swap_elements,
    swap_with_pivot,
)
from .errors import (
    AddressError,
    CapacityError,
    DimensionError,
    InconsistencyError,
    QMatError,
    RangeError,
)
from .ledger import NormLedger
from .matrix import (
    ClassicalMatrix,
    MaskPlan,
    RegisterLayout,
    init_uniform,
    layout_for,
    load_constant_row,
    load_pointwise,
    mask,
    read_matrix,
)
from .oracle import (
    Oracle,
    ShiftResult,
    ShiftSpec,
    constant_shift,
    linear_shift,
    oracle_from_array,
    step_shift,
)
from .qcoin import (
    ConfidenceInterval,
    EstimationTrace,
    GroverStage,
    Preparation,
    QCoinConfig,
    amplification_factor,
    amplitude_preparation,
    choose_k,
    grover_operator,
    matrix_entry_preparation,
    qcoin_estimate,
    shifted_prepare,
    unamplified_estimate,
)
from .sim import (
    Circuit,
    GateOp,
    GateStats,
    StateVector,
    apply,
    inner_product,
    new_state,
    probability_of,
    sample,
    walsh_hadamard,
)

__version__ = "0.1.0"
