"""Simulation and tomography toolkit for a superradiant phase transition
of the quantum Rabi model realized on a driven superconducting circuit.

Modules
-------
hilbert
    Truncated-space operators, states, and partial operations.
model
    Device parameters, the effective-model mapping, ground-state
    analytics on both sides of the transition, and Stark corrections.
quench
    Time-dependent closed and Lindblad integration of coupling ramps.
tomography
    Wigner-matrix tomography: exact forward maps and the emulated
    measurement chain (ancilla Rabi signals, photon-distribution fits,
    density-matrix reconstruction).
metrics
    Scalar characterizations: negativity, purity, coherences, phase
    separation, and super-cat geometry.
cli
    Command-line pipelines over all of the above.
"""

from .hilbert import (
    ConvergenceError,
    HilbertSpec,
    QuantumState,
    TruncationError,
    UnsupportedError,
    annihilation,
    bessel_j,
    coherent_state,
    displacement,
    fidelity,
    fock_state,
    partial_trace_qubit,
    partial_trace_resonator,
    partial_transpose_qubit,
    qubit_block,
    squeezing,
)
from .model import (
    CriticalPointError,
    DeviceParams,
    DispersiveViolation,
    EffectiveParams,
    SWAnalytics,
    StarkCorrections,
    ancilla_stark_schedule,
    drive_frame_rotation,
    effective_from_device,
    np_ground_state,
    np_sp_analytics,
    parity_operator,
    rabi_hamiltonian,
    rotating_frame_hamiltonian,
    sp_cat_state,
    sp_ground_state,
    stark_corrections,
    table_s2,
)
from .quench import (
    TOMOGRAPHY_TIME,
    LindbladSpec,
    QuenchSchedule,
    StepSizeUnderflow,
    TrajectoryRecord,
    evolve_lindblad,
    evolve_state,
    run_quench,
    trajectory_to_csv,
)
from .tomography import (
    DistributionError,
    FitDivergence,
    GridMismatch,
    IllConditioned,
    NotConverged,
    PhotonFit,
    RabiSignal,
    ReconstructionResult,
    WignerRecord,
    combine_rotated,
    displaced_parity,
    fit_photon_distribution,
    reconstruct_density,
    rotated_basis_settings,
    simulate_rabi_signal,
    simulate_tomography,
    wigner_from_csv,
    wigner_matrix_forward,
    wigner_to_csv,
)
from .metrics import (
    CatAnalysis,
    EmptyBlock,
    NotSeparable,
    cat_analysis,
    cat_size_formula,
    fit_lobe_amplitude,
    husimi,
    metrics_report,
    negativity,
    np_sp_coherence,
    order_parameter,
    purity,
    separate_phases,
    sp_projected_state,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
