"""Spectral tools for matrix Sturm-Liouville operators with distributional
potentials: model problem constants, forward eigenvalue/weight extraction,
inverse reconstruction from spectral data, and data characterization checks.
"""

from .core import (
    ProblemSpec,
    RunConfig,
    SigmaFunction,
    SpectralDataSet,
    SpectralEntry,
    ValidatedProblem,
    apply_gauge,
    auto_shift,
    build_index_set,
    kernel_intersection_dim,
    shift_spectrum,
    validate_problem,
)
from .errors import (
    AtEigenvalue,
    ContourThroughEigenvalue,
    GridMismatch,
    H2StructureViolation,
    IllConditioned,
    IndexSetMismatch,
    IntegratorFailure,
    InvalidGauge,
    NegativeShiftedEigenvalue,
    NoConvergence,
    NonHermitian,
    NonProjector,
    NoValidN0,
    RootCountMismatch,
    SingularContour,
    SLQError,
    SlotMismatch,
    ValidationError,
)
from .model import (
    ModelConstants,
    build_model_constants,
    compute_Ak,
    compute_rk,
    model_D,
    model_phi,
    model_phi_q,
    model_spectral_data,
    model_weyl,
    u0_matrix,
    w0_matrix,
)
from .forward import (
    EigenRecord,
    FundamentalPair,
    characteristic_matrix,
    extract_spectral_data,
    find_eigenvalues,
    integrate_fundamental,
    pairing_defect,
    weight_matrix,
    weyl_matrix,
)
from .inverse import (
    EigenGrouping,
    MainSystem,
    Member,
    ReconstructionResult,
    assemble_main_system,
    group_eigenvalues,
    hybrid_data,
    modified_weyl,
    run_algorithm1,
    solve_main_equation,
)
from .checks import (
    AsymptoticsReport,
    CompletenessProxy,
    ConditionIReport,
    GaugeComparison,
    check_asymptotics,
    check_condition_i,
    compare_modulo_gauge,
    completeness_proxy,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
