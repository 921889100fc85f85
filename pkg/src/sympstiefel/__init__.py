"""Riemannian gradient descent on the symplectic Stiefel manifold Sp(2p, 2n)."""

from .manifold import (
    FEASIBILITY_TOL,
    GradientFactors,
    MetricSpec,
    SymplecticStiefel,
    check_symplectic,
    tangency_residual,
)
from .matkit import (
    MatrixOverflowError,
    SingularMatrixError,
    apply_J_left,
    apply_J_right,
    apply_Jt_left,
    canonical_basis_point,
    expm,
    rand_gaussian,
    rand_orthogonal,
    rand_symplectic,
    skew_part,
    solve_dense,
    sym_part,
)
from .mmio import (
    MatrixMarketError,
    UnsupportedFormatError,
    parse_matrix_market,
    read_matrix_market,
    write_matrix_market,
)
from .problems import (
    ProblemDef,
    brockett_trace,
    extract_eigenvalues,
    extrinsic_mean,
    fd_gradient_check,
    gallery,
    nearest_symplectic,
    sample_cloud,
    scale_target,
    spd_with_decay,
    symplectic_eig_oracle,
    symplectic_eig_smallest,
)
from .retraction import (
    DomainError,
    RetractionKind,
    retract_cayley_dense,
    retract_cayley_generic,
    retract_cayley_lowrank,
    retract_qgeo,
)
from .solver import (
    IterationRow,
    LineSearchConfig,
    NonMonotoneState,
    SolveReport,
    StepRule,
    StopConfig,
    Termination,
    nonmonotone_accept,
    nonmonotone_update,
    solve,
    trial_step,
)

__version__ = "0.1.0"
