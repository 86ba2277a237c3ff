"""Double- and single-splitting iterations for indefinite least squares."""

from .core import (
    NormalEquation,
    PartitionedProblem,
    assemble_normal,
    direct_solve_oracle,
    residual_res,
)
from .errors import (
    CapacityError,
    DimensionError,
    DivergenceError,
    HomogeneousRHSError,
    NonUniqueSolutionError,
    NotPositiveDefiniteError,
    ParameterError,
    ProblemFormatError,
)
from .kernels import CholFactor, chol_solve, cholesky, dense_eigs, is_spd
from .problems import (
    Example1Config,
    Example2Config,
    TlsReference,
    gen_example1,
    gen_example2,
    read_problem,
    write_problem,
)
from .solvers import (
    SchemeKind,
    SolveReport,
    SplittingScheme,
    Termination,
    build_scheme,
    run,
    step_adi,
    step_ds,
    step_single,
)
from .spectral import (
    SpectralReport,
    build_W,
    check_eigen_quadratic,
    shen_spd_check,
    spectral_radius,
    unit_disk_roots,
)

__version__ = "0.1.0"
