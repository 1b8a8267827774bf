"""KMS state simplices of Toeplitz algebras of finite higher-rank graphs."""

from .errors import (
    CertificationError,
    CommutationError,
    ComposabilityError,
    ConvergenceError,
    DegenerateKernelError,
    DimensionError,
    EmptyColorSetError,
    GenerationError,
    GraphKMSError,
    HexagonError,
    IncompletePeriodicityWarning,
    MatricesOnlyError,
    NegativeMassError,
    NotAClassError,
    NotSubinvariantError,
    RangeError,
    ResidualError,
    SchemaError,
    SpectralRadiusError,
    SquareBijectionError,
    SupportError,
)
from .kgraph import ComponentPartition, Edge, KGraph, Path, parse_graph
from .kms import (
    BetaRow,
    BetaSet,
    BetaTable,
    ExtremeState,
    PeriodicityGroup,
    SimplexDescription,
    SubharmonicComponent,
    beta_table,
    boundary_vector,
    decompose_kms,
    factors_through_ck,
    find_subharmonic,
    harmonic_vector,
    is_subharmonic,
    kms_vector,
    periodicity_group,
    simplex,
    state_eval,
)
from .oracle import (
    CheckReport,
    check_suite,
    mc_cylinder_estimate,
    random_commuting_family,
    random_subinvariant,
)
from .spectral import (
    MatrixFamily,
    Query,
    decompose_subinvariant,
    is_subinvariant,
    neumann_sum,
    riesz_split,
    scaled_family,
    spectral_radius,
)

__version__ = "0.1.0"
