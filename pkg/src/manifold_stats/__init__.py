"""Centered probability distributions on constant-curvature manifolds.

Folded tangent-space densities, covariance approximation through curvature
corrections, exact sampling, and the simulation sweeps that compare the
prediction polynomials against a quadrature oracle.
"""

from .covariance import (
    C4Fit,
    CovarianceResult,
    MomentSet,
    Prediction,
    SqrtFactor,
    approx_constants,
    constant_curvature_prediction,
    contract_trRD,
    factor_concentration,
    fit_c4,
    invariant_ratio,
    load_constants_file,
    normal_approx_cov,
    profile_moments,
    write_constants_file,
)
from .distributions import (
    CenteredDistribution,
    ConcentrationTensor,
    ProfileKind,
    RadialProfile,
    build_distribution,
    density_at,
    isotropic_tensor,
    make_profile,
    normalize_profile,
)
from .errors import (
    ApproximationRangeError,
    CutLocusError,
    InvalidPointError,
    QuadratureError,
    UnsupportedCombinationError,
)
from .manifolds import (
    ManifoldDescriptor,
    ManifoldKind,
    ManifoldPoint,
    OrthonormalFrame,
    TangentVector,
    distance,
    euclidean,
    exp_map,
    frame_at,
    from_halfspace,
    hyperbolic,
    log_map,
    multi_log,
    point_on,
    ricci_in_frame,
    sphere,
    tangent,
    to_halfspace,
    volume_density,
)
from .quadrature import (
    ExactMoments,
    GaussianMoments,
    QuadratureSpec,
    exact_moments,
    gaussian_moments,
    integrate_radial,
    normal_exact_moments,
    unit_sphere_area,
)
from .sampling import (
    EmpiricalCovariance,
    SampleBatch,
    empirical_covariance,
    radial_cdf_table,
    sample,
)
from .sweep import SweepConfig, SweepRow, run_sweep, rows_to_csv, write_csv

__version__ = "0.1.0"
