"""Covariance approximation from kernel moments and curvature.

The second-order machinery factors T^-1 = S S', contracts the Ricci matrix
R = S' Ric S against the kernel moment matrices C (second) and D (fourth),
and assembles

    k^-1  = |det S| (1 - tr(RC)/6)
    Sigma = S (C - tr(RD)/6) S' / (1 - tr(RC)/6),

with an error of order ||S||^3.  For the standard normal kernel on the
constant-curvature surfaces the module also provides the fourth-order
prediction polynomials in sigma, whose sigma^4 numerator coefficient is
adjudicated against the quadrature oracle (see :func:`fit_c4`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import ProfileKind, RadialProfile, profile_normalizer
from .errors import ApproximationRangeError
from .manifolds import ManifoldDescriptor, ManifoldPoint, ricci_in_frame
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    c4_alternate,
    c4_isserlis,
    integrate_radial,
    normal_exact_moments,
    unit_sphere_area,
)


@dataclass(frozen=True)
class SqrtFactor:
    """Factorization T^-1 = S S' with S = U Lambda^(1/2) from the
    eigendecomposition of T^-1 (ascending eigenvalues of T)."""

    S: np.ndarray
    U: np.ndarray
    Lambda: np.ndarray

    @property
    def det_abs(self) -> float:
        return float(np.prod(np.diag(self.Lambda)) ** 0.5)


@dataclass(frozen=True)
class MomentSet:
    """Second moment C (n x n) and fourth moment D (n x n x n x n),
    D[k, l, i, j] = int w_k w_l w_i w_j f(w'w) dw."""

    C: np.ndarray
    D: np.ndarray


@dataclass(frozen=True)
class CovarianceResult:
    sigma_matrix: np.ndarray
    k_inv: float
    order: str             # "second", "fourth" or "exact"
    error_order: int       # asymptotic exponent of the neglected term
    comparison_matrix: np.ndarray | None = None


def factor_concentration(T) -> SqrtFactor:
    """Eigen-based square-root factor of T^-1."""
    tmat = T.matrix if hasattr(T, "matrix") else np.asarray(T, dtype=float)
    evals, vecs = np.linalg.eigh(tmat)
    if evals.min() <= 0:
        raise ValueError("concentration tensor must be positive definite")
    lam = np.diag(1.0 / evals)
    s = vecs @ np.sqrt(lam)
    return SqrtFactor(S=s, U=vecs, Lambda=lam)


def _isotropic_radial_moments(
    profile: RadialProfile, n: int, spec: QuadratureSpec
) -> tuple[float, float, float]:
    """(Z, M2, M4): normalization, |w|^2 and |w|^4 integrals of f(w'w)."""
    from .manifolds import euclidean
    from .quadrature import auto_truncation_radius

    upper = profile.support_radius
    if upper is None:
        upper = auto_truncation_radius(euclidean(n), profile, 1.0, spec)
    area = unit_sphere_area(n)

    def moment(power):
        return area * integrate_radial(
            lambda r: profile.eval_fn(np.square(r)) * np.power(r, n - 1 + power),
            spec,
            upper=upper,
        )

    return moment(0), moment(2), moment(4)


def profile_moments(
    profile: RadialProfile, n: int | None = None, spec: QuadratureSpec = DEFAULT_SPEC
) -> MomentSet:
    """Moment matrices C and D of a normalized kernel.

    The normal kernel gets the closed forms C = I and the Isserlis tensor
    D[klij] = d_kl d_ij + d_ki d_lj + d_kj d_li.  Any other kind is reduced
    by isotropy to the two radial moments M2, M4:  C = (M2/n) I and
    D = M4 / (n(n+2)) times the same delta pattern.  The kernel must
    satisfy int f(w'w) dw = 1 within 1e-8 (checked numerically).
    """
    n = profile.dim if n is None else n
    if n != profile.dim:
        raise ValueError("dimension mismatch with profile")
    eye = np.eye(n)
    delta_pattern = (
        np.einsum("kl,ij->klij", eye, eye)
        + np.einsum("ki,lj->klij", eye, eye)
        + np.einsum("kj,li->klij", eye, eye)
    )
    if profile.kind is ProfileKind.NORMAL:
        return MomentSet(C=eye, D=delta_pattern)
    z, m2, m4 = _isotropic_radial_moments(profile, n, spec)
    if abs(z - 1.0) > 1e-8:
        raise ValueError(
            f"kernel is not normalized: int f(w'w) dw = {z!r}; "
            "wrap it with normalize_profile first"
        )
    if not math.isfinite(m4):
        raise ValueError("kernel fourth moment diverges")
    return MomentSet(C=(m2 / n) * eye, D=(m4 / (n * (n + 2))) * delta_pattern)


def contract_trRD(R: np.ndarray, D: np.ndarray) -> np.ndarray:
    """[tr(RD)]_ij = sum_kl R_kl D[k,l,i,j]."""
    R = np.asarray(R, dtype=float)
    D = np.asarray(D, dtype=float)
    n = R.shape[0]
    if R.shape != (n, n) or D.shape != (n, n, n, n):
        raise ValueError("shape mismatch between R and D")
    return np.einsum("kl,klij->ij", R, D)


def _lemma_pieces(M, q, T, profile, spec):
    factor = factor_concentration(T)
    ric = ricci_in_frame(M, q)
    R = factor.S.T @ ric @ factor.S
    moments = profile_moments(profile, M.dim, spec)
    tr_rc = float(np.trace(R @ moments.C))
    tr_rd = contract_trRD(R, moments.D)
    denom = 1.0 - tr_rc / 6.0
    if denom <= 0.0:
        raise ApproximationRangeError(
            f"1 - tr(RC)/6 = {denom!r} <= 0: concentration too weak for the expansion"
        )
    return factor, moments, tr_rc, tr_rd, denom


def approx_constants(
    M: ManifoldDescriptor,
    q: ManifoldPoint,
    T,
    profile: RadialProfile,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> CovarianceResult:
    """Second-order normalizer and covariance in the frame at q."""
    factor, moments, tr_rc, tr_rd, denom = _lemma_pieces(M, q, T, profile, spec)
    sigma = factor.S @ (moments.C - tr_rd / 6.0) @ factor.S.T / denom
    return CovarianceResult(
        sigma_matrix=sigma,
        k_inv=factor.det_abs * denom,
        order="second",
        error_order=3,
    )


def invariant_ratio(
    T,
    profile: RadialProfile,
    M: ManifoldDescriptor,
    q: ManifoldPoint,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> np.ndarray:
    """S^-1 Sigma S^-T = (C - tr(RD)/6) / (1 - tr(RC)/6), the quantity that
    is invariant under orthogonal changes of the normal coordinates."""
    _, moments, tr_rc, tr_rd, denom = _lemma_pieces(M, q, T, profile, spec)
    return (moments.C - tr_rd / 6.0) / denom


def normal_approx_cov(
    M: ManifoldDescriptor, q: ManifoldPoint, T
) -> CovarianceResult:
    """Normal-kernel covariance approximation, two variants.

    Primary: the full index contraction tr(RD) = 2R + tr(R) I_n.  The
    comparison matrix evaluates the shorthand with n diag(R) in place of
    tr(R) I_n; the two coincide exactly when R is a multiple of the
    identity and differ otherwise (no ground truth is asserted for the
    anisotropic difference).
    """
    from .distributions import make_profile

    result = approx_constants(M, q, T, make_profile("normal", M.dim))
    factor = factor_concentration(T)
    ric = ricci_in_frame(M, q)
    R = factor.S.T @ ric @ factor.S
    n = M.dim
    t_inv = factor.S @ factor.S.T
    denom = 1.0 - float(np.trace(t_inv @ ric)) / 6.0
    shorthand = (
        t_inv
        - t_inv @ ric @ t_inv / 3.0
        - (n / 6.0) * factor.S @ np.diag(np.diag(R)) @ factor.S.T
    ) / denom
    return CovarianceResult(
        sigma_matrix=result.sigma_matrix,
        k_inv=result.k_inv,
        order="second",
        error_order=3,
        comparison_matrix=shorthand,
    )


# -- constant-curvature prediction polynomials --------------------------------


@dataclass(frozen=True)
class Prediction:
    k_inv: float
    sigma_axis: float


def default_c4_numerator(n: int) -> float:
    """sigma^4 numerator coefficient validated by the quadrature fit:
    (n+2)(n+4)/120, e.g. 1/5 at n = 2."""
    return c4_isserlis(n) / 120.0


def alternate_c4_numerator(n: int) -> float:
    """The published alternative (n^2+3n+11)/120, e.g. 7/40 at n = 2."""
    return c4_alternate(n) / 120.0


def constant_curvature_prediction(
    curvature: int,
    n: int,
    sigma: float,
    order: str = "fourth",
    c4_numerator: float | None = None,
) -> Prediction:
    """Normalizer and per-axis variance polynomials for the standard normal
    kernel with T = sigma^-2 I on a space of constant curvature 0 or +-1.

    k_inv     = (2 pi)^(n/2) sigma^n [1 - k (n/6) s^2 + k^2 (n(n+2)/120) s^4]
    sigma_axis = s^2 [1 - k ((n+2)/6) s^2 + k^2 c4 s^4] / [same bracket as k_inv]

    The sigma^4 terms carry k^2, so the curvature-0 path returns sigma^2
    exactly.  ``order="second"`` drops the sigma^4 terms.  The k_inv here
    normalizes the bare exponential kernel, hence the (2 pi)^(n/2) factor
    absent from quadrature normalizers of the prefactored kernel.
    """
    if curvature not in (-1, 0, 1):
        raise ValueError("curvature must be -1, 0 or +1")
    if order not in ("second", "fourth"):
        raise ValueError("order must be 'second' or 'fourth'")
    if sigma <= 0 or n < 1:
        raise ValueError("need sigma > 0 and n >= 1")
    if c4_numerator is None:
        c4_numerator = default_c4_numerator(n)
    s2 = sigma * sigma
    kap = float(curvature)
    fourth = 1.0 if order == "fourth" else 0.0
    den = 1.0 - kap * (n / 6.0) * s2 + fourth * kap * kap * (n * (n + 2) / 120.0) * s2 * s2
    num = 1.0 - kap * ((n + 2) / 6.0) * s2 + fourth * kap * kap * c4_numerator * s2 * s2
    if den <= 0.0:
        raise ApproximationRangeError(f"prediction denominator {den!r} <= 0")
    return Prediction(
        k_inv=(2.0 * math.pi) ** (0.5 * n) * sigma**n * den,
        sigma_axis=s2 * num / den,
    )


# -- oracle adjudication of the sigma^4 coefficient ---------------------------


@dataclass(frozen=True)
class C4Fit:
    fitted: float
    winner: str            # "isserlis" or "alternate"
    winner_value: float
    candidates: dict
    residuals: dict        # per-candidate max |y - c s^4| over the grid
    curvature: int
    n: int
    sigma_grid: tuple


def fit_c4(
    curvature: int = 1,
    n: int = 2,
    sigma_grid=None,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> C4Fit:
    """Least-squares fit of the sigma^4 numerator coefficient from oracle data.

    For each sigma the residual y = (exact/s^2) * denominator - second-order
    numerator behaves as c4 * s^4 + O(s^6); the fit regresses y on s^4 over
    sigma in [0.05, 0.3] and the closest candidate wins.
    """
    if sigma_grid is None:
        sigma_grid = np.geomspace(0.05, 0.3, 26)
    sigma_grid = np.asarray(sigma_grid, dtype=float)
    kap = float(curvature)
    ys = []
    for s in sigma_grid:
        manifold = _constant_curvature_surface(curvature, n)
        exact = normal_exact_moments(manifold, float(s), spec).sigma_axis
        s2 = s * s
        den = 1.0 - kap * (n / 6.0) * s2 + (n * (n + 2) / 120.0) * s2 * s2
        ys.append(exact / s2 * den - (1.0 - kap * ((n + 2) / 6.0) * s2))
    ys = np.asarray(ys)
    x = sigma_grid**4
    fitted = float(np.dot(x, ys) / np.dot(x, x))
    candidates = {
        "isserlis": c4_isserlis(n) / 120.0,
        "alternate": c4_alternate(n) / 120.0,
    }
    winner = min(candidates, key=lambda k: abs(fitted - candidates[k]))
    residuals = {
        name: float(np.max(np.abs(ys - value * x)))
        for name, value in candidates.items()
    }
    return C4Fit(
        fitted=fitted,
        winner=winner,
        winner_value=candidates[winner],
        candidates=candidates,
        residuals=residuals,
        curvature=curvature,
        n=n,
        sigma_grid=tuple(float(s) for s in sigma_grid),
    )


def _constant_curvature_surface(curvature: int, n: int) -> ManifoldDescriptor:
    from .manifolds import euclidean, hyperbolic, sphere

    if curvature == 1:
        return sphere(n)
    if curvature == -1:
        return hyperbolic(n)
    return euclidean(n)


DEFAULT_CONSTANTS_PATH = Path("c4_constants.txt")


def write_constants_file(fit: C4Fit, path=DEFAULT_CONSTANTS_PATH) -> Path:
    """Record the adjudicated coefficient as a plain key = value file."""
    path = Path(path)
    lines = [
        "# sigma^4 numerator coefficient of the per-axis variance prediction,",
        "# adjudicated by least-squares against the radial quadrature oracle",
        f"# (curvature {fit.curvature:+d}, n = {fit.n}, "
        f"sigma in [{fit.sigma_grid[0]:g}, {fit.sigma_grid[-1]:g}], "
        f"{len(fit.sigma_grid)} points).",
        f"c4_fitted = {fit.fitted!r}",
        f"c4_winner = {fit.winner}",
        f"c4_winner_value = {fit.winner_value!r}",
    ]
    for name, value in sorted(fit.candidates.items()):
        lines.append(f"c4_candidate_{name} = {value!r}")
        lines.append(f"# max residual |y - c s^4| for {name}: "
                     f"{fit.residuals[name]:.3e}")
    path.write_text("\n".join(lines) + "\n")
    return path


def load_constants_file(path=DEFAULT_CONSTANTS_PATH) -> dict:
    """Parse the key = value constants file; '#' lines are comments."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        value = value.strip()
        try:
            out[key.strip()] = float(value)
        except ValueError:
            out[key.strip()] = value
    return out
