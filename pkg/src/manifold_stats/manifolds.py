"""Closed-form geometry of the three built-in constant-curvature manifolds.

Points live in ambient coordinates: R^n for euclidean space, unit vectors in
R^{n+1} for the sphere, and the upper hyperboloid sheet (Minkowski norm -1,
last coordinate >= 1) for hyperbolic space.  Tangent vectors are stored as
coefficient vectors in the deterministic orthonormal frame at their base
point, so their Euclidean norm equals the geodesic length.

All types are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CutLocusError, InvalidPointError

POINT_TOL = 1e-12


class ManifoldKind(enum.Enum):
    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class ManifoldDescriptor:
    """Dimension, curvature sign and injectivity radius of a built-in manifold."""

    kind: ManifoldKind
    dim: int
    curvature: int
    injectivity_radius: float

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        expected = {
            ManifoldKind.EUCLIDEAN: (0, math.inf),
            ManifoldKind.SPHERE: (1, math.pi),
            ManifoldKind.HYPERBOLIC: (-1, math.inf),
        }[self.kind]
        if (self.curvature, self.injectivity_radius) != expected:
            raise ValueError(
                f"{self.kind.value} requires curvature={expected[0]} and "
                f"injectivity_radius={expected[1]}"
            )

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.kind is ManifoldKind.EUCLIDEAN else self.dim + 1


def euclidean(n: int) -> ManifoldDescriptor:
    return ManifoldDescriptor(ManifoldKind.EUCLIDEAN, n, 0, math.inf)


def sphere(n: int) -> ManifoldDescriptor:
    return ManifoldDescriptor(ManifoldKind.SPHERE, n, 1, math.pi)


def hyperbolic(n: int) -> ManifoldDescriptor:
    return ManifoldDescriptor(ManifoldKind.HYPERBOLIC, n, -1, math.inf)


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ManifoldPoint:
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _readonly(self.coords))


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector as coefficients in the canonical frame at ``base``."""

    base: ManifoldPoint
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _readonly(self.v))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.v))


@dataclass(frozen=True)
class OrthonormalFrame:
    """Orthonormal tangent basis at ``base``; ``axes`` has shape (n, ambient)."""

    base: ManifoldPoint
    axes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "axes", _readonly(self.axes))


def minkowski_inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a[:-1], b[:-1]) - a[-1] * b[-1])


def _ambient_inner(M: ManifoldDescriptor, a: np.ndarray, b: np.ndarray) -> float:
    if M.kind is ManifoldKind.HYPERBOLIC:
        return minkowski_inner(a, b)
    return float(np.dot(a, b))


def point_on(M: ManifoldDescriptor, coords) -> ManifoldPoint:
    """Validate ambient coordinates and wrap them as a point on ``M``."""
    c = np.asarray(coords, dtype=float)
    if c.shape != (M.ambient_dim,):
        raise InvalidPointError(
            f"expected {M.ambient_dim} ambient coordinates, got shape {c.shape}"
        )
    if M.kind is ManifoldKind.SPHERE:
        if abs(np.dot(c, c) - 1.0) > 2 * POINT_TOL:
            raise InvalidPointError("sphere point must have unit Euclidean norm")
    elif M.kind is ManifoldKind.HYPERBOLIC:
        # residual tolerance scales with |c|^2: the Minkowski form cancels
        # two O(|c|^2) terms, so an absolute check is unattainable far from
        # the apex in float64
        scale = max(1.0, float(np.dot(c, c)))
        if (
            abs(minkowski_inner(c, c) + 1.0) > 2 * POINT_TOL * scale
            or c[-1] < 1.0 - POINT_TOL
        ):
            raise InvalidPointError(
                "hyperbolic point must lie on the upper hyperboloid sheet"
            )
    return ManifoldPoint(c)


def validate_point(M: ManifoldDescriptor, p: ManifoldPoint) -> None:
    point_on(M, p.coords)


def tangent(M: ManifoldDescriptor, q: ManifoldPoint, coeffs) -> TangentVector:
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (M.dim,):
        raise ValueError(f"expected {M.dim} frame coefficients, got shape {c.shape}")
    return TangentVector(q, c)


def frame_at(M: ManifoldDescriptor, q: ManifoldPoint) -> OrthonormalFrame:
    """Deterministic orthonormal frame at q.

    Built by Gram-Schmidt completion of the ambient standard basis (projected
    to the tangent space), so the same q always yields the same frame.
    """
    validate_point(M, q)
    n = M.dim
    if M.kind is ManifoldKind.EUCLIDEAN:
        return OrthonormalFrame(q, np.eye(n))
    amb = M.ambient_dim
    qc = q.coords
    axes = []
    for j in range(amb):
        e = np.zeros(amb)
        e[j] = 1.0
        # project out the normal direction, then previously accepted axes
        if M.kind is ManifoldKind.SPHERE:
            w = e - np.dot(e, qc) * qc
        else:
            w = e + minkowski_inner(e, qc) * qc  # <q,q>_M = -1
        for a in axes:
            w = w - _ambient_inner(M, w, a) * a
        nrm2 = _ambient_inner(M, w, w)
        if nrm2 > 1e-8:
            axes.append(w / math.sqrt(nrm2))
        if len(axes) == n:
            break
    if len(axes) != n:
        raise InvalidPointError("failed to complete a tangent frame")
    return OrthonormalFrame(q, np.array(axes))


def coeffs_to_ambient(frame: OrthonormalFrame, coeffs: np.ndarray) -> np.ndarray:
    return frame.axes.T @ np.asarray(coeffs, dtype=float)


def ambient_to_coeffs(
    M: ManifoldDescriptor, frame: OrthonormalFrame, w: np.ndarray
) -> np.ndarray:
    if M.kind is ManifoldKind.HYPERBOLIC:
        g = np.ones(M.ambient_dim)
        g[-1] = -1.0
        return frame.axes @ (g * w)
    return frame.axes @ w


def _exp_ambient(
    M: ManifoldDescriptor, q: np.ndarray, w: np.ndarray, r: float
) -> np.ndarray:
    """Geodesic from q with ambient initial direction w/r and length r."""
    if r == 0.0:
        return q.copy()
    u = w / r
    if M.kind is ManifoldKind.EUCLIDEAN:
        return q + w
    if M.kind is ManifoldKind.SPHERE:
        p = math.cos(r) * q + math.sin(r) * u
        return p / np.linalg.norm(p)
    p = math.cosh(r) * q + math.sinh(r) * u
    # pull back onto the sheet against rounding drift
    return p / math.sqrt(-minkowski_inner(p, p))


def exp_map(M: ManifoldDescriptor, q: ManifoldPoint, v: TangentVector) -> ManifoldPoint:
    """Exponential map; defined for any norm since the manifolds are complete."""
    validate_point(M, q)
    if not np.allclose(v.base.coords, q.coords, atol=POINT_TOL, rtol=0.0):
        raise ValueError("tangent vector is not based at q")
    r = v.norm
    w = coeffs_to_ambient(frame_at(M, q), v.v)
    return ManifoldPoint(_exp_ambient(M, q.coords, w, r))


def _principal_log(M, q: ManifoldPoint, p: ManifoldPoint):
    """Return (distance, ambient unit direction or None when p == q)."""
    qc, pc = q.coords, p.coords
    if M.kind is ManifoldKind.EUCLIDEAN:
        w = pc - qc
        d = float(np.linalg.norm(w))
        return (d, w / d if d > 0 else None)
    if M.kind is ManifoldKind.SPHERE:
        c = float(np.dot(qc, pc))
        if c <= -1.0 + POINT_TOL:
            raise CutLocusError("p is at (or within 1e-12 of) the antipode of q")
        c = min(c, 1.0)
        d = math.acos(c)
        u = pc - c * qc
        nrm = np.linalg.norm(u)
        return (d, u / nrm if nrm > 0 else None)
    c = -minkowski_inner(qc, pc)
    c = max(c, 1.0)
    d = math.acosh(c)
    u = pc - c * qc
    nrm2 = minkowski_inner(u, u)
    return (d, u / math.sqrt(nrm2) if nrm2 > 0 else None)


def log_map(M: ManifoldDescriptor, q: ManifoldPoint, p: ManifoldPoint) -> TangentVector:
    """Principal leaf of the inverse exponential map.

    On the sphere this is the leaf with norm d(q,p) = arccos<q,p> in [0, pi);
    the antipode raises :class:`CutLocusError` since the direction is undefined.
    """
    validate_point(M, q)
    validate_point(M, p)
    d, u = _principal_log(M, q, p)
    fr = frame_at(M, q)
    if u is None:
        return TangentVector(q, np.zeros(M.dim))
    return TangentVector(q, d * ambient_to_coeffs(M, fr, u))


def distance(M: ManifoldDescriptor, q: ManifoldPoint, p: ManifoldPoint) -> float:
    return _principal_log(M, q, p)[0]


def multi_log(
    M: ManifoldDescriptor, q: ManifoldPoint, p: ManifoldPoint, radius_cap: float
) -> list[TangentVector]:
    """All leaves of the multi-valued log-map with norm <= radius_cap.

    Euclidean and hyperbolic space have empty cut locus, hence exactly one
    leaf.  On the sphere the leaves are (d + 2*pi*i) along the principal
    direction and (2*pi*i - d) along the opposite one, i >= 1, sorted by
    norm.  For p == q the i >= 1 leaves keep one entry per magnitude,
    directed along the first frame axis (fixed measure-zero convention).
    """
    if not (math.isfinite(radius_cap) and radius_cap > 0):
        raise ValueError("radius_cap must be finite and positive")
    validate_point(M, q)
    validate_point(M, p)
    d, u = _principal_log(M, q, p)
    fr = frame_at(M, q)
    if M.kind is not ManifoldKind.SPHERE:
        if u is None:
            return [TangentVector(q, np.zeros(M.dim))]
        return [TangentVector(q, d * ambient_to_coeffs(M, fr, u))]

    if u is None:
        coeff_dir = np.zeros(M.dim)
        coeff_dir[0] = 1.0
        leaves = [TangentVector(q, np.zeros(M.dim))]
        i = 1
        while 2 * math.pi * i <= radius_cap:
            leaves.append(TangentVector(q, (2 * math.pi * i) * coeff_dir))
            i += 1
        return leaves

    coeff_dir = ambient_to_coeffs(M, fr, u)
    mags: list[tuple[float, float]] = []  # (magnitude, direction sign)
    i = 0
    while d + 2 * math.pi * i <= radius_cap:
        mags.append((d + 2 * math.pi * i, 1.0))
        i += 1
    i = 1
    while 2 * math.pi * i - d <= radius_cap:
        mags.append((2 * math.pi * i - d, -1.0))
        i += 1
    mags.sort(key=lambda t: t[0])
    return [TangentVector(q, m * s * coeff_dir) for m, s in mags]


def volume_density(M: ManifoldDescriptor, r) -> np.ndarray | float:
    """Radial Jacobian theta(r) of the exponential map in normal coordinates.

    (|sin r|/r)^(n-1) on the sphere (magnitude is taken so the value stays a
    valid Jacobian on every leaf, r > pi included), (sinh r/r)^(n-1) on
    hyperbolic space, 1 on euclidean space; theta(0) = 1 by the limit.
    Accepts scalars or arrays.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("r must be nonnegative")
    n = M.dim
    if M.kind is ManifoldKind.EUCLIDEAN:
        out = np.ones_like(r_arr)
    elif M.kind is ManifoldKind.SPHERE:
        # sinc(r/pi) = sin(r)/r, exact at r=0
        out = np.abs(np.sinc(r_arr / np.pi)) ** (n - 1)
    else:
        small = r_arr < 1e-4
        rs = np.where(small, 1.0, r_arr)
        ratio = np.where(
            small,
            1.0 + r_arr**2 / 6.0 + r_arr**4 / 120.0,
            np.sinh(rs) / rs,
        )
        out = ratio ** (n - 1)
    return out if np.ndim(r) else float(out)


def ricci_in_frame(M: ManifoldDescriptor, q: ManifoldPoint) -> np.ndarray:
    """Ricci tensor in the orthonormal frame: (n-1)*curvature*I_n."""
    validate_point(M, q)
    return (M.dim - 1) * M.curvature * np.eye(M.dim)


# -- half-space view of hyperbolic space ------------------------------------
#
# Internal model is the hyperboloid sheet; the upper half-space
# {x in R^n : x_n > 0} with metric delta_ij / x_n^2 is offered as an I/O
# coordinate chart.  The isometry goes hyperboloid -> Poincare ball
# (stereographic projection) -> half-space (inversion in the sphere of
# radius sqrt(2) centered at -e_n), mapping the apex (0,...,0,1) on the
# hyperboloid to (0,...,0,1) in the half-space.


def to_halfspace(M: ManifoldDescriptor, p: ManifoldPoint) -> np.ndarray:
    if M.kind is not ManifoldKind.HYPERBOLIC:
        raise ValueError("half-space coordinates only exist for hyperbolic space")
    validate_point(M, p)
    x, t = p.coords[:-1], p.coords[-1]
    y = x / (1.0 + t)
    n = M.dim
    e = np.zeros(n)
    e[-1] = 1.0
    denom = float(np.dot(y + e, y + e))
    return -e + 2.0 * (y + e) / denom


def from_halfspace(M: ManifoldDescriptor, x) -> ManifoldPoint:
    if M.kind is not ManifoldKind.HYPERBOLIC:
        raise ValueError("half-space coordinates only exist for hyperbolic space")
    x = np.asarray(x, dtype=float)
    if x.shape != (M.dim,) or x[-1] <= 0:
        raise InvalidPointError("half-space point needs positive last coordinate")
    n = M.dim
    e = np.zeros(n)
    e[-1] = 1.0
    denom = float(np.dot(x + e, x + e))
    y = -e + 2.0 * (x + e) / denom
    y2 = float(np.dot(y, y))
    coords = np.empty(n + 1)
    coords[:-1] = 2.0 * y / (1.0 - y2)
    coords[-1] = (1.0 + y2) / (1.0 - y2)
    return point_on(M, coords)
