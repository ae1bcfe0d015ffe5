import math

import numpy as np
import pytest

from manifold_stats import (
    ManifoldKind,
    euclidean,
    exp_map,
    hyperbolic,
    point_on,
    sphere,
    tangent,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_point(M, rng):
    """Random point on M (uniform-ish; exact law irrelevant for the tests)."""
    if M.kind is ManifoldKind.EUCLIDEAN:
        return point_on(M, rng.normal(size=M.dim))
    if M.kind is ManifoldKind.SPHERE:
        w = rng.normal(size=M.ambient_dim)
        return point_on(M, w / np.linalg.norm(w))
    apex = np.zeros(M.ambient_dim)
    apex[-1] = 1.0
    base = point_on(M, apex)
    coeffs = rng.normal(size=M.dim)
    return exp_map(M, base, tangent(M, base, coeffs))


def random_tangent(M, q, rng, max_norm):
    u = rng.normal(size=M.dim)
    u = u / np.linalg.norm(u)
    r = rng.uniform(0.0, max_norm)
    return tangent(M, q, r * u)


ALL_MANIFOLDS = [euclidean(2), sphere(2), hyperbolic(2)]


def manifold_ids(M):
    return f"{M.kind.value}{M.dim}"
