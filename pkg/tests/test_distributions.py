import math

import numpy as np
import pytest

from manifold_stats import (
    ConcentrationTensor,
    CutLocusError,
    UnsupportedCombinationError,
    build_distribution,
    density_at,
    distance,
    euclidean,
    exp_map,
    frame_at,
    hyperbolic,
    integrate_radial,
    isotropic_tensor,
    make_profile,
    normalize_profile,
    point_on,
    sphere,
    tangent,
    unit_sphere_area,
)
from manifold_stats.distributions import OrthonormalFrame, profile_normalizer
from manifold_stats.manifolds import ManifoldKind

S2, H2, E2 = sphere(2), hyperbolic(2), euclidean(2)
POLE = point_on(S2, [0.0, 0.0, 1.0])
APEX = point_on(H2, [0.0, 0.0, 1.0])
ORIGIN = point_on(E2, [0.0, 0.0])

CENTERS = {"sphere": (S2, POLE), "hyperbolic": (H2, APEX), "euclidean": (E2, ORIGIN)}


def manifold_normalization(dist, upper=None):
    """Oracle: integrate density_at over the manifold in geodesic polars."""
    M, q = dist.manifold, dist.center
    n = M.dim
    if M.kind is ManifoldKind.SPHERE:
        upper = math.pi
        geo = np.sin
    elif M.kind is ManifoldKind.HYPERBOLIC:
        upper = dist.trunc_radius if upper is None else upper
        geo = np.sinh
    else:
        upper = dist.trunc_radius if upper is None else upper
        geo = lambda x: x

    def integrand(d):
        out = []
        for dd in np.atleast_1d(d):
            p = exp_map(M, q, tangent(M, q, [float(dd), 0.0]))
            out.append(density_at(dist, p) * geo(dd) ** (n - 1))
        return np.asarray(out)

    return unit_sphere_area(n) * integrate_radial(integrand, upper=upper)


class TestProfiles:
    def test_normal_prefactor(self):
        f = make_profile("normal", 2)
        assert f.eval_fn(0.0) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
        assert f.fold_required and not f.support_bounded

    def test_vmf_zero_kappa_is_uniform(self):
        f = make_profile("vmf", 2, kappa=0.0)
        ts = np.linspace(0.0, math.pi**2, 7)
        np.testing.assert_allclose(f.eval_fn(ts), 1.0, atol=0)
        assert f.eval_fn(math.pi**2 + 0.1) == 0.0
        assert f.support_bounded and not f.fold_required

    def test_vmf_matches_cos_distance(self):
        f = make_profile("vmf", 2, kappa=3.0)
        d = 1.234
        assert f.eval_fn(d * d) == pytest.approx(math.exp(3.0 * math.cos(d)), rel=1e-14)

    def test_gamma_radial_form(self):
        f = make_profile("gamma", 2, shape=3.0, scale=2.0)
        r = 1.7
        assert f.eval_fn(r * r) == pytest.approx(r**2 * math.exp(-r / 2.0), rel=1e-14)

    def test_gamma_exponential_normalizer(self):
        # shape 1 on R^2: A_1 int r e^{-r/theta} dr = 2 pi theta^2
        theta = 0.7
        f = make_profile("gamma", 2, shape=1.0, scale=theta)
        assert profile_normalizer(f) == pytest.approx(
            2 * math.pi * theta**2, rel=1e-10
        )

    def test_normalize_profile(self):
        f = normalize_profile(make_profile("gamma", 2, shape=1.0, scale=0.7))
        assert profile_normalizer(f) == pytest.approx(1.0, rel=1e-10)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            make_profile("vmf", 2, kappa=-1.0)
        with pytest.raises(ValueError):
            make_profile("gamma", 2, shape=0.0, scale=1.0)
        with pytest.raises((ValueError, KeyError)):
            make_profile("normal", 2, kappa=1.0)


class TestConcentrationTensor:
    def test_rejects_asymmetric_and_indefinite(self):
        with pytest.raises(ValueError):
            ConcentrationTensor(np.array([[1.0, 0.5], [0.2, 1.0]]))
        with pytest.raises(ValueError):
            ConcentrationTensor(np.array([[1.0, 0.0], [0.0, -2.0]]))

    def test_isotropic_detection(self):
        assert isotropic_tensor(2, 4.0).isotropic_value() == pytest.approx(4.0)
        assert ConcentrationTensor(np.diag([1.0, 2.0])).isotropic_value() is None


class TestBuildDistribution:
    def test_flat_gaussian_peak(self):
        sigma = 0.5
        dist = build_distribution(
            E2, ORIGIN, isotropic_tensor(2, sigma**-2), make_profile("normal", 2)
        )
        peak = density_at(dist, ORIGIN)
        assert peak == pytest.approx(1 / (2 * math.pi * sigma**2), rel=1e-10)

    def test_sphere_fold_radius_sigma03(self):
        dist = build_distribution(
            S2, POLE, isotropic_tensor(2, 0.3**-2), make_profile("normal", 2),
            fold_tol=1e-12,
        )
        assert dist.fold_radius == pytest.approx(3 * math.pi)
        # second-leaf kernel term at d = 0 is e^{-(2 pi)^2 / (2 * 0.09)}
        assert math.exp(-((2 * math.pi) ** 2) / 0.18) < 1e-90

    def test_vmf_matches_closed_form_normalizer(self):
        kappa = 10.0
        dist = build_distribution(
            S2, POLE, isotropic_tensor(2, 1.0), make_profile("vmf", 2, kappa=kappa)
        )
        # on S^2 the normalized directional density is kappa e^{kappa cos d}
        # / (4 pi sinh kappa)
        c_kappa = kappa / (4 * math.pi * math.sinh(kappa))
        p = exp_map(S2, POLE, tangent(S2, POLE, [0.9, 0.0]))
        assert density_at(dist, p) == pytest.approx(
            c_kappa * math.exp(kappa * math.cos(0.9)), rel=1e-9
        )
        assert manifold_normalization(dist) == pytest.approx(1.0, abs=1e-9)

    def test_anisotropic_hyperbolic_rejected(self):
        with pytest.raises(UnsupportedCombinationError):
            build_distribution(
                H2, APEX, ConcentrationTensor(np.diag([1.0, 2.0])),
                make_profile("normal", 2),
            )

    def test_anisotropic_flat_matches_closed_form(self):
        T = np.diag([1 / 0.04, 1 / 0.01])
        dist = build_distribution(
            E2, ORIGIN, ConcentrationTensor(T), make_profile("normal", 2)
        )
        # int (2 pi)^-1 exp(-v'Tv/2) dv = |det T|^(-1/2)
        assert dist.norm_const == pytest.approx(math.sqrt(np.linalg.det(T)), rel=1e-9)


class TestDensityAt:
    def test_flat_center_value(self):
        dist = build_distribution(
            E2, ORIGIN, isotropic_tensor(2, 4.0), make_profile("normal", 2)
        )
        assert density_at(dist, ORIGIN) == pytest.approx(2 / math.pi, rel=1e-10)

    def test_sphere_leaf_sum_structure(self):
        sigma = 0.3
        dist = build_distribution(
            S2, POLE, isotropic_tensor(2, sigma**-2), make_profile("normal", 2)
        )
        p = exp_map(S2, POLE, tangent(S2, POLE, [math.pi / 2, 0.0]))
        leaf_sum = sum(
            math.exp(-((math.pi / 2 + 2 * math.pi * i) ** 2) / (2 * sigma**2))
            for i in range(3)
        ) + sum(
            math.exp(-((2 * math.pi * i - math.pi / 2) ** 2) / (2 * sigma**2))
            for i in range(1, 3)
        )
        expected = dist.norm_const * leaf_sum / (2 * math.pi)
        assert density_at(dist, p) == pytest.approx(expected, rel=1e-12)

    def test_hyperbolic_single_leaf_value(self):
        dist = build_distribution(
            H2, APEX, isotropic_tensor(2, 1.0), make_profile("normal", 2)
        )
        # closed form: k_inv = e^(1/2) sqrt(2 pi) erf(1/sqrt 2) / 2
        k_inv = (
            math.exp(0.5) * math.sqrt(2 * math.pi) * math.erf(1 / math.sqrt(2)) / 2
        )
        p = exp_map(H2, APEX, tangent(H2, APEX, [1.0, 0.0]))
        assert density_at(dist, p) == pytest.approx(
            math.exp(-0.5) / (2 * math.pi * k_inv), rel=1e-10
        )

    def test_cut_locus_flagged(self):
        dist = build_distribution(
            S2, POLE, isotropic_tensor(2, 1.0), make_profile("normal", 2)
        )
        with pytest.raises(CutLocusError):
            density_at(dist, point_on(S2, [0.0, 0.0, -1.0]))


class TestDistributionProperties:
    @pytest.mark.parametrize("name", ["sphere", "hyperbolic", "euclidean"])
    @pytest.mark.parametrize("sigma", [0.1, 0.3, 1.0])
    def test_normal_density_normalizes(self, name, sigma):
        M, q = CENTERS[name]
        dist = build_distribution(
            M, q, isotropic_tensor(2, sigma**-2), make_profile("normal", 2)
        )
        assert manifold_normalization(dist) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("kappa", [0.5, 10.0])
    @pytest.mark.parametrize("name", ["sphere", "hyperbolic"])
    def test_vmf_density_normalizes(self, name, kappa):
        M, q = CENTERS[name]
        dist = build_distribution(
            M, q, isotropic_tensor(2, 1.0), make_profile("vmf", 2, kappa=kappa)
        )
        # kernel support ends at distance pi on every manifold
        assert manifold_normalization(dist, upper=math.pi) == pytest.approx(
            1.0, abs=1e-8
        )

    def test_folding_converged_at_build_radius(self, rng):
        sigma = 1.0
        dist = build_distribution(
            S2, POLE, isotropic_tensor(2, sigma**-2), make_profile("normal", 2)
        )
        wider = build_distribution(
            S2, POLE, isotropic_tensor(2, sigma**-2), make_profile("normal", 2),
            fold_tol=1e-300,
        )
        assert wider.fold_radius >= dist.fold_radius + 2 * math.pi
        import dataclasses

        widened = dataclasses.replace(
            dist, fold_radius=dist.fold_radius + 2 * math.pi
        )
        for _ in range(100):
            d = rng.uniform(0.0, math.pi - 1e-3)
            phi = rng.uniform(0.0, 2 * math.pi)
            p = exp_map(
                S2, POLE,
                tangent(S2, POLE, [d * math.cos(phi), d * math.sin(phi)]),
            )
            assert abs(density_at(widened, p) - density_at(dist, p)) < dist.fold_tol

    def test_isotropy_equidistant_points_agree(self, rng):
        dist = build_distribution(
            S2, POLE, isotropic_tensor(2, 0.5**-2), make_profile("normal", 2)
        )
        for _ in range(50):
            d = rng.uniform(0.1, math.pi - 0.1)
            phi1, phi2 = rng.uniform(0.0, 2 * math.pi, size=2)
            ps = [
                exp_map(S2, POLE, tangent(S2, POLE, [d * math.cos(t), d * math.sin(t)]))
                for t in (phi1, phi2)
            ]
            a, b = density_at(dist, ps[0]), density_at(dist, ps[1])
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))

    @pytest.mark.parametrize("name", ["sphere", "euclidean"])
    def test_frame_rotation_invariance(self, name, rng):
        M, q = CENTERS[name]
        T = np.diag([1 / 0.09, 1 / 0.04])
        base = build_distribution(
            M, q, ConcentrationTensor(T), make_profile("normal", 2)
        )
        canonical = frame_at(M, q)
        for _ in range(5):
            theta = rng.uniform(0.0, 2 * math.pi)
            A = np.array(
                [[math.cos(theta), -math.sin(theta)],
                 [math.sin(theta), math.cos(theta)]]
            )
            if rng.random() < 0.5:
                A = A @ np.diag([1.0, -1.0])
            rotated_frame = OrthonormalFrame(q, A @ canonical.axes)
            rotated = build_distribution(
                M, q, ConcentrationTensor(A @ T @ A.T), make_profile("normal", 2),
                frame=rotated_frame,
            )
            for _ in range(20):
                d = rng.uniform(0.0, 2.0 if name == "euclidean" else math.pi - 0.1)
                phi = rng.uniform(0.0, 2 * math.pi)
                p = exp_map(
                    M, q, tangent(M, q, [d * math.cos(phi), d * math.sin(phi)])
                )
                da, db = density_at(base, p), density_at(rotated, p)
                assert abs(da - db) <= 1e-10 * max(1.0, abs(da))
