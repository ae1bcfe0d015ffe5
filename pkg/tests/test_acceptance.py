"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; tolerances are pinned here and nowhere else.
"""

import math
import time

import numpy as np
import pytest

from manifold_stats import (
    ConcentrationTensor,
    approx_constants,
    build_distribution,
    constant_curvature_prediction,
    density_at,
    empirical_covariance,
    euclidean,
    exp_map,
    fit_c4,
    gaussian_moments,
    hyperbolic,
    integrate_radial,
    invariant_ratio,
    isotropic_tensor,
    load_constants_file,
    make_profile,
    normal_exact_moments,
    point_on,
    radial_cdf_table,
    run_sweep,
    sample,
    sphere,
    tangent,
    unit_sphere_area,
    write_constants_file,
)
from manifold_stats.covariance import default_c4_numerator
from manifold_stats.quadrature import c4_isserlis
from manifold_stats.sweep import SweepConfig, write_csv

S2, H2, E2 = sphere(2), hyperbolic(2), euclidean(2)
POLE = point_on(S2, [0.0, 0.0, 1.0])
APEX = point_on(H2, [0.0, 0.0, 1.0])
ORIGIN = point_on(E2, [0.0, 0.0])
NORMAL2 = make_profile("normal", 2)

KS_COEFF_0001 = math.sqrt(-0.5 * math.log(0.0005))  # two-sided alpha = 0.001


def report(number: int, ok: bool, detail: str) -> None:
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {number} failed: {detail}"


@pytest.fixture(scope="module")
def c4_fit():
    return fit_c4()


def test_criterion_1_flat_exactness():
    start = time.perf_counter()
    worst = 0.0
    for sigma in (0.1, 0.5, 1.0, 2.0):
        s2 = sigma**2
        exact = normal_exact_moments(E2, sigma).sigma_axis
        lemma = approx_constants(
            E2, ORIGIN, isotropic_tensor(2, sigma**-2), NORMAL2
        ).sigma_matrix
        pred = constant_curvature_prediction(0, 2, sigma, "fourth").sigma_axis
        worst = max(
            worst,
            abs(exact - s2),
            abs(lemma[0, 0] - s2),
            abs(lemma[1, 1] - s2),
            abs(pred - s2),
        )
    elapsed = time.perf_counter() - start
    report(
        1,
        worst <= 1e-10 and elapsed < 1.0,
        f"max deviation {worst:.2e}, {elapsed:.2f} s",
    )


def test_criterion_2_sphere_prediction(c4_fit):
    start = time.perf_counter()
    ok = True
    details = []
    for sigma in (0.1, 0.2, 0.3, 0.5):
        exact = normal_exact_moments(S2, sigma).sigma_axis
        p4 = constant_curvature_prediction(
            1, 2, sigma, "fourth", c4_numerator=c4_fit.fitted
        ).sigma_axis
        p2 = constant_curvature_prediction(1, 2, sigma, "second").sigma_axis
        e4, e2 = abs(p4 - exact), abs(p2 - exact)
        ok &= e4 <= 5 * sigma**6 and e2 <= 2 * sigma**4 and e4 < e2
        details.append(f"s={sigma}: e4={e4:.2e} e2={e2:.2e}")
    elapsed = time.perf_counter() - start
    report(2, ok and elapsed < 5.0, "; ".join(details) + f"; {elapsed:.2f} s")


def test_criterion_3_hyperbolic_prediction(c4_fit):
    start = time.perf_counter()
    ok = True
    details = []
    for sigma in (0.1, 0.2, 0.3, 0.5):
        exact_h = normal_exact_moments(H2, sigma).sigma_axis
        exact_s = normal_exact_moments(S2, sigma).sigma_axis
        p4 = constant_curvature_prediction(
            -1, 2, sigma, "fourth", c4_numerator=c4_fit.fitted
        ).sigma_axis
        p2 = constant_curvature_prediction(-1, 2, sigma, "second").sigma_axis
        e4, e2 = abs(p4 - exact_h), abs(p2 - exact_h)
        ok &= e4 <= 5 * sigma**6 and e2 <= 2 * sigma**4 and e4 < e2
        ok &= exact_h > sigma**2 and exact_s < sigma**2
        details.append(f"s={sigma}: e4={e4:.2e}")
    elapsed = time.perf_counter() - start
    report(3, ok and elapsed < 5.0, "; ".join(details) + f"; {elapsed:.2f} s")


def test_criterion_4_c4_adjudication(c4_fit, tmp_path):
    start = time.perf_counter()
    candidates = {"1/5": 0.2, "7/40": 0.175}
    matches = {
        name: abs(c4_fit.fitted - value) <= 0.005
        for name, value in candidates.items()
    }
    path = write_constants_file(c4_fit, tmp_path / "c4_constants.txt")
    stored = load_constants_file(path)
    recorded = (
        stored["c4_winner"] == c4_fit.winner
        and "c4_fitted" in stored
        and any(k.startswith("c4_candidate_") for k in stored)
        and "residual" in path.read_text()
    )
    elapsed = time.perf_counter() - start
    ok = sum(matches.values()) == 1 and recorded and elapsed < 10.0
    report(
        4,
        ok,
        f"fit {c4_fit.fitted:.5f}, winner {c4_fit.winner} "
        f"({c4_fit.winner_value:.4f}), matches {matches}, {elapsed:.2f} s",
    )


def test_criterion_5_gaussian_moment_identities():
    worst = 0.0
    for n in (1, 2, 3):
        area = unit_sphere_area(n)
        for sigma in (0.5, 1.0, 2.0):
            def radial(power):
                return area * integrate_radial(
                    lambda r: np.power(r, n - 1 + power)
                    * np.exp(-0.5 * np.square(r) / sigma**2),
                    upper=40.0 * sigma,
                )

            m = gaussian_moments(n, sigma)
            pairs = [
                (m.m_vv, radial(2) / n),
                (m.m_vv_r2, radial(4) / n),
                (m.m_r2, radial(2)),
                (m.m_r4, radial(4)),
            ]
            for got, ref in pairs:
                worst = max(worst, abs(got / ref - 1.0))
    # printed exponents are exact at n = 1
    tau = math.sqrt(2 * math.pi)
    n1_exact = True
    for sigma in (0.5, 1.0, 2.0):
        m = gaussian_moments(1, sigma)
        n1_exact &= m.m_vv == sigma**3 * tau
        n1_exact &= m.m_vv_r2 == 3 * sigma**5 * tau
        n1_exact &= m.m_r2 == sigma**3 * tau
        n1_exact &= m.m_r4 == 3 * sigma**5 * tau
    report(
        5,
        worst <= 1e-8 and n1_exact,
        f"max rel dev {worst:.2e}, printed n=1 forms exact: {n1_exact}",
    )


def test_criterion_6_frame_invariance():
    rng = np.random.default_rng(1234)
    T = np.diag([1 / 0.04, 1 / 0.01])
    base_ratio = invariant_ratio(ConcentrationTensor(T), NORMAL2, S2, POLE)
    base_norm = build_distribution(
        S2, POLE, ConcentrationTensor(T), NORMAL2
    ).norm_const
    worst_ratio = 0.0
    worst_norm = 0.0
    for _ in range(200):
        m = rng.normal(size=(2, 2))
        qmat, r = np.linalg.qr(m)
        a = qmat * np.sign(np.diag(r))
        rotated = ConcentrationTensor(a @ T @ a.T)
        ratio = invariant_ratio(rotated, NORMAL2, S2, POLE)
        worst_ratio = max(worst_ratio, float(np.max(np.abs(ratio - base_ratio))))
        norm = build_distribution(S2, POLE, rotated, NORMAL2).norm_const
        worst_norm = max(worst_norm, abs(norm - base_norm) / base_norm)
    report(
        6,
        worst_ratio <= 1e-10 and worst_norm <= 1e-10,
        f"max ratio dev {worst_ratio:.2e}, max relative norm_const dev "
        f"{worst_norm:.2e} over 200 rotations",
    )


@pytest.fixture(scope="module")
def sweep_csvs(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweeps")
    results = {}
    for name, samples, seconds in (("sphere2", 150, None), ("hyperbolic2", 200, None)):
        start = time.perf_counter()
        rows = run_sweep(SweepConfig(name, 1.0, 0.01, 50, samples, 42))
        elapsed = time.perf_counter() - start
        path = out / f"{name}.csv"
        write_csv(rows, path)
        results[name] = (rows, elapsed, path)
    return results


def test_criterion_7_figure_sweeps(sweep_csvs):
    ok = True
    details = []
    for name, (rows, elapsed, _) in sweep_csvs.items():
        hits = sum(
            1
            for r in rows
            if abs(r.sigma_hat_mean - r.exact_quadrature) <= 3 * r.sigma_hat_se
        )
        ok &= hits >= math.ceil(0.95 * len(rows)) and elapsed < 60.0
        details.append(f"{name}: {hits}/{len(rows)} rows in band, {elapsed:.1f} s")
    report(7, ok, "; ".join(details))


def test_criterion_8_normalization():
    worst = 0.0

    def manifold_integral(dist, upper, geo):
        def integrand(d):
            out = []
            for dd in np.atleast_1d(d):
                p = exp_map(
                    dist.manifold, dist.center,
                    tangent(dist.manifold, dist.center, [float(dd), 0.0]),
                )
                out.append(density_at(dist, p) * geo(dd))
            return np.asarray(out)

        return 2 * math.pi * integrate_radial(integrand, upper=upper)

    for M, q, geo in ((S2, POLE, math.sin), (H2, APEX, math.sinh)):
        for sigma in (0.1, 0.3, 1.0):
            dist = build_distribution(
                M, q, isotropic_tensor(2, sigma**-2), NORMAL2
            )
            upper = math.pi if M is S2 else dist.trunc_radius
            worst = max(worst, abs(manifold_integral(dist, upper, geo) - 1.0))
        for kappa in (0.5, 10.0):
            dist = build_distribution(
                M, q, isotropic_tensor(2, 1.0),
                make_profile("vmf", 2, kappa=kappa),
            )
            worst = max(worst, abs(manifold_integral(dist, math.pi, geo) - 1.0))
    report(8, worst <= 1e-8, f"max |integral - 1| = {worst:.2e}")


def test_criterion_9_sampler_goodness_of_fit():
    ok = True
    details = []
    for M, q in ((S2, POLE), (H2, APEX)):
        dist = build_distribution(M, q, isotropic_tensor(2, 0.3**-2), NORMAL2)
        batch = sample(dist, 4242, 100_000)
        coords = np.array([p.coords for p in batch.points])
        if M is S2:
            distances = np.arccos(np.clip(coords @ q.coords, -1.0, 1.0))
        else:
            c = -(coords[:, :2] @ q.coords[:2] - coords[:, 2] * q.coords[2])
            distances = np.arccosh(np.maximum(c, 1.0))
        table = radial_cdf_table(dist)
        d_sorted = np.sort(distances)
        n = len(d_sorted)
        f = table.cdf(d_sorted)
        steps = np.arange(1, n + 1) / n
        ks = max(np.max(np.abs(steps - f)), np.max(np.abs(steps - 1 / n - f)))
        threshold = KS_COEFF_0001 / math.sqrt(n)
        ok &= ks < threshold
        details.append(f"{M.kind.value}: KS={ks:.4f} < {threshold:.4f}")
    report(9, ok, "; ".join(details))
