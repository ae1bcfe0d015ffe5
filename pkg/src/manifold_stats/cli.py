"""Command-line harness for predictions, moment tables and simulation sweeps."""

from __future__ import annotations

import argparse
import sys

from .covariance import (
    DEFAULT_CONSTANTS_PATH,
    alternate_c4_numerator,
    constant_curvature_prediction,
    load_constants_file,
)
from .distributions import build_distribution, isotropic_tensor, make_profile
from .errors import (
    ApproximationRangeError,
    CutLocusError,
    InvalidPointError,
    QuadratureError,
    UnsupportedCombinationError,
)
from .manifolds import tangent, exp_map
from .quadrature import (
    DEFAULT_SPEC,
    c4_alternate,
    gaussian_moments,
    integrate_radial,
)
from .sweep import SweepConfig, resolve_c4, run_sweep, write_csv

_NUMERIC_ERRORS = (
    QuadratureError,
    ApproximationRangeError,
    UnsupportedCombinationError,
    CutLocusError,
    InvalidPointError,
    ValueError,
)


def _fmt(x: float) -> str:
    return format(x, ".9g")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manifold-stats",
        description="Centered distributions on constant-curvature surfaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a sigma sweep and write a CSV")
    sweep.add_argument("--manifold", required=True,
                       choices=["sphere2", "hyperbolic2", "euclidean2"])
    sweep.add_argument("--sigma-max", type=float, required=True)
    sweep.add_argument("--sigma-min", type=float, required=True)
    sweep.add_argument("--points", type=int, default=50)
    sweep.add_argument("--samples", type=int, default=150)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--order", choices=["second", "fourth"], default="fourth")
    sweep.add_argument("--c4", choices=["paper", "fitted"], default="fitted",
                       help="sigma^4 coefficient: published value or oracle fit")
    sweep.add_argument("--out", required=True)

    predict = sub.add_parser("predict", help="print both prediction polynomials")
    predict.add_argument("--curvature", type=int, required=True,
                         choices=[-1, 0, 1])
    predict.add_argument("--n", type=int, required=True)
    predict.add_argument("--sigma", type=float, required=True)
    predict.add_argument("--c4", choices=["paper", "fitted"], default="fitted")

    moments = sub.add_parser("moments", help="print the Gaussian integral table")
    moments.add_argument("--n", type=int, required=True)
    moments.add_argument("--sigma", type=float, required=True)

    dens = sub.add_parser("density-check",
                          help="print the normalization integral of a build")
    dens.add_argument("--manifold", required=True,
                      choices=["sphere2", "hyperbolic2", "euclidean2"])
    dens.add_argument("--kind", choices=["normal", "vmf", "gamma"],
                      default="normal")
    dens.add_argument("--sigma", type=float, default=0.3)
    dens.add_argument("--kappa", type=float, default=1.0)
    dens.add_argument("--shape", type=float, default=1.0)
    dens.add_argument("--scale", type=float, default=1.0)
    return parser


def _load_constants() -> dict | None:
    if DEFAULT_CONSTANTS_PATH.exists():
        try:
            return load_constants_file(DEFAULT_CONSTANTS_PATH)
        except (OSError, ValueError):
            return None
    return None


def _cmd_sweep(args) -> int:
    cfg = SweepConfig(
        manifold=args.manifold,
        sigma_max=args.sigma_max,
        sigma_min=args.sigma_min,
        points=args.points,
        samples_per_sigma=args.samples,
        base_seed=args.seed,
        order=args.order,
        c4_source=args.c4,
        out_path=args.out,
    )
    rows = run_sweep(cfg, constants=_load_constants())
    write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_predict(args) -> int:
    c4 = resolve_c4(args.c4, args.n, _load_constants())
    second = constant_curvature_prediction(args.curvature, args.n, args.sigma,
                                           "second")
    fourth = constant_curvature_prediction(args.curvature, args.n, args.sigma,
                                           "fourth", c4_numerator=c4)
    print(f"second_order {_fmt(second.sigma_axis)}")
    print(f"fourth_order {_fmt(fourth.sigma_axis)} (c4 {args.c4} = {_fmt(c4)})")
    print(f"k_inv_second {_fmt(second.k_inv)}")
    print(f"k_inv_fourth {_fmt(fourth.k_inv)}")
    return 0


def _cmd_moments(args) -> int:
    n, sigma = args.n, args.sigma
    cur = gaussian_moments(n, sigma)
    alt = gaussian_moments(n, sigma, c4=c4_alternate(n))
    tau = (2.0 * 3.141592653589793) ** (0.5 * n)
    printed = {
        "i": sigma**3 * tau,
        "ii": (n + 2) * sigma**5 * tau,
        "iii": n * sigma**3 * tau,
        "iv": alt.m_vv_r4,
        "v": n * (n + 2) * sigma**5 * tau,
    }
    corrected = {
        "i": cur.m_vv, "ii": cur.m_vv_r2, "iii": cur.m_r2,
        "iv": cur.m_vv_r4, "v": cur.m_r4,
    }
    for key in ("i", "ii", "iii", "iv", "v"):
        line = f"({key}) corrected {_fmt(corrected[key])}"
        if abs(printed[key] - corrected[key]) > 1e-12 * abs(corrected[key]):
            line += f"  printed-form {_fmt(printed[key])}"
        print(line)
    return 0


def _cmd_density_check(args) -> int:
    from .manifolds import sphere, hyperbolic, euclidean, point_on, ManifoldKind
    from .quadrature import unit_sphere_area
    import numpy as np

    factory = {"sphere2": sphere, "hyperbolic2": hyperbolic,
               "euclidean2": euclidean}[args.manifold]
    manifold = factory(2)
    q = point_on(manifold,
                 [0.0, 0.0] if args.manifold == "euclidean2" else [0.0, 0.0, 1.0])
    if args.kind == "normal":
        profile = make_profile("normal", 2)
        tensor = isotropic_tensor(2, args.sigma**-2)
    elif args.kind == "vmf":
        profile = make_profile("vmf", 2, kappa=args.kappa)
        tensor = isotropic_tensor(2, 1.0)
    else:
        profile = make_profile("gamma", 2, shape=args.shape, scale=args.scale)
        tensor = isotropic_tensor(2, 1.0)
    dist = build_distribution(manifold, q, tensor, profile)

    from .distributions import density_at

    if manifold.kind is ManifoldKind.SPHERE:
        upper = float(np.pi) - 1e-9
    else:
        upper = dist.trunc_radius

    def integrand(d):
        out = []
        for dd in np.atleast_1d(d):
            p = exp_map(manifold, q, tangent(manifold, q, [float(dd), 0.0]))
            geo = {
                ManifoldKind.SPHERE: np.sin,
                ManifoldKind.HYPERBOLIC: np.sinh,
                ManifoldKind.EUCLIDEAN: lambda x: x,
            }[manifold.kind](dd)
            out.append(density_at(dist, p) * unit_sphere_area(2) * geo)
        return np.asarray(out)

    total = integrate_radial(integrand, DEFAULT_SPEC, upper=upper)
    print(f"normalization_integral {_fmt(total)}")
    print(f"norm_const {_fmt(dist.norm_const)}  fold_radius {_fmt(dist.fold_radius)}")
    return 0


def main(argv=None) -> int:
    """Entry point; returns 0 on success, 2 on usage error, 1 on numerical
    failure."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "sweep": _cmd_sweep,
        "predict": _cmd_predict,
        "moments": _cmd_moments,
        "density-check": _cmd_density_check,
    }
    try:
        return handlers[args.command](args)
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
