"""Render variance-sweep CSVs as figures, re-asserting the statistical bands.

The input schema is the sweep CSV produced by the manifold-stats CLI:

    sigma,predicted_second,predicted_fourth,exact_quadrature,
    sigma_hat_mean,sigma_hat_se,n_samples,seed

The renderer validates the data before touching the plotting backend: at
least 95% of rows must place the estimate within 3 standard errors of the
fourth-order prediction, and the prediction curve must sit consistently on
one side of the sigma^2 reference.  A figure is only written when the
checks pass, which makes the image a certified artifact rather than a
cosmetic one.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

EXPECTED_HEADER = [
    "sigma",
    "predicted_second",
    "predicted_fourth",
    "exact_quadrature",
    "sigma_hat_mean",
    "sigma_hat_se",
    "n_samples",
    "seed",
]

BAND_FRACTION = 0.95
BAND_WIDTH_SE = 3.0


class CsvFormatError(ValueError):
    """Malformed sweep CSV; ``row`` is the 1-based offending line number."""

    def __init__(self, message: str, row: int):
        super().__init__(f"row {row}: {message}")
        self.row = row


class BandCheckError(ValueError):
    """Parsed data violates the certification bands."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    out_path: str
    title: str = ""
    show_second_order: bool = False


@dataclass(frozen=True)
class SweepData:
    sigma: list[float]
    predicted_second: list[float]
    predicted_fourth: list[float]
    exact_quadrature: list[float]
    sigma_hat_mean: list[float]
    sigma_hat_se: list[float]


def parse_csv(path: str | Path) -> SweepData:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such CSV: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("empty file, expected header", row=1) from None
        if header != EXPECTED_HEADER:
            raise CsvFormatError(
                f"header {header!r} does not match the sweep schema", row=1
            )
        columns: list[list[float]] = [[] for _ in range(6)]
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(EXPECTED_HEADER):
                raise CsvFormatError(
                    f"expected {len(EXPECTED_HEADER)} fields, got {len(record)}",
                    row=lineno,
                )
            try:
                values = [float(v) for v in record[:6]]
                int(record[6]), int(record[7])
            except ValueError as exc:
                raise CsvFormatError(str(exc), row=lineno) from None
            if values[0] <= 0:
                raise CsvFormatError("sigma must be positive", row=lineno)
            if any(v < 0 for v in values[1:]):
                raise CsvFormatError("negative variance field", row=lineno)
            for col, v in zip(columns, values):
                col.append(v)
    if not columns[0]:
        raise CsvFormatError("no data rows after the header", row=2)
    return SweepData(*columns)


def check_bands(data: SweepData) -> dict:
    """Certification checks; raises :class:`BandCheckError` on violation.

    Returns a summary dict (rows, in-band count, curve side) for reporting.
    """
    n = len(data.sigma)
    in_band = sum(
        1
        for mean, pred, se in zip(
            data.sigma_hat_mean, data.predicted_fourth, data.sigma_hat_se
        )
        if abs(mean - pred) <= BAND_WIDTH_SE * se
    )
    if in_band < math.ceil(BAND_FRACTION * n):
        raise BandCheckError(
            f"only {in_band}/{n} rows have the estimate within "
            f"{BAND_WIDTH_SE:g} SE of the prediction"
        )
    sides = [
        pred - s * s
        for s, pred in zip(data.sigma, data.predicted_fourth)
        if abs(pred - s * s) > 1e-15 * max(1.0, s * s)
    ]
    side = 0
    if sides:
        side = 1 if sides[0] > 0 else -1
        if any((v > 0) != (side > 0) for v in sides):
            raise BandCheckError(
                "prediction curve crosses the sigma^2 reference; "
                "mixed-curvature data is not a valid sweep"
            )
    return {"rows": n, "in_band": in_band, "side": side}


def render_figure(spec: PlotSpec) -> dict:
    """Validate the CSV, then write the comparison figure to ``out_path``.

    Series: blue sigma^2 reference markers, green fourth-order prediction
    curve, red estimates with error bars (optionally the dashed second-order
    curve).  The x-axis runs with sigma descending, matching the sweep
    direction.  Never modifies the input file.
    """
    data = parse_csv(spec.csv_path)
    summary = check_bands(data)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ref = [s * s for s in data.sigma]
    ax.plot(data.sigma, ref, "o", color="tab:blue", markersize=3.5,
            label=r"$\sigma^2$ reference")
    ax.plot(data.sigma, data.predicted_fourth, "-", color="tab:green",
            linewidth=1.6, label="fourth-order prediction")
    if spec.show_second_order:
        ax.plot(data.sigma, data.predicted_second, "--", color="tab:olive",
                linewidth=1.2, label="second-order prediction")
    ax.errorbar(data.sigma, data.sigma_hat_mean, yerr=data.sigma_hat_se,
                fmt=".", color="tab:red", elinewidth=0.9, capsize=2.0,
                label=r"$\hat\sigma^2$ estimate")
    ax.set_xlabel(r"$\sigma$ (descending)")
    ax.set_ylabel("per-axis variance")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.invert_xaxis()
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="best", fontsize=9)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    # fixed metadata keeps the PNG byte-deterministic across runs
    fig.savefig(spec.out_path, dpi=150, metadata={"Software": "figplots"})
    plt.close(fig)
    return summary
