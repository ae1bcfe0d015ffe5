"""Certified rendering of variance-sweep CSV files."""

from .render import (
    BandCheckError,
    CsvFormatError,
    PlotSpec,
    SweepData,
    check_bands,
    parse_csv,
    render_figure,
)

__version__ = "0.1.0"
