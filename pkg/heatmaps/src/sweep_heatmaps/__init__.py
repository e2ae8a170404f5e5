"""Phase-diagram heatmaps from sweep CSV files."""

from .render import (
    EXPECTED_HEADER,
    CsvFormatError,
    HeatmapSpec,
    build_figure,
    load_records,
    panel_title,
    pivot,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_HEADER",
    "CsvFormatError",
    "HeatmapSpec",
    "build_figure",
    "load_records",
    "panel_title",
    "pivot",
    "render",
]
