"""Phase-diagram heatmaps from sweep CSV files.

Input is the delimited sweep output: one row per (mu, sigma, s) cell under
the fixed header below. Each distinct mu becomes one panel with channel
sparsity sigma on the horizontal axis and signal sparsity s on the
vertical axis; cell color is the chosen value column on a fixed [0, 1]
scale so panels stay comparable, and grid cells absent from the file
render in a distinct no-data color.

Rendering is a pure function of the input file: backend, fonts and dpi are
pinned, so identical CSV bytes produce identical PNG bytes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

EXPECTED_HEADER = [
    "mu",
    "sigma",
    "s",
    "trials",
    "successes",
    "success_rate",
    "mean_iterations",
    "mean_residual",
    "mean_runtime_ms",
    "key_bits",
]

NO_DATA_COLOR = "#d0d0d0"

_RC = {
    "font.family": "DejaVu Sans",
    "font.size": 11,
    "figure.dpi": 100,
    "savefig.dpi": 150,
}


class CsvFormatError(ValueError):
    """Input file does not match the sweep CSV schema."""


def load_records(path) -> list[dict]:
    """Rows of a sweep CSV as typed dicts.

    The header must match the schema exactly; the error names the first
    offending column. Row errors carry the 1-based line number.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, expected header row")
        if header != EXPECTED_HEADER:
            for pos, want in enumerate(EXPECTED_HEADER):
                got = header[pos] if pos < len(header) else "<missing>"
                if got != want:
                    raise CsvFormatError(
                        f"{path}: header column {pos + 1} is {got!r}, expected {want!r}"
                    )
            raise CsvFormatError(
                f"{path}: header has {len(header)} columns, expected "
                f"{len(EXPECTED_HEADER)}"
            )
        records = []
        for line_number, row in enumerate(reader, start=2):
            if len(row) != len(EXPECTED_HEADER):
                raise CsvFormatError(
                    f"{path}: row {line_number} has {len(row)} fields, expected "
                    f"{len(EXPECTED_HEADER)}"
                )
            try:
                record = {
                    "mu": int(row[0]),
                    "sigma": int(row[1]),
                    "s": int(row[2]),
                    "trials": int(row[3]),
                    "successes": int(row[4]),
                    "success_rate": float(row[5]),
                    "mean_iterations": float(row[6]),
                    "mean_residual": float(row[7]),
                    "mean_runtime_ms": float(row[8]),
                    "key_bits": int(row[9]),
                }
            except ValueError as exc:
                raise CsvFormatError(f"{path}: row {line_number}: {exc}") from exc
            records.append(record)
    return records


@dataclass(frozen=True)
class HeatmapSpec:
    """What to render: input CSV, value column, captions, output location."""

    csv_path: str
    value_column: str = "success_rate"
    total_users: int | None = None
    out_dir: str | None = None

    def __post_init__(self):
        if self.value_column not in EXPECTED_HEADER[3:]:
            raise CsvFormatError(
                f"value column {self.value_column!r} not in the sweep schema"
            )

    @property
    def output_dir(self) -> Path:
        # default: next to the CSV, so figures land alongside the data
        if self.out_dir is not None:
            return Path(self.out_dir)
        return Path(self.csv_path).resolve().parent


def pivot(records, value_column: str = "success_rate"):
    """Per-mu grids: mu -> (sigma values, s values, masked value grid).

    Grid rows follow s (vertical axis), columns follow sigma (horizontal
    axis); combinations missing from the records stay masked.
    """
    mus = sorted({r["mu"] for r in records})
    sigmas = sorted({r["sigma"] for r in records})
    ss = sorted({r["s"] for r in records})
    panels = {}
    for mu in mus:
        grid = np.ma.masked_all((len(ss), len(sigmas)))
        for r in records:
            if r["mu"] != mu:
                continue
            grid[ss.index(r["s"]), sigmas.index(r["sigma"])] = r[value_column]
        panels[mu] = (sigmas, ss, grid)
    return panels


def panel_title(mu: int, total_users: int | None) -> str:
    if total_users is None:
        return f"Recovery rate for {mu} active users"
    return f"Recovery rate for {mu} of {total_users} active users"


def build_figure(mu, sigmas, ss, grid, total_users=None, value_column="success_rate"):
    """One panel as a matplotlib figure; caller owns closing it."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.8, 4.0))
        cmap = plt.get_cmap("viridis").copy()
        cmap.set_bad(NO_DATA_COLOR)
        image = ax.imshow(
            grid,
            origin="lower",
            cmap=cmap,
            vmin=0.0,
            vmax=1.0,
            aspect="equal",
            interpolation="nearest",
        )
        ax.set_xticks(range(len(sigmas)), labels=[str(v) for v in sigmas])
        ax.set_yticks(range(len(ss)), labels=[str(v) for v in ss])
        ax.set_xlabel("channel sparsity $\\sigma$")
        ax.set_ylabel("signal sparsity $s$")
        ax.set_title(panel_title(mu, total_users))
        fig.colorbar(image, ax=ax, label=value_column)
        fig.tight_layout()
    return fig


def render(spec: HeatmapSpec) -> list[Path]:
    """Write one PNG per mu value; returns the paths in mu order."""
    records = load_records(spec.csv_path)
    panels = pivot(records, spec.value_column)
    out_dir = spec.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for mu, (sigmas, ss, grid) in sorted(panels.items()):
        fig = build_figure(mu, sigmas, ss, grid, spec.total_users, spec.value_column)
        path = out_dir / f"recovery_rate_mu{mu}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
