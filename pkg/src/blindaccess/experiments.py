"""Monte-Carlo sweep harness over the (mu, sigma, s) grid.

Each grid cell runs independent planted trials; trial seeds are derived
from the master seed and the cell coordinates, so results do not depend on
execution order and a repeated sweep reproduces itself exactly. Records
are emitted in grid order (mu outermost, then sigma, then s).
"""

from __future__ import annotations

import csv
import itertools
import time
import warnings
from dataclasses import dataclass

from . import seeds
from .measurement import ModelDims
from .protocol import KeyQuantizer, make_instance
from .solver import SolverConfig, evaluate_success, hihtp

CSV_HEADER = (
    "mu,sigma,s,trials,successes,success_rate,mean_iterations,"
    "mean_residual,mean_runtime_ms,key_bits"
)


def _parse_range(spec) -> tuple[int, ...]:
    """Accept a list of values or an inclusive {start, stop, step} mapping."""
    if isinstance(spec, dict):
        start, stop = int(spec["start"]), int(spec["stop"])
        step = int(spec.get("step", 1))
        if step < 1:
            raise ValueError(f"range step must be >= 1, got {step}")
        return tuple(range(start, stop + 1, step))
    values = tuple(int(v) for v in spec)
    return values


@dataclass(frozen=True)
class SweepGrid:
    """Sweep specification: dimensions, ranges, trial count, master seed."""

    dims: ModelDims
    mu_range: tuple[int, ...]
    sigma_range: tuple[int, ...]
    s_range: tuple[int, ...]
    trials: int
    seed: int = 0
    snr_db: float | None = None
    field: str = "real"
    quantizer: KeyQuantizer = KeyQuantizer()
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for name in ("mu_range", "sigma_range", "s_range"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} must be non-empty")

    @classmethod
    def from_mapping(cls, cfg: dict) -> "SweepGrid":
        """Build from a JSON-compatible mapping; see README for the keys."""
        dims = ModelDims(
            N=int(cfg["N"]), N_d=int(cfg["N_d"]), E=int(cfg["E"]), N_r=int(cfg["N_r"])
        )
        quant = cfg.get("quantizer") or {}
        return cls(
            dims=dims,
            mu_range=_parse_range(cfg["mu_range"]),
            sigma_range=_parse_range(cfg["sigma_range"]),
            s_range=_parse_range(cfg["s_range"]),
            trials=int(cfg["trials"]),
            seed=int(cfg.get("seed", 0)),
            snr_db=None if cfg.get("snr_db") is None else float(cfg["snr_db"]),
            field=cfg.get("field", "real"),
            quantizer=KeyQuantizer(
                bits=int(quant.get("bits", 2)), clip=float(quant.get("clip", 3.0))
            ),
        )

    def cells(self):
        return itertools.product(self.mu_range, self.sigma_range, self.s_range)


@dataclass
class SweepRecord:
    """One phase-diagram cell: recovery statistics and the key-bit budget."""

    mu: int
    sigma: int
    s: int
    trials: int
    successes: int
    success_rate: float
    mean_iterations: float
    mean_residual: float
    mean_runtime_ms: float
    key_bits: int

    def as_row(self) -> list[str]:
        return [
            str(self.mu),
            str(self.sigma),
            str(self.s),
            str(self.trials),
            str(self.successes),
            repr(float(self.success_rate)),
            repr(float(self.mean_iterations)),
            repr(float(self.mean_residual)),
            repr(float(self.mean_runtime_ms)),
            str(self.key_bits),
        ]


def run_trial(grid: SweepGrid, mu: int, sigma: int, s: int, trial: int):
    """One planted solve; returns (success report, solver runtime seconds).

    The trial seed is ``derive_seed(master, TRIAL, mu, sigma, s, trial)``,
    so any cell or trial can be reproduced in isolation. Timing covers the
    solver call only, not instance generation.
    """
    trial_seed = seeds.derive_seed(grid.seed, seeds.TRIAL, mu, sigma, s, trial)
    instance = make_instance(
        grid.dims, s=s, sigma=sigma, mu=mu, seed=trial_seed,
        field=grid.field, snr_db=grid.snr_db,
    )
    start = time.perf_counter()
    result = hihtp(instance.op, instance.y, instance.profile, grid.solver)
    elapsed = time.perf_counter() - start
    return evaluate_success(result, instance, grid.solver.residual_tol), elapsed


def sweep(
    grid: SweepGrid, measure_runtime: bool = True, collect_trials: bool = False
):
    """Run every cell of the grid.

    Returns the list of records, or (records, trial log) when
    ``collect_trials`` is set; the log holds one (mu, sigma, s, trial,
    success) tuple per solve. With ``measure_runtime`` off the runtime
    column is reported as 0.0, which makes the output byte-stable across
    runs.
    """
    records: list[SweepRecord] = []
    trial_log: list[tuple[int, int, int, int, bool]] = []
    components = 2 if grid.field == "complex" else 1
    for mu, sigma, s in grid.cells():
        key_bits = sigma * grid.quantizer.bits * components
        if sigma > grid.dims.N_d or s > grid.dims.E or mu > grid.dims.N_r:
            warnings.warn(
                f"cell (mu={mu}, sigma={sigma}, s={s}) infeasible for {grid.dims}; skipped"
            )
            records.append(
                SweepRecord(mu, sigma, s, 0, 0, 0.0, 0.0, 0.0, 0.0, key_bits)
            )
            continue
        successes = 0
        iter_sum = 0
        residual_sum = 0.0
        runtime_sum = 0.0
        for trial in range(grid.trials):
            report, elapsed = run_trial(grid, mu, sigma, s, trial)
            successes += report.success
            iter_sum += report.iterations
            residual_sum += report.residual_norm
            runtime_sum += elapsed
            if collect_trials:
                trial_log.append((mu, sigma, s, trial, report.success))
        records.append(
            SweepRecord(
                mu=mu,
                sigma=sigma,
                s=s,
                trials=grid.trials,
                successes=successes,
                success_rate=successes / grid.trials,
                mean_iterations=iter_sum / grid.trials,
                mean_residual=residual_sum / grid.trials,
                mean_runtime_ms=(runtime_sum / grid.trials) * 1e3 if measure_runtime else 0.0,
                key_bits=key_bits,
            )
        )
    if collect_trials:
        return records, trial_log
    return records


def emit_csv(records, path) -> None:
    """Write records under the fixed header, one row per record.

    Floats use shortest round-trip notation with a decimal point and no
    locale formatting, so identical records produce identical bytes.
    """
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for record in records:
            fh.write(",".join(record.as_row()) + "\n")


def read_csv(path) -> list[SweepRecord]:
    """Parse a file written by :func:`emit_csv` back into records."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER.split(","):
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [
            SweepRecord(
                mu=int(row["mu"]),
                sigma=int(row["sigma"]),
                s=int(row["s"]),
                trials=int(row["trials"]),
                successes=int(row["successes"]),
                success_rate=float(row["success_rate"]),
                mean_iterations=float(row["mean_iterations"]),
                mean_residual=float(row["mean_residual"]),
                mean_runtime_ms=float(row["mean_runtime_ms"]),
                key_bits=int(row["key_bits"]),
            )
            for row in reader
        ]
