"""Grid sweeps: specification, deterministic parallel evaluation, atomic output."""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .. import __version__
from ..errors import BellQPTError
from ..thermal import beta_from_gap_fraction
from .rows import ResultRow, compute_row, ordered_columns, render

DEFAULT_COLUMNS = ("q_mu_exact", "q_mu_analytic")


@dataclass(frozen=True)
class GammaRange:
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        """start, start+step, ... up to and including stop (within 1e-9 steps)."""
        count = math.floor((self.stop - self.start) / self.step + 1e-9)
        # rounding strips the representation noise of start + i*step
        return [round(self.start + i * self.step, 12) for i in range(count + 1)]


@dataclass(frozen=True)
class GapFractionRule:
    fraction: float
    reference_gamma: float


@dataclass(frozen=True)
class SweepSpec:
    n_list: tuple
    gamma_grid: object  # GammaRange or tuple of floats
    beta_spec: object = None  # tuple of floats, GapFractionRule, or None for T = 0
    columns: tuple = DEFAULT_COLUMNS
    output_path: str | None = None
    format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if not self.n_list or any(int(n) != n or n < 1 for n in self.n_list):
            raise ValueError("n_list must be a non-empty list of positive integers")
        if isinstance(self.gamma_grid, GammaRange):
            if not self.gamma_grid.step > 0:
                raise ValueError(f"gamma step must be > 0, got {self.gamma_grid.step}")
            if self.gamma_grid.stop < self.gamma_grid.start:
                raise ValueError("gamma grid is empty (stop < start)")
        elif not self.gamma_grid:
            raise ValueError("gamma grid is empty")
        if isinstance(self.beta_spec, GapFractionRule):
            if not 0 < self.beta_spec.fraction <= 1:
                raise ValueError(f"gap fraction must lie in (0, 1], got {self.beta_spec.fraction}")
        elif self.beta_spec is not None:
            if not self.beta_spec:
                raise ValueError("beta list is empty")
            if any(not b >= 0 for b in self.beta_spec):
                raise ValueError("beta values must be >= 0")
        ordered_columns(self.columns)
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def gammas(self) -> list[float]:
        if isinstance(self.gamma_grid, GammaRange):
            return self.gamma_grid.values()
        return sorted(set(float(g) for g in self.gamma_grid))

    def canonical(self) -> dict:
        """Everything that determines the output bytes (not workers or path)."""
        if isinstance(self.beta_spec, GapFractionRule):
            beta = {"fraction": self.beta_spec.fraction, "reference_gamma": self.beta_spec.reference_gamma}
        elif self.beta_spec is None:
            beta = None
        else:
            beta = [repr(float(b)) for b in sorted(self.beta_spec)]
        return {
            "n_list": sorted(int(n) for n in self.n_list),
            "gammas": [repr(g) for g in self.gammas()],
            "beta": beta,
            "columns": ordered_columns(self.columns),
            "format": self.format,
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def betas_for(spec: SweepSpec, N: int) -> list[float]:
    if spec.beta_spec is None:
        return [math.inf]
    if isinstance(spec.beta_spec, GapFractionRule):
        return [beta_from_gap_fraction(N, spec.beta_spec.fraction, spec.beta_spec.reference_gamma)]
    return sorted(float(b) for b in spec.beta_spec)


def grid_points(spec: SweepSpec) -> list[tuple[int, float, float]]:
    """All (N, gamma, beta) in lexicographic order."""
    gammas = spec.gammas()
    points = []
    for N in sorted(set(int(n) for n in spec.n_list)):
        betas = betas_for(spec, N)
        points.extend((N, g, b) for g in gammas for b in betas)
    return points


def evaluate_point(task) -> ResultRow:
    """Worker entry point; computation errors are captured in the row."""
    N, gamma, beta, columns = task
    try:
        return compute_row(N, gamma, beta, columns)
    except (BellQPTError, ValueError, ArithmeticError) as exc:
        return ResultRow(N, gamma, beta, error=f"{type(exc).__name__}: {exc}")


def run_points(points, columns, workers: int = 1) -> list[ResultRow]:
    tasks = [(N, g, b, tuple(columns)) for N, g, b in points]
    if workers <= 1 or len(tasks) <= 1:
        return [evaluate_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        # map preserves input order regardless of completion order
        return list(pool.map(evaluate_point, tasks, chunksize=1))


def sweep_metadata(spec: SweepSpec, columns) -> dict:
    return {
        "bellqpt": __version__,
        "spec_sha256": spec.digest(),
        "columns": ",".join(columns) + ",error",
        "units": "Omega=1,U=gamma/N",
    }


def write_atomic(path, text: str) -> None:
    """Write via a temporary sibling file and rename; nothing is left on failure."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def run_sweep(spec: SweepSpec) -> str:
    """Evaluate the grid and return the rendered text (also written to ``output_path``)."""
    columns = ordered_columns(spec.columns)
    rows = run_points(grid_points(spec), columns, spec.workers)
    text = render(rows, columns, spec.format, meta=sweep_metadata(spec, columns), with_error=True)
    if spec.output_path not in (None, "-"):
        write_atomic(spec.output_path, text)
    return text
