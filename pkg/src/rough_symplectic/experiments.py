"""Desk-scale numerical studies built on the integrators.

Three harnesses:

* convergence_experiment: pathwise maximum error against a reference over
  a dyadic ladder of step sizes, all derived from ONE sample path per path
  index via coarsening, with a log-log least-squares slope per path.
* area_evolution: push a square of initial values through the flow and
  track its phase-plane area (shoelace formula on the evolved boundary
  polygon).  Symplectic schemes keep the area at 1; the explicit step-2
  and step-3 baselines inflate and deflate it respectively.
* invariant_drift: signed deviation |Y_k| - |z| along one trajectory,
  which the midpoint scheme keeps at rounding level on the Kubo system.

Per-path seeds are seed + path_index, so adding paths never reshuffles
earlier ones, and path-level work can be distributed across processes with
results independent of the worker count.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .integrators import (
    NonConvergence,
    SolverConfig,
    Trajectory,
    integrate,
    scheme_from_name,
)
from .paths import FbmConfig, SamplePath, coarsen, sample_fbm
from .systems import SystemSpec, system_from_name

__all__ = [
    "ConvergenceConfig",
    "PathResult",
    "SchemeReport",
    "ConvergenceReport",
    "AreaSeries",
    "convergence_experiment",
    "area_evolution",
    "invariant_drift",
    "fit_slope",
    "zero_noise_path",
    "square_boundary",
    "shoelace_area",
    "write_convergence_csv",
    "write_area_csv",
    "write_drift_csv",
]

_REFERENCES = ("exact", "fine-grid")


@dataclass(frozen=True)
class ConvergenceConfig:
    """Grid of one convergence study.

    Step sizes run over dyadic levels: level l means 2^l grid intervals on
    [0, horizon].  Levels coarsest_level..finest_level are measured; the
    per-path driver is sampled once at the reference grid (the finest
    tested grid for an exact reference) and coarsened down, so every step
    size sees the same noise.

    reference "exact" compares against the system's closed-form solution;
    "fine-grid" compares against reference_scheme integrated at
    reference_level (defaults to finest_level + 2).

    zero_noise replaces the Gaussian channels by zeros (the time channel
    stays), turning the study into a deterministic ODE sanity anchor.
    """

    system: str
    schemes: tuple[str, ...]
    hurst: float
    horizon: float
    initial: tuple[float, ...]
    coarsest_level: int
    finest_level: int
    paths: int
    seed: int
    reference: str = "exact"
    reference_scheme: str = "method-1"
    reference_level: Optional[int] = None
    epsilon: float = 1.0
    dims: int = 3
    zero_noise: bool = False
    solver_tolerance: float = 1e-12
    solver_max_iterations: int = 100

    def __post_init__(self) -> None:
        if isinstance(self.schemes, str):
            raise TypeError("schemes must be a sequence of scheme names")
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "initial", tuple(float(v) for v in self.initial))
        if not self.schemes:
            raise ValueError("schemes must not be empty")
        if not 0.0 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (0, 1), got {self.hurst}")
        if self.horizon <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.coarsest_level < 1:
            raise ValueError("coarsest_level must be >= 1")
        if self.coarsest_level >= self.finest_level:
            raise ValueError(
                f"coarsest_level {self.coarsest_level} must be below "
                f"finest_level {self.finest_level}"
            )
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.reference not in _REFERENCES:
            raise ValueError(
                f"unknown reference {self.reference!r}; choose from {', '.join(_REFERENCES)}"
            )
        if self.reference_level is not None and self.reference_level <= self.finest_level:
            raise ValueError("reference_level must exceed finest_level")

    @property
    def resolved_reference_level(self) -> int:
        if self.reference == "exact":
            return self.finest_level
        if self.reference_level is not None:
            return self.reference_level
        return self.finest_level + 2

    def solver(self) -> SolverConfig:
        return SolverConfig(self.solver_tolerance, self.solver_max_iterations)


@dataclass(frozen=True)
class PathResult:
    """Errors of one scheme on one path across the step-size ladder."""

    path_index: int
    seed: int
    points: tuple[tuple[float, float], ...]
    excluded: tuple[tuple[float, str], ...]
    slope: float


@dataclass(frozen=True)
class SchemeReport:
    scheme: str
    paths: tuple[PathResult, ...]
    median_slope: float


@dataclass(frozen=True)
class ConvergenceReport:
    config: ConvergenceConfig
    schemes: tuple[SchemeReport, ...]

    def scheme_report(self, name: str) -> SchemeReport:
        for report in self.schemes:
            if report.scheme == name:
                return report
        raise KeyError(f"no report for scheme {name!r}")


def fit_slope(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(h).

    A zero error cannot enter the log fit; it means the scheme is exact on
    this data, reported as the infinite-order sentinel math.inf.
    """
    pts = list(points)
    if len(pts) < 2:
        raise ValueError(f"need at least 2 points to fit a slope, got {len(pts)}")
    h = np.array([p[0] for p in pts], dtype=np.float64)
    err = np.array([p[1] for p in pts], dtype=np.float64)
    if np.any(h <= 0.0) or np.any(err < 0.0):
        raise ValueError("step sizes must be positive and errors nonnegative")
    if np.any(err == 0.0):
        return math.inf
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def zero_noise_path(dims: int, horizon: float, steps: int) -> SamplePath:
    """Driver whose Gaussian channels are identically zero."""
    h = horizon / steps
    times = np.arange(steps + 1, dtype=np.float64) * h
    values = np.zeros((steps + 1, dims + 1))
    values[:, 0] = times
    return SamplePath(times=times, values=values, hurst=0.5, seed=0)


def _sample_driver(cfg: ConvergenceConfig, system: SystemSpec, index: int) -> SamplePath:
    steps = 2**cfg.resolved_reference_level
    if cfg.zero_noise:
        return zero_noise_path(system.noise_dim, cfg.horizon, steps)
    fbm = FbmConfig(
        hurst=cfg.hurst,
        dims=system.noise_dim,
        horizon=cfg.horizon,
        steps=steps,
        seed=cfg.seed + index,
    )
    return sample_fbm(fbm)


def _exact_on_grid(system: SystemSpec, z: np.ndarray, path: SamplePath) -> np.ndarray:
    states = np.empty((path.steps + 1, system.state_dim))
    for k in range(path.steps + 1):
        states[k] = system.exact_solution(z, float(path.times[k]), path.values[k, 1:])
    return states


def _convergence_one_path(cfg: ConvergenceConfig, index: int) -> tuple[PathResult, ...]:
    system = system_from_name(cfg.system, cfg.epsilon, cfg.dims)
    if cfg.reference == "exact" and system.exact_solution is None:
        raise ValueError(
            f"system {cfg.system!r} has no exact solution; use a fine-grid reference"
        )
    fine = _sample_driver(cfg, system, index)
    z = np.asarray(cfg.initial, dtype=np.float64)
    solver = cfg.solver()

    if cfg.reference == "exact":
        reference_states = _exact_on_grid(system, z, fine)
    else:
        reference_scheme = scheme_from_name(cfg.reference_scheme, solver)
        reference_states = integrate(system, reference_scheme, fine, z).states

    results = []
    for scheme_name in cfg.schemes:
        scheme = scheme_from_name(scheme_name, solver)
        points: list[tuple[float, float]] = []
        excluded: list[tuple[float, str]] = []
        for level in range(cfg.coarsest_level, cfg.finest_level + 1):
            factor = 2 ** (cfg.resolved_reference_level - level)
            coarse = coarsen(fine, factor)
            h = cfg.horizon / 2**level
            try:
                trajectory = integrate(system, scheme, coarse, z)
            except NonConvergence as exc:
                excluded.append((h, f"stage solver stalled at step {exc.step}"))
                continue
            reference = reference_states[::factor]
            deviations = np.linalg.norm(trajectory.states[1:] - reference[1:], axis=1)
            points.append((h, float(deviations.max())))
        slope = fit_slope(points) if len(points) >= 2 else math.nan
        results.append(
            PathResult(
                path_index=index,
                seed=cfg.seed + index,
                points=tuple(points),
                excluded=tuple(excluded),
                slope=slope,
            )
        )
    return tuple(results)


def _convergence_star(args: tuple[ConvergenceConfig, int]) -> tuple[PathResult, ...]:
    return _convergence_one_path(*args)


def convergence_experiment(cfg: ConvergenceConfig, workers: int = 1) -> ConvergenceReport:
    """Run the convergence study; identical output for any worker count."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    jobs = [(cfg, index) for index in range(cfg.paths)]
    if workers == 1 or cfg.paths == 1:
        rows = [_convergence_star(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_convergence_star, jobs))
    reports = []
    for position, scheme_name in enumerate(cfg.schemes):
        per_path = tuple(sorted((row[position] for row in rows), key=lambda r: r.path_index))
        slopes = [result.slope for result in per_path]
        reports.append(
            SchemeReport(
                scheme=scheme_name,
                paths=per_path,
                median_slope=float(np.median(slopes)),
            )
        )
    return ConvergenceReport(config=cfg, schemes=tuple(reports))


def square_boundary(corners: Sequence[tuple[float, float]], points_per_edge: int = 16) -> np.ndarray:
    """Ordered boundary polygon of a quadrilateral, counting each corner once."""
    if len(corners) != 4:
        raise ValueError(f"expected 4 corners, got {len(corners)}")
    if points_per_edge < 1:
        raise ValueError("points_per_edge must be >= 1")
    pts = []
    for j in range(4):
        start = np.asarray(corners[j], dtype=np.float64)
        stop = np.asarray(corners[(j + 1) % 4], dtype=np.float64)
        for i in range(points_per_edge):
            pts.append(start + (stop - start) * (i / points_per_edge))
    return np.array(pts)


def shoelace_area(points: np.ndarray) -> float:
    """Polygon area from ordered boundary vertices."""
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


@dataclass(frozen=True)
class AreaSeries:
    scheme: str
    times: tuple[float, ...]
    areas: tuple[float, ...]


def _snapshot_indices(path: SamplePath, snapshot_times: Sequence[float]) -> list[int]:
    h = path.step_size
    indices = []
    for t in snapshot_times:
        k = int(round(t / h))
        if k < 0 or k > path.steps or abs(k * h - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"snapshot time {t} does not lie on the path grid")
        indices.append(k)
    return indices


def area_evolution(
    system: SystemSpec,
    schemes: Sequence[str],
    corners: Sequence[tuple[float, float]],
    path: SamplePath,
    snapshot_times: Sequence[float],
    points_per_edge: int = 16,
    solver: Optional[SolverConfig] = None,
) -> tuple[AreaSeries, ...]:
    """Phase-plane area of an evolved square under each scheme.

    Every boundary point is integrated over the full path; the polygon area
    at each snapshot comes from the shoelace formula on the evolved,
    still-ordered boundary.  When the system has an exact solution, an
    "exact" series is appended for reference.
    """
    if system.state_dim != 2:
        raise ValueError("area evolution needs a planar system (state_dim 2)")
    solver = solver or SolverConfig()
    boundary = square_boundary(corners, points_per_edge)
    indices = _snapshot_indices(path, snapshot_times)
    times = tuple(float(path.times[k]) for k in indices)

    series = []
    for scheme_name in schemes:
        scheme = scheme_from_name(scheme_name, solver)
        snapshots = np.empty((len(indices), len(boundary), 2))
        for p, point in enumerate(boundary):
            trajectory = integrate(system, scheme, path, point)
            for s, k in enumerate(indices):
                snapshots[s, p] = trajectory.states[k]
        areas = tuple(shoelace_area(snapshots[s]) for s in range(len(indices)))
        series.append(AreaSeries(scheme=scheme_name, times=times, areas=areas))

    if system.exact_solution is not None:
        snapshots = np.empty((len(indices), len(boundary), 2))
        for s, k in enumerate(indices):
            noise = path.values[k, 1:]
            t = float(path.times[k])
            for p, point in enumerate(boundary):
                snapshots[s, p] = system.exact_solution(point, t, noise)
        areas = tuple(shoelace_area(snapshots[s]) for s in range(len(indices)))
        series.append(AreaSeries(scheme="exact", times=times, areas=areas))
    return tuple(series)


def invariant_drift(trajectory: Trajectory, z: np.ndarray) -> np.ndarray:
    """Signed drift |states[k]| - |z| along one trajectory."""
    z = np.asarray(z, dtype=np.float64)
    return np.linalg.norm(trajectory.states, axis=1) - float(np.linalg.norm(z))


def write_convergence_csv(report: SchemeReport, fileobj: io.TextIOBase) -> None:
    """CSV export: path_index,h,max_error (fit-included points only)."""
    fileobj.write("path_index,h,max_error\n")
    for result in report.paths:
        for h, err in result.points:
            fileobj.write(f"{result.path_index},{h:.17g},{err:.17g}\n")


def write_area_csv(series: Sequence[AreaSeries], fileobj: io.TextIOBase) -> None:
    """CSV export: scheme,t,area."""
    fileobj.write("scheme,t,area\n")
    for entry in series:
        for t, area in zip(entry.times, entry.areas):
            fileobj.write(f"{entry.scheme},{t:.17g},{area:.17g}\n")


def write_drift_csv(times: np.ndarray, drifts: np.ndarray, fileobj: io.TextIOBase) -> None:
    """CSV export: t,drift."""
    fileobj.write("t,drift\n")
    for t, drift in zip(times, drifts):
        fileobj.write(f"{t:.17g},{drift:.17g}\n")
