"""Exact simulation of multi-channel fractional Brownian motion drivers.

A driver path has d+1 channels on a uniform grid over [0, T]: channel 0 is
the time channel X^0_t = t (the drift slot of the integrators), channels
1..d are independent fractional Brownian motions with common Hurst
parameter H, normalized so that Var(X_t) = t^{2H}.

Sampling is exact: the stationary fractional Gaussian noise increments are
drawn through a Cholesky factor of their Toeplitz covariance matrix.  The
factor for the unit step size is cached per (H, N) and rescaled by h^H, so
repeated sampling at one grid costs a single triangular matrix product.
Dense factorization is quadratic in memory, so grids beyond
_CHOLESKY_MAX_STEPS switch to circulant embedding (Davies-Harte), which
realizes the same covariance exactly through one FFT of length 2N.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from collections import OrderedDict

import numpy as np
from scipy.linalg import cholesky as _cholesky, toeplitz as _toeplitz

__all__ = [
    "FbmConfig",
    "SamplePath",
    "CovarianceFactorizationError",
    "fgn_covariance",
    "sample_fbm",
    "coarsen",
    "write_path_csv",
    "clear_cholesky_cache",
]


class CovarianceFactorizationError(RuntimeError):
    """The fGn covariance matrix was numerically non-positive-definite."""


@dataclass(frozen=True)
class FbmConfig:
    """Parameters of one multi-channel fBm sample.

    hurst: Hurst parameter in (0, 1); the integrator experiments use
        (1/4, 1/2], where rho = 1/(2 hurst) >= 1.
    dims: number of independent Gaussian channels d (the time channel is
        added on top of these).
    horizon: final time T > 0.
    steps: number of grid intervals N >= 1; the grid step is h = T/N.
    seed: base seed; channel i draws from an independent substream derived
        from (seed, i), so changing dims never reshuffles existing channels.
    """

    hurst: float
    dims: int
    horizon: float
    steps: int
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (0, 1), got {self.hurst}")
        if self.dims < 1:
            raise ValueError(f"dims must be a positive integer, got {self.dims}")
        if self.horizon <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @property
    def step_size(self) -> float:
        return self.horizon / self.steps


@dataclass(frozen=True)
class SamplePath:
    """Discretized driver on a uniform grid.

    values has shape (N+1, d+1): column 0 is the time channel (equal to
    times), columns 1..d are the Gaussian channels.  All channels start
    at zero.
    """

    times: np.ndarray
    values: np.ndarray
    hurst: float
    seed: int

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[0] != self.times.shape[0]:
            raise ValueError("values must be (len(times), d+1)")

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    @property
    def dims(self) -> int:
        return self.values.shape[1] - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def step_size(self) -> float:
        return float(self.times[-1]) / self.steps

    def increments(self) -> np.ndarray:
        """Per-step increments, shape (N, d+1); column 0 is the h column."""
        return np.diff(self.values, axis=0)


def fgn_covariance(lag: int, hurst: float, h: float) -> float:
    """Autocovariance of fractional Gaussian noise increments.

    Returns Cov(X_{t_j, t_{j+1}}, X_{t_{j+k}, t_{j+k+1}}) on a uniform grid
    with step h:

        gamma(k) = 0.5 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) h^{2H}.

    For H = 1/2 this is h at lag 0 and exactly 0 otherwise.
    """
    if h <= 0.0:
        raise ValueError(f"step size h must be positive, got {h}")
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    k = abs(int(lag))
    two_h = 2.0 * hurst
    unit = 0.5 * ((k + 1) ** two_h - 2.0 * k**two_h + abs(k - 1) ** two_h)
    return unit * h**two_h


# Unit-step Cholesky factors keyed by (hurst, steps).  Factors are marked
# read-only; rescaling by h^H recovers any step size exactly.
_CHOLESKY_CACHE: OrderedDict[tuple[float, int], np.ndarray] = OrderedDict()
_CHOLESKY_CACHE_MAX = 4


def clear_cholesky_cache() -> None:
    _CHOLESKY_CACHE.clear()


def _unit_cholesky(hurst: float, steps: int) -> np.ndarray:
    key = (hurst, steps)
    factor = _CHOLESKY_CACHE.get(key)
    if factor is not None:
        _CHOLESKY_CACHE.move_to_end(key)
        return factor
    k = np.arange(steps, dtype=np.float64)
    two_h = 2.0 * hurst
    gamma = 0.5 * ((k + 1) ** two_h - 2.0 * k**two_h + np.abs(k - 1) ** two_h)
    cov = _toeplitz(gamma)
    try:
        factor = _cholesky(cov, lower=True, overwrite_a=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise CovarianceFactorizationError(
            f"fGn covariance not positive definite for H={hurst}, N={steps}: {exc}"
        ) from exc
    factor.setflags(write=False)
    _CHOLESKY_CACHE[key] = factor
    while len(_CHOLESKY_CACHE) > _CHOLESKY_CACHE_MAX:
        _CHOLESKY_CACHE.popitem(last=False)
    return factor


# Largest grid factorized densely; longer grids use circulant embedding.
_CHOLESKY_MAX_STEPS = 4096


def _circulant_increments(hurst: float, steps: int, z: np.ndarray) -> np.ndarray:
    """Map 2N standard normals to N exact unit-step fGn samples.

    Davies-Harte: embed the N-point Toeplitz covariance into a circulant of
    size 2N, take sqrt of its (nonnegative) FFT eigenvalues, and read the
    first N coordinates of the synthesized stationary sequence.  Linear in
    z, so the increment covariance is exactly the embedded Toeplitz block.
    """
    n = steps
    k = np.arange(n, dtype=np.float64)
    two_h = 2.0 * hurst
    gamma = 0.5 * ((k + 1) ** two_h - 2.0 * k**two_h + np.abs(k - 1) ** two_h)
    first_row = np.zeros(2 * n)
    first_row[:n] = gamma
    first_row[n + 1 :] = gamma[:0:-1]
    eigenvalues = np.fft.fft(first_row).real
    top = float(eigenvalues.max(initial=0.0))
    # Tolerate rounding-level negatives only; anything larger is a genuine
    # failure of the embedding and must surface, not be clipped away.
    if eigenvalues.min() < -1e-12 * top:
        raise CovarianceFactorizationError(
            f"circulant embedding not nonnegative definite for H={hurst}, N={steps}: "
            f"min eigenvalue {eigenvalues.min():.3e}"
        )
    np.clip(eigenvalues, 0.0, None, out=eigenvalues)

    spectrum = np.zeros(2 * n, dtype=np.complex128)
    spectrum[0] = z[0]
    spectrum[n] = z[1]
    real_part = z[2 : n + 1]
    imag_part = z[n + 1 :]
    spectrum[1:n] = (real_part + 1j * imag_part) / np.sqrt(2.0)
    spectrum[n + 1 :] = np.conj(spectrum[n - 1 : 0 : -1])
    synthesized = np.fft.ifft(np.sqrt(eigenvalues) * spectrum)
    return np.sqrt(2 * n) * synthesized.real[:n]


def sample_fbm(config: FbmConfig, method: str = "auto") -> SamplePath:
    """Draw one exact-covariance fBm path per channel.

    method selects the sampler: "cholesky" (dense factor, cached per grid),
    "circulant" (Davies-Harte), or "auto" (cholesky up to
    _CHOLESKY_MAX_STEPS grid intervals, circulant beyond).  Both are exact,
    so the choice affects speed and the draw, never the distribution.
    Channel i consumes the standard-normal stream derived from (seed, i-1);
    the result is a deterministic function of (config, method).
    """
    if method not in ("auto", "cholesky", "circulant"):
        raise ValueError(f"unknown sampling method {method!r}")
    n, d = config.steps, config.dims
    h = config.step_size
    if method == "auto":
        method = "cholesky" if n <= _CHOLESKY_MAX_STEPS else "circulant"
    factor = _unit_cholesky(config.hurst, n) if method == "cholesky" else None
    scale = h**config.hurst

    values = np.zeros((n + 1, d + 1), dtype=np.float64)
    times = np.arange(n + 1, dtype=np.float64) * h
    values[:, 0] = times
    for channel in range(d):
        seq = np.random.SeedSequence(entropy=config.seed, spawn_key=(channel,))
        rng = np.random.default_rng(seq)
        if factor is not None:
            increments = factor @ rng.standard_normal(n)
        else:
            increments = _circulant_increments(config.hurst, n, rng.standard_normal(2 * n))
        np.cumsum(increments * scale, out=values[1:, channel + 1])
    return SamplePath(times=times, values=values, hurst=config.hurst, seed=config.seed)


def coarsen(path: SamplePath, factor: int) -> SamplePath:
    """Restrict a path to every factor-th grid point.

    Values at retained points are copied bit-for-bit, never resampled, so
    all step sizes of a convergence study share one underlying path.
    """
    if factor < 1:
        raise ValueError(f"factor must be a positive integer, got {factor}")
    if path.steps % factor != 0:
        raise ValueError(f"factor {factor} does not divide steps {path.steps}")
    return SamplePath(
        times=path.times[::factor].copy(),
        values=path.values[::factor].copy(),
        hurst=path.hurst,
        seed=path.seed,
    )


def write_path_csv(path: SamplePath, fileobj: io.TextIOBase) -> None:
    """CSV export: header t,x1,...,xd then one 17-significant-digit row per grid point."""
    header = "t," + ",".join(f"x{i}" for i in range(1, path.dims + 1))
    fileobj.write(header + "\n")
    for row in path.values:
        fileobj.write(",".join(f"{v:.17g}" for v in row) + "\n")
