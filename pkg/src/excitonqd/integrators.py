"""Fixed-step classical Runge-Kutta for linear systems y' = M(t) y."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import AccuracyError, DomainError

NORM_DRIFT_LIMIT = 1e-6
_CHUNK = 4096


def _step_schedule(grid: np.ndarray, max_step: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Start times and sizes of every RK4 step, plus the step count reaching each grid point."""
    gaps = np.diff(grid)
    counts = np.maximum(1, np.ceil(gaps / max_step - 1e-9).astype(np.int64))
    sizes = np.repeat(gaps / counts, counts)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    local = np.arange(offsets[-1]) - np.repeat(offsets[:-1], counts)
    starts = np.repeat(grid[:-1], counts) + local * sizes
    return starts, sizes, offsets


def rk4_step_matrices(generator: Callable[[np.ndarray], np.ndarray], starts, sizes) -> np.ndarray:
    """One-step RK4 propagators for a batch of steps.

    For a linear right-hand side the four stages collapse into a matrix
    P = I + h/6 (K1 + 2 K2 + 2 K3 + K4) with K1 = M(t), K2 = M(t+h/2)(I + h/2 K1),
    K3 = M(t+h/2)(I + h/2 K2), K4 = M(t+h)(I + h K3).
    """
    h = np.asarray(sizes)[:, None, None]
    m0 = generator(starts)
    mh = generator(starts + sizes / 2)
    m1 = generator(starts + sizes)
    eye = np.eye(m0.shape[-1])
    k1 = m0
    k2 = mh @ (eye + h / 2 * k1)
    k3 = mh @ (eye + h / 2 * k2)
    k4 = m1 @ (eye + h * k3)
    return eye + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_linear(
    generator: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    grid: np.ndarray,
    max_step: float,
    drift_limit: float = NORM_DRIFT_LIMIT,
) -> np.ndarray:
    """Integrate y' = M(t) y from grid[0], returning y at every grid point.

    Parameters
    ----------
    generator : callable
        Maps an array of n times to the (n, d, d) array of M(t).
    y0 : ndarray
        State at grid[0].
    grid : ndarray
        Strictly increasing output times.
    max_step : float
        Largest allowed step; each grid interval is split into equal steps.
    drift_limit : float
        Maximum tolerated change of ‖y‖²; exceeded -> AccuracyError.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("grid must be a non-empty 1-d array")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    if not max_step > 0:
        raise DomainError("step must be positive")
    y = np.array(y0, dtype=complex)
    out = np.empty((grid.size, y.size), dtype=complex)
    out[0] = y
    if grid.size == 1:
        return out

    starts, sizes, offsets = _step_schedule(grid, max_step)
    record_at = offsets[1:]  # after this many steps we sit on grid[i+1]
    rec = 0
    done = 0
    for lo in range(0, starts.size, _CHUNK):
        props = rk4_step_matrices(generator, starts[lo : lo + _CHUNK], sizes[lo : lo + _CHUNK])
        for prop in props:
            y = prop @ y
            done += 1
            while rec < record_at.size and record_at[rec] == done:
                out[rec + 1] = y
                rec += 1

    norms = np.einsum("ij,ij->i", out.conj(), out).real
    drift = float(np.max(np.abs(norms - norms[0])))
    if drift > drift_limit or not math.isfinite(drift):
        raise AccuracyError(
            f"norm drift {drift:.3e} exceeds {drift_limit:.1e}; reduce the integration step"
        )
    return out
