"""
Projections onto maximally entangled target states and pulse-length search.

The target for N dots is (|0...0> + e^{iφ}|1...1>)/√2, i.e. the vacuum M = -J
plus the fully excited state M = +J of the J = N/2 block.  The probability is
the squared overlap

    P(φ) = |<target(φ)|Ψ>|² = ½ |a_{-J} + e^{-iφ} a_{+J}|²,

which for φ = 0 coincides with the ½ |a_{-J} + e^{iφ} a_{+J}|² form.  With
this convention moving a state from the rotating to the laboratory frame at
time τ maps P(φ) to P(φ + N ω τ).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collective import ModelParams, build_h_prime
from .dynamics import (
    HBAR_EV_S,
    StateVector,
    TimeSeries,
    basis_state,
    generic_hermitian_eig,
)
from .errors import DomainError

DEFAULT_THRESHOLD = 0.99

__all__ = [
    "PulseResult",
    "target_probability",
    "bell_probability",
    "ghz_probability",
    "find_pulse_length",
    "search_pulse",
    "tau_to_seconds",
]


@dataclass(frozen=True)
class PulseResult:
    """First probability peak reaching ``threshold``.

    When ``found`` is False the fields describe the global maximum of the
    scanned range instead (a diagnostic, not an error).
    """

    tau_star: float
    t_seconds: float
    peak_prob: float
    threshold: float
    found: bool = True

    def as_dict(self) -> dict:
        return {
            "tau_star": self.tau_star,
            "t_seconds": self.t_seconds,
            "peak_prob": self.peak_prob,
            "threshold": self.threshold,
            "found": self.found,
        }


def tau_to_seconds(tau, epsilon_ev: float):
    """Reduced time τ = ε t / ħ to seconds."""
    if not epsilon_ev > 0:
        raise DomainError("epsilon_ev must be > 0")
    seconds = np.asarray(tau, dtype=float) * HBAR_EV_S / epsilon_ev
    return float(seconds) if seconds.ndim == 0 else seconds


def _edge_amplitudes(s: StateVector | TimeSeries) -> tuple[np.ndarray, np.ndarray]:
    if s.j is None:
        raise DomainError("target probability needs a J-block state")
    amps = s.amplitudes
    return amps[..., 0], amps[..., -1]


def target_probability(s: StateVector | TimeSeries, phi: float = 0.0):
    """½ |a_{-J} + e^{-iφ} a_{+J}|² for a state or every sample of a series."""
    lo, hi = _edge_amplitudes(s)
    prob = 0.5 * np.abs(lo + np.exp(-1j * phi) * hi) ** 2
    return float(prob) if np.ndim(prob) == 0 else prob


def _require_block(s, j: float, name: str) -> None:
    if s.j is None or abs(s.j - j) > 1e-12:
        raise DomainError(f"{name} needs a state in the J={j:g} block, got J={s.j}")


def bell_probability(s: StateVector | TimeSeries, phi: float = 0.0):
    """Probability of (|00> + e^{iφ}|11>)/√2 for a two-dot J=1 state."""
    _require_block(s, 1.0, "bell_probability")
    return target_probability(s, phi)


def ghz_probability(s: StateVector | TimeSeries, phi: float = 0.0):
    """Probability of (|000> + e^{iφ}|111>)/√2 for a three-dot J=3/2 state."""
    _require_block(s, 1.5, "ghz_probability")
    return target_probability(s, phi)


def _check_threshold(threshold: float) -> None:
    if not 0 < threshold < 1:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold}")


def _vertex(t3: np.ndarray, p3: np.ndarray) -> tuple[float, float]:
    """Vertex of the parabola through three samples; falls back to the middle sample."""
    (t0, t1, t2), (p0, p1, p2) = t3, p3
    d0, d2 = t0 - t1, t2 - t1
    denom = d0 * d2 * (d0 - d2)
    if denom == 0:
        return t1, p1
    a = (d2 * (p0 - p1) - d0 * (p2 - p1)) / denom
    b = (d0 * d0 * (p2 - p1) - d2 * d2 * (p0 - p1)) / denom
    if a >= 0:
        return t1, p1
    shift = -b / (2 * a)
    if not d0 <= shift <= d2:
        return t1, p1
    return t1 + shift, p1 - b * b / (4 * a)


def _first_peak(grid: np.ndarray, prob: np.ndarray, threshold: float):
    if prob.size < 3:
        return None
    mid = prob[1:-1]
    peaks = np.flatnonzero((mid > prob[:-2]) & (mid >= prob[2:])) + 1
    for i in peaks:
        t, value = _vertex(grid[i - 1 : i + 2], prob[i - 1 : i + 2])
        value = min(max(value, prob[i]), 1.0)
        if value >= threshold:
            return t, value
    return None


def find_pulse_length(
    series: TimeSeries,
    phi: float = 0.0,
    threshold: float = DEFAULT_THRESHOLD,
    epsilon_ev: float = 2.8,
) -> PulseResult:
    """First local maximum of the target probability with value >= threshold.

    The sampled peak is refined by a parabola through the three bracketing
    samples.  The probability is evaluated in the frame the series is tagged
    with, so pass a laboratory-frame series to reproduce the measured pulse.
    """
    _check_threshold(threshold)
    if series.time_unit != "reduced":
        raise DomainError("series must use reduced time")
    prob = np.asarray(target_probability(series, phi))
    grid = series.grid
    hit = _first_peak(grid, prob, threshold)
    if hit is not None:
        tau, value = float(hit[0]), float(hit[1])
        return PulseResult(tau, tau_to_seconds(tau, epsilon_ev), value, threshold, True)
    i = int(np.argmax(prob))
    return PulseResult(float(grid[i]), tau_to_seconds(grid[i], epsilon_ev), float(prob[i]), threshold, False)


class _EdgeTrajectory:
    """Vacuum-start amplitudes a_{-J}(τ), a_{+J}(τ) from the exact eigen-expansion."""

    def __init__(self, p: ModelParams, psi0: StateVector | None):
        j = p.n_dots / 2
        h = build_h_prime(j, p)
        psi0 = psi0 or basis_state(j)
        eig = generic_hermitian_eig(h)
        basis = eig.vectors.T
        coeffs = np.linalg.solve(basis, psi0.amplitudes)
        self.j = j
        self.t0 = psi0.time
        self.energies = eig.energies
        self.weights = basis * coeffs  # row i: contributions to amplitude i
        self.omega = p.omega

    def edges(self, taus: np.ndarray, frame: str) -> tuple[np.ndarray, np.ndarray]:
        phases = np.exp(-1j * np.outer(taus - self.t0, self.energies))
        lo = phases @ self.weights[0]
        hi = phases @ self.weights[-1]
        if frame == "laboratory":
            lo = lo * np.exp(1j * self.omega * self.j * taus)
            hi = hi * np.exp(-1j * self.omega * self.j * taus)
        return lo, hi

    def series(self, taus: np.ndarray, frame: str) -> TimeSeries:
        phases = np.exp(-1j * np.outer(taus - self.t0, self.energies))
        amps = phases @ self.weights.T
        if frame == "laboratory":
            ms = -self.j + np.arange(amps.shape[1])
            amps = amps * np.exp(-1j * self.omega * np.outer(taus, ms))
        return TimeSeries(taus, amps, self.j, frame)


def search_pulse(
    p: ModelParams,
    phi: float = 0.0,
    threshold: float = DEFAULT_THRESHOLD,
    frame: str = "laboratory",
    tau_max: float = 1e3,
    psi0: StateVector | None = None,
    chunk: int = 1 << 18,
) -> PulseResult:
    """Locate the first qualifying peak of the J = N/2 target probability up to ``tau_max``.

    The range is first screened with the phase-independent bound
    ½(|a_{-J}| + |a_{+J}|)², sampled finely enough for the rotating-frame
    spectrum; only windows where the bound comes within 0.01 of the
    threshold are resampled at the resolution of the target frame and handed
    to :func:`find_pulse_length`.  This keeps searches over 10^7 reduced
    time units cheap even though the laboratory frame oscillates at N ω.
    """
    _check_threshold(threshold)
    if frame not in ("laboratory", "rotating"):
        raise DomainError("frame must be 'laboratory' or 'rotating'")
    if not tau_max > 0:
        raise DomainError("tau_max must be > 0")
    traj = _EdgeTrajectory(p, psi0)
    t0 = traj.t0
    spread = max(float(np.ptp(traj.energies)), 1e-9)
    coarse = min(2 * math.pi / (32 * spread), tau_max / 64)
    fast = spread + (p.n_dots * abs(p.omega) if frame == "laboratory" else 0.0)
    fine = min(2 * math.pi / (64 * fast), coarse / 4)

    best_tau, best_p = t0, -1.0
    n_coarse = int(math.ceil((tau_max) / coarse)) + 1
    for lo_idx in range(0, n_coarse, chunk):
        taus = t0 + coarse * np.arange(lo_idx, min(lo_idx + chunk, n_coarse))
        a_lo, a_hi = traj.edges(taus, frame)
        prob = 0.5 * np.abs(a_lo + np.exp(-1j * phi) * a_hi) ** 2
        k = int(np.argmax(prob))
        if prob[k] > best_p:
            best_tau, best_p = float(taus[k]), float(prob[k])
        bound = 0.5 * (np.abs(a_lo) + np.abs(a_hi)) ** 2
        for start, stop in _windows(bound >= threshold - 0.01):
            w_lo = max(t0, taus[start] - 2 * coarse)
            w_hi = min(t0 + tau_max, taus[stop - 1] + 2 * coarse)
            result = _scan_window(traj, w_lo, w_hi, fine, phi, threshold, frame, p.epsilon_ev, chunk)
            if result.found:
                return result
            if result.peak_prob > best_p:
                best_tau, best_p = result.tau_star, result.peak_prob
    return PulseResult(best_tau, tau_to_seconds(best_tau, p.epsilon_ev), best_p, threshold, False)


def _windows(mask: np.ndarray):
    """(start, stop) index pairs of the True runs of ``mask``."""
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    return zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1))


def _scan_window(traj, w_lo, w_hi, step, phi, threshold, frame, epsilon_ev, chunk) -> PulseResult:
    n = int(math.ceil((w_hi - w_lo) / step)) + 1
    best = None
    for s in range(0, max(n - 2, 1), chunk - 2):
        taus = w_lo + step * np.arange(s, min(s + chunk, n))
        if taus.size < 3:
            break
        result = find_pulse_length(traj.series(taus, frame), phi, threshold, epsilon_ev)
        if result.found:
            return result
        if best is None or result.peak_prob > best.peak_prob:
            best = result
    return best or PulseResult(w_lo, tau_to_seconds(w_lo, epsilon_ev), 0.0, threshold, False)
