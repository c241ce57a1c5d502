"""
Time evolution inside a single J-block.

Two independent routes are provided:

* exact propagation through the eigen-decomposition of the time-independent
  rotating-frame Hamiltonian (:func:`eigen_propagate`, :func:`propagate_series`);
* fixed-step RK4 integration of the coupled amplitude equations in the
  interaction picture, either in reduced time τ = ε t (:func:`integrate_reduced`)
  or in seconds with energies in eV (:func:`integrate_lab`).

Frames
------
``rotating``      amplitudes c_M of |Ψ>_Λ = Λ†(t)|Ψ>_S, Λ(t) = exp(-i ω J_z t).
``laboratory``    Schrödinger-picture amplitudes, c_M exp(-i ω M t).
``interaction``   slowly varying f_M = c_M exp(+i E(J, M) τ) used by the ODE routes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collective import HamiltonianMatrix, ModelParams, _check_admissible, m_values
from .errors import DomainError
from .integrators import rk4_linear
from .spectra import EigenSystem, canonical_phase

HBAR_EV_S = 6.582119e-16
DEFAULT_DTAU = 1e-3
FRAMES = ("laboratory", "rotating", "interaction")
NORM_TOL = 1e-9

__all__ = [
    "StateVector",
    "TimeSeries",
    "basis_state",
    "generic_hermitian_eig",
    "eigen_propagate",
    "propagate_series",
    "integrate_reduced",
    "integrate_lab",
    "from_interaction_picture",
    "to_interaction_picture",
    "to_lab_frame",
    "to_rotating_frame",
    "expectation",
]


def _frozen(arr, dtype=complex) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over one J-block (ascending M) at a given time and frame."""

    j: float
    amplitudes: np.ndarray = field(repr=False)
    frame: str = "rotating"
    time: float = 0.0

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (int(round(2 * self.j)) + 1,):
            raise DomainError(f"expected {int(round(2 * self.j)) + 1} amplitudes for j={self.j}")
        if self.frame not in FRAMES:
            raise DomainError(f"unknown frame {self.frame!r}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "j", float(self.j))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class TimeSeries:
    """Sampled trajectory: ``amplitudes[i]`` is the state at ``grid[i]``.

    ``j`` is None for trajectories over the full dot-configuration space.
    ``time_unit`` is "reduced" (τ = ε t) or "seconds".
    """

    grid: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)
    j: float | None = None
    frame: str = "rotating"
    time_unit: str = "reduced"

    def __post_init__(self):
        grid = _frozen(self.grid, float)
        amps = _frozen(self.amplitudes)
        if grid.ndim != 1 or amps.ndim != 2 or amps.shape[0] != grid.size:
            raise DomainError("amplitudes must have one row per grid point")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if self.frame not in FRAMES:
            raise DomainError(f"unknown frame {self.frame!r}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self) -> int:
        return self.grid.size

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(self.populations.sum(axis=1))

    def state(self, i: int) -> StateVector:
        if self.j is None:
            raise DomainError("configuration-space series have no J-block states")
        return StateVector(self.j, self.amplitudes[i], self.frame, float(self.grid[i]))


def basis_state(j, index: int = 0, frame: str = "rotating", time: float = 0.0) -> StateVector:
    """|J, M = -J + index>; index 0 is the exciton vacuum."""
    dim = len(m_values(j))
    if not 0 <= index < dim:
        raise DomainError(f"index {index} outside block of dimension {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(j, amps, frame, time)


def _as_matrix(h) -> np.ndarray:
    return np.asarray(h.entries if isinstance(h, HamiltonianMatrix) else h, dtype=complex)


def generic_hermitian_eig(h, degeneracy_tol: float = 1e-12) -> EigenSystem:
    """Numerical eigensystem with a deterministic gauge.

    Eigenvectors are unit norm with the first non-negligible component real
    positive.  Inside a degenerate subspace the basis is obtained by
    Gram-Schmidt on the projections of the ascending-M unit vectors.
    """
    mat = _as_matrix(h)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DomainError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(mat), initial=0.0)))
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > 1e-12 * scale:
        raise DomainError("matrix is not Hermitian")
    energies, cols = np.linalg.eigh(mat)
    vectors = cols.T.copy()

    start = 0
    while start < energies.size:
        stop = start + 1
        while stop < energies.size and energies[stop] - energies[start] <= degeneracy_tol * scale:
            stop += 1
        if stop - start > 1:
            vectors[start:stop] = _ordered_subspace_basis(vectors[start:stop])
            energies[start:stop] = energies[start:stop].mean()
        start = stop
    return EigenSystem(energies, canonical_phase(vectors))


def _ordered_subspace_basis(rows: np.ndarray) -> np.ndarray:
    proj = rows.T @ rows.conj()  # projector onto span(rows)
    basis = []
    for unit in np.eye(rows.shape[1]):
        v = proj @ unit
        for b in basis:
            v = v - (b.conj() @ v) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            basis.append(v / nrm)
        if len(basis) == rows.shape[0]:
            break
    return np.array(basis)


def _check_state(s: StateVector, dim: int, frame: str | None = "rotating") -> None:
    if s.amplitudes.size != dim:
        raise DomainError(f"state dimension {s.amplitudes.size} does not match block dimension {dim}")
    if frame is not None and s.frame != frame:
        raise DomainError(f"state must be in the {frame} frame, got {s.frame}")


def propagate_series(h, psi0: StateVector, grid, eig: EigenSystem | None = None) -> TimeSeries:
    """Exact rotating-frame trajectory sum_k C_k exp(-i E_k τ) |ψ_k> on ``grid``.

    ``grid`` holds absolute times; the state is psi0 at ``psi0.time``.
    C_k are obtained by a linear solve against the eigenvector matrix.
    """
    mat = _as_matrix(h)
    _check_state(psi0, mat.shape[0])
    eig = eig or generic_hermitian_eig(mat)
    basis = eig.vectors.T  # columns are eigenvectors
    coeffs = np.linalg.solve(basis, psi0.amplitudes)
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    phases = np.exp(-1j * np.outer(grid - psi0.time, eig.energies))
    amps = (phases * coeffs) @ basis.T
    return TimeSeries(grid, amps, psi0.j, "rotating")


def eigen_propagate(h, psi0: StateVector, tau: float) -> StateVector:
    """Rotating-frame state a duration ``tau`` after ``psi0``."""
    series = propagate_series(h, psi0, [psi0.time + tau])
    return series.state(0)


def expectation(h, s: StateVector) -> float:
    mat = _as_matrix(h)
    return float(np.real(s.amplitudes.conj() @ mat @ s.amplitudes))


# --- interaction picture ---------------------------------------------------


def _bare_energies(p: ModelParams, j) -> np.ndarray:
    ms = m_values(j)
    jv = float(j)
    return p.detuning * ms + p.w * (jv * (jv + 1) - ms**2)


def to_interaction_picture(s: StateVector | TimeSeries, p: ModelParams):
    """Rotating-frame amplitudes c_M -> f_M = c_M exp(i E(J, M) τ)."""
    return _interaction_phase(s, p, +1, "rotating", "interaction")


def from_interaction_picture(s: StateVector | TimeSeries, p: ModelParams):
    """Inverse of :func:`to_interaction_picture` (reduced time only)."""
    return _interaction_phase(s, p, -1, "interaction", "rotating")


def _interaction_phase(s, p, sign, source, target):
    if s.frame != source:
        raise DomainError(f"expected a {source}-frame input, got {s.frame}")
    energies = _bare_energies(p, s.j)
    if isinstance(s, TimeSeries):
        if s.time_unit != "reduced":
            raise DomainError("interaction-picture conversion needs reduced time")
        amps = s.amplitudes * np.exp(sign * 1j * np.outer(s.grid, energies))
        return TimeSeries(s.grid, amps, s.j, target, s.time_unit)
    amps = s.amplitudes * np.exp(sign * 1j * energies * s.time)
    return StateVector(s.j, amps, target, s.time)


def _ladder(j) -> tuple[np.ndarray, np.ndarray]:
    """sqrt(J(J+1) - M(M-1)) for the M-1 coupling and sqrt(J(J+1) - M(M+1)) for M+1."""
    ms = m_values(j)
    jj = float(j) * (float(j) + 1)
    return np.sqrt(np.maximum(jj - ms * (ms - 1), 0.0)), np.sqrt(np.maximum(jj - ms * (ms + 1), 0.0))


def _coupling_generator(ms, lower, upper, coupling, freq_down, freq_up):
    """Generator of i dy/dt = sum of phased ladder couplings, as dy/dt = G(t) y."""
    dim = ms.size
    rows = np.arange(1, dim)

    def generator(times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        g = np.zeros((times.size, dim, dim), dtype=complex)
        # row M couples to M-1 (column index row-1) and to M+1 (column row+1)
        g[:, rows, rows - 1] = -1j * coupling * lower[rows] * np.exp(1j * np.outer(times, freq_down[rows]))
        g[:, rows - 1, rows] = (
            -1j * np.conj(coupling) * upper[rows - 1] * np.exp(1j * np.outer(times, freq_up[rows - 1]))
        )
        return g

    return generator


def _check_normalized(s: StateVector) -> None:
    if abs(s.norm**2 - 1.0) > NORM_TOL:
        raise DomainError(f"initial state is not normalized (norm² = {s.norm**2:.12f})")


def integrate_reduced(
    p: ModelParams, j, f0: StateVector, grid, d_tau: float = DEFAULT_DTAU
) -> TimeSeries:
    """RK4 solution of the reduced-unit amplitude equations

        i df_M/dτ = λ sqrt(J(J+1)-M(M-1)) exp(i[1 + μ(1-2M) - ν]τ) f_{M-1}
                  + λ* sqrt(J(J+1)-M(M+1)) exp(-i[1 - μ(1+2M) - ν]τ) f_{M+1}

    with λ = A/ε, μ = W/ε, ν = ω/ε.  ``f0`` may be given in the interaction
    or the rotating frame (it is converted); the result is in the interaction
    frame.  Use :func:`from_interaction_picture` for rotating-frame amplitudes.
    """
    jf = _check_admissible(p.n_dots, j)
    ms = m_values(jf)
    _check_state(f0, ms.size, frame=None)
    if f0.frame == "rotating":
        f0 = to_interaction_picture(f0, p)
    elif f0.frame != "interaction":
        raise DomainError("f0 must be in the interaction or rotating frame")
    _check_normalized(f0)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or abs(grid[0] - f0.time) > 1e-12 * max(1.0, abs(f0.time)):
        raise DomainError("grid must start at the initial time")
    lower, upper = _ladder(jf)
    freq_down = 1 + p.mu * (1 - 2 * ms) - p.nu
    freq_up = -(1 - p.mu * (1 + 2 * ms) - p.nu)
    gen = _coupling_generator(ms, lower, upper, p.lam, freq_down, freq_up)
    amps = rk4_linear(gen, f0.amplitudes, grid, d_tau)
    return TimeSeries(grid, amps, float(jf), "interaction")


def integrate_lab(
    p: ModelParams, j, d0: StateVector, grid_seconds, d_tau: float = DEFAULT_DTAU
) -> TimeSeries:
    """RK4 solution of the amplitude equations in physical units.

    Energies are ε, W = w ε and A = a ε in eV, time in seconds:

        iħ dd_M/dt = A sqrt(..) exp(i(E_{M,M-1} - ħω)t/ħ) d_{M-1}
                   + A* sqrt(..) exp(i(E_{M,M+1} + ħω)t/ħ) d_{M+1}

    with E_{M,M-1} = ε + W(1 - 2M) and E_{M,M+1} = W(1 + 2M) - ε.  The step is
    ``d_tau`` ħ/ε so that d_M(t) reproduces f_M(ε t / ħ).
    """
    jf = _check_admissible(p.n_dots, j)
    ms = m_values(jf)
    _check_state(d0, ms.size, frame="interaction")
    _check_normalized(d0)
    grid = np.asarray(grid_seconds, dtype=float)
    if grid.size == 0 or abs(grid[0] - d0.time) > 1e-12 * max(abs(d0.time), abs(grid[-1]), 1e-300):
        raise DomainError("grid must start at the initial time")
    eps = p.epsilon_ev
    w_ev, a_ev, photon_ev = p.w * eps, p.a * eps, p.omega * eps
    gap_down = eps + w_ev * (1 - 2 * ms)
    gap_up = w_ev * (1 + 2 * ms) - eps
    lower, upper = _ladder(jf)
    gen = _coupling_generator(
        ms,
        lower,
        upper,
        a_ev / HBAR_EV_S,
        (gap_down - photon_ev) / HBAR_EV_S,
        (gap_up + photon_ev) / HBAR_EV_S,
    )
    amps = rk4_linear(gen, d0.amplitudes, grid, d_tau * HBAR_EV_S / eps)
    return TimeSeries(grid, amps, float(jf), "interaction", "seconds")


# --- laboratory <-> rotating -------------------------------------------------


def _lambda_phase(s, omega, sign, source, target):
    if s.frame != source:
        raise DomainError(f"expected a {source}-frame input, got {s.frame}")
    ms = m_values(s.j)
    if isinstance(s, TimeSeries):
        amps = s.amplitudes * np.exp(sign * -1j * omega * np.outer(s.grid, ms))
        return TimeSeries(s.grid, amps, s.j, target, s.time_unit)
    return StateVector(s.j, s.amplitudes * np.exp(sign * -1j * omega * ms * s.time), target, s.time)


def to_lab_frame(s: StateVector | TimeSeries, omega: float):
    """Apply Λ(τ) = exp(-i ω J_z τ): amplitude of |M> gains exp(-i ω M τ)."""
    return _lambda_phase(s, omega, +1, "rotating", "laboratory")


def to_rotating_frame(s: StateVector | TimeSeries, omega: float):
    """Apply Λ†(τ), the inverse of :func:`to_lab_frame`."""
    return _lambda_phase(s, omega, -1, "laboratory", "rotating")
