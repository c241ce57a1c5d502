"""
Brute-force reference model on the dot-configuration basis.

The microscopic Hamiltonian is assembled from electron and hole fermion
operators (Jordan-Wigner matrices on 2N modes, 4^N states) and restricted to
the 2^N states in which every dot is either empty or holds one bound pair.
That subspace is invariant: the drive creates or destroys a pair on one dot
and the W term moves a pair between dots.

Configurations are ordered in binary with dot 1 as the most significant bit;
bit value 1 means one exciton on the dot.

Literal operator algebra gives, on the paired subspace,

    H(t) = ε J_z + W (J² - J_z²) - N W / 2 + ξ(t) J_+ + ξ*(t) J_-,

the constant coming from reordering the p = p' terms of the W sum.  It
only shifts the global phase; :func:`pairing_offset` returns it so that
comparisons against the collective matrices can remove it explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .collective import MAX_DOTS, ModelParams, enumerate_j_blocks, m_values
from .dynamics import DEFAULT_DTAU, NORM_TOL, TimeSeries
from .errors import DomainError
from .integrators import rk4_linear

__all__ = [
    "ExcitonConfiguration",
    "CollectiveOperatorSet",
    "configurations",
    "build_collective_ops",
    "build_fock_hamiltonian",
    "fock_rotating_hamiltonian",
    "pairing_offset",
    "paired_subspace_leakage",
    "multiplets",
    "symmetric_states",
    "oracle_evolve",
    "project_onto_multiplet",
]

_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1| with |1> = occupied
_Z = np.diag([1.0, -1.0])


def _check_n(n: int) -> None:
    if int(n) != n or not 1 <= n <= MAX_DOTS:
        raise DomainError(f"dot count must be in 1..{MAX_DOTS}, got {n!r}")


@dataclass(frozen=True)
class ExcitonConfiguration:
    """Exciton occupation (0 or 1) of each dot."""

    occupation: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.occupation):
            raise DomainError("occupation bits must be 0 or 1")

    @property
    def index(self) -> int:
        return int("".join(map(str, self.occupation)), 2)

    @property
    def excitons(self) -> int:
        return sum(self.occupation)


def configurations(n: int) -> list[ExcitonConfiguration]:
    _check_n(n)
    return [ExcitonConfiguration(bits) for bits in product((0, 1), repeat=n)]


@dataclass(frozen=True)
class CollectiveOperatorSet:
    j_plus: np.ndarray
    j_minus: np.ndarray
    j_z: np.ndarray

    @property
    def j_squared(self) -> np.ndarray:
        return 0.5 * (self.j_plus @ self.j_minus + self.j_minus @ self.j_plus) + self.j_z @ self.j_z


def _embed(single: np.ndarray, site: int, n: int, fill: np.ndarray | None = None) -> np.ndarray:
    eye = np.eye(2)
    out = np.ones((1, 1))
    for k in range(n):
        if k == site:
            op = single
        elif fill is not None and k < site:
            op = fill
        else:
            op = eye
        out = np.kron(out, op)
    return out


@lru_cache(maxsize=None)
def _collective_ops_cached(n: int) -> CollectiveOperatorSet:
    raise_ = _SIGMA_MINUS.T  # |1><0|: empty -> exciton
    jp = sum(_embed(raise_, k, n) for k in range(n))
    jz = sum(_embed(np.diag([-0.5, 0.5]), k, n) for k in range(n))
    for arr in (jp, jz):
        arr.setflags(write=False)
    jm = jp.T.copy()
    jm.setflags(write=False)
    return CollectiveOperatorSet(jp, jm, jz)


def build_collective_ops(n: int) -> CollectiveOperatorSet:
    """J_+, J_-, J_z as 2^n x 2^n matrices on the configuration basis."""
    _check_n(n)
    return _collective_ops_cached(int(n))


@lru_cache(maxsize=None)
def _fermion_model(n: int):
    """Terms of the microscopic Hamiltonian restricted to paired states.

    Returns (ε-term, W-term, pair-creation sum) as 2^n x 2^n real matrices,
    plus the leakage of each term out of the paired subspace.
    """
    modes = 2 * n  # mode 2p: electron on dot p, mode 2p+1: hole on dot p
    ann = [_embed(_SIGMA_MINUS, k, modes, fill=_Z) for k in range(modes)]
    c = ann[0::2]
    hole = ann[1::2]
    dag = [a.T for a in ann]
    c_dag, h_dag = dag[0::2], dag[1::2]

    eps_term = 0.5 * sum(c_dag[p] @ c[p] - hole[p] @ h_dag[p] for p in range(n))
    w_term = 0.5 * sum(
        c_dag[p] @ hole[q] @ c[q] @ h_dag[p] + hole[p] @ c_dag[q] @ h_dag[q] @ c[p]
        for p in range(n)
        for q in range(n)
    )
    create = sum(c_dag[p] @ h_dag[p] for p in range(n))

    vacuum = np.zeros(2**modes)
    vacuum[0] = 1.0
    embed = np.zeros((2**modes, 2**n))
    for cfg in configurations(n):
        vec = vacuum
        for p, bit in enumerate(cfg.occupation):
            if bit:
                vec = c_dag[p] @ h_dag[p] @ vec
        embed[:, cfg.index] = vec

    restricted, leakage = [], 0.0
    for op in (eps_term, w_term, create):
        small = embed.T @ op @ embed
        leakage = max(leakage, float(np.abs(op @ embed - embed @ small).max()))
        small.setflags(write=False)
        restricted.append(small)
    return tuple(restricted), leakage


def paired_subspace_leakage(n: int) -> float:
    """Largest amplitude any Hamiltonian term sends outside the paired subspace."""
    _check_n(n)
    return _fermion_model(int(n))[1]


def pairing_offset(p: ModelParams) -> float:
    """Constant by which the literal W sum differs from W (J² - J_z²): -N W / 2."""
    return -0.5 * p.n_dots * p.w


def build_fock_hamiltonian(p: ModelParams, t: float) -> np.ndarray:
    """Laboratory-frame H(t) on the 2^N paired configurations, reduced units (ε = 1).

    The drive is ξ(t) = A exp(-i ω t) with ω = 1 - Δ.
    """
    (eps_term, w_term, create), _ = _fermion_model(p.n_dots)
    xi = p.a * np.exp(-1j * p.omega * t)
    return eps_term + p.w * w_term + xi * create + np.conj(xi) * create.T


def fock_rotating_hamiltonian(p: ModelParams, t: float) -> np.ndarray:
    """Λ†(t) H(t) Λ(t) - ω J_z, which must be time independent."""
    ops = build_collective_ops(p.n_dots)
    jz = np.diag(ops.j_z)
    lam = np.exp(-1j * p.omega * jz * t)
    h = build_fock_hamiltonian(p, t)
    return lam.conj()[:, None] * h * lam[None, :] - p.omega * np.diag(jz)


@lru_cache(maxsize=None)
def _multiplets_cached(n: int):
    ops = build_collective_ops(n)
    j2 = ops.j_squared
    result = []
    for j, d in enumerate_j_blocks(n):
        jj = j * (j + 1)
        # highest-weight states: J_z = j inside the J² = j(j+1) eigenspace
        mask = np.isclose(np.diag(ops.j_z), j)
        sub = np.flatnonzero(mask)
        block = j2[np.ix_(sub, sub)]
        vals, vecs = np.linalg.eigh(block)
        tops = vecs[:, np.isclose(vals, jj)]
        if tops.shape[1] != d:
            raise AssertionError(f"found {tops.shape[1]} highest-weight states for j={j}, expected {d}")
        for q in range(d):
            top = np.zeros(2**n)
            top[sub] = tops[:, q]
            states = [top]
            for m in m_values(j)[::-1][:-1]:
                # J_- |j, m> = sqrt(j(j+1) - m(m-1)) |j, m-1>
                nxt = ops.j_minus @ states[-1]
                states.append(nxt / np.sqrt(jj - m * (m - 1)))
            basis = np.array(states[::-1]).T  # columns ascending M
            basis.setflags(write=False)
            result.append((j, q + 1, basis))
    return result


def multiplets(n: int) -> list[tuple[float, int, np.ndarray]]:
    """Every (J, q, basis) with basis columns |J, M; q> in ascending M.

    Phases follow the standard convention: J_+ has positive matrix elements
    inside each multiplet.
    """
    _check_n(n)
    return _multiplets_cached(int(n))


def symmetric_states(n: int) -> np.ndarray:
    """Columns |n/2, M> (ascending M): uniform superpositions of fixed exciton number."""
    _check_n(n)
    cfgs = configurations(n)
    out = np.zeros((2**n, n + 1))
    for cfg in cfgs:
        out[cfg.index, cfg.excitons] = 1.0
    return out / np.sqrt(out.sum(axis=0))


def oracle_evolve(p: ModelParams, psi0, grid, d_tau: float = DEFAULT_DTAU) -> TimeSeries:
    """RK4 integration of i dψ/dt = H(t) ψ on the 2^N configuration space (laboratory frame)."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (2**p.n_dots,):
        raise DomainError(f"psi0 must have {2**p.n_dots} components")
    if abs(np.vdot(psi0, psi0).real - 1) > NORM_TOL:
        raise DomainError("psi0 is not normalized")
    (eps_term, w_term, create), _ = _fermion_model(p.n_dots)
    static = -1j * (eps_term + p.w * w_term)
    up = -1j * p.a * create
    down = -1j * np.conj(p.a) * create.T

    def generator(times: np.ndarray) -> np.ndarray:
        phase = np.exp(-1j * p.omega * np.asarray(times))[:, None, None]
        return static + phase * up + np.conj(phase) * down

    grid = np.asarray(grid, dtype=float)
    amps = rk4_linear(generator, psi0, grid, d_tau)
    return TimeSeries(grid, amps, None, "laboratory")


def project_onto_multiplet(series: TimeSeries, basis: np.ndarray, j: float) -> TimeSeries:
    """Components of a configuration-space trajectory along one multiplet's columns."""
    if series.j is not None:
        raise DomainError("expected a configuration-space series")
    return TimeSeries(series.grid, series.amplitudes @ basis.conj(), j, series.frame, series.time_unit)
