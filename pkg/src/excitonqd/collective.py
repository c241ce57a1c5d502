"""
Collective angular-momentum description of N identical, equidistant quantum dots.

Every dot is a two-level system (empty / one exciton).  The N-dot space is
spanned by the Dicke states |J, M; q>, and the rotating-frame Hamiltonian

    H' = Δ J_z + W (J² - J_z²) + A J_+ + A* J_-

is block diagonal in J and independent of q.  Energies are measured in units
of the band gap ε and ħ = 1, so a reduced time τ equals ε t.

Basis convention: inside a J-block the index i corresponds to M = -J + i,
i.e. index 0 is the exciton vacuum (all dots empty).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import DomainError

MAX_DOTS = 4

__all__ = [
    "ModelParams",
    "DickeLabel",
    "HamiltonianMatrix",
    "bare_energy",
    "multiplicity",
    "build_h_prime",
    "enumerate_j_blocks",
    "collective_basis",
    "m_values",
]


def as_half_integer(x, name: str = "value") -> Fraction:
    """Return `x` as an exact multiple of 1/2, or raise DomainError."""
    try:
        frac = Fraction(x).limit_denominator(1000)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name}={x!r} is not a number") from exc
    if (2 * frac).denominator != 1 or abs(float(frac) - float(x)) > 1e-12:
        raise DomainError(f"{name}={x!r} is not a multiple of 1/2")
    return frac


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs in reduced units (energies divided by ε).

    Attributes
    ----------
    n_dots : int
        Number of dots N, 1 to 4.
    w : float
        Interdot interaction W / ε.
    a_amp : float
        Electron-photon coupling amplitude |A| / ε.
    a_phase : float
        Phase of the coupling A = |A| exp(i a_phase), radians.
    detuning : float
        Δ = (ε - ω) / ε.
    epsilon_ev : float
        Band gap in eV; only used to convert reduced times to seconds.
    """

    n_dots: int = 2
    w: float = 0.1
    a_amp: float = 0.04
    a_phase: float = 0.0
    detuning: float = 0.0
    epsilon_ev: float = 2.8

    def __post_init__(self):
        if int(self.n_dots) != self.n_dots or not 1 <= self.n_dots <= MAX_DOTS:
            raise DomainError(f"n_dots must be an integer in 1..{MAX_DOTS}, got {self.n_dots!r}")
        object.__setattr__(self, "n_dots", int(self.n_dots))
        for name in ("w", "a_amp", "a_phase", "detuning", "epsilon_ev"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.a_amp < 0:
            raise DomainError("a_amp must be >= 0")
        if self.epsilon_ev <= 0:
            raise DomainError("epsilon_ev must be > 0")

    @property
    def a(self) -> complex:
        """Complex coupling A."""
        return self.a_amp * complex(math.cos(self.a_phase), math.sin(self.a_phase))

    @property
    def omega(self) -> float:
        """Laser frequency ω / ε = 1 - Δ."""
        return 1.0 - self.detuning

    # dimensionless symbols of the reduced-unit equations of motion
    @property
    def lam(self) -> complex:
        return self.a

    @property
    def mu(self) -> float:
        return self.w

    @property
    def nu(self) -> float:
        return self.omega

    @property
    def j_max(self) -> float:
        return self.n_dots / 2

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DickeLabel:
    """Label |J, M; q> of a collective state."""

    j: float
    m: float
    q: int = 1

    def __post_init__(self):
        j = as_half_integer(self.j, "j")
        m = as_half_integer(self.m, "m")
        _check_jm(j, m)
        if int(self.q) != self.q or self.q < 1:
            raise DomainError(f"q must be a positive integer, got {self.q!r}")
        object.__setattr__(self, "j", float(j))
        object.__setattr__(self, "m", float(m))


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense Hermitian matrix of one J-block, rows/columns ordered by ascending M."""

    j: float
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        dim = int(round(2 * self.j)) + 1
        if arr.shape != (dim, dim):
            raise DomainError(f"entries must be {dim}x{dim} for j={self.j}, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _check_jm(j: Fraction, m: Fraction) -> None:
    if j < 0:
        raise DomainError(f"j must be >= 0, got {j}")
    if abs(m) > j or (j - m).denominator != 1:
        raise DomainError(f"m={m} is not a valid projection for j={j}")


def _check_admissible(n: int, j) -> Fraction:
    if int(n) != n or not 1 <= n <= MAX_DOTS:
        raise DomainError(f"dot count must be in 1..{MAX_DOTS}, got {n!r}")
    jf = as_half_integer(j, "j")
    top = Fraction(n, 2)
    if jf < 0 or jf > top or (top - jf).denominator != 1:
        raise DomainError(f"j={jf} is not admissible for n={n}")
    return jf


def m_values(j) -> np.ndarray:
    """Projections -j, -j+1, ..., j."""
    jf = as_half_integer(j, "j")
    if jf < 0:
        raise DomainError("j must be >= 0")
    return -float(jf) + np.arange(int(2 * jf) + 1)


def bare_energy(j, m, p: ModelParams) -> float:
    """Rotating-frame energy of |J, M> without light: Δ M + W [J(J+1) - M²]."""
    jf, mf = as_half_integer(j, "j"), as_half_integer(m, "m")
    _check_jm(jf, mf)
    jv, mv = float(jf), float(mf)
    return p.detuning * mv + p.w * (jv * (jv + 1) - mv * mv)


def multiplicity(n: int, j) -> int:
    """Number D_J of independent multiplets with total angular momentum J."""
    jf = _check_admissible(n, j)
    k = int(Fraction(n, 2) + jf)
    value = Fraction(int(2 * jf) + 1) / (jf + Fraction(n, 2) + 1) * math.comb(n, k)
    assert value.denominator == 1
    return int(value)


def enumerate_j_blocks(n: int) -> list[tuple[float, int]]:
    """All (J, D_J) pairs for n dots, J descending from n/2."""
    if int(n) != n or not 1 <= n <= MAX_DOTS:
        raise DomainError(f"dot count must be in 1..{MAX_DOTS}, got {n!r}")
    blocks = []
    j = Fraction(n, 2)
    while j >= 0:
        blocks.append((float(j), multiplicity(n, j)))
        j -= 1
    return blocks


def collective_basis(n: int) -> list[DickeLabel]:
    """Every |J, M; q> label of the 2^n-dimensional space."""
    return [
        DickeLabel(j, m, q)
        for j, d in enumerate_j_blocks(n)
        for q in range(1, d + 1)
        for m in m_values(j)
    ]


def build_h_prime(j, p: ModelParams) -> HamiltonianMatrix:
    """Rotating-frame Hamiltonian of the J-block.

    Diagonal entries are the bare energies; the sub-diagonal (row M'+1,
    column M') carries A sqrt(J(J+1) - M'(M'+1)) and the super-diagonal its
    complex conjugate.
    """
    jf = _check_admissible(p.n_dots, j)
    jv = float(jf)
    ms = m_values(jf)
    h = np.diag([bare_energy(jf, Fraction(m).limit_denominator(2), p) for m in ms]).astype(complex)
    a = p.a
    for i, m in enumerate(ms[:-1]):
        c = math.sqrt(jv * (jv + 1) - m * (m + 1))
        h[i + 1, i] = a * c
        h[i, i + 1] = a.conjugate() * c
    return HamiltonianMatrix(jv, h)
