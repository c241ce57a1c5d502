"""
Closed-form eigensystems for two and three dots.

These are independent cross-checks on the numerical eigensolver in
:mod:`excitonqd.dynamics`; the production propagation path never uses them.

Two label orders appear here.  ``EigenSystem`` always stores energies in
ascending order, and ``labels`` maps the closed-form index k (the order in
which the formulas list the roots) to the ascending row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .collective import ModelParams
from .errors import DegeneracyError, DomainError

__all__ = [
    "EigenSystem",
    "char_poly_n2",
    "char_poly_n3",
    "eigen_n2_resonant",
    "eigen_n3_resonant",
    "coefficients_vacuum_n3",
    "canonical_phase",
    "n3_resonant_energies",
]

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (ascending) and eigenvectors of one J-block.

    ``vectors[k]`` holds the components of eigenvector k in the ascending-M
    basis, so ``h @ vectors[k] == energies[k] * vectors[k]``.
    """

    energies: np.ndarray
    vectors: np.ndarray
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        v = np.array(self.vectors, dtype=complex)
        if v.shape != (e.size, e.size):
            raise DomainError("vectors must be square with one row per energy")
        e.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "vectors", v)

    def residuals(self, h) -> np.ndarray:
        """‖H v_k - E_k v_k‖ for every k."""
        h = np.asarray(h, dtype=complex)
        return np.linalg.norm(self.vectors @ h.T - self.energies[:, None] * self.vectors, axis=1)


def canonical_phase(vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Normalize each row to unit norm with its first non-negligible component real and positive."""
    v = np.array(vectors, dtype=complex)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    for row in v:
        nz = np.flatnonzero(np.abs(row) > tol)
        if nz.size:
            first = row[nz[0]]
            row *= abs(first) / first
    return v


def _require(p: ModelParams, n: int, resonant: bool = False) -> None:
    if p.n_dots != n:
        raise DomainError(f"requires n_dots={n}, got {p.n_dots}")
    if resonant and p.detuning != 0:
        raise DomainError("closed form only valid at resonance (detuning = 0)")


def _coupling_phases(p: ModelParams, dim: int) -> np.ndarray:
    # H = D H_real D^dagger with D = diag(exp(i k phase)), so eigenvectors pick up D
    return np.exp(1j * p.a_phase * np.arange(dim))


def _sorted_system(energies_k, vectors_k) -> EigenSystem:
    energies_k = np.asarray(energies_k, dtype=float)
    order = np.argsort(energies_k, kind="stable")
    labels = {int(k): int(np.flatnonzero(order == k)[0]) for k in range(energies_k.size)}
    return EigenSystem(energies_k[order], canonical_phase(np.asarray(vectors_k)[order]), labels)


def char_poly_n2(p: ModelParams) -> np.ndarray:
    """Monic cubic whose roots are the J=1 eigenvalues, highest power first."""
    _require(p, 2)
    w, a2, d2 = p.w, p.a_amp**2, p.detuning**2
    return np.array([1.0, -4 * w, 5 * w * w - 4 * a2 - d2, 2 * w * (d2 + 2 * a2 - w * w)])


def char_poly_n3(p: ModelParams) -> Polynomial:
    """Quartic in E whose roots are the J=3/2 eigenvalues.

    Built in the factored form (two 2x2 determinants minus the coupling of
    the middle pair); the returned Polynomial is callable and has ``.roots()``.
    """
    _require(p, 3)
    w, d, a2 = p.w, p.detuning, p.a_amp**2
    e = Polynomial([0.0, 1.0])
    e_vac = 1.5 * (w - d)
    e_one = 0.5 * (7 * w - d)
    e_two = 0.5 * (7 * w + d)
    e_three = 1.5 * (w + d)
    lower = (e_vac - e) * (e_one - e) - 3 * a2
    upper = (e_three - e) * (e_two - e) - 3 * a2
    return lower * upper - 4 * a2 * (e_vac - e) * (e_three - e)


def _n2_vector(p: ModelParams, energy: float) -> np.ndarray:
    a, w, d = p.a_amp, p.w, p.detuning
    shift = energy + d - w
    vec = np.array(
        [1.0, shift / (SQRT2 * a), -(2 * a * a + (2 * w - energy) * shift) / (2 * a * a)],
        dtype=complex,
    )
    return vec * _coupling_phases(p, 3)


def eigen_n2_resonant(p: ModelParams) -> EigenSystem:
    """Resonant two-dot spectrum: W and (3W ± sqrt(16|A|² + W²)) / 2.

    Eigenvectors follow the closed-form components and are normalized
    explicitly.  For |A| = 0 the components are singular and the bare states
    are returned instead.
    """
    _require(p, 2, resonant=True)
    w, a = p.w, p.a_amp
    root = math.sqrt(16 * a * a + w * w)
    energies = [w, 0.5 * (3 * w + root), 0.5 * (3 * w - root)]
    if a == 0:
        # bare levels: k=0 -> |M=-1>, k=1 -> |M=0>; |M=+1> is the other root at W
        return _sorted_system([w, 2 * w, w], np.eye(3))
    return _sorted_system(energies, [_n2_vector(p, e) for e in energies])


def _n3_roots(w: float, a: float) -> list[float]:
    plus = math.sqrt((w + a) ** 2 + 3 * a * a)
    minus = math.sqrt((w - a) ** 2 + 3 * a * a)
    return [2.5 * w + a + plus, 2.5 * w + a - plus, 2.5 * w - a + minus, 2.5 * w - a - minus]


def _n3_eta(w: float, a: float, energy: float) -> float:
    return (1 + (energy - 1.5 * w) ** 2 / (3 * a * a)) ** -0.5 / SQRT2


def _n3_rows(p: ModelParams, energies) -> np.ndarray:
    w, a = p.w, p.a_amp
    rows = []
    for k, e in enumerate(energies):
        x = (e - 1.5 * w) / (SQRT3 * a)
        sign = 1.0 if k < 2 else -1.0
        rows.append(_n3_eta(w, a, e) * np.array([1.0, x, sign * x, sign]))
    return np.array(rows, dtype=complex) * _coupling_phases(p, 4)


def eigen_n3_resonant(p: ModelParams) -> EigenSystem:
    """Resonant three-dot spectrum 5W/2 ± |A| ± sqrt((W ± |A|)² + 3|A|²)."""
    _require(p, 3, resonant=True)
    w, a = p.w, p.a_amp
    energies = _n3_roots(w, a)
    if a == 0:
        # E0=7W/2 (M=-1/2), E1=3W/2 (M=-3/2), E2=7W/2 (M=+1/2), E3=3W/2 (M=+3/2)
        return _sorted_system(energies, np.eye(4)[[1, 0, 2, 3]])
    return _sorted_system(energies, _n3_rows(p, energies))


def coefficients_vacuum_n3(p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Expansion of the exciton vacuum in the resonant three-dot eigenbasis.

    Returns ``(c, amat)`` in closed-form label order (not ascending energy):
    the vacuum equals ``sum_k c[k] * amat[k]`` and the state at time τ is
    ``sum_k c[k] * exp(-1j * E_k * τ) * amat[k]``.  Column j of ``amat``
    carries the coupling phase factor exp(i j a_phase).
    """
    _require(p, 3, resonant=True)
    w, a = p.w, p.a_amp
    e0, e1, e2, e3 = energies = _n3_roots(w, a)
    if a == 0 or e1 == e0 or e3 == e2:
        raise DegeneracyError("vacuum coefficients need |A| > 0 (distinct paired roots)")
    eta = [_n3_eta(w, a, e) for e in energies]
    c = np.array(
        [
            (e1 - 1.5 * w) / (2 * eta[0] * (e1 - e0)),
            (e0 - 1.5 * w) / (2 * eta[1] * (e0 - e1)),
            (e3 - 1.5 * w) / (2 * eta[2] * (e3 - e2)),
            (e2 - 1.5 * w) / (2 * eta[3] * (e2 - e3)),
        ]
    )
    return c, _n3_rows(p, energies)


def n3_resonant_energies(p: ModelParams) -> np.ndarray:
    """The four resonant three-dot energies in closed-form label order."""
    _require(p, 3, resonant=True)
    return np.array(_n3_roots(p.w, p.a_amp))
