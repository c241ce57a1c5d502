import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from excitonqd.collective import ModelParams, build_h_prime
from excitonqd.dynamics import generic_hermitian_eig
from excitonqd.errors import DegeneracyError, DomainError
from excitonqd.spectra import (
    canonical_phase,
    char_poly_n2,
    char_poly_n3,
    coefficients_vacuum_n3,
    eigen_n2_resonant,
    eigen_n3_resonant,
    n3_resonant_energies,
)

w_st = st.floats(0, 1)
a_st = st.floats(1e-3, 1)
phase_st = st.floats(-np.pi, np.pi)


def numeric(p, j):
    return np.linalg.eigvalsh(np.asarray(build_h_prime(j, p)))


class TestCharacteristicPolynomials:
    @settings(max_examples=100, deadline=None)
    @given(w_st, st.floats(0, 1), st.floats(-1, 1), phase_st)
    def test_n2_roots_are_eigenvalues(self, w, a, d, phase):
        p = ModelParams(n_dots=2, w=w, a_amp=a, detuning=d, a_phase=phase)
        coeffs = char_poly_n2(p)
        for e in numeric(p, 1):
            assert abs(np.polyval(coeffs, e)) < 1e-12

    @settings(max_examples=100, deadline=None)
    @given(w_st, st.floats(0, 1), st.floats(-1, 1))
    def test_n3_roots_are_eigenvalues(self, w, a, d):
        p = ModelParams(n_dots=3, w=w, a_amp=a, detuning=d)
        poly = char_poly_n3(p)
        for e in numeric(p, 1.5):
            assert abs(poly(e)) < 1e-11

    def test_n3_is_monic_quartic(self):
        poly = char_poly_n3(ModelParams(n_dots=3, w=0.2, a_amp=0.1, detuning=0.05))
        assert poly.degree() == 4
        assert poly.coef[-1] == pytest.approx(1.0)

    def test_n3_equals_determinant(self):
        p = ModelParams(n_dots=3, w=0.2, a_amp=0.1, detuning=0.05)
        h = np.asarray(build_h_prime(1.5, p))
        for e in (-0.3, 0.1, 0.77):
            np.testing.assert_allclose(char_poly_n3(p)(e), np.linalg.det(h - e * np.eye(4)).real, atol=1e-14)

    def test_wrong_dot_count(self):
        with pytest.raises(DomainError):
            char_poly_n2(ModelParams(n_dots=3))
        with pytest.raises(DomainError):
            char_poly_n3(ModelParams(n_dots=2))


class TestClosedForms:
    def test_n2_values(self):
        # W = 0.1, |A| = 0.04: sqrt(16 * 0.0016 + 0.01) = sqrt(0.0356)
        root = np.sqrt(0.0356)
        es = eigen_n2_resonant(ModelParams(w=0.1, a_amp=0.04)).energies
        np.testing.assert_allclose(es, sorted([0.1, (0.3 + root) / 2, (0.3 - root) / 2]), rtol=1e-15)

    def test_n3_values(self):
        w, a = 0.1, 0.04
        expected = [
            2.5 * w + a + np.hypot(w + a, np.sqrt(3) * a),
            2.5 * w + a - np.hypot(w + a, np.sqrt(3) * a),
            2.5 * w - a + np.hypot(w - a, np.sqrt(3) * a),
            2.5 * w - a - np.hypot(w - a, np.sqrt(3) * a),
        ]
        p = ModelParams(n_dots=3, w=w, a_amp=a)
        np.testing.assert_allclose(n3_resonant_energies(p), expected, rtol=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(w_st, a_st, phase_st)
    def test_n2_matches_generic_solver(self, w, a, phase):
        p = ModelParams(n_dots=2, w=w, a_amp=a, a_phase=phase)
        closed = eigen_n2_resonant(p)
        h = np.asarray(build_h_prime(1, p))
        np.testing.assert_allclose(closed.energies, numeric(p, 1), atol=1e-10)
        assert closed.residuals(h).max() < 1e-10

    @settings(max_examples=200, deadline=None)
    @given(w_st, a_st, phase_st)
    def test_n3_matches_generic_solver(self, w, a, phase):
        p = ModelParams(n_dots=3, w=w, a_amp=a, a_phase=phase)
        closed = eigen_n3_resonant(p)
        h = np.asarray(build_h_prime(1.5, p))
        np.testing.assert_allclose(closed.energies, numeric(p, 1.5), atol=1e-10)
        assert closed.residuals(h).max() < 1e-10

    def test_vectors_agree_with_generic_solver(self):
        for p, j, closed in [
            (ModelParams(w=0.1, a_amp=0.04, a_phase=0.7), 1, eigen_n2_resonant),
            (ModelParams(n_dots=3, w=0.1, a_amp=0.04, a_phase=-1.1), 1.5, eigen_n3_resonant),
        ]:
            generic = generic_hermitian_eig(build_h_prime(j, p))
            np.testing.assert_allclose(closed(p).vectors, generic.vectors, atol=1e-12)

    def test_orthonormal(self):
        v = eigen_n3_resonant(ModelParams(n_dots=3, w=0.3, a_amp=0.2)).vectors
        np.testing.assert_allclose(v @ v.conj().T, np.eye(4), atol=1e-14)

    def test_labels_map_closed_form_order(self):
        p = ModelParams(n_dots=3, w=0.1, a_amp=0.04)
        sys_ = eigen_n3_resonant(p)
        raw = n3_resonant_energies(p)
        for k, row in sys_.labels.items():
            assert sys_.energies[row] == pytest.approx(raw[k])

    @pytest.mark.parametrize("closed,n,j", [(eigen_n2_resonant, 2, 1), (eigen_n3_resonant, 3, 1.5)])
    def test_zero_drive_gives_bare_states(self, closed, n, j):
        p = ModelParams(n_dots=n, w=0.2, a_amp=0.0)
        sys_ = closed(p)
        h = np.asarray(build_h_prime(j, p))
        assert sys_.residuals(h).max() < 1e-15
        np.testing.assert_allclose(np.abs(sys_.vectors) ** 2 @ np.ones(int(2 * j + 1)), 1.0)

    def test_requires_resonance(self):
        with pytest.raises(DomainError):
            eigen_n2_resonant(ModelParams(detuning=0.1))


class TestVacuumCoefficients:
    @settings(max_examples=100, deadline=None)
    @given(w_st, a_st, phase_st)
    def test_reconstructs_vacuum(self, w, a, phase):
        c, amat = coefficients_vacuum_n3(ModelParams(n_dots=3, w=w, a_amp=a, a_phase=phase))
        np.testing.assert_allclose(c @ amat, [1, 0, 0, 0], atol=1e-10)

    def test_time_evolution_matches_eigen_expansion(self):
        p = ModelParams(n_dots=3, w=0.1, a_amp=0.04)
        c, amat = coefficients_vacuum_n3(p)
        energies = n3_resonant_energies(p)
        tau = 37.5
        state = (c * np.exp(-1j * energies * tau)) @ amat
        h = np.asarray(build_h_prime(1.5, p))
        vals, vecs = np.linalg.eigh(h)
        ref = vecs @ (np.exp(-1j * vals * tau) * vecs.conj().T[:, 0])
        np.testing.assert_allclose(state, ref, atol=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegeneracyError):
            coefficients_vacuum_n3(ModelParams(n_dots=3, a_amp=0.0))


def test_canonical_phase():
    v = canonical_phase(np.array([[0, 2j, 0], [1e-14, -3, 4]]))
    np.testing.assert_allclose(v, [[0, 1, 0], [-1e-14 / 5, 0.6, -0.8]], atol=1e-15)
