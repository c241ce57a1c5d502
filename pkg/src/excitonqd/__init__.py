"""Entangled exciton states in optically driven coupled quantum dots."""
from .collective import (
    MAX_DOTS,
    DickeLabel,
    HamiltonianMatrix,
    ModelParams,
    bare_energy,
    build_h_prime,
    collective_basis,
    enumerate_j_blocks,
    m_values,
    multiplicity,
)
from .dynamics import (
    DEFAULT_DTAU,
    HBAR_EV_S,
    StateVector,
    TimeSeries,
    basis_state,
    eigen_propagate,
    expectation,
    from_interaction_picture,
    generic_hermitian_eig,
    integrate_lab,
    integrate_reduced,
    propagate_series,
    to_interaction_picture,
    to_lab_frame,
    to_rotating_frame,
)
from .errors import AccuracyError, DegeneracyError, DomainError
from .metrics import (
    PulseResult,
    bell_probability,
    find_pulse_length,
    ghz_probability,
    search_pulse,
    target_probability,
    tau_to_seconds,
)
from .spectra import (
    EigenSystem,
    char_poly_n2,
    char_poly_n3,
    coefficients_vacuum_n3,
    eigen_n2_resonant,
    eigen_n3_resonant,
)

__version__ = "0.1.0"
