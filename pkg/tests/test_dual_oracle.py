import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from sicprop.dual_oracle import (
    DualAmplitudePair,
    LogicalSign,
    OracleSpec,
    apply_oracle,
    oracle_diagonal,
    oracle_phase,
    overlap_closed_form,
    overlap_integral,
    uniform_state,
)
from sicprop.errors import ContractError


def test_logical_sign_coerce():
    assert LogicalSign.coerce(1) is LogicalSign.PLUS
    assert LogicalSign.coerce(-1.0) is LogicalSign.MINUS
    for bad in (0, 2, 0.5, "x", None):
        with pytest.raises(ContractError):
            LogicalSign.coerce(bad)


def test_single_qubit_projector():
    assert np.array_equal(oracle_diagonal(OracleSpec(1, 0, 0, 1.0)), np.diag([1, 0]))


@given(st.integers(1, 6), st.data())
def test_projector_properties(n, data):
    s = data.draw(st.integers(0, 2**n - 1))
    d = oracle_diagonal(OracleSpec(n, 0, s, 0.3))
    assert np.allclose(d @ d, d)
    assert np.trace(d).real == pytest.approx(1.0)
    assert d[s, s] == 1.0


def test_signs_follow_bits():
    spec = OracleSpec(3, 0, 0b101, 0.0)
    assert [int(a) for a in spec.signs()] == [-1, 1, -1]


def test_zero_theta_is_identity():
    assert np.array_equal(oracle_phase(OracleSpec(3, 2, 5, 0.0)), np.eye(8))


def test_shared_target_keeps_states_equal():
    pair = apply_oracle(DualAmplitudePair.shared(uniform_state(3)), OracleSpec(3, 4, 4, 1.1))
    assert np.array_equal(pair.physical, pair.math)


def test_pure_phase_on_basis_state():
    e = np.zeros(4, dtype=complex)
    e[2] = 1.0
    pair = apply_oracle(DualAmplitudePair.shared(e), OracleSpec(2, 2, 1, np.pi))
    assert np.allclose(pair.physical, -e, atol=1e-15)


def test_uniform_four_at_pi_is_orthogonal():
    pair = apply_oracle(DualAmplitudePair.shared(uniform_state(2)), OracleSpec(2, 0, 3, np.pi))
    assert abs(overlap_integral(pair)) <= 1e-15


def test_vanishing_amplitudes_give_one():
    psi = np.array([0, 1, 0, 0], dtype=complex)
    spec = OracleSpec(2, 0, 3, 0.9)
    assert overlap_integral(apply_oracle(DualAmplitudePair.shared(psi), spec)) == pytest.approx(1.0)
    assert overlap_closed_form(psi, spec) == pytest.approx(1.0)


@given(st.integers(1, 6), st.floats(-7, 7), st.integers(0, 2**31), st.data())
def test_overlap_matches_closed_form(n, theta, seed, data):
    x0 = data.draw(st.integers(0, 2**n - 1))
    s = data.draw(st.integers(0, 2**n - 1))
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    v /= np.linalg.norm(v)
    spec = OracleSpec(n, x0, s, theta)
    pair = apply_oracle(DualAmplitudePair.shared(v), spec)
    assert np.linalg.norm(pair.physical) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(pair.math) == pytest.approx(1.0, abs=1e-12)
    assert abs(overlap_integral(pair) - overlap_closed_form(v, spec)) <= 1e-12


def test_spec_validation():
    with pytest.raises(ContractError):
        OracleSpec(2, 4, 0, 0.0)
    with pytest.raises(ContractError):
        OracleSpec(0, 0, 0, 0.0)
    with pytest.raises(ContractError):
        OracleSpec(2, 0, 1, float("nan"))
    with pytest.raises(ContractError):
        apply_oracle(DualAmplitudePair.shared(uniform_state(2)), OracleSpec(3, 0, 1, 1.0))
