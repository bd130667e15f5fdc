import numpy as np
import pytest
from hypothesis import given, strategies as st

from sicprop.errors import CapacityError, ContractError
from sicprop.hilbert_core import mat_exp
from sicprop.spin_synthesis import (
    SpinRegister,
    basic_sic_rotation,
    generator_from_angles,
    linear_angles,
    linear_phase_propagator,
    lomso_conjugation_reduce,
    pair_coupling_propagator,
    quadratic_angles,
    quadratic_phase_propagator,
    single_spin_z_propagator,
    spin_operator,
)

signs = st.sampled_from([1, -1])


def test_register_limits():
    with pytest.raises(ContractError):
        SpinRegister(0)
    with pytest.raises(CapacityError):
        SpinRegister(13)


def test_spin_one_is_least_significant():
    reg = SpinRegister(2)
    assert np.allclose(np.diag(spin_operator(reg, 1, "z")).real, [0.5, -0.5, 0.5, -0.5])
    assert np.allclose(np.diag(spin_operator(reg, 2, "z")).real, [0.5, 0.5, -0.5, -0.5])


def test_rotation_zero_angle():
    assert np.allclose(basic_sic_rotation(SpinRegister(2), 1, "x", 1, 0.0), np.eye(4))


def test_rotation_z_pi():
    got = basic_sic_rotation(SpinRegister(1), 1, "z", 1, np.pi)
    assert np.allclose(got, np.diag([np.exp(-0.5j * np.pi), np.exp(0.5j * np.pi)]), atol=1e-15)


@given(st.sampled_from("xyz"), st.floats(-10, 10))
def test_rotation_sign_flip_is_adjoint(axis, theta):
    reg = SpinRegister(2)
    plus = basic_sic_rotation(reg, 2, axis, 1, theta)
    minus = basic_sic_rotation(reg, 2, axis, -1, theta)
    assert np.allclose(minus, plus.conj().T, atol=1e-13)


def test_linear_zero_alpha():
    p = linear_phase_propagator(SpinRegister(3), 0.0, 1)
    assert np.all(p.phases == 0) and p.global_phase.angle == 0


def test_linear_quarter_pi_values():
    p = linear_phase_propagator(SpinRegister(2), np.pi / 4, 1)
    assert p.global_phase.angle == pytest.approx(3 * np.pi / 8)
    assert p.total_phases()[3] == pytest.approx(-3 * np.pi / 8)


@given(st.floats(-5, 5), signs)
def test_linear_k0_equals_global(alpha, a):
    p = linear_phase_propagator(SpinRegister(3), alpha, a)
    assert p.phases[0] == 0.0


def test_pair_coupling_values():
    tp = np.zeros((2, 2))
    tp[1, 0] = np.pi
    p = pair_coupling_propagator(SpinRegister(2), tp, 1)
    assert np.allclose(p.phases, [-np.pi / 2, np.pi / 2, np.pi / 2, -np.pi / 2])
    assert np.allclose(p.phases, p.phases[::-1])
    assert np.all(pair_coupling_propagator(SpinRegister(2), np.zeros((2, 2)), 1).phases == 0)


def test_pair_coupling_rejects_upper_triangle():
    with pytest.raises(ContractError):
        pair_coupling_propagator(SpinRegister(2), np.triu(np.ones((2, 2))), 1)


def test_quadratic_small_register():
    beta = 0.37
    p = quadratic_phase_propagator(SpinRegister(2), beta, 1)
    assert np.allclose(p.phases - p.phases[0], -beta * np.array([0, 1, 4, 9]), atol=1e-15)
    assert np.all(quadratic_phase_propagator(SpinRegister(3), 0.0, 1).diagonal() == 1)


@given(st.integers(1, 6), st.floats(-2, 2), st.floats(-2, 2), signs)
def test_profiles_match_brute_force(d, alpha, beta, a):
    reg = SpinRegister(d)
    for prof, ang in (
        (linear_phase_propagator(reg, alpha, a), linear_angles(reg, alpha)),
        (quadratic_phase_propagator(reg, beta, a), quadratic_angles(reg, beta)),
    ):
        brute = np.diag(mat_exp(generator_from_angles(reg, ang), -1j * a))
        assert np.max(np.abs(prof.diagonal() - brute)) <= 1e-10


@given(st.integers(2, 5), st.floats(-2, 2))
def test_sign_flip_conjugates(d, beta):
    reg = SpinRegister(d)
    plus = quadratic_phase_propagator(reg, beta, 1)
    minus = quadratic_phase_propagator(reg, beta, -1)
    assert np.allclose(minus.diagonal(), plus.conj().diagonal(), atol=1e-12)


def test_quadratic_is_product_of_elementary_factors():
    reg = SpinRegister(4)
    ang = quadratic_angles(reg, 0.21)
    prod = pair_coupling_propagator(reg, ang.theta_pairs, -1).compose(single_spin_z_propagator(reg, ang.theta_list, -1))
    q = quadratic_phase_propagator(reg, 0.21, -1)
    assert np.allclose(prod.diagonal(), q.diagonal(), atol=1e-12)


def test_reduction_trivial_case():
    reg = SpinRegister(2)
    target, v = lomso_conjugation_reduce(reg, [2], 0.8, 1)
    assert np.array_equal(v, np.eye(4))
    assert np.allclose(target, basic_sic_rotation(reg, 2, "z", 1, 0.8))


@pytest.mark.parametrize("spins,d", [([1, 2], 2), ([2, 1], 2), ([1, 2, 3], 3), ([3, 1, 2], 3)])
@pytest.mark.parametrize("a", [1, -1])
def test_reduction_identity(spins, d, a):
    reg = SpinRegister(d)
    target, v = lomso_conjugation_reduce(reg, spins, 1.234, a)
    single = mat_exp(spin_operator(reg, spins[-1], "z"), -1.234j * a)
    assert np.max(np.abs(target - v @ single @ v.conj().T)) <= 1e-12


def test_reduction_rejects_repeats():
    with pytest.raises(ContractError):
        lomso_conjugation_reduce(SpinRegister(3), [1, 1], 0.1, 1)
