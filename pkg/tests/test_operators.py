import numpy as np
import pytest
from numpy.testing import assert_allclose

from szego_lab.hardy import FourierState, GridPlan
from szego_lab.operators import (
    antilinear_commutator,
    bu_cu_matrices,
    hankel_matrix,
    hankel_square,
    k_square,
    rank_one_residual,
    shift_identity_residual,
    shifted_hankel_matrix,
    toeplitz_matrix,
)


@pytest.fixture
def state(rng) -> FourierState:
    coeffs = (rng.standard_normal(12) + 1j * rng.standard_normal(12)) * 0.5 ** np.arange(12)
    return FourierState.from_coeffs(coeffs, 16)


def test_hankel_entries(state):
    gamma = hankel_matrix(state).entries
    assert gamma[2, 3] == state.coeffs[5]
    assert gamma[15, 15] == 0
    assert_allclose(gamma, gamma.T)
    assert_allclose(shifted_hankel_matrix(state).entries[:-1, :-1], gamma[1:, :-1])


def test_hankel_is_conjugate_linear(state, rng):
    h = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    H = hankel_matrix(state)
    assert_allclose(H.apply(1j * h), -1j * H.apply(h), atol=1e-13)


def test_squares_match_compositions(state):
    gamma = hankel_matrix(state).entries
    shifted = shifted_hankel_matrix(state).entries
    assert_allclose(hankel_square(state).entries, gamma @ gamma.conj(), atol=1e-13)
    assert_allclose(k_square(state).entries, shifted @ shifted.conj(), atol=1e-13)
    assert hankel_square(state).is_hermitian()


def test_rank_one_identity(state):
    assert rank_one_residual(state) < 1e-12
    assert rank_one_residual(FourierState.zeros(4)) == 0.0


def test_shift_identity(state):
    assert shift_identity_residual(state) == 0.0


def test_matrix_size_bounds(state):
    assert hankel_matrix(state, 8).size == 8
    with pytest.raises(ValueError):
        hankel_matrix(state, 17)


def test_toeplitz_of_constant_symbol():
    plan = GridPlan(M=64, N=16)
    T = toeplitz_matrix(np.full(plan.M, 3.0), 8, plan)
    assert_allclose(T.entries, 3.0 * np.eye(8), atol=1e-13)
    with pytest.raises(ValueError):
        toeplitz_matrix(np.ones(plan.M), 33, plan)


def test_lax_operators_are_skew_hermitian(state):
    b_u, c_u = bu_cu_matrices(state, GridPlan(M=64, N=16))
    for matrix in (b_u.entries, c_u.entries):
        assert_allclose(matrix + matrix.conj().T, 0.0, atol=1e-12)


def test_antilinear_commutator_acts_like_the_operators(state, rng):
    b_u, _ = bu_cu_matrices(state, GridPlan(M=64, N=16))
    H = hankel_matrix(state)
    h = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    direct = b_u.apply(H.apply(h)) - H.apply(b_u.apply(h))
    assert_allclose(antilinear_commutator(b_u, H).apply(h), direct, atol=1e-12)
