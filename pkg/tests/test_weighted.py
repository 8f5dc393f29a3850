import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import all_subsets, theta_by_sets

from qbnoise.exceptions import DomainError, ShapeError
from qbnoise.fock import basis_vector, residual_norm, spectral_norm, subset_to_mask
from qbnoise.weighted import (
    TransitionKernel,
    WeightFunction,
    canonical_kernel,
    embed_1d_kernel,
    kernel_from_json,
    kernel_to_json,
    make_kernel,
    nearest_neighbor_kernel,
    norm_of_weighted_number,
    number_operator,
    occupancy_weight,
    one_d_number_operator,
    random_kernel,
    theta,
    theta_partial,
    theta_table,
    weight_from_json,
    weighted_number_direct,
    weighted_number_spectral,
)

W22 = [[1, 2], [3, 4]]


def kernels(max_n=5):
    return st.integers(1, max_n).flatmap(
        lambda n: arrays(float, (n, n), elements=st.floats(0, 10, allow_subnormal=False))
    ).map(TransitionKernel)


def test_canonical_kernel():
    K = make_kernel("canonical", n=3)
    assert np.array_equal(K.w, np.eye(3))
    assert (K.alpha, K.beta, K.regular) == (1.0, 1.0, True)


def test_nearest_neighbor_kernel():
    K = make_kernel("nearest_neighbor", n=3, a=2, b=0, d=1)
    assert K.w[:, 1].sum() == 3
    assert K.alpha == 3
    assert K.regular
    assert K.w[2, 1] == 2 and K.w[0, 1] == 0 and K.w[1, 1] == 1


def test_zero_kernel():
    K = make_kernel("explicit", table=np.zeros((3, 3)))
    assert (K.alpha, K.beta, K.regular) == (0.0, 0.0, False)


def test_kernel_validation():
    with pytest.raises(DomainError):
        TransitionKernel([[1, -0.5], [0, 1]])
    with pytest.raises(ShapeError):
        TransitionKernel([[1, 2, 3]])
    with pytest.raises(DomainError):
        make_kernel("triangular", n=2)
    with pytest.raises(ShapeError):
        make_kernel("explicit", n=3, table=np.eye(2))


def test_kernel_json_roundtrip():
    K = nearest_neighbor_kernel(4, 0.5, 0.25, 1.0)
    again = kernel_from_json(kernel_to_json(K))
    assert np.array_equal(again.w, K.w)
    assert kernel_from_json({"n": 2, "type": "explicit", "table": W22}).w[1, 0] == 3
    assert weight_from_json({"n": 2, "u": [1, 2]}).n == 2


def test_theta_examples():
    K = TransitionKernel(W22)
    assert theta(K, {1}) == 6
    assert theta(K, set()) == 0
    for sigma in all_subsets(4):
        assert theta(canonical_kernel(4), sigma) == len(sigma)


@pytest.mark.parametrize("n", range(1, 7))
def test_theta_table_matches_set_oracle(n, rng):
    for _ in range(5):
        K = random_kernel(n, rng)
        table = theta_table(K)
        for sigma in all_subsets(n):
            expected = theta_by_sets(K.w.tolist(), sigma)
            assert table[subset_to_mask(sigma)] == pytest.approx(expected, abs=1e-13)
            assert theta(K, sigma) == pytest.approx(expected, abs=1e-13)


def test_weighted_number_direct_examples():
    assert np.array_equal(weighted_number_direct(canonical_kernel(2)).toarray().diagonal(), [0, 1, 1, 2])
    assert residual_norm(weighted_number_direct(TransitionKernel(np.zeros((3, 3))))) == 0.0
    S = weighted_number_direct(TransitionKernel(W22)).toarray()
    assert S[2, 2] == 6
    assert residual_norm(S - np.diag(S.diagonal())) == 0.0


@pytest.mark.parametrize("n", range(1, 9))
def test_direct_equals_spectral(n, rng):
    for _ in range(100):
        K = random_kernel(n, rng)
        assert residual_norm(weighted_number_direct(K), weighted_number_spectral(K)) <= 1e-12


def test_spectral_special_cases():
    assert residual_norm(weighted_number_spectral(canonical_kernel(5)), number_operator(5)) == 0.0
    assert residual_norm(weighted_number_spectral(TransitionKernel(np.zeros((2, 2))))) == 0.0


def test_eigenvector_property(rng):
    K = random_kernel(4, rng)
    S = weighted_number_direct(K)
    for mask in range(16):
        z = basis_vector(4, mask)
        assert np.allclose(S @ z, theta(K, mask) * z, atol=1e-13)


def test_occupancy_weight():
    for sigma in all_subsets(4):
        assert occupancy_weight(np.ones(4), sigma) == len(sigma)
    assert occupancy_weight([0.5, 2.0], set()) == 0
    assert occupancy_weight([0.5, 2.0], {0, 1}) == 2.5


def test_one_d_number_operator():
    assert residual_norm(one_d_number_operator(np.ones(3)), number_operator(3)) == 0.0
    assert residual_norm(one_d_number_operator(np.zeros(3))) == 0.0


@pytest.mark.parametrize("n", range(1, 7))
def test_one_d_equals_embedded_kernel(n, rng):
    u = WeightFunction(rng.uniform(0, 3, n))
    # summation order differs between the two, so allow round-off
    assert residual_norm(one_d_number_operator(u), weighted_number_spectral(embed_1d_kernel(u))) <= 1e-12
    assert residual_norm(one_d_number_operator(u), weighted_number_direct(embed_1d_kernel(u))) <= 1e-12


def test_embed_1d_kernel():
    assert np.array_equal(embed_1d_kernel(np.ones(3)).w, canonical_kernel(3).w)
    assert np.array_equal(embed_1d_kernel([2, 3]).w, [[2, 0], [0, 3]])
    assert embed_1d_kernel([1, 2]).regular
    assert not embed_1d_kernel([1, 0]).regular


def test_number_operator():
    assert np.array_equal(number_operator(2).toarray().diagonal(), [0, 1, 1, 2])
    assert not (number_operator(3) @ basis_vector(3, 0)).any()


def test_norm_examples():
    for n in range(1, 6):
        assert norm_of_weighted_number(canonical_kernel(n)) == n
    assert norm_of_weighted_number(TransitionKernel(np.zeros((2, 2)))) == 0
    # theta over the four subsets of n=2: 0, w00 + w10 = 4, w11 + w01 = 6, w00 + w11 = 5
    assert [theta(TransitionKernel(W22), m) for m in range(4)] == [0, 4, 6, 5]
    assert norm_of_weighted_number(TransitionKernel(W22)) == 6


@pytest.mark.parametrize("n", range(1, 9))
def test_norm_matches_spectral_norm(n, rng):
    for _ in range(10):
        K = random_kernel(n, rng)
        assert abs(spectral_norm(weighted_number_direct(K)) - norm_of_weighted_number(K)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(kernels())
def test_theta_growth_bound(K):
    card = np.array([len(s) for s in all_subsets(K.n)])
    th = theta_table(K)
    assert th[0] == 0
    assert np.all(th >= 0)
    assert np.all(th <= 2 * K.alpha * card * (1 + 1e-12))


@settings(max_examples=60, deadline=None)
@given(kernels())
def test_regular_lower_bound(K):
    if not K.regular:
        return
    card = np.array([len(s) for s in all_subsets(K.n)])
    assert np.all(card * K.beta <= theta_table(K) * (1 + 1e-12))


@settings(max_examples=40, deadline=None)
@given(kernels(4), st.data())
def test_partial_theta_monotone(K, data):
    mask = data.draw(st.integers(0, (1 << K.n) - 1))
    values = [theta_partial(K, mask, m) for m in range(K.n)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] == theta(K, mask)
    assert all(0 <= v <= theta(K, mask) for v in values)


def test_quadratic_form_sandwich(rng):
    for n in range(1, 7):
        for _ in range(20):
            K = random_kernel(n, rng, low=0.05)
            xi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
            S = weighted_number_direct(K)
            N = number_operator(n)
            Sxi, Nxi = S @ xi, N @ xi
            assert np.vdot(xi, Sxi).real <= 2 * K.alpha * np.vdot(xi, Nxi).real + 1e-10
            assert K.beta * np.vdot(Sxi, Nxi).real <= np.vdot(Sxi, Sxi).real + 1e-10


def test_lower_bound_needs_infimum_of_diagonal():
    # with the supremum of the diagonal the inequality breaks on Z_{0}
    K = TransitionKernel([[1.0, 0.0], [0.0, 10.0]])
    xi = basis_vector(2, [0])
    S, N = weighted_number_direct(K), number_operator(2)
    lhs = np.vdot(S @ xi, N @ xi).real
    rhs = np.vdot(S @ xi, S @ xi).real
    assert K.beta * lhs <= rhs
    assert K.diag_sup * lhs > rhs
