import numpy as np
import pytest

from qbnoise.classical import (
    allowed_moves,
    classical_generator,
    configuration_label,
    evolve_classical,
    gillespie_sample,
    gillespie_trajectory,
    total_variation,
    validate_distribution,
    verify_diagonal_correspondence,
)
from qbnoise.exceptions import DomainError, ShapeError
from qbnoise.fock import popcounts, subset_to_mask
from qbnoise.semigroup import build_model, random_hamiltonian
from qbnoise.weighted import TransitionKernel, canonical_kernel, nearest_neighbor_kernel, random_kernel

ONE_WAY = TransitionKernel([[0.0, 0.0], [1.0, 0.0]])


def test_moves_two_state():
    src, dst, rate = allowed_moves(ONE_WAY)
    assert list(zip(src, dst, rate)) == [(subset_to_mask({0}), subset_to_mask({1}), 1.0)]
    assert allowed_moves(canonical_kernel(3))[0].size == 0


def test_generator_columns_sum_to_zero(rng):
    Q = classical_generator(random_kernel(4, rng)).toarray()
    assert np.abs(Q.sum(axis=0)).max() <= 1e-14
    off = Q - np.diag(np.diag(Q))
    assert off.min() >= 0


def test_generator_conserves_particle_number(rng):
    Q = classical_generator(random_kernel(4, rng)).toarray()
    counts = popcounts(4)
    rows, cols = np.nonzero(Q)
    assert np.array_equal(counts[rows], counts[cols])


def test_two_state_closed_form():
    p0 = np.eye(4)[subset_to_mask({0})]
    for t in (0.1, 1.0, 5.0):
        p = evolve_classical(classical_generator(ONE_WAY), p0, t)
        assert p[subset_to_mask({1})] == pytest.approx(1 - np.exp(-t), abs=1e-12)


def test_symmetric_walk_relaxes_to_uniform():
    n = 4
    Q = classical_generator(nearest_neighbor_kernel(n, 1.0, 1.0, 0.0))
    p0 = np.zeros(1 << n)
    p0[subset_to_mask({0})] = 1
    p = evolve_classical(Q, p0, 60.0)
    singles = [subset_to_mask({k}) for k in range(n)]
    assert np.allclose(p[singles], 1 / n, atol=1e-8)


def test_evolve_classical_validation():
    Q = classical_generator(ONE_WAY)
    with pytest.raises(DomainError):
        evolve_classical(Q, [0.5, 0.5, 0.5, 0], 1.0)
    with pytest.raises(DomainError):
        evolve_classical(Q, [1, 0, 0, 0], -0.1)
    with pytest.raises(ShapeError):
        validate_distribution([1.0], dim=4)
    assert np.array_equal(evolve_classical(Q, [0, 1, 0, 0], 0.0), [0, 1, 0, 0])


def test_gillespie_two_state():
    p = gillespie_sample(ONE_WAY, {0}, 1.0, 100_000, seed=11)
    assert abs(p[subset_to_mask({1})] - (1 - np.exp(-1))) <= 0.01
    assert p.sum() == pytest.approx(1.0)


def test_gillespie_against_ode(rng):
    K = nearest_neighbor_kernel(3, 1.0, 0.5, 0.3)
    sigma0 = {0, 1}
    p0 = np.eye(8)[subset_to_mask(sigma0)]
    p_ode = evolve_classical(classical_generator(K), p0, 0.8)
    p_mc = gillespie_sample(K, sigma0, 0.8, 100_000, seed=5)
    assert np.abs(p_mc - p_ode).max() <= 0.01
    # only two-particle configurations are reachable
    assert np.all(p_mc[popcounts(3) != 2] == 0)


def test_gillespie_determinism():
    K = nearest_neighbor_kernel(3, 1.0, 1.0, 0.0)
    a = gillespie_sample(K, {1}, 2.0, 25_000, seed=3)
    b = gillespie_sample(K, {1}, 2.0, 25_000, seed=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, gillespie_sample(K, {1}, 2.0, 25_000, seed=4))


def test_gillespie_frozen_states():
    p = gillespie_sample(canonical_kernel(2), {0}, 3.0, 100, seed=0)
    assert p[subset_to_mask({0})] == 1.0
    with pytest.raises(DomainError):
        gillespie_sample(ONE_WAY, {0}, 1.0, 0, seed=0)


def test_trajectory_records(rng):
    K = nearest_neighbor_kernel(4, 1.0, 1.0, 0.0)
    path = gillespie_trajectory(K, {0, 2}, 5.0, rng)
    times = [t for t, _ in path]
    assert times[0] == 0 and times == sorted(times) and times[-1] <= 5.0
    assert all(bin(s).count("1") == 2 for _, s in path)


def test_quantum_populations_follow_chain(rng):
    for n in (2, 3, 4):
        model = build_model(random_kernel(n, rng), random_hamiltonian(n, rng))
        p0 = rng.dirichlet(np.ones(1 << n))
        for t in (0.2, 1.0):
            reports = verify_diagonal_correspondence(model, p0, t)
            assert [r.identity for r in reports] == ["diagonal_correspondence", "diagonal_invariance"]
            assert all(r.passed for r in reports)


def test_helpers():
    assert total_variation([1, 0], [0, 1]) == 1.0
    assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert configuration_label(0) == "[]"
    assert configuration_label(subset_to_mask({0, 2})) == "[0,2]"
