import numpy as np
import pytest
import scipy.linalg as la

from conftest import kron_ladder

from qbnoise.exceptions import CapacityError, DomainError, ShapeError
from qbnoise.fock import annihilator, basis_vector
from qbnoise.semigroup import (
    EvolutionParams,
    build_hamiltonian,
    build_model,
    choi_matrix,
    choi_partial_trace,
    contraction_semigroup_apply,
    diagonal_state,
    evolve_heisenberg,
    evolve_schrodinger,
    initial_state,
    lindblad_apply,
    lindblad_apply_predual,
    observable,
    random_hamiltonian,
    unitary_conjugation,
    vacuum_projection,
    verify_decoherence_free,
    verify_explicit_semigroup,
    verify_markov_properties,
    verify_subharmonic_vacuum,
)
from qbnoise.weighted import (
    TransitionKernel,
    canonical_kernel,
    nearest_neighbor_kernel,
    number_operator,
    random_kernel,
)

EXACT = EvolutionParams("exact")
ADAPTIVE = EvolutionParams("adaptive", tol=1e-11)


def dense_generator(w, f):
    """Heisenberg generator as a ``D^2 x D^2`` matrix, assembled from scratch."""
    n = len(w)
    D = 1 << n
    a = [kron_ladder(n, k, create=False) for k in range(n)]
    c = [kron_ladder(n, k, create=True) for k in range(n)]
    H = np.diag(f)

    def gen(X):
        out = 1j * (H @ X - X @ H)
        for j in range(n):
            for k in range(n):
                L = np.sqrt(w[j][k]) * c[j] @ a[k]
                LdL = L.T @ L
                out += L.T @ X @ L - 0.5 * (LdL @ X + X @ LdL)
        return out

    cols = []
    for idx in range(D * D):
        E = np.zeros(D * D, dtype=complex)
        E[idx] = 1
        cols.append(gen(E.reshape(D, D)).ravel())
    return np.array(cols).T


def random_model(n, rng):
    return build_model(random_kernel(n, rng), random_hamiltonian(n, rng))


def test_generator_canonical_two_modes():
    model = build_model(canonical_kernel(2))
    assert np.array_equal(model.G.toarray().diagonal(), [0, -0.5, -0.5, -1])
    assert model.admissibility_residual() == 0
    assert model.dissipation_residual() == 0
    assert len(model.jumps) == 2


def test_model_summary(rng):
    summary = build_model(nearest_neighbor_kernel(3, 1, 0.5, 0.25)).summary()
    assert summary["n"] == 3
    assert summary["regular"]
    assert summary["jump_operators"] == 3 + 2 + 2


def test_hamiltonian_builders():
    H = build_hamiltonian(2, "one_body", eps=[1.0, 2.0])
    assert np.array_equal(H.f, [0, 1, 2, 3])
    with pytest.raises(ShapeError):
        build_hamiltonian(2, "explicit", table=[1, 2, 3])
    with pytest.raises(DomainError):
        build_hamiltonian(2, "quadratic")
    with pytest.raises(ShapeError):
        build_model(canonical_kernel(3), build_hamiltonian(2))


def test_explicit_semigroup_vacuum_and_decay():
    model = build_model(canonical_kernel(3))
    vac = basis_vector(3, 0)
    assert np.array_equal(contraction_semigroup_apply(model, 2.0, vac), vac)
    z = basis_vector(3, [0, 2])
    assert np.allclose(contraction_semigroup_apply(model, 1.0, z), np.exp(-1.0) * z, atol=1e-15)


@pytest.mark.parametrize("n", range(1, 7))
def test_explicit_semigroup_matches_expm(n, rng):
    model = random_model(n, rng)
    xi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    for t in (0.0, 0.1, 1.0, 3.0):
        assert verify_explicit_semigroup(model, t, xi).passed


def test_generator_against_independent_assembly(rng):
    for n in (1, 2, 3):
        model = random_model(n, rng)
        M = dense_generator(model.kernel.w, model.hamiltonian.f)
        X = rng.normal(size=(1 << n,) * 2) + 1j * rng.normal(size=(1 << n,) * 2)
        assert np.abs(lindblad_apply(model, X).ravel() - M @ X.ravel()).max() <= 1e-12


def test_generator_identity_and_duality(rng):
    model = random_model(3, rng)
    D = model.dim
    assert np.abs(lindblad_apply(model, np.eye(D))).max() <= 1e-13
    X = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    rho = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    lhs = np.trace(rho @ lindblad_apply(model, X))
    rhs = np.trace(lindblad_apply_predual(model, rho) @ X)
    assert abs(lhs - rhs) <= 1e-12


def test_evolution_against_dense_expm(rng):
    model = random_model(2, rng)
    M = dense_generator(model.kernel.w, model.hamiltonian.f)
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    for t in (0.1, 1.0):
        oracle = (la.expm(t * M) @ X.ravel()).reshape(4, 4)
        assert np.abs(evolve_heisenberg(model, X, t, EXACT) - oracle).max() <= 1e-10
        assert np.abs(evolve_heisenberg(model, X, t, ADAPTIVE) - oracle).max() <= 1e-8


def test_exact_and_adaptive_agree(rng):
    model = random_model(3, rng)
    rho = initial_state(3, {"type": "mixture", "weights": {"[]": 0.5, "[0,2]": 0.5}})
    a = evolve_schrodinger(model, rho, 0.7, EXACT)
    b = evolve_schrodinger(model, rho, 0.7, ADAPTIVE)
    assert np.abs(a - b).max() <= 1e-8


def test_evolution_params():
    assert EvolutionParams().resolve(6) == "exact"
    assert EvolutionParams().resolve(7) == "adaptive"
    with pytest.raises(DomainError):
        EvolutionParams("rk4")
    with pytest.raises(DomainError):
        EvolutionParams(tol=0)


def test_evolution_input_validation():
    model = build_model(canonical_kernel(2))
    with pytest.raises(DomainError):
        evolve_heisenberg(model, np.eye(4), -1.0)
    with pytest.raises(ShapeError):
        evolve_heisenberg(model, np.eye(3), 1.0)
    with pytest.raises(DomainError):
        evolve_schrodinger(model, 2 * np.eye(4) / 4, 1.0)
    with pytest.raises(DomainError):
        evolve_schrodinger(model, np.diag([1.5, -0.5, 0, 0]), 1.0)
    with pytest.raises(CapacityError):
        evolve_heisenberg(build_model(canonical_kernel(11)), np.eye(2048), 1.0)


def test_zero_time_is_identity(rng):
    model = random_model(2, rng)
    X = rng.normal(size=(4, 4))
    assert np.array_equal(evolve_heisenberg(model, X, 0.0), X)


def test_vacuum_is_stationary():
    model = build_model(canonical_kernel(3))
    rho = diagonal_state(np.eye(8)[0])
    assert np.abs(evolve_schrodinger(model, rho, 2.0) - rho).max() <= 1e-12


def test_canonical_kernel_conserves_particles():
    # diagonal weights only dephase
    model = build_model(canonical_kernel(2))
    rho = initial_state(2, {"type": "basis", "subset": [0, 1]})
    N = number_operator(2).toarray()
    for t in (0.5, 1.0, 4.0):
        rho_t = evolve_schrodinger(model, rho, t)
        assert np.trace(rho_t @ N).real == pytest.approx(2.0, abs=1e-12)


def test_markov_properties_pass(rng):
    for n in (1, 2, 3, 4):
        model = random_model(n, rng)
        reports = verify_markov_properties(model, [0.1, 0.5, 1.0], seed=3)
        failed = [(r.identity, r.residual) for r in reports if not r.passed]
        assert not failed


def test_markov_report_set():
    reports = verify_markov_properties(build_model(canonical_kernel(2)), [0.5])
    assert [r.identity for r in reports] == [
        "conservative", "semigroup_law", "contraction", "positivity", "duality",
        "complete_positivity", "trace_preservation"]


def test_choi_matrix(rng):
    model = random_model(2, rng)
    C = choi_matrix(model, 0.8)
    assert C.shape == (16, 16)
    assert np.linalg.eigvalsh(C).min() >= -1e-10
    assert np.abs(choi_partial_trace(C, 4) - np.eye(4)).max() <= 1e-10
    # the identity channel has the maximally entangled Choi matrix
    C0 = choi_matrix(model, 0.0)
    v = np.eye(4).ravel()
    assert np.abs(C0 - np.outer(v, v)).max() == 0


def test_choi_capacity():
    with pytest.raises(CapacityError):
        choi_matrix(build_model(canonical_kernel(6)), 1.0)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_subharmonic_vacuum(t, rng):
    for kernel in (canonical_kernel(3), random_kernel(3, rng), TransitionKernel(np.zeros((2, 2)))):
        report = verify_subharmonic_vacuum(build_model(kernel), t)
        assert report.passed
    assert vacuum_projection(2)[0, 0] == 1


def test_decoherence_free_number_operator(rng):
    for kernel in (canonical_kernel(3), nearest_neighbor_kernel(3, 1, 1, 0.5)):
        model = build_model(kernel, build_hamiltonian(3, "one_body", eps=[0.3, -1.0, 2.0]))
        reports = verify_decoherence_free(model, number_operator(3), 1.0, name="number")
        assert [r.identity for r in reports] == [
            "decoherence_free_membership", "decoherence_free_unitary",
            "decoherence_free_weighted_commute", "decoherence_free_sandwich"]
        assert all(r.passed for r in reports)
        # N is diagonal, so d_k N d_k vanishes exactly
        assert reports[-1].details["raw_residual"] == 0


def test_decoherence_free_not_applicable():
    model = build_model(canonical_kernel(2))
    reports = verify_decoherence_free(model, annihilator(2, 0), 1.0, name="d0")
    assert len(reports) == 1
    assert reports[0].details["applicable"] is False
    assert not reports[0].passed


def test_unitary_conjugation():
    model = build_model(canonical_kernel(1), build_hamiltonian(1, "explicit", table=[0.0, 1.0]))
    X = np.array([[0, 1], [0, 0]], dtype=complex)
    assert np.allclose(unitary_conjugation(model, X, np.pi), -X, atol=1e-15)


def test_observable_and_state_specs():
    assert observable(2, "identity")[1] == "identity"
    X, name = observable(2, {"occupancy": 1})
    assert name == "occupancy_1"
    assert np.array_equal(X.diagonal(), [0, 0, 1, 1])
    with pytest.raises(ShapeError):
        observable(2, {"explicit": np.eye(3).tolist()})
    with pytest.raises(DomainError):
        observable(2, "momentum")
    rho = initial_state(2, {"type": "mixture", "weights": {"[0]": 0.25, "[0,1]": 0.75}})
    assert np.array_equal(rho.diagonal().real, [0, 0.25, 0, 0.75])
    with pytest.raises(DomainError):
        initial_state(2, {"type": "mixture", "weights": {"[0]": 0.25}})
