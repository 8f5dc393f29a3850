"""
Quantum exclusion Markov semigroup on a finite set of modes.

The model is fixed by a transition kernel ``w`` and a basis-diagonal
Hamiltonian ``H_f = diag(f)``.  From them

    G      = -i H_f - S_w / 2                     (diagonal)
    L_jk   = sqrt(w[j, k]) d_j^* d_k              (move a particle k -> j)
    L(X)   = i[H_f, X] + sum_jk L_jk^* X L_jk - {L_jk^* L_jk, X} / 2

and the semigroup is ``T_t = exp(t L)`` acting on observables (Heisenberg
picture); its predual acts on density matrices (Schrodinger picture).

Operators are vectorized row-major, ``vec(X)[s * D + t] = X[s, t]``, so that
``vec(A X B) = kron(A, B.T) vec(X)``.  Every ``L_jk`` sends a basis ket to a
basis ket or to zero, hence the superoperators are very sparse.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from .algebra import IdentityReport
from .exceptions import CapacityError, ConsistencyError, DomainError, ShapeError
from .fock import (
    adjoint,
    annihilator,
    check_modes,
    creator,
    dimension,
    occupation_table,
    residual_norm,
    subset_to_mask,
)
from .tolerances import DEFAULT_TOLERANCES, MARKOV_KEYS
from .weighted import (
    TransitionKernel,
    number_operator,
    theta_table,
    weighted_number_direct,
)

MAX_EVOLUTION_MODES = 10
MAX_SUPEROPERATOR_DIM = 4 ** 8
MAX_CHOI_MODES = 5
BUILD_TOL = 1e-12

__all__ = [
    "HamiltonianTable",
    "build_hamiltonian",
    "random_hamiltonian",
    "SemigroupModel",
    "build_model",
    "EvolutionParams",
    "contraction_semigroup_apply",
    "verify_explicit_semigroup",
    "lindblad_apply",
    "lindblad_apply_predual",
    "heisenberg_superoperator",
    "schrodinger_superoperator",
    "evolve_heisenberg",
    "evolve_schrodinger",
    "unitary_conjugation",
    "validate_density_matrix",
    "diagonal_state",
    "choi_matrix",
    "choi_partial_trace",
    "verify_markov_properties",
    "verify_subharmonic_vacuum",
    "verify_decoherence_free",
    "vacuum_projection",
    "observable",
    "initial_state",
]


@dataclass(frozen=True)
class HamiltonianTable:
    """Energies ``f[sigma]`` of the diagonal Hamiltonian ``H_f``."""

    f: np.ndarray
    kind: str = "explicit"

    def __post_init__(self):
        f = np.array(self.f, dtype=float).ravel()
        n = f.size.bit_length() - 1
        if f.size == 0 or (1 << n) != f.size:
            raise ShapeError(f"Hamiltonian table length must be a power of two, got {f.size}")
        check_modes(max(n, 1))
        if n == 0:
            raise ShapeError("Hamiltonian table needs at least two entries")
        if not np.all(np.isfinite(f)):
            raise DomainError("Hamiltonian entries must be finite")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    @property
    def n(self):
        return self.f.size.bit_length() - 1

    def operator(self):
        return sp.diags(self.f.astype(complex), format="csr")


def build_hamiltonian(n, kind="zero", eps=None, table=None):
    """``zero``, ``one_body`` (``f(sigma) = sum of eps[k], k in sigma``) or ``explicit``."""
    n = check_modes(n)
    if kind == "zero":
        return HamiltonianTable(np.zeros(1 << n), kind="zero")
    if kind == "one_body":
        eps = np.asarray(eps, dtype=float).ravel()
        if eps.size != n:
            raise ShapeError(f"one_body needs {n} energies, got {eps.size}")
        return HamiltonianTable(occupation_table(n) @ eps, kind="one_body")
    if kind == "explicit":
        table = np.asarray(table, dtype=float).ravel()
        if table.size != 1 << n:
            raise ShapeError(f"explicit table must have length {1 << n}, got {table.size}")
        return HamiltonianTable(table)
    raise DomainError(f"unknown Hamiltonian type {kind!r}")


def random_hamiltonian(n, rng, scale=1.0):
    return HamiltonianTable(rng.uniform(-scale, scale, size=1 << check_modes(n)))


@dataclass(eq=False)
class SemigroupModel:
    """Kernel plus Hamiltonian, with the derived generator pieces cached.

    Treat instances as immutable; use :func:`build_model` to construct one
    so the admissibility checks run.
    """

    kernel: TransitionKernel
    hamiltonian: HamiltonianTable

    @property
    def n(self):
        return self.kernel.n

    @property
    def dim(self):
        return 1 << self.n

    @cached_property
    def theta(self):
        return theta_table(self.kernel)

    @cached_property
    def g(self):
        """Diagonal of ``G = -i H_f - S_w / 2``."""
        return -1j * self.hamiltonian.f - 0.5 * self.theta

    @cached_property
    def G(self):
        return sp.diags(self.g, format="csr")

    @cached_property
    def H(self):
        return self.hamiltonian.operator()

    @cached_property
    def S(self):
        return weighted_number_direct(self.kernel)

    @cached_property
    def jumps(self):
        """``[(j, k, L_jk)]`` for every ``w[j, k] > 0``."""
        n = self.n
        out = []
        for j in range(n):
            for k in range(n):
                rate = self.kernel.w[j, k]
                if rate > 0:
                    L = (np.sqrt(rate) * (creator(n, j) @ annihilator(n, k))).tocsr()
                    out.append((j, k, L))
        return out

    def summary(self):
        return {
            "n": self.n,
            "kernel": self.kernel.kind,
            "alpha": self.kernel.alpha,
            "beta": self.kernel.beta,
            "diag_sup": self.kernel.diag_sup,
            "regular": self.kernel.regular,
            "norm_S_w": float(self.theta.max()),
            "jump_operators": len(self.jumps),
            "admissibility_residual": self.admissibility_residual(),
            "dissipation_residual": self.dissipation_residual(),
        }

    def admissibility_residual(self):
        """Max entry of ``G + G^* + S_w``."""
        return residual_norm(self.G + adjoint(self.G) + self.S)

    def dissipation_residual(self):
        """Max entry of ``sum L^* L - S_w``."""
        total = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for _, _, L in self.jumps:
            total = total + adjoint(L) @ L
        return residual_norm(total, self.S)


def build_model(kernel, hamiltonian=None):
    """Assemble a model and confirm ``G + G^* = -S_w`` and ``sum L^*L = S_w``."""
    if hamiltonian is None:
        hamiltonian = build_hamiltonian(kernel.n, "zero")
    if hamiltonian.n != kernel.n:
        raise ShapeError(f"kernel has n={kernel.n} but Hamiltonian has n={hamiltonian.n}")
    model = SemigroupModel(kernel, hamiltonian)
    adm = model.admissibility_residual()
    dis = model.dissipation_residual()
    if adm > BUILD_TOL or dis > BUILD_TOL:
        raise ConsistencyError(
            f"generator inconsistent: admissibility residual {adm:.3e}, dissipation residual {dis:.3e}")
    return model


@dataclass(frozen=True)
class EvolutionParams:
    """How ``exp(t L)`` is applied.

    ``method`` is ``"exact"`` (exponential action of the sparse
    superoperator), ``"adaptive"`` (embedded Runge-Kutta on the matrix ODE)
    or ``"auto"``, which takes the exact path while ``4**n <= max_exact_dim``.
    """

    method: str = "auto"
    tol: float = 1e-10
    max_exact_dim: int = 4096

    def __post_init__(self):
        if self.method not in ("auto", "exact", "adaptive"):
            raise DomainError(f"unknown evolution method {self.method!r}")
        if not self.tol > 0:
            raise DomainError("tolerance must be positive")

    def resolve(self, n):
        if self.method != "auto":
            return self.method
        return "exact" if 4 ** n <= self.max_exact_dim else "adaptive"


def _check_time(t):
    t = float(t)
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    return t


def _as_dense(X, dim):
    X = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=complex)
    if X.shape != (dim, dim):
        raise ShapeError(f"expected a {dim}x{dim} operator, got {X.shape}")
    return X.astype(complex, copy=False)


def contraction_semigroup_apply(model, t, xi):
    """``P_t xi``: multiply each amplitude by ``exp(-(i f + theta / 2) t)``."""
    t = _check_time(t)
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (model.dim,):
        raise ShapeError(f"expected vector of length {model.dim}, got {xi.shape}")
    return np.exp(model.g * t) * xi


def verify_explicit_semigroup(model, t, xi, tol=1e-10):
    """Closed-form ``P_t xi`` against ``expm(t G) xi``."""
    closed = contraction_semigroup_apply(model, t, xi)
    oracle = la.expm(t * model.G.toarray()) @ np.asarray(xi, dtype=complex)
    return IdentityReport("explicit_contraction_semigroup", model.n,
                          {"t": float(t), "kernel": model.kernel.digest()},
                          residual_norm(closed, oracle), tol)


def lindblad_apply(model, X):
    """Heisenberg generator ``i[H, X] + sum (L^* X L - {L^* L, X} / 2)``."""
    X = _as_dense(X, model.dim)
    H = model.H
    out = 1j * (H @ X - (H.T @ X.T).T)
    for _, _, L in model.jumps:
        Ld = adjoint(L)
        LdL = Ld @ L
        out += Ld @ (L.T @ X.T).T - 0.5 * (LdL @ X + (LdL.T @ X.T).T)
    return out


def lindblad_apply_predual(model, rho):
    """Schrodinger generator ``-i[H, rho] + sum (L rho L^* - {L^* L, rho} / 2)``."""
    rho = _as_dense(rho, model.dim)
    H = model.H
    out = -1j * (H @ rho - (H.T @ rho.T).T)
    for _, _, L in model.jumps:
        Ld = adjoint(L)
        LdL = Ld @ L
        out += L @ (Ld.T @ rho.T).T - 0.5 * (LdL @ rho + (LdL.T @ rho.T).T)
    return out


def _check_superop_size(model):
    if 4 ** model.n > MAX_SUPEROPERATOR_DIM:
        raise CapacityError(
            f"superoperator dimension 4**{model.n} exceeds the cap {MAX_SUPEROPERATOR_DIM}")


def heisenberg_superoperator(model):
    """Sparse ``4**n x 4**n`` matrix of ``L`` acting on ``vec(X)``."""
    _check_superop_size(model)
    if "_heis" not in model.__dict__:
        g = model.g
        diag = np.add.outer(g.conj(), g).ravel()
        M = sp.diags(diag, format="csr")
        for _, _, L in model.jumps:
            M = M + sp.kron(adjoint(L), L.T, format="csr")
        model.__dict__["_heis"] = M.tocsr()
    return model.__dict__["_heis"]


def schrodinger_superoperator(model):
    """Sparse ``4**n x 4**n`` matrix of the predual generator acting on ``vec(rho)``."""
    _check_superop_size(model)
    if "_schr" not in model.__dict__:
        g = model.g
        diag = np.add.outer(g, g.conj()).ravel()
        M = sp.diags(diag, format="csr")
        for _, _, L in model.jumps:
            M = M + sp.kron(L, L.conj(), format="csr")
        model.__dict__["_schr"] = M.tocsr()
    return model.__dict__["_schr"]


def _heisenberg_rhs(model):
    g = model.g
    gc = g.conj()
    pairs = [(adjoint(L), L) for _, _, L in model.jumps]

    def rhs(_, y):
        X = y.reshape(model.dim, model.dim)
        out = gc[:, None] * X + X * g[None, :]
        for Ld, L in pairs:
            out += Ld @ (L.T @ X.T).T
        return out.ravel()

    return rhs


def _schrodinger_rhs(model):
    g = model.g
    gc = g.conj()
    pairs = [(L, adjoint(L)) for _, _, L in model.jumps]

    def rhs(_, y):
        R = y.reshape(model.dim, model.dim)
        out = g[:, None] * R + R * gc[None, :]
        for L, Ld in pairs:
            out += L @ (Ld.T @ R.T).T
        return out.ravel()

    return rhs


def _evolve(model, Y, t, params, picture):
    t = _check_time(t)
    params = params or EvolutionParams()
    check_modes(model.n, MAX_EVOLUTION_MODES)
    Y = _as_dense(Y, model.dim)
    if t == 0:
        return Y.copy()
    method = params.resolve(model.n)
    if method == "exact":
        M = heisenberg_superoperator(model) if picture == "heisenberg" else schrodinger_superoperator(model)
        out = expm_multiply(t * M, Y.ravel())
        return np.asarray(out).reshape(model.dim, model.dim)
    rhs = _heisenberg_rhs(model) if picture == "heisenberg" else _schrodinger_rhs(model)
    sol = solve_ivp(rhs, (0.0, t), Y.ravel(), method="DOP853",
                    rtol=params.tol, atol=params.tol * 1e-2)
    if not sol.success:
        raise ConsistencyError(f"adaptive integration failed: {sol.message}")
    return sol.y[:, -1].reshape(model.dim, model.dim)


def evolve_heisenberg(model, X, t, params=None):
    """``T_t(X)`` as a dense array."""
    return _evolve(model, X, t, params, "heisenberg")


def validate_density_matrix(rho, n=None, herm_tol=1e-12, trace_tol=1e-12, eig_tol=1e-10):
    """Return ``rho`` as a dense array after checking Hermiticity, trace and positivity."""
    rho = rho.toarray() if sp.issparse(rho) else np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"density matrix must be square, got {rho.shape}")
    if n is not None and rho.shape[0] != dimension(n):
        raise ShapeError(f"density matrix has dimension {rho.shape[0]}, expected {dimension(n)}")
    if residual_norm(rho, rho.conj().T) > herm_tol:
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise DomainError(f"density matrix trace is {np.trace(rho).real}, expected 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -eig_tol:
        raise DomainError("density matrix has a negative eigenvalue")
    return rho.astype(complex)


def diagonal_state(p):
    """Density matrix ``diag(p)`` for a probability vector over subsets."""
    p = np.asarray(p, dtype=float)
    return np.diag(p).astype(complex)


def evolve_schrodinger(model, rho, t, params=None):
    """``rho_t`` with ``trace(rho_t X) = trace(rho T_t(X))``."""
    rho = validate_density_matrix(rho, model.n)
    return _evolve(model, rho, t, params, "schrodinger")


def unitary_conjugation(model, X, t):
    """``exp(i t H_f) X exp(-i t H_f)``; entrywise phases since ``H_f`` is diagonal."""
    X = _as_dense(X, model.dim)
    f = model.hamiltonian.f
    return np.exp(1j * t * np.subtract.outer(f, f)) * X


def choi_matrix(model, t):
    """Choi matrix ``sum_{s,r} |s><r| (x) Phi_t(|s><r|)`` of the Schrodinger map.

    Returned with row index ``s * D + a`` and column index ``r * D + b``.
    """
    t = _check_time(t)
    check_modes(model.n, MAX_CHOI_MODES)
    D = model.dim
    if t == 0:
        P = np.eye(D * D, dtype=complex)
    else:
        P = la.expm(t * schrodinger_superoperator(model).toarray())
    # P[a*D + b, s*D + r] = Phi(|s><r|)[a, b]
    C = P.reshape(D, D, D, D).transpose(2, 0, 3, 1).reshape(D * D, D * D)
    return 0.5 * (C + C.conj().T)


def choi_partial_trace(C, D):
    """Trace over the output factor; the identity for trace-preserving maps."""
    return np.einsum("sara->sr", C.reshape(D, D, D, D))


def _random_operator(rng, dim):
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def _psd_violation(A):
    A = 0.5 * (A + A.conj().T)
    return max(0.0, -float(np.linalg.eigvalsh(A).min()))


def verify_markov_properties(model, times, seed=0, params=None, tolerances=None):
    """Conservativity, semigroup law, contraction, positivity, duality and CP.

    Random observables come from ``numpy.random.default_rng(seed)``.
    """
    tol = {k: DEFAULT_TOLERANCES[k] for k in MARKOV_KEYS}
    tol.update(tolerances or {})
    rng = np.random.default_rng(seed)
    D = model.dim
    n = model.n
    eye = np.eye(D, dtype=complex)
    X = _random_operator(rng, D)
    X /= np.linalg.norm(X, 2)
    B = _random_operator(rng, D)
    P = B @ B.conj().T
    P /= np.linalg.norm(P, 2)
    psi = _random_operator(rng, D)[:, 0]
    rho = np.outer(psi, psi.conj())
    rho /= np.trace(rho)
    reports = []
    for t in times:
        t = _check_time(t)
        p = {"t": t, "kernel": model.kernel.digest()}
        TI = evolve_heisenberg(model, eye, t, params)
        reports.append(IdentityReport("conservative", n, p, residual_norm(TI, eye), tol["conservative"]))

        s = 0.3 * t
        TX = evolve_heisenberg(model, X, t, params)
        TsX = evolve_heisenberg(model, evolve_heisenberg(model, X, s, params), t - s, params)
        reports.append(IdentityReport(
            "semigroup_law", n, dict(p, s=s), residual_norm(TX, TsX), tol["semigroup_law"]))

        excess = max(0.0, np.linalg.norm(TX, 2) - np.linalg.norm(X, 2))
        reports.append(IdentityReport("contraction", n, p, excess, tol["contraction"]))

        TP = evolve_heisenberg(model, P, t, params)
        reports.append(IdentityReport("positivity", n, p, _psd_violation(TP), tol["positivity"]))

        rho_t = evolve_schrodinger(model, rho, t, params)
        gap = abs(np.trace(rho @ TX) - np.trace(rho_t @ X))
        reports.append(IdentityReport("duality", n, p, gap, tol["duality"]))

        if n <= MAX_CHOI_MODES:
            C = choi_matrix(model, t)
            lam = float(np.linalg.eigvalsh(C).min())
            reports.append(IdentityReport(
                "complete_positivity", n, p, max(0.0, -lam), tol["complete_positivity"],
                details={"min_eigenvalue": lam}))
            reports.append(IdentityReport(
                "trace_preservation", n, p, residual_norm(choi_partial_trace(C, D), eye),
                tol["trace_preservation"]))
    return reports


def vacuum_projection(n):
    """Rank-one projection onto ``Z_empty``, i.e. the expectation operator."""
    E = np.zeros((dimension(n),) * 2, dtype=complex)
    E[0, 0] = 1.0
    return E


def verify_subharmonic_vacuum(model, t, params=None, tol=1e-8):
    """``E <= T_t(E)`` for the vacuum projection ``E``."""
    E = vacuum_projection(model.n)
    diff = evolve_heisenberg(model, E, t, params) - E
    lam = float(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)).min())
    return IdentityReport(
        "subharmonic_vacuum", model.n,
        {"t": float(t), "kernel": model.kernel.digest()},
        max(0.0, -lam), tol,
        details={"min_eigenvalue": lam, "regular": model.kernel.regular})


def verify_decoherence_free(model, X, t, params=None, name="X", evolve_tol=1e-8, algebra_tol=1e-12):
    """Check the decoherence-free conclusions for an observable ``X``.

    Membership is approximated by commuting with every ``L_jk`` and
    ``L_jk^*``.  If that fails a single not-applicable report is returned.
    Otherwise reports are produced for unitary evolution, commutation with
    ``S_w`` and ``d_k X d_k = d_k^* X d_k^* = 0``; the last one is only
    required for regular kernels.
    """
    n = model.n
    X = _as_dense(X, model.dim)
    base = {"observable": name, "t": float(t), "kernel": model.kernel.digest()}
    commutant = 0.0
    for _, _, L in model.jumps:
        Ld = adjoint(L)
        commutant = max(commutant,
                        residual_norm(L @ X, (L.T @ X.T).T),
                        residual_norm(Ld @ X, (Ld.T @ X.T).T))
    if commutant > algebra_tol:
        return [IdentityReport("decoherence_free_membership", n, base, commutant, algebra_tol,
                               details={"applicable": False})]
    S = model.S
    TX = evolve_heisenberg(model, X, t, params)
    reports = [
        IdentityReport("decoherence_free_membership", n, base, commutant, algebra_tol),
        IdentityReport("decoherence_free_unitary", n, base,
                       residual_norm(TX, unitary_conjugation(model, X, t)), evolve_tol),
        IdentityReport("decoherence_free_weighted_commute", n, base,
                       residual_norm(S @ X, (S.T @ X.T).T), algebra_tol),
    ]
    sandwich = 0.0
    for k in range(n):
        a, c = annihilator(n, k), creator(n, k)
        sandwich = max(sandwich,
                       residual_norm(a @ (a.T @ X.T).T),
                       residual_norm(c @ (c.T @ X.T).T))
    reports.append(IdentityReport(
        "decoherence_free_sandwich", n, base,
        sandwich if model.kernel.regular else 0.0, algebra_tol,
        details={"raw_residual": sandwich, "regular": model.kernel.regular}))
    return reports


def observable(n, spec):
    """Build an observable from a scenario entry.

    ``"identity"``, ``"number"``, ``{"occupancy": k}`` or
    ``{"explicit": [[re, im], ...]}`` / ``{"explicit": {"real": ..., "imag": ...}}``.
    """
    D = dimension(n)
    if spec == "identity":
        return np.eye(D, dtype=complex), "identity"
    if spec == "number":
        return number_operator(n).toarray(), "number"
    if isinstance(spec, dict) and "occupancy" in spec:
        k = int(spec["occupancy"])
        if not 0 <= k < n:
            raise DomainError(f"occupancy mode {k} out of range for n={n}")
        return np.diag(occupation_table(n)[:, k]).astype(complex), f"occupancy_{k}"
    if isinstance(spec, dict) and "explicit" in spec:
        ex = spec["explicit"]
        if isinstance(ex, dict):
            M = np.asarray(ex["real"], dtype=float) + 1j * np.asarray(ex.get("imag", 0.0), dtype=float)
        else:
            M = np.asarray(ex, dtype=complex)
        if M.shape != (D, D):
            raise ShapeError(f"explicit observable must be {D}x{D}, got {M.shape}")
        return M, spec.get("name", "explicit")
    raise DomainError(f"unknown observable {spec!r}")


def initial_state(n, spec):
    """Density matrix from ``{"type": "vacuum" | "basis" | "mixture", ...}``."""
    D = dimension(n)
    kind = spec.get("type")
    if kind == "vacuum":
        p = np.zeros(D)
        p[0] = 1.0
    elif kind == "basis":
        p = np.zeros(D)
        p[subset_to_mask(spec["subset"], n)] = 1.0
    elif kind == "mixture":
        p = np.zeros(D)
        for key, weight in spec["weights"].items():
            modes = [int(x) for x in key.strip("[]").split(",") if x.strip()]
            p[subset_to_mask(modes, n)] += float(weight)
        if np.any(p < 0) or not np.isclose(p.sum(), 1.0, atol=1e-12, rtol=0):
            raise DomainError("mixture weights must be nonnegative and sum to 1")
    else:
        raise DomainError(f"unknown initial state type {kind!r}")
    return diagonal_state(p)

