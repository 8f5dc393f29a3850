"""
Classical exclusion process used as an independent oracle for the
populations of the quantum evolution.

A configuration is a subset of occupied modes.  A particle at ``k`` jumps to
an empty ``j != k`` at rate ``w[j, k]``; the operator coefficient in the
quantum model is ``sqrt(w[j, k])``, and populations see its square.
Diagonal weights ``w[k, k]`` only dephase and produce no classical move.
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .algebra import IdentityReport
from .exceptions import DomainError, ShapeError
from .fock import dimension, mask_to_subset, subset_to_mask
from .semigroup import diagonal_state, evolve_schrodinger

__all__ = [
    "allowed_moves",
    "classical_generator",
    "validate_distribution",
    "evolve_classical",
    "gillespie_trajectory",
    "gillespie_sample",
    "total_variation",
    "verify_diagonal_correspondence",
]

GILLESPIE_BATCH = 10_000


def allowed_moves(kernel):
    """Arrays ``(source, target, rate)`` for every enabled jump."""
    n = kernel.n
    states = np.arange(1 << n, dtype=np.int64)
    src, dst, rate = [], [], []
    for k in range(n):
        for j in range(n):
            if j == k or kernel.w[j, k] == 0:
                continue
            ok = ((states >> k) & 1 == 1) & ((states >> j) & 1 == 0)
            s = states[ok]
            src.append(s)
            dst.append((s & ~(1 << k)) | (1 << j))
            rate.append(np.full(s.size, kernel.w[j, k]))
    if not src:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    return np.concatenate(src), np.concatenate(dst), np.concatenate(rate)


def classical_generator(kernel):
    """Sparse rate matrix ``Q`` with ``dp/dt = Q p``; columns sum to zero."""
    dim = dimension(kernel.n)
    src, dst, rate = allowed_moves(kernel)
    out = np.zeros(dim)
    np.add.at(out, src, rate)
    Q = sp.csr_matrix((rate, (dst, src)), shape=(dim, dim))
    return (Q - sp.diags(out)).tocsr()


def validate_distribution(p, dim=None, clamp=1e-12, tol=1e-10):
    p = np.asarray(p, dtype=float).copy()
    if p.ndim != 1 or (dim is not None and p.size != dim):
        raise ShapeError(f"distribution must be a vector of length {dim}")
    if np.any(p < -clamp):
        raise DomainError("distribution has negative entries")
    p[p < 0] = 0.0
    if abs(p.sum() - 1.0) > tol:
        raise DomainError(f"distribution sums to {p.sum()}, expected 1")
    return p


def evolve_classical(Q, p0, t):
    """``exp(t Q) p0``, with round-off negatives clamped."""
    t = float(t)
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    p0 = validate_distribution(p0, Q.shape[0])
    if t == 0:
        return p0
    p = np.real(expm_multiply(t * Q, p0))
    return validate_distribution(p, Q.shape[0])


def _move_table(kernel):
    dim = dimension(kernel.n)
    src, dst, rate = allowed_moves(kernel)
    width = max(1, int(np.bincount(src, minlength=dim).max()) if src.size else 1)
    targets = np.zeros((dim, width), dtype=np.int64)
    cum = np.full((dim, width), np.inf)
    fill = np.zeros(dim, dtype=np.int64)
    for s, d, r in zip(src, dst, rate):
        i = fill[s]
        targets[s, i] = d
        cum[s, i] = r
        fill[s] += 1
    for s in range(dim):
        m = fill[s]
        if m:
            cum[s, :m] = np.cumsum(cum[s, :m])
    total = np.where(fill > 0, cum[np.arange(dim), np.maximum(fill - 1, 0)], 0.0)
    return targets, cum, total


def gillespie_trajectory(kernel, sigma0, t, rng):
    """One exact trajectory as a list of ``(time, state)`` jump records."""
    targets, cum, total = _move_table(kernel)
    state = subset_to_mask(sigma0, kernel.n) if not isinstance(sigma0, (int, np.integer)) else int(sigma0)
    now = 0.0
    path = [(0.0, state)]
    while total[state] > 0:
        now += rng.exponential(1.0 / total[state])
        if now > t:
            break
        u = rng.random() * total[state]
        state = int(targets[state, np.searchsorted(cum[state], u, side="right")])
        path.append((now, state))
    return path


def _gillespie_batch(targets, cum, total, state0, t, trials, rng):
    state = np.full(trials, state0, dtype=np.int64)
    now = np.zeros(trials)
    active = total[state] > 0
    while active.any():
        idx = np.flatnonzero(active)
        s = state[idx]
        now[idx] += rng.exponential(1.0, size=idx.size) / total[s]
        done = now[idx] > t
        active[idx[done]] = False
        idx, s = idx[~done], s[~done]
        u = rng.random(idx.size) * total[s]
        pick = (cum[s] <= u[:, None]).sum(axis=1)
        state[idx] = targets[s, pick]
        active[idx] = total[state[idx]] > 0
    return state


def gillespie_sample(kernel, sigma0, t, trials, seed):
    """Empirical distribution of the configuration at time ``t``.

    Trials run in batches of ``GILLESPIE_BATCH``; batch ``i`` draws from the
    ``i``-th child of ``SeedSequence(seed)``, so the result depends only on
    ``seed`` and ``trials``.
    """
    trials = int(trials)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    t = float(t)
    if not t >= 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    dim = dimension(kernel.n)
    state0 = sigma0 if isinstance(sigma0, (int, np.integer)) else subset_to_mask(sigma0, kernel.n)
    targets, cum, total = _move_table(kernel)
    n_batches = -(-trials // GILLESPIE_BATCH)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(n_batches)
    counts = np.zeros(dim)
    for i, child in enumerate(children):
        size = min(GILLESPIE_BATCH, trials - i * GILLESPIE_BATCH)
        final = _gillespie_batch(targets, cum, total, int(state0), t, size, np.random.default_rng(child))
        counts += np.bincount(final, minlength=dim)
    return counts / trials


def total_variation(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def verify_diagonal_correspondence(model, p0, t, params=None, tv_tol=1e-6, offdiag_tol=1e-10):
    """Quantum populations against the classical chain started from ``p0``.

    Returns two reports: total-variation distance between ``diag(rho_t)``
    and ``exp(tQ) p0``, and the largest off-diagonal entry of ``rho_t``.
    """
    p0 = validate_distribution(p0, model.dim)
    rho_t = evolve_schrodinger(model, diagonal_state(p0), t, params)
    p_quantum = np.real(np.diag(rho_t))
    p_classical = evolve_classical(classical_generator(model.kernel), p0, t)
    off = rho_t - np.diag(np.diag(rho_t))
    params_json = {"t": float(t), "kernel": model.kernel.digest()}
    return [
        IdentityReport("diagonal_correspondence", model.n, params_json,
                       total_variation(p_quantum, p_classical), tv_tol),
        IdentityReport("diagonal_invariance", model.n, params_json,
                       float(np.abs(off).max()), offdiag_tol),
    ]


def configuration_label(mask):
    """``"[0,2]"`` style label used in CSV output."""
    return "[" + ",".join(str(k) for k in mask_to_subset(mask)) + "]"
