"""
Finite truncation of the Bernoulli-functional space.

Basis vectors ``Z_sigma`` are indexed by subsets ``sigma`` of the modes
``0..n-1``.  A subset is stored as an integer bitmask (bit ``k`` set iff
``k`` is in ``sigma``) and the basis is ordered by that integer, so the
position of ``Z_sigma`` in any state vector is the bitmask itself.

State vectors are plain complex ``numpy`` arrays of length ``2**n``;
operators are ``scipy.sparse.csr_matrix`` instances of shape
``(2**n, 2**n)``.  The annihilation and creation operators carry no sign
factors: ``d_k Z_sigma = 1_sigma(k) Z_{sigma - k}`` and operators on
different modes commute.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import CapacityError, DomainError, ModeRangeError, ShapeError

MAX_MODES = 20
MAX_SPECTRAL_MODES = 12
MAX_GRAM_MODES = 12

__all__ = [
    "MAX_MODES",
    "MAX_SPECTRAL_MODES",
    "check_modes",
    "dimension",
    "enumerate_basis",
    "subset_to_mask",
    "mask_to_subset",
    "popcounts",
    "occupation_table",
    "basis_vector",
    "annihilator",
    "creator",
    "occupancy_projector",
    "identity",
    "zero_operator",
    "adjoint",
    "compose",
    "residual_norm",
    "spectral_norm",
    "apply_operator",
    "BernoulliProcess",
    "sample_bernoulli_gram",
]


def check_modes(n, cap=MAX_MODES):
    """Validate a mode count and return it as ``int``."""
    if isinstance(n, (bool, np.bool_)) or int(n) != n:
        raise DomainError(f"mode count must be an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise DomainError(f"mode count must be positive, got {n}")
    if n > cap:
        raise CapacityError(f"n={n} exceeds the cap of {cap} modes")
    return n


def _check_mode(n, k):
    if not 0 <= k < n:
        raise ModeRangeError(f"mode {k} out of range for n={n}")
    return int(k)


def dimension(n):
    return 1 << check_modes(n)


def enumerate_basis(n):
    """All subsets of ``0..n-1`` as bitmasks, in increasing integer order."""
    return np.arange(dimension(n), dtype=np.int64)


def subset_to_mask(subset, n=None):
    """Encode an iterable of mode indices as a bitmask."""
    mask = 0
    for k in subset:
        k = int(k)
        if k < 0 or (n is not None and k >= n):
            raise ModeRangeError(f"mode {k} out of range for n={n}")
        mask |= 1 << k
    return mask


def mask_to_subset(mask):
    """Decode a bitmask into the sorted tuple of its modes."""
    mask = int(mask)
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


@lru_cache(maxsize=None)
def _occupations(n):
    idx = np.arange(1 << n, dtype=np.int64)
    occ = (idx[:, None] >> np.arange(n)) & 1
    occ.setflags(write=False)
    return occ


def occupation_table(n):
    """Integer array ``occ[sigma, k] = 1_sigma(k)`` of shape ``(2**n, n)``."""
    return _occupations(check_modes(n))


def popcounts(n):
    """Cardinalities ``#(sigma)`` for every basis index."""
    return occupation_table(n).sum(axis=1)


def basis_vector(n, subset):
    """Unit ket ``Z_sigma``; ``subset`` is a bitmask or an iterable of modes."""
    dim = dimension(n)
    mask = subset if isinstance(subset, (int, np.integer)) else subset_to_mask(subset, n)
    if not 0 <= mask < dim:
        raise ModeRangeError(f"subset mask {mask} invalid for n={n}")
    v = np.zeros(dim, dtype=complex)
    v[mask] = 1.0
    return v


@lru_cache(maxsize=256)
def _ladder(n, k, create):
    dim = 1 << n
    bit = 1 << k
    cols = np.arange(dim, dtype=np.int64)
    if create:
        cols = cols[(cols & bit) == 0]
        rows = cols | bit
    else:
        cols = cols[(cols & bit) != 0]
        rows = cols & ~bit
    data = np.ones(cols.size, dtype=complex)
    return sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))


def annihilator(n, k):
    """Annihilation operator ``d_k``: ``Z_sigma -> 1_sigma(k) Z_{sigma - k}``."""
    n = check_modes(n)
    return _ladder(n, _check_mode(n, k), False).copy()


def creator(n, k):
    """Creation operator ``d_k^*``: ``Z_sigma -> (1 - 1_sigma(k)) Z_{sigma + k}``."""
    n = check_modes(n)
    return _ladder(n, _check_mode(n, k), True).copy()


def occupancy_projector(n, k):
    """Diagonal projector ``d_k^* d_k`` onto configurations that occupy ``k``."""
    n = check_modes(n)
    k = _check_mode(n, k)
    diag = occupation_table(n)[:, k].astype(complex)
    return sp.diags(diag, format="csr")


def identity(n):
    return sp.identity(dimension(n), dtype=complex, format="csr")


def zero_operator(n):
    dim = dimension(n)
    return sp.csr_matrix((dim, dim), dtype=complex)


def adjoint(A):
    """Conjugate transpose, preserving sparse or dense storage."""
    if sp.issparse(A):
        return A.conj().T.tocsr()
    return np.asarray(A).conj().T


def compose(*ops):
    """Matrix product ``ops[0] @ ops[1] @ ...`` with shape checking."""
    if not ops:
        raise ShapeError("compose needs at least one operator")
    out = ops[0]
    for op in ops[1:]:
        if out.shape[1] != op.shape[0]:
            raise ShapeError(f"cannot compose shapes {out.shape} and {op.shape}")
        out = out @ op
    return out


def residual_norm(A, B=None):
    """Largest absolute entry of ``A`` (or of ``A - B``)."""
    if B is not None:
        if A.shape != B.shape:
            raise ShapeError(f"shape mismatch {A.shape} vs {B.shape}")
        A = A - B
    if sp.issparse(A):
        A = A.tocoo()
        return float(np.abs(A.data).max()) if A.nnz else 0.0
    A = np.asarray(A)
    return float(np.abs(A).max()) if A.size else 0.0


def spectral_norm(A):
    """Operator 2-norm (largest singular value) for ``n <= 12``."""
    dim = A.shape[0]
    if dim > (1 << MAX_SPECTRAL_MODES):
        raise CapacityError(f"spectral norm capped at dimension {1 << MAX_SPECTRAL_MODES}")
    if sp.issparse(A):
        if dim <= 1024:
            A = A.toarray()
        else:
            if A.nnz == 0:
                return 0.0
            s = spla.svds(A, k=1, return_singular_vectors=False)
            return float(s[0])
    return float(np.linalg.norm(np.asarray(A), 2))


def apply_operator(A, xi):
    """``(A xi)[sigma] = sum_tau A[sigma, tau] xi[tau]``."""
    xi = np.asarray(xi)
    if xi.ndim != 1 or A.shape[1] != xi.shape[0]:
        raise ShapeError(f"operator {A.shape} cannot act on vector of shape {xi.shape}")
    return np.asarray(A @ xi).ravel()


@dataclass(frozen=True)
class BernoulliProcess:
    """Independent two-valued variables ``Z_k`` in ``{theta_k, -1/theta_k}``.

    ``P(Z_k = theta_k) = p_k`` with ``theta_k = sqrt(q_k / p_k)`` and
    ``q_k = 1 - p_k``, so that ``E[Z_k] = 0`` and ``E[Z_k**2] = 1``.
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if p.ndim != 1 or p.size == 0:
            raise DomainError("p must be a non-empty 1-d array")
        if not np.all((p > 0) & (p < 1)):
            raise DomainError(f"success probabilities must lie in (0, 1), got {p}")
        check_modes(p.size, MAX_GRAM_MODES)
        object.__setattr__(self, "p", p)

    @property
    def n(self):
        return self.p.size

    @property
    def q(self):
        return 1.0 - self.p

    @property
    def theta(self):
        return np.sqrt(self.q / self.p)

    def sample(self, samples, rng):
        """Draw a ``(samples, n)`` array of realizations."""
        hit = rng.random((samples, self.n)) < self.p
        return np.where(hit, self.theta, -1.0 / self.theta)


def sample_bernoulli_gram(process, samples, seed):
    """Empirical Gram matrix ``G[sigma, tau] = mean(Z_sigma * Z_tau)``.

    ``Z_sigma`` is the product of ``Z_i`` over ``i`` in ``sigma`` (and 1 for
    the empty set).  For large ``samples`` the result approaches the
    identity, which is what makes ``{Z_sigma}`` an orthonormal basis.
    """
    if not isinstance(process, BernoulliProcess):
        process = BernoulliProcess(process)
    samples = int(samples)
    if samples < 1:
        raise DomainError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    z = process.sample(samples, rng)
    n = process.n
    chaos = np.empty((samples, 1 << n))
    chaos[:, 0] = 1.0
    for k in range(n):
        width = 1 << k
        chaos[:, width:2 * width] = chaos[:, :width] * z[:, k:k + 1]
    return chaos.T @ chaos / samples
