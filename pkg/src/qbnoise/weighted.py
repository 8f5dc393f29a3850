"""
Transition kernels and weighted number operators.

A transition kernel is a nonnegative table ``w[j, k]`` (rate weight for a
jump from mode ``k`` to mode ``j``).  Its 2D-weighted number operator

    S_w = sum_{j,k} w[j, k] d_k^* d_j d_j^* d_k

is diagonal in the subset basis with eigenvalue ``theta_w(sigma)``: the
diagonal weights of occupied modes plus the weights ``w[j, k]`` of every
move from an occupied ``k`` to an empty ``j``.  ``S_w`` is built here both
by operator composition and from the eigenvalue table so that each
construction can check the other.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .exceptions import DomainError, ModeRangeError, ShapeError
from .fock import (
    annihilator,
    check_modes,
    creator,
    occupancy_projector,
    occupation_table,
    popcounts,
    subset_to_mask,
    zero_operator,
)

__all__ = [
    "TransitionKernel",
    "WeightFunction",
    "make_kernel",
    "canonical_kernel",
    "nearest_neighbor_kernel",
    "random_kernel",
    "kernel_from_json",
    "kernel_to_json",
    "weight_from_json",
    "theta",
    "theta_partial",
    "theta_table",
    "weighted_number_direct",
    "weighted_number_spectral",
    "occupancy_weight",
    "one_d_number_operator",
    "embed_1d_kernel",
    "column_weight",
    "row_weight",
    "number_operator",
    "norm_of_weighted_number",
]


@dataclass(frozen=True)
class TransitionKernel:
    """Nonnegative ``n x n`` rate table.

    Attributes
    ----------
    w : ndarray
        ``w[j, k]`` is the weight of a jump ``k -> j``.
    kind : str
        Preset name (``canonical``, ``nearest_neighbor``, ``explicit``).
    params : dict
        Preset parameters, kept for serialization.

    ``alpha`` is the largest column sum, ``beta`` the smallest diagonal
    entry (the regularity constant) and ``diag_sup`` the largest diagonal
    entry.
    """

    w: np.ndarray
    kind: str = "explicit"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ShapeError(f"kernel table must be square, got shape {w.shape}")
        check_modes(w.shape[0])
        if not np.all(np.isfinite(w)):
            raise DomainError("kernel entries must be finite")
        if np.any(w < 0):
            raise DomainError("kernel entries must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self):
        return self.w.shape[0]

    @property
    def alpha(self):
        return float(self.w.sum(axis=0).max())

    @property
    def beta(self):
        return float(np.diag(self.w).min())

    @property
    def diag_sup(self):
        return float(np.diag(self.w).max())

    @property
    def regular(self):
        return self.beta > 0

    def digest(self):
        """Short JSON-friendly summary used in reports."""
        return {"kind": self.kind, "n": self.n, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class WeightFunction:
    """Nonnegative weights ``u[k]`` on modes ``0..n-1``."""

    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).ravel()
        check_modes(u.size)
        if not np.all(np.isfinite(u)) or np.any(u < 0):
            raise DomainError("weights must be finite and nonnegative")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def n(self):
        return self.u.size


def _as_weight(u):
    return u if isinstance(u, WeightFunction) else WeightFunction(u)


def canonical_kernel(n):
    """Identity table: every mode dephases at unit rate, nothing jumps."""
    n = check_modes(n)
    return TransitionKernel(np.eye(n), kind="canonical")


def nearest_neighbor_kernel(n, a, b, d):
    """``w[k+1, k] = a`` (right hop), ``w[k-1, k] = b`` (left hop), ``w[k, k] = d``."""
    n = check_modes(n)
    w = np.zeros((n, n))
    idx = np.arange(n)
    w[idx, idx] = d
    w[idx[1:], idx[:-1]] = a
    w[idx[:-1], idx[1:]] = b
    return TransitionKernel(w, kind="nearest_neighbor", params={"a": a, "b": b, "d": d})


def make_kernel(kind, n=None, table=None, **params):
    """Build a kernel from a preset name or an explicit table."""
    if kind == "canonical":
        return canonical_kernel(n)
    if kind == "nearest_neighbor":
        try:
            a, b, d = params["a"], params["b"], params["d"]
        except KeyError as exc:
            raise DomainError(f"nearest_neighbor kernel needs a, b, d; missing {exc}") from None
        return nearest_neighbor_kernel(n, a, b, d)
    if kind == "explicit":
        if table is None:
            raise DomainError("explicit kernel needs a table")
        kernel = TransitionKernel(table)
        if n is not None and kernel.n != n:
            raise ShapeError(f"table is {kernel.n}x{kernel.n} but n={n}")
        return kernel
    raise DomainError(f"unknown kernel type {kind!r}")


def random_kernel(n, rng, low=0.0, high=1.0):
    """Kernel with i.i.d. uniform entries, the generic test case."""
    return TransitionKernel(rng.uniform(low, high, size=(n, n)))


def kernel_from_json(obj):
    kind = obj.get("type", "explicit")
    return make_kernel(kind, n=obj.get("n"), table=obj.get("table"), **obj.get("params", {}))


def kernel_to_json(kernel):
    return {
        "n": kernel.n,
        "type": kernel.kind,
        "params": dict(kernel.params),
        "table": kernel.w.tolist(),
    }


def weight_from_json(obj):
    u = WeightFunction(obj["u"])
    if "n" in obj and obj["n"] != u.n:
        raise ShapeError(f"weight has {u.n} entries but n={obj['n']}")
    return u


def _mask(kernel_n, sigma):
    if isinstance(sigma, (int, np.integer)):
        mask = int(sigma)
        if not 0 <= mask < (1 << kernel_n):
            raise ModeRangeError(f"subset mask {mask} invalid for n={kernel_n}")
        return mask
    return subset_to_mask(sigma, kernel_n)


def theta_partial(kernel, sigma, m):
    """``theta_w`` with both sums cut at index ``m`` (inclusive), by direct loops."""
    mask = _mask(kernel.n, sigma)
    w = kernel.w
    top = min(m, kernel.n - 1)
    total = 0.0
    for j in range(top + 1):
        j_in = (mask >> j) & 1
        if j_in:
            total += w[j, j]
        else:
            for k in range(top + 1):
                if (mask >> k) & 1:
                    total += w[j, k]
    return total


def theta(kernel, sigma):
    """Eigenvalue ``theta_w(sigma)`` of ``S_w`` by the exact finite double sum."""
    return theta_partial(kernel, sigma, kernel.n - 1)


def theta_table(kernel):
    """``theta_w`` for every basis index, vectorized."""
    occ = occupation_table(kernel.n).astype(float)
    w = kernel.w
    return occ @ np.diag(w) + (((1.0 - occ) @ w) * occ).sum(axis=1)


@lru_cache(maxsize=16)
def _quartic_terms(n):
    # d_k^* d_j d_j^* d_k for every (j, k); independent of the weights
    ann = [annihilator(n, k) for k in range(n)]
    cre = [creator(n, k) for k in range(n)]
    return tuple(
        tuple((cre[k] @ ann[j] @ cre[j] @ ann[k]).tocsr() for k in range(n))
        for j in range(n)
    )


def weighted_number_direct(kernel):
    """``S_w`` as the explicit double sum of composed ladder operators."""
    terms = _quartic_terms(kernel.n)
    out = zero_operator(kernel.n)
    for j in range(kernel.n):
        for k in range(kernel.n):
            if kernel.w[j, k] != 0:
                out = out + kernel.w[j, k] * terms[j][k]
    return out.tocsr()


def weighted_number_spectral(kernel):
    """``S_w`` as ``diag(theta_w)`` in the subset basis."""
    return sp.diags(theta_table(kernel).astype(complex), format="csr")


def occupancy_weight(u, sigma):
    """``#_u(sigma) = sum of u[k] over k in sigma``."""
    u = _as_weight(u)
    mask = _mask(u.n, sigma)
    return float(sum(u.u[k] for k in range(u.n) if (mask >> k) & 1))


def one_d_number_operator(u):
    """``N_u = sum_k u[k] d_k^* d_k``."""
    u = _as_weight(u)
    out = zero_operator(u.n)
    for k in range(u.n):
        if u.u[k] != 0:
            out = out + u.u[k] * occupancy_projector(u.n, k)
    return out.tocsr()


def embed_1d_kernel(u):
    """Diagonal kernel ``w[j, j] = u[j]``, for which ``S_w`` equals ``N_u``."""
    u = _as_weight(u)
    return TransitionKernel(np.diag(u.u))


def column_weight(kernel, m):
    """``j -> w[j, m]``: inflow weights into the jump out of mode ``m``."""
    return WeightFunction(kernel.w[:, m])


def row_weight(kernel, m):
    """``k -> w[m, k]``: weights of jumps that land on mode ``m``."""
    return WeightFunction(kernel.w[m, :])


def number_operator(n):
    """``N = diag(#(sigma))``."""
    return sp.diags(popcounts(n).astype(complex), format="csr")


def norm_of_weighted_number(kernel):
    """``||S_w||``, which for a diagonal positive operator is ``max theta_w``."""
    return float(theta_table(kernel).max())
