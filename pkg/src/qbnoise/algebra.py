"""
Residual checks for the operator identities of the quantum Bernoulli noise
algebra and of the weighted number operators.

Every check returns :class:`IdentityReport` objects rather than raising, so
callers (tests, the verification suite) decide what a failure means.
Identities whose operands have only 0/1 entries are held to residual
exactly zero; identities that mix in real weights get ``WEIGHTED_TOL``.
"""

from dataclasses import dataclass, field

import numpy as np

from .fock import (
    annihilator,
    check_modes,
    creator,
    identity,
    occupancy_projector,
    popcounts,
    residual_norm,
    spectral_norm,
)
from .tolerances import DEFAULT_TOLERANCES
from .weighted import (
    TransitionKernel,
    WeightFunction,
    column_weight,
    norm_of_weighted_number,
    number_operator,
    one_d_number_operator,
    row_weight,
    theta_table,
    weighted_number_direct,
    weighted_number_spectral,
)

EXACT_TOL = DEFAULT_TOLERANCES["exact"]
WEIGHTED_TOL = DEFAULT_TOLERANCES["weighted"]

__all__ = [
    "IdentityReport",
    "EXACT_TOL",
    "WEIGHTED_TOL",
    "verify_car",
    "verify_weighted_commutators_1d",
    "verify_weighted_commutators_2d",
    "verify_exchange_commutation",
    "verify_spectral_oracle",
    "perturbation_control",
    "verify_norm_formula",
    "verify_theta_bounds",
]


@dataclass
class IdentityReport:
    """Outcome of one residual check; ``passed`` iff ``residual <= tolerance``."""

    identity: str
    n: int
    params: dict
    residual: float
    tolerance: float
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)

    def to_json(self):
        out = {
            "identity": self.identity,
            "n": self.n,
            "params": self.params,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.details:
            out["details"] = self.details
        return out


def verify_car(n):
    """Commutation across modes and the equal-time CAR at each mode."""
    n = check_modes(n)
    ann = [annihilator(n, k) for k in range(n)]
    cre = [creator(n, k) for k in range(n)]
    eye = identity(n)
    reports = []
    for k in range(n):
        for l in range(n):
            if k == l:
                continue
            p = {"k": k, "l": l}
            reports.append(IdentityReport(
                "ann_ann_commute", n, p, residual_norm(ann[k] @ ann[l], ann[l] @ ann[k]), EXACT_TOL))
            reports.append(IdentityReport(
                "cre_cre_commute", n, p, residual_norm(cre[k] @ cre[l], cre[l] @ cre[k]), EXACT_TOL))
            reports.append(IdentityReport(
                "cre_ann_commute", n, p, residual_norm(cre[k] @ ann[l], ann[l] @ cre[k]), EXACT_TOL))
    for k in range(n):
        p = {"k": k}
        reports.append(IdentityReport("ann_nilpotent", n, p, residual_norm(ann[k] @ ann[k]), EXACT_TOL))
        reports.append(IdentityReport("cre_nilpotent", n, p, residual_norm(cre[k] @ cre[k]), EXACT_TOL))
        reports.append(IdentityReport(
            "anticommutator_identity", n, p,
            residual_norm(ann[k] @ cre[k] + cre[k] @ ann[k], eye), EXACT_TOL))
        proj = occupancy_projector(n, k)
        reports.append(IdentityReport(
            "projector_factorization", n, p, residual_norm(cre[k] @ ann[k], proj), EXACT_TOL))
        reports.append(IdentityReport("projector_idempotent", n, p, residual_norm(proj @ proj, proj), EXACT_TOL))
    return reports


def _tol_for(values):
    values = np.asarray(values)
    exact = np.all((values == 0) | (values == 1))
    return EXACT_TOL if exact else WEIGHTED_TOL


def verify_weighted_commutators_1d(u):
    """``N_u d_m = d_m N_u - u[m] d_m`` and ``N_u d_m^* = d_m^* N_u + u[m] d_m^*``."""
    if not isinstance(u, WeightFunction):
        u = WeightFunction(u)
    n = u.n
    Nu = one_d_number_operator(u)
    tol = _tol_for(u.u)
    reports = []
    for m in range(n):
        a, c = annihilator(n, m), creator(n, m)
        lhs_a, rhs_a = Nu @ a, a @ Nu - u.u[m] * a
        lhs_c, rhs_c = Nu @ c, c @ Nu + u.u[m] * c
        p = {"m": m}
        reports.append(IdentityReport("weighted_1d_annihilator", n, p, residual_norm(lhs_a, rhs_a), tol))
        reports.append(IdentityReport("weighted_1d_creator", n, p, residual_norm(lhs_c, rhs_c), tol))
    return reports


def _annihilator_rhs(kernel, m, a, S, variant):
    Ncol = one_d_number_operator(column_weight(kernel, m))
    Nrow = one_d_number_operator(row_weight(kernel, m))
    colsum = kernel.w[:, m].sum()
    diag = kernel.w[m, m]
    if variant == "correct":
        coeff = 2.0 * diag + colsum
    elif variant == "doubled":
        # a plausible but wrong coefficient, kept as a negative control
        coeff = 2.0 * (diag + colsum)
    else:
        raise ValueError(f"unknown commutator variant {variant!r}")
    return a @ S + a @ Ncol + a @ Nrow - coeff * a


def verify_weighted_commutators_2d(kernel, variant="correct", S=None):
    """Commutators of ``S_w`` with ``d_m`` and ``d_m^*`` for every mode ``m``.

    ``variant="doubled"`` swaps in the doubled correction coefficient, which is
    expected to fail on a generic kernel; it exists as a negative control.
    ``S`` overrides the operator on the left-hand side (used to inject a
    perturbed ``S_w`` while keeping the correction terms fixed).
    """
    n = kernel.n
    if S is None:
        S = weighted_number_direct(kernel)
    tol = WEIGHTED_TOL
    reports = []
    for m in range(n):
        a, c = annihilator(n, m), creator(n, m)
        p = {"m": m, "kernel": kernel.digest()}
        res_a = residual_norm(S @ a, _annihilator_rhs(kernel, m, a, S, variant))
        name = "weighted_2d_annihilator" if variant == "correct" else f"weighted_2d_annihilator[{variant}]"
        reports.append(IdentityReport(name, n, p, res_a, tol))
        if variant == "correct":
            Ncol = one_d_number_operator(column_weight(kernel, m))
            Nrow = one_d_number_operator(row_weight(kernel, m))
            rhs_c = c @ S - c @ Ncol - c @ Nrow + kernel.w[:, m].sum() * c
            reports.append(IdentityReport("weighted_2d_creator", n, p, residual_norm(S @ c, rhs_c), tol))
    return reports


def verify_exchange_commutation(kernel):
    """``[N, d_j^* d_k] = 0`` for all ``(j, k)`` and ``[S_w, d_m^* d_m] = 0`` for all ``m``."""
    n = kernel.n
    N = number_operator(n)
    S = weighted_number_direct(kernel)
    ann = [annihilator(n, k) for k in range(n)]
    cre = [creator(n, k) for k in range(n)]
    reports = []
    for j in range(n):
        for k in range(n):
            hop = cre[j] @ ann[k]
            reports.append(IdentityReport(
                "number_hop_commute", n, {"j": j, "k": k}, residual_norm(N @ hop, hop @ N), EXACT_TOL))
    for m in range(n):
        proj = cre[m] @ ann[m]
        reports.append(IdentityReport(
            "weighted_projector_commute", n, {"m": m, "kernel": kernel.digest()},
            residual_norm(S @ proj, proj @ S), WEIGHTED_TOL))
    return reports


def verify_spectral_oracle(kernel):
    """Composed ``S_w`` against ``diag(theta_w)``."""
    res = residual_norm(weighted_number_direct(kernel), weighted_number_spectral(kernel))
    return IdentityReport("weighted_direct_vs_spectral", kernel.n, {"kernel": kernel.digest()}, res, WEIGHTED_TOL)


def perturbation_control(kernel, j, k, delta=1e-3):
    """Largest annihilator-commutator residual when ``S_w`` uses ``w[j, k] + delta`` but the
    correction terms use the original kernel.

    A working checker returns something of order ``delta``.
    """
    w = np.array(kernel.w)
    w[j, k] += delta
    S_bad = weighted_number_direct(TransitionKernel(w))
    reports = verify_weighted_commutators_2d(kernel, S=S_bad)
    return max(r.residual for r in reports if r.identity == "weighted_2d_annihilator")


def verify_norm_formula(kernel, tol=WEIGHTED_TOL):
    """Spectral norm of the composed ``S_w`` against ``max theta_w``."""
    S = weighted_number_direct(kernel)
    gap = abs(spectral_norm(S) - norm_of_weighted_number(kernel))
    return IdentityReport("weighted_norm_formula", kernel.n, {"kernel": kernel.digest()}, gap, tol)


def verify_theta_bounds(kernel, xi=None, tol=WEIGHTED_TOL):
    """Inequalities tying ``theta_w`` to the occupation number.

    * ``theta_w(sigma) <= 2 alpha #(sigma)``
    * ``#(sigma) <= theta_w(sigma) / beta`` for regular kernels
    * ``<xi, S_w xi> <= 2 alpha <xi, N xi>``
    * ``beta <S_w xi, N xi> <= <S_w xi, S_w xi>`` for regular kernels

    Residuals are the largest violations (zero when the bound holds).
    """
    n = kernel.n
    th = theta_table(kernel)
    card = popcounts(n).astype(float)
    p = {"kernel": kernel.digest()}
    reports = [IdentityReport("theta_growth_bound", n, p,
                              max(0.0, float((th - 2 * kernel.alpha * card).max())), tol)]
    if kernel.regular:
        reports.append(IdentityReport(
            "theta_regular_lower_bound", n, p,
            max(0.0, float((kernel.beta * card - th).max())), tol))
    if xi is not None:
        xi = np.asarray(xi, dtype=complex)
        prob = np.abs(xi) ** 2
        form_s = float(th @ prob)
        form_n = float(card @ prob)
        reports.append(IdentityReport(
            "quadratic_form_upper", n, p, max(0.0, form_s - 2 * kernel.alpha * form_n), tol))
        if kernel.regular:
            reports.append(IdentityReport(
                "quadratic_form_lower", n, p,
                max(0.0, kernel.beta * float((th * card) @ prob) - float((th ** 2) @ prob)), tol))
    return reports

