"""
Verification suite: every identity and property check over seeded random
kernels, collected into one deterministic report.

Tasks run on a thread pool but results are ordered by task key, and every
task draws from its own generator seeded by ``(seed, crc32(key))``, so the
report does not depend on scheduling.
"""

import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    IdentityReport,
    verify_car,
    verify_exchange_commutation,
    verify_norm_formula,
    verify_spectral_oracle,
    verify_theta_bounds,
    verify_weighted_commutators_1d,
    verify_weighted_commutators_2d,
)
from .classical import (
    classical_generator,
    evolve_classical,
    gillespie_sample,
    verify_diagonal_correspondence,
)
from .fock import BernoulliProcess, sample_bernoulli_gram
from .semigroup import (
    build_model,
    random_hamiltonian,
    verify_decoherence_free,
    verify_explicit_semigroup,
    verify_markov_properties,
    verify_subharmonic_vacuum,
)
from .tolerances import MARKOV_KEYS, scaled
from .weighted import (
    TransitionKernel,
    WeightFunction,
    canonical_kernel,
    nearest_neighbor_kernel,
    number_operator,
    random_kernel,
)

FAMILIES = (
    "car",
    "spectral",
    "norm",
    "bounds",
    "commutators_1d",
    "commutators_2d",
    "exchange",
    "explicit_semigroup",
    "markov",
    "subharmonic",
    "decoherence_free",
    "classical",
    "gram",
)

DEFAULT_CONFIG = {
    "seed": 20240917,
    "modes": [2, 3, 4, 5],
    "kernels": 20,
    "markov_modes": [2, 3, 4],
    "markov_models": 2,
    "times": [0.1, 0.5, 1.0],
    "subharmonic_times": [0.5, 1.0, 2.0],
    "classical_modes": [2, 3, 4],
    "gillespie_trials": 100000,
    "gram_modes": [1, 2, 3, 4],
    "gram_samples": 100000,
    "workers": 4,
}


@dataclass
class SuiteResult:
    config: dict
    checks: list
    timings: dict = field(default_factory=dict)

    @property
    def failed(self):
        return [c for c in self.checks if not c["pass"]]

    @property
    def exit_code(self):
        return 0 if not self.failed else 1

    def to_json(self):
        return {
            "config": self.config,
            "summary": {
                "total": len(self.checks),
                "passed": len(self.checks) - len(self.failed),
                "failed": len(self.failed),
            },
            "checks": self.checks,
        }


def _rng(seed, key):
    return np.random.default_rng([seed, zlib.crc32(key.encode())])


def _worst(name, n, params, reports, tol=None):
    """Collapse a list of reports for one object into its largest residual."""
    worst = max(reports, key=lambda r: r.residual - r.tolerance)
    return IdentityReport(name, n, params, worst.residual,
                          worst.tolerance if tol is None else tol,
                          details={"worst": worst.identity, "checked": len(reports)})


def _tasks(cfg, tol, negative_control):
    seed = cfg["seed"]
    tasks = []

    def add(family, key, fn):
        tasks.append((family, f"{family}/{key}", fn))

    for n in cfg["modes"]:
        add("car", f"n{n:02d}", lambda n=n: verify_car(n))

    def kernel_task(family, n, i, body):
        key = f"n{n:02d}/k{i:03d}"
        full = f"{family}/{key}"

        def run():
            rng = _rng(seed, full)
            return body(random_kernel(n, rng), rng, i)

        add(family, key, run)

    variant = "doubled" if negative_control else "correct"
    for n in cfg["modes"]:
        for i in range(cfg["kernels"]):
            kernel_task("spectral", n, i, lambda K, rng, i: [verify_spectral_oracle(K)])
            kernel_task("norm", n, i, lambda K, rng, i: [verify_norm_formula(K, tol["norm_formula"])])
            kernel_task("bounds", n, i, lambda K, rng, i: verify_theta_bounds(
                K, rng.normal(size=1 << K.n) + 1j * rng.normal(size=1 << K.n)))
            kernel_task("commutators_1d", n, i, lambda K, rng, i: [_worst(
                "weighted_1d_commutators", K.n, {"index": i},
                verify_weighted_commutators_1d(WeightFunction(rng.uniform(0, 1, K.n))))])
            kernel_task("commutators_2d", n, i, lambda K, rng, i: [_worst(
                "weighted_2d_commutators", K.n, {"index": i, "variant": variant},
                verify_weighted_commutators_2d(K, variant=variant))])
            kernel_task("exchange", n, i, lambda K, rng, i: [_worst(
                "exchange_commutation", K.n, {"index": i}, verify_exchange_commutation(K))])

    def model_task(family, n, i, body):
        key = f"n{n:02d}/m{i:03d}"
        full = f"{family}/{key}"

        def run():
            rng = _rng(seed, full)
            model = build_model(random_kernel(n, rng), random_hamiltonian(n, rng))
            return body(model, rng)

        add(family, key, run)

    markov_tol = {k: tol[k] for k in MARKOV_KEYS}
    for n in cfg["markov_modes"]:
        for i in range(cfg["markov_models"]):
            model_task("explicit_semigroup", n, i, lambda m, rng: [
                verify_explicit_semigroup(m, t, rng.normal(size=m.dim) + 1j * rng.normal(size=m.dim),
                                          tol["explicit_semigroup"])
                for t in (0.1, 1.0, 5.0)])
            model_task("markov", n, i, lambda m, rng: verify_markov_properties(
                m, cfg["times"], seed=int(rng.integers(2**31)), tolerances=markov_tol))
            model_task("decoherence_free", n, i, lambda m, rng: [
                r for t in cfg["times"]
                for r in verify_decoherence_free(
                    m, number_operator(m.n), t, name="number",
                    evolve_tol=tol["decoherence_unitary"], algebra_tol=tol["decoherence_algebra"])])

    for n in (2, 3):
        for label, kernel in (("canonical", canonical_kernel(n)),
                              ("nn111", nearest_neighbor_kernel(n, 1.0, 1.0, 1.0))):
            add("subharmonic", f"n{n:02d}/{label}", lambda kernel=kernel: [
                verify_subharmonic_vacuum(build_model(kernel), t, tol=tol["subharmonic"])
                for t in cfg["subharmonic_times"]])

    add("classical", "two_state", lambda: _two_state_checks(cfg, tol))
    for n in cfg["classical_modes"]:
        for i in range(2):
            model_task("classical", n, i, lambda m, rng: _classical_checks(m, rng, cfg, tol))

    for n in cfg["gram_modes"]:
        key = f"n{n:02d}"

        def gram(n=n, key=key):
            rng = _rng(seed, "gram/" + key)
            # the 5/sqrt(N) bound assumes near-unit fourth moments, i.e. p near 1/2
            proc = BernoulliProcess(rng.uniform(0.35, 0.65, n))
            return _gram_checks(proc, cfg["gram_samples"], int(rng.integers(2**31)), tol)

        add("gram", key, gram)
    return tasks


def _two_state_checks(cfg, tol):
    w = np.zeros((2, 2))
    w[1, 0] = 1.0
    model = build_model(TransitionKernel(w))
    p0 = np.array([0.0, 1.0, 0.0, 0.0])
    reports = verify_diagonal_correspondence(model, p0, 1.0, tv_tol=tol["tv_classical"],
                                             offdiag_tol=tol["diagonal_invariance"])
    p_exact = 1.0 - np.exp(-1.0)
    p_ode = evolve_classical(classical_generator(model.kernel), p0, 1.0)
    reports.append(IdentityReport("two_state_closed_form", 2, {"t": 1.0},
                                  abs(p_ode[2] - p_exact), tol["tv_classical"]))
    emp = gillespie_sample(model.kernel, 1, 1.0, cfg["gillespie_trials"], cfg["seed"])
    reports.append(IdentityReport("gillespie_vs_closed_form", 2, {"t": 1.0, "trials": cfg["gillespie_trials"]},
                                  abs(emp[2] - p_exact), tol["gillespie"]))
    return reports


def _classical_checks(model, rng, cfg, tol):
    dim = model.dim
    start = int(rng.integers(1, dim))
    p0 = np.zeros(dim)
    p0[start] = 1.0
    t = 0.7
    reports = verify_diagonal_correspondence(model, p0, t, tv_tol=tol["tv_classical"],
                                             offdiag_tol=tol["diagonal_invariance"])
    p_ode = evolve_classical(classical_generator(model.kernel), p0, t)
    emp = gillespie_sample(model.kernel, start, t, cfg["gillespie_trials"], int(rng.integers(2**31)))
    reports.append(IdentityReport("gillespie_vs_ode", model.n,
                                  {"t": t, "start": start, "trials": cfg["gillespie_trials"]},
                                  float(np.abs(emp - p_ode).max()), tol["gillespie"]))
    return reports


def _gram_checks(proc, samples, seed, tol):
    G = sample_bernoulli_gram(proc, samples, seed)
    off = G - np.diag(np.diag(G))
    params = {"samples": samples, "p": [float(x) for x in proc.p]}
    return [
        IdentityReport("gram_offdiagonal", proc.n, params, float(np.abs(off).max()),
                       tol["gram_offdiagonal_factor"] / np.sqrt(samples)),
        IdentityReport("gram_diagonal", proc.n, params, float(np.abs(np.diag(G) - 1).max()),
                       tol["gram_diagonal"]),
    ]


def run_suite(config=None, only=None, negative_control=False, tolerance_scale=1.0):
    """Run the selected families and return a :class:`SuiteResult`."""
    cfg = dict(DEFAULT_CONFIG)
    cfg.update(config or {})
    tol = scaled(tolerance_scale, cfg.get("tolerances"))
    only = set(only) if only else None
    if only:
        unknown = only - set(FAMILIES)
        if unknown:
            raise KeyError(f"unknown check families: {sorted(unknown)}")
    tasks = [t for t in _tasks(cfg, tol, negative_control) if only is None or t[0] in only]

    def timed(task):
        family, key, fn = task
        start = time.perf_counter()
        reports = fn()
        return key, family, reports, time.perf_counter() - start

    with ThreadPoolExecutor(max_workers=max(1, int(cfg["workers"]))) as pool:
        results = list(pool.map(timed, tasks))

    checks = []
    timings = {}
    for key, family, reports, elapsed in sorted(results, key=lambda r: r[0]):
        timings[key] = elapsed
        for i, rep in enumerate(reports):
            entry = {"check": f"{key}/{i:03d}", "family": family}
            entry.update(rep.to_json())
            checks.append(entry)
    public_cfg = {k: v for k, v in cfg.items() if k != "workers"}
    public_cfg.update({"only": sorted(only) if only else None,
                       "negative_control": bool(negative_control),
                       "tolerance_scale": float(tolerance_scale)})
    return SuiteResult(public_cfg, checks, timings)
