"""
Scenario files: build a model from JSON, evolve a state, export expectations.

Everything is computed in memory first; output files are written only
after the whole scenario succeeded, so a failed run leaves no partial
artifacts behind.
"""

import csv
import io
import json
import os
import tempfile
from importlib import resources

import jsonschema
import numpy as np

from .algebra import IdentityReport
from .classical import (
    classical_generator,
    configuration_label,
    evolve_classical,
    gillespie_sample,
    total_variation,
    verify_diagonal_correspondence,
)
from .exceptions import DomainError, QBNError, ShapeError
from .fock import check_modes
from .semigroup import (
    EvolutionParams,
    build_hamiltonian,
    build_model,
    evolve_schrodinger,
    initial_state,
    observable,
    verify_decoherence_free,
    verify_markov_properties,
    verify_subharmonic_vacuum,
)
from .tolerances import MARKOV_KEYS, scaled
from .weighted import kernel_from_json, number_operator

__all__ = ["ScenarioError", "load_scenario", "run_scenario", "scenario_schema", "format_float"]


class ScenarioError(QBNError, ValueError):
    """The scenario file is unreadable or does not match the schema."""


def scenario_schema():
    text = resources.files("qbnoise").joinpath("schemas/scenario.schema.json").read_text()
    return json.loads(text)


def load_scenario(path):
    """Parse and validate a scenario file; raises :class:`ScenarioError`."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    try:
        jsonschema.validate(cfg, scenario_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"schema violation at {where}: {exc.message}") from None
    times = cfg["times"]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ScenarioError("times must be sorted in nondecreasing order")
    return cfg


def format_float(x):
    """Shortest round-trip decimal, as used in every CSV cell."""
    return repr(float(x))


def _build(cfg):
    n = check_modes(cfg["modes"])
    kernel_cfg = dict(cfg["kernel"])
    kernel_cfg.setdefault("n", n)
    kernel = kernel_from_json(kernel_cfg)
    if kernel.n != n:
        raise ShapeError(f"kernel has n={kernel.n} but modes={n}")
    ham_cfg = cfg.get("hamiltonian", {"type": "zero"})
    ham = build_hamiltonian(n, ham_cfg["type"], eps=ham_cfg.get("eps"), table=ham_cfg.get("table"))
    return build_model(kernel, ham)


def _gillespie_mixture(kernel, p0, t, trials, seed):
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(trials, p0)
    child_seeds = np.random.SeedSequence(seed).spawn(len(p0))
    out = np.zeros(len(p0))
    for state, count in enumerate(counts):
        if count:
            out += count * gillespie_sample(kernel, state, t, int(count), child_seeds[state])
    return out / trials


def _evaluate(cfg):
    model = _build(cfg)
    n = model.n
    tol = scaled(1.0, cfg.get("tolerances"))
    m = cfg.get("method", {})
    params = EvolutionParams(m.get("name", "auto"), m.get("tol", 1e-10), m.get("max_exact_dim", 4096))
    observables = [observable(n, spec) for spec in cfg["observables"]]
    rho0 = initial_state(n, cfg.get("initial_state", {"type": "vacuum"}))
    p0 = np.real(np.diag(rho0))
    checks = set(cfg.get("checks", []))
    seed = int(cfg.get("seed", 0))
    trials = int(cfg.get("gillespie_trials", 100000))
    want_classical = "classical" in checks or "gillespie" in checks
    Q = classical_generator(model.kernel) if want_classical else None

    rows, populations, reports = [], [], []
    expectations = {name: [] for _, name in observables}
    rho, last_t = rho0, 0.0
    for t in cfg["times"]:
        rho = evolve_schrodinger(model, rho, t - last_t, params)
        last_t = t
        row = [t]
        for X, name in observables:
            val = np.trace(rho @ X)
            expectations[name].append([float(val.real), float(val.imag)])
            row.append(val.real)
        p_quantum = np.clip(np.real(np.diag(rho)), 0.0, None)
        if want_classical:
            p_classical = evolve_classical(Q, p0, t)
            row.append(total_variation(p_quantum, p_classical))
            p_gill = None
            if "gillespie" in checks:
                p_gill = _gillespie_mixture(model.kernel, p0, t, trials, seed)
                reports.append(IdentityReport("gillespie_vs_ode", n, {"t": t, "trials": trials},
                                              float(np.abs(p_gill - p_classical).max()), tol["gillespie"]))
            for state in range(model.dim):
                populations.append([t, configuration_label(state), p_quantum[state], p_classical[state],
                                    None if p_gill is None else p_gill[state]])
        rows.append(row)

    if "classical" in checks:
        for t in cfg["times"]:
            reports.extend(verify_diagonal_correspondence(
                model, p0, t, params, tv_tol=tol["tv_classical"], offdiag_tol=tol["diagonal_invariance"]))
    if "markov" in checks:
        reports.extend(verify_markov_properties(
            model, cfg["times"], seed=seed, params=params, tolerances={k: tol[k] for k in MARKOV_KEYS}))
    if "subharmonic" in checks:
        reports.extend(verify_subharmonic_vacuum(model, t, params, tol["subharmonic"]) for t in cfg["times"])
    if "decoherence_free" in checks:
        for t in cfg["times"]:
            reports.extend(verify_decoherence_free(
                model, number_operator(n), t, params, name="number",
                evolve_tol=tol["decoherence_unitary"], algebra_tol=tol["decoherence_algebra"]))

    header = ["t"] + [name for _, name in observables] + (["tv_classical"] if want_classical else [])
    failed = sum(not r.passed for r in reports)
    report = {
        "model": model.summary(),
        "method": {"name": params.method, "resolved": params.resolve(n), "tol": params.tol},
        "times": [float(t) for t in cfg["times"]],
        "expectations": expectations,
        "checks": [r.to_json() for r in reports],
        "summary": {"checks": len(reports), "failed": failed},
    }
    return report, header, rows, populations


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v if isinstance(v, str) else format_float(v) for v in row])
    return buf.getvalue()


def _write_atomic(directory, files):
    os.makedirs(directory, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{name}.")
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            staged.append((tmp, os.path.join(directory, name)))
        for tmp, final in staged:
            os.replace(tmp, final)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.remove(tmp)


def run_scenario(path, out_dir):
    """Evaluate a scenario and write ``report.json``, ``timeseries.csv`` and,
    when classical checks were requested, ``populations.csv``.

    Returns the number of failed checks.
    """
    cfg = load_scenario(path)
    try:
        report, header, rows, populations = _evaluate(cfg)
    except (DomainError, ShapeError, KeyError) as exc:
        raise ScenarioError(str(exc)) from None
    files = {
        "report.json": json.dumps(report, indent=2, sort_keys=True) + "\n",
        "timeseries.csv": _csv_text(header, rows),
    }
    if populations:
        files["populations.csv"] = _csv_text(
            ["t", "configuration", "quantum", "classical", "gillespie"], populations)
    _write_atomic(out_dir, files)
    return report["summary"]["failed"]
