"""Default tolerances for every check, in one place.

``scaled(factor)`` multiplies all of them (exact-zero entries stay zero).
"""

DEFAULT_TOLERANCES = {
    "exact": 0.0,
    "weighted": 1e-12,
    "norm_formula": 1e-12,
    "explicit_semigroup": 1e-10,
    "conservative": 1e-8,
    "semigroup_law": 1e-7,
    "contraction": 1e-8,
    "positivity": 1e-8,
    "duality": 1e-8,
    "complete_positivity": 1e-8,
    "trace_preservation": 1e-8,
    "subharmonic": 1e-8,
    "decoherence_unitary": 1e-8,
    "decoherence_algebra": 1e-12,
    "tv_classical": 1e-6,
    "diagonal_invariance": 1e-10,
    "gillespie": 0.01,
    "gram_diagonal": 0.1,
    "gram_offdiagonal_factor": 5.0,
    "trace": 1e-10,
}

MARKOV_KEYS = ("conservative", "semigroup_law", "contraction", "positivity",
               "duality", "complete_positivity", "trace_preservation")


def scaled(factor=1.0, overrides=None):
    out = {k: v * factor for k, v in DEFAULT_TOLERANCES.items()}
    for k, v in (overrides or {}).items():
        if k not in out:
            raise KeyError(f"unknown tolerance {k!r}")
        out[k] = float(v) * factor
    return out
