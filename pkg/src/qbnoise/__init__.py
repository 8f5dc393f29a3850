"""Quantum Bernoulli noises, weighted number operators and the quantum
exclusion semigroup on finitely many modes."""

from .exceptions import (
    CapacityError,
    ConsistencyError,
    DomainError,
    ModeRangeError,
    QBNError,
    ShapeError,
)
from .fock import (
    BernoulliProcess,
    adjoint,
    annihilator,
    apply_operator,
    basis_vector,
    compose,
    creator,
    enumerate_basis,
    identity,
    mask_to_subset,
    occupancy_projector,
    residual_norm,
    sample_bernoulli_gram,
    spectral_norm,
    subset_to_mask,
)
from .weighted import (
    TransitionKernel,
    WeightFunction,
    embed_1d_kernel,
    make_kernel,
    norm_of_weighted_number,
    number_operator,
    occupancy_weight,
    one_d_number_operator,
    theta,
    theta_table,
    weighted_number_direct,
    weighted_number_spectral,
)
from .algebra import IdentityReport
from .semigroup import (
    EvolutionParams,
    HamiltonianTable,
    SemigroupModel,
    build_hamiltonian,
    build_model,
    choi_matrix,
    contraction_semigroup_apply,
    evolve_heisenberg,
    evolve_schrodinger,
    lindblad_apply,
)
from .classical import classical_generator, evolve_classical, gillespie_sample

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConsistencyError",
    "DomainError",
    "ModeRangeError",
    "QBNError",
    "ShapeError",
    "BernoulliProcess",
    "adjoint",
    "annihilator",
    "apply_operator",
    "basis_vector",
    "compose",
    "creator",
    "enumerate_basis",
    "identity",
    "mask_to_subset",
    "occupancy_projector",
    "residual_norm",
    "sample_bernoulli_gram",
    "spectral_norm",
    "subset_to_mask",
    "TransitionKernel",
    "WeightFunction",
    "embed_1d_kernel",
    "make_kernel",
    "norm_of_weighted_number",
    "number_operator",
    "occupancy_weight",
    "one_d_number_operator",
    "theta",
    "theta_table",
    "weighted_number_direct",
    "weighted_number_spectral",
    "IdentityReport",
    "EvolutionParams",
    "HamiltonianTable",
    "SemigroupModel",
    "build_hamiltonian",
    "build_model",
    "choi_matrix",
    "contraction_semigroup_apply",
    "evolve_heisenberg",
    "evolve_schrodinger",
    "lindblad_apply",
    "classical_generator",
    "evolve_classical",
    "gillespie_sample",
]
