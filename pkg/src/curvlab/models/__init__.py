"""Example model families: Ising, hard-core gases, Cayley walks, hypercube."""

from .cayley import CayleySpec, build_cayley, build_hypercube, build_symmetric_group_walk
from .hardcore import (
    HardCoreSpec,
    build_graph_hardcore,
    build_hardcore,
    build_rods,
    conflict_epsilons,
    enumerate_allowed,
    eps0_at,
    hardcore_certificate,
    hardcore_epsilons,
    hardcore_split,
    interior_rod,
)
from .ising import (
    CurieWeiss,
    CurieWeissLimit,
    Exact,
    IsingSpec,
    Lattice2d,
    box_sites,
    build_curie_weiss,
    build_ising,
    build_lattice_ising,
    curie_weiss_epsilon,
    ising_certificate,
    ising_energies,
    ising_epsilon,
    ising_pair_bounds,
    ising_q_ratios,
    ising_threshold,
    lattice_display_epsilon,
    local_fields,
    spins,
)
from .spec import MODEL_TYPES, BuiltModel, all_certificates, build_model, named_graph, parse_model_document

__all__ = [
    "CayleySpec", "build_cayley", "build_hypercube", "build_symmetric_group_walk",
    "HardCoreSpec", "build_graph_hardcore", "build_hardcore", "build_rods", "conflict_epsilons",
    "enumerate_allowed", "eps0_at", "hardcore_certificate", "hardcore_epsilons", "hardcore_split",
    "interior_rod",
    "CurieWeiss", "CurieWeissLimit", "Exact", "IsingSpec", "Lattice2d", "box_sites",
    "build_curie_weiss", "build_ising", "build_lattice_ising", "curie_weiss_epsilon",
    "ising_certificate", "ising_energies", "ising_epsilon", "ising_pair_bounds", "ising_q_ratios",
    "ising_threshold", "lattice_display_epsilon", "local_fields", "spins",
    "MODEL_TYPES", "BuiltModel", "all_certificates", "build_model", "named_graph", "parse_model_document",
]
