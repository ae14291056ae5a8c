"""Random walks on Cayley graphs, and the hypercube product chain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..chain import MappingRepresentation, StateSpace, chain_from_mapping, state_cap
from ..errors import BadParams, TooLarge
from ..groups import (
    PermutationGroup,
    cayley_representation,
    conjugation_table,
    generated_subgroup,
    invert,
    k_cycles,
    symmetric_group,
)

__all__ = ["CayleySpec", "build_cayley", "build_symmetric_group_walk", "build_hypercube"]

MAX_SYMMETRIC_DEGREE = 7


@dataclass(frozen=True)
class CayleySpec:
    """Group, generator set and rates (``None`` means constant ``1/|G|``).

    ``info`` holds extra ``(name, value)`` pairs for reports.
    """

    group: PermutationGroup
    generators: tuple
    rates: object = None
    name: str = "cayley"
    info: tuple = ()

    def check(self) -> None:
        """Raise unless the generators are inverse-closed, conjugacy-invariant and generating."""
        gens = set(self.generators)
        for g in self.generators:
            if invert(g) not in gens:
                raise BadParams(f"generator set not closed under inverse: {g}")
        conjugation_table(self.group, self.generators)
        if not self.group.generated_by(self.generators):
            raise BadParams("generators do not generate the group")


def build_cayley(spec: CayleySpec, cap: int | None = None):
    """Return ``(chain, rep)``; the reversible measure is uniform."""
    if spec.group.order > state_cap(cap):
        raise TooLarge(f"group order {spec.group.order} exceeds the cap")
    spec.check()
    space, rep, pi = cayley_representation(spec.group, spec.generators, spec.rates)
    return chain_from_mapping(space, rep, pi), rep


def build_symmetric_group_walk(n: int, k: int) -> CayleySpec:
    """Simple random walk generated by all ``k``-cycles of ``S_n``.

    For odd ``k`` the cycles are even permutations and only generate the
    alternating group, so the walk is built on that subgroup (the walk on
    ``S_n`` would be reducible).  ``info["group_order"]`` records which.
    """
    if not (1 < k < n):
        raise BadParams("need 1 < k < n")
    if n > MAX_SYMMETRIC_DEGREE:
        raise BadParams(f"n must be at most {MAX_SYMMETRIC_DEGREE}")
    gens = tuple(k_cycles(n, k))
    group = symmetric_group(n) if k % 2 == 0 else generated_subgroup(gens, n)
    info = (
        ("n", n), ("k", k), ("generator_count", len(gens)),
        ("binomial", math.comb(n, k)), ("group_order", group.order),
    )
    return CayleySpec(group, gens, 1.0 / len(gens), f"S{n}_{k}cycles", info)


def build_hypercube(n: int, rate=1.0):
    """``{0,1}^n`` with one flip move per coordinate; ``rate`` is a scalar or ``(2^n, n)`` table.

    Returns ``(chain, rep)`` with uniform ``pi`` (only reversible for tables
    with ``c(x, d) = c(d x, d)``).
    """
    if n < 1:
        raise BadParams("n must be positive")
    size = 2**n
    if size > state_cap():
        raise TooLarge(f"2^{n} states exceed the cap")
    maps = np.arange(size)[None, :] ^ (1 << np.arange(n))[:, None]
    rates = np.broadcast_to(np.asarray(rate, dtype=float), (size, n)).copy()
    rep = MappingRepresentation(maps, np.arange(n), rates, move_labels=tuple(f"flip{i}" for i in range(n)))
    pi = np.full(size, 1.0 / size)
    return chain_from_mapping(StateSpace.range(size), rep, pi), rep
