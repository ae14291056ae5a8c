"""Finite groups of permutations and their Cayley-graph random walks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .chain import MappingRepresentation, StateSpace
from .errors import BadParams, NotConjugacyInvariant, TooLarge

__all__ = [
    "MAX_GROUP_ORDER",
    "PermutationGroup",
    "compose",
    "invert",
    "cycles",
    "k_cycles",
    "symmetric_group",
    "generated_subgroup",
    "cayley_representation",
    "conjugation_table",
]

MAX_GROUP_ORDER = 10_000


def compose(p: tuple, q: tuple) -> tuple:
    """``(p q)(i) = p(q(i))``."""
    return tuple(p[i] for i in q)


def invert(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def cycles(p: tuple) -> list[tuple]:
    """Nontrivial cycles of ``p`` in canonical order."""
    seen, out = set(), []
    for start in range(len(p)):
        if start in seen:
            continue
        cyc, i = [], start
        while i not in seen:
            seen.add(i)
            cyc.append(i)
            i = p[i]
        if len(cyc) > 1:
            out.append(tuple(cyc))
    return out


def k_cycles(n: int, k: int) -> list[tuple]:
    """All ``k``-cycles in ``S_n`` as image tuples (``C(n,k) (k-1)!`` of them)."""
    out = []
    for support in itertools.combinations(range(n), k):
        first, rest = support[0], support[1:]
        for order in itertools.permutations(rest):
            cyc = (first,) + order
            img = list(range(n))
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                img[a] = b
            out.append(tuple(img))
    return out


@dataclass(frozen=True)
class PermutationGroup:
    """A finite group given by its elements as permutation image tuples."""

    elements: tuple
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        elements = tuple(tuple(int(v) for v in e) for e in self.elements)
        if len(elements) > MAX_GROUP_ORDER:
            raise TooLarge(f"group order {len(elements)} exceeds {MAX_GROUP_ORDER}")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "index", {e: i for i, e in enumerate(elements)})
        if len(self.index) != len(elements):
            raise ValueError("duplicate group elements")
        ident = tuple(range(self.degree))
        if ident not in self.index:
            raise ValueError("identity missing from the group")
        for a in elements[: min(len(elements), 50)]:
            if invert(a) not in self.index:
                raise ValueError("group not closed under inversion")

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def degree(self) -> int:
        return len(self.elements[0])

    def mul(self, a: tuple, b: tuple) -> tuple:
        return compose(a, b)

    def inv(self, a: tuple) -> tuple:
        return invert(a)

    def generated_by(self, gens) -> bool:
        """True if ``gens`` generate the whole group (breadth-first closure)."""
        ident = tuple(range(self.degree))
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = compose(g, x)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return len(seen) == self.order


def symmetric_group(n: int) -> PermutationGroup:
    if n < 1:
        raise BadParams("n must be positive")
    if math.factorial(n) > MAX_GROUP_ORDER:
        raise TooLarge(f"|S_{n}| = {math.factorial(n)} exceeds {MAX_GROUP_ORDER}")
    return PermutationGroup(tuple(itertools.permutations(range(n))))


def generated_subgroup(gens, degree: int) -> PermutationGroup:
    """Closure of ``gens`` under composition, elements in sorted order."""
    ident = tuple(range(degree))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = compose(g, x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > MAX_GROUP_ORDER:
                        raise TooLarge(f"generated group exceeds {MAX_GROUP_ORDER} elements")
        frontier = nxt
    return PermutationGroup(tuple(sorted(seen)))


def conjugation_table(group: PermutationGroup, generators) -> np.ndarray:
    """``table[d, e]`` = id of ``d e d^-1`` among the generators.

    Raises :class:`NotConjugacyInvariant` if some ``g d g^-1`` (``g`` ranging
    over the whole group) is not a generator.
    """
    gens = [tuple(g) for g in generators]
    where = {g: i for i, g in enumerate(gens)}
    for h in group.elements:
        h_inv = invert(h)
        for g in gens:
            conj = compose(compose(h, g), h_inv)
            if conj not in where:
                raise NotConjugacyInvariant(
                    f"{h} {g} {h}^-1 = {conj} is not a generator",
                    generator=g, conjugator=h,
                )
    m = len(gens)
    table = np.empty((m, m), dtype=np.int64)
    for d, g in enumerate(gens):
        g_inv = invert(g)
        for e, h in enumerate(gens):
            table[d, e] = where[compose(compose(g, h), g_inv)]
    return table


def cayley_representation(group: PermutationGroup, generators, rates=None):
    """Left-translation moves ``x -> d x`` for each generator ``d``.

    ``rates`` is ``None`` (constant ``1/|G|``), a scalar, or an
    ``(order, |G|)`` array.  Returns ``(space, rep, pi)`` with uniform ``pi``.
    """
    gens = [tuple(int(v) for v in g) for g in generators]
    where = {g: i for i, g in enumerate(gens)}
    if len(where) != len(gens):
        raise BadParams("duplicate generators")
    inverse = []
    for g in gens:
        gi = invert(g)
        if gi not in where:
            raise BadParams(f"generator set not closed under inverse: {g}")
        inverse.append(where[gi])
    n = group.order
    maps = np.empty((len(gens), n), dtype=np.int64)
    for d, g in enumerate(gens):
        maps[d] = [group.index[compose(g, x)] for x in group.elements]
    if rates is None:
        table = np.full((n, len(gens)), 1.0 / len(gens))
    elif np.ndim(rates) == 0:
        table = np.full((n, len(gens)), float(rates))
    else:
        table = np.asarray(rates, dtype=float)
    space = StateSpace(group.elements)
    rep = MappingRepresentation(maps, np.array(inverse), table, move_labels=tuple(gens))
    return space, rep, np.full(n, 1.0 / n)
