"""Hard-core lattice gases: birth and death dynamics on a decreasing set ``A``.

Configurations are occupation tuples ``x: T -> {0, 1, 2, ...}``.  Moves are
creations ``g_i^+ x = x + 1_i`` (ids ``0..|T|-1``) and annihilations
``g_i^- x = x - 1_i`` (ids ``|T|..2|T|-1``; identity when ``x(i) = 0``),
with rates ``c(x, g_i^+) = nu(i) 1[x + 1_i in A]`` and ``c(x, g_i^-) = x(i)``.
The reversible measure is ``pi(x) ~ prod_i nu(i)^x(i) / x(i)!``.

Creations leaving ``A`` land on ghost states (the one-step shell of ``A``);
anything further out collapses onto a single cemetery ghost.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable

import networkx as nx
import numpy as np

from ..chain import MappingRepresentation, StateSpace, chain_from_mapping, state_cap
from ..criteria import Criterion, CurvatureCertificate
from ..errors import BadParams, NotDecreasing, TooLarge

__all__ = [
    "HardCoreSpec",
    "enumerate_allowed",
    "build_hardcore",
    "hardcore_epsilons",
    "eps0_at",
    "conflict_epsilons",
    "hardcore_certificate",
    "hardcore_split",
    "build_graph_hardcore",
    "build_rods",
    "interior_rod",
]


@dataclass(frozen=True)
class HardCoreSpec:
    """Sites, intensities and the allowed-configuration predicate.

    ``conflicts`` is set for pairwise-exclusion models (0/1 occupations, two
    sites in conflict may not both be occupied); it enables closed-form
    blocking parameters without enumerating ``A``.
    """

    sites: tuple
    nu: np.ndarray
    allowed: Callable[[tuple], bool]
    conflicts: tuple | None = None
    name: str = "hardcore"

    def __post_init__(self):
        nu = np.array(self.nu, dtype=float).reshape(-1)
        if nu.shape != (len(self.sites),):
            raise BadParams("one intensity per site required")
        if np.any(~np.isfinite(nu)) or np.any(nu <= 0):
            raise BadParams("intensities must be positive")
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "sites", tuple(self.sites))

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def contains(self, x) -> bool:
        return min(x) >= 0 and bool(self.allowed(tuple(x)))


def _shift(x, i, step):
    y = list(x)
    y[i] += step
    return tuple(y)


def enumerate_allowed(spec: HardCoreSpec, cap: int | None = None) -> list[tuple]:
    """Breadth-first enumeration of ``A`` from the empty configuration.

    Raises :class:`NotDecreasing` if some allowed ``x`` has a non-allowed
    ``x - 1_i``, and :class:`TooLarge` once more than ``cap`` states appear.
    """
    limit = state_cap(cap)
    zero = (0,) * spec.n_sites
    if not spec.contains(zero):
        raise NotDecreasing("the empty configuration is not allowed")
    seen = {zero}
    order = [zero]
    queue = deque([zero])
    while queue:
        x = queue.popleft()
        for i in range(spec.n_sites):
            y = _shift(x, i, 1)
            if y not in seen and spec.contains(y):
                seen.add(y)
                order.append(y)
                if len(order) > limit:
                    raise TooLarge(f"allowed set exceeds the cap {limit}")
                queue.append(y)
    for x in order:
        for i in range(spec.n_sites):
            if x[i] > 0 and _shift(x, i, -1) not in seen:
                raise NotDecreasing(f"{x} allowed but {_shift(x, i, -1)} is not")
    return order


def _log_weight(x, log_nu):
    return math.fsum(xi * ln - math.lgamma(xi + 1) for xi, ln in zip(x, log_nu) if xi)


def build_hardcore(spec: HardCoreSpec, cap: int | None = None):
    """Return ``(chain, rep, eps0, eps1)``."""
    states = enumerate_allowed(spec, cap)
    if len(states) < 2:
        raise BadParams("allowed set must contain at least two configurations")
    where = {x: i for i, x in enumerate(states)}
    n, t = len(states), spec.n_sites
    shell = []
    for x in states:
        for i in range(t):
            y = _shift(x, i, 1)
            if y not in where:
                where[y] = n + len(shell)
                shell.append(y)
    cemetery = n + len(shell)
    labels = states + shell
    m = cemetery + 1
    maps = np.full((2 * t, m), cemetery, dtype=np.int64)
    for idx, x in enumerate(labels):
        for i in range(t):
            maps[i, idx] = where.get(_shift(x, i, 1), cemetery)
            maps[t + i, idx] = where.get(_shift(x, i, -1), cemetery) if x[i] > 0 else idx
    maps[t:, cemetery] = cemetery

    rates = np.zeros((n, 2 * t))
    for idx, x in enumerate(states):
        for i in range(t):
            if maps[i, idx] < n:
                rates[idx, i] = spec.nu[i]
            rates[idx, t + i] = x[i]
    inverse = np.concatenate([np.arange(t, 2 * t), np.arange(t)])
    move_labels = tuple(f"+{s}" for s in spec.sites) + tuple(f"-{s}" for s in spec.sites)
    rep = MappingRepresentation(
        maps, inverse, rates, move_labels=move_labels,
        ghost_labels=tuple(shell) + ("cemetery",),
    )
    log_nu = np.log(spec.nu)
    logw = np.array([_log_weight(x, log_nu) for x in states])
    w = np.exp(logw - logw.max())
    pi = w / math.fsum(w)
    chain = chain_from_mapping(StateSpace(tuple(states), cap=cap), rep, pi)
    eps0, eps1 = hardcore_epsilons(spec, states)
    return chain, rep, eps0, eps1


def eps0_at(spec: HardCoreSpec, x, i: int) -> float:
    """Inner sum of the blocking parameter at ``(x, i)``::

        sum_{j != i} nu(j) 1[x + 1_j - 1_i in A] 1[x + 1_j not in A]
    """
    x = tuple(x)
    down = _shift(x, i, -1)
    terms = []
    for j in range(spec.n_sites):
        if j == i:
            continue
        if spec.contains(_shift(down, j, 1)) and not spec.contains(_shift(x, j, 1)):
            terms.append(spec.nu[j])
    return math.fsum(terms)


def hardcore_epsilons(spec: HardCoreSpec, states=None) -> tuple[float, float]:
    """``(eps0, eps1)`` by exhaustive evaluation over ``A``::

        eps0 = max_{x in A, x(i) > 0} sum_{j != i} nu(j) 1[x + 1_j - 1_i in A] 1[x + 1_j not in A]
        eps1 = min_{x in A, x(i) > 0} nu(i) 1[x + 1_i not in A]
    """
    if states is None:
        states = enumerate_allowed(spec)
    eps0, eps1 = -math.inf, math.inf
    for x in states:
        for i in range(spec.n_sites):
            if x[i] > 0:
                eps0 = max(eps0, eps0_at(spec, x, i))
                blocked = not spec.contains(_shift(x, i, 1))
                eps1 = min(eps1, spec.nu[i] if blocked else 0.0)
    return float(eps0), float(eps1)


def conflict_epsilons(spec: HardCoreSpec) -> tuple[float, float]:
    """``(eps0, eps1)`` for pairwise-exclusion models without enumerating ``A``.

    With 0/1 occupations ``x + 1_i`` is never allowed once ``x(i) = 1``, so
    ``eps1 = min nu``.  In the ``eps0`` sum only sites ``j`` in conflict
    with ``i`` contribute, and extra occupied sites can only remove terms,
    so the maximum is attained at singletons: ``eps0 = max_i sum_{j ~ i} nu(j)``.
    """
    if spec.conflicts is None:
        raise BadParams("closed form needs a pairwise-exclusion model")
    t = spec.n_sites
    neigh = [[] for _ in range(t)]
    for a, b in spec.conflicts:
        neigh[a].append(b)
        neigh[b].append(a)
    eps0 = max(math.fsum(spec.nu[j] for j in nb) for nb in neigh)
    return float(eps0), float(spec.nu.min())


def hardcore_split(t: int) -> tuple[list[int], list[int]]:
    """Creations and annihilations as move-id lists."""
    return list(range(t)), list(range(t, 2 * t))


def hardcore_certificate(eps0: float, eps1: float) -> CurvatureCertificate:
    """``(1 - eps0 + eps1) / 2`` whenever ``eps0 <= 1``."""
    valid = eps0 <= 1
    notes = [] if valid else ["eps0 > 1: hypothesis fails"]
    return CurvatureCertificate(
        Criterion.CLOSED_FORM, valid, 0.5 * (1 - eps0 + eps1) if valid else None,
        {"eps0": eps0, "eps1": eps1}, notes,
    )


def _exclusion_predicate(t, conflicts):
    blocked = [0] * t
    for a, b in conflicts:
        blocked[a] |= 1 << b
        blocked[b] |= 1 << a

    def allowed(x):
        mask = 0
        for i, v in enumerate(x):
            if v:
                if v > 1:
                    return False
                mask |= 1 << i
        m = mask
        while m:
            low = m & -m
            if blocked[low.bit_length() - 1] & mask:
                return False
            m ^= low
        return True

    return allowed


def build_graph_hardcore(graph: nx.Graph, rho: float) -> HardCoreSpec:
    """Independent sets of ``graph`` with constant intensity ``rho``."""
    if nx.number_of_selfloops(graph):
        raise BadParams("graph must not have self-loops")
    if graph.number_of_nodes() < 1:
        raise BadParams("graph must have a vertex")
    nodes = list(graph.nodes)
    where = {v: i for i, v in enumerate(nodes)}
    conflicts = tuple(sorted((min(where[a], where[b]), max(where[a], where[b])) for a, b in graph.edges))
    return HardCoreSpec(
        tuple(nodes), np.full(len(nodes), float(rho)),
        _exclusion_predicate(len(nodes), conflicts), conflicts, name="hardcore_graph",
    )


def build_rods(L: int, k: int, rho: float) -> HardCoreSpec:
    """Horizontal and vertical rods of ``k + 1`` vertices in ``{0..L}^2``.

    Two rods conflict when their vertex sets intersect.  Site labels are
    ``("h" | "v", u1, u2)`` with ``(u1, u2)`` the lower-left vertex.
    """
    if not (L >= k >= 1):
        raise BadParams("need L >= k >= 1")
    rods = []
    for u2 in range(L + 1):
        for u1 in range(L - k + 1):
            rods.append((("h", u1, u2), frozenset((u1 + s, u2) for s in range(k + 1))))
    for u1 in range(L + 1):
        for u2 in range(L - k + 1):
            rods.append((("v", u1, u2), frozenset((u1, u2 + s) for s in range(k + 1))))
    conflicts = tuple(
        (a, b) for a in range(len(rods)) for b in range(a + 1, len(rods)) if rods[a][1] & rods[b][1]
    )
    return HardCoreSpec(
        tuple(r[0] for r in rods), np.full(len(rods), float(rho)),
        _exclusion_predicate(len(rods), conflicts), conflicts, name="rods",
    )


def interior_rod(spec: HardCoreSpec, L: int, k: int) -> int:
    """Index of a horizontal rod whose every potential conflict fits in the box.

    Needs ``L >= 3k``.
    """
    u1, u2 = k, k
    if u1 + 2 * k > L or u2 + k > L:
        raise BadParams(f"no interior rod for L={L}, k={k} (need L >= 3k)")
    return spec.sites.index(("h", u1, u2))
