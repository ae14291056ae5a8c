"""Glauber dynamics for Ising models on ``{-1, 1}^n``.

States are bitmask integers: bit ``i`` set means spin ``x_i = +1``.  The
Hamiltonian is ``H(x) = -sum_{i,j} k_ij x_i x_j`` (ordered pairs, zero
diagonal) and the flip rates are ``c(x, d_i) = exp(-beta/2 (H(d_i x) - H(x)))``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy import optimize

from ..chain import MappingRepresentation, StateSpace, chain_from_mapping, state_cap
from ..criteria import Criterion, CurvatureCertificate, q_table
from ..errors import BadParams, NoRoot, TooLarge

__all__ = [
    "IsingSpec",
    "spins",
    "ising_energies",
    "local_fields",
    "build_ising",
    "ising_epsilon",
    "ising_pair_bounds",
    "ising_q_ratios",
    "ising_certificate",
    "build_lattice_ising",
    "box_sites",
    "build_curie_weiss",
    "Lattice2d",
    "CurieWeiss",
    "CurieWeissLimit",
    "Exact",
    "ising_threshold",
    "lattice_display_epsilon",
    "curie_weiss_epsilon",
]


@dataclass(frozen=True)
class IsingSpec:
    """Couplings ``k`` (symmetric, zero diagonal) at inverse temperature ``beta``.

    ``family`` optionally records where the couplings came from, e.g.
    ``("lattice", d)`` or ``("curie_weiss", n)``; it only affects reporting.
    """

    k: np.ndarray
    beta: float
    family: tuple = ()
    sites: tuple = field(default=(), compare=False)

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] < 1:
            raise BadParams("k must be a square matrix")
        if not np.all(np.isfinite(k)):
            raise BadParams("k must be finite")
        if np.any(np.diag(k) != 0):
            raise BadParams("k must have zero diagonal")
        if not np.array_equal(k, k.T):
            raise BadParams("k must be symmetric")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise BadParams("beta must be a finite nonnegative number")
        k.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def n(self) -> int:
        return self.k.shape[0]

    def with_beta(self, beta: float) -> "IsingSpec":
        return IsingSpec(self.k, beta, self.family, self.sites)


def spins(n: int) -> np.ndarray:
    """``(2^n, n)`` array of spins, row ``x`` decoding bitmask ``x``."""
    x = np.arange(2**n)[:, None]
    return np.where((x >> np.arange(n)[None, :]) & 1, 1, -1).astype(np.int64)


def ising_energies(spec: IsingSpec) -> np.ndarray:
    s = spins(spec.n).astype(float)
    return -np.einsum("xi,ij,xj->x", s, spec.k, s)


def local_fields(spec: IsingSpec) -> np.ndarray:
    """``grad_i H(x) = H(d_i x) - H(x) = 4 x_i sum_j k_ij x_j``, shape ``(2^n, n)``."""
    s = spins(spec.n).astype(float)
    return 4.0 * s * (s @ spec.k)


def build_ising(spec: IsingSpec, cap: int | None = None):
    """Return ``(chain, rep)`` for the Glauber dynamics of ``spec``."""
    n = spec.n
    size = 2**n
    if size > state_cap(cap):
        raise TooLarge(f"2^{n} = {size} states exceed the cap {state_cap(cap)}")
    energies = ising_energies(spec)
    logw = -spec.beta * energies
    logw -= logw.max()
    weights = np.exp(logw)
    pi = weights / math.fsum(weights)
    rates = np.exp(-0.5 * spec.beta * local_fields(spec))
    maps = np.arange(size)[None, :] ^ (1 << np.arange(n))[:, None]
    rep = MappingRepresentation(maps, np.arange(n), rates, move_labels=tuple(f"flip{i}" for i in range(n)))
    space = StateSpace.range(size, cap=cap)
    return chain_from_mapping(space, rep, pi), rep


def ising_pair_bounds(spec: IsingSpec) -> np.ndarray:
    """``M[i, j] = exp(2 beta sum_{m != i,j} |k_im| + |k_jm|) (exp(4 beta |k_ij|) - 1)``, zero diagonal."""
    a = np.abs(spec.k)
    row = a.sum(axis=1)
    # sum over m != i, j of |k_im| + |k_jm| = row_i + row_j - 2|k_ij| (diagonal is zero)
    rest = row[:, None] + row[None, :] - 2.0 * a
    M = np.exp(2.0 * spec.beta * rest) * np.expm1(4.0 * spec.beta * a)
    np.fill_diagonal(M, 0.0)
    return M


def ising_epsilon(spec: IsingSpec) -> float:
    """``eps(beta) = max_i sum_{j != i} M[i, j]`` from :func:`ising_pair_bounds`."""
    M = ising_pair_bounds(spec)
    return max(math.fsum(r) for r in M)


def ising_q_ratios(spec: IsingSpec, rep: MappingRepresentation, pi) -> np.ndarray:
    """``(q(d_i x, d_i, d_j) - q_*(x, d_i, d_j)) / q(x, d_i, d_i)`` for all ``(x, i, j)``.

    NaN on ``i == j``.  Used to check the pairwise estimate against
    :func:`ising_pair_bounds` exhaustively.
    """
    qt = q_table(rep, pi)
    y = rep.targets
    n = spec.n
    i = np.arange(n)
    q_moved = qt.q[y[:, :, None], i[None, :, None], i[None, None, :]]  # q(d_i x, d_i, d_j)
    diag = qt.q[:, i, i][:, :, None]
    return (q_moved - qt.qstar_array) / diag


def ising_certificate(spec: IsingSpec, rep: MappingRepresentation | None = None) -> CurvatureCertificate:
    """Closed-form bound ``(1 - eps) 2 c_*`` with ``c_*`` the exact minimal rate.

    For lattice and Curie-Weiss families the displayed textbook constants
    are attached as intermediates for comparison.
    """
    eps = ising_epsilon(spec)
    if rep is not None:
        c_star = float(rep.rates.min())
    else:
        c_star = _c_star(spec)
    inter = {"epsilon": eps, "c_star": c_star, "beta": spec.beta}
    notes = []
    if spec.family and spec.family[0] == "lattice":
        d = spec.family[1]
        inter["epsilon_display"] = lattice_display_epsilon(spec.beta, d)
        inter["c_star_display"] = math.exp(-spec.beta * d)
        notes.append("display constants assume full degree 2d; exact values computed from the couplings")
    elif spec.family and spec.family[0] == "curie_weiss":
        m = spec.family[1]
        inter["epsilon_display"] = curie_weiss_epsilon(spec.beta, m)
        inter["c_star_display"] = math.exp(-spec.beta * (m - 1) / (2 * m))
    if eps > 1:
        notes.append("epsilon > 1: hypothesis fails")
    valid = eps <= 1
    return CurvatureCertificate(Criterion.CLOSED_FORM, valid, (1 - eps) * 2 * c_star if valid else None, inter, notes)


def _c_star(spec):
    if spec.n <= 16:
        return math.exp(-0.5 * spec.beta * float(local_fields(spec).max()))
    # too many states to enumerate: all couplings opposing the flip is a lower
    # bound, exact for ferromagnetic couplings
    return math.exp(-2.0 * spec.beta * float(np.abs(spec.k).sum(axis=1).max()))


# -- families -----------------------------------------------------------------

def box_sites(shape) -> list[tuple]:
    """All integer points of the box ``prod [0, shape_a)``."""
    return list(itertools.product(*(range(int(s)) for s in shape)))


def build_lattice_ising(sites, beta: float) -> IsingSpec:
    """Couplings ``1/2`` on nearest-neighbour pairs of a connected ``sites`` subset of ``Z^d``."""
    sites = [tuple(int(v) for v in s) for s in sites]
    if not sites:
        raise BadParams("empty site set")
    d = len(sites[0])
    if any(len(s) != d for s in sites):
        raise BadParams("sites must share a dimension")
    where = {s: i for i, s in enumerate(sites)}
    if len(where) != len(sites):
        raise BadParams("duplicate sites")
    g = nx.Graph()
    g.add_nodes_from(range(len(sites)))
    for s, i in where.items():
        for a in range(d):
            t = s[:a] + (s[a] + 1,) + s[a + 1:]
            if t in where:
                g.add_edge(i, where[t])
    if not nx.is_connected(g):
        raise BadParams("lattice region must be connected")
    k = 0.5 * nx.to_numpy_array(g, nodelist=range(len(sites)))
    return IsingSpec(k, beta, ("lattice", d), tuple(sites))


def build_curie_weiss(n: int, beta: float) -> IsingSpec:
    if n < 2:
        raise BadParams("Curie-Weiss needs n >= 2")
    k = np.full((n, n), 1.0 / (2 * n))
    np.fill_diagonal(k, 0.0)
    return IsingSpec(k, beta, ("curie_weiss", n))


def lattice_display_epsilon(beta: float, d: int) -> float:
    """``(2d-1) exp(2 beta (2d-1)) (exp(2 beta) - 1)``."""
    return (2 * d - 1) * math.exp(2 * beta * (2 * d - 1)) * math.expm1(2 * beta)


def curie_weiss_epsilon(beta: float, n: int) -> float:
    """``(n-1) exp(2 beta (n-2)/n) (exp(2 beta/n) - 1)``."""
    return (n - 1) * math.exp(2 * beta * (n - 2) / n) * math.expm1(2 * beta / n)


@dataclass(frozen=True)
class Lattice2d:
    """Displayed lattice bound; despite the name any dimension ``d`` is accepted."""

    d: int = 2

    def epsilon(self, beta):
        return lattice_display_epsilon(beta, self.d)


@dataclass(frozen=True)
class CurieWeiss:
    n: int

    def epsilon(self, beta):
        return curie_weiss_epsilon(beta, self.n)


@dataclass(frozen=True)
class CurieWeissLimit:
    """Large-``n`` simplification ``2 beta exp(2 beta)``."""

    def epsilon(self, beta):
        return 2 * beta * math.exp(2 * beta)


@dataclass(frozen=True)
class Exact:
    spec: IsingSpec

    def epsilon(self, beta):
        return ising_epsilon(self.spec.with_beta(beta))


def ising_threshold(family, beta_cap: float = 64.0, xtol: float = 1e-8) -> float:
    """Root of ``eps(beta) = 1`` by bisection.

    ``family`` is any object with an ``epsilon(beta)`` method, or a plain
    callable.  Raises :class:`NoRoot` if ``eps`` stays below 1 up to
    ``beta_cap``.
    """
    eps = family.epsilon if hasattr(family, "epsilon") else family
    hi = 1.0
    while eps(hi) < 1.0:
        if hi >= beta_cap:
            raise NoRoot(f"epsilon({beta_cap}) = {eps(beta_cap)} < 1")
        hi = min(2 * hi, beta_cap)
    grid = np.linspace(0.0, hi, 65)
    values = np.array([eps(b) for b in grid])
    assert np.all(np.diff(values) >= -1e-12 * np.abs(values[1:])), "epsilon(beta) is not increasing"
    return float(optimize.bisect(lambda b: eps(b) - 1.0, 0.0, hi, xtol=xtol))
