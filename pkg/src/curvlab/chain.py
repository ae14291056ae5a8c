"""Finite reversible Markov chains and their mapping representations.

A chain is a rate table ``Q`` on a finite state space together with its
reversible measure ``pi``.  A mapping representation describes the same
generator through a finite set of moves (total maps on the state space)
and a rate table ``c(x, move)``::

    L psi(x) = sum_d (psi(d x) - psi(x)) c(x, d)

Moves may act on an enlarged index set: indices ``>= n_states`` are ghost
states which carry zero mass and zero rates.  Every rate pointing at a ghost
must vanish, so all forms computed with the enlarged representation agree
with the physical chain.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .errors import InvalidMapping, TooLarge

__all__ = [
    "DEFAULT_STATE_CAP",
    "state_cap",
    "StateSpace",
    "MarkovChain",
    "Move",
    "MappingRepresentation",
    "ValidationFailure",
    "ValidationReport",
    "CommutativityReport",
    "validate_chain",
    "representation_problems",
    "chain_from_mapping",
    "canonical_transposition_representation",
    "commutativity_report",
    "close_enough",
    "chain_to_dict",
    "load_chain_document",
]

DEFAULT_STATE_CAP = 20_000
DB_RTOL = 1e-10
DB_ATOL = 1e-14
PI_SUM_TOL = 1e-12


def state_cap(cap: int | None = None) -> int:
    """Return the active state cap (argument, then ``CURVLAB_STATE_CAP``)."""
    if cap is not None:
        return int(cap)
    env = os.environ.get("CURVLAB_STATE_CAP")
    if env:
        return int(env)
    return DEFAULT_STATE_CAP


def close_enough(a, b, rtol=DB_RTOL, atol=DB_ATOL):
    """Elementwise relative comparison with an absolute floor."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.abs(a - b) <= rtol * np.maximum(np.abs(a), np.abs(b)) + atol


def _freeze(arr) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _hashable(label):
    if isinstance(label, list):
        return tuple(_hashable(v) for v in label)
    return label


@dataclass(frozen=True)
class StateSpace:
    """Ordered, duplicate-free list of state labels."""

    states: tuple
    cap: int | None = None
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = tuple(_hashable(s) for s in self.states)
        object.__setattr__(self, "states", states)
        if len(states) < 2:
            raise ValueError("a state space needs at least two states")
        limit = state_cap(self.cap)
        if len(states) > limit:
            raise TooLarge(
                f"{len(states)} states exceed the cap of {limit} "
                "(raise it with cap= or CURVLAB_STATE_CAP)"
            )
        index = {s: i for i, s in enumerate(states)}
        if len(index) != len(states):
            raise ValueError("state labels must be unique")
        object.__setattr__(self, "index", index)

    def __len__(self):
        return len(self.states)

    @classmethod
    def range(cls, n: int, cap: int | None = None) -> "StateSpace":
        return cls(tuple(range(n)), cap=cap)


@dataclass(frozen=True)
class MarkovChain:
    """Rate table ``Q`` with zero diagonal and strictly positive weights ``pi``.

    ``pi`` may be passed unnormalized; it is normalized on construction and
    the normalizer is kept in ``Z``.  Construction does not check
    reversibility or irreducibility, use :func:`validate_chain` for that.
    """

    space: StateSpace
    Q: np.ndarray
    pi: np.ndarray
    Z: float = 1.0

    def __post_init__(self):
        n = len(self.space)
        Q = np.asarray(self.Q, dtype=float)
        if Q.shape != (n, n):
            raise ValueError(f"Q has shape {Q.shape}, expected {(n, n)}")
        if not np.all(np.isfinite(Q)) or np.any(Q < 0):
            raise ValueError("Q entries must be finite and nonnegative")
        if np.any(np.diag(Q) != 0):
            raise ValueError("Q must have a zero diagonal")
        pi = np.asarray(self.pi, dtype=float)
        if pi.shape != (n,):
            raise ValueError(f"pi has shape {pi.shape}, expected {(n,)}")
        if not np.all(np.isfinite(pi)) or np.any(pi <= 0):
            raise ValueError("pi must be finite and strictly positive")
        total = float(np.sum(pi, dtype=np.longdouble))
        object.__setattr__(self, "Q", _freeze(Q))
        object.__setattr__(self, "pi", _freeze(pi / total))
        object.__setattr__(self, "Z", float(self.Z) * total)

    @property
    def n(self) -> int:
        return len(self.space)

    def generator_matrix(self) -> np.ndarray:
        """Dense generator ``L = Q - diag(row sums)``."""
        L = np.array(self.Q, copy=True)
        np.fill_diagonal(L, -self.Q.sum(axis=1))
        return L


@dataclass(frozen=True)
class Move:
    """One move of a mapping representation."""

    id: int
    map: np.ndarray
    inverse_id: int
    label: Any = None

    def __call__(self, x: int) -> int:
        return int(self.map[x])


@dataclass(frozen=True)
class MappingRepresentation:
    """Move set ``G`` (as index maps) with inverse pairing and rates ``c``.

    Attributes
    ----------
    maps : (G, M) int array
        ``maps[d, x]`` is the image of state index ``x`` under move ``d``.
        ``M = n_states + n_ghosts``.
    inverse : (G,) int array
        Move id of ``d^-1``.
    rates : (n_states, G) float array
        ``c(x, d)`` on physical states; ghost states have zero rates.
    """

    maps: np.ndarray
    inverse: np.ndarray
    rates: np.ndarray
    move_labels: tuple = ()
    ghost_labels: tuple = ()

    def __post_init__(self):
        maps = np.asarray(self.maps, dtype=np.int64)
        inverse = np.asarray(self.inverse, dtype=np.int64)
        rates = np.asarray(self.rates, dtype=float)
        if maps.ndim != 2:
            raise ValueError("maps must be a (G, M) array")
        g, m = maps.shape
        if inverse.shape != (g,):
            raise ValueError("inverse must have one entry per move")
        if rates.ndim != 2 or rates.shape[1] != g:
            raise ValueError("rates must be an (n_states, G) array")
        if rates.shape[0] > m:
            raise ValueError("more rate rows than indexed states")
        if np.any((maps < 0) | (maps >= m)):
            raise ValueError("move images must index the (enlarged) state set")
        if np.any((inverse < 0) | (inverse >= g)):
            raise ValueError("inverse ids out of range")
        if not np.all(np.isfinite(rates)) or np.any(rates < 0):
            raise ValueError("rates must be finite and nonnegative")
        labels = tuple(self.move_labels) if self.move_labels else tuple(range(g))
        if len(labels) != g:
            raise ValueError("one label per move required")
        ghosts = tuple(_hashable(s) for s in self.ghost_labels)
        if ghosts and len(ghosts) != m - rates.shape[0]:
            raise ValueError("one label per ghost state required")
        object.__setattr__(self, "maps", _freeze(maps))
        object.__setattr__(self, "inverse", _freeze(inverse))
        object.__setattr__(self, "rates", _freeze(rates))
        object.__setattr__(self, "move_labels", labels)
        object.__setattr__(self, "ghost_labels", ghosts)

    @property
    def n_states(self) -> int:
        return self.rates.shape[0]

    @property
    def n_total(self) -> int:
        return self.maps.shape[1]

    @property
    def n_moves(self) -> int:
        return self.maps.shape[0]

    @property
    def moves(self) -> list[Move]:
        return [
            Move(d, self.maps[d], int(self.inverse[d]), self.move_labels[d])
            for d in range(self.n_moves)
        ]

    @property
    def involutive(self) -> bool:
        return bool(np.all(self.inverse == np.arange(self.n_moves)))

    @property
    def targets(self) -> np.ndarray:
        """``targets[x, d] = d x`` for physical ``x``."""
        return self.maps[:, : self.n_states].T

    def rates_extended(self) -> np.ndarray:
        """Rates padded with zero rows for ghost states, shape (M, G)."""
        out = np.zeros((self.n_total, self.n_moves))
        out[: self.n_states] = self.rates
        return out


@dataclass
class ValidationFailure:
    invariant: str
    witness: tuple
    detail: str = ""


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok

    def kinds(self) -> set:
        return {f.invariant for f in self.failures}


@dataclass
class CommutativityReport:
    """Outcome of the exhaustive ``d e x == e d x`` check.

    ``commutative`` ranges over every physical state and every pair of
    moves.  ``support_commutative`` only over triples with
    ``c(x, d) c(x, e) > 0``, which is what the curvature criteria need (an
    admissible R may only be positive there).
    """

    commutative: bool
    witnesses: list
    involutive: bool
    support_commutative: bool
    support_witnesses: list = field(default_factory=list)


def validate_chain(chain: MarkovChain) -> ValidationReport:
    """Check irreducibility, detailed balance and normalization of ``pi``."""
    report = ValidationReport()
    Q, pi = chain.Q, chain.pi

    graph = scipy.sparse.csr_matrix(Q > 0)
    ncomp, labels = scipy.sparse.csgraph.connected_components(
        graph, directed=True, connection="strong"
    )
    if ncomp > 1:
        other = int(np.flatnonzero(labels != labels[0])[0])
        report.failures.append(
            ValidationFailure(
                "irreducibility",
                (0, other),
                f"{ncomp} strongly connected components",
            )
        )

    flux = Q * pi[:, None]
    bad = ~close_enough(flux, flux.T)
    if np.any(bad):
        x, y = (int(v) for v in np.argwhere(bad)[0])
        report.failures.append(
            ValidationFailure(
                "detailed_balance",
                (x, y),
                f"Q(x,y)pi(x)={flux[x, y]!r} vs Q(y,x)pi(y)={flux[y, x]!r}",
            )
        )

    total = float(np.sum(pi, dtype=np.longdouble))
    if abs(total - 1.0) > PI_SUM_TOL:
        report.failures.append(
            ValidationFailure("normalization", (), f"sum(pi) = {total!r}")
        )
    return report


def representation_problems(rep: MappingRepresentation, pi) -> list[str]:
    """List every violated mapping-representation invariant (empty if valid)."""
    problems = []
    pi = np.asarray(pi, dtype=float)
    n, g = rep.n_states, rep.n_moves
    if pi.shape != (n,):
        return [f"pi has shape {pi.shape}, expected {(n,)}"]

    inv = rep.inverse
    if np.any(inv[inv] != np.arange(g)):
        d = int(np.flatnonzero(inv[inv] != np.arange(g))[0])
        problems.append(f"inverse closure fails at move {d}")

    c = rep.rates
    y = rep.targets  # (n, g)
    active = c > 0
    ghost_hit = active & (y >= n)
    if np.any(ghost_hit):
        x, d = np.argwhere(ghost_hit)[0]
        problems.append(f"positive rate c({x},{d}) leads to a ghost state")

    back = rep.maps[inv[None, :], y]  # d^-1 (d x)
    broken = active & (back != np.arange(n)[:, None])
    if np.any(broken):
        x, d = np.argwhere(broken)[0]
        problems.append(f"inverse pairing fails: move {d} at state {x}")

    pi_ext = np.concatenate([pi, np.zeros(rep.n_total - n)])
    c_ext = rep.rates_extended()
    lhs = c * pi[:, None]
    rhs = c_ext[y, inv[None, :]] * pi_ext[y]
    # only moves with c(x, d) > 0 are constrained; moves that fix x with zero
    # rate (e.g. annihilating an empty site) may have a live inverse at x
    db = active & ~close_enough(lhs, rhs)
    if np.any(db):
        x, d = np.argwhere(db)[0]
        problems.append(
            f"detailed balance fails at (x={x}, move={d}): {lhs[x, d]!r} vs {rhs[x, d]!r}"
        )
    return problems


def chain_from_mapping(space: StateSpace, rep: MappingRepresentation, pi) -> MarkovChain:
    """Assemble ``Q(x, y) = sum_{d: d x = y, y != x} c(x, d)``.

    Raises
    ------
    InvalidMapping
        If inverse pairing or detailed balance fails for ``rep``.
    """
    if rep.n_states != len(space):
        raise InvalidMapping("representation and state space sizes differ")
    weights = np.asarray(pi, dtype=float)
    probs = weights / float(np.sum(weights, dtype=np.longdouble))
    problems = representation_problems(rep, probs)
    if problems:
        raise InvalidMapping("; ".join(problems))
    n = rep.n_states
    Q = np.zeros((n, n))
    y = rep.targets
    xs = np.broadcast_to(np.arange(n)[:, None], y.shape)
    keep = (y != xs) & (rep.rates > 0)
    np.add.at(Q, (xs[keep], y[keep]), rep.rates[keep])
    return MarkovChain(space, Q, weights)


def canonical_transposition_representation(chain: MarkovChain) -> MappingRepresentation:
    """One self-inverse swap move per unordered edge ``{x, y}`` of ``Q``."""
    n = chain.n
    Q = chain.Q
    pairs = [(x, y) for x in range(n) for y in range(x + 1, n) if Q[x, y] > 0 or Q[y, x] > 0]
    g = len(pairs)
    maps = np.tile(np.arange(n), (g, 1))
    rates = np.zeros((n, g))
    for d, (x, y) in enumerate(pairs):
        maps[d, x], maps[d, y] = y, x
        rates[x, d] = Q[x, y]
        rates[y, d] = Q[y, x]
    labels = tuple(f"t{{{x},{y}}}" for x, y in pairs)
    return MappingRepresentation(maps, np.arange(g), rates, move_labels=labels)


def _witnesses(mask, limit):
    return [tuple(int(v) for v in w) for w in np.argwhere(mask)[:limit]]


def commutativity_report(rep: MappingRepresentation, max_witnesses: int = 10) -> CommutativityReport:
    """Exhaustive commutation check over physical states and move pairs.

    Witnesses are ``(x, d, e)`` with ``d(e(x)) != e(d(x))``.
    """
    n = rep.n_states
    maps = rep.maps
    # after[d, e, x] = d(e(x))
    after = maps[:, maps[:, :n]]
    clash = after != after.transpose(1, 0, 2)
    clash_xde = clash.transpose(2, 0, 1)
    c = rep.rates
    support = (c[:, :, None] > 0) & (c[:, None, :] > 0)
    on_support = clash_xde & support
    return CommutativityReport(
        commutative=not bool(clash.any()),
        witnesses=_witnesses(clash_xde, max_witnesses),
        involutive=rep.involutive,
        support_commutative=not bool(on_support.any()),
        support_witnesses=_witnesses(on_support, max_witnesses),
    )


# -- JSON documents -----------------------------------------------------------

def _jsonable(label):
    if isinstance(label, tuple):
        return [_jsonable(v) for v in label]
    if isinstance(label, np.integer):
        return int(label)
    return label


def chain_to_dict(chain: MarkovChain, rep: MappingRepresentation | None = None) -> dict:
    """Serialize a chain (and optionally a representation) to plain JSON types.

    Layout::

        {"states": [...], "pi": [...],
         "Q": [[...]]                                  # when rep is None
         "ghosts": [...],                              # optional
         "moves": [{"perm": [...], "inverse": k, "label": ...}],
         "rates": [[...]]}                             # n_states x |G|
    """
    doc = {
        "states": [_jsonable(s) for s in chain.space.states],
        "pi": chain.pi.tolist(),
    }
    if rep is None:
        doc["Q"] = chain.Q.tolist()
        return doc
    if rep.ghost_labels:
        doc["ghosts"] = [_jsonable(s) for s in rep.ghost_labels]
    doc["moves"] = [
        {"perm": rep.maps[d].tolist(), "inverse": int(rep.inverse[d]),
         "label": _jsonable(rep.move_labels[d])}
        for d in range(rep.n_moves)
    ]
    doc["rates"] = rep.rates.tolist()
    return doc


def load_chain_document(doc: dict | str, cap: int | None = None):
    """Parse a chain document into ``(chain, rep_or_None)``.

    ``doc`` is a dict or a JSON string.  With ``moves``/``rates`` the chain is
    assembled through :func:`chain_from_mapping`; otherwise ``Q`` is required.
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    space = StateSpace(tuple(doc["states"]), cap=cap)
    pi = np.asarray(doc["pi"], dtype=float)
    if "moves" in doc:
        moves = doc["moves"]
        maps = np.array([m["perm"] for m in moves], dtype=np.int64)
        inverse = np.array([m["inverse"] for m in moves], dtype=np.int64)
        labels = tuple(_hashable(m.get("label", d)) for d, m in enumerate(moves))
        rates = np.asarray(doc["rates"], dtype=float)
        rep = MappingRepresentation(
            maps, inverse, rates, move_labels=labels,
            ghost_labels=tuple(doc.get("ghosts", ())),
        )
        return chain_from_mapping(space, rep, pi), rep
    return MarkovChain(space, np.asarray(doc["Q"], dtype=float), pi), None
