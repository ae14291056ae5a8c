"""Perturbative lower bounds on entropic Ricci curvature.

Every criterion returns a :class:`CurvatureCertificate` carrying the
intermediate quantities it used.  ``valid`` is only true when the
criterion's hypotheses were met; ``bound`` is ``None`` otherwise.

Notation: ``q(x, d, e) = c(x, d) c(x, e) pi(x)`` and, for ``e`` not in
``{d, d^-1}``, ``q_*(x, d, e)`` is the minimum of ``q`` over the four corners
``(x, d, e)``, ``(dx, d^-1, e)``, ``(ex, d, e^-1)``, ``(dex, d^-1, e^-1)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .calculus import _fsum, b_terms
from .chain import MappingRepresentation, close_enough, commutativity_report
from .errors import (
    BadSplit,
    HypothesisFailed,
    InadmissibleR,
    NotCommutative,
    NotInvolutive,
    UndefinedQStar,
)
from .groups import PermutationGroup, compose, conjugation_table

__all__ = [
    "Criterion",
    "CurvatureCertificate",
    "QTable",
    "q_table",
    "min_rate",
    "lambda_terms",
    "lambda_criterion",
    "split_lambda_criterion",
    "epsilon_corollary",
    "cayley_epsilon",
    "check_admissible",
    "gamma_lower_bound",
    "theorem38_R",
    "best_certificate",
]


class Criterion(str, enum.Enum):
    LAMBDA = "Lambda"
    SPLIT_LAMBDA = "SplitLambda"
    EPSILON_COROLLARY = "EpsilonCorollary"
    CAYLEY_EPSILON = "CayleyEpsilon"
    CAYLEY_INVOLUTIVE = "CayleyInvolutive"
    CLOSED_FORM = "ClosedForm"


@dataclass
class CurvatureCertificate:
    criterion: Criterion
    valid: bool
    bound: float | None
    intermediates: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.criterion = Criterion(self.criterion)
        if not self.valid:
            self.bound = None

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion.value,
            "valid": self.valid,
            "bound": self.bound,
            "intermediates": dict(self.intermediates),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CurvatureCertificate":
        return cls(
            Criterion(doc["criterion"]), bool(doc["valid"]), doc.get("bound"),
            dict(doc.get("intermediates", {})), list(doc.get("notes", [])),
        )


def best_certificate(certs: Iterable[CurvatureCertificate]) -> CurvatureCertificate | None:
    """Valid certificate with the largest bound (first one wins ties)."""
    best = None
    for cert in certs:
        if cert.valid and (best is None or cert.bound > best.bound):
            best = cert
    return best


def min_rate(rep: MappingRepresentation) -> float:
    """``c_*``: the smallest strictly positive rate."""
    c = rep.rates
    return float(c[c > 0].min())


def _pi_ext(rep, pi):
    pi = np.asarray(pi, dtype=float)
    return np.concatenate([pi, np.zeros(rep.n_total - rep.n_states)])


@dataclass(frozen=True)
class QTable:
    """``q`` on physical states and ``q_*`` (NaN where undefined)."""

    q: np.ndarray
    qstar_array: np.ndarray
    inverse: np.ndarray

    def qstar(self, x: int, delta: int, eta: int) -> float:
        if eta == delta or eta == self.inverse[delta]:
            raise UndefinedQStar(f"q_* undefined for eta in {{delta, delta^-1}} ({delta}, {eta})")
        return float(self.qstar_array[x, delta, eta])

    def deficit(self) -> np.ndarray:
        """``q - q_*`` with zeros where ``q_*`` is undefined."""
        return np.nan_to_num(self.q - self.qstar_array, nan=0.0)


def q_table(rep: MappingRepresentation, pi) -> QTable:
    n, g = rep.n_states, rep.n_moves
    c_ext = rep.rates_extended()
    pe = _pi_ext(rep, pi)
    q_ext = c_ext[:, :, None] * c_ext[:, None, :] * pe[:, None, None]
    maps, inv = rep.maps, rep.inverse
    X = np.arange(n)[:, None, None]
    D = np.arange(g)[None, :, None]
    E = np.arange(g)[None, None, :]
    dx = maps[D, X]
    ex = maps[E, X]
    dex = maps[D, ex]
    corners = np.stack([
        q_ext[X, D, E],
        q_ext[dx, inv[D], E],
        q_ext[ex, D, inv[E]],
        q_ext[dex, inv[D], inv[E]],
    ])
    qstar = corners.min(axis=0)
    undefined = (D == E) | (inv[D] == E)
    qstar = np.where(np.broadcast_to(undefined, qstar.shape), np.nan, qstar)
    return QTable(q_ext[:n], qstar, inv.copy())


def lambda_terms(rep: MappingRepresentation, pi, qt: QTable | None = None) -> np.ndarray:
    """Bracket of the lambda-criterion for every ``(x, d)``; NaN where ``c(x,d) = 0``::

        c(x,d) - 1[d != d^-1] c(dx,d) - sum_{e != d, d^-1} (q - q_*)(dx, d^-1, e) / (c(x,d) pi(x))
    """
    if qt is None:
        qt = q_table(rep, pi)
    pi = np.asarray(pi, dtype=float)
    c = rep.rates
    c_ext = rep.rates_extended()
    inv = rep.inverse
    g = rep.n_moves
    y = rep.targets
    active = c > 0
    # c > 0 forces dx to be physical, so clip ghost targets away for indexing
    y_safe = np.where(active, y, 0)
    deficit = qt.deficit()
    corr = deficit[y_safe, inv[None, :]].sum(axis=2)
    non_inv = inv != np.arange(g)
    back = np.where(non_inv[None, :], c_ext[y, np.arange(g)[None, :]], 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = c - back - corr / (c * pi[:, None])
    return np.where(active, terms, np.nan)


def _argmin(terms, moves=None):
    masked = np.where(np.isnan(terms), np.inf, terms)
    if moves is not None:
        keep = np.zeros(terms.shape[1], dtype=bool)
        keep[list(moves)] = True
        masked = np.where(keep[None, :], masked, np.inf)
    x, d = np.unravel_index(int(np.argmin(masked)), masked.shape)
    return float(masked[x, d]), int(x), int(d)


def _commutativity_gate(rep, strict):
    report = commutativity_report(rep)
    if not report.support_commutative and strict:
        raise NotCommutative(f"moves do not commute, e.g. (x, d, e) = {report.support_witnesses[0]}")
    return report


def lambda_criterion(rep: MappingRepresentation, pi, strict: bool = False) -> CurvatureCertificate:
    """``Ric >= 2 lambda`` for commutative representations with ``lambda >= 0``."""
    report = _commutativity_gate(rep, strict)
    terms = lambda_terms(rep, pi)
    lam, x, d = _argmin(terms)
    inter = {"lambda": lam, "c_star": min_rate(rep), "argmin_x": x, "argmin_move": d}
    notes = []
    if not report.support_commutative:
        notes.append(f"moves do not commute on the rate support, e.g. {report.support_witnesses[0]}")
    if lam < 0:
        notes.append("lambda < 0: hypothesis lambda >= 0 fails")
    valid = report.support_commutative and lam >= 0
    return CurvatureCertificate(Criterion.LAMBDA, valid, 2.0 * lam if valid else None, inter, notes)


def split_lambda_criterion(rep: MappingRepresentation, pi, H1, H2, strict: bool = False) -> CurvatureCertificate:
    """``Ric >= (lambda_1 + lambda_2) / 2`` for a disjoint pair of move halves.

    Each ``H_i`` must satisfy ``H_i u H_i^-1 = G``.  The summands dropped in the
    argument must be nonnegative, so the full lambda must be ``>= 0`` too.
    """
    H1, H2 = {int(d) for d in H1}, {int(d) for d in H2}
    g = rep.n_moves
    everything = set(range(g))
    if H1 & H2:
        raise BadSplit(f"H1 and H2 intersect in {sorted(H1 & H2)}")
    for name, H in (("H1", H1), ("H2", H2)):
        if not H <= everything:
            raise BadSplit(f"{name} contains unknown move ids")
        covered = H | {int(rep.inverse[d]) for d in H}
        if covered != everything:
            raise BadSplit(f"{name} together with its inverses misses moves {sorted(everything - covered)}")
    report = _commutativity_gate(rep, strict)
    terms = lambda_terms(rep, pi)
    lam, _, _ = _argmin(terms)
    lam1, x1, d1 = _argmin(terms, H1)
    lam2, x2, d2 = _argmin(terms, H2)
    inter = {
        "lambda": lam, "lambda_1": lam1, "lambda_2": lam2, "c_star": min_rate(rep),
        "argmin_1": [x1, d1], "argmin_2": [x2, d2],
    }
    notes = []
    if not report.support_commutative:
        notes.append(f"moves do not commute on the rate support, e.g. {report.support_witnesses[0]}")
    if lam < 0:
        notes.append("lambda < 0: some dropped summand is negative")
    valid = report.support_commutative and lam >= 0
    bound = 0.5 * (lam1 + lam2) if valid else None
    return CurvatureCertificate(Criterion.SPLIT_LAMBDA, valid, bound, inter, notes)


def _ratio_max(num, den):
    """max of num/den over den > 0 with the 0/0 = 0 convention."""
    mask = den > 0
    if not np.any(mask):
        return 0.0
    return float(np.max(num[mask] / den[mask]))


def epsilon_corollary(rep: MappingRepresentation, pi) -> CurvatureCertificate:
    """``Ric >= (1 - eps) 2 c_*`` with ``eps = beta N (e^{2 alpha} - 1) <= 1``.

    Requires every move to be an involution.
    """
    if not rep.involutive:
        raise NotInvolutive("epsilon corollary needs d = d^-1 for all moves")
    report = commutativity_report(rep)
    c = rep.rates
    c_ext = rep.rates_extended()
    y = rep.targets
    g = rep.n_moves
    # moved[x, d, e] = c(dx, e)
    moved = c_ext[y]
    differs = moved != c[:, None, :]
    pair_any = differs.any(axis=0)  # [d, e]: c(dx, e) != c(x, e) for some x
    pair_any = pair_any | pair_any.T
    np.fill_diagonal(pair_any, False)
    N = int(np.triu(pair_any, 1).sum())

    ratio = _ratio_max(moved, np.broadcast_to(c[:, None, :], moved.shape))
    alpha = math.log(ratio) if ratio > 0 else -math.inf
    beta = _ratio_max(np.broadcast_to(c[:, None, :], (c.shape[0], g, g)),
                      np.broadcast_to(c[:, :, None], (c.shape[0], g, g)))
    eps = 0.0 if N == 0 else beta * N * math.expm1(2 * alpha)
    c_star = min_rate(rep)
    inter = {"N": N, "alpha": alpha, "beta": beta, "epsilon": eps, "c_star": c_star}
    notes = []
    if not report.support_commutative:
        notes.append("moves do not commute on the rate support")
    if eps > 1:
        notes.append("epsilon > 1: hypothesis fails")
    valid = report.support_commutative and eps <= 1
    bound = (1 - eps) * 2 * c_star if valid else None
    return CurvatureCertificate(Criterion.EPSILON_COROLLARY, valid, bound, inter, notes)


def cayley_epsilon(rep: MappingRepresentation, pi, group: PermutationGroup) -> CurvatureCertificate:
    """Criterion for random walks on conjugacy-invariant Cayley graphs.

    The moves must be left translations ``x -> d x`` by the group elements
    stored in ``rep.move_labels``; the generator set must be closed under
    inverses and under conjugation by every group element.
    """
    gens = [tuple(int(v) for v in lbl) for lbl in rep.move_labels]
    if rep.n_states != group.order or rep.n_total != group.order:
        raise ValueError("representation does not live on the group")
    for d, gen in enumerate(gens):
        expect = [group.index[compose(gen, x)] for x in group.elements]
        if not np.array_equal(rep.maps[d], expect):
            raise ValueError(f"move {d} is not left translation by {gen}")
    conj = conjugation_table(group, gens)  # raises NotConjugacyInvariant

    c = rep.rates
    y = rep.targets
    g = rep.n_moves
    inv = rep.inverse
    ar = np.arange(g)
    involution = inv == ar

    c_star = min_rate(rep)
    beta = _ratio_max(np.broadcast_to(c[:, None, :], (c.shape[0], g, g)),
                      np.broadcast_to(c[:, :, None], (c.shape[0], g, g)))

    # alpha_1 over non-involutive d: c(dx, d) / c(x, d)
    own = c[y, ar[None, :]]
    if np.any(~involution):
        r1 = _ratio_max(own[:, ~involution], c[:, ~involution])
        alpha1 = math.log(r1) if r1 > 0 else -math.inf
    else:
        alpha1 = None

    # alpha_2 over d not in {e, e^-1}: c(dx, e) / c(x, e) and c(dx, d e d^-1) / c(x, e)
    D = ar[:, None]
    E = ar[None, :]
    allowed = (D != E) & (D != inv[E])
    moved = c[y]  # [x, d, e] = c(dx, e)
    moved_conj = c[y[:, :, None], conj[None, :, :]]  # c(dx, d e d^-1)
    base = np.broadcast_to(c[:, None, :], moved.shape)
    mask = np.broadcast_to(allowed[None], moved.shape) & (base > 0)
    if np.any(mask):
        r2 = max(float(np.max(moved[mask] / base[mask])), float(np.max(moved_conj[mask] / base[mask])))
        alpha2 = math.log(r2) if r2 > 0 else -math.inf
        spread = math.expm1(2 * alpha2)
    else:
        alpha2, spread = None, 0.0

    inter = {"alpha_2": alpha2, "beta": beta, "c_star": c_star, "G": g}
    notes = []
    if involution.all():
        eps = beta * (g - 1) * spread if g > 1 else 0.0
        inter.update({"epsilon_prime": eps})
        if eps > 1:
            notes.append("epsilon' > 1: hypothesis fails")
        valid = eps <= 1
        bound = (1 - eps) * 2 * c_star if valid else None
        return CurvatureCertificate(Criterion.CAYLEY_INVOLUTIVE, valid, bound, inter, notes)

    # theorem uses |G| - 2 terms per move; a mixed set has involutive moves
    # with |G| - 1 off-diagonal partners, so take the larger count
    n_off = g - 1 if involution.any() else g - 2
    eps = math.exp(alpha1) + beta * n_off * spread
    inter.update({"alpha_1": alpha1, "epsilon": eps, "off_diagonal_count": n_off})
    if involution.any():
        notes.append("mixed involutive/non-involutive generators: |G|-1 off-diagonal count used")
    if eps > 1:
        notes.append("epsilon > 1: hypothesis fails")
    valid = eps <= 1
    bound = (1 - eps) * 2 * c_star if valid else None
    return CurvatureCertificate(Criterion.CAYLEY_EPSILON, valid, bound, inter, notes)


def check_admissible(rep: MappingRepresentation, R, rtol: float = 1e-12) -> None:
    """Raise :class:`InadmissibleR` unless ``R`` satisfies clauses (i)-(iii).

    (i)   R(x,d,e) > 0 only where d e x = e d x
    (ii)  R(x,d,e) = R(x,e,d)       where c(x,d) c(x,e) > 0
    (iii) R(x,d,e) = R(dx,d^-1,e)   where c(x,d) c(x,e) > 0
    """
    n, g = rep.n_states, rep.n_moves
    R = np.asarray(R, dtype=float)
    if R.shape != (n, g, g):
        raise InadmissibleR(f"R has shape {R.shape}, expected {(n, g, g)}", "shape")
    if np.any(R < 0) or not np.all(np.isfinite(R)):
        raise InadmissibleR("R must be finite and nonnegative", "range")
    maps = rep.maps
    after = maps[:, maps[:, :n]]  # [d, e, x] = d(e(x))
    commute = (after == after.transpose(1, 0, 2)).transpose(2, 0, 1)  # [x, d, e]
    bad = (R > 0) & ~commute
    if np.any(bad):
        w = tuple(int(v) for v in np.argwhere(bad)[0])
        raise InadmissibleR(f"R > 0 on a non-commuting triple {w}", "i", w)
    c = rep.rates
    support = (c[:, :, None] > 0) & (c[:, None, :] > 0)
    bad = support & ~close_enough(R, R.transpose(0, 2, 1), rtol=rtol, atol=0.0)
    if np.any(bad):
        w = tuple(int(v) for v in np.argwhere(bad)[0])
        raise InadmissibleR(f"R not symmetric in (d, e) at {w}", "ii", w)
    y = np.where(c > 0, rep.targets, 0)
    shifted = R[y[:, :, None], rep.inverse[None, :, None], np.arange(g)[None, None, :]]
    bad = support & ~close_enough(R, shifted, rtol=rtol, atol=0.0)
    if np.any(bad):
        w = tuple(int(v) for v in np.argwhere(bad)[0])
        raise InadmissibleR(f"R(x,d,e) != R(dx,d^-1,e) at {w}", "iii", w)


def gamma_lower_bound(rep: MappingRepresentation, pi, R, rho, psi) -> float:
    """``sum (q - R)(x,d,e) B(x,d,e)``, a lower bound for ``B(rho, psi)``."""
    check_admissible(rep, R)
    pi = np.asarray(pi, dtype=float)
    c = rep.rates
    q = c[:, :, None] * c[:, None, :] * pi[:, None, None]
    return _fsum((q - np.asarray(R, dtype=float)) * b_terms(rep, rho, psi))


def theorem38_R(rep: MappingRepresentation, pi) -> np.ndarray:
    """The admissible function behind the lambda-criterion.

    ``q_*`` off the diagonal; for non-involutive ``d``: ``q(x,d,d^-1)`` on the
    inverse pair and ``c(dx,d) c(dx,d^-1) pi(dx)`` on the diagonal; zero on
    the diagonal of involutions.
    """
    report = commutativity_report(rep)
    if not report.support_commutative:
        raise NotCommutative(f"moves do not commute, e.g. {report.support_witnesses[0]}")
    g = rep.n_moves
    qt = q_table(rep, pi)
    c = rep.rates
    c_ext = rep.rates_extended()
    pe = _pi_ext(rep, pi)
    inv = rep.inverse
    y = rep.targets
    ar = np.arange(g)
    non_inv = inv != ar
    own_back = c_ext[y, ar[None, :]]
    too_fast = (c > 0) & non_inv[None, :] & (own_back > c)
    if np.any(too_fast):
        x, d = (int(v) for v in np.argwhere(too_fast)[0])
        raise HypothesisFailed(f"c(dx,d) > c(x,d) at x={x}, d={d}")
    R = np.nan_to_num(qt.qstar_array, nan=0.0)
    for d in np.flatnonzero(non_inv):
        di = inv[d]
        R[:, d, di] = qt.q[:, d, di]
        yd = y[:, d]
        diag = c_ext[yd, d] * c_ext[yd, di] * pe[yd]
        R[:, d, d] = np.where(c[:, d] > 0, diag, 0.0)
    return R
