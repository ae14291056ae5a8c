"""Logarithmic-mean calculus and the quadratic forms A(rho, psi), B(rho, psi).

All forms are written in mapping form (moves ``d`` with rates ``c(x, d)``)::

    A(rho, psi) = 1/2 sum_{x,d} (grad_d psi(x))^2 theta(rho(x), rho(dx)) c(x,d) pi(x)
    B(rho, psi) = sum_{x,d,e} B(x,d,e) c(x,d) c(x,e) pi(x)

with the three-point term::

    B(x,d,e) = 1/2 (grad_d psi(x))^2 d1theta(rho(x), rho(dx)) grad_e rho(x)
               + grad_d psi(x) grad_e psi(x) theta(rho(x), rho(dx))

``B(rho, psi) >= kappa A(rho, psi)`` for all positive ``rho`` is equivalent
to an entropic Ricci bound ``kappa``.
"""

from __future__ import annotations

import math

import numpy as np

from .chain import MappingRepresentation, MarkovChain
from .errors import DomainError

__all__ = [
    "SERIES_SWITCH",
    "log_mean",
    "log_mean_partials",
    "entropy",
    "dirichlet",
    "generator_apply",
    "action_A",
    "b_term",
    "b_terms",
    "hessian_B",
    "hessian_B_two_line",
    "hessian_B_pairwise",
    "ced_expression",
    "normalize_density",
    "Forms",
]

# |u| = |s - t| / (s + t) below which the Taylor branch is used.
SERIES_SWITCH = 1e-2

# u / atanh(u) = 1 - u^2/3 - 4u^4/45 - 44u^6/945 + O(u^8)
_G = (1.0, -1.0 / 3.0, -4.0 / 45.0, -44.0 / 945.0)


def _g_series(u):
    v = u * u
    g = _G[0] + v * (_G[1] + v * (_G[2] + v * _G[3]))
    dg = u * (2 * _G[1] + v * (4 * _G[2] + v * 6 * _G[3]))
    return g, dg


def _as_pair(s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    s, t = np.broadcast_arrays(s, t)
    return s, t


def _scalar_or_array(out, scalar):
    return float(out) if scalar else out


def log_mean(s, t):
    """Logarithmic mean ``theta(s, t) = (s - t) / (log s - log t)``.

    Works elementwise on arrays.  ``theta(t, t) = t`` and ``theta(0, t) = 0``.

    Raises
    ------
    DomainError
        If any argument is negative.
    """
    scalar = np.ndim(s) == 0 and np.ndim(t) == 0
    s, t = _as_pair(s, t)
    if np.any(s < 0) or np.any(t < 0) or np.any(np.isnan(s)) or np.any(np.isnan(t)):
        raise DomainError("log_mean needs nonnegative arguments")
    total = s + t
    out = np.zeros(s.shape)
    pos = (s > 0) & (t > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(pos, (s - t) / np.where(pos, total, 1.0), 0.0)
    near = pos & (np.abs(u) <= SERIES_SWITCH)
    far = pos & ~near
    if np.any(near):
        g, _ = _g_series(u[near])
        out[near] = 0.5 * total[near] * g
    if np.any(far):
        sf, tf = s[far], t[far]
        out[far] = (sf - tf) / (np.log(sf) - np.log(tf))
    return _scalar_or_array(out, scalar)


def log_mean_partials(s, t):
    """Partial derivatives ``(d1 theta, d2 theta)`` at ``(s, t)``.

    Satisfies ``s*d1 + t*d2 = theta(s, t)`` and ``d1(s, t) = d2(t, s)``.
    Both arguments must be strictly positive.
    """
    scalar = np.ndim(s) == 0 and np.ndim(t) == 0
    s, t = _as_pair(s, t)
    if not (np.all(s > 0) and np.all(t > 0)):
        raise DomainError("log_mean_partials needs strictly positive arguments")
    u = (s - t) / (s + t)
    d1 = np.empty(s.shape)
    d2 = np.empty(s.shape)
    near = np.abs(u) <= SERIES_SWITCH
    far = ~near
    if np.any(near):
        un = u[near]
        g, dg = _g_series(un)
        d1[near] = 0.5 * (g + (1.0 - un) * dg)
        d2[near] = 0.5 * (g - (1.0 + un) * dg)
    if np.any(far):
        sf, tf = s[far], t[far]
        ell = np.log(sf) - np.log(tf)
        d1[far] = (ell - (sf - tf) / sf) / ell**2
        d2[far] = ((sf - tf) / tf - ell) / ell**2
    if scalar:
        return float(d1), float(d2)
    return d1, d2


def _theta_d1(s, t):
    """``(theta, d1 theta)`` for strictly positive arrays, without validation.

    Single-pass variant of :func:`log_mean` and :func:`log_mean_partials` for
    inner loops; both branches are evaluated and selected elementwise.
    """
    diff = s - t
    u = diff / (s + t)
    near = np.abs(u) <= SERIES_SWITCH
    ell = np.log(s) - np.log(t)
    ell = np.where(near, 1.0, ell)
    g, dg = _g_series(np.where(near, u, 0.0))
    theta = np.where(near, 0.5 * (s + t) * g, diff / ell)
    d1 = np.where(near, 0.5 * (g + (1.0 - u) * dg), (ell - diff / s) / (ell * ell))
    return theta, d1


def _fsum(values) -> float:
    return math.fsum(np.ravel(values).tolist())


def _positive(rho, name="rho"):
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise DomainError(f"{name} must be strictly positive")
    return rho


def normalize_density(rho, pi) -> np.ndarray:
    """Scale ``rho`` so that ``sum rho * pi == 1``."""
    rho = np.asarray(rho, dtype=float)
    return rho / _fsum(rho * np.asarray(pi))


def entropy(chain: MarkovChain, rho) -> float:
    """Relative entropy ``sum pi rho log rho`` of a density w.r.t. ``pi``."""
    rho = _positive(rho)
    return _fsum(chain.pi * rho * np.log(rho))


def dirichlet(chain: MarkovChain, psi, phi) -> float:
    """Dirichlet form ``1/2 sum (psi(y)-psi(x))(phi(y)-phi(x)) Q(x,y) pi(x)``."""
    psi = np.asarray(psi, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dpsi = psi[None, :] - psi[:, None]
    dphi = phi[None, :] - phi[:, None]
    return 0.5 * _fsum(dpsi * dphi * chain.Q * chain.pi[:, None])


def _generator_Q(chain: MarkovChain, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return chain.Q @ f - chain.Q.sum(axis=1) * f


def ced_expression(chain: MarkovChain, rho) -> float:
    """``sum_x [L rho L log rho + (L rho)^2 / rho] pi``, computed from ``Q``."""
    rho = _positive(rho)
    Lr = _generator_Q(chain, rho)
    Llog = _generator_Q(chain, np.log(rho))
    return _fsum((Lr * Llog + Lr**2 / rho) * chain.pi)


def _pad(rep: MappingRepresentation, values, fill: float) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (rep.n_states,):
        raise ValueError(f"expected {rep.n_states} values, got shape {values.shape}")
    extra = rep.n_total - rep.n_states
    if not extra:
        return values
    return np.concatenate([values, np.full(extra, fill)])


def generator_apply(rep: MappingRepresentation, psi) -> np.ndarray:
    """``L psi(x) = sum_d (psi(dx) - psi(x)) c(x, d)``."""
    psi_ext = _pad(rep, psi, 0.0)
    y = rep.targets
    grad = psi_ext[y] - psi_ext[: rep.n_states, None]
    return np.sum(grad * rep.rates, axis=1)


class Forms:
    """Precomputed index tables for repeated evaluation of A and B.

    ``compensated=False`` uses numpy pairwise sums; it is meant for search
    loops, final numbers should come from the compensated path.
    """

    def __init__(self, rep: MappingRepresentation, pi, compensated: bool = True):
        self.rep = rep
        self.pi = np.asarray(pi, dtype=float)
        if self.pi.shape != (rep.n_states,):
            raise ValueError("pi does not match the representation")
        self.y = rep.targets
        self.c = rep.rates
        self.cpi = rep.rates * self.pi[:, None]
        self.compensated = compensated

    def _sum(self, arr) -> float:
        return _fsum(arr) if self.compensated else float(np.sum(arr))

    def _grads(self, rho, psi):
        rep = self.rep
        n = rep.n_states
        rho_ext = _pad(rep, rho, 1.0)
        psi_ext = _pad(rep, psi, 0.0)
        gpsi = psi_ext[self.y] - psi[:, None]
        rho_y = rho_ext[self.y]
        rho_x = np.broadcast_to(np.asarray(rho, dtype=float)[:n, None], rho_y.shape)
        return gpsi, rho_x, rho_y, rho_ext, psi_ext

    def action(self, rho, psi) -> float:
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise DomainError("rho must be nonnegative")
        psi = np.asarray(psi, dtype=float)
        gpsi, rho_x, rho_y, _, _ = self._grads(rho, psi)
        theta = log_mean(rho_x, rho_y)
        return 0.5 * self._sum(gpsi**2 * theta * self.cpi)

    def hessian(self, rho, psi) -> float:
        rho = _positive(rho)
        psi = np.asarray(psi, dtype=float)
        gpsi, rho_x, rho_y, _, _ = self._grads(rho, psi)
        theta = log_mean(rho_x, rho_y)
        d1, _ = log_mean_partials(rho_x, rho_y)
        grho = rho_y - rho_x
        Lrho = np.sum(grho * self.c, axis=1)
        Lpsi = np.sum(gpsi * self.c, axis=1)
        # sum_e B(x,d,e) c(x,e) collapses the e-sum into L rho(x) and L psi(x)
        per_edge = (0.5 * gpsi**2 * d1 * Lrho[:, None] + gpsi * theta * Lpsi[:, None]) * self.cpi
        return self._sum(per_edge)

    def both(self, rho, psi):
        """``(A, B)`` in one pass; ``rho`` must be strictly positive (not re-checked)."""
        rho = np.asarray(rho, dtype=float)
        psi = np.asarray(psi, dtype=float)
        gpsi, rho_x, rho_y, _, _ = self._grads(rho, psi)
        theta, d1 = _theta_d1(rho_x, rho_y)
        grho = rho_y - rho_x
        Lrho = np.sum(grho * self.c, axis=1)
        Lpsi = np.sum(gpsi * self.c, axis=1)
        a_edge = gpsi**2 * theta * self.cpi
        b_edge = (0.5 * gpsi**2 * d1 * Lrho[:, None] + gpsi * theta * Lpsi[:, None]) * self.cpi
        return 0.5 * self._sum(a_edge), self._sum(b_edge)


    def both_batch(self, rho, psi):
        """Vectorized :meth:`both` over leading batch axes of shape ``(B, n)``.

        Plain numpy sums; for search loops only.
        """
        rho = np.asarray(rho, dtype=float)
        psi = np.asarray(psi, dtype=float)
        extra = self.rep.n_total - self.rep.n_states
        if extra:
            rho = np.concatenate([rho, np.ones(rho.shape[:-1] + (extra,))], axis=-1)
            psi = np.concatenate([psi, np.zeros(psi.shape[:-1] + (extra,))], axis=-1)
        n = self.rep.n_states
        rho_x = rho[..., :n, None]
        rho_y = rho[..., self.y]
        gpsi = psi[..., self.y] - psi[..., :n, None]
        rho_x = np.broadcast_to(rho_x, rho_y.shape)
        theta, d1 = _theta_d1(rho_x, rho_y)
        Lrho = np.sum((rho_y - rho_x) * self.c, axis=-1)
        Lpsi = np.sum(gpsi * self.c, axis=-1)
        a = 0.5 * np.sum(gpsi**2 * theta * self.cpi, axis=(-2, -1))
        b = np.sum((0.5 * gpsi**2 * d1 * Lrho[..., None] + gpsi * theta * Lpsi[..., None]) * self.cpi, axis=(-2, -1))
        return a, b


def action_A(rep: MappingRepresentation, pi, rho, psi) -> float:
    """Action ``A(rho, psi)``; zero iff ``psi`` is constant along active edges."""
    return Forms(rep, pi).action(rho, psi)


def b_term(rep: MappingRepresentation, rho, psi, x: int, delta: int, eta: int) -> float:
    """The three-point term ``B(rho, psi)(x, delta, eta)``."""
    rho_ext = _pad(rep, _positive(rho), 1.0)
    psi_ext = _pad(rep, psi, 0.0)
    dx = rep.maps[delta, x]
    ex = rep.maps[eta, x]
    gd = psi_ext[dx] - psi_ext[x]
    ge = psi_ext[ex] - psi_ext[x]
    theta = log_mean(rho_ext[x], rho_ext[dx])
    d1, _ = log_mean_partials(rho_ext[x], rho_ext[dx])
    return 0.5 * gd * gd * d1 * (rho_ext[ex] - rho_ext[x]) + gd * ge * theta


def b_terms(rep: MappingRepresentation, rho, psi) -> np.ndarray:
    """All three-point terms as an ``(n_states, G, G)`` array."""
    rho = _positive(rho)
    rho_ext = _pad(rep, rho, 1.0)
    psi_ext = _pad(rep, psi, 0.0)
    n = rep.n_states
    y = rep.targets
    gpsi = psi_ext[y] - psi_ext[:n, None]
    grho = rho_ext[y] - rho[:, None]
    rho_x = np.broadcast_to(rho[:, None], y.shape)
    theta = log_mean(rho_x, rho_ext[y])
    d1, _ = log_mean_partials(rho_x, rho_ext[y])
    first = 0.5 * (gpsi**2 * d1)[:, :, None] * grho[:, None, :]
    second = (gpsi * theta)[:, :, None] * gpsi[:, None, :]
    return first + second


def hessian_B(rep: MappingRepresentation, pi, rho, psi, oracle: bool = False) -> float:
    """Hessian of the entropy ``B(rho, psi) = sum B(x,d,e) c(x,d) c(x,e) pi(x)``.

    With ``oracle=True`` the value is cross-checked against
    :func:`hessian_B_two_line` and an ``AssertionError`` is raised on a
    relative mismatch above 1e-9.
    """
    value = Forms(rep, pi).hessian(rho, psi)
    if oracle:
        other = hessian_B_two_line(rep, pi, rho, psi)
        scale = max(abs(value), abs(other), 1e-300)
        if abs(value - other) > 1e-9 * scale + 1e-15:
            raise AssertionError(f"B mismatch: {value!r} vs two-line {other!r}")
    return value


def hessian_B_two_line(rep: MappingRepresentation, pi, rho, psi) -> float:
    """Unsymmetrized form of B with explicit sums over both moves.

    Slow; used as an oracle for :func:`hessian_B`::

        1/4 sum (grad_d psi)^2 [r1(x,dx) grad_e rho(x) c(x,e)
                                + r2(x,dx) grad_e rho(dx) c(dx,e)] c(x,d) pi(x)
        - 1/2 sum grad_d psi(x) [grad_e psi(dx) c(dx,e)
                                 - grad_e psi(x) c(x,e)] theta(x,dx) c(x,d) pi(x)
    """
    rho = _positive(rho)
    pi = np.asarray(pi, dtype=float)
    rho_ext = _pad(rep, rho, 1.0)
    psi_ext = _pad(rep, psi, 0.0)
    c_ext = rep.rates_extended()
    n = rep.n_states
    maps = rep.maps
    y = rep.targets  # (n, G)
    # grad_e f(z) for every z in the enlarged set
    grad_rho_all = rho_ext[maps.T] - rho_ext[:, None]  # (M, G)
    grad_psi_all = psi_ext[maps.T] - psi_ext[:, None]
    gpsi = grad_psi_all[:n]
    rho_x = np.broadcast_to(rho[:, None], y.shape)
    theta = log_mean(rho_x, rho_ext[y])
    r1, r2 = log_mean_partials(rho_x, rho_ext[y])
    weight = rep.rates * pi[:, None]  # c(x,d) pi(x)

    at_x_rho = grad_rho_all[:n][:, None, :] * c_ext[:n][:, None, :]  # (n,1,G) over e
    at_dx_rho = grad_rho_all[y] * c_ext[y]  # (n,G,G)
    first = 0.25 * (gpsi**2 * weight)[:, :, None] * (
        r1[:, :, None] * at_x_rho + r2[:, :, None] * at_dx_rho
    )
    at_x_psi = grad_psi_all[:n][:, None, :] * c_ext[:n][:, None, :]
    at_dx_psi = grad_psi_all[y] * c_ext[y]
    second = -0.5 * (gpsi * theta * weight)[:, :, None] * (at_dx_psi - at_x_psi)
    return _fsum(first) + _fsum(second)


def hessian_B_pairwise(chain: MarkovChain, rho, psi) -> float:
    """B from the pair form on ``Q`` (independent of any mapping representation)::

        1/2 sum_{x,y} [1/2 Lhat rho(x,y) |grad psi|^2
                       - theta(x,y) grad psi(x,y) grad L psi(x,y)] Q(x,y) pi(x)
    """
    rho = _positive(rho)
    psi = np.asarray(psi, dtype=float)
    Lrho = _generator_Q(chain, rho)
    Lpsi = _generator_Q(chain, psi)
    rx = np.broadcast_to(rho[:, None], chain.Q.shape)
    ry = np.broadcast_to(rho[None, :], chain.Q.shape)
    theta = log_mean(rx, ry)
    d1, d2 = log_mean_partials(rx, ry)
    Lhat = d1 * Lrho[:, None] + d2 * Lrho[None, :]
    gpsi = psi[None, :] - psi[:, None]
    gLpsi = Lpsi[None, :] - Lpsi[:, None]
    terms = (0.5 * Lhat * gpsi**2 - theta * gpsi * gLpsi) * chain.Q * chain.pi[:, None]
    return 0.5 * _fsum(terms)
