"""Acceptance criteria, one test (and one summary line) per criterion.

Run ``pytest tests/test_acceptance.py -v``; the summary lines are printed in
the "acceptance criteria" section at the end of the session.
"""

import math
import time

import networkx as nx
import numpy as np

from curvlab.calculus import (
    action_A,
    b_terms,
    ced_expression,
    dirichlet,
    hessian_B,
    log_mean,
    log_mean_partials,
)
from curvlab.criteria import cayley_epsilon, lambda_criterion, split_lambda_criterion
from curvlab.models import (
    CurieWeissLimit,
    IsingSpec,
    Lattice2d,
    build_cayley,
    build_graph_hardcore,
    build_hardcore,
    build_hypercube,
    build_ising,
    build_rods,
    build_symmetric_group_walk,
    eps0_at,
    hardcore_split,
    interior_rod,
    ising_certificate,
    ising_epsilon,
    ising_q_ratios,
    ising_threshold,
)
from curvlab.verifier import bochner_scan, ced_check, spectral_gap

from helpers import positive_density, s3_transpositions

SLACK = 1e-8


def test_criterion_1_thresholds(acceptance):
    start = time.perf_counter()
    lattice = ising_threshold(Lattice2d(2))
    cw = ising_threshold(CurieWeissLimit())
    elapsed = time.perf_counter() - start
    ok = abs(lattice - 0.089) <= 1e-3 and abs(cw - 0.284) <= 1e-3 and elapsed < 1.0
    acceptance(1, ok, f"lattice root {lattice:.6f}, Curie-Weiss root {cw:.6f}, {elapsed * 1e3:.1f} ms")
    assert abs(3 * math.exp(6 * lattice) * math.expm1(2 * lattice) - 1) < 1e-6
    assert abs(2 * cw * math.exp(2 * cw) - 1) < 1e-6
    assert ok


def test_criterion_2_homogeneous_recovery(acceptance):
    start = time.perf_counter()
    worst_gap, exact = math.inf, True
    for n in (1, 2, 3, 4):
        for c in (0.5, 1.0, 1.7):
            chain, rep = build_hypercube(n, rate=c)
            cert = lambda_criterion(rep, chain.pi)
            exact &= cert.valid and cert.bound == 2 * c
            # the scan is the slow part; one rate per size is enough
            if c == 1.0 or n <= 2:
                report = bochner_scan(rep, chain.pi, samples=2000, seed=n)
                worst_gap = min(worst_gap, report.min_ratio - 2 * c)
    elapsed = time.perf_counter() - start
    ok = exact and worst_gap >= -1e-6 and elapsed < 30
    acceptance(2, ok, f"lambda bound == 2c exactly: {exact}; min(B/A - 2c) = {worst_gap:.3e}; {elapsed:.1f} s")
    assert ok


def _theorem_epsilon(k, beta):
    n = len(k)
    best = 0.0
    for i in range(n):
        row = []
        for j in range(n):
            if j == i:
                continue
            rest = sum(abs(k[i, m]) + abs(k[j, m]) for m in range(n) if m not in (i, j))
            row.append(math.exp(2 * beta * rest) * (math.exp(4 * beta * abs(k[i, j])) - 1))
        best = max(best, math.fsum(row))
    return best


def test_criterion_3_ising_consistency(acceptance):
    rng = np.random.default_rng(2024)
    worst_16a, worst_eps, worst_check = -math.inf, 0.0, math.inf
    cases = 0
    for _ in range(3):
        k = np.triu(rng.uniform(-0.5, 0.5, (3, 3)), 1)
        k = k + k.T
        for beta in (0.02, 0.05):
            spec = IsingSpec(k, beta)
            chain, rep = build_ising(spec)
            ratios = ising_q_ratios(spec, rep, chain.pi)
            for i in range(3):
                for j in range(3):
                    if i == j:
                        continue
                    rest = sum(abs(k[i, m]) + abs(k[j, m]) for m in range(3) if m not in (i, j))
                    bound = math.exp(2 * beta * rest) * math.expm1(4 * beta * abs(k[i, j]))
                    worst_16a = max(worst_16a, float(np.max(ratios[:, i, j] - bound)))
            worst_eps = max(worst_eps, abs(ising_epsilon(spec) - _theorem_epsilon(k, beta)))
            cert = ising_certificate(spec, rep)
            assert cert.valid
            kappa = cert.bound
            scan = bochner_scan(rep, chain.pi, samples=2000, seed=cases)
            gap = spectral_gap(chain)
            ced = ced_check(chain, samples=2000, seed=cases, kappa=kappa)
            worst_check = min(worst_check, scan.min_ratio - kappa, gap - kappa, ced)
            cases += 1
    ok = worst_16a <= 1e-12 and worst_eps <= 1e-12 and worst_check >= -SLACK
    acceptance(3, ok, f"{cases} cases; max(ratio - pair bound) = {worst_16a:.3e}; "
                      f"|eps - closed form| <= {worst_eps:.1e}; min check slack = {worst_check:.3e}")
    assert ok


def test_criterion_4_hardcore_closed_forms(acceptance):
    rho = 0.1
    graphs = {"K1,3": nx.star_graph(3), "C5": nx.cycle_graph(5), "P4": nx.path_graph(4)}
    exact_eps, worst_lambda, worst_bound = True, 0.0, 0.0
    for name, graph in graphs.items():
        delta = max(d for _, d in graph.degree)
        spec = build_graph_hardcore(graph, rho)
        chain, rep, eps0, eps1 = build_hardcore(spec)
        exact_eps &= (eps0, eps1) == (rho * delta, rho)
        cert = split_lambda_criterion(rep, chain.pi, *hardcore_split(spec.n_sites))
        worst_lambda = max(worst_lambda, abs(cert.intermediates["lambda_1"] - eps1),
                           abs(cert.intermediates["lambda_2"] - (1 - eps0)))
        worst_bound = max(worst_bound, abs(cert.bound - 0.5 * (1 - eps0 + eps1)))
    # rods k = 2: every rod conflicting with the interior one fits in the box once L >= 3k
    k, L, r = 2, 6, 0.01
    rods = build_rods(L, k, r)
    i = interior_rod(rods, L, k)
    t = rods.n_sites
    singleton = tuple(int(j == i) for j in range(t))
    rod_value = eps0_at(rods, singleton, i)
    # brute force over configurations holding rod i plus one more rod
    for j in range(t):
        if j != i:
            x = tuple(int(m in (i, j)) for m in range(t))
            if rods.contains(x):
                rod_value = max(rod_value, eps0_at(rods, x, i))
    rods_ok = abs(rod_value - r * (k * k + 4 * k + 1)) <= 1e-15
    small = build_rods(3, k, r)
    chain, rep, eps0, eps1 = build_hardcore(small)
    cert = split_lambda_criterion(rep, chain.pi, *hardcore_split(small.n_sites))
    worst_lambda = max(worst_lambda, abs(cert.intermediates["lambda_1"] - eps1),
                       abs(cert.intermediates["lambda_2"] - (1 - eps0)))
    ok = exact_eps and rods_ok and worst_lambda <= 1e-12 and worst_bound <= 1e-12
    acceptance(4, ok, f"(eps0, eps1) == (rho Delta, rho): {exact_eps}; interior rod eps0 = {rod_value:.17g} "
                      f"(13 rho = {13 * r:.17g}); max |lambda_i - closed form| = {worst_lambda:.1e}")
    assert ok


def test_criterion_5_cayley(acceptance):
    spec = build_symmetric_group_walk(4, 2)
    chain, rep = build_cayley(spec)
    cert = cayley_epsilon(rep, chain.pi, spec.group)
    gap = spectral_gap(chain)
    expected = 2 / len(spec.generators)
    ok = cert.valid and abs(cert.bound - expected) <= 1e-15 and gap >= cert.bound - 1e-9
    acceptance(5, ok, f"{cert.criterion.value} bound {cert.bound:.17g} vs 2/|G| = {expected:.17g}; gap {gap:.6f}")
    assert ok


def _lemma_models():
    k = np.array([[0, 0.4, -0.2], [0.4, 0, 0.3], [-0.2, 0.3, 0]])
    return {
        "hypercube": build_hypercube(3, rate=0.7),
        "ising": build_ising(IsingSpec(k, 0.3)),
        "hardcore": build_hardcore(build_graph_hardcore(nx.star_graph(3), 0.3))[:2],
        "s3": s3_transpositions(),
    }


def test_criterion_6_lemma_properties(acceptance):
    rng = np.random.default_rng(6)
    results = {}

    s, t, u, v = np.exp(rng.uniform(-6, 6, size=(4, 10_000)))
    d1, d2 = log_mean_partials(s, t)
    euler = np.max(np.abs(s * d1 + t * d2 - log_mean(s, t)) / log_mean(s, t))
    results["Euler identity"] = euler <= 1e-10
    results["domination"] = bool(np.all(u * d1 + v * d2 >= log_mean(u, v) * (1 - 1e-10)))

    a, b = rng.standard_normal((2, 10_000))
    s, t, r = np.exp(rng.uniform(-8, 8, size=(3, 10_000)))
    p1 = log_mean_partials
    m11 = p1(s, t)[0] * (r - s) + p1(t, s)[0] * (s - t) + 2 * log_mean(t, s)
    m22 = p1(s, r)[0] * (t - s) + p1(r, s)[0] * (s - r) + 2 * log_mean(r, s)
    m12 = log_mean(s, t) + log_mean(s, r)
    tol = 1 - 1e-10
    results["2x2 dominance"] = bool(np.all(m11 >= np.abs(m12) * tol) and np.all(m22 >= np.abs(m12) * tol))

    diag_ok = half_ok = point_ok = action_ok = ced_ok = True
    worst_ced = 0.0
    for name, (chain, rep) in _lemma_models().items():
        n, g = chain.n, rep.n_moves
        c, pi = rep.rates, chain.pi
        y, inv = rep.targets, rep.inverse
        half = [d for d in range(g) if d <= inv[d]]
        phys = y < n
        for trial in range(1000):
            rho = positive_density(rng, pi, 2.0)
            psi = rng.standard_normal(n)
            terms = b_terms(rep, rho, psi)
            diag = terms[:, np.arange(g), np.arange(g)]
            weighted = diag * c * pi[:, None]
            A = action_A(rep, pi, rho, psi)
            diag_ok &= bool(np.all(diag >= -1e-12 * (1 + np.abs(diag).max())))
            diag_ok &= weighted.sum() >= 2 * A * (1 - 1e-10)
            half_ok &= weighted[:, half].sum() >= 0.5 * A * (1 - 1e-10)
            # pointwise lemma on triples whose neighbours are physical
            ys = np.where(phys, y, 0)
            back = diag[ys, inv[None, :]]
            lhs = terms + terms.transpose(0, 2, 1)
            rhs = -back[:, :, None] - back[:, None, :]
            mask = phys[:, :, None] & phys[:, None, :]
            point_ok &= bool(np.all((lhs >= rhs - 1e-10 * (1 + np.abs(rhs)))[mask]))
            if trial < 100:
                log_rho = np.log(rho)
                A_log = action_A(rep, pi, rho, log_rho)
                action_ok &= abs(A_log - dirichlet(chain, rho, log_rho)) <= 1e-9 * abs(A_log)
                B_log = hessian_B(rep, pi, rho, log_rho)
                ced = ced_expression(chain, rho)
                rel = abs(B_log - ced) / max(abs(ced), 1e-300)
                worst_ced = max(worst_ced, rel)
                ced_ok &= rel <= 1e-9
    results["diagonal >= 2A"] = diag_ok
    results["half diagonal >= A/2"] = half_ok
    results["pointwise lemma"] = point_ok
    results["A(rho, log rho) = E(rho, log rho)"] = action_ok
    results["B(rho, log rho) = ced expression"] = ced_ok

    failed = [k for k, ok in results.items() if not ok]
    detail = "all sub-checks hold" if not failed else (
        f"failed: {', '.join(failed)} (max relative gap {worst_ced:.3f}); "
        f"{len(results) - len(failed)}/{len(results)} sub-checks hold"
    )
    acceptance(6, not failed, detail)
    assert not failed, detail


def test_criterion_7_scope(acceptance):
    import curvlab

    # nothing computes the transport distance or geodesics; those claims are
    # covered indirectly by the curvature inequalities of criteria 2, 3 and 6
    names = {n.lower() for n in dir(curvlab)}
    ok = not any("geodesic" in n or "wasserstein" in n for n in names)
    acceptance(7, ok, "sharpness, infinite-volume limits and W/geodesics excluded; "
                      "compensated by criteria 2, 3, 6")
    assert ok
