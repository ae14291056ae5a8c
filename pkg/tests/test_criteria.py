import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvlab.calculus import hessian_B
from curvlab.chain import MappingRepresentation, StateSpace, chain_from_mapping
from curvlab.criteria import (
    Criterion,
    CurvatureCertificate,
    best_certificate,
    cayley_epsilon,
    check_admissible,
    epsilon_corollary,
    gamma_lower_bound,
    lambda_criterion,
    lambda_terms,
    min_rate,
    q_table,
    split_lambda_criterion,
    theorem38_R,
)
from curvlab.errors import (
    BadSplit,
    HypothesisFailed,
    InadmissibleR,
    NotCommutative,
    NotConjugacyInvariant,
    NotInvolutive,
    UndefinedQStar,
)
from curvlab.groups import cayley_representation, generated_subgroup, symmetric_group
from curvlab.models import (
    IsingSpec,
    build_cayley,
    build_graph_hardcore,
    build_hardcore,
    build_hypercube,
    build_ising,
    build_symmetric_group_walk,
)

from helpers import directed_cycle, positive_density, s3_transpositions

K3 = np.array([[0, 0.4, -0.2], [0.4, 0, 0.3], [-0.2, 0.3, 0]])


def perturbed_hypercube(n=3, eps=0.5):
    """Flip 0 runs at rate ``1 + eps`` when bit 1 is set; every other rate is 1."""
    size = 2**n
    rates = np.ones((size, n))
    rates[:, 0] += eps * ((np.arange(size) >> 1) & 1)
    return build_hypercube(n, rate=rates)


class TestQTable:
    def test_homogeneous(self):
        chain, rep = build_hypercube(3, rate=0.6)
        qt = q_table(rep, chain.pi)
        off = ~np.isnan(qt.qstar_array)
        np.testing.assert_array_equal(qt.qstar_array[off], qt.q[off])

    def test_two_spin_brute_force(self):
        chain, rep = build_ising(IsingSpec(np.array([[0, 0.5], [0.5, 0]]), 0.1))
        qt = q_table(rep, chain.pi)
        c, pi, m = rep.rates, chain.pi, rep.maps

        def q(x, d, e):
            return c[x, d] * c[x, e] * pi[x]

        for x in range(4):
            d, e = 0, 1
            expected = min(q(x, d, e), q(m[d, x], d, e), q(m[e, x], d, e), q(m[d, m[e, x]], d, e))
            assert qt.qstar(x, d, e) == expected
            assert qt.qstar(x, d, e) <= qt.q[x, d, e]

    def test_undefined_diagonal(self):
        chain, rep = build_hypercube(2)
        qt = q_table(rep, chain.pi)
        with pytest.raises(UndefinedQStar):
            qt.qstar(0, 1, 1)
        chain, rep = directed_cycle(4)
        with pytest.raises(UndefinedQStar):
            q_table(rep, chain.pi).qstar(0, 0, 1)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), beta=st.floats(0, 1.5))
    def test_four_point_invariance(self, seed, beta):
        k = np.random.default_rng(seed).uniform(-0.5, 0.5, (3, 3))
        k = np.triu(k, 1) + np.triu(k, 1).T
        chain, rep = build_ising(IsingSpec(k, beta))
        qs = q_table(rep, chain.pi).qstar_array
        m = rep.maps
        for x in range(chain.n):
            for d in range(3):
                for e in range(3):
                    if d != e:
                        # Ising moves are involutions, so d^-1 = d
                        assert qs[x, d, e] == qs[m[d, x], d, e]
                        assert qs[x, d, e] == qs[m[e, x], d, e]


class TestLambda:
    def test_homogeneous_involutive(self):
        chain, rep = build_hypercube(3, rate=0.7)
        cert = lambda_criterion(rep, chain.pi)
        assert cert.valid and cert.intermediates["lambda"] == 0.7
        assert cert.bound == 1.4

    def test_homogeneous_non_involutive(self):
        chain, rep = directed_cycle(6, 1.3)
        cert = lambda_criterion(rep, chain.pi)
        assert cert.intermediates["lambda"] == 0.0
        assert cert.valid and cert.bound == 0.0

    def test_two_spin_sign_change(self):
        k = np.array([[0, 0.25], [0.25, 0]])
        lam = {}
        for beta in (0.1, 0.5, 1.0, 2.0):
            chain, rep = build_ising(IsingSpec(k, beta))
            cert = lambda_criterion(rep, chain.pi)
            lam[beta] = cert.intermediates["lambda"]
            assert cert.valid == (lam[beta] >= 0)
        assert lam[0.1] == pytest.approx(0.851187752625404, rel=1e-12)
        assert lam[0.5] == pytest.approx(0.27357614945506825, rel=1e-12)
        assert lam[1.0] == pytest.approx(-0.43565995127486135, rel=1e-12)
        chain, rep = build_ising(IsingSpec(k, 1.0))
        assert lambda_criterion(rep, chain.pi).bound is None

    def test_non_commutative(self):
        chain, rep = s3_transpositions()
        cert = lambda_criterion(rep, chain.pi)
        assert not cert.valid and cert.bound is None
        assert "commute" in cert.notes[0]
        with pytest.raises(NotCommutative):
            lambda_criterion(rep, chain.pi, strict=True)

    def test_terms_nan_off_support(self):
        chain, rep, _, _ = build_hardcore(build_graph_hardcore(nx.path_graph(2), 0.3))
        terms = lambda_terms(rep, chain.pi)
        assert np.array_equal(np.isnan(terms), rep.rates == 0)


class TestSplit:
    def test_bad_splits(self):
        chain, rep, _, _ = build_hardcore(build_graph_hardcore(nx.path_graph(3), 0.2))
        with pytest.raises(BadSplit):
            split_lambda_criterion(rep, chain.pi, [0, 1, 2], [0, 1, 2])
        with pytest.raises(BadSplit):
            split_lambda_criterion(rep, chain.pi, [0, 1], [3, 4, 5])
        with pytest.raises(BadSplit):
            split_lambda_criterion(rep, chain.pi, [0, 1, 2], [3, 4, 9])

    def test_involutive_partition(self):
        # with involutions each half must contain every move, so halves cannot be disjoint
        chain, rep = build_hypercube(2)
        with pytest.raises(BadSplit):
            split_lambda_criterion(rep, chain.pi, [0], [1])

    def test_cycle_partition(self):
        chain, rep = directed_cycle(5, 0.8)
        cert = split_lambda_criterion(rep, chain.pi, [0], [1])
        assert cert.intermediates["lambda_1"] == cert.intermediates["lambda_2"] == 0.0
        assert cert.valid and cert.bound == 0.0

    def test_hardcore_halves(self):
        chain, rep, eps0, eps1 = build_hardcore(build_graph_hardcore(nx.star_graph(3), 0.1))
        cert = split_lambda_criterion(rep, chain.pi, range(4), range(4, 8))
        assert cert.intermediates["lambda_1"] == pytest.approx(eps1, abs=1e-12)
        assert cert.intermediates["lambda_2"] == pytest.approx(1 - eps0, abs=1e-12)
        assert cert.bound == pytest.approx(0.5 * (1 - eps0 + eps1), abs=1e-12)


class TestEpsilonCorollary:
    def test_homogeneous(self):
        chain, rep = build_hypercube(3, rate=0.4)
        cert = epsilon_corollary(rep, chain.pi)
        assert cert.intermediates["N"] == 0 and cert.intermediates["epsilon"] == 0.0
        assert cert.bound == 0.8

    def test_counts_only_affected_pairs(self):
        chain, rep = perturbed_hypercube(3, 0.5)
        cert = epsilon_corollary(rep, chain.pi)
        assert cert.intermediates["N"] == 1
        assert cert.intermediates["alpha"] == pytest.approx(math.log(1.5), rel=1e-15)
        assert cert.intermediates["beta"] == 1.5
        assert cert.intermediates["epsilon"] == pytest.approx(1.5 * 1.25, rel=1e-14)
        assert not cert.valid

    def test_small_perturbation_is_valid(self):
        chain, rep = perturbed_hypercube(3, 0.05)
        cert = epsilon_corollary(rep, chain.pi)
        eps = 1.05 * math.expm1(2 * math.log(1.05))
        assert cert.intermediates["epsilon"] == pytest.approx(eps, rel=1e-13)
        assert cert.bound == pytest.approx((1 - eps) * 2.0, rel=1e-13)

    def test_not_involutive(self):
        chain, rep = directed_cycle(4)
        with pytest.raises(NotInvolutive):
            epsilon_corollary(rep, chain.pi)

    @pytest.mark.parametrize("beta", [0.0, 0.01, 0.02, 0.05, 0.1])
    def test_never_beats_lambda(self, beta):
        for model in (build_ising(IsingSpec(K3, beta)), perturbed_hypercube(3, beta)):
            chain, rep = model
            cor = epsilon_corollary(rep, chain.pi)
            thm = lambda_criterion(rep, chain.pi)
            if cor.valid:
                assert thm.valid
                assert cor.bound <= thm.bound + 1e-12


class TestCayley:
    def test_involutive_constant(self):
        chain, rep = build_cayley(build_symmetric_group_walk(4, 2))
        cert = cayley_epsilon(rep, chain.pi, symmetric_group(4))
        assert cert.criterion is Criterion.CAYLEY_INVOLUTIVE
        assert cert.intermediates["epsilon_prime"] == 0.0
        assert cert.bound == pytest.approx(2 / 6, rel=1e-15)

    def test_non_involutive_constant(self):
        five = (1, 2, 3, 4, 0)
        gens = [five, tuple(int(v) for v in np.argsort(five))]
        group = generated_subgroup(gens, 5)
        space, rep, pi = cayley_representation(group, gens, 0.5)
        cert = cayley_epsilon(rep, pi, group)
        assert cert.criterion is Criterion.CAYLEY_EPSILON
        assert cert.intermediates["alpha_1"] == 0.0
        assert cert.intermediates["epsilon"] == 1.0
        assert cert.valid and cert.bound == 0.0

    def test_three_cycles(self):
        spec = build_symmetric_group_walk(4, 3)
        chain, rep = build_cayley(spec)
        cert = cayley_epsilon(rep, chain.pi, spec.group)
        assert cert.intermediates["epsilon"] == 1.0 and cert.bound == 0.0

    def test_conjugacy_failure(self):
        group = symmetric_group(3)
        space, rep, pi = cayley_representation(group, [(1, 0, 2)])
        with pytest.raises(NotConjugacyInvariant) as info:
            cayley_epsilon(rep, pi, group)
        assert info.value.generator == (1, 0, 2)
        assert info.value.conjugator is not None


class TestGamma:
    def test_zero_R_is_B(self):
        chain, rep = build_ising(IsingSpec(K3, 0.2))
        rng = np.random.default_rng(0)
        rho, psi = positive_density(rng, chain.pi), rng.standard_normal(chain.n)
        R = np.zeros((chain.n, 3, 3))
        assert gamma_lower_bound(rep, chain.pi, R, rho, psi) == pytest.approx(hessian_B(rep, chain.pi, rho, psi), rel=1e-12)

    def test_theorem_R_lower_bound(self):
        for chain, rep in (build_hypercube(3, rate=0.5), build_ising(IsingSpec(K3, 0.05)), directed_cycle(5)):
            R = theorem38_R(rep, chain.pi)
            check_admissible(rep, R)
            rng = np.random.default_rng(1)
            for _ in range(50):
                rho, psi = positive_density(rng, chain.pi, 2.0), rng.standard_normal(chain.n)
                lower = gamma_lower_bound(rep, chain.pi, R, rho, psi)
                assert lower <= hessian_B(rep, chain.pi, rho, psi) + 1e-10

    def test_hypercube_R(self):
        chain, rep = build_hypercube(2, rate=0.5)
        R = theorem38_R(rep, chain.pi)
        q = 0.25 * 0.25
        assert R[0, 0, 1] == q and R[0, 1, 0] == q
        assert R[0, 0, 0] == 0.0

    def test_clauses(self):
        chain, rep = build_hypercube(2)
        R = np.zeros((4, 2, 2))
        R[0, 0, 1] = 1.0
        with pytest.raises(InadmissibleR) as info:
            check_admissible(rep, R)
        assert info.value.clause == "ii"
        R[0, 1, 0] = 1.0
        with pytest.raises(InadmissibleR) as info:
            check_admissible(rep, R)
        assert info.value.clause == "iii"
        with pytest.raises(InadmissibleR) as info:
            check_admissible(rep, -np.ones((4, 2, 2)))
        assert info.value.clause == "range"
        chain, rep = s3_transpositions()
        with pytest.raises(InadmissibleR) as info:
            check_admissible(rep, np.ones((6, 3, 3)))
        assert info.value.clause == "i"
        with pytest.raises(NotCommutative):
            theorem38_R(rep, chain.pi)

    def test_hypothesis_failure(self):
        # +1 runs faster out of state 0 than out of state 1
        m = 4
        maps = np.array([(np.arange(m) + 1) % m, (np.arange(m) - 1) % m])
        rates = np.ones((m, 2))
        pi = np.ones(m)
        rates[0, 0], rates[1, 1] = 2.0, 2.0
        rep = MappingRepresentation(maps, [1, 0], rates)
        chain = chain_from_mapping(StateSpace.range(m), rep, pi)
        with pytest.raises(HypothesisFailed):
            theorem38_R(rep, chain.pi)


def test_certificate_roundtrip_and_best():
    a = CurvatureCertificate(Criterion.LAMBDA, True, 0.4, {"lambda": 0.2}, [])
    b = CurvatureCertificate("EpsilonCorollary", False, 9.0, {"epsilon": 3.0}, ["bad"])
    assert b.bound is None
    assert CurvatureCertificate.from_dict(a.to_dict()) == a
    assert best_certificate([b, a]) is a
    assert best_certificate([b]) is None


def test_min_rate():
    _, rep, _, _ = build_hardcore(build_graph_hardcore(nx.path_graph(2), 0.3))
    assert min_rate(rep) == 0.3
