import json
import math

import numpy as np
import pytest

from curvlab import verifier
from curvlab.calculus import dirichlet, entropy
from curvlab.criteria import lambda_criterion
from curvlab.errors import BudgetExceeded
from curvlab.models import IsingSpec, build_cayley, build_hypercube, build_ising, build_symmetric_group_walk
from curvlab.verifier import (
    VerificationReport,
    bochner_scan,
    ced_check,
    mlsi_scan,
    sample_density,
    spectral_gap,
    verify,
)

from helpers import random_reversible, two_point


class TestSampling:
    @pytest.mark.parametrize("kind", [0, 1, 2])
    def test_density_is_normalized_and_floored(self, kind):
        rng = np.random.default_rng(0)
        pi = np.array([0.1, 0.2, 0.3, 0.4])
        for _ in range(50):
            rho = sample_density(rng, pi, kind=kind)
            assert float(np.dot(rho, pi)) == pytest.approx(1.0, abs=1e-12)
            assert np.all(rho * pi >= 0.99e-6)


class TestSpectralGap:
    def test_two_point(self):
        assert spectral_gap(two_point()) == pytest.approx(2.0, abs=1e-12)
        assert spectral_gap(two_point(1.0, 3.0)) == pytest.approx(4.0, abs=1e-12)

    def test_hypercube_tensorizes(self):
        for n in (2, 3, 5):
            assert spectral_gap(build_hypercube(n)[0]) == pytest.approx(2.0, abs=1e-10)

    def test_sparse_path_matches_dense(self, monkeypatch):
        chain = random_reversible(np.random.default_rng(1), 30)
        dense = spectral_gap(chain)
        monkeypatch.setattr(verifier, "DENSE_LIMIT", 10)
        assert spectral_gap(chain) == pytest.approx(dense, rel=1e-8)

    def test_poincare_against_certificate(self):
        chain, rep = build_ising(IsingSpec(np.array([[0, 0.3, 0.1], [0.3, 0, -0.2], [0.1, -0.2, 0]]), 0.1))
        cert = lambda_criterion(rep, chain.pi)
        assert spectral_gap(chain) >= cert.bound - 1e-9


class TestBochnerScan:
    def test_hypercube(self):
        chain, rep = build_hypercube(3)
        report = bochner_scan(rep, chain.pi, samples=2000, seed=0)
        assert report.min_ratio >= 2 - 1e-6
        assert report.min_ratio == pytest.approx(2.0, abs=1e-3)
        assert len(report.argmin_rho) == 8

    def test_constant_potential_never_produces_nan(self):
        chain, rep = build_hypercube(2)
        forms = verifier.Forms(rep, chain.pi)
        value, a = verifier._ratio(forms, np.ones(4), np.full(4, 3.0))
        assert value == math.inf and a == 0.0

    def test_two_spin_ising(self):
        chain, rep = build_ising(IsingSpec(np.array([[0, 0.25], [0.25, 0]]), 0.05))
        cert = lambda_criterion(rep, chain.pi)
        report = bochner_scan(rep, chain.pi, samples=500, seed=3)
        assert report.min_ratio >= cert.bound - 1e-8

    def test_running_minimum(self):
        chain, rep = build_ising(IsingSpec(np.array([[0, 0.25], [0.25, 0]]), 0.5))
        values = [bochner_scan(rep, chain.pi, samples=s, seed=4, refine=0).min_ratio for s in (50, 100, 200, 400)]
        assert values == sorted(values, reverse=True)

    def test_budget(self, monkeypatch):
        chain, rep = build_hypercube(3)
        monkeypatch.setattr(verifier, "WORK_BUDGET", 10)
        with pytest.raises(BudgetExceeded):
            bochner_scan(rep, chain.pi, samples=10)


class TestFunctionalInequalities:
    def test_mlsi_two_point_direct(self):
        chain = two_point()
        rho = np.array([1.5, 0.5])
        ratio = dirichlet(chain, rho, np.log(rho)) / (2 * entropy(chain, rho))
        h = 0.5 * (1.5 * math.log(1.5) + 0.5 * math.log(0.5))
        assert ratio == pytest.approx(0.5 * math.log(3.0) / (2 * h), rel=1e-14)
        assert ratio >= 2.0  # certified 2 lambda with lambda = c = 1

    def test_mlsi_hypercube(self):
        chain, _ = build_hypercube(3, rate=0.5)
        assert mlsi_scan(chain, samples=300, seed=0) >= 1.0 - 1e-8

    def test_ced_hypercube(self):
        chain, _ = build_hypercube(3)
        assert ced_check(chain, samples=300, seed=0, kappa=2.0) >= -1e-8

    def test_ced_zero_kappa_is_nonnegativity(self):
        chain = random_reversible(np.random.default_rng(5), 6)
        assert ced_check(chain, samples=200, seed=1, kappa=0.0) >= 0.0


class TestVerify:
    def test_passes_with_certificate(self):
        spec = build_symmetric_group_walk(4, 2)
        chain, rep = build_cayley(spec)
        report = verify(chain, rep, 1 / 3, samples=200, seed=0)
        assert report.passed
        assert set(report.checks) == {"bochner", "spectral_gap", "ced", "mlsi"}
        assert report.spectral_gap == pytest.approx(2 / 3, abs=1e-12)

    def test_fails_with_inflated_kappa(self):
        chain, rep = build_hypercube(2)
        report = verify(chain, rep, 5.0, samples=100, seed=0)
        assert not report.passed
        assert not report.checks["spectral_gap"]["passed"]

    def test_measure_only(self):
        chain, rep = build_hypercube(2)
        report = verify(chain, rep, None, samples=50, seed=0, mlsi=False)
        assert report.checks == {} and report.mlsi_min_ratio is None

    def test_deterministic_and_roundtrip(self):
        chain, rep = build_ising(IsingSpec(np.array([[0, 0.25], [0.25, 0]]), 0.05))
        a = verify(chain, rep, 1.0, samples=100, seed=11).to_json()
        b = verify(chain, rep, 1.0, samples=100, seed=11).to_json()
        assert a == b
        again = VerificationReport.from_dict(json.loads(a))
        assert again.to_json() == a
        c = verify(chain, rep, 1.0, samples=100, seed=12).to_json()
        assert c != a
