"""High-temperature thresholds for Ising models.

Curvature is certified while eps(beta) < 1.  This script locates the root of
eps(beta) = 1 for the displayed lattice bound, the exact lattice bound on a
5x5 box, and the Curie-Weiss bound, then checks one exact certificate against
the exhaustive lambda criterion.

Run with ``python3 demos/thresholds.py``.
"""

import math

from curvlab.criteria import lambda_criterion
from curvlab.models import (
    CurieWeiss,
    CurieWeissLimit,
    Exact,
    Lattice2d,
    box_sites,
    build_curie_weiss,
    build_ising,
    build_lattice_ising,
    ising_certificate,
    ising_threshold,
)


def main():
    print("roots of eps(beta) = 1")
    print(f"  Z^2 displayed bound       {ising_threshold(Lattice2d(2)):.6f}")
    # the exact epsilon has 2d/(2d-1) times the displayed one at interior sites
    box = build_lattice_ising(box_sites((5, 5)), 0.0)
    print(f"  Z^2 exact, 5x5 box        {ising_threshold(Exact(box)):.6f}")
    for n in (10, 100):
        print(f"  {'Curie-Weiss n=' + str(n):<26s}{ising_threshold(CurieWeiss(n)):.6f}")
    print(f"  Curie-Weiss large n       {ising_threshold(CurieWeissLimit()):.6f}")

    beta = 0.1
    spec = build_curie_weiss(10, beta)
    cert = ising_certificate(spec)
    chain, rep = build_ising(spec)
    lam = lambda_criterion(rep, chain.pi)
    print(f"\nCurie-Weiss n=10, beta={beta}")
    print(f"  closed-form bound  {cert.bound:.10f}  (eps = {cert.intermediates['epsilon']:.6f})")
    print(f"  lambda criterion   {lam.bound:.10f}")
    print(f"  min rate c*        {cert.intermediates['c_star']:.6f}  vs exp(-0.9*beta) = {math.exp(-0.9 * beta):.6f}")


if __name__ == "__main__":
    main()
