"""Hard-core gases: graph models and rods on a line.

For pairwise exclusion the curvature bound depends on two numbers, eps0 and
eps1.  The script compares them against the lambda criteria computed on the
full chain, and shows that an interior rod of length 2 meets 13 others.

Run with ``python3 demos/gases.py``.
"""

from curvlab.criteria import lambda_criterion, split_lambda_criterion
from curvlab.models import (
    build_graph_hardcore,
    build_hardcore,
    build_rods,
    eps0_at,
    hardcore_certificate,
    hardcore_split,
    interior_rod,
    named_graph,
)


def report(name, spec):
    chain, rep, eps0, eps1 = build_hardcore(spec)
    closed = hardcore_certificate(eps0, eps1)
    split = split_lambda_criterion(rep, chain.pi, *hardcore_split(spec.n_sites))
    lam = lambda_criterion(rep, chain.pi)
    print(f"{name:<22s} states={chain.n:<5d} eps0={eps0:.4f} eps1={eps1:.4f} "
          f"closed={closed.bound:.6f} split={split.bound:.6f} lambda={lam.bound:.6f}")


def main():
    rho = 0.05
    for graph, size in [("path", 4), ("cycle", 5), ("star", 4), ("complete", 4)]:
        report(f"{graph} ({size})", build_graph_hardcore(named_graph(graph, size), rho))
    report("rods L=3, k=2", build_rods(3, 2, 0.01))

    # the 13 rho count needs room for every conflicting rod
    spec = build_rods(6, 2, 0.01)
    i = interior_rod(spec, 6, 2)
    x = tuple(int(j == i) for j in range(spec.n_sites))
    print(f"\ninterior rod on a 6x6 box: eps0 = {eps0_at(spec, x, i):.4f} = 13 * 0.01")


if __name__ == "__main__":
    main()
