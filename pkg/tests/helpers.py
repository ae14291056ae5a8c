"""Small chains shared by the test modules."""

import numpy as np

from curvlab.chain import MappingRepresentation, MarkovChain, StateSpace, chain_from_mapping
from curvlab.groups import cayley_representation, k_cycles, symmetric_group


def two_point(a=1.0, b=1.0):
    """Two states, rate ``a`` from 0 to 1 and ``b`` back."""
    Q = np.array([[0.0, a], [b, 0.0]])
    return MarkovChain(StateSpace.range(2), Q, np.array([b, a]))


def random_reversible(rng, n, density=0.6):
    """Random irreducible reversible chain: symmetric conductances over a spanning path."""
    W = rng.uniform(0.1, 2.0, size=(n, n)) * (rng.random((n, n)) < density)
    W = np.triu(W, 1)
    for i in range(n - 1):
        W[i, i + 1] = max(W[i, i + 1], rng.uniform(0.1, 2.0))
    W = W + W.T
    pi = rng.uniform(0.2, 1.0, size=n)
    pi /= pi.sum()
    return MarkovChain(StateSpace.range(n), W / pi[:, None], pi)


def directed_cycle(m, c=1.0):
    """``Z_m`` with the moves ``+1`` and ``-1`` (an inverse pair), constant rate."""
    maps = np.array([(np.arange(m) + 1) % m, (np.arange(m) - 1) % m])
    rep = MappingRepresentation(maps, [1, 0], np.full((m, 2), float(c)))
    return chain_from_mapping(StateSpace.range(m), rep, np.full(m, 1.0 / m)), rep


def s3_transpositions():
    """Left multiplication by the three transpositions of ``S_3``."""
    space, rep, pi = cayley_representation(symmetric_group(3), k_cycles(3, 2))
    return chain_from_mapping(space, rep, pi), rep


def positive_density(rng, pi, scale=1.0):
    w = pi * np.exp(scale * rng.standard_normal(len(pi)))
    return w / w.sum() / pi
