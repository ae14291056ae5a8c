"""Declarative model documents and certificate dispatch.

A model document is a JSON object with a ``type`` key; see
:data:`MODEL_TYPES` for the accepted types and their parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import networkx as nx
import numpy as np

from ..chain import MappingRepresentation, MarkovChain, load_chain_document
from ..criteria import (
    CurvatureCertificate,
    cayley_epsilon,
    epsilon_corollary,
    lambda_criterion,
    split_lambda_criterion,
)
from ..errors import BadParams
from .cayley import CayleySpec, build_cayley, build_hypercube, build_symmetric_group_walk
from .hardcore import (
    build_graph_hardcore,
    build_hardcore,
    build_rods,
    hardcore_certificate,
    hardcore_split,
)
from .ising import (
    CurieWeiss,
    CurieWeissLimit,
    IsingSpec,
    Lattice2d,
    box_sites,
    build_curie_weiss,
    build_ising,
    build_lattice_ising,
    ising_certificate,
    ising_epsilon,
)

__all__ = [
    "MODEL_TYPES",
    "BuiltModel",
    "parse_model_document",
    "build_model",
    "named_graph",
    "all_certificates",
]

MODEL_TYPES = {
    "ising": "k (square symmetric matrix, zero diagonal), beta",
    "curie_weiss": "n, beta",
    "lattice_ising": "shape (box side lengths) or sites (list of integer points), beta",
    "hardcore_graph": "graph (star|cycle|path|complete|empty) + size, or nodes + edges; rho",
    "rods": "L, k, rho",
    "symmetric_group": "n, k",
    "hypercube": "n, rate (default 1)",
    "chain": "states, pi, and Q or moves + rates (chain document)",
    "epsilon_family": "family (lattice_display|curie_weiss|curie_weiss_limit), d or n; scan only",
}


@dataclass
class BuiltModel:
    """A constructed model ready for certification and verification.

    ``chain``/``rep`` are ``None`` for scan-only epsilon families.
    ``rebuild(beta)`` and ``epsilon(beta)`` exist for temperature families.
    """

    kind: str
    doc: dict
    chain: MarkovChain | None = None
    rep: MappingRepresentation | None = None
    group: object = None
    closed_form: list = field(default_factory=list)
    split: tuple | None = None
    beta: float | None = None
    rebuild: Callable | None = None
    epsilon: Callable | None = None
    info: dict = field(default_factory=dict)


def parse_model_document(text: str) -> dict:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "type" not in doc:
        raise BadParams("model document must be an object with a 'type' key")
    return doc


def named_graph(name: str, size: int) -> nx.Graph:
    makers = {
        "star": lambda m: nx.star_graph(m),  # m leaves
        "cycle": nx.cycle_graph,
        "path": nx.path_graph,
        "complete": nx.complete_graph,
        "empty": nx.empty_graph,
    }
    if name not in makers:
        raise BadParams(f"unknown graph {name!r}; expected one of {sorted(makers)}")
    return makers[name](int(size))


def _require(doc, *keys):
    missing = [k for k in keys if k not in doc]
    if missing:
        raise BadParams(f"model type {doc['type']!r} needs {missing}")


def _ising_model(kind, doc, spec: IsingSpec, cap):
    def rebuild(beta):
        s = spec.with_beta(beta)
        chain, rep = build_ising(s, cap)
        return chain, rep, [ising_certificate(s, rep)]

    chain, rep = build_ising(spec, cap)
    return BuiltModel(
        kind, doc, chain, rep, closed_form=[ising_certificate(spec, rep)], beta=spec.beta,
        rebuild=rebuild, epsilon=lambda b: ising_epsilon(spec.with_beta(b)),
        info={"n": spec.n, "family": list(spec.family)},
    )


def build_model(doc: dict | str, cap: int | None = None) -> BuiltModel:
    """Build the model described by ``doc`` (a dict or JSON text)."""
    if isinstance(doc, str):
        doc = parse_model_document(doc)
    kind = doc.get("type")
    if kind == "ising":
        _require(doc, "k", "beta")
        return _ising_model(kind, doc, IsingSpec(np.asarray(doc["k"], dtype=float), doc["beta"]), cap)
    if kind == "curie_weiss":
        _require(doc, "n", "beta")
        return _ising_model(kind, doc, build_curie_weiss(int(doc["n"]), doc["beta"]), cap)
    if kind == "lattice_ising":
        _require(doc, "beta")
        if "sites" in doc:
            sites = doc["sites"]
        elif "shape" in doc:
            sites = box_sites(doc["shape"])
        else:
            raise BadParams("lattice_ising needs 'shape' or 'sites'")
        return _ising_model(kind, doc, build_lattice_ising(sites, doc["beta"]), cap)
    if kind in ("hardcore_graph", "rods"):
        if kind == "rods":
            _require(doc, "L", "k", "rho")
            spec = build_rods(int(doc["L"]), int(doc["k"]), doc["rho"])
        else:
            _require(doc, "rho")
            if "graph" in doc:
                _require(doc, "size")
                graph = named_graph(doc["graph"], doc["size"])
            else:
                _require(doc, "nodes", "edges")
                graph = nx.Graph()
                graph.add_nodes_from(range(int(doc["nodes"])))
                graph.add_edges_from(tuple(e) for e in doc["edges"])
            spec = build_graph_hardcore(graph, doc["rho"])
        chain, rep, eps0, eps1 = build_hardcore(spec, cap)
        return BuiltModel(
            kind, doc, chain, rep, closed_form=[hardcore_certificate(eps0, eps1)],
            split=hardcore_split(spec.n_sites), info={"sites": spec.n_sites, "eps0": eps0, "eps1": eps1},
        )
    if kind == "symmetric_group":
        _require(doc, "n", "k")
        spec = build_symmetric_group_walk(int(doc["n"]), int(doc["k"]))
        return _cayley_model(kind, doc, spec, cap)
    if kind == "hypercube":
        _require(doc, "n")
        chain, rep = build_hypercube(int(doc["n"]), float(doc.get("rate", 1.0)))
        return BuiltModel(kind, doc, chain, rep, info={"n": int(doc["n"])})
    if kind == "chain":
        body = doc.get("chain", doc)
        chain, rep = load_chain_document(body, cap)
        return BuiltModel(kind, doc, chain, rep)
    if kind == "epsilon_family":
        _require(doc, "family")
        fam = doc["family"]
        if fam == "lattice_display":
            family = Lattice2d(int(doc.get("d", 2)))
        elif fam == "curie_weiss":
            _require(doc, "n")
            family = CurieWeiss(int(doc["n"]))
        elif fam == "curie_weiss_limit":
            family = CurieWeissLimit()
        else:
            raise BadParams(f"unknown epsilon family {fam!r}")
        return BuiltModel(kind, doc, epsilon=family.epsilon, info={"family": fam})
    raise BadParams(f"unknown model type {kind!r}; expected one of {sorted(MODEL_TYPES)}")


def _cayley_model(kind, doc, spec: CayleySpec, cap):
    chain, rep = build_cayley(spec, cap)
    info = dict(spec.info)
    if "binomial" in info:
        info["bound_with_binomial_rate"] = 2.0 / info["binomial"]
    return BuiltModel(kind, doc, chain, rep, group=spec.group, info=info)


def all_certificates(model: BuiltModel, split=None, rep=None, pi=None, closed_form=None) -> list[CurvatureCertificate]:
    """Run every applicable criterion.

    Order: lambda, split lambda (explicit ``split`` or the model default),
    epsilon corollary (involutive moves), Cayley (group models), closed forms.
    """
    rep = model.rep if rep is None else rep
    pi = model.chain.pi if pi is None else pi
    out = [lambda_criterion(rep, pi)]
    halves = split if split is not None else model.split
    if halves is not None:
        out.append(split_lambda_criterion(rep, pi, *halves))
    if rep.involutive:
        out.append(epsilon_corollary(rep, pi))
    if model.group is not None:
        out.append(cayley_epsilon(rep, pi, model.group))
    out.extend(model.closed_form if closed_form is None else closed_form)
    return out
