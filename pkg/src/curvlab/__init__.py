"""Certified lower bounds on the entropic Ricci curvature of finite Markov chains.

Submodules
----------
chain      reversible chains, mapping representations, validation
calculus   logarithmic mean, entropy, Dirichlet form, the forms A and B
criteria   lambda / split / epsilon / Cayley criteria and the Gamma bound
groups     permutation groups and Cayley-graph representations
models     Ising, hard-core, rods, symmetric-group walks, hypercube
verifier   Bochner ratio scans, spectral gap, MLSI and CED checks
cli        the ``curvlab`` command
"""

from . import calculus, chain, criteria, groups, models, verifier
from .calculus import (
    action_A,
    b_term,
    ced_expression,
    dirichlet,
    entropy,
    generator_apply,
    hessian_B,
    log_mean,
    log_mean_partials,
)
from .chain import (
    MappingRepresentation,
    MarkovChain,
    StateSpace,
    canonical_transposition_representation,
    chain_from_mapping,
    commutativity_report,
    validate_chain,
)
from .criteria import (
    Criterion,
    CurvatureCertificate,
    cayley_epsilon,
    epsilon_corollary,
    gamma_lower_bound,
    lambda_criterion,
    q_table,
    split_lambda_criterion,
    theorem38_R,
)
from .errors import (
    BadParams,
    BadSplit,
    BudgetExceeded,
    CurvlabError,
    DomainError,
    HypothesisFailed,
    InadmissibleR,
    InvalidMapping,
    NoRoot,
    NotCommutative,
    NotConjugacyInvariant,
    NotDecreasing,
    NotInvolutive,
    TooLarge,
    UndefinedQStar,
)
from .verifier import VerificationReport, bochner_scan, ced_check, mlsi_scan, spectral_gap, verify

__version__ = "0.1.0"

__all__ = [
    "calculus", "chain", "criteria", "groups", "models", "verifier",
    "action_A", "b_term", "ced_expression", "dirichlet", "entropy", "generator_apply",
    "hessian_B", "log_mean", "log_mean_partials",
    "MappingRepresentation", "MarkovChain", "StateSpace", "canonical_transposition_representation",
    "chain_from_mapping", "commutativity_report", "validate_chain",
    "Criterion", "CurvatureCertificate", "cayley_epsilon", "epsilon_corollary", "gamma_lower_bound",
    "lambda_criterion", "q_table", "split_lambda_criterion", "theorem38_R",
    "BadParams", "BadSplit", "BudgetExceeded", "CurvlabError", "DomainError", "HypothesisFailed",
    "InadmissibleR", "InvalidMapping", "NoRoot", "NotCommutative", "NotConjugacyInvariant",
    "NotDecreasing", "NotInvolutive", "TooLarge", "UndefinedQStar",
    "VerificationReport", "bochner_scan", "ced_check", "mlsi_scan", "spectral_gap", "verify",
]
