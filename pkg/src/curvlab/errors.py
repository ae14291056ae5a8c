"""Exception types raised by curvlab."""


class CurvlabError(Exception):
    """Base class for all library errors."""


class DomainError(CurvlabError, ValueError):
    """Argument outside the mathematical domain (e.g. negative density)."""


class TooLarge(CurvlabError):
    """State space or group exceeds the configured size cap."""


class InvalidMapping(CurvlabError):
    """A mapping representation violates inverse pairing or detailed balance."""


class NotCommutative(CurvlabError):
    """A commutative mapping representation was required."""


class NotInvolutive(CurvlabError):
    """Every move was required to be its own inverse."""


class NotConjugacyInvariant(CurvlabError):
    """The generator set is not closed under conjugation."""

    def __init__(self, message, generator=None, conjugator=None):
        super().__init__(message)
        self.generator = generator
        self.conjugator = conjugator


class BadSplit(CurvlabError):
    """Move subsets H1, H2 do not satisfy the disjoint-cover precondition."""


class UndefinedQStar(CurvlabError, KeyError):
    """q_* was queried at eta in {delta, delta^-1}."""


class InadmissibleR(CurvlabError):
    """An R table violates one of the admissibility clauses (i)-(iii)."""

    def __init__(self, message, clause, witness=None):
        super().__init__(message)
        self.clause = clause
        self.witness = witness


class HypothesisFailed(CurvlabError):
    """A rate hypothesis needed to build a proof object does not hold."""


class NotDecreasing(CurvlabError):
    """A hard-core allowed set is not closed under lowering occupations."""


class NoRoot(CurvlabError):
    """epsilon(beta) stays below 1 on the whole search interval."""


class BadParams(CurvlabError, ValueError):
    """Model parameters outside the supported range."""


class BudgetExceeded(CurvlabError):
    """A numerical scan would exceed the configured compute budget."""
