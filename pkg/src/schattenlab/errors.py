"""Exception and warning types shared across the package.

Every error raised by the numerical routines derives from
:class:`SchattenLabError`, so callers (in particular the CLI) can separate
tool failures from genuine Python bugs.  Warnings are used for non-fatal
diagnostics: theorem-hypothesis failures and under-resolved truncations.
"""


class SchattenLabError(Exception):
    """Base class for all package errors."""


class InvalidParameter(SchattenLabError, ValueError):
    """A constructor or operation received an out-of-range parameter."""


class NonMonotone(InvalidParameter):
    """A custom weight table is not strictly increasing."""


class DomainError(SchattenLabError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class EvaluationTooCloseToBoundary(DomainError):
    """Interior evaluation requested at |z| > 1 - 1e-12."""


class QuadratureNotConverged(SchattenLabError, ArithmeticError):
    """Adaptive refinement failed to reach the requested tolerance."""


class ResolutionExceeded(SchattenLabError, ArithmeticError):
    """A boundary-sampling routine hit its refinement budget."""


class InsufficientResolution(SchattenLabError, ValueError):
    """A level-set profile lacks the dyadic sample points an integral needs."""


class RootFindingFailed(SchattenLabError, ArithmeticError):
    """Polynomial root extraction failed or the degree is unsupported."""


class RootIsolationFailed(SchattenLabError, ArithmeticError):
    """Super-level-set root isolation hit a degenerate tangency twice."""


class NonFiniteIntegrand(SchattenLabError, ArithmeticError):
    """A Monte Carlo integrand overflowed; signals a symbol bug."""


class LowerBoundViolated(SchattenLabError, ArithmeticError):
    """The conjugate-function sandwich lower bound failed beyond tolerance."""


class RatioOutOfRange(SchattenLabError, ArithmeticError):
    """A proved two-sided equivalence fell outside its numeric window."""


class MaxIterations(SchattenLabError, ArithmeticError):
    """An iterative solver stopped before meeting its termination rule.

    Carries the best iterate so callers can inspect partial progress.
    """

    def __init__(self, message, best=None, gradient_norm=None):
        super().__init__(message)
        self.best = best
        self.gradient_norm = gradient_norm


class NoConvergence(SchattenLabError, ArithmeticError):
    """The SVD backend failed even after rescaling, or its cross-check did."""


class HypothesisWarning(UserWarning):
    """A theorem hypothesis failed numerically; verdicts carry no guarantee."""


class UnderResolvedWarning(UserWarning):
    """A truncated matrix carries non-negligible tail mass."""
