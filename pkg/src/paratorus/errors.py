"""Exception hierarchy.

Two broad families: input problems (bad lattice data, malformed scenarios)
and computation problems (preconditions violated at run time, numerical
procedures that fail to certify). The CLI maps ScenarioError to exit code 2
and every other ParatorusError to exit code 3.
"""


class ParatorusError(Exception):
    """Base class for all package errors."""


class NotAnIsometry(ParatorusError):
    """Matrix does not preserve the bilinear form."""


class NotUnimodular(ParatorusError):
    """Matrix determinant is not +1 or -1."""


class SignatureUnsupported(ParatorusError):
    """Form signature lies outside the supported classification."""


class NotParabolic(ParatorusError):
    """Operation requires a parabolic isometry."""


class DependentBasis(ParatorusError):
    """Supplied vectors are linearly dependent over the rationals."""


class OrthogonalToH(ParatorusError):
    """Degenerate parameter: the chosen class pairs to zero with h.

    `always_type_one_one` reports whether the class pairs to zero with the
    period as well (then it stays of type (1,1) for every parameter value)
    or never does.
    """

    def __init__(self, message, always_type_one_one):
        super().__init__(message)
        self.always_type_one_one = bool(always_type_one_one)


class SingularPeriod(ParatorusError):
    """Period matrix has a non-invertible or non-positive imaginary part."""


class StencilOutOfDomain(ParatorusError):
    """Finite-difference stencil leaves the base domain."""


class NotHolomorphicInduced(ParatorusError):
    """Operation is defined only for holomorphically induced fields."""


class InsufficientEntries(ParatorusError):
    """Too few entries for the requested fit or check."""


class IllConditionedFit(ParatorusError):
    """Least-squares system too ill conditioned to report coefficients."""


class QuadratureDidNotConverge(ParatorusError):
    """Adaptive quadrature hit its refinement cap before the tolerance."""


class BaseMismatch(ParatorusError):
    """Fiber operation applied to points over different base points."""


class ScenarioError(ParatorusError):
    """Scenario payload failed validation.

    `path` locates the offending field, dotted from the scenario root.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


class RankDeficientField(UserWarning):
    """Translation field has generic rank below full; scan results degrade."""


class InconclusiveAtScale(UserWarning):
    """Box-counting estimates disagree across scales; sample more points."""


class DependenceSuspected(UserWarning):
    """Constants declared independent admit a small integer relation."""
