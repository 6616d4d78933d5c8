"""Exception hierarchy shared by all modules."""


class OctantWalkError(Exception):
    """Base class for every error raised by the package."""


class PreconditionError(OctantWalkError):
    """An input violates a mathematical precondition (CLI exit code 2)."""


class StepSetError(PreconditionError, ValueError):
    """Malformed or invalid step specification."""


class HalfSpacePrecondition(PreconditionError):
    """The step set lies in a closed half-space, so hypothesis (H) fails."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NoConvergence(OctantWalkError):
    pass


class DegenerateCovariance(PreconditionError):
    pass


class NotRealizable(PreconditionError):
    pass


class DomainError(PreconditionError, ValueError):
    pass


class UnsupportedTriple(PreconditionError, ValueError):
    pass


# fem
class MeshError(OctantWalkError, ValueError):
    pass


class DegenerateElement(MeshError):
    pass


class NoInteriorVertices(PreconditionError):
    pass


class IterationCap(OctantWalkError):
    pass


class InsufficientTerms(OctantWalkError, ValueError):
    pass


# group
class MissingPositiveStep(PreconditionError):
    pass


class MissingNegativeStep(PreconditionError):
    pass


class EvaluationSingularity(OctantWalkError):
    pass


class GroupPrecondition(PreconditionError):
    pass


# enumeration
class MemoryGuard(OctantWalkError):
    pass


class AllZero(OctantWalkError):
    pass


class InsufficientData(OctantWalkError, ValueError):
    pass
