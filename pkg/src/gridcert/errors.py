"""Exception hierarchy for gridcert."""


class GridCertError(Exception):
    """Base class for all gridcert errors."""


class InvalidParameter(GridCertError, ValueError):
    """A physical or numerical parameter is out of its admissible range."""


class EvaluationAtPole(GridCertError, ZeroDivisionError):
    """A transfer function was evaluated (numerically) at one of its poles."""

    def __init__(self, s, message=None):
        self.s = s
        super().__init__(message or f"evaluation at pole s={s!r}")


class DegenerateFeedback(GridCertError, ArithmeticError):
    pass


class NotInvertible(GridCertError, ArithmeticError):
    pass


class RootSolverFailure(GridCertError, ArithmeticError):
    pass


class InternallyUnstable(GridCertError):
    """A bus transfer function has a closed right half plane pole."""


class Inconclusive(GridCertError):
    """A sampled test came too close to its decision boundary to conclude."""


class AssumptionViolated(GridCertError):
    """A bus does not satisfy the stability assumption of the certificate."""


class TailUnbounded(GridCertError):
    pass


class NoCertificate(GridCertError):
    """No gamma up to the search cap satisfies the test."""


class InvalidDesign(InvalidParameter):
    pass


class NoFeasibleH(GridCertError):
    pass


class DuplicateLine(InvalidParameter):
    pass


class DanglingEndpoint(InvalidParameter):
    pass


class UnknownBus(GridCertError, KeyError):
    pass


class DelayPresent(GridCertError):
    """A delay-free construction was requested for a network with delays."""


class SingularMassMatrix(GridCertError):
    pass


class DisconnectedNetwork(GridCertError):
    def __init__(self, components):
        self.components = components
        super().__init__(
            f"network has {len(components)} connected components: "
            + ", ".join("{" + ", ".join(map(str, c)) + "}" for c in components))


class GridTooCoarse(GridCertError):
    pass


class StepTooLarge(InvalidParameter):
    pass


class TooShort(GridCertError):
    pass


class NotSettled(GridCertError):
    pass


class ParseError(GridCertError):
    pass


class ValidationError(InvalidParameter):
    pass
