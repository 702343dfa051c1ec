class PlaboundError(Exception):
    pass


class StructuralError(PlaboundError, ValueError):
    """Block shapes that cannot form a joint covariance."""


class DomainError(PlaboundError, ValueError):
    """Argument outside the mathematical domain of a function."""


class SolverPreconditionError(PlaboundError, ValueError):
    """A matrix that must be inverted is singular."""


class NumericalDivergenceError(PlaboundError, ArithmeticError):
    """The fixed-point iteration produced non-finite values.

    ``last_state`` holds the last finite (Z, C) pair and ``history`` the
    divergence values up to that point.
    """

    def __init__(self, msg, last_state=None, history=None):
        super().__init__(msg)
        self.last_state = last_state
        self.history = history or []
