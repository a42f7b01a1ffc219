"""
Exception taxonomy for momentgate.
Input problems map to CLI exit code 2, numerical failures to exit code 3.
"""


class MomentgateError(Exception):
    """Base class for all momentgate errors."""
    exit_code = 1


class InputValidationError(MomentgateError, ValueError):
    """Input violates a documented precondition."""
    exit_code = 2


class NumericalError(MomentgateError, ArithmeticError):
    """A numerical procedure failed on admissible input."""
    exit_code = 3


class DegreeOverflowError(InputValidationError):
    def __init__(self, degree, max_degree):
        self.degree = degree
        self.max_degree = max_degree
        super().__init__(
            f"Polynomial degree {degree} exceeds the maximum representable degree {max_degree}"
        )


class DomainError(InputValidationError):
    def __init__(self, point, lower, upper):
        self.point = point
        super().__init__(f"Node {point} lies outside the sampled domain [{lower}, {upper}]")


class ScalingError(InputValidationError):
    def __init__(self, point, value):
        self.point = point
        self.value = value
        super().__init__(
            f"Scaled value {value} at grid point {point} leaves [-1, 1]; choose a smaller lam"
        )


class MonotonicityError(InputValidationError):
    def __init__(self, k, x):
        self.k = k
        self.x = x
        super().__init__(f"Sequence increases from member {k} to {k + 1} at grid point {x}")


class SequenceExhaustedError(InputValidationError):
    def __init__(self, final_max, eps):
        self.final_max = final_max
        super().__init__(
            f"Sequence exhausted: final member still reaches {final_max} > eps={eps}"
        )


class PropernessError(InputValidationError):
    def __init__(self, boundary_value, threshold):
        self.boundary_value = boundary_value
        super().__init__(
            f"Function is not proper on the window: boundary value {boundary_value} "
            f"does not exceed the escape threshold {threshold}"
        )


class SeparationError(InputValidationError):
    def __init__(self, pair, reason):
        self.pair = pair
        super().__init__(f"Generators fail at grid pair {pair}: {reason}")


class LevelError(InputValidationError):
    def __init__(self, level, max_level):
        self.level = level
        self.max_level = max_level
        super().__init__(f"Level {level} too large; maximum level is {max_level}")


class GridMismatchError(InputValidationError):
    pass


class NotPsdError(NumericalError):
    def __init__(self, pivot_index, pivot_value=None):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"Hankel matrix is not positive semidefinite: pivot {pivot_index} = {pivot_value}"
        )


class EigenSolverError(NumericalError):
    pass


class NodeBudgetError(NumericalError):
    def __init__(self, budget):
        self.budget = budget
        super().__init__(f"Lattice construction exceeded the node budget of {budget}")


class EquivalenceError(NumericalError):
    pass
