class DataError(ValueError):
    """Input data violates a precondition (shapes, group sizes, degeneracy)."""


class DegenerateEstimatorError(DataError):
    """The covariance estimator needs at least two observations per group."""


class NumericalError(ArithmeticError):
    """A numerical routine failed or produced values outside its contract."""
