"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A configuration or input violates a documented constraint."""


class DimensionError(ValidationError):
    """An array has the wrong extent along a named axis."""

    def __init__(self, axis: str, expected, got):
        self.axis = axis
        self.expected = expected
        self.got = got
        super().__init__(f"axis '{axis}': expected {expected}, got {got}")


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during training."""

    def __init__(self, step: int, trace):
        self.step = step
        self.trace = list(trace)
        super().__init__(f"training diverged at step {step}")


class PowerIterationStagnation(RuntimeError):
    """Power iteration hit its iteration cap before reaching tolerance."""


class SolverNonConvergence(RuntimeError):
    """Iterative PDE solve failed to reach the requested residual."""

    def __init__(self, residual: float, tol: float, iterations: int):
        self.residual = residual
        super().__init__(
            f"residual {residual:.3e} > tol {tol:.3e} after {iterations} iterations"
        )
