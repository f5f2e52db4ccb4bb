"""Exception hierarchy shared by all modules."""


class BLLError(Exception):
    """Base class for every error raised by bllab."""


class DegenerateSetError(BLLError, ValueError):
    """A set of measure zero was passed where positive measure is required."""


class MeasureMismatchError(BLLError, ValueError):
    """|E_j| differs from the prescribed e_j."""


class DegenerateConfigurationError(BLLError, ValueError):
    """The configuration fails nondegeneracy (or K_e is unbounded)."""


class UnboundedError(BLLError):
    """A polytope or LP objective is unbounded."""


class InfeasibleError(BLLError):
    """An LP has an empty feasible region."""


class ColinearFunctionalsError(BLLError, ValueError):
    """Two pinned functionals are linearly dependent."""


class BreakpointCongestionError(BLLError):
    """Local polynomial reconstruction of a kernel failed repeatedly."""

    def __init__(self, message, smallest_h):
        super().__init__(f"{message} (smallest h tried: {smallest_h})")
        self.smallest_h = smallest_h


class HypothesisFailure(BLLError):
    """A checked hypothesis (admissibility, genericity, ...) does not hold."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CounterexampleError(BLLError):
    """A sample with zero deficit but positive orbit distance was found."""

    def __init__(self, message, sample):
        super().__init__(message)
        self.sample = sample
