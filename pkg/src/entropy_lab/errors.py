"""Exception types shared across the laboratory."""


class EntropyLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(EntropyLabError):
    """Rejected input: non-finite data, bad shapes that are not dimension
    mismatches, violated construction invariants."""


class DimensionError(EntropyLabError):
    """Operands live on different grids / partitions."""


class OutOfRangeError(EntropyLabError):
    """Point evaluation outside the sampled range (no extrapolation)."""


class NoRecessionLimitError(EntropyLabError):
    """Asymptotic slope extrapolation did not converge."""


class FluxRegularityError(EntropyLabError):
    """No mollification width on the candidate ladder satisfies the
    modulus-of-continuity bound."""


class TimeStepError(EntropyLabError):
    """Configured time step violates a stability bound."""


class InstabilityError(EntropyLabError):
    """Solution blow-up detected during a run."""


class VacuumError(EntropyLabError):
    """Density dropped below the vacuum floor."""


class ParameterError(EntropyLabError):
    """Physical parameter outside its admissible range."""


class DegeneratePartitionError(EntropyLabError):
    """Coarse space-time partition produced an empty cell."""


class GrowthBoundError(EntropyLabError):
    """Declared growth bound violated on the sampled values."""


class InvalidTestFunctionError(EntropyLabError):
    """Test function bank member violates its sign or support contract."""


class SubcriticalPopulationError(EntropyLabError):
    """Birth rate integrates to at most one; no positive growth rate."""


class DegenerateDualError(EntropyLabError):
    """Dual eigenfunction normalization integral is not positive."""


class ConfigError(EntropyLabError):
    """Malformed experiment configuration."""


class InvariantViolationError(EntropyLabError):
    """A numerical invariant asserted during an experiment run failed."""
