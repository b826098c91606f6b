"""Exception types raised across the package."""


class VoltageRangeError(ValueError):
    """A bias voltage fell outside the admissible varactor interval."""

    def __init__(self, value, low, high):
        self.value = value
        self.low = low
        self.high = high
        super().__init__(f"bias voltage {value!r} V outside admissible interval [{low}, {high}] V")


class CircuitDomainError(ValueError):
    """Circuit quantity requested where the network is singular or unphysical."""


class FrequencyUnsupportedError(ValueError):
    """The phase-vs-voltage curve is not one-to-one at the requested frequency."""


class SampleTimeError(ValueError):
    """Sample-and-hold instant makes some mode's time factor vanish."""

    def __init__(self, mode):
        self.mode = mode
        super().__init__(f"sin(n*omega_b*t0) vanishes for mode n={mode}")


class RankConditionError(ValueError):
    """Too many modes for the number of sampled elements; the Gram matrix is singular."""


class RepairError(RuntimeError):
    """Boundary repair of the weighted LS fit hit its iteration cap.

    ``best`` holds the least-violating iterate as ``(ModeWeights, voltages)``.
    """

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


class ConfigError(ValueError):
    """Invalid scenario configuration; message names the offending field."""
