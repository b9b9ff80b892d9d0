"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    pass


class UnsupportedModel(ValueError):
    pass


class ConfigError(ValueError):
    """Raised for invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class UsageError(ValueError):
    pass


class SimulationDiverged(FloatingPointError):
    """A coefficient evaluation produced a non-finite value."""

    def __init__(self, path_index, time):
        super().__init__(f"non-finite coefficient on path {path_index} at t={time:.6g}")
        self.path_index = int(path_index)
        self.time = float(time)
