"""Monte Carlo toolkit for Brownian semimartingale decompositions under filtration enlargement."""

from .errors import ConfigError, InvalidArgument, SimulationDiverged, UnsupportedModel, UsageError
from .expansion import Decomposition, HonestTimeLadder
from .paths import PathEnsemble, SamplePath, Subdivision, TimeGrid, make_uniform_grid

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "Decomposition", "HonestTimeLadder", "InvalidArgument", "PathEnsemble", "SamplePath",
    "SimulationDiverged", "Subdivision", "TimeGrid", "UnsupportedModel", "UsageError", "make_uniform_grid",
]
