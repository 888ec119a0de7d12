__version__ = "0.1.0"

from .constants import Constants
from .errors import ConfigError, InfeasibleError, NumericalError
