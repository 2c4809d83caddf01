from splinet.utils.config import Config
from splinet.utils.errors import (ConfigError, DimensionError, DivergenceError, EigenvalueError, NumericalError,
                                  SplinetError)
