"""Random location functionals on discretized stochastic-process paths.

Evaluate location functionals (path supremum location, hitting times,
first jumps, increment patterns, ...) on uniformly sampled paths, verify
their defining axioms exactly on finite grids, build their ordered-set
representations, and run Monte Carlo stationarity diagnostics.
"""

from randloc.paths import (
    DiscretePath,
    Interval,
    PathMode,
    INFTY,
    shift,
    mollify,
    differentiate,
)
from randloc.functionals import make_functional, CATALOG_NAMES

__all__ = [
    "DiscretePath",
    "Interval",
    "PathMode",
    "INFTY",
    "shift",
    "mollify",
    "differentiate",
    "make_functional",
    "CATALOG_NAMES",
]

__version__ = "0.1.0"
