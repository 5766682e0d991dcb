"""Simulation laboratory for regularized planar aggregation.

Clusters grow on the exterior of the unit disk by composing slit
conformal maps; the attachment angle density and particle capacity are
driven by the boundary derivative of the current cluster map, read at
radius e^sigma.  The package simulates the chain exactly (Poisson
thinning), extracts Laurent-mode fluctuation statistics, and compares
them against exactly computed Ornstein-Uhlenbeck limit covariances.
"""

from .chain import EventLog, EventRecord, ModelParams, Trajectory
from .config import SimConfig
from .conformal import ClusterMap, LaurentSeries, ParticleMap, build_slit_map
from .errors import AleError, ConfigError, DomainError, SingularityError
from .limits import LimitOracle, MultiplierOperator, TimeChange

__version__ = "0.1.0"
