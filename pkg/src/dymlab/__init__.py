"""Spherically symmetric SU(2) Dirac-Yang-Mills ODE lab."""

__version__ = "0.1.0"

from .algebra import Quaternion
from .dynamics import CouplingParams, InitialData, canonicalize_initial_data
from .errors import (AccuracyError, DegenerateInputError, DymError, InvalidInputError, NotFoundError,
                     SingularStateError)
from .integrate import EventSpec, IntegratorConfig, Trajectory, integrate
from .metric import MetricProfile

__all__ = ["__version__", "Quaternion", "CouplingParams", "InitialData", "canonicalize_initial_data",
           "DymError", "InvalidInputError", "SingularStateError", "DegenerateInputError", "AccuracyError",
           "NotFoundError", "EventSpec", "IntegratorConfig", "Trajectory", "integrate", "MetricProfile"]
