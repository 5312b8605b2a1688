"""Step-size analysis toolkit for SGD on strongly convex problems."""

from .core import Family, ParamError, ProblemParams, Schedule, Trace, validate_params
from .kernels import BACKEND

__all__ = ["BACKEND", "Family", "ParamError", "ProblemParams", "Schedule", "Trace", "validate_params"]
__version__ = "0.1.0"
