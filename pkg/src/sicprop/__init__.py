"""Sign-carrying unitary propagators and their Green functions."""

__version__ = "0.1.0"

from .dual_oracle import LogicalSign
from .errors import AccuracyError, CapacityError, CausticError, ContractError, ResolutionError, SicpropError
from .hilbert_core import GlobalPhase, mat_exp

__all__ = [
    "AccuracyError",
    "CapacityError",
    "CausticError",
    "ContractError",
    "GlobalPhase",
    "LogicalSign",
    "ResolutionError",
    "SicpropError",
    "__version__",
    "mat_exp",
]
