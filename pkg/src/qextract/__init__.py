"""Classical simulator for reading a positive function out of an amplitude-encoded memory.

The pipeline estimates prefix integrals of psi^2 by segmented amplitude
estimation, interpolates them at snapped Chebyshev nodes, differentiates the
interpolant and takes a square root. Query costs are metered along the way.
"""

from .functions import FunctionModel, GridFunction, builtin, normalize, resolve, sample_grid
from .memory import GoodSet, QuantumMemory, prepare, shift
from .estimation import AmplitudeEstimate, QueryLedger, estimate_amplitude
from .prefix import PrefixEstimate, binary_decompose, estimate_prefix_integral
from .chebyshev import ChebyshevInterpolant, NodeSet, choose_M, interpolate, make_node_set
from .pipeline import ExtractionConfig, ExtractionError, ExtractionReport, extract, sweep, verify

__version__ = "0.1.0"

__all__ = [
    "AmplitudeEstimate", "ChebyshevInterpolant", "ExtractionConfig", "ExtractionError",
    "ExtractionReport", "FunctionModel", "GoodSet", "GridFunction", "NodeSet",
    "PrefixEstimate", "QuantumMemory", "QueryLedger", "binary_decompose", "builtin",
    "choose_M", "estimate_amplitude", "estimate_prefix_integral", "extract",
    "interpolate", "make_node_set", "normalize", "prepare", "resolve", "sample_grid",
    "shift", "sweep", "verify",
]
