"""Reference serving side of the batch-scoring wire protocol."""

from .linear import LinearScorer, linear_from_obj, load_linear
from .serve import PROTOCOL_VERSION, BridgeSession, Prediction, serve_loop

__version__ = "0.1.0"

__all__ = [
    "PROTOCOL_VERSION",
    "BridgeSession",
    "LinearScorer",
    "Prediction",
    "linear_from_obj",
    "load_linear",
    "serve_loop",
]
