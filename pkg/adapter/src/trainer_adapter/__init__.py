"""Reference external evaluator for the datanas search engine.

Speaks the engine's newline-delimited JSON protocol on stdin/stdout and
backs it with a genuinely weight-shared PyTorch supernet per data
configuration, trained on a small two-class proxy task.
"""

from .proxy_data import SYNTHETIC_SOURCE, ProxyDataset
from .service import AdapterError, SupernetCheckpoint, TrainerService
from .supernet import (
    ALPHAS,
    COLORS,
    DEPTH_LIMITS,
    ElasticSupernet,
    RESOLUTIONS,
    SubNetwork,
    count_parameters,
    effective_width,
    extract_subnetwork,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHAS",
    "AdapterError",
    "COLORS",
    "DEPTH_LIMITS",
    "ElasticSupernet",
    "ProxyDataset",
    "RESOLUTIONS",
    "SYNTHETIC_SOURCE",
    "SubNetwork",
    "SupernetCheckpoint",
    "TrainerService",
    "count_parameters",
    "effective_width",
    "extract_subnetwork",
    "__version__",
]
