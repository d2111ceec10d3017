"""Weighted Min-Hash and consistent weighted sampling (CWS) toolkit."""

__version__ = "0.1.0"

from .errors import CWSError
from .sets import SparseWeightedSet
from .sketchers import ALGORITHMS, Fingerprint, HashCode, sketch, sketch_corpus
from .similarity import estimate_similarity, generalized_jaccard, mse_experiment, mse_sweep
from .variates import Role, VariateKey, VariateScheme

__all__ = [
    "ALGORITHMS",
    "CWSError",
    "Fingerprint",
    "HashCode",
    "Role",
    "SparseWeightedSet",
    "VariateKey",
    "VariateScheme",
    "estimate_similarity",
    "generalized_jaccard",
    "mse_experiment",
    "mse_sweep",
    "sketch",
    "sketch_corpus",
]
