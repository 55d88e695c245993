"""Binary Child Drawing Development Optimization for wrapper feature selection."""

__version__ = "0.1.0"

from .binary import FitnessWeights, SelectionResult, binarize, repair_mask, select_features, wrapper_fitness
from .config import RunConfig
from .core import Bounds, CddoParams, OptimizeResult, optimize
from .data import Dataset, load_builtin, load_csv, normalize_minmax
from .harness import exhaustive_oracle, random_search, run_experiment

__all__ = [
    "Bounds", "CddoParams", "Dataset", "FitnessWeights", "OptimizeResult", "RunConfig",
    "SelectionResult", "binarize", "exhaustive_oracle", "load_builtin", "load_csv",
    "normalize_minmax", "optimize", "random_search", "repair_mask", "run_experiment",
    "select_features", "wrapper_fitness",
]
