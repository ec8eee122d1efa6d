"""CANFIS neuro-fuzzy engine for learning the binary half-adder."""

from .datasets import Dataset, Sample, builtin_cv, builtin_test, builtin_training, load_csv, save_csv
from .estimator import CANFISRegressor, ModularMLPRegressor
from .fuzzy import BellMF, FiringVector, FuzzyGrid, eval_bell, fire_rules, grad_bell, normalize_firings
from .metrics import PerformanceRecord, TestingRecord, binary_fidelity, evaluate, pearson_r
from .network import CanfisNetwork, NetworkConfig, forward, get_params, init_network, predict, set_params
from .training import TrainingConfig, TrainingReport, backward, compute_mse, finite_diff_gradient, momentum_step, train

__version__ = "0.1.0"

__all__ = [
    "BellMF", "CANFISRegressor", "CanfisNetwork", "Dataset", "FiringVector", "FuzzyGrid",
    "ModularMLPRegressor", "NetworkConfig", "PerformanceRecord", "Sample", "TestingRecord",
    "TrainingConfig", "TrainingReport", "backward", "binary_fidelity", "builtin_cv", "builtin_test",
    "builtin_training", "compute_mse", "eval_bell", "evaluate", "finite_diff_gradient", "fire_rules",
    "forward", "get_params", "grad_bell", "init_network", "load_csv", "momentum_step",
    "normalize_firings", "pearson_r", "predict", "save_csv", "set_params", "train",
]
