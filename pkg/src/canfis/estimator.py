"""scikit-learn compatible wrappers around the CANFIS engine and the modular MLP baseline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .baseline import AND_TOPOLOGY, XOR_TOPOLOGY, BaselineConfig, ComposedHalfAdder, TruthTable, train_subnet
from .datasets import Dataset
from .exceptions import DimensionError
from .network import NetworkConfig, init_network, predict, set_params
from .training import TrainingConfig, train


def _check_targets(X, Y):
    X, Y = check_X_y(X, Y, multi_output=True, y_numeric=True)
    if X.shape[1] != 2:
        raise DimensionError(f"expected 2 input features, got {X.shape[1]}")
    if Y.ndim != 2 or Y.shape[1] != 2:
        raise DimensionError(f"expected 2 target columns (sum, carry), got shape {Y.shape}")
    return X, Y


class CANFISRegressor(RegressorMixin, BaseEstimator):
    """Two-input, two-output CANFIS network trained by batch momentum backprop.

    ``fit`` monitors ``(X_val, Y_val)`` every epoch and keeps the weights with
    the lowest validation MSE; without a validation set the training data is
    monitored instead. Predictions lie strictly inside (0, 1).
    """

    def __init__(self, n_mf=2, max_epochs=1000, step_size=1.0, momentum=0.6,
                 cv_patience=50, jitter=0.05, random_state=0):
        self.n_mf = n_mf
        self.max_epochs = max_epochs
        self.step_size = step_size
        self.momentum = momentum
        self.cv_patience = cv_patience
        self.jitter = jitter
        self.random_state = random_state

    def fit(self, X, Y, X_val=None, Y_val=None):
        X, Y = _check_targets(X, Y)
        if X_val is None:
            X_val, Y_val = X, Y
        else:
            X_val, Y_val = _check_targets(X_val, Y_val)
        train_set = Dataset.from_arrays(X, Y, "train")
        cv_set = Dataset.from_arrays(X_val, Y_val, "cv")
        net_config = NetworkConfig(n_mf=self.n_mf, seed=self.random_state, jitter=self.jitter)
        net = init_network(net_config, tuple(zip(X.min(axis=0), X.max(axis=0))))
        self.report_ = train(
            net, train_set, cv_set,
            TrainingConfig(self.max_epochs, self.step_size, self.momentum, self.cv_patience, self.random_state),
        )
        self.network_ = set_params(net, self.report_.best_params)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise DimensionError(f"expected 2 input features, got {X.shape[1]}")
        return predict(self.network_, X)


class ModularMLPRegressor(RegressorMixin, BaseEstimator):
    """Half-adder assembled from independently trained XOR and AND sigmoid MLPs."""

    def __init__(self, xor_topology=XOR_TOPOLOGY, and_topology=AND_TOPOLOGY, max_epochs=10000,
                 step_size=1.0, momentum=0.9, init_scale=1.0, target_rmse=None, random_state=0):
        self.xor_topology = xor_topology
        self.and_topology = and_topology
        self.max_epochs = max_epochs
        self.step_size = step_size
        self.momentum = momentum
        self.init_scale = init_scale
        self.target_rmse = target_rmse
        self.random_state = random_state

    def fit(self, X, Y):
        X, Y = _check_targets(X, Y)
        config = BaselineConfig(self.max_epochs, self.step_size, self.momentum, self.init_scale,
                                self.target_rmse, self.random_state)
        rng = np.random.default_rng(self.random_state)
        xor_net, self.xor_history_ = train_subnet(TruthTable(X, Y[:, 0], "S"), self.xor_topology, config, rng)
        and_net, self.and_history_ = train_subnet(TruthTable(X, Y[:, 1], "C"), self.and_topology, config, rng)
        self.composed_ = ComposedHalfAdder(xor_net, and_net)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "composed_")
        return self.composed_(check_array(X))
