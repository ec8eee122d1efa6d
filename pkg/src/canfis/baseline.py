"""
Modular MLP half-adder: an XOR subnet produces S, an AND subnet produces C.

Each subnet is a fully connected sigmoid network trained on its own
4-row truth table by batch backpropagation with heavy-ball momentum.
The composed network is never trained jointly.

Flat parameter layout per layer, input layer first: weights (fan_in x
fan_out, row-major) followed by biases (fan_out).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
import numpy as np

from .datasets import Dataset, builtin_training
from .exceptions import ConfigurationError, DimensionError, TrainingDivergedError
from .metrics import TestingRecord
from .network import sigmoid
from .training import momentum_step

XOR_TOPOLOGY = (2, 2, 1)
AND_TOPOLOGY = (2, 1)
# composed RMSE the modular approach was reported to stall at; shown, never asserted
REPORTED_COMPOSED_RMSE = 0.35


@dataclass(frozen=True)
class TruthTable:
    X: np.ndarray
    t: np.ndarray
    name: str = ""

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        t = np.asarray(self.t, dtype=float).ravel()
        if X.ndim != 2 or X.shape[1] != 2 or len(X) != len(t):
            raise DimensionError(f"truth table needs X of shape (N, 2) and N targets, got {X.shape}, {t.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_dataset(cls, data: Dataset, output: str) -> TruthTable:
        column = {"S": 0, "C": 1}[output.upper()]
        return cls(data.X, data.Y[:, column], f"{data.name}:{output.upper()}")


def xor_table() -> TruthTable:
    return TruthTable.from_dataset(builtin_training(), "S")


def and_table() -> TruthTable:
    return TruthTable.from_dataset(builtin_training(), "C")


def _layer_shapes(topology):
    return [(topology[i], topology[i + 1]) for i in range(len(topology) - 1)]


def subnet_param_count(topology) -> int:
    return sum(fi * fo + fo for fi, fo in _layer_shapes(topology))


@dataclass(frozen=True)
class MlpSubnet:
    topology: tuple[int, ...]
    params: np.ndarray = field(repr=False)

    def __post_init__(self):
        topology = tuple(int(v) for v in self.topology)
        if len(topology) < 2 or min(topology) < 1 or topology[0] != 2 or topology[-1] != 1:
            raise ConfigurationError(f"topology must run 2 -> ... -> 1 with sizes >= 1, got {topology}")
        params = np.array(self.params, dtype=float).ravel()
        if params.size != subnet_param_count(topology):
            raise DimensionError(f"{topology} needs {subnet_param_count(topology)} parameters, got {params.size}")
        params.setflags(write=False)
        object.__setattr__(self, "topology", topology)
        object.__setattr__(self, "params", params)

    def layers(self):
        """Yield ``(W, b)`` views per layer."""
        offset = 0
        for fi, fo in _layer_shapes(self.topology):
            W = self.params[offset:offset + fi * fo].reshape(fi, fo)
            offset += fi * fo
            yield W, self.params[offset:offset + fo]
            offset += fo

    def activations(self, X) -> list[np.ndarray]:
        acts = [np.atleast_2d(np.asarray(X, dtype=float))]
        for W, b in self.layers():
            acts.append(sigmoid(acts[-1] @ W + b))
        return acts

    def __call__(self, X) -> np.ndarray:
        return self.activations(X)[-1][:, 0]


def init_subnet(topology, rng, scale: float = 1.0) -> MlpSubnet:
    return MlpSubnet(tuple(topology), rng.uniform(-scale, scale, subnet_param_count(topology)))


def subnet_gradient(subnet: MlpSubnet, X, t) -> np.ndarray:
    """Gradient of ``0.5 * sum (t - y)**2`` summed over rows of ``X``."""
    acts = subnet.activations(X)
    t = np.asarray(t, dtype=float).reshape(-1, 1)
    layers = list(subnet.layers())
    delta = (acts[-1] - t) * acts[-1] * (1.0 - acts[-1])
    grads = []
    for i in reversed(range(len(layers))):
        W, _ = layers[i]
        grads.append(delta.sum(axis=0))
        grads.append((acts[i].T @ delta).ravel())
        if i:
            delta = (delta @ W.T) * acts[i] * (1.0 - acts[i])
    return np.concatenate(grads[::-1])


def _reference_subnet_loss(params, topology, X, t):
    with mpmath.workdps(40):
        loss = mpmath.mpf(0)
        for row, target in zip(X, t):
            act = [mpmath.mpf(float(v)) for v in row]
            offset = 0
            for fi, fo in _layer_shapes(topology):
                nxt = []
                for j in range(fo):
                    s = params[offset + fi * fo + j]
                    for i in range(fi):
                        s += act[i] * params[offset + i * fo + j]
                    nxt.append(1 / (1 + mpmath.exp(-s)))
                offset += fi * fo + fo
                act = nxt
            loss += (mpmath.mpf(float(target)) - act[0]) ** 2
        return loss / 2


def subnet_finite_diff(subnet: MlpSubnet, X, t, step: float = 1e-6) -> np.ndarray:
    """Central-difference oracle for :func:`subnet_gradient`."""
    with mpmath.workdps(40):
        base = [mpmath.mpf(float(v)) for v in subnet.params]
        h = mpmath.mpf(step)
        grad = np.empty(len(base))
        for i in range(len(base)):
            plus, minus = list(base), list(base)
            plus[i] += h
            minus[i] -= h
            diff = _reference_subnet_loss(plus, subnet.topology, X, t) - _reference_subnet_loss(minus, subnet.topology, X, t)
            grad[i] = float(diff / (2 * h))
    return grad


@dataclass(frozen=True)
class BaselineConfig:
    max_epochs: int = 10000
    step_size: float = 1.0
    momentum: float = 0.9
    init_scale: float = 1.0
    target_rmse: float | None = None
    seed: int = 0

    def __post_init__(self):
        if int(self.max_epochs) != self.max_epochs or self.max_epochs < 1:
            raise ConfigurationError(f"max_epochs must be >= 1, got {self.max_epochs!r}")
        if not self.step_size > 0:
            raise ConfigurationError(f"step_size must be > 0, got {self.step_size!r}")
        if not 0 <= self.momentum < 1:
            raise ConfigurationError(f"momentum must lie in [0, 1), got {self.momentum!r}")
        if not self.init_scale > 0:
            raise ConfigurationError(f"init_scale must be > 0, got {self.init_scale!r}")


def rmse(subnet: MlpSubnet, table: TruthTable) -> float:
    return float(np.sqrt(np.mean((table.t - subnet(table.X)) ** 2)))


def train_subnet(truth_table: TruthTable, topology, config: BaselineConfig | None = None, rng=None):
    """Train one gate. Returns the subnet and the RMSE after every epoch.

    Stops early once RMSE reaches ``config.target_rmse`` when that is set.
    """
    config = config or BaselineConfig()
    if rng is None:
        rng = np.random.default_rng(config.seed)
    subnet = init_subnet(topology, rng, config.init_scale)
    params = subnet.params.copy()
    velocity = np.zeros_like(params)
    history = []
    for epoch in range(1, config.max_epochs + 1):
        grads = subnet_gradient(subnet, truth_table.X, truth_table.t)
        params, velocity = momentum_step(params, grads, velocity, config.step_size, config.momentum)
        if not np.all(np.isfinite(params)):
            raise TrainingDivergedError(f"subnet parameters became non-finite at epoch {epoch}", epoch)
        subnet = MlpSubnet(subnet.topology, params)
        history.append(rmse(subnet, truth_table))
        if config.target_rmse is not None and history[-1] <= config.target_rmse:
            break
    return subnet, history


@dataclass(frozen=True)
class ComposedHalfAdder:
    xor_subnet: MlpSubnet
    and_subnet: MlpSubnet

    def __call__(self, X) -> np.ndarray:
        return np.column_stack([self.xor_subnet(X), self.and_subnet(X)])


def compose_and_evaluate(composed: ComposedHalfAdder, test_set: Dataset) -> tuple[float, list[TestingRecord]]:
    """RMSE over both outputs of every sample, plus the per-sample table."""
    test_set.require_nonempty()
    outputs = composed(test_set.X)
    value = float(np.sqrt(np.mean((test_set.Y - outputs) ** 2)))
    records = [
        TestingRecord(s.x, s.y, s.s, s.c, float(o[0]), float(o[1]))
        for s, o in zip(test_set, outputs)
    ]
    return value, records
