"""
CANFIS forward pass for two inputs and two outputs.

One grid of bell MFs is shared by both outputs; every rule carries a
first-order TSK consequent per output, and each output's normalized
weighted sum goes through a logistic sigmoid.

Flat parameter layout (``get_params``/``set_params``):

    mf params       input-major, then MF-major, then (a, b, c)      2 * n_mf * 3
    consequents     rule-major, then output-major, then (p, q, r)   n_mf**2 * 2 * 3
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError, DimensionError, ParameterDomainError
from .fuzzy import DEGENERATE_SUM, FiringVector, FuzzyGrid, bell_terms, validate_mf_params

N_INPUTS = 2
N_OUTPUTS = 2


def sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


@dataclass(frozen=True)
class NetworkConfig:
    n_mf: int = 2
    seed: int = 0
    jitter: float = 0.05
    n_inputs: int = N_INPUTS
    n_outputs: int = N_OUTPUTS
    mf_shape: str = "bell"
    fuzzy_model: str = "TSK first-order"
    output_transfer: str = "sigmoid"

    def __post_init__(self):
        if int(self.n_mf) != self.n_mf or self.n_mf < 1:
            raise ConfigurationError(f"n_mf must be a positive integer, got {self.n_mf!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigurationError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not 0 <= self.jitter < 1:
            raise ConfigurationError(f"jitter must lie in [0, 1), got {self.jitter!r}")
        fixed = {
            "n_inputs": N_INPUTS,
            "n_outputs": N_OUTPUTS,
            "mf_shape": "bell",
            "fuzzy_model": "TSK first-order",
            "output_transfer": "sigmoid",
        }
        for name, expected in fixed.items():
            if getattr(self, name) != expected:
                raise ConfigurationError(f"{name} is fixed to {expected!r}")


@dataclass(frozen=True)
class TskConsequent:
    p: float
    q: float
    r_bias: float

    def __call__(self, x, y):
        return self.p * x + self.q * y + self.r_bias


def param_count(n_mf: int) -> int:
    return N_INPUTS * n_mf * 3 + n_mf**2 * N_OUTPUTS * 3


@dataclass(frozen=True)
class CanfisNetwork:
    grid: FuzzyGrid
    consequents: np.ndarray = field(repr=False)

    def __post_init__(self):
        cons = np.array(self.consequents, dtype=float)
        expected = (self.grid.n_rules, N_OUTPUTS, 3)
        if cons.shape != expected:
            raise DimensionError(f"consequents must have shape {expected}, got {cons.shape}")
        if not np.all(np.isfinite(cons)):
            raise ParameterDomainError("consequent parameters must be finite")
        cons.setflags(write=False)
        object.__setattr__(self, "consequents", cons)

    @property
    def n_mf(self) -> int:
        return self.grid.n_mf

    @property
    def n_rules(self) -> int:
        return self.grid.n_rules

    @property
    def param_count(self) -> int:
        return param_count(self.n_mf)

    def consequent(self, rule: int, output: int) -> TskConsequent:
        return TskConsequent(*(float(v) for v in self.consequents[rule, output]))


@dataclass(frozen=True)
class ForwardTrace:
    """Every intermediate of one forward pass, as needed by backprop."""

    point: tuple[float, float]
    memberships: np.ndarray  # (2, n_mf)
    bell_t: np.ndarray  # (2, n_mf), |(x - c) / a| ** (2b)
    offsets: np.ndarray  # (2, n_mf), x - c
    firing: FiringVector
    rule_outputs: np.ndarray  # (n_rules, 2)
    z: np.ndarray  # (2,) pre-sigmoid aggregates
    y: np.ndarray  # (2,) outputs


def init_network(config: NetworkConfig, input_range=((0.0, 1.0), (0.0, 1.0)), rng=None) -> CanfisNetwork:
    """Evenly spaced bell grid over ``input_range``, jittered, with small random consequents."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    n = config.n_mf
    input_range = np.asarray(input_range, dtype=float)
    if input_range.shape != (N_INPUTS, 2):
        raise ConfigurationError("input_range needs one (lo, hi) pair per input")
    mf = np.empty((N_INPUTS, n, 3))
    for i, (lo, hi) in enumerate(input_range):
        if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
            raise ConfigurationError(f"degenerate input range for input {i}: ({lo}, {hi})")
        if n == 1:
            centers = np.array([(lo + hi) / 2.0])
            width = (hi - lo) / 2.0
        else:
            centers = np.linspace(lo, hi, n)
            width = (hi - lo) / (2.0 * (n - 1))
        mf[i, :, 0] = width
        mf[i, :, 1] = 2.0
        mf[i, :, 2] = centers
    mf *= 1.0 + rng.uniform(-config.jitter, config.jitter, mf.shape)
    consequents = rng.uniform(-0.1, 0.1, (n * n, N_OUTPUTS, 3))
    try:
        grid = FuzzyGrid(mf)
        grid.check_ordering()
    except ParameterDomainError as exc:
        raise ConfigurationError(f"jitter {config.jitter} breaks the grid: {exc}") from exc
    return CanfisNetwork(grid, consequents)


def get_params(net: CanfisNetwork) -> np.ndarray:
    return np.concatenate([net.grid.params.ravel(), net.consequents.ravel()])


def set_params(net: CanfisNetwork, vector) -> CanfisNetwork:
    """Return a new network of the same shape holding ``vector``."""
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.size != net.param_count:
        raise DimensionError(f"expected {net.param_count} parameters, got shape {vector.shape}")
    n_grid = net.grid.params.size
    mf = vector[:n_grid].reshape(net.grid.params.shape)
    cons = vector[n_grid:].reshape(net.consequents.shape)
    return CanfisNetwork(FuzzyGrid(mf), cons)


@dataclass
class Batch:
    """Forward intermediates for N samples (leading axis)."""

    X: np.ndarray  # (N, 2)
    mu: np.ndarray  # (N, 2, n_mf)
    t: np.ndarray
    diff: np.ndarray
    raw: np.ndarray  # (N, K)
    total: np.ndarray  # (N,)
    degenerate: np.ndarray  # (N,) bool
    wn: np.ndarray  # (N, K)
    rule_outputs: np.ndarray  # (N, K, 2)
    z: np.ndarray  # (N, 2)
    y: np.ndarray  # (N, 2)


def _as_inputs(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.ndim != 2 or X.shape[1] != N_INPUTS:
        raise DimensionError(f"inputs must have shape (N, 2), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ParameterDomainError("inputs must be finite")
    return X


def propagate(net: CanfisNetwork, X) -> Batch:
    X = _as_inputs(X)
    p = net.grid.params
    mu, t, diff = bell_terms(p[None, :, :, 0], p[None, :, :, 1], p[None, :, :, 2], X[:, :, None])
    n = len(X)
    raw = (mu[:, 0, :, None] * mu[:, 1, None, :]).reshape(n, -1)
    total = raw.sum(axis=1)
    degenerate = total < DEGENERATE_SUM
    wn = np.where(
        degenerate[:, None],
        1.0 / raw.shape[1],
        raw / np.where(degenerate, 1.0, total)[:, None],
    )
    Xe = np.column_stack([X, np.ones(n)])
    rule_outputs = np.einsum("kod,nd->nko", net.consequents, Xe)
    z = np.einsum("nk,nko->no", wn, rule_outputs)
    return Batch(X, mu, t, diff, raw, total, degenerate, wn, rule_outputs, z, sigmoid(z))


def forward(net: CanfisNetwork, point) -> ForwardTrace:
    x, y = point
    b = propagate(net, [[x, y]])
    firing = FiringVector(b.raw[0], b.wn[0], bool(b.degenerate[0]))
    return ForwardTrace(
        point=(float(x), float(y)),
        memberships=b.mu[0],
        bell_t=b.t[0],
        offsets=b.diff[0],
        firing=firing,
        rule_outputs=b.rule_outputs[0],
        z=b.z[0],
        y=b.y[0],
    )


def predict(net: CanfisNetwork, X) -> np.ndarray:
    """Network outputs for each row of ``X``, shape (N, 2)."""
    return propagate(net, X).y


def network_to_dict(net: CanfisNetwork, config: NetworkConfig | None = None) -> dict:
    doc = {"n_mf": net.n_mf, "param_count": net.param_count, "params": [float(v) for v in get_params(net)]}
    if config is not None:
        doc["config"] = asdict(config)
    return doc


def network_from_dict(doc: dict) -> CanfisNetwork:
    n_mf = int(doc["n_mf"])
    params = np.asarray(doc["params"], dtype=float)
    if params.size != param_count(n_mf):
        raise DimensionError(f"expected {param_count(n_mf)} parameters for n_mf={n_mf}, got {params.size}")
    n_grid = N_INPUTS * n_mf * 3
    mf = params[:n_grid].reshape(N_INPUTS, n_mf, 3)
    validate_mf_params(mf)
    return CanfisNetwork(FuzzyGrid(mf), params[n_grid:].reshape(n_mf**2, N_OUTPUTS, 3))


def save_network(net: CanfisNetwork, path, config: NetworkConfig | None = None) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net, config), indent=2) + "\n")


def load_network(path) -> CanfisNetwork:
    return network_from_dict(json.loads(Path(path).read_text()))
