"""
Backpropagation and momentum training for :class:`~canfis.network.CanfisNetwork`.

Per-sample loss is ``0.5 * sum_o (d_o - y_o)**2``; one epoch sums the
gradients of every training sample and applies a single heavy-ball step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .datasets import Dataset
from .exceptions import ConfigurationError, DataError, DimensionError, ParameterDomainError, TrainingDivergedError
from .fuzzy import bell_partials
from .network import Batch, CanfisNetwork, ForwardTrace, get_params, propagate, set_params

logger = logging.getLogger(__name__)

MSE_THRESHOLD = 1e-3


@dataclass(frozen=True)
class TrainingConfig:
    max_epochs: int = 1000
    step_size: float = 1.0
    momentum: float = 0.6
    cv_patience: int = 50
    seed: int = 0

    def __post_init__(self):
        if int(self.max_epochs) != self.max_epochs or self.max_epochs < 1:
            raise ConfigurationError(f"max_epochs must be >= 1, got {self.max_epochs!r}")
        if not self.step_size > 0:
            raise ConfigurationError(f"step_size must be > 0, got {self.step_size!r}")
        if not 0 <= self.momentum < 1:
            raise ConfigurationError(f"momentum must lie in [0, 1), got {self.momentum!r}")
        if int(self.cv_patience) != self.cv_patience or self.cv_patience < 0:
            raise ConfigurationError(f"cv_patience must be >= 0, got {self.cv_patience!r}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_mse: float
    cv_mse: float


@dataclass
class TrainingReport:
    records: list[EpochRecord]
    best_epoch: int
    min_cv_mse: float
    final_train_mse: float
    final_params: np.ndarray = field(repr=False)
    best_params: np.ndarray = field(repr=False)
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        return len(self.records)

    @property
    def min_train_mse(self) -> float:
        return min(r.train_mse for r in self.records)

    def train_mse_at(self, epoch: int) -> float:
        return self.records[epoch - 1].train_mse

    def first_epoch_below(self, threshold: float = MSE_THRESHOLD) -> int | None:
        """First epoch whose training MSE is <= ``threshold``, or None."""
        for r in self.records:
            if r.train_mse <= threshold:
                return r.epoch
        return None


def _mse(y, desired) -> float:
    return float(np.mean((np.asarray(desired) - y) ** 2))


def compute_mse(net: CanfisNetwork, data: Dataset) -> float:
    """MSE averaged over samples and both outputs."""
    if len(data) == 0:
        raise DataError("cannot compute MSE of an empty dataset")
    return _mse(propagate(net, data.X).y, data.Y)


def _backprop(net: CanfisNetwork, b: Batch, D: np.ndarray) -> np.ndarray:
    """Loss gradient summed over the batch, in ``get_params`` order."""
    n_mf = net.n_mf
    n = len(b.X)
    dz = (b.y - D) * b.y * (1.0 - b.y)  # (N, 2)
    Xe = np.column_stack([b.X, np.ones(n)])
    g_cons = np.einsum("no,nk,nd->kod", dz, b.wn, Xe)

    # through normalization: d wn_j / d w_k = (delta_jk - wn_j) / total
    g_wn = np.einsum("no,nko->nk", dz, b.rule_outputs)
    safe_total = np.where(b.degenerate, 1.0, b.total)
    g_w = (g_wn - np.sum(b.wn * g_wn, axis=1, keepdims=True)) / safe_total[:, None]
    g_w[b.degenerate] = 0.0
    g_w = g_w.reshape(n, n_mf, n_mf)
    g_mu = np.stack(
        [np.einsum("nij,nj->ni", g_w, b.mu[:, 1]), np.einsum("nij,ni->nj", g_w, b.mu[:, 0])],
        axis=1,
    )

    p = net.grid.params
    partials = bell_partials(p[None, :, :, 0], p[None, :, :, 1], b.mu, b.t, b.diff)[..., :3]
    g_mf = np.einsum("nim,nimp->imp", g_mu, partials)
    return np.concatenate([g_mf.ravel(), g_cons.ravel()])


def batch_gradient(net: CanfisNetwork, X, D) -> tuple[np.ndarray, float]:
    """Summed gradient and summed loss over all rows of ``(X, D)``."""
    b = propagate(net, X)
    D = np.asarray(D, dtype=float).reshape(b.y.shape)
    loss = 0.5 * float(np.sum((D - b.y) ** 2))
    return _backprop(net, b, D), loss


def backward(net: CanfisNetwork, trace: ForwardTrace, point, desired) -> np.ndarray:
    """Gradient of the per-sample loss for the sample ``trace`` was computed on."""
    desired = np.asarray(desired, dtype=float)
    if desired.shape != (2,):
        raise DimensionError(f"desired must hold 2 values, got shape {desired.shape}")
    if trace.memberships.shape != (2, net.n_mf) or trace.rule_outputs.shape != (net.n_rules, 2):
        raise DimensionError("trace does not match the network's dimensions")
    b = Batch(
        X=np.array([point], dtype=float),
        mu=trace.memberships[None],
        t=trace.bell_t[None],
        diff=trace.offsets[None],
        raw=trace.firing.raw[None],
        total=np.array([trace.firing.raw.sum()]),
        degenerate=np.array([trace.firing.degenerate_flag]),
        wn=trace.firing.normalized[None],
        rule_outputs=trace.rule_outputs[None],
        z=trace.z[None],
        y=trace.y[None],
    )
    return _backprop(net, b, desired[None])


def momentum_step(params, grads, velocity, step_size, momentum):
    """Heavy-ball update: ``v <- momentum * v - step_size * g``; ``params <- params + v``."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    if not params.shape == grads.shape == velocity.shape:
        raise DimensionError(
            f"params {params.shape}, grads {grads.shape} and velocity {velocity.shape} differ"
        )
    velocity = momentum * velocity - step_size * grads
    return params + velocity, velocity


def _fold_widths(net: CanfisNetwork, params: np.ndarray, velocity: np.ndarray) -> None:
    # mu is even in a: mapping a -> |a| (and flipping its velocity) leaves the
    # trajectory of the network function unchanged while keeping a > 0.
    n_grid = net.grid.params.size
    a_idx = np.arange(0, n_grid, 3)
    negative = a_idx[params[a_idx] < 0]
    params[negative] *= -1.0
    velocity[negative] *= -1.0


def train(net: CanfisNetwork, train_set: Dataset, cv_set: Dataset, config: TrainingConfig | None = None) -> TrainingReport:
    """Batch momentum training with cross-validation monitoring.

    Both MSEs of epoch ``e`` are measured on the weights after the ``e``-th
    update. The weights with the lowest CV MSE are kept as ``best_params``.
    Training stops after ``config.cv_patience`` consecutive epochs whose CV MSE
    exceeds the running minimum (0 disables this).
    """
    config = config or TrainingConfig()
    train_set.require_nonempty()
    cv_set.require_nonempty()
    X, D = train_set.X, train_set.Y
    Xcv, Dcv = cv_set.X, cv_set.Y

    params = get_params(net).copy()
    velocity = np.zeros_like(params)
    records = []
    best_params = params.copy()
    best_epoch, min_cv = 0, np.inf
    above = 0
    stopped_early = False
    current = net

    for epoch in range(1, config.max_epochs + 1):
        grads, _ = batch_gradient(current, X, D)
        params, velocity = momentum_step(params, grads, velocity, config.step_size, config.momentum)
        if not np.all(np.isfinite(params)):
            raise TrainingDivergedError(f"parameters became non-finite at epoch {epoch}", epoch)
        _fold_widths(net, params, velocity)
        try:
            current = set_params(net, params)
        except ParameterDomainError as exc:
            raise TrainingDivergedError(f"parameters left their domain at epoch {epoch}: {exc}", epoch) from exc
        train_mse = _mse(propagate(current, X).y, D)
        cv_mse = _mse(propagate(current, Xcv).y, Dcv)
        if not (np.isfinite(train_mse) and np.isfinite(cv_mse)):
            raise TrainingDivergedError(f"loss became non-finite at epoch {epoch}", epoch)
        records.append(EpochRecord(epoch, train_mse, cv_mse))

        if cv_mse < min_cv:
            min_cv, best_epoch = cv_mse, epoch
            best_params = params.copy()
        if cv_mse > min_cv:
            above += 1
        else:
            above = 0
        if config.cv_patience and above >= config.cv_patience:
            stopped_early = True
            logger.info("cross-validation MSE rose for %d epochs; stopping at epoch %d", above, epoch)
            break

    return TrainingReport(
        records=records,
        best_epoch=best_epoch,
        min_cv_mse=float(min_cv),
        final_train_mse=records[-1].train_mse,
        final_params=params.copy(),
        best_params=best_params,
        stopped_early=stopped_early,
    )


def _reference_loss(params, n_mf, point, desired):
    # Plain-loop evaluation at 40 significant digits; shares no code with
    # propagate, and its rounding error is far below any step we difference at.
    n_grid = 2 * n_mf * 3
    with mpmath.workdps(40):
        x = [mpmath.mpf(v) for v in point]
        mu = []
        for i in range(2):
            row = []
            for m in range(n_mf):
                a, b, c = params[(i * n_mf + m) * 3:(i * n_mf + m) * 3 + 3]
                u = abs((x[i] - c) / a)
                row.append(1 / (1 + u ** (2 * b)))
            mu.append(row)
        w = [mu[0][i] * mu[1][j] for i in range(n_mf) for j in range(n_mf)]
        total = mpmath.fsum(w)
        loss = mpmath.mpf(0)
        for o in range(2):
            z = mpmath.mpf(0)
            for k in range(n_mf * n_mf):
                p, q, r = params[n_grid + (k * 2 + o) * 3:n_grid + (k * 2 + o) * 3 + 3]
                z += (w[k] / total) * (p * x[0] + q * x[1] + r)
            y = 1 / (1 + mpmath.exp(-z))
            loss += (mpmath.mpf(desired[o]) - y) ** 2
        return loss / 2


def finite_diff_gradient(net: CanfisNetwork, point, desired, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of the per-sample loss over ``get_params(net)``.

    Used as the oracle for :func:`backward`; the loss is re-evaluated from
    scratch in multiprecision arithmetic.
    """
    if not step > 0:
        raise ConfigurationError("finite-difference step must be > 0")
    with mpmath.workdps(40):
        base = [mpmath.mpf(float(v)) for v in get_params(net)]
        h = mpmath.mpf(step)
        grad = np.empty(len(base))
        for i in range(len(base)):
            plus = list(base)
            minus = list(base)
            plus[i] += h
            minus[i] -= h
            f_plus = _reference_loss(plus, net.n_mf, point, desired)
            f_minus = _reference_loss(minus, net.n_mf, point, desired)
            grad[i] = float((f_plus - f_minus) / (2 * h))
    return grad
