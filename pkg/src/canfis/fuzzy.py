"""
Generalized bell membership functions over a two-input grid partition.

    mu(x) = 1 / (1 + |(x - c) / a| ** (2 b))

a  width   (> 0)
b  slope   (> 0)
c  center

Grid parameters are stored as an array of shape (2, n_mf, 3), indexed
[input, mf, (a, b, c)]. Rule k = i * n_mf + j pairs MF i of input 1 with
MF j of input 2 (row-major); reports index rules this way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterDomainError

# |x - c| below this is treated as the symmetric maximum: all partials are 0
CENTER_GUARD = 1e-12
# firing sums below this are degenerate and normalize to uniform weights
DEGENERATE_SUM = 1e-12


@dataclass(frozen=True)
class BellMF:
    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterDomainError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.a <= 0:
            raise ParameterDomainError(f"width a must be > 0, got {self.a!r}")
        if self.b <= 0:
            raise ParameterDomainError(f"slope b must be > 0, got {self.b!r}")

    def __call__(self, x):
        return eval_bell(self, x)

    def as_array(self):
        return np.array([self.a, self.b, self.c], dtype=float)


def bell_terms(a, b, c, x):
    """Vectorized membership with the intermediates its gradient needs.

    Returns ``(mu, t, diff)`` where ``diff = x - c`` and ``t = |diff / a| ** (2 b)``.
    Arguments broadcast against each other.
    """
    diff = x - c
    t = np.abs(diff / a) ** (2.0 * b)
    mu = 1.0 / (1.0 + t)
    return mu, t, diff


def bell_partials(a, b, mu, t, diff):
    """Partials of mu w.r.t. (a, b, c, x) from the output of :func:`bell_terms`.

    Holds for negative ``a`` as well, since mu is even in ``a``.
    """
    a, b, mu, t, diff = np.broadcast_arrays(a, b, mu, t, diff)
    guard = np.abs(diff) < CENTER_GUARD
    safe_diff = np.where(guard, 1.0, diff)
    scaled = mu * mu * t
    d_a = 2.0 * b * scaled / a
    d_b = -2.0 * scaled * np.log(np.abs(safe_diff / a))
    d_c = 2.0 * b * scaled / safe_diff
    partials = np.stack([d_a, d_b, d_c, -d_c], axis=-1)
    partials[guard] = 0.0
    return partials


def _check_x(x):
    x = float(x)
    if not math.isfinite(x):
        raise ParameterDomainError(f"input must be finite, got {x!r}")
    return x


def eval_bell(mf: BellMF, x: float) -> float:
    x = _check_x(x)
    mu, _, _ = bell_terms(mf.a, mf.b, mf.c, x)
    return float(mu)


def grad_bell(mf: BellMF, x: float) -> tuple[float, float, float, float]:
    """Analytic ``(dmu/da, dmu/db, dmu/dc, dmu/dx)``; zero at the center."""
    x = _check_x(x)
    mu, t, diff = bell_terms(mf.a, mf.b, mf.c, x)
    return tuple(float(v) for v in bell_partials(mf.a, mf.b, mu, t, diff))


def validate_mf_params(params: np.ndarray) -> None:
    if not np.all(np.isfinite(params)):
        raise ParameterDomainError("membership parameters must be finite")
    if np.any(params[..., 0] == 0):
        raise ParameterDomainError("membership width a must be non-zero")
    if np.any(params[..., 1] <= 0):
        raise ParameterDomainError("membership slope b must be > 0")


@dataclass(frozen=True)
class FuzzyGrid:
    """Bell MFs for both inputs, same count per input.

    Construction checks the parameter domain only. Ordering of centers is an
    initialization invariant (:meth:`check_ordering`); gradient updates may
    legitimately move centers past each other.
    """

    params: np.ndarray = field(repr=False)

    def __post_init__(self):
        params = np.array(self.params, dtype=float)
        if params.ndim != 3 or params.shape[0] != 2 or params.shape[2] != 3 or params.shape[1] < 1:
            raise ParameterDomainError(f"grid params must have shape (2, n_mf, 3), got {params.shape}")
        validate_mf_params(params)
        params.setflags(write=False)
        object.__setattr__(self, "params", params)

    @classmethod
    def from_mfs(cls, per_input_mfs) -> FuzzyGrid:
        rows = [[mf.as_array() for mf in mfs] for mfs in per_input_mfs]
        if len(rows) != 2 or len(rows[0]) != len(rows[1]):
            raise ParameterDomainError("need two inputs with the same number of MFs")
        grid = cls(np.array(rows))
        grid.check_ordering()
        return grid

    @property
    def n_mf(self) -> int:
        return self.params.shape[1]

    @property
    def n_rules(self) -> int:
        return self.n_mf ** 2

    def mfs(self, input_index: int) -> list[BellMF]:
        return [BellMF(abs(float(a)), float(b), float(c)) for a, b, c in self.params[input_index]]

    def check_ordering(self) -> None:
        if np.any(self.params[..., 0] <= 0):
            raise ParameterDomainError("membership width a must be > 0")
        if np.any(np.diff(self.params[:, :, 2], axis=1) <= 0):
            raise ParameterDomainError("centers must be strictly increasing within each input")

    def memberships(self, x: float, y: float) -> np.ndarray:
        """Membership degrees, shape (2, n_mf)."""
        point = np.array([_check_x(x), _check_x(y)])[:, None]
        mu, _, _ = bell_terms(self.params[..., 0], self.params[..., 1], self.params[..., 2], point)
        return mu


@dataclass(frozen=True)
class FiringVector:
    raw: np.ndarray
    normalized: np.ndarray
    degenerate_flag: bool = False


def fire_rules(grid: FuzzyGrid, point) -> np.ndarray:
    """Raw product-T-norm firing strengths, row-major over (MF of x, MF of y)."""
    x, y = point
    mu = grid.memberships(x, y)
    return np.outer(mu[0], mu[1]).ravel()


def normalize_firings(raw) -> FiringVector:
    raw = np.asarray(raw, dtype=float)
    if np.any(raw < 0):
        raise ParameterDomainError("firing strengths must be non-negative")
    total = raw.sum()
    if total < DEGENERATE_SUM:
        return FiringVector(raw, np.full(raw.shape, 1.0 / raw.size), True)
    return FiringVector(raw, raw / total, False)
