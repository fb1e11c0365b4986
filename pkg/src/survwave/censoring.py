"""Censored samples, ranking, Kaplan-Meier curves and IPCW weights.

All functions work on the ranked sample ``(Y_(i), delta_(i))``.  Ties are
broken with events before censorings, which keeps

    delta_(i) / (N (1 - G_hat(Y_(i)-))) == dF_hat(Y_(i))

exact even when observation times coincide.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateWeight, InvalidSampleSize


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CensoredSample:
    """Observation times ``y = min(X, T)`` with indicators ``delta = 1{X <= T}``.

    ``tau`` is set once the sample has been rescaled to ``[0, 1]`` by
    :func:`survwave.estimator.normalize`.
    """

    y: np.ndarray
    delta: np.ndarray
    tau: Optional[float] = None

    def __post_init__(self):
        y = _frozen(np.ravel(self.y), np.float64)
        raw = np.ravel(np.asarray(self.delta))
        if y.shape != raw.shape:
            raise InvalidSampleSize(f"{y.size} times but {raw.size} indicators")
        if y.size < 1:
            raise InvalidSampleSize("sample is empty")
        if not np.all((raw == 0) | (raw == 1)):
            raise ValueError("event indicators must be 0 or 1")
        if not np.all(np.isfinite(y)):
            raise ValueError("observation times must be finite")
        if self.tau is not None:
            if not self.tau > 0:
                raise ValueError("tau must be positive")
            if y.min() < 0.0 or y.max() > 1.0:
                raise ValueError("normalized times must lie in [0, 1]")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "delta", _frozen(raw, np.int8))

    @property
    def n(self):
        return self.y.size

    @property
    def normalized(self):
        return self.tau is not None

    @property
    def censoring_proportion(self):
        return float(1.0 - self.delta.mean())


@dataclass(frozen=True, eq=False)
class RankedSample:
    y: np.ndarray
    delta: np.ndarray
    perm: np.ndarray
    source: Optional[CensoredSample] = field(default=None, repr=False)

    @property
    def n(self):
        return self.y.size


@dataclass(frozen=True, eq=False)
class KaplanMeierCurve:
    times: np.ndarray
    cdf: np.ndarray
    jumps: np.ndarray
    target: str

    def at(self, t):
        """Right-continuous step function value at ``t``."""
        idx = np.searchsorted(self.times, t, side="right") - 1
        vals = np.where(idx >= 0, self.cdf[np.clip(idx, 0, None)], 0.0)
        return float(vals) if np.ndim(t) == 0 else vals


def rank_sample(s):
    # lexsort keys: last is primary; events (1 - delta == 0) first among ties
    perm = np.lexsort((1 - s.delta, s.y))
    return RankedSample(
        _frozen(s.y[perm], np.float64),
        _frozen(s.delta[perm], np.int8),
        _frozen(perm, np.int64),
        s,
    )


def _product_limit(ind, target, times):
    n = ind.size
    at_risk = n - np.arange(n, dtype=np.float64)  # N - i + 1 for i = 1..N
    factors = 1.0 - ind / at_risk
    before = np.concatenate(([1.0], np.cumprod(factors)[:-1]))
    jumps = ind / at_risk * before
    return KaplanMeierCurve(
        times, _frozen(np.cumsum(jumps), np.float64), _frozen(jumps, np.float64), target
    )


def km_event(r):
    """Product-limit estimate of the lifetime distribution ``F``."""
    return _product_limit(r.delta.astype(np.float64), "event", r.y)


def km_censoring(r):
    """Product-limit estimate of the censoring distribution ``G``."""
    return _product_limit(1.0 - r.delta.astype(np.float64), "censoring", r.y)


def inverse_censoring_survival(r):
    """``1 / (1 - G_hat(Y_(i)-))`` for every ranked point.

    Uses ``N/(N-i+1) * prod_{j<i} ((N-j)/(N-j+1))**delta_(j)``, the
    left-continuous value, which is finite at every index.
    """
    n = r.n
    i = np.arange(1, n + 1, dtype=np.float64)
    ratio = np.where(r.delta == 1, (n - i) / (n - i + 1.0), 1.0)
    before = np.concatenate(([1.0], np.cumprod(ratio)[:-1]))
    out = n / (n - i + 1.0) * before
    return out


def ipcw_weights(r):
    """IPCW weights ``delta_(i) / (1 - G_hat(Y_(i)-))`` in ranked order."""
    inv = inverse_censoring_survival(r)
    w = np.where(r.delta == 1, inv, 0.0)
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DegenerateWeight("censoring survival reached zero at an event point")
    return w
