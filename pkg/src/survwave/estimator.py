"""Linear periodised-wavelet density estimators for right-censored samples.

The partial-data estimator reweights observed events only,

    c_k = (1/N) sum_i delta_(i) / (1 - G_hat(Y_(i)-)) * phi^per_{J,k}(Y_(i)),

while the complete-data estimator uses every observation through

    alpha_(i) = (1 - 1{delta_(i)=0} (1 - F_hat(Y_(i)))) / (1 - G_hat(Y_(i)-)).

Both reduce to the classical orthogonal-series estimator when nothing is
censored.  Coefficients are always computed from raw (unclipped) values;
post-processing only changes how an estimate is evaluated.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.integrate import trapezoid

from . import censoring
from .censoring import CensoredSample
from .errors import (
    AllZeroSample,
    DegenerateWeight,
    InvalidSampleSize,
    KindMismatch,
    ZeroMass,
)
from .wavelet_basis import DEFAULT_DEPTH, periodized_rows

MAX_LEVEL = 16
POSTPROCESS_MODES = ("raw", "clip", "clip_renorm")
KINDS = ("partial", "complete")


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    J: int
    coeffs: np.ndarray
    filter: object
    tau: float
    kind: str
    postprocess: str = "raw"
    scale: float = 1.0
    depth: int = DEFAULT_DEPTH

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64)
        if c.shape != (2 ** self.J,):
            raise ValueError(f"expected {2 ** self.J} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def coefficient_mass(self):
        """Integral of the raw estimate over [0, 1]: ``2^{-J/2} sum_k c_k``."""
        return float(self.coeffs.sum() * 2.0 ** (-self.J / 2.0))

    def __call__(self, xs):
        return evaluate(self, xs)


@dataclass(frozen=True)
class VarianceEstimate:
    x: float
    value: float
    diagonal: float
    cross: float

    @property
    def reported(self):
        return max(self.value, 0.0)


def normalize(s):
    """Rescale times by ``tau = max(y)`` so the largest becomes 1."""
    if np.any(s.y < 0):
        raise ValueError("observation times must be nonnegative")
    top = float(s.y.max())
    if top <= 0.0:
        raise AllZeroSample("all observation times are zero")
    base = s.tau if s.tau is not None else 1.0
    return CensoredSample(s.y / top, s.delta, base * top)


def select_level(n, log="natural", max_level=MAX_LEVEL):
    """Resolution ``J = floor(log2 N - log2 log N)`` clamped to ``[0, max_level]``.

    ``log`` picks the inner logarithm: ``"natural"`` (default) or ``"base2"``.
    """
    if n < 2:
        raise InvalidSampleSize(f"need at least 2 observations, got {n}")
    if log == "natural":
        inner = math.log(n)
    elif log == "base2":
        inner = math.log2(n)
    else:
        raise ValueError(f"unknown log convention {log!r}")
    J = math.floor(math.log2(n) - math.log2(inner))
    return int(min(max(J, 0), max_level))


def _check_fit_args(s, J):
    if not s.normalized:
        raise ValueError("sample must be normalized before fitting")
    if not 0 <= J <= MAX_LEVEL:
        raise ValueError(f"resolution level must be in [0, {MAX_LEVEL}], got {J}")


def project(y, weights, filt, J, depth=DEFAULT_DEPTH):
    """``sum_i weights_i * phi^per_{J,k}(y_i)`` for every ``k``."""
    ks, vals = periodized_rows(filt, J, y, depth)
    return np.bincount(
        ks.ravel(), weights=(np.asarray(weights)[:, None] * vals).ravel(), minlength=2 ** J
    )


def partial_weights(r):
    return censoring.ipcw_weights(r)


def complete_weights(r):
    F = censoring.km_event(r).cdf
    inv = censoring.inverse_censoring_survival(r)
    alpha = (1.0 - (1 - r.delta) * (1.0 - F)) * inv
    if not np.all(np.isfinite(alpha)):
        raise DegenerateWeight("censoring survival reached zero")
    return alpha


def bias_corrected_weights(r, steps):
    """Weights after ``steps`` rounds of the iterated bias correction.

    Starting from the complete-data weights, each round subtracts
    ``1{delta=0} F (1 - F) sum_{l=0}^{steps} F^l / (1 - G)``.  As ``steps``
    grows the censored weights vanish like ``F ** (steps + 2)`` and the
    result tends to the partial-data weights.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    F = censoring.km_event(r).cdf
    inv = censoring.inverse_censoring_survival(r)
    series = np.zeros_like(F)
    power = np.ones_like(F)
    for _ in range(steps + 1):
        series += power
        power = power * F
    cens = 1 - r.delta
    return (1.0 - cens * (1.0 - F) - cens * F * (1.0 - F) * series) * inv


def _fit(s, filt, J, weights_fn, kind, depth):
    _check_fit_args(s, J)
    r = censoring.rank_sample(s)
    w = weights_fn(r)
    coeffs = project(r.y, w, filt, J, depth) / s.n
    return DensityEstimate(J, coeffs, filt, s.tau, kind, depth=depth)


def fit_partial(s, filt, J, depth=DEFAULT_DEPTH):
    """Partial-data (IPCW) estimator from a normalized sample.

    Parameters
    ----------
    s : CensoredSample
        Sample rescaled by :func:`normalize` (``s.tau`` set).
    filt : WaveletFilter
        Scaling filter, e.g. ``load_filter("symmlet5")``.
    J : int
        Resolution level in ``[0, MAX_LEVEL]``; ``2**J`` coefficients.
    depth : int, optional
        Binary digits used when evaluating the basis.

    Returns
    -------
    DensityEstimate
        Raw (unclipped) estimate on the normalised scale.  Its coefficient
        mass equals the Kaplan-Meier estimate at the largest observation.
    """
    return _fit(s, filt, J, partial_weights, "partial", depth)


def fit_complete(s, filt, J, depth=DEFAULT_DEPTH):
    """Complete-data estimator; biased, kept for comparison."""
    return _fit(s, filt, J, complete_weights, "complete", depth)


def fit(s, filt, J, kind="partial", depth=DEFAULT_DEPTH):
    if kind == "partial":
        return fit_partial(s, filt, J, depth)
    if kind == "complete":
        return fit_complete(s, filt, J, depth)
    raise KindMismatch(f"unknown estimator kind {kind!r}")


def bias_corrected_coefficients(s, filt, J, steps, depth=DEFAULT_DEPTH):
    _check_fit_args(s, J)
    r = censoring.rank_sample(s)
    return project(r.y, bias_corrected_weights(r, steps), filt, J, depth) / s.n


def raw_values(e, xs):
    ks, vals = periodized_rows(e.filter, e.J, xs, e.depth)
    return (e.coeffs[ks] * vals).sum(axis=1)


def evaluate(e, xs):
    """Evaluate the estimate at points of [0, 1] honouring its post-processing."""
    scalar = np.ndim(xs) == 0
    out = raw_values(e, np.atleast_1d(xs))
    if e.postprocess != "raw":
        out = np.maximum(out, 0.0) * e.scale
    return float(out[0]) if scalar else out


def denormalize_grid(e, t):
    """Density in original time units: ``f_hat(t / tau) / tau``."""
    return evaluate(e, np.asarray(t, dtype=np.float64) / e.tau) / e.tau


@lru_cache(maxsize=128)
def _grid_rows(filt, J, points, depth):
    ks, vals = periodized_rows(filt, J, np.linspace(0.0, 1.0, points), depth)
    ks.setflags(write=False)
    vals.setflags(write=False)
    return ks, vals


def integrate(e, points=None):
    """Trapezoid integral of the evaluated estimate over [0, 1].

    With the default dyadic grid the rule is exact for the raw estimate up
    to basis-evaluation error, because the periodised basis sums to a
    constant over any shifted dyadic lattice.
    """
    if points is None:
        points = 2 ** max(12, e.J + 4) + 1
    ks, vals = _grid_rows(e.filter, e.J, int(points), e.depth)
    out = (e.coeffs[ks] * vals).sum(axis=1)
    if e.postprocess != "raw":
        out = np.maximum(out, 0.0) * e.scale
    return float(trapezoid(out, dx=1.0 / (points - 1)))


def postprocess(e, mode):
    """Return ``e`` with post-processing ``raw``, ``clip`` or ``clip_renorm``."""
    if mode not in POSTPROCESS_MODES:
        raise ValueError(f"unknown post-processing mode {mode!r}")
    if mode == "raw":
        return replace(e, postprocess="raw", scale=1.0)
    clipped = replace(e, postprocess="clip", scale=1.0)
    if mode == "clip":
        return clipped
    mass = integrate(clipped)
    if mass < 1e-12:
        raise ZeroMass(f"clipped estimate integrates to {mass:.3g}")
    return replace(e, postprocess="clip_renorm", scale=1.0 / mass)


def _variance_parts(s, e, xs):
    if e.kind != "partial":
        raise KindMismatch(f"pointwise variance needs a partial estimate, got {e.kind!r}")
    r = censoring.rank_sample(s)
    w = censoring.ipcw_weights(r)
    K = 2 ** e.J
    n = s.n
    ks, vals = periodized_rows(e.filter, e.J, r.y, e.depth)
    B = np.zeros((n, K))
    np.add.at(B, (np.repeat(np.arange(n), ks.shape[1]), ks.ravel()), vals.ravel())
    kx, vx = periodized_rows(e.filter, e.J, xs, e.depth)
    Px = np.zeros((kx.shape[0], K))
    np.add.at(Px, (np.repeat(np.arange(kx.shape[0]), kx.shape[1]), kx.ravel()), vx.ravel())
    Z = w[:, None] * B
    proj = Z @ Px.T  # (n, len(xs))
    fx = Px @ e.coeffs
    total = ((proj ** 2).mean(axis=0) - fx ** 2) / n
    second = (Z ** 2).mean(axis=0)  # diagonal second moments per k
    diag = ((second - e.coeffs ** 2)[None, :] * Px ** 2).sum(axis=1) / n
    return total, diag


def pointwise_variance(s, e, x):
    """Plug-in variance of the partial-data estimate at ``x``.

    ``(1/N) phi(x)^T Sigma phi(x)`` with
    ``Sigma_kl = (1/N) sum_i w_i^2 phi_k(Y_i) phi_l(Y_i) - c_k c_l``.
    """
    total, diag = _variance_parts(s, e, np.atleast_1d(float(x)))
    return VarianceEstimate(float(x), float(total[0]), float(diag[0]), float(total[0] - diag[0]))


def variance_curve(s, e, xs):
    total, _ = _variance_parts(s, e, np.asarray(xs, dtype=np.float64))
    return total
