"""Brute-force reference computations for testing.

Nothing here shares code paths with the estimators beyond the basis window
itself: coefficients come from composite quadrature, KM curves from exact
rational arithmetic, and the cascade values from a separate eigenvector
computation followed by dyadic refinement.

Quadrature is done cell by cell.  On each dyadic cell ``[m, m+1] / 2^J`` the
periodised basis is the same window of ``L-1`` shifted scaling functions, so
the window is evaluated once on local nodes ``s`` in ``[0, 1]`` and reused
for every cell.  The right endpoint ``s = 1`` is taken as the left limit of
the window, which keeps the rule exact for piecewise-constant bases such as
Haar.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from . import censoring
from .censoring import CensoredSample
from .errors import NonConvergent
from .wavelet_basis import DEFAULT_DEPTH, scaling_window

RULES = ("trapezoid", "simpson")
MIN_POINTS = 1024
DOUBLING_TOL = 1e-6


@dataclass(frozen=True)
class QuadratureSpec:
    """Total number of abscissae over [0, 1] and the composite rule."""

    points: int = MIN_POINTS
    rule: str = "trapezoid"

    def __post_init__(self):
        if self.points < MIN_POINTS:
            raise ValueError(f"quadrature needs at least {MIN_POINTS} points, got {self.points}")
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}; choose from {RULES}")


def default_quadrature(J, rule="trapezoid"):
    return QuadratureSpec(2 ** (J + 13), rule)


def _cell_nodes(per_cell, rule):
    s = np.linspace(0.0, 1.0, per_cell + 1)
    h = 1.0 / per_cell
    if rule == "trapezoid":
        q = np.full(per_cell + 1, h)
        q[[0, -1]] = h / 2
    else:
        q = np.full(per_cell + 1, 2 * h / 3)
        q[1::2] = 4 * h / 3
        q[[0, -1]] = h / 3
    return s, q


def _window(filt, s, depth):
    # t = 1.0 expands to all-one digits, so the DL product gives the left limit
    return scaling_window(filt, s, depth)


class _CellQuadrature:
    def __init__(self, filt, J, points, rule, depth):
        size = 2 ** J
        per_cell = max(points // size, 2)
        if rule == "simpson" and per_cell % 2:
            per_cell += 1
        self.J, self.size = J, size
        self.s, self.q = _cell_nodes(per_cell, rule)
        self.W = _window(filt, self.s, depth) * 2.0 ** (J / 2.0)  # (nodes, L-1)
        self.x = (np.arange(size)[:, None] + self.s[None, :]) / size  # (cells, nodes)
        self.lag = np.arange(self.W.shape[1])

    def values(self, pdf):
        return np.asarray(pdf(self.x.ravel()), dtype=np.float64).reshape(self.x.shape)

    def coefficients(self, F):
        # cell m contributes to k = m - j (mod 2^J) through window column j
        A = (F * self.q[None, :]) @ self.W / self.size  # (cells, L-1)
        ks = np.mod(np.arange(self.size)[:, None] - self.lag[None, :], self.size)
        return np.bincount(ks.ravel(), weights=A.ravel(), minlength=self.size)

    def reconstruct(self, c):
        ks = np.mod(np.arange(self.size)[:, None] - self.lag[None, :], self.size)
        # (cells, nodes): sum_j c[k(m, j)] * W[node, j]
        return np.einsum("mj,nj->mn", c[ks], self.W)

    def integrate(self, G):
        return float((G * self.q[None, :]).sum() / self.size)


def _checked(filt, J, quad, depth, fn):
    coarse = fn(_CellQuadrature(filt, J, quad.points, quad.rule, depth))
    fine = fn(_CellQuadrature(filt, J, 2 * quad.points, quad.rule, depth))
    change = float(np.max(np.abs(np.atleast_1d(fine - coarse))))
    if change > DOUBLING_TOL:
        raise NonConvergent(
            f"doubling the quadrature changed the result by {change:.3g} (J={J}, {quad.points} points)"
        )
    return fine


def true_coefficients(pdf, filt, J, quad=None, depth=DEFAULT_DEPTH):
    """Quadrature values of ``int_0^1 pdf(x) phi^per_{J,k}(x) dx`` for all ``k``.

    Parameters
    ----------
    pdf : callable
        Vectorised function on [0, 1].
    filt : WaveletFilter
    J : int
    quad : QuadratureSpec, optional
        Defaults to ``2**(J + 13)`` trapezoid points.

    Returns
    -------
    ndarray
        The ``2**J`` coefficients, computed with ``2 * quad.points`` points.

    Raises
    ------
    NonConvergent
        If halving the point count moves any coefficient by more than 1e-6.
    """
    quad = quad or default_quadrature(J)
    return _checked(filt, J, quad, depth, lambda cq: cq.coefficients(cq.values(pdf)))


def projection_error(pdf, filt, J, quad=None, depth=DEFAULT_DEPTH):
    """L2 distance on [0, 1] between ``pdf`` and its level-``J`` projection."""
    quad = quad or default_quadrature(J)

    def err(cq):
        F = cq.values(pdf)
        R = F - cq.reconstruct(cq.coefficients(F))
        return np.sqrt(max(cq.integrate(R * R), 0.0))

    return float(_checked(filt, J, quad, depth, err))


def cascade_scaling(filt, levels=10):
    """``phi`` at ``k / 2**levels`` for ``k = 0 .. (L-1) 2**levels``.

    Integer values come from the eigenvalue-one eigenvector of the two-scale
    matrix on ``0 .. L-2`` (``phi(L-1) = 0`` under right continuity); every
    further level follows from
    ``phi(x) = sum_r c_r phi(2x - r)`` on the previous dyadic grid.
    """
    c = np.sqrt(2.0) * np.asarray(filt.h)
    L = len(c)
    n = L - 1
    M = np.array([[c[2 * i - j] if 0 <= 2 * i - j < L else 0.0 for j in range(n)] for i in range(n)])
    vals, vecs = np.linalg.eig(M)
    v = np.real(vecs[:, np.argmin(np.abs(vals - 1.0))])
    phi = np.append(v / v.sum(), 0.0)
    for level in range(1, levels + 1):
        half = 2 ** (level - 1)
        new = np.zeros((L - 1) * 2 * half + 1)
        new[::2] = phi  # points already on the coarser grid
        odd = np.arange(1, new.size, 2)
        # phi(m / 2^level) = sum_r c_r phi(m / 2^(level-1) - r), read off the coarse grid
        for r in range(L):
            src = odd - r * half
            ok = (src >= 0) & (src < phi.size)
            new[odd[ok]] += c[r] * phi[src[ok]]
        phi = new
    x = np.arange(phi.size) / 2.0 ** levels
    return x, phi


@dataclass
class KMCheckReport:
    max_n: int
    cases: int
    max_discrepancy: float
    worst_case: tuple = field(default=())

    def passed(self, tol=1e-12):
        return self.max_discrepancy <= tol


def rational_km(delta):
    """Exact ``(F, dF, G, inverse G-survival)`` for distinct ordered times.

    Each curve is the product-limit sum
    ``sum_{j<=i} ind_j / (N-j+1) * prod_{l<j} (1 - ind_l / (N-l+1))``.
    """
    n = len(delta)

    def curve(ind):
        total, surv, cdf, jumps = Fraction(0), Fraction(1), [], []
        for j, d in enumerate(ind):
            jump = Fraction(d, n - j) * surv
            surv *= 1 - Fraction(d, n - j)
            total += jump
            cdf.append(total)
            jumps.append(jump)
        return cdf, jumps

    F, dF = curve(delta)
    G, _ = curve([1 - d for d in delta])
    # left limit of 1 - G at the i-th point: survival just before it
    inv, surv = [], Fraction(1)
    for j, d in enumerate(delta):
        inv.append(1 / surv)
        surv *= 1 - Fraction(1 - d, n - j)
    return F, dF, G, inv


def exhaustive_km_check(max_n=6):
    """Compare the ``censoring`` module with exact arithmetic on every pattern.

    All ``delta`` in ``{0,1}^n`` for ``n = 1..max_n`` at times ``1..n``.
    Compared quantities: both KM curves, the event jumps, the inverse
    censoring survival and the IPCW jump identity ``w_i / N = dF_i``.
    """
    if not 1 <= max_n <= 6:
        raise ValueError("max_n must be between 1 and 6")
    worst, worst_case, cases = 0.0, (), 0
    for n in range(1, max_n + 1):
        y = np.arange(1, n + 1, dtype=np.float64)
        for delta in product((0, 1), repeat=n):
            cases += 1
            r = censoring.rank_sample(CensoredSample(y, np.array(delta)))
            F, dF, G, inv = rational_km(delta)
            got_inv = censoring.inverse_censoring_survival(r)
            pairs = [
                (censoring.km_event(r).cdf, F),
                (censoring.km_event(r).jumps, dF),
                (censoring.km_censoring(r).cdf, G),
                (got_inv, inv),
                (censoring.ipcw_weights(r) / n, dF),
            ]
            for got, want in pairs:
                d = max(abs(float(g) - float(w)) for g, w in zip(got, want))
                if d > worst:
                    worst, worst_case = d, delta
    return KMCheckReport(max_n, cases, worst, worst_case)
