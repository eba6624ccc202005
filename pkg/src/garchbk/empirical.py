"""Order statistics, empirical and quantile processes, and sup statistics.

Conventions: the empirical distribution function F_n is right-continuous
and the empirical quantile function Q_n(y) = X_{ceil(n y):n} is
left-continuous.  Process suprema always include both one-sided limits at
every jump, which is where a piecewise-monotone process attains them.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d


@dataclass(frozen=True, eq=False)
class SortedSample:
    """Order statistics of a sample."""

    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.shape[0] < 1:
            raise ValueError("sample must be a nonempty 1-d array")
        if np.any(np.diff(v) < 0):
            raise ValueError("values must be sorted; use SortedSample.from_data")

    @classmethod
    def from_data(cls, data) -> "SortedSample":
        return cls(np.sort(np.asarray(data, dtype=float)))

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class ProcessEvaluation:
    """A process evaluated on a grid, plus its sup including jump limits."""

    grid: np.ndarray
    values: np.ndarray
    sup_abs: float
    n: int


def _as_sorted(sample) -> SortedSample:
    if isinstance(sample, SortedSample):
        return sample
    return SortedSample.from_data(sample)


def ecdf(sample, x):
    """F_n(x) = #{X_i <= x} / n, right-continuous."""
    s = _as_sorted(sample)
    counts = np.searchsorted(s.values, np.asarray(x, dtype=float), side="right")
    return counts / s.n


def equantile(sample, y):
    """Q_n(y) = X_{ceil(n y):n} for y in (0, 1], left-continuous."""
    s = _as_sorted(sample)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0.0) or np.any(y > 1.0):
        raise ValueError("y must lie in (0, 1]")
    idx = np.ceil(s.n * y).astype(np.int64)
    np.clip(idx, 1, s.n, out=idx)
    out = s.values[idx - 1]
    return out if out.ndim else float(out)


def empirical_process(sample, cdf, grid) -> ProcessEvaluation:
    """beta_n(x) = sqrt(n)(F_n(x) - F(x)) on ``grid``.

    ``cdf`` must accept arrays.  The sup is taken over the grid values and
    over both one-sided limits at every order statistic.
    """
    s = _as_sorted(sample)
    n = s.n
    sn = math.sqrt(n)
    grid = np.asarray(grid, dtype=float)
    values = sn * (ecdf(s, grid) - np.asarray(cdf(grid), dtype=float))
    fx = np.asarray(cdf(s.values), dtype=float)
    lo = np.searchsorted(s.values, s.values, side="left") / n   # F_n(x-)
    hi = np.searchsorted(s.values, s.values, side="right") / n  # F_n(x)
    jump_sup = max(np.abs(sn * (lo - fx)).max(), np.abs(sn * (hi - fx)).max())
    sup = max(jump_sup, np.abs(values).max() if values.size else 0.0)
    return ProcessEvaluation(grid=grid, values=values, sup_abs=float(sup), n=n)


def quantile_process(sample, quantile, y_grid) -> ProcessEvaluation:
    """q_n(y) = sqrt(n)(Q(y) - Q_n(y)) on ``y_grid``.

    The sup additionally scans the jump points i/n inside the grid's range,
    from both sides; between jumps q_n is increasing in y so nothing else
    can carry the supremum.
    """
    s = _as_sorted(sample)
    n = s.n
    sn = math.sqrt(n)
    y_grid = np.asarray(y_grid, dtype=float)
    if np.any(y_grid <= 0.0) or np.any(y_grid > 1.0):
        raise ValueError("y_grid must lie in (0, 1]")
    values = sn * (np.asarray(quantile(y_grid), dtype=float) - equantile(s, y_grid))
    y_lo, y_hi = float(y_grid.min()), float(y_grid.max())
    i = np.arange(1, n + 1)
    yj = i / n
    keep = (yj >= y_lo) & (yj <= y_hi)
    sup = float(np.abs(values).max()) if values.size else 0.0
    if keep.any():
        yj = yj[keep]
        ij = i[keep]
        qy = np.asarray(quantile(yj), dtype=float)
        left = sn * (qy - s.values[ij - 1])
        right = sn * (qy - s.values[np.minimum(ij, n - 1)])
        sup = max(sup, np.abs(left).max(), np.abs(right).max())
    return ProcessEvaluation(grid=y_grid, values=values, sup_abs=sup, n=n)


def _uniform_two_sided(u_sorted: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """sqrt(n)-scaled gaps (i/n - U_(i)) and ((i-1)/n - U_(i))."""
    n = u_sorted.shape[0]
    sn = math.sqrt(n)
    i = np.arange(1, n + 1)
    return sn * (i / n - u_sorted), sn * ((i - 1) / n - u_sorted)


def uniform_processes(u_sample) -> tuple[ProcessEvaluation, ProcessEvaluation]:
    """alpha_n and gamma_n of a sample with entries in [0, 1].

    alpha_n(x) = sqrt(n)(E_n(x) - x) is evaluated at the order statistics,
    gamma_n(y) = sqrt(n)(y - G_n(y)) at the points i/n.  Their sups agree
    identically: both ranges are the same two-sided gap set.
    """
    u = np.asarray(u_sample, dtype=float)
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("uniform-scale sample must lie in [0, 1]")
    us = np.sort(u)
    n = us.shape[0]
    sn = math.sqrt(n)
    hi, lo = _uniform_two_sided(us)
    sup = float(max(np.abs(hi).max(), np.abs(lo).max()))
    alpha_values = sn * (ecdf(us, us) - us)  # equals hi unless there are ties
    alpha = ProcessEvaluation(grid=us, values=alpha_values, sup_abs=sup, n=n)
    i = np.arange(1, n + 1)
    gamma = ProcessEvaluation(grid=i / n, values=hi, sup_abs=sup, n=n)
    return alpha, gamma


def oscillation_statistic(sample, cdf=None, lambda_n=None) -> float:
    """Sup of centered empirical-CDF increments over width-lambda_n windows.

    Works in the uniform scale: when ``cdf`` is given the sample is mapped
    through it first, otherwise entries must already lie in [0, 1].  The sup
    is discretized on a grid of spacing b_n* = n^{-1/2} b_n, comparing every
    pair of grid points at most lambda_n apart.  ``lambda_n`` can be
    overridden to study other window widths.
    """
    from .bahadur import rate_constants

    s = _as_sorted(sample)
    n = s.n
    rc = rate_constants(n)
    if lambda_n is None:
        lambda_n = rc.lambda_n
    u = s.values if cdf is None else np.sort(np.asarray(cdf(s.values), dtype=float))
    if u[0] < 0.0 or u[-1] > 1.0:
        raise ValueError("uniform-scale sample must lie in [0, 1]")
    spacing = rc.b_n_star
    e_n = int(1.0 / spacing) + 1
    d_n = int(lambda_n / spacing) + 1
    k = np.arange(e_n + d_n + 1)
    pts = np.minimum(k * spacing, 1.0)
    a = np.searchsorted(u, pts, side="right") / n - pts
    # max |a_k - a_l| over |k - l| <= d_n via sliding window extrema
    w = d_n + 1
    origin = -(d_n // 2)
    wmin = minimum_filter1d(a, size=w, mode="nearest", origin=origin)
    wmax = maximum_filter1d(a, size=w, mode="nearest", origin=origin)
    return float(max((a - wmin).max(), (wmax - a).max()))


def lil_statistic(process_eval, n: int | None = None) -> float:
    """(loglog n)^{-1/2} times the process sup.

    Accepts a :class:`ProcessEvaluation` or a bare sup value (then ``n`` is
    required).  Only defined for n >= 16.
    """
    if isinstance(process_eval, ProcessEvaluation):
        sup, n = process_eval.sup_abs, process_eval.n
    else:
        sup = float(process_eval)
        if n is None:
            raise ValueError("n is required when passing a bare sup value")
    if n < 16:
        raise ValueError("n must be at least 16")
    return sup / math.sqrt(math.log(math.log(n)))
