"""Bahadur-Kiefer remainders, rate constants, and the rate-exponent fit.

The uniform remainder R_n = sup |gamma_n - alpha_n| and its general-F
analogue sup |f(Q(y)) q_n(y) - alpha_n(y)| both decay like
n^{-1/4} (log n)^{1/2} (loglog n)^{1/4}; this module computes them exactly
per path and fits the observed log-log rate across sample sizes.

Both statistics are piecewise monotone in y between the jump points of the
empirical quantile function (i/n) and of the empirical CDF of the
transformed sample (U_(i)), so the supremum over the continuum is attained
at the one-sided limits at those points.  All evaluations below enumerate
that candidate set; no search grid is involved.
"""

import math
from dataclasses import dataclass

import numpy as np

from .empirical import lil_statistic, oscillation_statistic
from .garch import PathSample
from .marginal import MarginalModel, pit


@dataclass(frozen=True)
class RateConstants:
    """The rate and window constants at a given n."""

    n: int
    r_n: float       # n^{-1/4} (log n)^{1/2} (loglog n)^{1/4}
    b_n: float       # n^{-3/4} (log n)^{1/2} (loglog n)^{1/4}
    b_n_star: float  # n^{-1/2} b_n
    lambda_n: float  # n^{-1/2} (2 loglog n)^{1/2}


def rate_constants(n: int) -> RateConstants:
    """Evaluate the rate constants; requires n >= 16 so loglog n > 0."""
    if n < 16:
        raise ValueError("rate constants need n >= 16")
    ln = math.log(n)
    lln = math.log(ln)
    b_n = n ** -0.75 * ln ** 0.5 * lln ** 0.25
    return RateConstants(
        n=int(n),
        r_n=math.sqrt(n) * b_n,
        b_n=b_n,
        b_n_star=b_n / math.sqrt(n),
        lambda_n=math.sqrt(2.0 * lln / n),
    )


@dataclass(frozen=True)
class BkResult:
    """Per-path remainder statistics.

    ``r_general`` is restricted to the working interval; ``r_general_full``
    scans the candidate set over all of (0, 1) and is reported separately
    because the general-F result is only guaranteed on interior intervals.
    """

    n: int
    seed: int
    r_uniform: float
    r_general: float
    sup_beta: float
    oscillation: float
    lil: float
    r_general_full: float

    def __post_init__(self):
        for name in ("r_uniform", "r_general", "sup_beta", "oscillation",
                     "lil", "r_general_full"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")


def kiefer_remainder(u_sample) -> float:
    """sup over (0, 1] of |gamma_n(y) - alpha_n(y)| for a uniform-scale sample.

    The difference equals sqrt(n) (2y - G_n(y) - E_n(y)), linear with slope
    2 sqrt(n) between breakpoints, so the candidates are the one-sided
    limits at every i/n and every order statistic, plus the y -> 0 limit.
    """
    us = np.sort(np.asarray(u_sample, dtype=float))
    if us[0] < 0.0 or us[-1] > 1.0:
        raise ValueError("uniform-scale sample must lie in [0, 1]")
    n = us.shape[0]
    sn = math.sqrt(n)
    i = np.arange(1, n + 1)

    best = abs(sn * (0.0 - us[0]))  # y -> 0+ limit
    y = i / n
    e_lo = np.searchsorted(us, y, side="left") / n
    e_hi = np.searchsorted(us, y, side="right") / n
    g_at = us[i - 1]                      # G_n left-continuous at i/n
    g_right = us[np.minimum(i, n - 1)]    # right limit, undefined past y=1
    for d in (
        sn * (2.0 * y - g_at - e_lo),
        sn * (2.0 * y - g_at - e_hi),
        sn * (2.0 * y[:-1] - g_right[:-1] - e_hi[:-1]),
    ):
        best = max(best, float(np.abs(d).max()))

    k_at = np.clip(np.ceil(n * us).astype(np.int64), 1, n)
    k_right = np.clip(np.floor(n * us).astype(np.int64) + 1, 1, n)
    e_lo = np.searchsorted(us, us, side="left") / n
    e_hi = np.searchsorted(us, us, side="right") / n
    for d in (
        sn * (2.0 * us - us[k_at - 1] - e_lo),
        sn * (2.0 * us - us[k_right - 1] - e_hi),
    ):
        best = max(best, float(np.abs(d).max()))
    return best


def _general_remainder(
    us: np.ndarray,
    xs: np.ndarray,
    marginal: MarginalModel,
    y_lo: float,
    y_hi: float,
) -> float:
    """sup over [y_lo, y_hi] of |f(Q(y)) q_n(y) - alpha_n(y)|.

    ``us`` and ``xs`` are the sorted transformed and raw samples.  Q and f
    are the marginal's cached evaluators, consistent with the transform that
    produced ``us``.
    """
    n = us.shape[0]
    sn = math.sqrt(n)

    def eval_at(y, e_side, qn_idx):
        q = np.atleast_1d(marginal.quantile_cached(y))
        fq = np.atleast_1d(marginal.pdf_cached(q))
        e = np.searchsorted(us, y, side=e_side) / n
        d = fq * sn * (q - xs[qn_idx]) - sn * (e - y)
        return float(np.abs(d).max()) if d.size else 0.0

    best = 0.0
    i = np.arange(1, n + 1)
    y = i / n
    keep = (y >= y_lo) & (y <= y_hi)
    if keep.any():
        yk, ik = y[keep], i[keep]
        best = max(best, eval_at(yk, "left", ik - 1))
        best = max(best, eval_at(yk, "right", np.minimum(ik, n - 1)))
    keep = (us >= y_lo) & (us <= y_hi)
    if keep.any():
        yk = us[keep]
        k_at = np.clip(np.ceil(n * yk).astype(np.int64), 1, n)
        k_right = np.clip(np.floor(n * yk).astype(np.int64) + 1, 1, n)
        best = max(best, eval_at(yk, "left", k_at - 1))
        best = max(best, eval_at(yk, "right", k_right - 1))
    for y_end in (y_lo, y_hi):
        k = min(max(int(math.ceil(n * y_end)), 1), n)
        best = max(best, eval_at(np.array([y_end]), "right", np.array([k - 1])))
    return best


def bk_remainder(
    path: PathSample,
    marginal: MarginalModel,
    interval: tuple[float, float] = (0.05, 0.95),
) -> BkResult:
    """All remainder statistics of one path against its marginal model.

    Computes U = F(X), the uniform remainder over the full interval, the
    density-weighted general remainder over ``interval`` (and over (0, 1)
    as ``r_general_full``), the sup of the empirical process, the
    oscillation statistic, and the iterated-logarithm-normalized sup.
    """
    n = path.n
    if n < 16:
        raise ValueError("remainder statistics need n >= 16")
    y_lo, y_hi = float(interval[0]), float(interval[1])
    if not 0.0 < y_lo < y_hi < 1.0:
        raise ValueError("interval must satisfy 0 < y_lo < y_hi < 1")
    u = pit(path, marginal)
    us = np.sort(u)
    xs = np.sort(path.x)
    sn = math.sqrt(n)
    i = np.arange(1, n + 1)
    sup_beta = float(
        max(
            np.abs(sn * (i / n - us)).max(),
            np.abs(sn * ((i - 1) / n - us)).max(),
        )
    )
    tiny = 1.0 / (2.0 * n)
    return BkResult(
        n=n,
        seed=path.seed,
        r_uniform=kiefer_remainder(us),
        r_general=_general_remainder(us, xs, marginal, y_lo, y_hi),
        r_general_full=_general_remainder(us, xs, marginal, tiny, 1.0 - tiny),
        sup_beta=sup_beta,
        oscillation=oscillation_statistic(us),
        lil=lil_statistic(sup_beta, n),
    )


@dataclass(frozen=True)
class RateFit:
    exponent: float
    intercept: float
    ratios: tuple[tuple[int, float], ...]  # (n, statistic / r_n)


def rate_fit(results: list[tuple[int, float]]) -> RateFit:
    """Least-squares slope of log(statistic) against log(n).

    ``results`` holds (n, summary statistic) pairs, one per sample size,
    the summary being a replication median.  Needs at least three distinct
    n values.  Also returns the per-n ratios statistic / r_n.
    """
    if len({n for n, _ in results}) < 3:
        raise ValueError("rate fit needs at least 3 distinct n values")
    ns = np.array([n for n, _ in results], dtype=float)
    vals = np.array([v for _, v in results], dtype=float)
    if np.any(vals <= 0.0):
        raise ValueError("statistics must be positive for a log-log fit")
    slope, intercept = np.polyfit(np.log(ns), np.log(vals), 1)
    ratios = tuple(
        (int(n), float(v / rate_constants(int(n)).r_n)) for n, v in results
    )
    return RateFit(exponent=float(slope), intercept=float(intercept), ratios=ratios)
