"""Stationary marginal of the process as a Monte Carlo scale mixture.

The marginal distribution function is F(x) = E H(x / sigma) with sigma the
stationary volatility, so an i.i.d.-ish sample of sigma draws turns F, f
and Q into finite mixtures that can be evaluated to machine precision.
Draws come from one long simulated path, thinned to reduce serial
dependence.  Exact mixture evaluation is O(M) per point, so the model also
carries a monotone interpolation cache on an adaptive grid (refined where
the density is large) for bulk work such as the probability integral
transform; the cache is accurate to roughly 1e-8 while bulk statistics only
need 1e-4.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

from .garch import GarchParams, PathSample, simulate
from .innovations import InnovationModel

# target probability gap between adjacent grid nodes
_GRID_DF = 2.5e-4
_GRID_INIT = 1025
_GRID_MAX = 20_000
_TAIL_EPS = 1e-11
# clipping floor for the probability integral transform
_PIT_EPS = 1e-12
# elements per chunk when broadcasting x against the sigma draws
_CHUNK = 4_000_000


def _is_scalar(x) -> bool:
    return np.isscalar(x) or np.ndim(x) == 0


@dataclass(frozen=True, eq=False)
class MarginalModel:
    """Finite scale-mixture model of the stationary marginal.

    Attributes
    ----------
    sigma_draws : ndarray
        Thinned stationary volatility draws, all at least sqrt(delta).
    innovation : InnovationModel
        The innovation law H.
    delta : float or None
        Recursion constant, when known; used for the sqrt(delta) floor.
    seed, gap : int
        Provenance of the draws.  ``seed`` is compared against path seeds to
        enforce the fresh-path contract downstream.
    """

    sigma_draws: np.ndarray
    innovation: InnovationModel
    delta: float | None = None
    seed: int = -1
    gap: int = 0
    grid_x: np.ndarray = field(default=None, repr=False)
    grid_cdf: np.ndarray = field(default=None, repr=False)
    grid_pdf: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        sig = np.ascontiguousarray(self.sigma_draws, dtype=float)
        object.__setattr__(self, "sigma_draws", sig)
        if sig.ndim != 1 or sig.shape[0] < 1:
            raise ValueError("sigma_draws must be a nonempty 1-d array")
        if np.any(sig <= 0.0):
            raise ValueError("sigma draws must be positive")
        if self.delta is not None and np.any(sig < math.sqrt(self.delta) * (1 - 1e-12)):
            raise ValueError("sigma draws below sqrt(delta)")
        if self.grid_x is None:
            gx, gF, gf = self._build_grid()
            object.__setattr__(self, "grid_x", gx)
            object.__setattr__(self, "grid_cdf", gF)
            object.__setattr__(self, "grid_pdf", gf)
        self._rebuild_interpolators()

    def _rebuild_interpolators(self):
        object.__setattr__(self, "_cdf_i", PchipInterpolator(self.grid_x, self.grid_cdf))
        object.__setattr__(self, "_pdf_i", PchipInterpolator(self.grid_x, self.grid_pdf))
        Fu, idx = np.unique(self.grid_cdf, return_index=True)
        object.__setattr__(self, "_q_i", PchipInterpolator(Fu, self.grid_x[idx]))
        object.__setattr__(self, "_F_lo", float(self.grid_cdf[0]))
        object.__setattr__(self, "_F_hi", float(self.grid_cdf[-1]))

    def _build_grid(self):
        sig_max = float(self.sigma_draws.max())
        # widest component quantile keeps the whole mixture tail below _TAIL_EPS
        z_hi = float(self._inv_h(1.0 - _TAIL_EPS))
        hi = z_hi * sig_max
        xs = np.linspace(-hi, hi, _GRID_INIT)
        Fs = np.atleast_1d(self.cdf(xs))
        while xs.shape[0] < _GRID_MAX:
            bad = np.nonzero(np.diff(Fs) > _GRID_DF)[0]
            if bad.size == 0:
                break
            mids = 0.5 * (xs[bad] + xs[bad + 1])
            xs = np.concatenate([xs, mids])
            Fs = np.concatenate([Fs, np.atleast_1d(self.cdf(mids))])
            order = np.argsort(xs)
            xs, Fs = xs[order], Fs[order]
        if np.any(np.diff(Fs) < 0.0):
            raise AssertionError("mixture cdf not monotone on grid")
        return xs, Fs, np.atleast_1d(self.pdf(xs))

    def _inv_h(self, y: float) -> float:
        # quantile of the innovation law itself, for grid sizing only
        if self.innovation.family == "gaussian":
            return special.ndtri(y)
        return self.innovation._t_scale * special.stdtrit(self.innovation.df, y)

    # ---------------- exact mixture evaluation ----------------

    def cdf(self, x):
        """F(x) = mean_j H(x / sigma_j), exact mixture evaluation."""
        scalar = _is_scalar(x)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        sig = self.sigma_draws
        out = np.empty(x.shape[0])
        step = max(1, _CHUNK // sig.shape[0])
        for i in range(0, x.shape[0], step):
            seg = x[i : i + step]
            out[i : i + step] = self.innovation.cdf(
                seg[:, None] / sig[None, :]
            ).mean(axis=1)
        return float(out[0]) if scalar else out

    def pdf(self, x):
        """f(x) = mean_j h(x / sigma_j) / sigma_j, exact mixture evaluation."""
        scalar = _is_scalar(x)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        sig = self.sigma_draws
        out = np.empty(x.shape[0])
        step = max(1, _CHUNK // sig.shape[0])
        for i in range(0, x.shape[0], step):
            seg = x[i : i + step]
            out[i : i + step] = (
                self.innovation.pdf(seg[:, None] / sig[None, :]) / sig[None, :]
            ).mean(axis=1)
        return float(out[0]) if scalar else out

    def quantile(self, y, tol: float = 1e-10):
        """Q(y) for y in (0,1), bisection against the exact mixture cdf.

        The returned x satisfies |F(x) - y| <= tol; iteration actually
        continues to an x-width of 1e-13 * max(1, |x|), so inverse
        round-trips are sharp.  The cached inverse provides the initial
        bracket, exact evaluations do the rest.
        """
        scalar = _is_scalar(y)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(y <= 0.0) or np.any(y >= 1.0):
            raise ValueError("quantile levels must lie in (0, 1)")
        x0 = np.atleast_1d(self.quantile_cached(y))
        w = 1e-6 * np.maximum(1.0, np.abs(x0))
        lo, hi = x0 - w, x0 + w
        for _ in range(80):
            bad = np.atleast_1d(self.cdf(lo)) > y
            if not bad.any():
                break
            lo[bad] -= w[bad]
            w[bad] *= 4.0
        else:
            raise RuntimeError("quantile bracketing failed on the low side")
        w = 1e-6 * np.maximum(1.0, np.abs(x0))
        for _ in range(80):
            bad = np.atleast_1d(self.cdf(hi)) < y
            if not bad.any():
                break
            hi[bad] += w[bad]
            w[bad] *= 4.0
        else:
            raise RuntimeError("quantile bracketing failed on the high side")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if np.all(hi - lo <= 1e-13 * np.maximum(1.0, np.abs(mid))):
                break
            take_hi = np.atleast_1d(self.cdf(mid)) < y
            lo = np.where(take_hi, mid, lo)
            hi = np.where(take_hi, hi, mid)
        out = 0.5 * (lo + hi)
        return float(out[0]) if scalar else out

    # ---------------- cached bulk evaluation ----------------

    def cdf_cached(self, x):
        """Interpolated F, monotone, within ~1e-8 of the exact mixture."""
        x = np.asarray(x, dtype=float)
        clipped = np.clip(x, self.grid_x[0], self.grid_x[-1])
        return np.clip(self._cdf_i(clipped), 0.0, 1.0)

    def pdf_cached(self, x):
        x = np.asarray(x, dtype=float)
        clipped = np.clip(x, self.grid_x[0], self.grid_x[-1])
        return np.maximum(self._pdf_i(clipped), 0.0)

    def quantile_cached(self, y):
        y = np.asarray(y, dtype=float)
        return self._q_i(np.clip(y, self._F_lo, self._F_hi))

    # ---------------- persistence ----------------

    def save(self, path):
        """Serialize draws, provenance, and the grid cache to .npz."""
        np.savez(
            path,
            sigma_draws=self.sigma_draws,
            family=np.array(self.innovation.family),
            df=np.array(np.nan if self.innovation.df is None else self.innovation.df),
            delta=np.array(np.nan if self.delta is None else self.delta),
            seed=np.array(self.seed, dtype=np.int64),
            gap=np.array(self.gap, dtype=np.int64),
            grid_x=self.grid_x,
            grid_cdf=self.grid_cdf,
            grid_pdf=self.grid_pdf,
        )

    @classmethod
    def load(cls, path) -> "MarginalModel":
        with np.load(path) as z:
            df = float(z["df"])
            innov = InnovationModel(
                family=str(z["family"]), df=None if math.isnan(df) else df
            )
            delta = float(z["delta"])
            return cls(
                sigma_draws=z["sigma_draws"],
                innovation=innov,
                delta=None if math.isnan(delta) else delta,
                seed=int(z["seed"]),
                gap=int(z["gap"]),
                grid_x=z["grid_x"],
                grid_cdf=z["grid_cdf"],
                grid_pdf=z["grid_pdf"],
            )


def build_marginal(
    params: GarchParams,
    model: InnovationModel,
    m_draws: int = 100_000,
    gap: int = 50,
    seed: int = 0,
    burn_in: int = 10_000,
) -> MarginalModel:
    """Build the marginal model from one long thinned path.

    Takes a volatility draw every ``gap`` steps after burn-in; the thinning
    keeps the draws nearly independent so the mixture error scales like
    1/sqrt(m_draws).  Deterministic in ``seed``; non-stationary parameters
    are rejected.
    """
    if m_draws < 10_000:
        raise ValueError("m_draws must be at least 10000")
    if gap < 1:
        raise ValueError("gap must be at least 1")
    path = simulate(params, model, n=m_draws * gap, seed=seed, burn_in=burn_in)
    sigma = np.sqrt(path.sigma2[gap - 1 :: gap])
    return MarginalModel(
        sigma_draws=sigma, innovation=model, delta=params.delta,
        seed=int(seed), gap=int(gap),
    )


def pit(path: PathSample, marginal: MarginalModel) -> np.ndarray:
    """Probability integral transform U_i = F(X_i), entries in (0, 1).

    Uses the cached monotone interpolant, so order is preserved exactly.
    The path must be fresh: reusing the marginal's own build seed is
    rejected.
    """
    if path.seed == marginal.seed:
        raise ValueError(
            "path seed equals the marginal build seed; use a fresh path"
        )
    u = marginal.cdf_cached(path.x)
    return np.clip(u, _PIT_EPS, 1.0 - _PIT_EPS)
