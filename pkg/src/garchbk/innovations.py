"""Innovation distributions driving the volatility recursion.

Two unit-variance families are supported: the standard Gaussian and a
rescaled Student-t with more than four degrees of freedom.  Both expose the
distribution function H, the density h, its derivative h', the fourth
moment, and a reproducible inversion sampler.  The finite-fourth-moment
restriction is enforced at construction time, so downstream code never has
to re-check it.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

# smallest positive double; keeps inversion finite if the generator emits 0.0
_U_FLOOR = 5e-324

_FAMILIES = ("gaussian", "student_t")


@dataclass(frozen=True)
class InnovationModel:
    """Unit-variance innovation law.

    Parameters
    ----------
    family : str
        Either ``"gaussian"`` or ``"student_t"``.
    df : float, optional
        Degrees of freedom, required for ``student_t`` and must exceed 4 so
        that the fourth moment is finite.  The t variate is pre-scaled by
        sqrt((df - 2) / df) to unit variance.
    """

    family: str
    df: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown innovation family {self.family!r}")
        if self.family == "student_t":
            if self.df is None:
                raise ValueError("student_t innovations need df")
            if not self.df > 4.0:
                raise ValueError(
                    f"student_t df must exceed 4 for a finite fourth moment, got {self.df}"
                )
        elif self.df is not None:
            raise ValueError("df is only meaningful for student_t")

    @property
    def _t_scale(self) -> float:
        # sqrt((df - 2) / df), the factor taking a t variate to unit variance
        return math.sqrt((self.df - 2.0) / self.df)

    def sample(self, seed: int, n: int) -> np.ndarray:
        """Draw ``n`` i.i.d. innovations, deterministic in ``seed``.

        Sampling inverts the distribution function on PCG64 uniforms rather
        than using rejection, so a given (model, seed) pair reproduces the
        identical stream on any platform.
        """
        if n < 1:
            raise ValueError("n must be at least 1")
        u = np.random.default_rng(seed).random(n)
        np.maximum(u, _U_FLOOR, out=u)
        if self.family == "gaussian":
            return special.ndtri(u)
        return self._t_scale * special.stdtrit(self.df, u)

    def cdf(self, x):
        """Distribution function H(x)."""
        x = np.asarray(x, dtype=float)
        if self.family == "gaussian":
            return special.ndtr(x)
        return special.stdtr(self.df, x / self._t_scale)

    def pdf(self, x):
        """Density h(x)."""
        x = np.asarray(x, dtype=float)
        if self.family == "gaussian":
            return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        c = self._t_scale
        return self._t_pdf(x / c) / c

    def pdf_deriv(self, x):
        """Analytic derivative h'(x)."""
        x = np.asarray(x, dtype=float)
        if self.family == "gaussian":
            return -x * np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        c = self._t_scale
        t = x / c
        # f'(t) = f(t) * (-(df+1) t / (df + t^2))
        return self._t_pdf(t) * (-(self.df + 1.0) * t / (self.df + t * t)) / (c * c)

    def fourth_moment(self) -> float:
        """E eps^4, exact for the family."""
        if self.family == "gaussian":
            return 3.0
        return 3.0 * (self.df - 2.0) / (self.df - 4.0)

    def _t_pdf(self, t):
        df = self.df
        lognc = (
            math.lgamma((df + 1.0) / 2.0)
            - math.lgamma(df / 2.0)
            - 0.5 * math.log(df * math.pi)
        )
        return np.exp(lognc - 0.5 * (df + 1.0) * np.log1p(t * t / df))

    def spec(self) -> dict:
        """Configuration-file form, ``{"family": ..., "df": ...}``."""
        if self.family == "student_t":
            return {"family": self.family, "df": self.df}
        return {"family": self.family}

    @classmethod
    def from_spec(cls, spec: dict) -> "InnovationModel":
        """Build a model from its configuration-file form."""
        extra = set(spec) - {"family", "df"}
        if extra:
            raise ValueError(f"unknown innovation keys: {sorted(extra)}")
        if "family" not in spec:
            raise ValueError("innovation spec needs a family")
        return cls(family=spec["family"], df=spec.get("df"))


def gaussian() -> InnovationModel:
    """Standard Gaussian innovations."""
    return InnovationModel("gaussian")


def student_t(df: float) -> InnovationModel:
    """Unit-variance rescaled Student-t innovations, df > 4."""
    return InnovationModel("student_t", df=float(df))
