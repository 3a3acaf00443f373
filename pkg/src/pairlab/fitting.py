"""Log-log least-squares exponent fits with t-based confidence intervals."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    ci: tuple[float, float]
    r2: float
    npoints: int

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.ci[1] - self.ci[0])

    def excludes_zero(self) -> bool:
        return self.ci[0] > 0 or self.ci[1] < 0

    def as_dict(self) -> dict:
        out = asdict(self)
        out["ci"] = list(self.ci)
        return out


def fit_exponent(x, y, level: float = 0.95) -> FitResult:
    """Fit log y = intercept + slope log x.

    The confidence interval on the slope uses the residual variance and a
    Student t quantile with n-2 degrees of freedom; with three points or an
    exact power law the interval collapses accordingly.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1D arrays of equal length")
    if len(x) < 3:
        raise ValueError("at least three points are needed")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("fit_exponent needs strictly positive values")
    lx, ly = np.log(x), np.log(y)
    n = len(lx)
    A = np.vstack([lx, np.ones(n)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = ly - A @ coef
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    dof = n - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    se = np.sqrt(s2 / sxx) if sxx > 0 else np.inf
    q = stats.t.ppf(0.5 + level / 2, dof) if dof > 0 else np.inf
    half = float(q * se) if se > 0 else 0.0
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 1.0
    return FitResult(slope, intercept, (slope - half, slope + half), r2, n)


def strictly_decreasing(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) < 0))
