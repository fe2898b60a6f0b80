"""Numerical kernel: distribution functions, quantiles, dense linear algebra,
weighted least squares, and a derivative-free simplex optimizer.

Distribution functions are implemented on top of the regularized incomplete
beta and gamma functions (continued fractions with series fallback), so the
package carries no runtime dependency on scipy. numpy is used as the dense
linear-algebra backend behind the interfaces defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NotPositiveDefiniteError",
    "OptimizerResult",
    "SymmetricMatrix",
    "chisq_sf",
    "cholesky",
    "nelder_mead",
    "normal_cdf",
    "normal_quantile",
    "regularized_incomplete_beta",
    "regularized_lower_gamma",
    "regularized_upper_gamma",
    "t_cdf",
    "t_quantile",
    "wls_solve",
]

_MAX_ITER = 300
_EPS = 1e-15
_TINY = 1e-300


# ---------------------------------------------------------------------------
# normal distribution
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF, accurate to well below 1e-12."""
    if not math.isfinite(x):
        raise ValueError(f"normal_cdf requires finite x, got {x!r}")
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF (Wichura's AS 241, PPND16).

    Pure rational arithmetic, no table lookups: the same inputs produce the
    same bits on every platform, which the simulation module relies on for
    reproducible inverse-CDF sampling.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"normal_quantile requires p in (0, 1), got {p!r}")
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    r = p if q < 0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    value = num / den
    return -value if q < 0 else value


# ---------------------------------------------------------------------------
# regularized incomplete beta / gamma
# ---------------------------------------------------------------------------

def _beta_cont_frac(a: float, b: float, x: float) -> float:
    """Lentz's continued fraction for the incomplete beta function."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction failed for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if a <= 0 or b <= 0:
        raise ValueError(f"beta parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    # continued fraction converges fastest below the distribution mode
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def _gamma_series(s: float, x: float) -> float:
    """Series expansion of the regularized lower incomplete gamma P(s, x)."""
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(_MAX_ITER * 3):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + s * math.log(x) - math.lgamma(s))
    raise ArithmeticError(f"incomplete gamma series failed for s={s}, x={x}")


def _gamma_cont_frac(s: float, x: float) -> float:
    """Lentz's continued fraction for the regularized upper gamma Q(s, x)."""
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER * 3):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(-x + s * math.log(x) - math.lgamma(s))
    raise ArithmeticError(f"incomplete gamma continued fraction failed for s={s}, x={x}")


def regularized_lower_gamma(s: float, x: float) -> float:
    """P(s, x), the regularized lower incomplete gamma function."""
    if s <= 0:
        raise ValueError(f"shape must be positive, got {s!r}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return _gamma_series(s, x)
    return 1.0 - _gamma_cont_frac(s, x)


def regularized_upper_gamma(s: float, x: float) -> float:
    """Q(s, x) = 1 - P(s, x), computed without cancellation for large x."""
    if s <= 0:
        raise ValueError(f"shape must be positive, got {s!r}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    if x == 0.0:
        return 1.0
    if x < s + 1.0:
        return 1.0 - _gamma_series(s, x)
    return _gamma_cont_frac(s, x)


# ---------------------------------------------------------------------------
# t and chi-square distributions
# ---------------------------------------------------------------------------

def t_cdf(x: float, df: float) -> float:
    """CDF of Student's t with `df` degrees of freedom."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df!r}")
    if not math.isfinite(x):
        raise ValueError(f"t_cdf requires finite x, got {x!r}")
    if x == 0.0:
        return 0.5
    tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, df / (df + x * x))
    return 1.0 - tail if x > 0 else tail


def t_sf(x: float, df: float) -> float:
    """Upper tail P(T > x) of Student's t, stable for large x."""
    return t_cdf(-x, df)


def t_quantile(p: float, df: float) -> float:
    """Inverse CDF of Student's t, inverted to ~1e-12 by bracketed bisection."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"t_quantile requires p in (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    # symmetry: solve in the upper half only
    if p < 0.5:
        return -t_quantile(1.0 - p, df)
    lo, hi = 0.0, 1.0
    while t_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError(f"t_quantile bracket failed for p={p}, df={df}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chisq_sf(x: float, df: float) -> float:
    """Survival function P(X > x) of the chi-square distribution."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df!r}")
    if x < 0:
        raise ValueError(f"chi-square statistic must be nonnegative, got {x!r}")
    return regularized_upper_gamma(0.5 * df, 0.5 * x)


# ---------------------------------------------------------------------------
# dense linear algebra
# ---------------------------------------------------------------------------

class NotPositiveDefiniteError(ValueError):
    """Raised when a Cholesky pivot fails; carries the offending pivot index."""

    def __init__(self, pivot_index: int):
        self.pivot_index = pivot_index
        super().__init__(f"matrix is not positive definite (pivot {pivot_index})")


@dataclass(frozen=True)
class SymmetricMatrix:
    """Symmetric matrix stored as the row-major lower triangle."""

    order: int
    entries: tuple[float, ...]

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        expected = self.order * (self.order + 1) // 2
        if len(self.entries) != expected:
            raise ValueError(f"expected {expected} lower-triangle entries, got {len(self.entries)}")

    @classmethod
    def from_dense(cls, a: np.ndarray) -> "SymmetricMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.allclose(a, a.T, rtol=1e-10, atol=1e-12):
            raise ValueError("matrix is not symmetric")
        n = a.shape[0]
        return cls(n, tuple(a[i, j] for i in range(n) for j in range(i + 1)))

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.order, self.order))
        k = 0
        for i in range(self.order):
            for j in range(i + 1):
                a[i, j] = a[j, i] = self.entries[k]
                k += 1
        return a


def _locate_bad_pivot(a: np.ndarray) -> int:
    """Run the textbook factorization to report which pivot goes nonpositive."""
    n = a.shape[0]
    l = np.zeros_like(a)
    for j in range(n):
        s = a[j, j] - np.dot(l[j, :j], l[j, :j])
        if s <= 0.0 or not math.isfinite(s):
            return j
        l[j, j] = math.sqrt(s)
        if j + 1 < n:
            l[j + 1:, j] = (a[j + 1:, j] - l[j + 1:, :j] @ l[j, :j]) / l[j, j]
    return n - 1


def cholesky(a: np.ndarray | SymmetricMatrix) -> np.ndarray:
    """Lower-triangular factor L with L @ L.T == a.

    Raises NotPositiveDefiniteError with the failing pivot index when the
    input is not positive definite.
    """
    if isinstance(a, SymmetricMatrix):
        a = a.to_dense()
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(_locate_bad_pivot(a)) from None


def wls_solve(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weighted least squares: minimize sum(w * (y - X b)**2).

    Returns (coefficients, unscaled covariance (X'WX)^-1); callers apply
    their own scale convention to the covariance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if x.shape[0] != y.shape[0] or x.shape[0] != w.shape[0]:
        raise ValueError("X, y, and w must have matching first dimensions")
    sw = np.sqrt(w)
    xw = x * sw[:, None]
    yw = y * sw
    xtx = xw.T @ xw
    try:
        l = cholesky(xtx)
    except NotPositiveDefiniteError:
        raise ValueError("design matrix is rank deficient after weighting") from None
    beta = np.linalg.solve(l.T, np.linalg.solve(l, xw.T @ yw))
    linv = np.linalg.solve(l, np.eye(l.shape[0]))
    cov = linv.T @ linv
    return beta, cov


# ---------------------------------------------------------------------------
# Nelder-Mead simplex optimizer
# ---------------------------------------------------------------------------

@dataclass
class OptimizerResult:
    argmin: np.ndarray
    value: float
    iterations: int
    converged: bool
    # best criterion value after each iteration; monotone non-increasing
    history: list[float] = field(default_factory=list)


def nelder_mead(f, x0, tolerance: float = 1e-9, max_iter: int = 2000) -> OptimizerResult:
    """Minimize f from x0 with the Nelder-Mead simplex method.

    Uses the dimension-adaptive expansion/contraction parameters of Gao & Han
    for problems with more than two variables. Converges when the spread of
    criterion values across the simplex falls below `tolerance`; otherwise
    returns the best point seen with converged=False.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    f0 = float(f(x0))
    if not math.isfinite(f0):
        raise ValueError("objective is not finite at the starting point")
    if n == 0:
        return OptimizerResult(x0, f0, 0, True, [f0])

    alpha = 1.0
    gamma = 1.0 + 2.0 / n if n > 2 else 2.0
    rho = 0.75 - 1.0 / (2.0 * n) if n > 2 else 0.5
    sigma = 1.0 - 1.0 / n if n > 2 else 0.5

    simplex = [x0]
    for i in range(n):
        step = 0.05 * abs(x0[i]) if x0[i] != 0.0 else 0.00025
        xi = x0.copy()
        xi[i] += step
        simplex.append(xi)
    values = [f0] + [float(f(p)) for p in simplex[1:]]

    # secondary geometric criterion so a symmetric simplex straddling the
    # optimum (equal values, nonzero width) cannot stop early
    xtol = max(math.sqrt(max(tolerance, 0.0)), 1e-12)
    history: list[float] = []
    iterations = 0
    converged = False
    while iterations < max_iter:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        history.append(values[0])
        spread = values[-1] - values[0]
        width = max(float(np.max(np.abs(p - simplex[0]))) for p in simplex[1:])
        if spread == 0.0 or (spread < tolerance
                             and width <= xtol * max(1.0, float(np.max(np.abs(simplex[0]))))):
            converged = True
            break
        iterations += 1

        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        reflected = centroid + alpha * (centroid - worst)
        fr = float(f(reflected))
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
            continue
        if fr < values[0]:
            expanded = centroid + gamma * (reflected - centroid)
            fe = float(f(expanded))
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
            continue
        if fr < values[-1]:
            contracted = centroid + rho * (reflected - centroid)
        else:
            contracted = centroid - rho * (centroid - worst)
        fc = float(f(contracted))
        if fc < min(fr, values[-1]):
            simplex[-1], values[-1] = contracted, fc
            continue
        # shrink toward the best vertex
        best = simplex[0]
        for i in range(1, n + 1):
            simplex[i] = best + sigma * (simplex[i] - best)
            values[i] = float(f(simplex[i]))

    order = np.argsort(values, kind="stable")
    best_x = simplex[order[0]]
    best_f = values[order[0]]
    if history and best_f < history[-1]:
        history.append(best_f)
    return OptimizerResult(np.asarray(best_x, dtype=float), float(best_f), iterations, converged, history)
