"""Data model and the expectile estimating functions.

The raw function g_i applies the asymmetric expectile weight to the residual
of observation i; the smoothed variant replaces the residual-sign indicator
with a kernel CDF evaluated at (x'beta - y)/h so that everything becomes
differentiable in beta.  Missing responses are guarded by the delta flags
and never read.
"""

from dataclasses import dataclass, field

import numpy as np

from .kernels import Kernel


@dataclass(frozen=True)
class Dataset:
    """Observations (y_i, x_i, delta_i); y_i is undefined where delta_i = 0.

    Parameters
    ----------
    X : (n, p) array of covariates, all entries finite.
    y : (n,) array of responses; entries with delta = 0 may be NaN and are
        never used.
    delta : (n,) array of 0/1 missingness flags (1 = response observed).
    """

    X: np.ndarray
    y: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        delta = np.asarray(self.delta).ravel().astype(np.uint8)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "delta", delta)
        n, p = X.shape
        if n < 1 or p < 1:
            raise ValueError("dataset needs at least one row and one column")
        if y.shape != (n,) or delta.shape != (n,):
            raise ValueError("y and delta must have one entry per row of X")
        if not np.all(np.isfinite(X)):
            raise ValueError("covariates must be finite")
        if not np.all((delta == 0) | (delta == 1)):
            raise ValueError("delta entries must be 0 or 1")
        if not np.all(np.isfinite(y[delta == 1])):
            raise ValueError("observed responses (delta = 1) must be finite")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def n_complete(self):
        return int(self.delta.sum())

    def y_safe(self):
        """Responses with unobserved entries replaced by 0 (never used bare)."""
        return np.where(self.delta == 1, np.where(np.isfinite(self.y), self.y, 0.0), 0.0)

    def complete_cases(self):
        """(X, y) restricted to rows with observed responses."""
        mask = self.delta == 1
        return self.X[mask], self.y[mask]

    def select_columns(self, idx):
        """Dataset using only the covariate columns in idx (submodel view)."""
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.X[:, idx], self.y, self.delta)


@dataclass
class ModelConfig:
    """Expectile level, smoothing bandwidth and solver tolerances.

    h = None resolves to the default bandwidth n**(-1/4) at fit time.
    """

    tau: float = 0.5
    h: float | None = None
    kernel: Kernel = field(default_factory=Kernel)
    nu: float = 1e-2
    eps_zero: float = 1e-4
    max_iter: int = 200

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        if self.h is not None and self.h <= 0.0:
            raise ValueError("bandwidth h must be positive")
        if self.nu <= 0.0 or self.eps_zero <= 0.0:
            raise ValueError("tolerances must be positive")

    def bandwidth(self, n):
        return self.h if self.h is not None else float(n) ** -0.25


@dataclass
class PenaltyConfig:
    """Adaptive-LASSO tuning: level eta, weight power gamma and the pilot."""

    eta: float
    gamma: float = 2.5
    pilot: np.ndarray | None = None

    def __post_init__(self):
        if self.eta < 0.0:
            raise ValueError("eta must be nonnegative")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.pilot is not None:
            self.pilot = np.asarray(self.pilot, dtype=float).ravel()


def expectile_loss(tau, x):
    """Asymmetric squared loss |tau - 1{x<0}| x^2."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0.0, tau, 1.0 - tau) * x * x
    return out if out.ndim else float(out)


def psi_h(cfg, xrow, yval, beta, h=None):
    """Smoothed expectile weight tau + (1-2 tau) G((x'beta - y)/h)."""
    if h is None:
        h = cfg.h
        if h is None:
            raise ValueError("psi_h needs an explicit bandwidth when cfg.h is unset")
    arg = float(np.dot(xrow, beta) - yval)
    return cfg.tau + (1.0 - 2.0 * cfg.tau) * cfg.kernel.smoothed_indicator(h, arg)


def g_raw(ds, i, tau, beta):
    """Raw estimating function of row i (indicator version)."""
    if ds.delta[i] == 0:
        return np.zeros(ds.p)
    r = ds.y[i] - float(ds.X[i] @ beta)
    weight = tau + (1.0 - 2.0 * tau) * (1.0 if r < 0.0 else 0.0)
    return weight * r * ds.X[i]


def g_smooth(ds, i, cfg, beta):
    """Smoothed estimating function of row i."""
    if ds.delta[i] == 0:
        return np.zeros(ds.p)
    h = cfg.bandwidth(ds.n)
    r = ds.y[i] - float(ds.X[i] @ beta)
    w = cfg.tau + (1.0 - 2.0 * cfg.tau) * cfg.kernel.cdf(-r / h)
    return w * r * ds.X[i]


def g_smooth_jacobian(ds, i, cfg, beta):
    """d g_smooth_i / d beta, a symmetric scaling of x_i x_i'."""
    if ds.delta[i] == 0:
        return np.zeros((ds.p, ds.p))
    h = cfg.bandwidth(ds.n)
    x = ds.X[i]
    r = ds.y[i] - float(x @ beta)
    u = -r / h
    w = cfg.tau + (1.0 - 2.0 * cfg.tau) * cfg.kernel.cdf(u)
    scal = (1.0 - 2.0 * cfg.tau) / h * cfg.kernel.pdf(u) * r - w
    return scal * np.outer(x, x)


def g_smooth_hessian_slice(ds, i, j, cfg, beta):
    """Second derivative in beta of component j of g_smooth_i."""
    if ds.delta[i] == 0:
        return np.zeros((ds.p, ds.p))
    h = cfg.bandwidth(ds.n)
    x = ds.X[i]
    r = ds.y[i] - float(x @ beta)
    u = -r / h
    one_m2t = 1.0 - 2.0 * cfg.tau
    scal = one_m2t / h ** 2 * cfg.kernel.pdf_prime(u) * r \
        - 2.0 * one_m2t / h * cfg.kernel.pdf(u)
    return x[j] * scal * np.outer(x, x)


def _row_terms(ds, cfg, beta):
    """Per-row scalars shared by the sample moments and the fit updates.

    Returns (a, c) with g_i = a_i x_i and d g_i / d beta = c_i x_i x_i'.
    """
    h = cfg.bandwidth(ds.n)
    used = ds.delta == 1
    r = np.where(used, ds.y_safe() - ds.X @ beta, 0.0)
    u = -r / h
    w = cfg.tau + (1.0 - 2.0 * cfg.tau) * cfg.kernel.cdf(u)
    a = np.where(used, w * r, 0.0)
    c = np.where(used, (1.0 - 2.0 * cfg.tau) / h * cfg.kernel.pdf(u) * r - w, 0.0)
    return a, c


def moments(ds, cfg, beta):
    """Sample moments (gbar, S, J) of the smoothed estimating functions.

    gbar is the mean of g_i, S the mean of g_i g_i' (second-moment matrix)
    and J the mean Jacobian; all averages run over the full sample size n,
    rows with missing responses contributing zero.
    """
    a, c = _row_terms(ds, cfg, beta)
    n = ds.n
    gbar = ds.X.T @ a / n
    S = ds.X.T @ (ds.X * (a * a)[:, None]) / n
    J = ds.X.T @ (ds.X * c[:, None]) / n
    return gbar, S, J


def g_matrix(ds, cfg, beta):
    """All smoothed estimating functions stacked as an (n, p) matrix."""
    a, _ = _row_terms(ds, cfg, beta)
    return ds.X * a[:, None]
