"""Iterative fitting algorithms for the smoothed expectile MEL estimator and
its adaptive-LASSO variant, plus the pilot expectile fit.

All four algorithms share one Newton-type engine.  With M(beta, lam) the
mean of (d g_i / d beta)(lam'g_i - 1) and D the diagonal penalty matrix
diag(eta * w_j / |beta_j|), the update solves

    beta  <-  beta + (M + D)^{-1} (gbar - D beta)

restricted to the active coordinates, so that at tau = 1/2 the penalized
fixpoint is the soft-thresholded ridge solution.  The unpenalized algorithms
use D = 0; the "1" variants refresh lam from the closed form S^{-1} gbar once
per outer iteration while the "2" variants keep lam = 0.  Penalized runs
freeze any coordinate whose magnitude falls below eps_zero at zero for all
later steps, and convergence is not declared while a coordinate below the
stopping resolution is still collapsing toward the freeze threshold.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientCompleteCasesError,
    NoConvergenceError,
    RankDeficientError,
    SingularMatrixError,
)
from .model import _row_terms
from .numkit import solve_linear, solve_spd

_DIVERGENCE_FACTOR = 1e6


@dataclass
class FitResult:
    """Outcome of one fitting run."""

    beta: np.ndarray
    lam: np.ndarray
    iterations: int
    converged: bool
    active_set: np.ndarray = field(default=None)
    trace: list = field(default_factory=list)

    def __post_init__(self):
        if self.active_set is None:
            self.active_set = np.flatnonzero(self.beta)


def expectile_fit(ds, tau, tol=1e-8, max_iter=500):
    """Expectile regression on the complete cases, by reweighted least squares.

    The weights are tau for nonnegative residuals and 1 - tau otherwise; at
    tau = 1/2 the first solve is already the least-squares solution.

    Raises
    ------
    InsufficientCompleteCasesError
        Fewer complete rows than parameters.
    RankDeficientError
        Complete-case design without full column rank.
    """
    Xc, yc = ds.complete_cases()
    if Xc.shape[0] < ds.p:
        raise InsufficientCompleteCasesError(
            f"{Xc.shape[0]} complete rows but {ds.p} parameters"
        )
    if np.linalg.matrix_rank(Xc) < ds.p:
        raise RankDeficientError("complete-case design is rank deficient")
    try:
        beta = solve_spd(Xc.T @ Xc, Xc.T @ yc)
    except SingularMatrixError:
        raise RankDeficientError("complete-case design is rank deficient") from None
    for _ in range(max_iter):
        r = yc - Xc @ beta
        w = np.where(r >= 0.0, tau, 1.0 - tau)
        Xw = Xc * w[:, None]
        try:
            beta_new = solve_spd(Xc.T @ Xw, Xw.T @ yc)
        except SingularMatrixError:
            raise RankDeficientError("weighted design is rank deficient") from None
        step = np.linalg.norm(beta_new - beta)
        beta = beta_new
        if step < tol:
            break
    return beta


def adaptive_weights(pilot, gamma, eps_zero=1e-4):
    """Componentwise |pilot_j|**(-gamma); entries below eps_zero become inf,
    meaning the coordinate is frozen at zero."""
    pilot = np.abs(np.asarray(pilot, dtype=float))
    out = np.full(pilot.shape, np.inf)
    live = pilot >= eps_zero
    out[live] = pilot[live] ** -gamma
    return out


def pilot_estimate(ds, cfg, mode="same"):
    """Pilot coefficients for the adaptive weights, from an unpenalized fit.

    mode "same" fits on the full dataset; "split" fits on the first half of
    the rows only, approximating the independent pilot sample.
    """
    if mode == "same":
        pilot_ds = ds
    elif mode == "split":
        from .model import Dataset

        half = max(ds.n // 2, ds.p + 1)
        pilot_ds = Dataset(ds.X[:half], ds.y[:half], ds.delta[:half])
    else:
        raise ValueError("pilot mode must be 'same' or 'split'")
    return fit_a2(pilot_ds, cfg).beta


def _check_fittable(ds):
    if ds.n_complete < ds.p:
        raise InsufficientCompleteCasesError(
            f"{ds.n_complete} complete rows but {ds.p} parameters"
        )


def _fit_engine(ds, cfg, beta0, refresh_lambda, pen=None):
    _check_fittable(ds)
    n, p = ds.n, ds.p
    beta = np.array(expectile_fit(ds, cfg.tau) if beta0 is None else beta0,
                    dtype=float).ravel().copy()
    if beta.shape != (p,):
        raise ValueError("starting point has wrong dimension")

    penalized = pen is not None and pen.eta > 0.0
    if penalized:
        weights = adaptive_weights(pen.pilot, pen.gamma, cfg.eps_zero)
        active = np.isfinite(weights)
        beta[~active] = 0.0
        if not active.any():
            zeros = np.zeros(p)
            return FitResult(beta=zeros, lam=np.zeros(p), iterations=0,
                             converged=True, active_set=np.array([], dtype=int))
    else:
        active = np.ones(p, dtype=bool)

    guard = _DIVERGENCE_FACTOR * (1.0 + np.linalg.norm(beta))
    trace = []
    for it in range(1, cfg.max_iter + 1):
        a, c = _row_terms(ds, cfg, beta)
        gbar = ds.X.T @ a / n
        if refresh_lambda:
            S = ds.X.T @ (ds.X * (a * a)[:, None]) / n
            lam = solve_spd(S, gbar)
            t = a * (ds.X @ lam) - 1.0
        else:
            t = -1.0
        M = ds.X.T @ (ds.X * (c * t)[:, None]) / n

        idx = np.flatnonzero(active)
        rhs = gbar[idx]
        if penalized:
            # penalty gradient enters the score equation with the sign that
            # makes the tau = 1/2 fixpoint the soft-thresholded ridge solve
            d = pen.eta * weights[idx] / np.abs(beta[idx])
            M_act = M[np.ix_(idx, idx)] + np.diag(d)
            rhs = rhs - d * beta[idx]
        else:
            M_act = M[np.ix_(idx, idx)]

        beta_new = beta.copy()
        beta_new[idx] = beta[idx] + solve_linear(M_act, rhs)
        collapsing = False
        if penalized:
            freeze = active & (np.abs(beta_new) < cfg.eps_zero)
            beta_new[freeze] = 0.0
            active &= ~freeze
            # a coordinate below the stopping resolution that is still falling
            # geometrically is on its way to the freeze threshold; convergence
            # waits until it freezes or stabilizes
            live = active & (np.abs(beta) > 0.0)
            collapsing = bool(np.any(
                (np.abs(beta_new[live]) < cfg.nu)
                & (np.abs(beta_new[live]) < 0.5 * np.abs(beta[live]))
            ))

        step = np.linalg.norm(beta_new - beta)
        trace.append(step)
        beta = beta_new
        if np.linalg.norm(beta) > guard or not np.all(np.isfinite(beta)):
            raise NoConvergenceError("iterates diverged")
        if step < cfg.nu and not collapsing:
            return _finish(ds, cfg, beta, refresh_lambda, it, trace)
        if penalized and not active.any():
            # everything frozen; the remaining iterates cannot move
            trace.append(0.0)
            return _finish(ds, cfg, beta, refresh_lambda, it, trace)
    raise NoConvergenceError(f"no convergence in {cfg.max_iter} iterations")


def _finish(ds, cfg, beta, refresh_lambda, it, trace):
    if refresh_lambda:
        a, _ = _row_terms(ds, cfg, beta)
        gbar = ds.X.T @ a / ds.n
        S = ds.X.T @ (ds.X * (a * a)[:, None]) / ds.n
        lam = solve_spd(S, gbar)
    else:
        lam = np.zeros(ds.p)
    return FitResult(beta=beta, lam=lam, iterations=it, converged=True,
                     active_set=np.flatnonzero(beta), trace=trace)


def fit_a1(ds, cfg, beta0=None):
    """Smoothed expectile MEL fit with the multiplier refreshed each step."""
    return _fit_engine(ds, cfg, beta0, refresh_lambda=True)


def fit_a2(ds, cfg, beta0=None):
    """Newton-Raphson smoothed expectile MEL fit (multiplier held at zero)."""
    return _fit_engine(ds, cfg, beta0, refresh_lambda=False)


def fit_l1(ds, cfg, pen, beta0=None):
    """Adaptive-LASSO penalized fit, multiplier refreshed each step."""
    return _fit_engine(ds, cfg, beta0, refresh_lambda=True, pen=pen)


def fit_l2(ds, cfg, pen, beta0=None):
    """Adaptive-LASSO penalized fit with the multiplier held at zero."""
    return _fit_engine(ds, cfg, beta0, refresh_lambda=False, pen=pen)
