"""Empirical likelihood core: multiplier solver, implied probabilities and
the exact and approximate log-likelihood ratios.

The exact multiplier maximizes the concave dual sum(log(1 + lambda'g_i))
over the region where every factor stays positive; the approximate one is
the closed form S^{-1} gbar that the iterative algorithms use.
"""

from dataclasses import dataclass

import numpy as np

from .errors import HullViolationError, LogDomainError, NoConvergenceError
from .model import g_matrix, moments
from .numkit import solve_spd

_LAMBDA_TOL = 1e-8
_PROB_SUM_TOL = 1e-6


@dataclass
class ELState:
    """Solution of the inner empirical-likelihood problem at a fixed beta."""

    lam: np.ndarray
    probs: np.ndarray
    ratio: float
    converged: bool
    iterations: int


def lambda_approx(ds, cfg, beta):
    """Closed-form multiplier S^{-1} gbar (the iterative algorithms' lambda)."""
    gbar, S, _ = moments(ds, cfg, beta)
    return solve_spd(S, gbar)


def el_ratio_exact(ds, cfg, beta, lam):
    """Log-likelihood ratio 2 sum(log(1 + lambda'g_i)) over all n rows.

    Rows with missing responses have g_i = 0 and contribute log(1) = 0.
    Raises LogDomainError when any factor is nonpositive.
    """
    G = g_matrix(ds, cfg, beta)
    w = 1.0 + G @ np.asarray(lam, dtype=float)
    if np.any(w <= 0.0):
        raise LogDomainError("1 + lambda'g_i must stay positive on every row")
    return float(2.0 * np.log(w).sum())


def el_ratio_approx(ds, cfg, beta):
    """Quadratic approximation n * gbar' S^{-1} gbar of the ratio."""
    gbar, S, _ = moments(ds, cfg, beta)
    val = ds.n * float(gbar @ solve_spd(S, gbar))
    return max(val, 0.0)


def solve_lambda_exact(ds, cfg, beta, tol=_LAMBDA_TOL, max_iter=None):
    """Solve the multiplier equation mean(g_i / (1 + lambda'g_i)) = 0.

    Damped Newton steps on the dual, halved until every factor satisfies
    1 + lambda'g_i > 1/n on the used rows.  The returned probabilities are
    p_i = 1 / (n (1 + lambda'g_i)); their total over the full sample equals
    one exactly at an interior solution, which is also how an exterior
    (hull-violating) pseudo-solution is recognised.

    Raises
    ------
    HullViolationError
        If no multiplier keeps all factors positive (0 outside the hull).
    NoConvergenceError
        If the residual does not reach tol within the iteration budget.
    """
    if max_iter is None:
        max_iter = max(cfg.max_iter, 200)
    G = g_matrix(ds, cfg, beta)
    n, p = G.shape
    floor = 1.0 / n
    lam = np.zeros(p)
    w = np.ones(n)
    it = 0
    for it in range(1, max_iter + 1):
        grad = (G / w[:, None]).mean(axis=0)
        if np.linalg.norm(grad) <= tol:
            break
        H = G.T @ (G / (w * w)[:, None]) / n
        step = solve_spd(H, grad)
        size = 1.0
        for _ in range(60):
            cand = lam + size * step
            w_cand = 1.0 + G @ cand
            if np.all(w_cand > floor):
                break
            size *= 0.5
        else:
            raise HullViolationError(
                "no multiplier step keeps all probabilities positive"
            )
        lam = lam + size * step
        w = 1.0 + G @ lam
        if not np.all(np.isfinite(lam)):
            raise NoConvergenceError("multiplier iteration produced non-finite values")
    else:
        raise NoConvergenceError(
            f"multiplier equation not solved to {tol:g} in {max_iter} iterations"
        )

    probs = 1.0 / (n * w)
    if abs(probs.sum() - 1.0) > _PROB_SUM_TOL:
        # residual vanished only because lambda ran off to infinity
        raise HullViolationError("zero lies outside the convex hull of the g_i")
    ratio = float(2.0 * np.log(w).sum())
    return ELState(lam=lam, probs=probs, ratio=ratio, converged=True, iterations=it)
