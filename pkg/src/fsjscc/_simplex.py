"""Active-set Newton minimization of a smooth convex function over the simplex.

Used to finish Blahut-Arimoto style iterations, which slow to a crawl when
the optimum sits near a change of support or has nearly duplicate inputs.
"""
from __future__ import annotations

import numpy as np


def newton_simplex(fun, grad_hess, x, iters: int = 100, kkt_tol: float = 1e-12):
    """Minimize ``fun`` over the probability simplex starting from ``x``.

    ``grad_hess(x)`` returns the full gradient and Hessian. Each step solves
    the equality-constrained Newton system on the current support, stops at
    the boundary (dropping the coordinate that reaches zero) and re-admits
    any coordinate whose gradient is below the support multiplier. Steps
    that do not decrease ``fun`` are rejected, so the result is never worse
    than the start.
    """
    x = np.asarray(x, dtype=float).copy()
    S = x > 1e-12 * x.max()
    x[~S] = 0.0
    x /= x.sum()
    f = fun(x)
    for _ in range(iters):
        g, H = grad_hess(x)
        mu = x[S] @ g[S]
        out = ~S & (g < mu - kkt_tol * max(1.0, abs(mu)))
        S = S | out
        idx = np.flatnonzero(S)
        n = idx.size
        A = np.zeros((n + 1, n + 1))
        Hs = H[np.ix_(idx, idx)]
        # a tiny ridge turns flat (linear) directions into long steps that end on the boundary
        A[:n, :n] = Hs + 1e-9 * max(np.abs(np.diag(Hs)).max(), 1e-300) * np.eye(n)
        A[:n, n] = A[n, :n] = 1.0
        rhs = np.concatenate([-g[idx], [0.0]])
        step = np.linalg.lstsq(A, rhs, rcond=None)[0][:n]
        xs = x[idx]
        step[(xs <= 0) & (step < 0)] = 0.0
        if np.max(np.abs(step)) < 1e-15:
            break
        blocking = step < 0
        ratios = np.where(blocking, xs / np.where(blocking, -step, 1.0), np.inf)
        tmax = ratios.min()
        t = min(1.0, tmax)
        while True:
            trial = x.copy()
            trial[idx] = np.maximum(xs + t * step, 0.0)
            if t == tmax:
                trial[idx[np.argmin(ratios)]] = 0.0
            trial /= trial.sum()
            ft = fun(trial)
            if ft <= f + 1e-15 * max(1.0, abs(f)) or t < 1e-12:
                break
            t *= 0.5
        if ft > f + 1e-15 * max(1.0, abs(f)):
            break
        done = f - ft < 1e-16 * max(1.0, abs(f)) and not out.any()
        x, f = trial, ft
        S = x > 0
        if done:
            break
    return x
