"""Deterministic Nelder-Mead simplex descent for small non-smooth problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool


def nelder_mead(
    func: Callable[[np.ndarray], float],
    x0,
    step,
    xtol: float = 1e-6,
    ftol: float = 1e-9,
    max_iter: int = 2000,
) -> SimplexResult:
    """Minimize ``func`` from ``x0``.

    ``step`` is a scalar or per-coordinate initial simplex edge. Stops when the
    simplex diameter drops below ``xtol`` or the spread of function values
    across the simplex drops below ``ftol``; ``converged`` is False if
    ``max_iter`` is reached first.
    """
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    steps = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5

    sim = np.vstack([x0, x0 + np.diag(steps)])
    fs = np.array([func(x) for x in sim])
    nfev = n + 1
    converged = False
    it = 0
    while it < max_iter:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        diam = np.max(np.abs(sim[1:] - sim[0]))
        if diam < xtol or fs[-1] - fs[0] < ftol:
            converged = True
            break
        it += 1

        centroid = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = func(xr)
        nfev += 1
        if fs[0] <= fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = func(xe)
            nfev += 1
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = centroid + rho * (xr - centroid)
        else:
            xc = centroid + rho * (worst - centroid)
        fc = func(xc)
        nfev += 1
        if fc < min(fr, fs[-1]):
            sim[-1], fs[-1] = xc, fc
            continue
        # shrink toward the best vertex
        sim[1:] = sim[0] + sigma * (sim[1:] - sim[0])
        fs[1:] = [func(x) for x in sim[1:]]
        nfev += n

    best = int(np.argmin(fs))
    return SimplexResult(sim[best].copy(), float(fs[best]), it, nfev, converged)


def minimize_with_restarts(
    func: Callable[[np.ndarray], float],
    x0,
    step,
    xtol: float = 1e-6,
    ftol: float = 1e-9,
    max_iter: int = 2000,
    max_restarts: int = 4,
) -> SimplexResult:
    """Re-run the simplex from its own optimum until the value stops improving.

    A fresh simplex escapes the premature collapse Nelder-Mead is prone to on
    kinked objectives.
    """
    res = nelder_mead(func, x0, step, xtol, ftol, max_iter)
    nit, nfev = res.nit, res.nfev
    steps = np.asarray(step, dtype=float)
    for _ in range(max_restarts):
        steps = steps * 0.5
        nxt = nelder_mead(func, res.x, steps, xtol, ftol, max_iter)
        nit += nxt.nit
        nfev += nxt.nfev
        improved = nxt.fun < res.fun - ftol
        if nxt.fun <= res.fun:
            res = SimplexResult(nxt.x, nxt.fun, nit, nfev, nxt.converged)
        if not improved:
            break
    return SimplexResult(res.x, res.fun, nit, nfev, res.converged)
