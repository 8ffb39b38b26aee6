"""Dense SQP for box-bounded problems with one equality constraint.

Minimize f(x) subject to c(x) = 0, l <= x <= u, with some coordinates
frozen. The Hessian of the Lagrangian is approximated by damped BFGS, the
working set is the frozen coordinates plus bounds whose multiplier sign
agrees with activity, and steps are globalized by an l1 merit line search.
The scalar constraint keeps the equality QP solvable by two back-solves.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

_ARMIJO = 1e-4
_MIN_STEP = 2.0 ** -30
_DAMPING = 0.2


@dataclass
class NlpProblem:
    """values(x) -> (f, c); gradients(x) -> (df/dx, dc/dx)."""

    values: Callable
    gradients: Callable
    lower: np.ndarray
    upper: np.ndarray
    fixed: np.ndarray  # bool mask; these coordinates never move


@dataclass
class SqpResult:
    x: np.ndarray
    multiplier: float
    objective: float
    constraint: float
    kkt_stationarity: float
    feasibility: float
    iterations: int
    converged: bool
    message: str


def _bound_activity(lower, upper, x):
    # activity tolerance scales with the box; unbounded sides never activate
    span = upper - lower
    ref = np.where(np.isfinite(span), span, np.maximum(1.0, np.abs(x)))
    tol = 1e-9 * ref
    at_lo = np.isfinite(lower) & (x - lower <= tol)
    at_up = np.isfinite(upper) & (upper - x <= tol)
    return at_lo, at_up


def kkt_residual(problem, x, lam, values=None, grads=None):
    """(stationarity, feasibility) of the first-order conditions at (x, lam).

    Stationarity is the largest projected Lagrangian-gradient component:
    bound multipliers are eliminated by clipping the residual where the
    bound is active. Feasibility is |c|. Both vanish exactly at a KKT point.
    """
    _, c = problem.values(x) if values is None else values
    grad, jac = problem.gradients(x) if grads is None else grads
    r = grad + lam * jac
    at_lo, at_up = _bound_activity(problem.lower, problem.upper, x)
    viol = np.abs(r)
    viol[at_lo] = np.maximum(0.0, -r[at_lo])
    viol[at_up] = np.maximum(0.0, r[at_up])
    viol[at_lo & at_up] = 0.0
    viol[problem.fixed] = 0.0
    return float(np.max(viol)), abs(float(c))


def solve(problem, x0, tol_kkt=1e-6, tol_feas=1e-8, max_iter=200,
          callback=None):
    """Run the SQP loop from x0 (clipped into the box).

    callback, if given, is invoked once per iteration with
    (iteration, objective, constraint, stationarity, feasibility).
    """
    lower, upper, fixed = problem.lower, problem.upper, problem.fixed
    n = lower.size
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    f, c = problem.values(x)
    g, a = problem.gradients(x)
    den = float(a @ a)
    lam = -float(g @ a) / den if den > 0 else 0.0
    hess = np.eye(n)
    mu = 1.0
    first_pair = True
    message = "max iterations reached"
    converged = False
    it = 0

    stalls = 0
    for it in range(1, max_iter + 1):
        stat, feas = kkt_residual(problem, x, lam, (f, c), (g, a))
        if callback is not None:
            callback(it, f, c, stat, feas)
        # convergence test is relative to the gradient magnitude
        if stat <= tol_kkt * max(1.0, float(np.max(np.abs(g)))) and feas <= tol_feas:
            converged = True
            message = "converged"
            break

        # working set: frozen coordinates plus consistently active bounds
        r = g + lam * a
        eps = 1e-10 * max(1.0, float(np.max(np.abs(g))))
        at_lo, at_up = _bound_activity(lower, upper, x)
        active = fixed | (at_lo & (r >= -eps)) | (at_up & (r <= eps))

        # equality QP on the free coordinates; a released bound that blocks
        # the step immediately goes back into the working set and we re-solve
        d = None
        lam_new = lam
        for _ in range(n + 1):
            free = ~active
            if not np.any(free):
                d = None
                break
            h_ff = hess[np.ix_(free, free)]
            p = np.linalg.solve(h_ff, g[free])
            q = np.linalg.solve(h_ff, a[free])
            den = float(a[free] @ q)
            if abs(den) > 1e-14 * max(1.0, float(a[free] @ a[free])):
                lam_new = (c - float(a[free] @ p)) / den
                d_free = -p - lam_new * q
            else:
                lam_new = lam
                d_free = -p
            d = np.zeros(n)
            d[free] = d_free

            alpha = 1.0
            blocker = -1
            for i in np.nonzero(free)[0]:
                if d[i] > 0.0:
                    ratio = (upper[i] - x[i]) / d[i]
                elif d[i] < 0.0:
                    ratio = (lower[i] - x[i]) / d[i]
                else:
                    continue
                if ratio < alpha:
                    alpha = ratio
                    blocker = i
            if alpha < 1e-12 and blocker >= 0:
                active[blocker] = True
                continue
            d *= max(alpha, 0.0)
            break

        if d is None:
            message = "all coordinates at active bounds"
            break
        if not np.any(np.abs(d) > 1e-15 * max(1.0, float(np.max(np.abs(x))))):
            # x solves the working-set QP; refresh the multiplier and retry
            lam = lam_new
            stalls += 1
            if stalls > 2:
                message = "stationary on the working set"
                break
            continue
        stalls = 0

        mu = max(mu, 2.0 * abs(lam_new) + 1.0)
        merit0 = f + mu * abs(c)
        slope = float(g @ d) - mu * abs(c)
        t = 1.0
        while True:
            x_try = np.clip(x + t * d, lower, upper)
            f_try, c_try = problem.values(x_try)
            if f_try + mu * abs(c_try) <= merit0 + _ARMIJO * t * slope:
                break
            t *= 0.5
            if t < _MIN_STEP:
                x_try = None
                break
        if x_try is None:
            message = "line search failed"
            break

        g_new, a_new = problem.gradients(x_try)
        s = x_try - x
        y = (g_new + lam_new * a_new) - (g + lam_new * a)
        x, f, c, g, a, lam = x_try, f_try, c_try, g_new, a_new, lam_new

        sts = float(s @ s)
        if sts > 0.0:
            if first_pair:
                sy = float(s @ y)
                if sy > 0.0:
                    hess *= float(y @ y) / sy
                first_pair = False
            bs = hess @ s
            sbs = float(s @ bs)
            sy = float(s @ y)
            if sy < _DAMPING * sbs:
                theta = (1.0 - _DAMPING) * sbs / (sbs - sy)
                y = theta * y + (1.0 - theta) * bs
                sy = float(s @ y)
            if sy > 0.0 and sbs > 0.0:
                hess += np.outer(y, y) / sy - np.outer(bs, bs) / sbs

    stat, feas = kkt_residual(problem, x, lam, (f, c), (g, a))
    return SqpResult(x=x, multiplier=lam, objective=f, constraint=c,
                     kkt_stationarity=stat, feasibility=feas,
                     iterations=it, converged=converged, message=message)
