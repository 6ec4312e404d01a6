"""Quasi-Newton (BFGS) and nonlinear conjugate gradient with numeric gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ercbench.optim.objective import Objective, numeric_gradient

ARMIJO_C = 1e-4
MAX_HALVINGS = 40


@dataclass
class GradientState:
    x: np.ndarray
    f: float
    g: np.ndarray
    H: Optional[np.ndarray] = None     # BFGS inverse-Hessian approximation
    d: Optional[np.ndarray] = None     # CG search direction
    alpha: float = 1.0                 # last accepted step length
    slope: float = 0.0                 # g.d of the last accepted direction
    done: bool = False
    scaled: bool = False


def start_state(obj: Objective, x0) -> GradientState:
    x = np.asarray(x0, dtype=float).copy()
    f = obj.loss(x)
    g, _ = numeric_gradient(obj, x, f)
    return GradientState(x=x, f=f, g=g, done=not np.isfinite(f))


def _armijo_halving(obj, x, f, d, slope, alpha, budget_left):
    """Backtrack by halving until sufficient decrease. Returns (alpha, f_new) or None."""
    for _ in range(MAX_HALVINGS):
        if obj.evals >= budget_left:
            return None
        f_new = obj.loss(x + alpha * d)
        if f_new <= f + ARMIJO_C * alpha * slope:
            return alpha, f_new
        alpha *= 0.5
    return None


def bfgs_step(state: GradientState, obj: Objective, eval_limit: float = np.inf) -> GradientState:
    """One BFGS iteration with Armijo backtracking line search."""
    if state.done:
        return state
    x, f, g = state.x, state.f, state.g
    n = x.size
    H = np.eye(n) if state.H is None else state.H
    gnorm = np.linalg.norm(g)
    if gnorm == 0.0:
        state.done = True
        return state
    if state.H is None:
        # unit first step length
        H = H / max(gnorm, 1e-12)
    d = -H @ g
    slope = float(g @ d)
    if slope >= 0:
        H = np.eye(n) / max(gnorm, 1e-12)
        d = -H @ g
        slope = float(g @ d)
    found = _armijo_halving(obj, x, f, d, slope, 1.0, eval_limit)
    if found is None:
        state.done = True
        return state
    alpha, f_new = found
    s = alpha * d
    x_new = x + s
    g_new, _ = numeric_gradient(obj, x_new, f_new)
    y = g_new - g
    sy = float(s @ y)
    if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
        if not state.scaled:
            H = np.eye(n) * (sy / float(y @ y))
            state.scaled = True
        rho = 1.0 / sy
        V = np.eye(n) - rho * np.outer(s, y)
        H = V @ H @ V.T + rho * np.outer(s, s)
    state.x, state.f, state.g, state.H = x_new, f_new, g_new, H
    state.alpha, state.slope = alpha, slope
    return state


def _line_search_interp(obj, x, f, d, slope, alpha, eval_limit):
    """Armijo search that refines the step with one quadratic interpolation."""
    for _ in range(MAX_HALVINGS):
        if obj.evals >= eval_limit:
            return None
        fa = obj.loss(x + alpha * d)
        denom = 2.0 * (fa - f - slope * alpha)
        if np.isfinite(fa) and fa <= f + ARMIJO_C * alpha * slope:
            if denom > 0 and obj.evals < eval_limit:
                a_star = -slope * alpha * alpha / denom
                if 0 < a_star < 4 * alpha and a_star != alpha:
                    fs = obj.loss(x + a_star * d)
                    if fs < fa and fs <= f + ARMIJO_C * a_star * slope:
                        return a_star, fs
            return alpha, fa
        if np.isfinite(fa) and denom > 0:
            alpha = float(np.clip(-slope * alpha * alpha / denom, 0.1 * alpha, 0.5 * alpha))
        else:
            alpha *= 0.5
    return None


def cg_step(state: GradientState, obj: Objective, eval_limit: float = np.inf) -> GradientState:
    """One Polak-Ribiere+ conjugate-gradient iteration; restarts on non-descent."""
    if state.done:
        return state
    x, f, g = state.x, state.f, state.g
    gnorm = np.linalg.norm(g)
    if gnorm == 0.0:
        state.done = True
        return state
    d = -g if state.d is None else state.d
    slope = float(g @ d)
    if slope >= 0:
        d = -g
        slope = -float(g @ g)
    if state.d is None or state.slope == 0.0:
        alpha = 1.0 / gnorm
    else:
        alpha = min(1e6, max(1e-12, 2.0 * state.alpha * state.slope / slope))
    found = _line_search_interp(obj, x, f, d, slope, alpha, eval_limit)
    if found is None:
        state.done = True
        return state
    alpha, f_new = found
    x_new = x + alpha * d
    g_new, _ = numeric_gradient(obj, x_new, f_new)
    beta = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
    d_new = -g_new + beta * d
    if float(g_new @ d_new) >= 0:
        d_new = -g_new
    state.x, state.f, state.g, state.d = x_new, f_new, g_new, d_new
    state.alpha, state.slope = alpha, slope
    return state


def _run(step, obj, x0, budget, tol):
    start = obj.evals
    limit = start + budget
    state = start_state(obj, x0)
    best_x, best_f = state.x.copy(), state.f
    while not state.done and obj.evals < limit:
        f_prev = state.f
        state = step(state, obj, limit)
        if state.f < best_f:
            best_x, best_f = state.x.copy(), state.f
        if state.f == 0.0 or f_prev - state.f <= tol * abs(f_prev):
            break
    return best_x, best_f


def minimize_bfgs(obj: Objective, x0, budget: int = 100, tol: float = 1e-12):
    return _run(bfgs_step, obj, x0, budget, tol)


def minimize_cg(obj: Objective, x0, budget: int = 100, tol: float = 1e-12):
    return _run(cg_step, obj, x0, budget, tol)
