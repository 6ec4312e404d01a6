"""Generalized simulated annealing ("dual annealing") with a Nelder-Mead polish.

Candidates come from the Tsallis visiting distribution; uphill moves are
accepted with the generalized Metropolis probability.  The search runs in a
box around the initial guess (``radius * max(1, |x0_i|)`` per coordinate) with
periodic wrapping, and restarts when the temperature has decayed by the
restart ratio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ercbench.optim.objective import Objective
from ercbench.optim.simplex import minimize_nelder_mead

VISIT_Q = 2.62
ACCEPT_Q = -5.0
INITIAL_TEMP = 5230.0
RESTART_RATIO = 2e-5
TAIL_LIMIT = 1e8
POLISH_SHARE = 0.2


class Visitor:
    """Sampler for the distorted Cauchy-Lorentz visiting distribution."""

    def __init__(self, qv: float = VISIT_Q):
        self.qv = qv
        f2 = np.exp((4.0 - qv) * np.log(qv - 1.0))
        f3 = np.exp((2.0 - qv) * np.log(2.0) / (qv - 1.0))
        self._f4p = np.sqrt(np.pi) * f2 / (f3 * (3.0 - qv))
        f5 = 1.0 / (qv - 1.0) - 0.5
        d1 = 2.0 - f5
        self._f6 = np.pi * (1.0 - f5) / np.sin(np.pi * (1.0 - f5)) / np.exp(gammaln(d1))

    def __call__(self, temperature: float, dim: int, rng: np.random.Generator) -> np.ndarray:
        x, y = rng.standard_normal((2, dim))
        qv = self.qv
        f1 = np.exp(np.log(temperature) / (qv - 1.0))
        f4 = self._f4p * f1
        x = x * np.exp(-(qv - 1.0) * np.log(self._f6 / f4) / (3.0 - qv))
        den = np.exp((qv - 1.0) * np.log(np.abs(y)) / (3.0 - qv))
        step = x / den
        return np.clip(step, -TAIL_LIMIT, TAIL_LIMIT)


@dataclass
class AnnealState:
    current: np.ndarray
    current_f: float
    best: np.ndarray
    best_f: float
    lower: np.ndarray
    upper: np.ndarray
    iteration: int = 0


def temperature_at(iteration: int, t0: float = INITIAL_TEMP, qv: float = VISIT_Q) -> float:
    s = iteration + 2.0
    t1 = np.exp((qv - 1.0) * np.log(2.0)) - 1.0
    t2 = np.exp((qv - 1.0) * np.log(s)) - 1.0
    return t0 * t1 / t2


def _wrap(x, lower, upper):
    span = upper - lower
    return np.mod(x - lower, span) + lower


def dual_annealing_step(st: AnnealState, obj: Objective, rng: np.random.Generator,
                        visitor: Visitor | None = None) -> AnnealState:
    """One annealing iteration: a Markov chain of ``2 * dim`` visits.

    The first ``dim`` visits move every coordinate, the rest move one
    coordinate each.  ``current`` may move uphill; ``best`` never worsens.
    """
    visitor = visitor or Visitor()
    n = st.current.size
    temp = temperature_at(st.iteration)
    if temp < INITIAL_TEMP * RESTART_RATIO:
        st.iteration = 0
        temp = temperature_at(0)
        st.current = rng.uniform(st.lower, st.upper)
        st.current_f = obj.loss(st.current)
        if st.current_f < st.best_f:
            st.best, st.best_f = st.current.copy(), st.current_f
    temp_step = temp / float(st.iteration + 1)
    for j in range(2 * n):
        cand = st.current.copy()
        if j < n:
            cand = cand + visitor(temp, n, rng)
        else:
            k = j - n
            cand[k] = cand[k] + visitor(temp, 1, rng)[0]
        cand = _wrap(cand, st.lower, st.upper)
        e = obj.loss(cand)
        if e < st.current_f:
            st.current, st.current_f = cand, e
            if e < st.best_f:
                st.best, st.best_f = cand.copy(), e
            continue
        r = rng.random()
        if not np.isfinite(e):
            continue
        base = 1.0 - (1.0 - ACCEPT_Q) * (e - st.current_f) / temp_step
        accept_p = 0.0 if base <= 0 else np.exp(np.log(base) / (1.0 - ACCEPT_Q))
        if r <= accept_p:
            st.current, st.current_f = cand, e
    st.iteration += 1
    return st


def annealing_box(x0, radius: float = 10.0) -> tuple[np.ndarray, np.ndarray]:
    x0 = np.asarray(x0, dtype=float)
    half = radius * np.maximum(1.0, np.abs(x0))
    return x0 - half, x0 + half


def minimize_dual_annealing(obj: Objective, x0, rng: np.random.Generator, budget: int = 750,
                            tol: float = 1e-12, radius: float = 10.0):
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    start = obj.evals
    polish = max(int(budget * POLISH_SHARE), 2 * (n + 2))
    anneal_limit = start + budget - polish
    lower, upper = annealing_box(x0, radius)
    f0 = obj.loss(x0)
    st = AnnealState(x0.copy(), f0, x0.copy(), f0, lower, upper)
    visitor = Visitor()
    while obj.evals + 2 * n + 1 <= anneal_limit:
        st = dual_annealing_step(st, obj, rng, visitor)
    remaining = start + budget - obj.evals
    if remaining >= n + 2 and np.isfinite(st.best_f):
        x, f = minimize_nelder_mead(obj, st.best, budget=remaining, tol=tol)
        if f < st.best_f:
            return x, f
    return st.best.copy(), st.best_f
