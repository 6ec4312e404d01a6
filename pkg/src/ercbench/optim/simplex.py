"""Nelder-Mead downhill simplex."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ercbench.optim.objective import Objective

ALPHA, GAMMA, RHO, SIGMA = 1.0, 2.0, 0.5, 0.5


@dataclass
class Simplex:
    points: np.ndarray   # (n + 1, n), sorted by value
    values: np.ndarray   # (n + 1,)

    def sort(self) -> "Simplex":
        order = np.argsort(self.values, kind="stable")
        self.points, self.values = self.points[order], self.values[order]
        return self


def initial_simplex(x0) -> np.ndarray:
    """x0 plus one vertex per axis: 5% relative step, 0.00025 for zero coordinates."""
    x0 = np.asarray(x0, dtype=float)
    pts = [x0]
    for i in range(x0.size):
        v = x0.copy()
        v[i] = v[i] * 1.05 if v[i] != 0 else 0.00025
        pts.append(v)
    return np.array(pts)


def make_simplex(obj: Objective, points) -> Simplex:
    points = np.asarray(points, dtype=float)
    return Simplex(points, obj.batch_loss(points)).sort()


def nelder_mead_step(s: Simplex, obj: Objective) -> Simplex:
    """Reflection, expansion, contraction or shrink; keeps the simplex sorted."""
    pts, vals = s.points, s.values
    centroid = pts[:-1].mean(axis=0)
    worst = pts[-1]
    xr = centroid + ALPHA * (centroid - worst)
    fr = obj.loss(xr)
    if fr < vals[0]:
        xe = centroid + GAMMA * (xr - centroid)
        fe = obj.loss(xe)
        if fe < fr:
            pts[-1], vals[-1] = xe, fe
        else:
            pts[-1], vals[-1] = xr, fr
        return s.sort()
    if fr < vals[-2]:
        pts[-1], vals[-1] = xr, fr
        return s.sort()
    if fr < vals[-1]:
        xc = centroid + RHO * (xr - centroid)   # outside contraction
        fc = obj.loss(xc)
        if fc <= fr:
            pts[-1], vals[-1] = xc, fc
            return s.sort()
    else:
        xc = centroid + RHO * (worst - centroid)  # inside contraction
        fc = obj.loss(xc)
        if fc < vals[-1]:
            pts[-1], vals[-1] = xc, fc
            return s.sort()
    pts[1:] = pts[0] + SIGMA * (pts[1:] - pts[0])
    vals[1:] = obj.batch_loss(pts[1:])
    return s.sort()


def minimize_nelder_mead(obj: Objective, x0, budget: int = 100, tol: float = 1e-12,
                         simplex=None):
    limit = obj.evals + budget
    x0 = np.asarray(x0, dtype=float)
    s = make_simplex(obj, initial_simplex(x0) if simplex is None else simplex)
    n = x0.size
    # a shrink costs n + 2 evaluations; stop before it could overrun
    while obj.evals + n + 2 <= limit:
        if not np.isfinite(s.values[0]):
            break
        spread = s.values[-1] - s.values[0]
        if np.isfinite(spread) and spread <= tol * max(abs(s.values[0]), 1e-300) \
                and np.max(np.abs(s.points[1:] - s.points[0])) <= 1e-12 * max(1.0, np.max(np.abs(s.points[0]))):
            break
        s = nelder_mead_step(s, obj)
    return s.points[0].copy(), float(s.values[0])
