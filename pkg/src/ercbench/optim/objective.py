"""Objectives over parameter vectors and finite-difference derivatives."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from ercbench.expr import Node, compile_tree, erc_count

EPS = np.finfo(float).eps
SQRT_EPS = np.sqrt(EPS)


class Objective:
    """A scalar loss over parameter vectors, optionally backed by residuals.

    When ``residuals`` is given the loss is the mean of squared residuals (MSE
    when residuals are ``y - yhat``). Non-finite evaluations give ``+inf`` loss.
    Every probed point increments ``evals`` so optimizers can honour budgets.
    """

    def __init__(self, dim: int, residuals: Optional[Callable] = None,
                 loss: Optional[Callable] = None,
                 batch_residuals: Optional[Callable] = None):
        if residuals is None and loss is None:
            raise ValueError("need residuals or loss")
        self.dim = dim
        self._residuals = residuals
        self._loss = loss
        self._batch_residuals = batch_residuals
        self.evals = 0

    @property
    def has_residuals(self) -> bool:
        return self._residuals is not None

    @classmethod
    def for_tree(cls, tree: Node, xs, ys) -> "Objective":
        """MSE objective of an ERC-slotted tree on a dataset."""
        fn = compile_tree(tree)
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)

        def residuals(p):
            return ys - fn(xs, p)

        def batch_residuals(P):
            # (k, P, 1) broadcasts against (n,) giving (P, n)
            return ys - fn(xs, P.T[:, :, None])

        return cls(erc_count(tree), residuals=residuals, batch_residuals=batch_residuals)

    def residuals(self, p) -> Optional[np.ndarray]:
        self.evals += 1
        with np.errstate(all="ignore"):
            r = self._residuals(np.asarray(p, dtype=float))
        r = np.asarray(r, dtype=float)
        if not np.all(np.isfinite(r)):
            return None
        return r

    def loss(self, p) -> float:
        p = np.asarray(p, dtype=float)
        if self._residuals is None:
            self.evals += 1
            with np.errstate(all="ignore"):
                val = float(self._loss(p))
            return val if np.isfinite(val) else np.inf
        r = self.residuals(p)
        if r is None:
            return np.inf
        val = float(np.dot(r, r)) / r.size if r.ndim else float(r * r)
        return val if np.isfinite(val) else np.inf

    def batch_loss(self, P) -> np.ndarray:
        """Loss of each row of ``P`` (shape ``(m, dim)``)."""
        P = np.asarray(P, dtype=float)
        m = P.shape[0]
        if self._batch_residuals is None or m == 0:
            return np.array([self.loss(p) for p in P], dtype=float)
        self.evals += m
        with np.errstate(all="ignore"):
            R = np.asarray(self._batch_residuals(P), dtype=float)
            if R.ndim < 2 or R.shape[0] != m:
                R = np.broadcast_to(R, (m,) + R.shape[-1:])
            out = np.mean(R * R, axis=1)
        out[~np.isfinite(out)] = np.inf
        return out

    def batch_residuals(self, P) -> np.ndarray:
        """Residuals of each row of ``P``; rows with non-finite entries are left as-is."""
        P = np.asarray(P, dtype=float)
        if self._batch_residuals is None:
            rows = []
            for p in P:
                self.evals += 1
                with np.errstate(all="ignore"):
                    rows.append(np.asarray(self._residuals(p), dtype=float))
            return np.array(rows)
        self.evals += P.shape[0]
        with np.errstate(all="ignore"):
            R = np.asarray(self._batch_residuals(P), dtype=float)
        if R.ndim < 2 or R.shape[0] != P.shape[0]:
            R = np.broadcast_to(R, (P.shape[0],) + R.shape[-1:])
        return R


def fd_steps(p: np.ndarray) -> np.ndarray:
    return SQRT_EPS * np.maximum(1.0, np.abs(p))


def numeric_gradient(obj: Objective, p, f0: Optional[float] = None) -> tuple[np.ndarray, bool]:
    """Central-difference gradient with per-coordinate step sqrt(eps)*max(1, |p_i|).

    Falls back to a one-sided difference when a probe is non-finite.  Returns
    ``(gradient, degraded)``; ``degraded`` is set when some coordinate had no
    finite probe on either side and was given a zero entry.
    """
    p = np.asarray(p, dtype=float)
    k = p.size
    grad = np.zeros(k)
    degraded = False
    if k == 0:
        return grad, degraded
    h = fd_steps(p)
    probes = np.concatenate([p + np.diag(h), p - np.diag(h)])
    vals = obj.batch_loss(probes)
    fp, fm = vals[:k], vals[k:]
    for i in range(k):
        up, down = np.isfinite(fp[i]), np.isfinite(fm[i])
        if up and down:
            grad[i] = (fp[i] - fm[i]) / (2 * h[i])
            continue
        if f0 is None:
            f0 = obj.loss(p)
        if up and np.isfinite(f0):
            grad[i] = (fp[i] - f0) / h[i]
        elif down and np.isfinite(f0):
            grad[i] = (f0 - fm[i]) / h[i]
        else:
            degraded = True
    return grad, degraded


def model_jacobian(obj: Objective, p: np.ndarray, r0: np.ndarray) -> Optional[np.ndarray]:
    """Forward-difference Jacobian of the model output ``yhat = y - r``.

    Shape ``(n, k)``. Returns ``None`` when a probe is non-finite.
    """
    k = p.size
    h = fd_steps(p)
    R = obj.batch_residuals(p + np.diag(h))
    if not np.all(np.isfinite(R)):
        return None
    # yhat(p + h e_i) - yhat(p) = r0 - r_i
    return ((r0[None, :] - R) / h[:, None]).T
