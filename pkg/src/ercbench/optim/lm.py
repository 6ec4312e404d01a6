"""Levenberg-Marquardt on residuals with a multiplicative damping schedule."""

from __future__ import annotations

import numpy as np

from ercbench.optim.objective import Objective, model_jacobian

LAMBDA0 = 1e-3
LAMBDA_FACTOR = 10.0
LAMBDA_MAX = 1e16


def lm_step(obj: Objective, p, lam: float,
            eval_limit: float = np.inf) -> tuple[np.ndarray, float, float]:
    """One damped Gauss-Newton proposal.

    Solves ``(J^T J + lam * diag(J^T J)) delta = J^T r`` where ``J`` is the
    finite-difference Jacobian of the model output and ``r = y - yhat``.  The
    step is kept (and ``lam`` divided by 10) only if the loss does not rise; otherwise
    ``p`` is unchanged and ``lam`` is multiplied by 10.  A singular system also
    counts as a rejection.

    Returns ``(p, lam, loss)``.
    """
    p = np.asarray(p, dtype=float)
    r = obj.residuals(p)
    if r is None:
        return p, lam, np.inf
    p, lam, loss, _, _ = _lm_step(obj, p, lam, r, float(r @ r) / r.size, eval_limit)
    return p, lam, loss


def _lm_step(obj, p, lam, r, loss, eval_limit):
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if obj.evals + p.size + 1 > eval_limit:
        return p, lam, loss, r, False
    J = model_jacobian(obj, p, r)
    if J is None:
        return p, lam * LAMBDA_FACTOR, loss, r, False
    A = J.T @ J
    g = J.T @ r
    diag = np.diag(A).copy()
    # zero columns (slots without influence) would leave the system singular for every lambda
    diag[diag <= 0] = max(1e-12 * (diag.max() if diag.size else 0.0), 1e-300)
    try:
        delta = np.linalg.solve(A + lam * np.diag(diag), g)
    except np.linalg.LinAlgError:
        return p, lam * LAMBDA_FACTOR, loss, r, False
    if not np.all(np.isfinite(delta)):
        return p, lam * LAMBDA_FACTOR, loss, r, False
    trial = p + delta
    r_new = obj.residuals(trial)
    if r_new is not None:
        new_loss = float(r_new @ r_new) / r_new.size
        if new_loss <= loss:
            return trial, lam / LAMBDA_FACTOR, new_loss, r_new, True
    return p, lam * LAMBDA_FACTOR, loss, r, False


def minimize_lm(obj: Objective, x0, budget: int = 100, tol: float = 1e-12):
    if not obj.has_residuals:
        raise ValueError("Levenberg-Marquardt needs a residual objective")
    limit = obj.evals + budget
    p = np.asarray(x0, dtype=float).copy()
    r = obj.residuals(p)
    if r is None:
        return p, np.inf
    loss = float(r @ r) / r.size
    if not np.isfinite(loss):
        return p, np.inf
    lam = LAMBDA0
    while obj.evals + p.size < limit and lam < LAMBDA_MAX and loss > 0.0:
        p_new, lam, new_loss, r, accepted = _lm_step(obj, p, lam, r, loss, limit)
        if accepted:
            improvement = loss - new_loss
            p, loss = p_new, new_loss
            if improvement <= tol * (loss + improvement):
                break
    return p, loss
