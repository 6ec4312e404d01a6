"""Numerical accuracy, correlation statistics and record aggregation."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import betainc

from ercbench.optim import DISPLAY_NAMES, STUDY_METHODS, InitStrategy, OptimizerKind

log = logging.getLogger(__name__)

MSE_THRESHOLD = 1e-6
R2_THRESHOLD = 0.99
TED_AXIS = 10


def _paired(y, yhat):
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.size == 0:
        raise ValueError("y and yhat must be non-empty and of equal length")
    return y, yhat


def mse(y, yhat) -> float:
    """Mean squared error."""
    y, yhat = _paired(y, yhat)
    d = y - yhat
    return float(np.dot(d, d) / d.size)


def r2(y, yhat) -> Optional[float]:
    """Coefficient of determination; ``None`` when ``y`` is constant."""
    y, yhat = _paired(y, yhat)
    d = y - yhat
    c = y - y.mean()
    ss_tot = float(np.dot(c, c))
    if ss_tot == 0.0:
        return None
    return 1.0 - float(np.dot(d, d)) / ss_tot


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int


def pearson(a: Sequence[float], b: Sequence[float]) -> Optional[CorrelationResult]:
    """Sample Pearson correlation with a two-sided Student-t p-value (n - 2 dof).

    Returns ``None`` for constant input. Needs at least three pairs.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    if n != b.size:
        raise ValueError("sequences must have equal length")
    if n < 3:
        raise ValueError("need at least three pairs")
    da = a - a.mean()
    db = b - b.mean()
    na, nb = math.sqrt(float(da @ da)), math.sqrt(float(db @ db))
    if na == 0.0 or nb == 0.0:
        return None
    r = float(da @ db) / (na * nb)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t2 = r * r * df / (1.0 - r * r)
        # P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2)
        p = float(betainc(df / 2.0, 0.5, df / (df + t2)))
    return CorrelationResult(r, min(1.0, max(0.0, p)), n)


def iqr_outliers(values: Sequence[float]) -> np.ndarray:
    """Flag values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR]; non-finite values are flagged."""
    v = np.asarray(values, dtype=float)
    finite = np.isfinite(v)
    flags = ~finite
    if finite.sum() == 0:
        return flags
    q1, q3 = np.percentile(v[finite], [25, 75])
    iqr = q3 - q1
    with np.errstate(invalid="ignore"):
        flags |= (v < q1 - 1.5 * iqr) | (v > q3 + 1.5 * iqr)
    return flags


def passes(record, mse_max: Optional[float] = None, r2_min: Optional[float] = None) -> bool:
    if (mse_max is None) == (r2_min is None):
        raise ValueError("give exactly one of mse_max or r2_min")
    if mse_max is not None:
        return record.mse <= mse_max
    return record.r2 is not None and record.r2 >= r2_min


def cumulative_success(records: Iterable, mse_max: Optional[float] = None,
                       r2_min: Optional[float] = None, ted_max: int = TED_AXIS) -> list[int]:
    """``counts[k]`` = records meeting the criterion with TED <= k, for k in 0..ted_max."""
    counts = [0] * (ted_max + 1)
    for rec in records:
        if not passes(rec, mse_max, r2_min):
            continue
        for k in range(max(rec.ted, 0), ted_max + 1):
            counts[k] += 1
    return counts


@dataclass(frozen=True)
class SummaryRow:
    label: str
    method: str
    init: str
    mse: float
    r2: Optional[float]
    ted: float
    train_time_s: float
    size: float
    n: int
    r2_undefined: int


def method_label(method: str, init: str) -> str:
    kind = OptimizerKind(method)
    base = DISPLAY_NAMES[kind]
    return f"{base} Random" if init == InitStrategy.RANDOM.value else base


def method_order_key(method: str, init: str):
    pairs = [(k.value, i.value) for k, i in STUDY_METHODS]
    if (method, init) in pairs:
        return (0, pairs.index((method, init)), "")
    return (1, 0, f"{method}/{init}")


def summarize(records: Sequence) -> list[SummaryRow]:
    """Arithmetic means per (method, init), rows in the study's table order.

    Undefined R² values are left out of the R² mean and counted per row.
    """
    if not records:
        raise ValueError("no records to summarize")
    groups = defaultdict(list)
    for rec in records:
        groups[(rec.method, rec.init)].append(rec)
    rows = []
    for (method, init) in sorted(groups, key=lambda k: method_order_key(*k)):
        recs = groups[(method, init)]
        r2s = [r.r2 for r in recs if r.r2 is not None]
        undefined = len(recs) - len(r2s)
        if undefined:
            log.info("%s/%s: %d record(s) with undefined R2 left out of the mean",
                     method, init, undefined)
        rows.append(SummaryRow(
            label=method_label(method, init), method=method, init=init,
            mse=float(np.mean([r.mse for r in recs])),
            r2=float(np.mean(r2s)) if r2s else None,
            ted=float(np.mean([r.ted for r in recs])),
            train_time_s=float(np.mean([r.train_time_s for r in recs])),
            size=float(np.mean([r.size for r in recs])),
            n=len(recs), r2_undefined=undefined,
        ))
    return rows
