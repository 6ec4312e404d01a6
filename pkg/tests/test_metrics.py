import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ercbench.metrics import (
    cumulative_success, iqr_outliers, mse, passes, pearson, r2, summarize,
)
from ercbench.records import RunRecord


def rec(method="bfgs", init="current", mse_=1.0, r2_=0.5, ted=3, size=7, t=1.0, seed=0):
    return RunRecord(f"F1-standard-{method}-{init}-{seed}", "F1", "standard", method, init,
                     seed, mse_, r2_, ted, size, t, "x", "x")


# -- independent oracles -----------------------------------------------------

def mse_oracle(y, yhat):
    return math.fsum((a - b) ** 2 for a, b in zip(y, yhat)) / len(y)


def r2_oracle(y, yhat):
    mean = math.fsum(y) / len(y)
    return 1 - math.fsum((a - b) ** 2 for a, b in zip(y, yhat)) / \
        math.fsum((a - mean) ** 2 for a in y)


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def oracle_mismatches(n_samples=1000, seed=99):
    """Count disagreements with fsum / scipy.stats references at 1e-12."""
    rng = np.random.default_rng(seed)
    bad = []
    for i in range(n_samples):
        n = int(rng.integers(3, 200))
        y = rng.normal(0, rng.uniform(0.1, 10), n)
        yhat = y + rng.normal(0, rng.uniform(0.01, 5), n)
        ref = stats.pearsonr(y, yhat)
        got = pearson(y, yhat)
        # p via the t distribution, a second route besides pearsonr's beta form
        t = got.r * math.sqrt((n - 2) / (1 - got.r ** 2))
        p_t = 2 * stats.t.sf(abs(t), n - 2)
        checks = [
            close(mse(y, yhat), mse_oracle(y, yhat)),
            close(r2(y, yhat), r2_oracle(y, yhat)),
            close(got.r, float(ref.statistic)),
            close(got.p_value, float(ref.pvalue)),
            close(got.p_value, p_t),
        ]
        if not all(checks):
            bad.append((i, checks))
    return bad


def test_oracle_agreement_sample():
    assert oracle_mismatches(100) == []


def test_mse_examples():
    assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mse([0, 0], [1, 1]) == 1.0
    assert mse([1, 2, 3], [1, 2, 4]) == pytest.approx(1 / 3, abs=1e-15)
    with pytest.raises(ValueError):
        mse([1, 2], [1])


def test_r2_examples():
    assert r2([1, 2, 3], [1, 2, 3]) == 1.0
    assert r2([1, 2, 3], [2, 2, 2]) == 0.0
    assert r2([0, 2], [1, 1]) == 0.0
    assert r2([5, 5, 5], [5, 5, 4]) is None
    assert r2([0, 1], [5, -5]) < 0


def test_pearson_examples():
    a = np.arange(1.0, 8.0)
    res = pearson(a, 2 * a + 1)
    assert res.r == pytest.approx(1.0, abs=1e-15) and res.p_value < 1e-10
    assert pearson(a, -a).r == pytest.approx(-1.0, abs=1e-15)
    res = pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
    assert res.r == pytest.approx(0.8, abs=1e-12)
    assert res.p_value == pytest.approx(0.1041, abs=5e-4)
    assert res.n == 5
    assert pearson([1, 1, 1], [1, 2, 3]) is None
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2])


def test_cumulative_success_examples():
    assert cumulative_success([rec(mse_=1.0, ted=0)] * 3, mse_max=1e-6) == [0] * 11
    assert cumulative_success([rec(mse_=0.0, ted=0)] * 4, mse_max=1e-6) == [4] * 11
    three = [rec(mse_=1e-9, ted=0), rec(mse_=1e-9, ted=2), rec(mse_=1.0, ted=0)]
    assert cumulative_success(three, mse_max=1e-6, ted_max=5) == [1, 1, 2, 2, 2, 2]
    assert cumulative_success([], mse_max=1e-6) == [0] * 11
    with pytest.raises(ValueError):
        passes(three[0])


def test_r2_criterion_skips_undefined():
    recs = [rec(r2_=None, ted=0, mse_=0.0), rec(r2_=0.995, ted=1)]
    assert cumulative_success(recs, r2_min=0.99, ted_max=2) == [0, 1, 1]


def test_summarize_examples():
    one = rec(mse_=2.0, r2_=0.1, ted=4, size=9, t=3.0)
    row, = summarize([one])
    assert (row.mse, row.r2, row.ted, row.size, row.train_time_s) == (2.0, 0.1, 4.0, 9.0, 3.0)
    row, = summarize([rec(mse_=2.0), rec(mse_=4.0, seed=1)])
    assert row.mse == 3.0
    rows = summarize([rec("noopt"), rec("bfgs", "random"), rec("bfgs"), rec("ls", r2_=None)])
    assert [r.label for r in rows] == ["BFGS", "BFGS Random", "LS", "NoOpt"]
    assert rows[2].r2 is None and rows[2].r2_undefined == 1
    with pytest.raises(ValueError):
        summarize([])


def test_iqr_outliers_flag_only():
    v = [1, 2, 3, 4, 100, float("inf")]
    flags = iqr_outliers(v)
    assert flags.tolist() == [False, False, False, False, True, True]


# -- properties --------------------------------------------------------------

vectors = st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=30)


grid_values = st.integers(-8000, 8000).map(lambda k: k / 8)


@given(st.lists(grid_values, min_size=3, max_size=30), st.data())
def test_mse_zero_iff_equal(y, data):
    yhat = data.draw(st.lists(grid_values, min_size=len(y), max_size=len(y)))
    assert mse(y, yhat) >= 0
    assert (mse(y, yhat) == 0) == (y == yhat)
    r = r2(y, y)
    assert r is None or r == 1.0


@settings(max_examples=200)
@given(vectors, st.data(), st.floats(0.1, 10), st.floats(-10, 10))
def test_pearson_symmetry_and_affine_invariance(a, data, scale, shift):
    b = data.draw(st.lists(st.floats(-1e3, 1e3), min_size=len(a), max_size=len(a)))
    a, b = np.array(a), np.array(b)
    res = pearson(a, b)
    if res is None or np.ptp(a) < 1e-3 or np.ptp(b) < 1e-3:
        return
    assert pearson(b, a).r == pytest.approx(res.r, abs=1e-12)
    assert pearson(scale * a + shift, b).r == pytest.approx(res.r, abs=1e-12)
    assert -1 <= res.r <= 1 and 0 <= res.p_value <= 1


@given(st.lists(st.tuples(st.floats(0, 1e-5), st.integers(0, 12)), max_size=20))
def test_cumulative_monotone(pairs):
    recs = [rec(mse_=m, ted=t) for m, t in pairs]
    loose = cumulative_success(recs, mse_max=1e-6)
    strict = cumulative_success(recs, mse_max=1e-7)
    assert all(x <= y for x, y in zip(loose, loose[1:]))
    assert all(s <= l for s, l in zip(strict, loose))
