"""Report tables and charts derived from a record store.

Everything here is a pure function of the records: the same store always
produces the same files, byte for byte.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from ercbench.bench import svg
from ercbench.metrics import (
    MSE_THRESHOLD, R2_THRESHOLD, TED_AXIS, CorrelationResult, cumulative_success,
    iqr_outliers, method_label, method_order_key, pearson, summarize,
)
from ercbench.problems import get_problem
from ercbench.records import RunRecord

log = logging.getLogger(__name__)


@dataclass
class ReportBundle:
    out_dir: Path
    files: list = field(default_factory=list)
    distributions: dict = field(default_factory=dict)  # (problem, variant) -> rows
    size_correlations: list = field(default_factory=list)
    ted_mse_correlations: list = field(default_factory=list)
    heatmaps: dict = field(default_factory=dict)  # (criterion, problem, variant) -> {label: counts}
    averages: dict = field(default_factory=dict)  # scope -> list[SummaryRow]


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(v) for v in r])
    return buf.getvalue()


def _slug(*parts: str) -> str:
    return "_".join(p.replace(" ", "-").replace("/", "-") for p in parts)


def _by_method(records):
    groups = defaultdict(list)
    for r in records:
        groups[(r.method, r.init)].append(r)
    return [(k, groups[k]) for k in sorted(groups, key=lambda k: method_order_key(*k))]


def _correlation(a, b, what: str) -> Optional[CorrelationResult]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    keep = np.isfinite(a) & np.isfinite(b)
    if (~keep).any():
        log.info("%s: %d non-finite pair(s) left out", what, int((~keep).sum()))
    a, b = a[keep], b[keep]
    if a.size < 3:
        log.info("%s: fewer than 3 records, correlation skipped", what)
        return None
    res = pearson(a, b)
    if res is None:
        log.info("%s: constant input, correlation undefined", what)
    return res


def _fmt_p(res: Optional[CorrelationResult]) -> str:
    return "" if res is None else f"p={res.p_value:.2g}"


class _Writer:
    def __init__(self, bundle: ReportBundle):
        self.bundle = bundle

    def write(self, rel: str, text: str) -> None:
        path = self.bundle.out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
        self.bundle.files.append(path)


def _distribution_rows(records, target_size: Optional[int]):
    rows = []
    for (method, init), recs in _by_method(records):
        mse_flags = iqr_outliers([r.mse for r in recs])
        ted_flags = iqr_outliers([r.ted for r in recs])
        size_flags = iqr_outliers([r.size for r in recs])
        for r, fm, ft, fs in zip(recs, mse_flags, ted_flags, size_flags):
            rows.append((method_label(method, init), method, init, r.seed, r.mse, bool(fm),
                         r.ted, bool(ft), r.size, bool(fs), target_size))
    return rows


DIST_HEADER = ("label", "method", "init", "seed", "mse", "mse_outlier", "ted", "ted_outlier",
               "size", "size_outlier", "target_size")


def build_reports(records: Sequence[RunRecord], out_dir, ted_axis: int = TED_AXIS,
                  target_size: Optional[Callable[[str], Optional[int]]] = None) -> ReportBundle:
    """Write every table and chart for ``records`` under ``out_dir``.

    Failed cells (non-``ok`` status) are ignored.  ``target_size`` maps a
    problem name to the node count of its target expression (built-in
    problems are looked up automatically).
    """
    records = [r for r in records if r.ok]
    if not records:
        raise ValueError("no successful records to report on")
    bundle = ReportBundle(Path(out_dir))
    out = _Writer(bundle)

    def tsize(name):
        if target_size is not None:
            return target_size(name)
        try:
            return get_problem(name).target_size
        except KeyError:
            return None

    pv_keys = sorted({(r.problem, r.variant) for r in records},
                     key=lambda k: (_problem_rank(k[0]), k[0], k[1]))
    by_pv = defaultdict(list)
    for r in records:
        by_pv[(r.problem, r.variant)].append(r)

    # distributions and box plots
    for key in pv_keys:
        p, v = key
        recs = by_pv[key]
        ts = tsize(p)
        rows = _distribution_rows(recs, ts)
        bundle.distributions[key] = rows
        text = _csv(DIST_HEADER, rows)
        out.write(f"distributions/{_slug(p, v)}.csv", text)
        groups = _by_method(recs)
        labels = [method_label(m, i) for (m, i), _ in groups]
        out.write(f"charts/mse_{_slug(p, v)}.svg", svg.box_plot(
            f"MSE distribution: {p} {v}", [(lab, [r.mse for r in g])
                                          for lab, (_, g) in zip(labels, groups)],
            "MSE (log scale)", log10=True, data_csv=text))
        out.write(f"charts/ted_{_slug(p, v)}.svg", svg.box_plot(
            f"TED distribution: {p} {v}", [(lab, [r.ted for r in g])
                                          for lab, (_, g) in zip(labels, groups)],
            "TED", data_csv=text))
        out.write(f"charts/size_{_slug(p, v)}.svg", svg.box_plot(
            f"Size distribution: {p} {v}", [(lab, [r.size for r in g])
                                           for lab, (_, g) in zip(labels, groups)],
            "size (nodes)", marker=None if ts is None else float(ts),
            marker_label="" if ts is None else f"target size {ts}", data_csv=text))

    # size-TED and size-MSE correlation per method, pooled over problems
    rows = []
    for (method, init), recs in _by_method(records):
        label = method_label(method, init)
        sizes = [r.size for r in recs]
        st = _correlation(sizes, [r.ted for r in recs], f"size-TED {label}")
        sm = _correlation(sizes, [r.mse for r in recs], f"size-MSE {label}")
        rows.append((label, method, init, len(recs),
                     None if st is None else st.r, None if st is None else st.p_value,
                     None if sm is None else sm.r, None if sm is None else sm.p_value))
    bundle.size_correlations = rows
    text = _csv(("label", "method", "init", "n", "r_size_ted", "p_size_ted", "r_size_mse",
                 "p_size_mse"), rows)
    out.write("size_correlation.csv", text)
    out.write("charts/size_correlation.svg", svg.bar_chart(
        "Pearson correlation of size with TED and MSE", [r[0] for r in rows],
        [("size vs TED", [r[4] for r in rows]), ("size vs MSE", [r[6] for r in rows])],
        annotations=[[_pfmt(r[5]) for r in rows], [_pfmt(r[7]) for r in rows]],
        y_label="Pearson r", data_csv=text))

    # TED-MSE correlation grid, method x (problem, variant)
    grid_rows = []
    methods = _by_method(records)
    for (method, init), _ in methods:
        for p, v in pv_keys:
            recs = [r for r in by_pv[(p, v)] if r.method == method and r.init == init]
            res = _correlation([r.ted for r in recs], [r.mse for r in recs],
                               f"TED-MSE {method}/{init} {p} {v}") if recs else None
            grid_rows.append((method_label(method, init), method, init, p, v, len(recs),
                              None if res is None else res.r,
                              None if res is None else res.p_value))
    bundle.ted_mse_correlations = grid_rows
    text = _csv(("label", "method", "init", "problem", "variant", "n", "r", "p_value"), grid_rows)
    out.write("ted_mse_correlation.csv", text)
    cols = [f"{p} {v}" for p, v in pv_keys]
    values = [[row[6] for row in grid_rows[i * len(pv_keys):(i + 1) * len(pv_keys)]]
              for i in range(len(methods))]
    out.write("charts/ted_mse_correlation.svg", svg.heatmap(
        "Pearson correlation of TED and MSE", [method_label(*k) for k, _ in methods], cols,
        values, fmt="{:.2f}", vmin=-1.0, vmax=1.0, data_csv=text))

    # cumulative success heatmaps
    ted_cols = [str(k) for k in range(ted_axis + 1)]
    for criterion, kw, title in (("mse", {"mse_max": MSE_THRESHOLD}, "MSE <= 1e-6"),
                                 ("r2", {"r2_min": R2_THRESHOLD}, "R2 >= 0.99")):
        hrows = []
        for p, v in pv_keys:
            table = {}
            for (method, init), recs in _by_method(by_pv[(p, v)]):
                counts = cumulative_success(recs, ted_max=ted_axis, **kw)
                table[method_label(method, init)] = counts
                hrows.append((p, v, method_label(method, init), method, init, len(recs),
                              *counts))
            bundle.heatmaps[(criterion, p, v)] = table
            sub = _csv(("label", *[f"ted_le_{c}" for c in ted_cols]),
                       [(lab, *c) for lab, c in table.items()])
            out.write(f"charts/heatmap_{criterion}_{_slug(p, v)}.svg", svg.heatmap(
                f"Cumulative successes, {title}: {p} {v}", list(table), ted_cols,
                [list(map(float, c)) for c in table.values()], fmt="{:.0f}", vmin=0.0,
                x_label="TED <= k", data_csv=sub))
        out.write(f"heatmap_{criterion}.csv", _csv(
            ("problem", "variant", "label", "method", "init", "n",
             *[f"ted_le_{c}" for c in ted_cols]), hrows))

    # averages table: all records, then per variant
    avg_rows = []
    scopes = [("all", records)] + [(v, [r for r in records if r.variant == v])
                                   for v in sorted({r.variant for r in records})]
    for scope, recs in scopes:
        summary = summarize(recs)
        bundle.averages[scope] = summary
        for s in summary:
            avg_rows.append((scope, s.label, s.method, s.init, s.n, s.mse, s.r2, s.ted,
                             s.train_time_s, s.size, s.r2_undefined))
    out.write("averages.csv", _csv(("scope", "label", "method", "init", "n", "mse", "r2",
                                    "ted", "train_time_s", "size", "r2_undefined"), avg_rows))
    return bundle


def _pfmt(p: Optional[float]) -> str:
    return "" if p is None else f"p={p:.2g}"


def _problem_rank(name: str) -> int:
    from ercbench.problems import builtin_problems

    names = [p.name for p in builtin_problems()]
    return names.index(name) if name in names else len(names)
