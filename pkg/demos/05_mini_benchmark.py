"""A small benchmark matrix, stored and reported.

Two problems, three methods and three seeds at a small GP size.  The store
is resumable: running the script again skips finished cells.  The report
directory gets CSV tables and SVG charts.
"""

import sys
from pathlib import Path

from ercbench.bench.config import BenchConfig
from ercbench.bench.reports import build_reports
from ercbench.bench.runner import run_benchmark
from ercbench.gp import GpConfig

out = Path(sys.argv[1] if len(sys.argv) > 1 else "mini_benchmark")
cfg = BenchConfig(problems=["F1", "F4"], methods=["noopt", "bfgs", "ls"], seeds=[0, 1, 2],
                  gp=GpConfig(population_size=50, generations=15), output_dir=out)
records = run_benchmark(cfg, progress=lambda cell, rec: print(" ", cell.run_id,
                                                              f"mse={rec.mse:.3g}", f"ted={rec.ted}"))
bundle = build_reports(records, out / "report")
print(f"\n{len(records)} records, {len(bundle.files)} report files in {out / 'report'}")
for row in bundle.averages["all"]:
    print(f"{row.label:<8} mse {row.mse:10.4g}  r2 {row.r2:6.3f}  ted {row.ted:4.1f}  "
          f"size {row.size:5.1f}")
