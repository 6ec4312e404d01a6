"""Benchmark harness: configuration, run matrix, record store, reports and CLI."""

from ercbench.bench.config import BenchConfig
from ercbench.bench.io import export_records, load_records
from ercbench.bench.reports import ReportBundle, build_reports
from ercbench.bench.runner import cell_seed, matrix, read_store, run_benchmark, run_cell

__all__ = ["BenchConfig", "ReportBundle", "build_reports", "cell_seed", "export_records",
           "load_records", "matrix", "read_store", "run_benchmark", "run_cell"]
