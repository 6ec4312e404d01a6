"""Run matrix execution with a resumable JSON-lines record store."""

from __future__ import annotations

import hashlib
import json
import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from ercbench.bench.config import BenchConfig, method_name
from ercbench.canon import canonicalize
from ercbench.expr import evaluate, size, to_prefix
from ercbench.gp import evolve_on
from ercbench.metrics import mse, r2
from ercbench.optim import InitStrategy, OptimizerKind
from ercbench.problems import basis_for, sample_dataset
from ercbench.records import RunRecord
from ercbench.ted import as_labeled, ted

log = logging.getLogger(__name__)

STORE_NAME = "records.jsonl"


@dataclass(frozen=True)
class Cell:
    index: int  # position in the matrix, used to order the store
    problem: str
    variant: str
    kind: OptimizerKind
    init: InitStrategy
    seed: int  # replicate seed as configured

    @property
    def run_id(self) -> str:
        return f"{self.problem}-{self.variant}-{self.kind.value}-{self.init.value}-{self.seed}"


def cell_seed(problem: str, variant: str, method: str, init: str, replicate: int,
              master_seed: int) -> int:
    """Stable 63-bit seed for one cell; independent of which other cells exist."""
    text = "|".join([problem, variant, method, init, str(replicate), str(master_seed)])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") >> 1


def matrix(cfg: BenchConfig) -> list[Cell]:
    cells = []
    for p in cfg.problems:
        for v in cfg.variants:
            for kind, init in cfg.methods:
                for s in cfg.seeds:
                    cells.append(Cell(len(cells), cfg.problem(p).name, v, kind, init, s))
    return cells


def run_cell(cfg: BenchConfig, cell: Cell) -> RunRecord:
    """Evolve one cell and score the best individual. Errors become an error record."""
    try:
        problem = cfg.problem(cell.problem)
        data = sample_dataset(problem)
        basis = basis_for(problem, cell.variant)
        opt = cfg.optimizer(cell.kind, cell.init)
        rng = np.random.default_rng(cell_seed(problem.name, cell.variant, cell.kind.value,
                                               cell.init.value, cell.seed, cfg.master_seed))
        gp = cfg.gp.replace(seed=cell.seed)
        start = time.perf_counter()
        result = evolve_on(data, basis, gp, opt, rng)
        train_time = time.perf_counter() - start
        best = result.best.concrete()
        yhat = evaluate(best, [], data.xs)
        if yhat is None:
            err, r2v = float("inf"), None
        else:
            err, r2v = mse(data.ys, yhat), r2(data.ys, yhat)
        canon_best = canonicalize(best, cfg.canon)
        canon_target = canonicalize(problem.target, cfg.canon)
        distance = int(ted(as_labeled(canon_best.tree), as_labeled(canon_target.tree)))
        return RunRecord(
            run_id=cell.run_id, problem=problem.name, variant=cell.variant,
            method=cell.kind.value, init=cell.init.value, seed=cell.seed,
            mse=err, r2=r2v, ted=distance, size=size(result.best.tree),
            train_time_s=train_time, expr_raw=to_prefix(best),
            expr_canonical=str(canon_best),
        )
    except Exception as exc:  # a failing cell must not abort the matrix
        log.warning("cell %s failed: %s", cell.run_id, exc)
        return RunRecord.failed(cell.run_id, cell.problem, cell.variant, cell.kind.value,
                                cell.init.value, cell.seed,
                                f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}")


def _dumps(rec: RunRecord) -> str:
    return json.dumps(rec.to_dict(), sort_keys=False, separators=(",", ":"))


def read_store(path) -> list[RunRecord]:
    path = Path(path)
    if not path.exists():
        return []
    out = []
    with path.open(encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(RunRecord.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError):
                # a torn last line from an interrupted run is dropped and recomputed
                log.warning("%s:%d: unreadable record skipped", path, n)
    return out


def write_store(path, records: Iterable[RunRecord]) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(_dumps(rec) + "\n")
    tmp.replace(path)


def store_path(cfg: BenchConfig) -> Path:
    return cfg.output_dir / STORE_NAME


def _task(args):
    cfg, cell = args
    return cell, run_cell(cfg, cell)


def run_benchmark(cfg: BenchConfig, store: Optional[Path] = None,
                  progress=None) -> list[RunRecord]:
    """Run every missing cell of the matrix and return the records in matrix order.

    Records are appended to the store as cells finish; at the end the store
    is rewritten in matrix order so its bytes do not depend on scheduling.
    Cells already present with an ``ok`` status are skipped.
    """
    store = Path(store) if store is not None else store_path(cfg)
    store.parent.mkdir(parents=True, exist_ok=True)
    cells = matrix(cfg)
    existing = {r.run_id: r for r in read_store(store)}
    done = {rid: r for rid, r in existing.items() if r.ok}
    todo = [c for c in cells if c.run_id not in done]
    log.info("%d cells, %d already in %s, %d to run", len(cells), len(done), store, len(todo))
    results = dict(done)
    if todo:
        with store.open("a", encoding="utf-8", newline="\n") as fh:
            def record(cell, rec):
                results[cell.run_id] = rec
                fh.write(_dumps(rec) + "\n")
                fh.flush()
                if progress is not None:
                    progress(cell, rec)

            if cfg.parallelism == 1:
                for cell in todo:
                    record(cell, run_cell(cfg, cell))
            else:
                with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
                    futures = [pool.submit(_task, (cfg, c)) for c in todo]
                    for fut in as_completed(futures):
                        record(*fut.result())
    ordered = [results[c.run_id] for c in cells]
    # cells outside the current matrix stay in the store, after the matrix
    in_matrix = {c.run_id for c in cells}
    extra = [r for rid, r in existing.items() if rid not in in_matrix]
    write_store(store, ordered + extra)
    return ordered


__all__ = ["Cell", "cell_seed", "matrix", "run_cell", "run_benchmark", "read_store",
           "write_store", "store_path", "method_name", "STORE_NAME"]
