from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

# column order of exported tables
RECORD_COLUMNS = (
    "run_id", "problem", "variant", "method", "init", "seed", "mse", "r2", "ted",
    "size", "train_time_s", "expr_raw", "expr_canonical",
)


@dataclass
class RunRecord:
    """Outcome of one (problem, variant, method, init, seed) cell.

    ``r2`` is ``None`` when the target is constant.  ``status``/``error`` are
    kept in the record store only; failed cells are not exported or reported.
    """

    run_id: str
    problem: str
    variant: str
    method: str
    init: str
    seed: int
    mse: float
    r2: Optional[float]
    ted: int
    size: int
    train_time_s: float
    expr_raw: str
    expr_canonical: str
    status: str = "ok"
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self, with_status: bool = True) -> dict:
        d = asdict(self)
        if not with_status:
            d = {k: d[k] for k in RECORD_COLUMNS}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        names = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in d.items() if k in names}
        for key in ("mse", "train_time_s"):
            kwargs[key] = float(kwargs[key])
        if kwargs.get("r2") is not None:
            kwargs["r2"] = float(kwargs["r2"])
        for key in ("seed", "ted", "size"):
            kwargs[key] = int(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def failed(cls, run_id, problem, variant, method, init, seed, error: str) -> "RunRecord":
        return cls(run_id, problem, variant, method, init, seed, math.inf, None, -1, 0,
                   0.0, "", "", status="error", error=error)
