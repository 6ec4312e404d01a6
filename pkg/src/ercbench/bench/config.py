"""Benchmark configuration read from a flat TOML file.

Every key is optional; anything left out takes the library default::

    problems = ["F1", "F4", "F5"]
    variants = ["standard"]
    methods = ["bfgs", "bfgs/random", "ls", "noopt"]  # kind or kind/init; "all" = study set
    seeds = 30                  # replicate count, or an explicit list [0, 3, 7]
    master_seed = 0
    output_dir = "results"
    parallelism = 1

    # GP
    population_size = 200
    generations = 100
    tournament_size = 3
    crossover_prob = 0.9
    mutation_prob = 0.1
    max_depth = 8
    max_size = 50
    elitism = 1
    init_max_depth = 4
    mutation_depth = 4

    # optimizers
    budget = 100                # gradient, least-squares and simplex methods
    population_budget = 750     # PSO, DE, dual annealing
    tolerance = 1e-12

    # canonicalization and reports
    precision = 15
    max_rewrite_passes = 10
    ted_axis = 10

    [[custom_problems]]
    name = "Quadratic"
    expression = "(add (square x) 1.0)"
    interval = [-2.0, 2.0]
    specific = ["square"]
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from ercbench.canon import CanonConfig
from ercbench.gp import GpConfig
from ercbench.optim import (
    POPULATION_KINDS, STUDY_METHODS, DEFAULT_BUDGET, DEFAULT_POPULATION_BUDGET,
    DEFAULT_TOLERANCE, InitStrategy, OptimizerKind, OptimizerSpec, parse_kind,
)
from ercbench.problems import ProblemSpec, builtin_problems, get_problem, problem_from_dict

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

OUTPUT_ENV = "ERCBENCH_OUT"
DEFAULT_SEEDS = 30
VARIANTS = ("standard", "specific")

_GP_KEYS = {f.name for f in fields(GpConfig)} - {"seed"}
_TOP_KEYS = {
    "problems", "variants", "methods", "seeds", "master_seed", "output_dir", "parallelism",
    "budget", "population_budget", "tolerance", "precision", "max_rewrite_passes",
    "ted_axis", "custom_problems",
}


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "results"))


def parse_method(text: str) -> tuple[OptimizerKind, InitStrategy]:
    """``"bfgs"`` or ``"bfgs/random"`` (also ``"bfgs-random"``)."""
    t = text.strip().lower()
    init = InitStrategy.CURRENT
    for sep in ("/", ":"):
        if sep in t:
            t, i = t.split(sep, 1)
            init = InitStrategy(i.strip())
            break
    else:
        if t.endswith("-random"):
            t, init = t[: -len("-random")], InitStrategy.RANDOM
    return parse_kind(t), init


def parse_methods(items) -> list[tuple[OptimizerKind, InitStrategy]]:
    if isinstance(items, str):
        items = [s for s in items.split(",") if s.strip()]
    out = []
    for it in items:
        if str(it).strip().lower() == "all":
            out.extend(m for m in STUDY_METHODS if m not in out)
            continue
        m = parse_method(str(it))
        if m not in out:
            out.append(m)
    return out


def method_name(kind: OptimizerKind, init: InitStrategy) -> str:
    return kind.value if init is InitStrategy.CURRENT else f"{kind.value}/{init.value}"


@dataclass
class BenchConfig:
    problems: list = field(default_factory=lambda: [p.name for p in builtin_problems()])
    variants: list = field(default_factory=lambda: ["standard"])
    methods: list = field(default_factory=lambda: list(STUDY_METHODS))
    seeds: list = field(default_factory=lambda: list(range(DEFAULT_SEEDS)))
    master_seed: int = 0
    gp: GpConfig = field(default_factory=GpConfig)
    budget: int = DEFAULT_BUDGET
    population_budget: int = DEFAULT_POPULATION_BUDGET
    tolerance: float = DEFAULT_TOLERANCE
    canon: CanonConfig = field(default_factory=CanonConfig)
    ted_axis: int = 10
    output_dir: Path = field(default_factory=default_output_dir)
    parallelism: int = 1
    custom_problems: list = field(default_factory=list)  # ProblemSpec

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        self.methods = [m if isinstance(m, tuple) else parse_method(m) for m in self.methods]
        self.methods = [(OptimizerKind(k), InitStrategy(i)) for k, i in self.methods]
        self.validate()

    def validate(self) -> None:
        if not self.problems:
            raise ValueError("config: no problems selected")
        if not self.methods:
            raise ValueError("config: no methods selected")
        if not self.seeds:
            raise ValueError("config: no seeds selected")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("config: duplicate seeds")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad or not self.variants:
            raise ValueError(f"config: variants must be a non-empty subset of {VARIANTS}")
        for name in self.problems:
            self.problem(name)  # raises on unknown names
        if self.parallelism < 1:
            raise ValueError("config: parallelism must be >= 1")
        if self.ted_axis < 0:
            raise ValueError("config: ted_axis must be >= 0")

    def problem(self, name: str) -> ProblemSpec:
        for p in self.custom_problems:
            if p.name == name:
                return p
        try:
            return get_problem(name)
        except KeyError:
            raise ValueError(f"config: unknown problem {name!r}") from None

    def optimizer(self, kind: OptimizerKind, init: InitStrategy) -> OptimizerSpec:
        budget = self.population_budget if kind in POPULATION_KINDS else self.budget
        return OptimizerSpec(kind, init, budget, self.tolerance)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchConfig":
        unknown = set(d) - _TOP_KEYS - _GP_KEYS
        if unknown:
            raise ValueError(f"config: unknown key(s) {sorted(unknown)}")
        kw = {}
        if "problems" in d:
            kw["problems"] = list(d["problems"])
        if "variants" in d:
            kw["variants"] = list(d["variants"])
        if "methods" in d:
            kw["methods"] = parse_methods(d["methods"])
        if "seeds" in d:
            kw["seeds"] = seed_list(d["seeds"])
        for key in ("master_seed", "parallelism", "budget", "population_budget", "ted_axis"):
            if key in d:
                kw[key] = int(d[key])
        if "tolerance" in d:
            kw["tolerance"] = float(d["tolerance"])
        if "output_dir" in d:
            kw["output_dir"] = Path(d["output_dir"])
        gp = {k: d[k] for k in _GP_KEYS if k in d}
        if gp:
            kw["gp"] = GpConfig(**gp)
        canon = {k: int(d[k]) for k in ("precision", "max_rewrite_passes") if k in d}
        if canon:
            kw["canon"] = CanonConfig(**canon)
        if "custom_problems" in d:
            kw["custom_problems"] = [problem_from_dict(p) for p in d["custom_problems"]]
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "BenchConfig":
        path = Path(path)
        try:
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ValueError(f"config: cannot read {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"config: {path}: {exc}") from None
        return cls.from_dict(data)


def seed_list(value) -> list[int]:
    """An integer count ``n`` means seeds ``0..n-1``; a list is taken as given."""
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    if isinstance(value, str) and "," in value:
        return [int(v) for v in value.split(",") if v.strip()]
    n = int(value)
    if n < 1:
        raise ValueError("seed count must be >= 1")
    return list(range(n))


def with_overrides(cfg: BenchConfig, problems: Optional[list] = None,
                   methods: Optional[list] = None, seeds=None,
                   variants: Optional[list] = None, output_dir=None) -> BenchConfig:
    values = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    if problems:
        values["problems"] = list(problems)
    if methods:
        values["methods"] = parse_methods(methods)
    if seeds is not None:
        values["seeds"] = seed_list(seeds)
    if variants:
        values["variants"] = list(variants)
    if output_dir is not None:
        values["output_dir"] = Path(output_dir)
    return BenchConfig(**values)
