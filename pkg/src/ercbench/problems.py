"""Built-in univariate benchmark suite and dataset sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ercbench.expr import BasisSet, Node, evaluate, parse, size

DEFAULT_POINTS = 1000


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    target: Node
    interval: tuple[float, float]
    specific_ops: frozenset = field(default_factory=frozenset)
    n_points: int = DEFAULT_POINTS
    note: str = ""

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise ValueError(f"{self.name}: interval must satisfy lo < hi")
        if self.n_points < 2:
            raise ValueError(f"{self.name}: need at least two sample points")
        object.__setattr__(self, "specific_ops", frozenset(self.specific_ops))

    @property
    def target_size(self) -> int:
        return size(self.target)


@dataclass(frozen=True)
class Dataset:
    xs: np.ndarray
    ys: np.ndarray


def _p(name, expr, interval, ops, note=""):
    return ProblemSpec(name, parse(expr), interval, frozenset(ops), note=note)


def builtin_problems() -> list[ProblemSpec]:
    """The ten-problem suite in its fixed order."""
    return [
        _p("F1", "(add 1.57 (mul 24.3 x))", (-5.0, 5.0), {"square"}),
        _p("F4", "(add -2.3 (mul 0.13 (sin x)))", (-5.0, 5.0), {"sin", "cos"}),
        _p("F5", "(add 3.0 (mul 2.13 (ln x)))", (0.1, 10.0), {"ln"}),
        _p("F6", "(add 1.3 (mul 0.13 (sqrt x)))", (0.1, 10.0), {"sqrt"}),
        _p("F7", "(mul 213.81 (sub 1.0 (expneg (mul 0.547237 x))))", (0.1, 10.0),
           {"exp", "expneg"}),
        _p("F11", "(add 6.87 (mul 11.0 (cos (mul 7.23 (cube x)))))", (-5.0, 5.0),
           {"cos", "sin", "cube"}),
        # the printed formula has no variable; read as a Gompertz-type logistic curve
        _p("Logistic", "(mul 10.0 (expneg (mul 0.5 (expneg (add (mul 0.5 x) -2.0)))))",
           (-5.0, 15.0), {"exp", "expneg"},
           note="interpreted as 10*exp(-0.5*exp(-0.5*x + 2))"),
        _p("Projectile", "(sub (mul 6.0 x) (mul 9.8 (square x)))", (-5.0, 5.0), {"square"}),
        _p("DampedPendulum", "(mul (expneg (div x 10.0)) (mul 3.0 (cos (mul 2.0 x))))",
           (-5.0, 5.0), {"exp", "expneg", "cos", "sin"}),
        _p("RadioactiveDecay", "(mul 10.0 (expneg (mul 0.5 x)))", (-5.0, 5.0),
           {"exp", "expneg"}),
    ]


def get_problem(name: str) -> ProblemSpec:
    key = name.strip().lower().replace("_", "").replace("-", "").replace(" ", "")
    for p in builtin_problems():
        if p.name.lower() == key:
            return p
    aliases = {"projectilemotion": "Projectile", "decay": "RadioactiveDecay",
               "pendulum": "DampedPendulum"}
    if key in aliases:
        return get_problem(aliases[key])
    raise KeyError(f"unknown problem {name!r}")


def grid(lo: float, hi: float, n: int) -> np.ndarray:
    i = np.arange(n, dtype=float)
    xs = lo + i * (hi - lo) / (n - 1)
    xs[-1] = hi
    return xs


def sample_dataset(p: ProblemSpec) -> Dataset:
    """Uniform inclusive grid over the interval; targets evaluated exactly."""
    xs = grid(p.interval[0], p.interval[1], p.n_points)
    ys = evaluate(p.target, [], xs)
    if ys is None:
        raise ValueError(f"{p.name}: target is not finite on its sampling grid")
    return Dataset(xs, ys)


def basis_for(p: ProblemSpec, variant: str) -> BasisSet:
    if variant == "standard":
        return BasisSet.standard()
    if variant == "specific":
        return BasisSet.specific(p.specific_ops)
    raise ValueError(f"variant must be 'standard' or 'specific', got {variant!r}")


def problem_from_dict(d: dict) -> ProblemSpec:
    """Custom problem from config: expression (prefix), interval, n_points, specific ops."""
    lo, hi = d["interval"]
    return ProblemSpec(
        name=d["name"],
        target=parse(d["expression"]),
        interval=(float(lo), float(hi)),
        specific_ops=frozenset(d.get("specific", ())),
        n_points=int(d.get("n_points", DEFAULT_POINTS)),
    )
