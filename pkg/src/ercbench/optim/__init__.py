"""Constant optimizers behind a single ``optimize`` entry point."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ercbench.optim.annealing import dual_annealing_step, minimize_dual_annealing
from ercbench.optim.gradient import bfgs_step, cg_step, minimize_bfgs, minimize_cg
from ercbench.optim.lm import lm_step, minimize_lm
from ercbench.optim.objective import Objective, numeric_gradient
from ercbench.optim.population import de_step, minimize_de, minimize_pso, pso_step
from ercbench.optim.simplex import minimize_nelder_mead, nelder_mead_step


class OptimizerKind(str, Enum):
    NOOPT = "noopt"
    BFGS = "bfgs"
    CG = "cg"
    LS = "ls"
    PSO = "pso"
    NELDER_MEAD = "nelder-mead"
    DE = "de"
    DUAL_ANNEALING = "dual-annealing"


class InitStrategy(str, Enum):
    CURRENT = "current"
    RANDOM = "random"


POPULATION_KINDS = {OptimizerKind.PSO, OptimizerKind.DE, OptimizerKind.DUAL_ANNEALING}
# kinds whose result depends on the RNG even with the current-value start
STOCHASTIC_KINDS = POPULATION_KINDS

DEFAULT_BUDGET = 100
DEFAULT_POPULATION_BUDGET = 50 * 15
DEFAULT_TOLERANCE = 1e-12

_ALIASES = {
    "nm": OptimizerKind.NELDER_MEAD,
    "neldermead": OptimizerKind.NELDER_MEAD,
    "lm": OptimizerKind.LS,
    "da": OptimizerKind.DUAL_ANNEALING,
    "dualannealing": OptimizerKind.DUAL_ANNEALING,
}


def parse_kind(name: str) -> OptimizerKind:
    key = name.strip().lower()
    if key in _ALIASES:
        return _ALIASES[key]
    return OptimizerKind(key)


def default_budget(kind: OptimizerKind) -> int:
    return DEFAULT_POPULATION_BUDGET if kind in POPULATION_KINDS else DEFAULT_BUDGET


@dataclass(frozen=True)
class OptimizerSpec:
    kind: OptimizerKind
    init: InitStrategy = InitStrategy.CURRENT
    budget: Optional[int] = None
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        object.__setattr__(self, "kind", parse_kind(self.kind) if isinstance(self.kind, str)
                           else OptimizerKind(self.kind))
        object.__setattr__(self, "init", InitStrategy(self.init))
        if self.budget is None:
            object.__setattr__(self, "budget", default_budget(self.kind))
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")

    @property
    def label(self) -> str:
        """Row name in the style of the averages table, e.g. ``BFGS Random``."""
        base = DISPLAY_NAMES[self.kind]
        return f"{base} Random" if self.init is InitStrategy.RANDOM else base

    @property
    def uses_rng(self) -> bool:
        return self.kind in STOCHASTIC_KINDS or (
            self.init is InitStrategy.RANDOM and self.kind is not OptimizerKind.NOOPT)


DISPLAY_NAMES = {
    OptimizerKind.NOOPT: "NoOpt",
    OptimizerKind.BFGS: "BFGS",
    OptimizerKind.CG: "CG",
    OptimizerKind.LS: "LS",
    OptimizerKind.PSO: "PSO",
    OptimizerKind.NELDER_MEAD: "Nelder-Mead",
    OptimizerKind.DE: "Differential Evolution",
    OptimizerKind.DUAL_ANNEALING: "Dual Annealing",
}

# the twelve configurations compared in the study, in report order
STUDY_METHODS = [
    (OptimizerKind.BFGS, InitStrategy.CURRENT),
    (OptimizerKind.BFGS, InitStrategy.RANDOM),
    (OptimizerKind.CG, InitStrategy.CURRENT),
    (OptimizerKind.CG, InitStrategy.RANDOM),
    (OptimizerKind.LS, InitStrategy.CURRENT),
    (OptimizerKind.LS, InitStrategy.RANDOM),
    (OptimizerKind.PSO, InitStrategy.CURRENT),
    (OptimizerKind.NELDER_MEAD, InitStrategy.CURRENT),
    (OptimizerKind.NELDER_MEAD, InitStrategy.RANDOM),
    (OptimizerKind.NOOPT, InitStrategy.CURRENT),
    (OptimizerKind.DE, InitStrategy.CURRENT),
    (OptimizerKind.DUAL_ANNEALING, InitStrategy.CURRENT),
]


def optimize(spec: OptimizerSpec, obj: Objective, current,
             rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Optimize a parameter vector; returns ``(params, loss)``.

    The result is never worse than the chosen starting point (``current`` or a
    standard-normal draw).  NoOpt and zero-dimensional problems return
    ``current`` untouched.
    """
    current = np.asarray(current, dtype=float)
    if current.size != obj.dim:
        raise ValueError(f"expected {obj.dim} parameters, got {current.size}")
    if spec.kind is OptimizerKind.NOOPT or current.size == 0:
        return current.copy(), obj.loss(current)
    if spec.init is InitStrategy.RANDOM:
        x0 = rng.standard_normal(current.size)
    else:
        x0 = current.copy()
    p, loss = _dispatch(spec, obj, x0, rng)
    if not np.isfinite(loss):
        # nothing viable was found; hand back the starting point for the caller to penalize
        return x0, np.inf
    return p, loss


def _dispatch(spec, obj, x0, rng):
    kind, budget, tol = spec.kind, spec.budget, spec.tolerance
    if kind is OptimizerKind.BFGS:
        return minimize_bfgs(obj, x0, budget, tol)
    if kind is OptimizerKind.CG:
        return minimize_cg(obj, x0, budget, tol)
    if kind is OptimizerKind.LS:
        return minimize_lm(obj, x0, budget, tol)
    if kind is OptimizerKind.NELDER_MEAD:
        return minimize_nelder_mead(obj, x0, budget, tol)
    if kind is OptimizerKind.PSO:
        return minimize_pso(obj, x0, rng, budget, tol)
    if kind is OptimizerKind.DE:
        return minimize_de(obj, x0, rng, budget, tol)
    if kind is OptimizerKind.DUAL_ANNEALING:
        return minimize_dual_annealing(obj, x0, rng, budget, tol)
    raise ValueError(f"unhandled optimizer {kind}")


__all__ = [
    "Objective", "OptimizerKind", "InitStrategy", "OptimizerSpec", "optimize",
    "numeric_gradient", "lm_step", "pso_step", "nelder_mead_step", "de_step",
    "dual_annealing_step", "bfgs_step", "cg_step", "parse_kind", "STUDY_METHODS",
    "DISPLAY_NAMES", "default_budget",
]
