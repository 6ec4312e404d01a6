"""Generational tree GP with per-offspring constant optimization."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ercbench.expr import (
    BasisSet, Node, depth, extract_ercs, random_tree, size, substitute_params, to_prefix,
)
from ercbench.optim import Objective, OptimizerKind, OptimizerSpec, optimize
from ercbench.problems import Dataset, ProblemSpec, basis_for, sample_dataset


@dataclass(frozen=True)
class GpConfig:
    population_size: int = 200
    generations: int = 100
    tournament_size: int = 3
    crossover_prob: float = 0.9
    mutation_prob: float = 0.1
    max_depth: int = 8
    max_size: int = 50
    elitism: int = 1
    seed: int = 0
    init_max_depth: int = 4
    mutation_depth: int = 4

    def __post_init__(self):
        for name in ("population_size", "tournament_size", "max_depth", "max_size",
                     "init_max_depth", "mutation_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.tournament_size > self.population_size:
            raise ValueError("tournament_size must not exceed population_size")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must satisfy 0 <= elitism < population_size")
        if self.init_max_depth > self.max_depth:
            raise ValueError("init_max_depth must not exceed max_depth")

    def replace(self, **changes) -> "GpConfig":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return GpConfig(**values)


@dataclass(frozen=True)
class Individual:
    tree: Node  # ERC-slotted
    params: np.ndarray
    fitness: float

    @property
    def size(self) -> int:
        return size(self.tree)

    def concrete(self) -> Node:
        return substitute_params(self.tree, self.params)

    def __repr__(self) -> str:
        return f"Individual({to_prefix(self.concrete())}, fitness={self.fitness:.6g})"


@dataclass
class RunResult:
    best: Individual
    history: list = field(default_factory=list)  # (best fitness, mean size) per generation
    wall_time: float = 0.0
    evaluations: int = 0


def tournament_select(population, k: int, rng: np.random.Generator):
    """Lowest fitness among ``k`` uniform draws with replacement (first drawn wins ties)."""
    if not population:
        raise ValueError("empty population")
    if k < 1:
        raise ValueError("tournament size must be >= 1")
    picks = rng.integers(0, len(population), size=k)
    best = picks[0]
    for i in picks[1:]:
        if population[i].fitness < population[best].fitness:
            best = i
    return population[best]


def _paths(tree: Node) -> list[tuple]:
    """Child-index paths of every node in preorder."""
    out = []

    def walk(node, path):
        out.append(path)
        for i, c in enumerate(node.children):
            walk(c, path + (i,))

    walk(tree, ())
    return out


def _get(tree: Node, path) -> Node:
    for i in path:
        tree = tree.children[i]
    return tree


def _put(tree: Node, path, sub: Node) -> Node:
    if not path:
        return sub
    i = path[0]
    kids = list(tree.children)
    kids[i] = _put(kids[i], path[1:], sub)
    return Node(tree.op, tuple(kids), tree.value)


def _within(tree: Node, max_depth: Optional[int], max_size: Optional[int]) -> bool:
    return ((max_depth is None or depth(tree) <= max_depth)
            and (max_size is None or size(tree) <= max_size))


def subtree_crossover(a: Node, b: Node, rng: np.random.Generator,
                      max_depth: Optional[int] = None,
                      max_size: Optional[int] = None) -> tuple[Node, Node]:
    """Swap uniformly chosen subtrees; an offspring over a cap is replaced by its parent."""
    pa, pb = _paths(a), _paths(b)
    i = pa[int(rng.integers(len(pa)))]
    j = pb[int(rng.integers(len(pb)))]
    sa, sb = _get(a, i), _get(b, j)
    c1, c2 = _put(a, i, sb), _put(b, j, sa)
    if not _within(c1, max_depth, max_size):
        c1 = a
    if not _within(c2, max_depth, max_size):
        c2 = b
    return c1, c2


def subtree_mutation(a: Node, basis: BasisSet, rng: np.random.Generator,
                     max_depth: Optional[int] = None, max_size: Optional[int] = None,
                     mutation_depth: int = 4) -> Node:
    """Replace a uniformly chosen subtree by a fresh random tree.

    The new subtree's depth is limited by ``mutation_depth`` and by what is
    left of ``max_depth`` below the chosen point.
    """
    paths = _paths(a)
    p = paths[int(rng.integers(len(paths)))]
    budget = mutation_depth
    if max_depth is not None:
        budget = min(budget, max_depth - len(p))
    budget = max(budget, 1)
    child = _put(a, p, random_tree(basis, budget, rng))
    return child if _within(child, max_depth, max_size) else a


def _deterministic(opt: OptimizerSpec) -> bool:
    return opt.kind is OptimizerKind.NOOPT or not opt.uses_rng


class _Evaluator:
    """Constant optimization + fitness for concrete trees, with a cache when that is exact."""

    def __init__(self, data: Dataset, opt: OptimizerSpec, rng: np.random.Generator):
        self.data = data
        self.opt = opt
        self.rng = rng
        self.cache: Optional[dict] = {} if _deterministic(opt) else None
        self.evaluations = 0

    def __call__(self, concrete: Node) -> Individual:
        key = None
        if self.cache is not None:
            key = to_prefix(concrete)
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        tree, params = extract_ercs(concrete)
        obj = Objective.for_tree(tree, self.data.xs, self.data.ys)
        params, loss = optimize(self.opt, obj, params, self.rng)
        self.evaluations += obj.evals
        fitness = float(loss) if np.isfinite(loss) else np.inf
        ind = Individual(tree, np.asarray(params, dtype=float), fitness)
        if key is not None:
            self.cache[key] = ind
        return ind


def _init_population(basis: BasisSet, gp: GpConfig, rng, evaluate) -> list[Individual]:
    pop = []
    while len(pop) < gp.population_size:
        t = random_tree(basis, gp.init_max_depth, rng)
        if not _within(t, gp.max_depth, gp.max_size):
            continue
        pop.append(evaluate(t))
    return pop


def _better(a: Individual, b: Optional[Individual]) -> bool:
    return b is None or a.fitness < b.fitness


def evolve_on(data: Dataset, basis: BasisSet, gp: GpConfig, opt: OptimizerSpec,
              rng: np.random.Generator) -> RunResult:
    """The evolutionary loop on an explicit dataset and basis set."""
    start = time.perf_counter()
    evaluate = _Evaluator(data, opt, rng)
    with np.errstate(all="ignore"):
        pop = _init_population(basis, gp, rng, evaluate)
        best = min(pop, key=lambda ind: ind.fitness)
        history = [(best.fitness, float(np.mean([ind.size for ind in pop])))]
        for _ in range(gp.generations):
            ranked = sorted(range(len(pop)), key=lambda i: pop[i].fitness)
            nxt = [pop[i] for i in ranked[:gp.elitism]]
            while len(nxt) < gp.population_size:
                pa = tournament_select(pop, gp.tournament_size, rng)
                pb = tournament_select(pop, gp.tournament_size, rng)
                ta, tb = pa.concrete(), pb.concrete()
                ca, cb = ta, tb
                if rng.random() < gp.crossover_prob:
                    ca, cb = subtree_crossover(ta, tb, rng, gp.max_depth, gp.max_size)
                for parent, parent_tree, child in ((pa, ta, ca), (pb, tb, cb)):
                    if len(nxt) >= gp.population_size:
                        break
                    if rng.random() < gp.mutation_prob:
                        child = subtree_mutation(child, basis, rng, gp.max_depth, gp.max_size,
                                                 gp.mutation_depth)
                    # unchanged copies keep their optimized constants
                    nxt.append(parent if child == parent_tree else evaluate(child))
            pop = nxt
            gen_best = min(pop, key=lambda ind: ind.fitness)
            if _better(gen_best, best):
                best = gen_best
            history.append((best.fitness, float(np.mean([ind.size for ind in pop]))))
    return RunResult(best, history, time.perf_counter() - start, evaluate.evaluations)


def evolve(problem: ProblemSpec, variant: str, gp: GpConfig, opt: OptimizerSpec,
           rng: Optional[np.random.Generator] = None) -> RunResult:
    """Run GP on a built-in or custom problem; ``rng`` defaults to one seeded by ``gp.seed``."""
    if rng is None:
        rng = np.random.default_rng(gp.seed)
    return evolve_on(sample_dataset(problem), basis_for(problem, variant), gp, opt, rng)


__all__ = [
    "GpConfig", "Individual", "RunResult", "evolve", "evolve_on", "tournament_select",
    "subtree_crossover", "subtree_mutation",
]
