"""Population-based global optimizers: particle swarm and differential evolution.

Both evaluate a whole population per iteration through ``Objective.batch_loss``.
Particle/agent 0 starts exactly at the initial guess so the result is never
worse than the starting point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ercbench.optim.objective import Objective

PSO_W = 0.7298
PSO_C1 = 1.49618
PSO_C2 = 1.49618
DE_F = 0.8
DE_CR = 0.9


def jittered_population(x0, size: int, rng: np.random.Generator) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    pop = x0 + rng.standard_normal((size, x0.size))
    pop[0] = x0
    return pop


@dataclass
class Swarm:
    x: np.ndarray          # positions (m, n)
    v: np.ndarray          # velocities
    pbest: np.ndarray
    pbest_f: np.ndarray
    gbest: np.ndarray
    gbest_f: float


def init_swarm(obj: Objective, positions) -> Swarm:
    x = np.array(positions, dtype=float)
    f = obj.batch_loss(x)
    i = int(np.argmin(f))
    return Swarm(x=x, v=np.zeros_like(x), pbest=x.copy(), pbest_f=f.copy(),
                 gbest=x[i].copy(), gbest_f=float(f[i]))


def pso_step(sw: Swarm, obj: Objective, rng: np.random.Generator) -> Swarm:
    """Inertia-weighted velocity update pulled toward personal and global bests."""
    r1 = rng.random(sw.x.shape)
    r2 = rng.random(sw.x.shape)
    sw.v = PSO_W * sw.v + PSO_C1 * r1 * (sw.pbest - sw.x) + PSO_C2 * r2 * (sw.gbest - sw.x)
    sw.x = sw.x + sw.v
    f = obj.batch_loss(sw.x)
    better = f < sw.pbest_f
    sw.pbest[better] = sw.x[better]
    sw.pbest_f[better] = f[better]
    i = int(np.argmin(sw.pbest_f))
    if sw.pbest_f[i] < sw.gbest_f:
        sw.gbest, sw.gbest_f = sw.pbest[i].copy(), float(sw.pbest_f[i])
    return sw


def minimize_pso(obj: Objective, x0, rng: np.random.Generator, budget: int = 750,
                 tol: float = 1e-12, particles: int = 15):
    limit = obj.evals + budget
    sw = init_swarm(obj, jittered_population(x0, particles, rng))
    while obj.evals + particles <= limit:
        prev = sw.gbest_f
        sw = pso_step(sw, obj, rng)
        spread = np.max(np.abs(sw.x - sw.gbest)) + np.max(np.abs(sw.v))
        if sw.gbest_f == 0.0 or (prev - sw.gbest_f <= tol * abs(prev) and spread <= 1e-12):
            break
    return sw.gbest.copy(), sw.gbest_f


@dataclass
class DEPopulation:
    x: np.ndarray
    f: np.ndarray

    @property
    def best(self) -> tuple[np.ndarray, float]:
        i = int(np.argmin(self.f))
        return self.x[i].copy(), float(self.f[i])


def de_step(pop: DEPopulation, obj: Objective, rng: np.random.Generator) -> DEPopulation:
    """One generation of DE/rand/1/bin with greedy one-to-one selection."""
    m, n = pop.x.shape
    # three distinct partners per agent, none equal to the agent itself
    keys = rng.random((m, m))
    np.fill_diagonal(keys, np.inf)
    idx = np.argsort(keys, axis=1)[:, :3]
    mutant = pop.x[idx[:, 0]] + DE_F * (pop.x[idx[:, 1]] - pop.x[idx[:, 2]])
    cross = rng.random((m, n)) < DE_CR
    cross[np.arange(m), rng.integers(n, size=m)] = True
    trial = np.where(cross, mutant, pop.x)
    ft = obj.batch_loss(trial)
    keep = ft <= pop.f
    pop.x = np.where(keep[:, None], trial, pop.x)
    pop.f = np.where(keep, ft, pop.f)
    return pop


def minimize_de(obj: Objective, x0, rng: np.random.Generator, budget: int = 750,
                tol: float = 1e-12, agents: int = 15):
    limit = obj.evals + budget
    x = jittered_population(x0, agents, rng)
    pop = DEPopulation(x, obj.batch_loss(x))
    while obj.evals + agents <= limit:
        pop = de_step(pop, obj, rng)
        finite = pop.f[np.isfinite(pop.f)]
        if finite.size == agents and np.ptp(finite) <= tol * max(abs(finite.min()), 1e-300):
            break
    return pop.best
