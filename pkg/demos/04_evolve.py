"""One GP run on F1, with and without constant optimization.

Without an optimizer the constants stay at their random N(0, 1) draws and
the run has to build 24.3 out of arithmetic; with LS every new expression
gets its constants fitted.
"""

from ercbench.canon import canonicalize
from ercbench.gp import GpConfig, evolve
from ercbench.optim import OptimizerSpec
from ercbench.problems import get_problem

problem = get_problem("F1")
gp = GpConfig(population_size=100, generations=30, seed=5)
for method in ("noopt", "ls"):
    res = evolve(problem, "standard", gp, OptimizerSpec(method))
    best = res.best.concrete()
    print(f"{method:>6}: MSE {res.best.fitness:.3g} in {res.wall_time:.1f}s, "
          f"size {res.best.size}, canonical {canonicalize(best)}")
    print("        fitness by generation:",
          " ".join(f"{f:.2g}" for f, _ in res.history[::5]))
