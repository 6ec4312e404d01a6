"""The eight constant optimizers on one fitting problem.

The structure c0 * (c1 - exp(-c2 x)) covers F7.  Each optimizer starts from
the same guess and gets its default evaluation budget.
"""

import numpy as np

from ercbench.expr import parse, extract_ercs
from ercbench.optim import Objective, OptimizerKind, OptimizerSpec, optimize
from ercbench.problems import get_problem, sample_dataset

data = sample_dataset(get_problem("F7"))
tree, _ = extract_ercs(parse("(mul 1.0 (sub 1.0 (expneg (mul 1.0 x))))"))
start = np.array([100.0, 1.0, 1.0])

print(f"{'method':<16}{'budget':>8}{'evals':>8}{'loss':>14}   params")
for kind in OptimizerKind:
    spec = OptimizerSpec(kind)
    obj = Objective.for_tree(tree, data.xs, data.ys)
    p, loss = optimize(spec, obj, start, np.random.default_rng(1))
    print(f"{kind.value:<16}{spec.budget:>8}{obj.evals:>8}{loss:>14.4g}   {np.round(p, 4)}")
