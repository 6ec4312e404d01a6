"""Expression trees, ERC slots and evaluation.

A tree's constants can be pulled out into a parameter vector.  The optimizers
work on that vector, and the evaluated values do not depend on which form
you evaluate.
"""

import numpy as np

from ercbench.expr import (
    BasisSet, evaluate, extract_ercs, parse, random_tree, size, substitute_params, to_prefix,
)

f1 = parse("(add 1.57 (mul 24.3 x))")
print("F1 target:", to_prefix(f1), "size", size(f1))

slotted, params = extract_ercs(f1)
print("slotted:  ", to_prefix(slotted), "params", params)

xs = np.linspace(-5, 5, 5)
print("values:   ", evaluate(slotted, params, xs))
assert np.array_equal(evaluate(slotted, params, xs), evaluate(f1, [], xs))
assert substitute_params(slotted, params) == f1

# a nonviable expression has no values at all, rather than protected ones
print("ln(x) on [-1, 1]:", evaluate(parse("(ln x)"), [], [-1.0, 1.0]))

rng = np.random.default_rng(0)
basis = BasisSet.specific({"sin", "cos"})
for _ in range(3):
    print("random:", to_prefix(random_tree(basis, 4, rng)))
