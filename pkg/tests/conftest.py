import numpy as np
import pytest
from hypothesis import strategies as st

from ercbench.expr import ARITY, BINARY_OPS, UNARY_OPS, Node, const, var

OPS = BINARY_OPS + UNARY_OPS

finite_consts = st.floats(-10, 10, allow_nan=False, allow_infinity=False).map(const)
leaves = st.one_of(st.just(var()), finite_consts)


def _extend(children):
    unary = st.tuples(st.sampled_from(UNARY_OPS), children).map(lambda t: Node(t[0], (t[1],)))
    binary = st.tuples(st.sampled_from(BINARY_OPS), children, children).map(
        lambda t: Node(t[0], (t[1], t[2])))
    return st.one_of(unary, binary)


trees = st.recursive(leaves, _extend, max_leaves=8)


def random_expr(rng: np.random.Generator, max_depth: int = 5, ops=OPS) -> Node:
    """Independent of ercbench.random_tree so the generator itself is not trusted."""
    if max_depth <= 1 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return var()
        return const(float(np.round(rng.normal(0, 3), int(rng.integers(0, 4)))))
    op = ops[int(rng.integers(len(ops)))]
    return Node(op, tuple(random_expr(rng, max_depth - 1, ops) for _ in range(ARITY[op])))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
