import numpy as np
import pytest

from ercbench.expr import STANDARD_OPERATORS, evaluate
from ercbench.problems import (
    ProblemSpec, basis_for, builtin_problems, get_problem, grid, problem_from_dict,
    sample_dataset,
)


def test_suite():
    probs = builtin_problems()
    assert len(probs) == 10
    assert [p.name for p in probs][:6] == ["F1", "F4", "F5", "F6", "F7", "F11"]
    assert evaluate(get_problem("F1").target, [], [1.0])[0] == pytest.approx(25.87, abs=1e-12)
    assert get_problem("F5").interval[0] == 0.1


@pytest.mark.parametrize("name,x,y", [
    ("F4", 0.0, -2.3), ("F5", 1.0, 3.0), ("F6", 4.0, 1.56),
    ("F7", 0.0, 0.0), ("F11", 0.0, 17.87),
    ("Logistic", 4.0, 10 * np.exp(-0.5)), ("Projectile", 1.0, -3.8),
    ("DampedPendulum", 0.0, 3.0), ("RadioactiveDecay", 2.0, 10 * np.exp(-1.0)),
])
def test_targets(name, x, y):
    assert evaluate(get_problem(name).target, [], [x])[0] == pytest.approx(y, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("p", builtin_problems(), ids=lambda p: p.name)
def test_dataset_invariants(p):
    d = sample_dataset(p)
    assert d.xs.size == d.ys.size == 1000
    assert d.xs[0] == p.interval[0] and d.xs[-1] == p.interval[1]
    assert np.all(np.diff(d.xs) > 0)
    assert np.all(np.isfinite(d.ys))
    again = sample_dataset(p)
    assert np.array_equal(d.xs, again.xs) and np.array_equal(d.ys, again.ys)
    assert basis_for(p, "specific").operators <= basis_for(p, "standard").operators


def test_grid_formula():
    xs = grid(-5.0, 5.0, 1000)
    assert xs.tolist() == [-5.0 + i * (5.0 - -5.0) / (1000 - 1) for i in range(1000)]
    assert grid(2.0, 3.0, 2).tolist() == [2.0, 3.0]
    p = ProblemSpec("two", get_problem("F1").target, (-1.0, 1.0), n_points=2)
    assert sample_dataset(p).xs.tolist() == [-1.0, 1.0]
    assert sample_dataset(get_problem("RadioactiveDecay")).ys[np.argmin(
        np.abs(grid(-5, 5, 1000)))] == pytest.approx(10.0, rel=0.01)


def test_basis_sets():
    assert basis_for(get_problem("F1"), "standard").operators == STANDARD_OPERATORS
    assert len(basis_for(get_problem("F1"), "standard").operators) == 15
    assert basis_for(get_problem("F5"), "specific").operators == {"add", "sub", "mul", "div", "ln"}
    assert basis_for(get_problem("F4"), "specific").operators == {
        "add", "sub", "mul", "div", "sin", "cos"}
    with pytest.raises(ValueError):
        basis_for(get_problem("F1"), "weird")


def test_lookup_and_custom():
    assert get_problem("logistic").name == "Logistic"
    assert get_problem("radioactive_decay").name == "RadioactiveDecay"
    with pytest.raises(KeyError):
        get_problem("F99")
    p = problem_from_dict({"name": "Quad", "expression": "(square x)", "interval": [-1, 2],
                           "n_points": 5, "specific": ["square"]})
    assert sample_dataset(p).ys.tolist() == [1.0, 0.0625, 0.25, 1.5625, 4.0]
    with pytest.raises(ValueError):
        ProblemSpec("bad", p.target, (1.0, 1.0))
    bad = ProblemSpec("pole", get_problem("F5").target, (-1.0, 1.0))
    with pytest.raises(ValueError):
        sample_dataset(bad)
