import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ercbench.expr import erc, make, var
from ercbench.optim import (
    STUDY_METHODS, InitStrategy, Objective, OptimizerKind, OptimizerSpec, de_step,
    lm_step, nelder_mead_step, numeric_gradient, optimize, pso_step,
)
from ercbench.optim.annealing import (
    AnnealState, dual_annealing_step, minimize_dual_annealing, temperature_at,
)
from ercbench.optim.gradient import bfgs_step, cg_step, start_state
from ercbench.optim.population import DEPopulation, init_swarm, jittered_population
from ercbench.optim.simplex import make_simplex
from ercbench.problems import get_problem, sample_dataset

ALL_KINDS = list(OptimizerKind)
OPTIMIZING = [k for k in ALL_KINDS if k is not OptimizerKind.NOOPT]
F1_SLOTS = make("add", erc(0), make("mul", erc(1), var()))


def quadratic():
    return Objective(1, residuals=lambda p: np.array([p[0] - 3.0]))


def sphere(dim=2):
    return Objective(dim, loss=lambda p: float(np.sum(p * p)))


def rastrigin():
    return Objective(2, loss=lambda p: float(20 + np.sum(p * p - 10 * np.cos(2 * np.pi * p))))


def f1_objective():
    data = sample_dataset(get_problem("F1"))
    return Objective.for_tree(F1_SLOTS, data.xs, data.ys), data


def test_f1_linear_least_squares_oracle():
    obj, data = f1_objective()
    A = np.column_stack([np.ones_like(data.xs), data.xs])
    exact = np.linalg.lstsq(A, data.ys, rcond=None)[0]
    np.testing.assert_allclose(exact, [1.57, 24.3], atol=1e-10)
    p, loss = optimize(OptimizerSpec("ls"), obj, [0.0, 0.0], np.random.default_rng(0))
    np.testing.assert_allclose(p, exact, atol=1e-8)
    assert loss < 1e-20


@pytest.mark.parametrize("kind", ["ls", "bfgs"])
def test_f1_recovery(kind):
    obj, _ = f1_objective()
    p, loss = optimize(OptimizerSpec(kind), obj, [0.0, 0.0], np.random.default_rng(0))
    np.testing.assert_allclose(p, [1.57, 24.3], atol=1e-6)


def test_bfgs_exponential_decay():
    xs = np.linspace(-5, 5, 1000)
    ys = 10 * np.exp(-0.5 * xs)
    tree = make("mul", erc(0), make("exp", make("mul", erc(1), var())))
    obj = Objective.for_tree(tree, xs, ys)
    p, loss = optimize(OptimizerSpec("bfgs", budget=2000), obj, [1.0, -1.0],
                       np.random.default_rng(0))
    np.testing.assert_allclose(p, [10.0, -0.5], atol=1e-6)
    assert loss < 1e-12


@pytest.mark.parametrize("kind", OPTIMIZING)
def test_quadratic_within_default_budget(kind):
    p, loss = optimize(OptimizerSpec(kind), quadratic(), [0.0], np.random.default_rng(1))
    assert loss <= 1e-8


def test_noopt_returns_current():
    obj = quadratic()
    p, loss = optimize(OptimizerSpec("noopt"), obj, [5.0], np.random.default_rng(0))
    assert p.tolist() == [5.0] and loss == 4.0


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_zero_dimensional_passthrough(kind):
    obj = Objective(0, loss=lambda p: 7.0)
    p, loss = optimize(OptimizerSpec(kind), obj, [], np.random.default_rng(0))
    assert p.size == 0 and loss == 7.0


@pytest.mark.parametrize("kind", OPTIMIZING)
def test_all_infinite_returns_start(kind):
    obj = Objective(2, residuals=lambda p: np.full(3, np.nan))
    p, loss = optimize(OptimizerSpec(kind), obj, [1.0, 2.0], np.random.default_rng(0))
    assert loss == np.inf
    assert p.tolist() == [1.0, 2.0]


@pytest.mark.parametrize("kind", OPTIMIZING)
def test_budget_respected(kind):
    obj = Objective(2, residuals=lambda p: np.array([p[0] - 1, 10 * (p[1] - p[0] ** 2)]))
    spec = OptimizerSpec(kind, budget=60)
    optimize(spec, obj, [2.5, -1.5], np.random.default_rng(0))
    assert obj.evals <= 60


def test_spec_validation():
    with pytest.raises(ValueError):
        OptimizerSpec("bfgs", budget=0)
    with pytest.raises(ValueError):
        OptimizerSpec("bfgs", tolerance=0.0)
    with pytest.raises(ValueError):
        OptimizerSpec("annealing-by-hand")
    assert OptimizerSpec("nm").kind is OptimizerKind.NELDER_MEAD
    assert OptimizerSpec("pso").budget == 750 and OptimizerSpec("cg").budget == 100
    assert len(STUDY_METHODS) == 12
    with pytest.raises(ValueError):
        optimize(OptimizerSpec("bfgs"), quadratic(), [1.0, 2.0], np.random.default_rng(0))


# -- numeric gradient --------------------------------------------------------

def test_numeric_gradient_examples():
    g, bad = numeric_gradient(Objective(1, loss=lambda p: p[0] ** 2), [3.0])
    np.testing.assert_allclose(g, [6.0], atol=1e-6)
    assert not bad
    g, _ = numeric_gradient(Objective(3, loss=lambda p: 4.2), [1.0, -2.0, 3.0])
    assert g.tolist() == [0.0, 0.0, 0.0]
    g, _ = numeric_gradient(Objective(2, loss=lambda p: p[0] * p[1]), [2.0, 5.0])
    np.testing.assert_allclose(g, [5.0, 2.0], atol=1e-6)


def test_numeric_gradient_one_sided_and_degraded():
    # sqrt is undefined left of 0: only the forward probe is finite
    obj = Objective(1, loss=lambda p: np.sqrt(p[0]) if p[0] >= 0 else np.nan)
    g, bad = numeric_gradient(obj, [0.0])
    assert not bad and g[0] > 1e3
    obj = Objective(2, loss=lambda p: 0.0 if p[1] == 0.5 else p[0] ** 2 + np.nan)
    g, bad = numeric_gradient(obj, [1.0, 0.5])
    assert bad and g[1] == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4),
       st.lists(st.floats(-4, 4), min_size=2, max_size=2))
def test_numeric_gradient_polynomial(coef, p):
    a, b, c, d = coef

    def f(q):
        return a * q[0] ** 3 + b * q[0] * q[1] + c * q[1] ** 2 + d * q[0]

    x, y = p
    exact = np.array([3 * a * x * x + b * y + d, b * x + 2 * c * y])
    g, _ = numeric_gradient(Objective(2, loss=f), p)
    scale = max(1.0, np.max(np.abs(exact)))
    assert np.max(np.abs(g - exact)) <= 1e-4 * scale


# -- single iterations -------------------------------------------------------

def test_lm_step_linear_model_one_accepted_step():
    obj, _ = f1_objective()
    loss0 = obj.loss([0.0, 0.0])
    p, lam, loss = lm_step(obj, [0.0, 0.0], 1e-3)
    assert loss < loss0 and lam == pytest.approx(1e-4)


def test_lm_step_at_minimum():
    obj, data = f1_objective()
    A = np.column_stack([np.ones_like(data.xs), data.xs])
    exact = np.linalg.lstsq(A, data.ys, rcond=None)[0]
    p, lam, _ = lm_step(obj, exact, 1e-3)
    np.testing.assert_allclose(p, exact, atol=1e-9)
    assert lam == pytest.approx(1e-4)


def test_lm_step_rejection():
    # residuals look linear near p but the loss rises at the proposed point
    def residuals(p):
        return np.array([p[0] - 1.0 + (100.0 if abs(p[0]) > 0.5 else 0.0)])

    obj = Objective(1, residuals=residuals)
    p, lam, loss = lm_step(obj, [0.0], 1e-3)
    assert p.tolist() == [0.0] and lam == pytest.approx(1e-2) and loss == 1.0
    with pytest.raises(ValueError):
        lm_step(obj, [0.0], 0.0)


def test_pso_gbest_monotone_and_sphere():
    obj = sphere()
    rng = np.random.default_rng(42)
    sw = init_swarm(obj, rng.uniform(-5, 5, (20, 2)))
    prev = sw.gbest_f
    for _ in range(100):
        sw = pso_step(sw, obj, rng)
        assert sw.gbest_f <= prev
        prev = sw.gbest_f
    assert sw.gbest_f < 1e-4


def test_pso_fixed_point():
    obj = sphere()
    sw = init_swarm(obj, np.zeros((5, 2)))
    sw = pso_step(sw, obj, np.random.default_rng(0))
    assert np.all(sw.x == 0) and np.all(sw.v == 0) and sw.gbest_f == 0.0


def test_nelder_mead_quadratic():
    obj = quadratic()
    s = make_simplex(obj, [[0.0], [1.0]])
    best = s.values[0]
    for _ in range(60):
        s = nelder_mead_step(s, obj)
        assert s.values[0] <= best
        best = s.values[0]
    assert abs(s.points[0][0] - 3.0) <= 1e-6


def test_de_degenerate_population_unchanged():
    obj = sphere()
    x = np.tile([1.0, -2.0], (6, 1))
    pop = DEPopulation(x.copy(), obj.batch_loss(x))
    pop = de_step(pop, obj, np.random.default_rng(0))
    assert np.array_equal(pop.x, x)


def test_de_best_monotone():
    obj = rastrigin()
    rng = np.random.default_rng(5)
    x = jittered_population([2.0, 2.0], 15, rng)
    pop = DEPopulation(x, obj.batch_loss(x))
    best = pop.best[1]
    for _ in range(40):
        pop = de_step(pop, obj, rng)
        assert pop.best[1] <= best
        best = pop.best[1]


def test_dual_annealing_rastrigin():
    obj = rastrigin()
    p, loss = minimize_dual_annealing(obj, [3.3, -2.7], np.random.default_rng(2024), budget=5000)
    assert loss < 1.0
    assert obj.evals <= 5000


def test_dual_annealing_best_tracks_separately():
    obj = rastrigin()
    rng = np.random.default_rng(9)
    x0 = np.array([3.0, 3.0])
    f0 = obj.loss(x0)
    st_ = AnnealState(x0.copy(), f0, x0.copy(), f0, np.full(2, -5.12), np.full(2, 5.12))
    best, uphill = f0, False
    for _ in range(200):
        prev_current = st_.current_f
        st_ = dual_annealing_step(st_, obj, rng)
        assert st_.best_f <= best and st_.best_f <= st_.current_f
        uphill |= st_.current_f > prev_current
        best = st_.best_f
    assert uphill  # the current point is allowed to climb
    assert temperature_at(0) == pytest.approx(5230.0)


@pytest.mark.parametrize("step", [bfgs_step, cg_step])
def test_gradient_steps_monotone(step):
    rosen = Objective(2, loss=lambda p: float((1 - p[0]) ** 2 + 100 * (p[1] - p[0] ** 2) ** 2))
    s = start_state(rosen, [-1.2, 1.0])
    prev = s.f
    for _ in range(60):
        if s.done:
            break
        s = step(s, rosen)
        assert s.f <= prev
        prev = s.f
    assert prev < 1.0


# -- properties --------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.sampled_from(ALL_KINDS), st.sampled_from(list(InitStrategy)),
       st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.integers(0, 2**31))
def test_never_worse_than_start_and_deterministic(kind, init, start, seed):
    spec = OptimizerSpec(kind, init, budget=120 if kind in
                         (OptimizerKind.PSO, OptimizerKind.DE,
                          OptimizerKind.DUAL_ANNEALING) else 40)
    obj = Objective(2, residuals=lambda p: np.array([p[0] - 1, 10 * (p[1] - p[0] ** 2)]))
    current = np.array(start)
    if init is InitStrategy.RANDOM and kind is not OptimizerKind.NOOPT:
        x0 = np.random.default_rng(seed).standard_normal(2)
    else:
        x0 = current
    f0 = obj.loss(x0)
    p1, l1 = optimize(spec, obj, current, np.random.default_rng(seed))
    p2, l2 = optimize(spec, obj, current, np.random.default_rng(seed))
    assert l1 <= f0
    assert np.array_equal(p1, p2) and l1 == l2
    assert obj.loss(p1) == l1
