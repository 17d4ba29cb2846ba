#!/usr/bin/env python
# unit tests for error exponents and the rate minimizer

# Disable cache
import os

try:
    os.environ.pop("COVERTMDP_CACHE_DIR")
except:
    pass

import numpy as np
import pytest
import scipy.special

import covertmdp
from covertmdp.exponents import DkBall, HalfSpace, SolverConfig

from test_core import T_STAR, T_UNIFORM, random_stochastic, stationary_doublet


THETA_STAR = stationary_doublet(T_STAR)
THETA_ADV = stationary_doublet(T_UNIFORM)
WEIGHTS = covertmdp.detection.llr_weights(T_STAR, T_UNIFORM)

FAST = SolverConfig(method="pgd", n_starts=4)
TILTED = SolverConfig(method="tilted")


def shift_invariant_grid(size=400):
    # nu = [[a, c], [c, 1 - a - 2c]] with a, c on the lattice 1 / size
    a, c = np.meshgrid(np.arange(1, size), np.arange(1, size // 2 + 1), indexing="ij")
    a, c = a.ravel() / size, c.ravel() / size
    d = 1 - a - 2 * c
    keep = d > 0
    rows = (np.stack([a, c], axis=-1), np.stack([c, d], axis=-1))
    return np.stack(rows, axis=1)[keep]


def random_shift_invariant(rng, num_states, size):
    # stationary doublets of random chains
    transition = rng.dirichlet(np.ones(num_states), size=(size, num_states))
    system = np.swapaxes(transition, 1, 2) - np.eye(num_states)
    system[:, -1] = 1
    rhs = np.zeros((size, num_states, 1))
    rhs[:, -1] = 1
    tau = np.linalg.solve(system, rhs)[..., 0]
    return tau[:, :, np.newaxis] * transition


def batch_divergence(nus, theta):
    transition = theta / theta.sum(axis=1, keepdims=True)
    rows = nus.sum(axis=2, keepdims=True)
    return scipy.special.rel_entr(nus, rows * transition).sum(axis=(1, 2)) / np.log(2)


def grid_minimum(target, admissible, nus=None):
    if nus is None:
        nus = shift_invariant_grid()
    return np.min(batch_divergence(nus, target)[admissible(nus)], initial=np.inf)


def in_halfspace(weights, bound):
    return lambda nus: np.einsum("kij,ij->k", nus, weights) <= bound


def in_ball(center, radius):
    return lambda nus: batch_divergence(nus, center) <= radius


@pytest.mark.parametrize("seed", range(3))
def test_gradient_check(seed):
    rng = np.random.default_rng(seed)
    nu = rng.uniform(0.1, 1.0, size=(3, 3))
    nu /= nu.sum()
    theta = stationary_doublet(random_stochastic(rng, (3, 3)))
    assert covertmdp.exponents.gradient_check(nu, theta) < 1e-5


def test_dk_gradient_at_target():
    # the gradient vanishes up to a constant at nu == theta
    grad = covertmdp.exponents.dk_gradient(THETA_STAR, THETA_STAR)
    assert np.allclose(grad, 0, atol=1e-12)


def test_minimize_rate_unconstrained():
    res = covertmdp.exponents.minimize_rate(THETA_STAR)
    assert res.value == 0
    assert res.status == covertmdp.exponents.INTERIOR
    assert np.array_equal(res.minimizer, THETA_STAR)


def test_minimize_rate_target_feasible():
    res = covertmdp.exponents.minimize_rate(THETA_STAR, HalfSpace(WEIGHTS, 1.0))
    assert res.value == 0
    assert res.status == covertmdp.exponents.INTERIOR


@pytest.mark.parametrize("config", [FAST, TILTED])
def test_minimize_rate_halfspace(config):
    eta = 0.1
    res = covertmdp.exponents.minimize_rate(THETA_STAR, HalfSpace(WEIGHTS, eta), config)

    assert res.status == covertmdp.exponents.BOUNDARY
    assert np.sum(WEIGHTS * res.minimizer) <= eta + 1e-6
    assert covertmdp.statistics.is_shift_invariant(res.minimizer, tol=1e-6)
    assert np.isclose(res.minimizer.sum(), 1)

    best = grid_minimum(THETA_STAR, in_halfspace(WEIGHTS, eta))
    assert res.value <= best + 1e-3


def test_minimize_rate_methods_agree():
    eta = 0.1
    pgd = covertmdp.exponents.minimize_rate(THETA_STAR, HalfSpace(WEIGHTS, eta), FAST)
    tilted = covertmdp.exponents.minimize_rate(THETA_STAR, HalfSpace(WEIGHTS, eta), TILTED)
    assert abs(pgd.value - tilted.value) < 1e-3


@pytest.mark.parametrize("config", [FAST, TILTED])
def test_minimize_rate_ball(config):
    radius = 0.05
    res = covertmdp.exponents.minimize_rate(THETA_ADV, DkBall(THETA_STAR, radius), config)

    assert res.status == covertmdp.exponents.BOUNDARY
    assert covertmdp.statistics.dk_divergence(res.minimizer, THETA_STAR, tol=1e-6) <= radius + 1e-6

    best = grid_minimum(THETA_ADV, in_ball(THETA_STAR, radius))
    assert res.value <= best + 1e-3
    assert res.value > 0


def test_minimize_rate_infeasible_halfspace():
    res = covertmdp.exponents.minimize_rate(THETA_STAR, HalfSpace(np.ones((2, 2)), 0.5))
    assert res.status == covertmdp.exponents.INFEASIBLE
    assert res.value == np.inf
    assert np.all(np.isnan(res.minimizer))


def test_minimize_rate_infeasible_ball():
    # the alternating chain and the self-loop chain share no transition
    theta_flip = np.array([[0.0, 0.5], [0.5, 0.0]])
    theta_stay = np.array([[0.5, 0.0], [0.0, 0.5]])
    res = covertmdp.exponents.minimize_rate(theta_stay, DkBall(theta_flip, 1.0), TILTED)
    assert res.status == covertmdp.exponents.INFEASIBLE
    assert res.value == np.inf


@pytest.mark.xfail(raises=covertmdp.ParameterError)
@pytest.mark.parametrize(
    "feasible",
    [
        HalfSpace(np.ones((3, 3)), 0.0),
        HalfSpace(np.ones((2, 2)), np.nan),
        DkBall(THETA_STAR, -1.0),
        "halfspace",
    ],
)
def test_minimize_rate_malformed(feasible):
    covertmdp.exponents.minimize_rate(THETA_ADV, feasible, TILTED)


@pytest.mark.xfail(raises=covertmdp.ParameterError)
def test_minimize_rate_not_shift_invariant():
    covertmdp.exponents.minimize_rate(np.array([[0.0, 1.0], [0.0, 0.0]]))


@pytest.mark.xfail(raises=covertmdp.ParameterError)
@pytest.mark.parametrize("kwargs", [dict(method="newton"), dict(n_starts=0), dict(tol=0.0)])
def test_solver_config_invalid(kwargs):
    SolverConfig(**kwargs)


def test_chernoff_stein_exponent():
    assert np.isclose(
        covertmdp.exponents.chernoff_stein_exponent(THETA_STAR, THETA_ADV), 0.446693, atol=1e-6
    )


@pytest.mark.xfail(raises=covertmdp.ParameterError)
def test_chernoff_stein_exponent_infinite():
    theta = stationary_doublet(np.array([[0.0, 1.0], [0.5, 0.5]]))
    covertmdp.exponents.chernoff_stein_exponent(THETA_ADV, theta)


@pytest.mark.parametrize("eta", [-0.3, 0.0, 0.1, 0.3])
def test_theorem2_exponents_identity(eta):
    # both minimizers lie on the threshold plane, where the rates differ by eta
    pair = covertmdp.exponents.theorem2_exponents(THETA_STAR, THETA_ADV, eta, TILTED)
    assert pair.e_alpha > 0
    assert pair.e_beta > 0
    assert np.isclose(pair.e_beta - pair.e_alpha, eta, atol=1e-4)


def test_theorem2_exponents_monotone():
    etas = np.linspace(-0.45, 0.4, 8)
    pairs = [covertmdp.exponents.theorem2_exponents(THETA_STAR, THETA_ADV, eta, TILTED) for eta in etas]
    e_alpha = np.array([p.e_alpha for p in pairs])
    e_beta = np.array([p.e_beta for p in pairs])
    assert np.all(np.diff(e_alpha) <= 1e-9)
    assert np.all(np.diff(e_beta) >= -1e-9)


def test_theorem2_exponents_endpoints():
    upper = covertmdp.statistics.dk_divergence(THETA_STAR, THETA_ADV)
    lower = -covertmdp.statistics.dk_divergence(THETA_ADV, THETA_STAR)

    pair = covertmdp.exponents.theorem2_exponents(THETA_STAR, THETA_ADV, upper, TILTED)
    assert pair.e_alpha == 0
    assert np.isclose(pair.e_beta, upper, atol=1e-6)

    pair = covertmdp.exponents.theorem2_exponents(THETA_STAR, THETA_ADV, lower, TILTED)
    assert pair.e_beta == 0
    assert np.isclose(pair.e_alpha, -lower, atol=1e-6)


@pytest.mark.xfail(raises=covertmdp.ParameterError)
@pytest.mark.parametrize("eta", [1.0, -1.0])
def test_theorem2_exponents_range(eta):
    covertmdp.exponents.theorem2_exponents(THETA_STAR, THETA_ADV, eta)


def test_theorem4_exponents_inside():
    # D_K(theta_adv, theta_star) ~ 0.529, so the adversary is never rejected
    pair = covertmdp.exponents.theorem4_exponents(THETA_STAR, THETA_ADV, 0.6, TILTED)
    assert pair.e_alpha == 0.6
    assert pair.e_beta == 0


def test_theorem4_exponents_tradeoff():
    pairs = [
        covertmdp.exponents.theorem4_exponents(THETA_STAR, THETA_ADV, eta, TILTED)
        for eta in (0.02, 0.1, 0.3)
    ]
    e_beta = [p.e_beta for p in pairs]
    assert e_beta[0] > e_beta[1] > e_beta[2] > 0
    assert e_beta[0] < covertmdp.statistics.dk_divergence(THETA_STAR, THETA_ADV)


def test_theorem4_exponents_identical():
    pair = covertmdp.exponents.theorem4_exponents(THETA_STAR, THETA_STAR, 0.1)
    assert pair.e_beta == 0


@pytest.mark.xfail(raises=covertmdp.ParameterError)
@pytest.mark.parametrize("eta", [0.0, -0.1])
def test_theorem4_exponents_eta(eta):
    covertmdp.exponents.theorem4_exponents(THETA_STAR, THETA_ADV, eta)


@pytest.mark.parametrize(
    "t_star, t_adv, eta",
    [
        (T_STAR, T_UNIFORM, 0.1),
        (np.array([[0.7, 0.3], [0.4, 0.6]]), np.array([[0.3, 0.7], [0.6, 0.4]]), 0.05),
        (np.array([[0.95, 0.05], [0.5, 0.5]]), np.array([[0.6, 0.4], [0.3, 0.7]]), 0.1),
    ],
)
def test_theorem4_exponents_grid(t_star, t_adv, eta):
    theta_star = stationary_doublet(t_star)
    theta_adv = stationary_doublet(t_adv)
    pair = covertmdp.exponents.theorem4_exponents(theta_star, theta_adv, eta, TILTED)

    best = grid_minimum(theta_adv, in_ball(theta_star, eta))
    assert abs(pair.e_beta - best) <= 1e-3


@pytest.mark.parametrize("seed", range(50))
def test_minimize_rate_random(seed):
    rng = np.random.default_rng(seed)
    num_states = 2 if seed < 25 else 3
    t_star = random_stochastic(rng, (num_states, num_states))
    t_adv = random_stochastic(rng, (num_states, num_states))
    theta_star = stationary_doublet(t_star)
    theta_adv = stationary_doublet(t_adv)

    if seed % 2:
        target = theta_adv
        admissible = in_ball(theta_star, 0.05)
        near = in_ball(theta_star, 0.05 + 1e-6)
        res = covertmdp.exponents.minimize_rate(target, DkBall(theta_star, 0.05), TILTED)
    else:
        weights = covertmdp.detection.llr_weights(t_star, t_adv)
        target = theta_star
        admissible = in_halfspace(weights, 0.0)
        near = in_halfspace(weights, 1e-6)
        res = covertmdp.exponents.minimize_rate(target, HalfSpace(weights, 0.0), TILTED)

    if num_states == 2:
        nus = shift_invariant_grid()
    else:
        # random chains pulled toward theta_star, so that the ball is sampled
        pull = rng.uniform(size=(10 ** 5, 1, 1))
        nus = pull * random_shift_invariant(rng, num_states, 10 ** 5) + (1 - pull) * theta_star

    assert res.value <= grid_minimum(target, admissible, nus) + 1e-3
    assert near(res.minimizer[np.newaxis])[0]


@pytest.mark.parametrize("eta", [-0.3, 0.0, 0.2])
def test_minimize_rate_halfspace_slackness(eta):
    res = covertmdp.exponents.minimize_rate(THETA_STAR, HalfSpace(WEIGHTS, eta), TILTED)
    looser = covertmdp.exponents.minimize_rate(THETA_STAR, HalfSpace(WEIGHTS, eta + 0.05), TILTED)

    # an active constraint with a non-negative multiplier
    assert res.status == covertmdp.exponents.BOUNDARY
    assert np.isclose(np.sum(WEIGHTS * res.minimizer), eta, atol=1e-6)
    assert looser.value < res.value

    # an inactive constraint leaves the target in place
    slack = covertmdp.exponents.minimize_rate(THETA_STAR, HalfSpace(WEIGHTS, 0.5), TILTED)
    assert slack.status == covertmdp.exponents.INTERIOR
    assert slack.value == 0
