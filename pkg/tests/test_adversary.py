#!/usr/bin/env python
# unit tests for the covertness-constrained adversary

# Disable cache
import os

try:
    os.environ.pop("COVERTMDP_CACHE_DIR")
except:
    pass

import numpy as np
import pytest

import covertmdp
from covertmdp.adversary import AdversaryConfig, AdversaryProblem

from test_core import load_example, stationary_doublet


CONFIG = AdversaryConfig(n_starts=3, max_iter=50)


@pytest.fixture(scope="module")
def problem():
    mdp, pi_star = load_example("standard-pair")
    return AdversaryProblem(mdp, pi_star, eta=0.05, eta_beta=0.02)


def policy_grid(step):
    # pi[s, 0] for both states, remaining mass on action 1
    for p in np.arange(0, 1 + step / 2, step):
        for q in np.arange(0, 1 + step / 2, step):
            yield np.array([[p, 1 - p], [q, 1 - q]])


def test_problem_readonly(problem):
    assert not problem.pi_star.flags.writeable


@pytest.mark.xfail(raises=covertmdp.ParameterError)
@pytest.mark.parametrize(
    "kwargs",
    [dict(eta=0.0), dict(eta_beta=-1.0), dict(pi_star=np.full((2, 3), 1.0 / 3))],
)
def test_problem_invalid(kwargs):
    mdp, pi_star = load_example("standard-pair")
    args = dict(mdp=mdp, pi_star=pi_star, eta=0.05, eta_beta=0.02)
    args.update(kwargs)
    AdversaryProblem(**args)


@pytest.mark.xfail(raises=covertmdp.ParameterError)
@pytest.mark.parametrize("kwargs", [dict(n_starts=0), dict(step=0.0), dict(tol=-1.0)])
def test_config_invalid(kwargs):
    AdversaryConfig(**kwargs)


def test_constraint_value_controller(problem):
    assert covertmdp.adversary.constraint_value(problem, problem.pi_star) == 0


def test_constraint_value_covert():
    mdp, pi_star = load_example("tied-columns")
    problem = AdversaryProblem(mdp, pi_star, eta=0.05, eta_beta=0.01)
    pi_c = covertmdp.covert.optimal_covert_policy(mdp, pi_star)
    assert covertmdp.adversary.constraint_value(problem, pi_c) == 0


def test_constraint_value_detectable(problem):
    adv = covertmdp.util.load_policy(covertmdp.ex("standard-pair", kind="adversary"))
    value = covertmdp.adversary.constraint_value(problem, adv)
    theta_star = stationary_doublet(covertmdp.induced_transition_matrix(problem.mdp, problem.pi_star))
    theta_adv = stationary_doublet(covertmdp.induced_transition_matrix(problem.mdp, adv))
    assert 0 < value < covertmdp.statistics.dk_divergence(theta_star, theta_adv)


def test_solve_feasible(problem):
    sol = covertmdp.adversary.solve(problem, CONFIG)

    covertmdp.util.valid_policy(sol.policy, 2, 2)
    assert sol.feasible
    assert sol.constraint_value <= problem.eta_beta + CONFIG.tol
    assert sol.regret >= 0
    assert sol.eta_beta == problem.eta_beta
    assert np.isclose(
        sol.regret, covertmdp.regret(problem.mdp, problem.pi_star, sol.policy)
    )


def test_solve_grid(problem):
    sol = covertmdp.adversary.solve(problem, AdversaryConfig())

    best = 0.0
    for pi in policy_grid(0.02):
        if covertmdp.adversary.constraint_value(problem, pi) <= problem.eta_beta:
            best = max(best, covertmdp.regret(problem.mdp, problem.pi_star, pi))

    assert sol.regret >= best - 1e-3


def test_solve_unconstrained():
    mdp, pi_star = load_example("standard-pair")
    problem = AdversaryProblem(mdp, pi_star, eta=0.05, eta_beta=100.0)
    sol = covertmdp.adversary.solve(problem, CONFIG)
    assert np.isclose(sol.regret, 2.0 / 3, atol=1e-6)


def test_solve_beats_covert():
    mdp, pi_star = load_example("duplicate-rows")
    problem = AdversaryProblem(mdp, pi_star, eta=0.05, eta_beta=1e-4)
    sol = covertmdp.adversary.solve(problem, CONFIG)

    pi_c = covertmdp.covert.optimal_covert_policy(mdp, pi_star)
    assert sol.feasible
    assert sol.regret >= covertmdp.regret(mdp, pi_star, pi_c) - 1e-9


def test_solve_deterministic(problem):
    sol1 = covertmdp.adversary.solve(problem, CONFIG)
    sol2 = covertmdp.adversary.solve(
        problem, AdversaryConfig(n_starts=3, max_iter=50, n_jobs=2)
    )
    assert np.array_equal(sol1.policy, sol2.policy)
    assert sol1.regret == sol2.regret


def test_frontier_monotone(problem):
    levels = [0.005, 0.02, 0.08]
    solutions = covertmdp.adversary.frontier(problem, levels, CONFIG)

    assert [sol.eta_beta for sol in solutions] == levels
    regrets = [sol.regret for sol in solutions]
    assert np.all(np.diff(regrets) >= 0)
    assert all(sol.feasible for sol in solutions)


def test_frontier_single(problem):
    solutions = covertmdp.adversary.frontier(problem, [problem.eta_beta], CONFIG)
    sol = covertmdp.adversary.solve(problem, CONFIG)
    assert len(solutions) == 1
    assert np.array_equal(solutions[0].policy, sol.policy)


@pytest.mark.xfail(raises=covertmdp.ParameterError)
@pytest.mark.parametrize("levels", [[], [0.1, 0.05], [0.0, 0.1]])
def test_frontier_invalid(problem, levels):
    covertmdp.adversary.frontier(problem, levels, CONFIG)
