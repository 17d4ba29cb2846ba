#!/usr/bin/env python
#  unit tests for covertmdp core (Mdp and induced Markov chains)
#

# Disable cache
import os

try:
    os.environ.pop("COVERTMDP_CACHE_DIR")
except:
    pass

import itertools

import numpy as np
import pytest

import covertmdp


# -- utilities --#
def srand(seed=628318530):
    np.random.seed(seed)
    pass


def random_stochastic(rng, shape):
    x = rng.uniform(0.1, 1.0, size=shape)
    return x / x.sum(axis=-1, keepdims=True)


def random_mdp(num_states, num_actions, seed=0):
    """An MDP with strictly positive transitions, hence recurrent."""
    rng = np.random.default_rng(seed)
    return covertmdp.Mdp(
        transition=random_stochastic(rng, (num_states, num_actions, num_states)),
        reward=rng.uniform(size=(num_states, num_actions)),
        initial=random_stochastic(rng, num_states),
    )


def random_policy(mdp, seed=0):
    rng = np.random.default_rng(seed)
    return random_stochastic(rng, (mdp.num_states, mdp.num_actions))


def stationary_doublet(transition):
    return covertmdp.doublet_distribution(
        covertmdp.stationary_distribution(transition), transition
    )


def load_example(key):
    mdp = covertmdp.util.load_mdp(covertmdp.ex(key))
    pi_star = covertmdp.util.load_policy(covertmdp.ex(key, kind="policy"), mdp)
    return mdp, pi_star


T_STAR = np.array([[0.9, 0.1], [0.2, 0.8]])
T_UNIFORM = np.full((2, 2), 0.5)


# -- tests --#
def test_mdp_shapes():
    mdp, _ = load_example("duplicate-rows")
    assert mdp.num_states == 2
    assert mdp.num_actions == 3
    assert not mdp.transition.flags.writeable
    assert not mdp.reward.flags.writeable


def test_mdp_equality():
    mdp1, _ = load_example("standard-pair")
    mdp2, _ = load_example("standard-pair")
    mdp3, _ = load_example("full-rank")
    assert mdp1 == mdp2
    assert mdp1 != mdp3


def test_unreachable_states():
    missing = covertmdp.unreachable_states(np.array([[1.0, 0.0], [0.5, 0.5]]))
    assert np.array_equal(missing, [1])

    assert covertmdp.unreachable_states(T_STAR).size == 0


def test_uniform_policy():
    mdp = random_mdp(3, 4)
    policy = covertmdp.uniform_policy(mdp)
    assert policy.shape == (3, 4)
    assert np.allclose(policy, 0.25)


@pytest.mark.parametrize("actions", [1, [0, 1, 1]])
def test_deterministic_policy(actions):
    mdp = random_mdp(3, 2)
    policy = covertmdp.deterministic_policy(mdp, actions)
    assert np.allclose(policy.sum(axis=1), 1)
    assert np.allclose(policy[np.arange(3), np.broadcast_to(actions, 3)], 1)


def test_induced_transition_matrix():
    mdp, pi_star = load_example("standard-pair")
    assert np.allclose(covertmdp.induced_transition_matrix(mdp, pi_star), T_STAR)

    adv = covertmdp.util.load_policy(covertmdp.ex("standard-pair", kind="adversary"))
    assert np.allclose(covertmdp.induced_transition_matrix(mdp, adv), T_UNIFORM)


def test_stationary_distribution():
    tau = covertmdp.stationary_distribution(T_STAR)
    assert np.allclose(tau, [2.0 / 3, 1.0 / 3])


@pytest.mark.parametrize("num_states", [2, 5, 10])
def test_stationary_distribution_random(num_states):
    rng = np.random.default_rng(num_states)
    transition = random_stochastic(rng, (num_states, num_states))
    tau = covertmdp.stationary_distribution(transition)
    assert np.isclose(tau.sum(), 1)
    assert np.allclose(tau @ transition, tau, atol=1e-12)


def test_stationary_distribution_power_iteration():
    rng = np.random.default_rng(17)
    n = covertmdp.core.MAX_DIRECT_STATES + 1
    transition = random_stochastic(rng, (n, n))
    with pytest.warns(UserWarning):
        tau = covertmdp.stationary_distribution(transition)
    assert np.allclose(tau @ transition, tau, atol=1e-10)


@pytest.mark.xfail(raises=covertmdp.ParameterError)
def test_stationary_distribution_reducible():
    covertmdp.stationary_distribution(np.eye(2))


def test_doublet_shift_invariant():
    theta = stationary_doublet(T_STAR)
    assert covertmdp.statistics.is_shift_invariant(theta)
    assert np.isclose(theta.sum(), 1)


def test_average_reward_standard_pair():
    mdp, pi_star = load_example("standard-pair")
    adv = covertmdp.util.load_policy(covertmdp.ex("standard-pair", kind="adversary"))

    assert np.isclose(covertmdp.average_reward(mdp, pi_star), 2.0 / 3)
    assert np.isclose(covertmdp.average_reward(mdp, adv), 0.5)
    assert np.isclose(covertmdp.regret(mdp, pi_star, adv), 1.0 / 6)


def test_state_action_frequencies():
    mdp = random_mdp(4, 3, seed=3)
    policy = random_policy(mdp, seed=4)
    rho = covertmdp.state_action_frequencies(mdp, policy)
    assert np.isclose(rho.sum(), 1)
    assert np.isclose(rho @ mdp.reward.ravel(), covertmdp.average_reward(mdp, policy))


def test_differential_values():
    mdp = random_mdp(4, 3, seed=5)
    policy = random_policy(mdp, seed=6)
    gain, bias = covertmdp.differential_values(mdp, policy)

    assert np.isclose(gain, covertmdp.average_reward(mdp, policy))
    assert bias[0] == 0

    t_pi = covertmdp.induced_transition_matrix(mdp, policy)
    r_pi = np.sum(policy * mdp.reward, axis=1)
    assert np.allclose(gain + bias, r_pi + t_pi @ bias)


@pytest.mark.parametrize("maximize, gain, actions", [(True, 1.0, [0, 1]), (False, 0.0, [1, 0])])
def test_policy_iteration_standard_pair(maximize, gain, actions):
    mdp, _ = load_example("standard-pair")
    policy, value = covertmdp.policy_iteration(mdp, maximize=maximize)
    assert np.isclose(value, gain)
    assert np.array_equal(policy.argmax(axis=1), actions)


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("maximize", [False, True])
def test_policy_iteration_brute_force(seed, maximize):
    mdp = random_mdp(3, 2, seed=seed)
    _, value = covertmdp.policy_iteration(mdp, maximize=maximize)

    gains = [
        covertmdp.average_reward(mdp, covertmdp.deterministic_policy(mdp, list(actions)))
        for actions in itertools.product(range(mdp.num_actions), repeat=mdp.num_states)
    ]
    best = max(gains) if maximize else min(gains)
    assert np.isclose(value, best)


def test_sample_trajectory_deterministic():
    mdp, pi_star = load_example("standard-pair")
    traj1 = covertmdp.sample_trajectory(mdp, pi_star, 500, seed=7)
    traj2 = covertmdp.sample_trajectory(mdp, pi_star, 500, seed=7)
    traj3 = covertmdp.sample_trajectory(mdp, pi_star, 500, seed=8)

    assert len(traj1) == 500
    assert traj1.seed == 7
    assert np.array_equal(traj1.states, traj2.states)
    assert not np.array_equal(traj1.states, traj3.states)


def test_sample_trajectory_initial():
    mdp, pi_star = load_example("tied-columns")
    for seed in range(10):
        traj = covertmdp.sample_trajectory(mdp, pi_star, 5, seed=seed)
        assert traj.states[0] == 0


def test_sample_trajectory_frequencies():
    mdp, pi_star = load_example("standard-pair")
    traj = covertmdp.sample_trajectory(mdp, pi_star, 100000, seed=0)
    tau = np.bincount(traj.states, minlength=2) / len(traj)
    assert np.allclose(tau, [2.0 / 3, 1.0 / 3], atol=0.01)


@pytest.mark.xfail(raises=covertmdp.ParameterError)
def test_sample_trajectory_empty():
    mdp, pi_star = load_example("standard-pair")
    covertmdp.sample_trajectory(mdp, pi_star, 0)
