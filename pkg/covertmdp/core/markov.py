#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Markov chains induced by stationary policies"""

import warnings

import numpy as np
import numba

from .mdp import unreachable_states
from ..statistics import Trajectory
from ..util.exceptions import ParameterError
from ..util.utils import STOCHASTIC_TOL, valid_policy, valid_stochastic

__all__ = [
    "MAX_DIRECT_STATES",
    "induced_transition_matrix",
    "stationary_distribution",
    "doublet_distribution",
    "average_reward",
    "regret",
    "state_action_frequencies",
    "differential_values",
    "policy_iteration",
    "sample_trajectory",
]

# Largest chain solved by a direct linear solve; power iteration above
MAX_DIRECT_STATES = 200


def _check_policy(mdp, policy):
    policy = np.asarray(policy, dtype=np.float64)
    valid_policy(policy, mdp.num_states, mdp.num_actions)
    return policy


def induced_transition_matrix(mdp, policy):
    """Transition matrix of the state chain under a stationary policy.

    ``T_pi[s, s1] = sum_a mdp.transition[s, a, s1] * policy[s, a]``

    Parameters
    ----------
    mdp : Mdp
    policy : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]

    Returns
    -------
    t_pi : np.ndarray [shape=(mdp.num_states, mdp.num_states)]
        Row-stochastic matrix

    Raises
    ------
    ParameterError
        If the policy dimensions do not match the MDP.
    """
    policy = _check_policy(mdp, policy)
    return np.einsum("sat,sa->st", mdp.transition, policy)


def stationary_distribution(transition, max_iter=100000, tol=1e-14):
    """Stationary distribution of an irreducible Markov chain.

    Chains of up to `MAX_DIRECT_STATES` states are solved directly from
    ``tau^T (I - T) = 0`` with one equation replaced by normalization.
    Larger chains use power iteration on the lazy chain ``(I + T) / 2``.

    Parameters
    ----------
    transition : np.ndarray [shape=(n, n)]
        Row-stochastic transition matrix

    max_iter : int > 0
    tol : float > 0
        Iteration cap and stopping tolerance for power iteration

    Returns
    -------
    tau : np.ndarray [shape=(n,)]
        The unique probability vector with ``tau @ transition == tau``

    Raises
    ------
    ParameterError
        If ``transition`` is not row-stochastic or not irreducible.

    Examples
    --------
    >>> covertmdp.stationary_distribution(np.array([[0.9, 0.1], [0.2, 0.8]]))
    array([0.66666667, 0.33333333])
    """
    transition = np.asarray(transition, dtype=np.float64)
    valid_stochastic(transition, tol=STOCHASTIC_TOL)

    missing = unreachable_states(transition)
    if missing.size:
        raise ParameterError(
            "Transition matrix is not irreducible; unreachable states {}".format(
                missing.tolist()
            )
        )

    n = transition.shape[0]
    if n <= MAX_DIRECT_STATES:
        system = np.eye(n) - transition.T
        system[-1] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        tau = np.linalg.solve(system, rhs)
    else:
        warnings.warn(
            "Chain has {} > {} states; using power iteration".format(
                n, MAX_DIRECT_STATES
            ),
            stacklevel=2,
        )
        lazy = 0.5 * (np.eye(n) + transition)
        tau = np.full(n, 1.0 / n)
        for _ in range(max_iter):
            tau_next = tau @ lazy
            if np.max(np.abs(tau_next - tau)) <= tol:
                tau = tau_next
                break
            tau = tau_next
        else:
            warnings.warn(
                "Power iteration did not converge in {} steps".format(max_iter),
                stacklevel=2,
            )

    tau = np.maximum(tau, 0)
    return tau / tau.sum()


def doublet_distribution(tau, transition):
    """Distribution of consecutive state pairs, ``theta[s, s1] = tau[s] * T[s, s1]``.

    Parameters
    ----------
    tau : np.ndarray [shape=(n,)]
        State distribution

    transition : np.ndarray [shape=(n, n)]
        Transition matrix

    Returns
    -------
    theta : np.ndarray [shape=(n, n)]
        Shift-invariant whenever ``tau`` is stationary for ``transition``

    Raises
    ------
    ParameterError
        If the dimensions do not match.
    """
    tau = np.asarray(tau, dtype=np.float64)
    transition = np.asarray(transition, dtype=np.float64)
    if transition.ndim != 2 or tau.shape != (transition.shape[0],):
        raise ParameterError(
            "Dimension mismatch: tau.shape={}, transition.shape={}".format(
                tau.shape, transition.shape
            )
        )
    return tau[:, np.newaxis] * transition


def state_action_frequencies(mdp, policy):
    """Long-run state-action frequencies ``rho[s, a] = tau[s] * policy[s, a]``.

    Parameters
    ----------
    mdp : Mdp
    policy : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]

    Returns
    -------
    rho : np.ndarray [shape=(mdp.num_states * mdp.num_actions,)]
        Flattened state-major, so that ``rho @ mdp.reward.ravel()``
        is the average reward
    """
    policy = _check_policy(mdp, policy)
    tau = stationary_distribution(induced_transition_matrix(mdp, policy))
    return (tau[:, np.newaxis] * policy).ravel()


def average_reward(mdp, policy):
    """Expected average reward ``J(policy)`` of a stationary policy.

    Parameters
    ----------
    mdp : Mdp
    policy : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]

    Returns
    -------
    gain : float
        ``sum_s tau[s] sum_a policy[s, a] * reward[s, a]``, which does not
        depend on the initial distribution of a recurrent MDP

    See Also
    --------
    regret
    state_action_frequencies
    """
    policy = _check_policy(mdp, policy)
    tau = stationary_distribution(induced_transition_matrix(mdp, policy))
    return float(tau @ np.sum(policy * mdp.reward, axis=1))


def regret(mdp, pi_star, pi):
    """Loss of average reward, ``J(pi_star) - J(pi)``."""
    return average_reward(mdp, pi_star) - average_reward(mdp, pi)


def differential_values(mdp, policy):
    """Gain and bias of a stationary policy.

    Solves ``gain + h[s] = r_pi[s] + sum_s1 T_pi[s, s1] * h[s1]``
    with the normalization ``h[0] = 0``.

    Parameters
    ----------
    mdp : Mdp
    policy : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]

    Returns
    -------
    gain : float
        Average reward

    bias : np.ndarray [shape=(mdp.num_states,)]
        Differential value of each state

    Raises
    ------
    ParameterError
        If the induced chain has more than one recurrent class.
    """
    policy = _check_policy(mdp, policy)
    t_pi = induced_transition_matrix(mdp, policy)
    r_pi = np.sum(policy * mdp.reward, axis=1)
    n = mdp.num_states

    system = np.eye(n) - t_pi
    system[:, 0] = 1.0
    try:
        x = np.linalg.solve(system, r_pi)
    except np.linalg.LinAlgError:
        raise ParameterError("Policy induces a multichain Markov chain")

    bias = x.copy()
    bias[0] = 0.0
    return float(x[0]), bias


def policy_iteration(mdp, maximize=True, max_iter=1000):
    """Average-reward policy iteration.

    Parameters
    ----------
    mdp : Mdp

    maximize : bool
        If ``True``, find a gain-maximizing policy.
        If ``False``, find a gain-minimizing one.

    max_iter : int > 0
        Maximum number of improvement steps

    Returns
    -------
    policy : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
        A deterministic optimal policy

    gain : float
        Its average reward

    Examples
    --------
    >>> mdp = covertmdp.util.load_mdp(covertmdp.ex('duplicate-rows'))
    >>> policy, gain = covertmdp.policy_iteration(mdp)
    """
    sign = 1.0 if maximize else -1.0
    actions = np.argmax(sign * mdp.reward, axis=1)

    for _ in range(max_iter):
        policy = _one_hot(mdp, actions)
        gain, bias = differential_values(mdp, policy)
        q = sign * (mdp.reward + mdp.transition @ bias)

        best = q.max(axis=1)
        current = q[np.arange(mdp.num_states), actions]
        improve = best > current + 1e-12
        if not improve.any():
            return policy, gain

        actions = np.where(improve, np.argmax(q, axis=1), actions)

    warnings.warn(
        "Policy iteration did not converge in {} steps".format(max_iter),
        stacklevel=2,
    )
    return policy, gain


def _one_hot(mdp, actions):
    policy = np.zeros((mdp.num_states, mdp.num_actions))
    policy[np.arange(mdp.num_states), actions] = 1.0
    return policy


@numba.jit(nopython=True, nogil=True, cache=True)
def __sample_chain(cum_initial, cum_transition, uniforms):  # pragma: no cover
    n = uniforms.shape[0]
    last = cum_initial.shape[0] - 1
    states = np.empty(n, dtype=np.int64)
    states[0] = min(np.searchsorted(cum_initial, uniforms[0], side="right"), last)
    for t in range(1, n):
        row = cum_transition[states[t - 1]]
        states[t] = min(np.searchsorted(row, uniforms[t], side="right"), last)
    return states


def sample_trajectory(mdp, policy, n, seed=0, policy_label=""):
    """Simulate the state sequence of an MDP under a stationary policy.

    Parameters
    ----------
    mdp : Mdp
    policy : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]

    n : int >= 1
        Number of states to generate

    seed : int >= 0
        Seed for `np.random.default_rng`

    policy_label : str
        Description stored with the trajectory

    Returns
    -------
    traj : covertmdp.statistics.Trajectory
        The first state is drawn from ``mdp.initial``

    Examples
    --------
    >>> mdp = covertmdp.util.load_mdp(covertmdp.ex('standard-pair'))
    >>> pi = covertmdp.util.load_policy(covertmdp.ex('standard-pair', kind='policy'))
    >>> traj = covertmdp.sample_trajectory(mdp, pi, 1000, seed=7)
    """
    if n < 1:
        raise ParameterError("Trajectory length must be positive, got n={}".format(n))

    t_pi = induced_transition_matrix(mdp, policy)
    uniforms = np.random.default_rng(seed).random(n)

    states = __sample_chain(
        np.cumsum(mdp.initial), np.ascontiguousarray(np.cumsum(t_pi, axis=1)), uniforms
    )

    return Trajectory(states=states, seed=seed, policy_label=policy_label)
