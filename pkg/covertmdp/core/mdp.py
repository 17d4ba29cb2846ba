#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Finite Markov decision processes and stationary policies"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from ..util.exceptions import ParameterError
from ..util.utils import STOCHASTIC_TOL, valid_distribution, valid_stochastic

__all__ = [
    "Mdp",
    "unreachable_states",
    "uniform_policy",
    "deterministic_policy",
]


def unreachable_states(transition):
    """Find the states that break irreducibility of a Markov chain.

    The chain is irreducible if every state can reach every other state
    through transitions of positive probability.

    Parameters
    ----------
    transition : np.ndarray [shape=(n, n)]
        A row-stochastic transition matrix

    Returns
    -------
    states : np.ndarray [dtype=int]
        The states not reachable from state 0, or, if all of them are,
        the states from which state 0 is not reachable.
        Empty if and only if the chain is irreducible.

    Examples
    --------
    >>> covertmdp.unreachable_states(np.array([[1.0, 0.0], [0.5, 0.5]]))
    array([1])
    """
    graph = scipy.sparse.csr_matrix(np.asarray(transition) > 0)
    n = graph.shape[0]

    forward = scipy.sparse.csgraph.breadth_first_order(
        graph, 0, directed=True, return_predecessors=False
    )
    missing = np.setdiff1d(np.arange(n), forward)
    if missing.size:
        return missing

    backward = scipy.sparse.csgraph.breadth_first_order(
        graph.T.tocsr(), 0, directed=True, return_predecessors=False
    )
    return np.setdiff1d(np.arange(n), backward)


def _readonly(x):
    x = np.array(x, dtype=np.float64)
    x.flags.writeable = False
    return x


@dataclass(frozen=True)
class Mdp:
    """A finite, recurrent Markov decision process.

    Attributes
    ----------
    transition : np.ndarray [shape=(num_states, num_actions, num_states)]
        ``transition[s, a, s1]`` is the probability of moving to ``s1``
        when action ``a`` is taken in state ``s``

    reward : np.ndarray [shape=(num_states, num_actions)]
        ``reward[s, a]`` is the reward of action ``a`` in state ``s``

    initial : np.ndarray [shape=(num_states,)]
        Distribution of the first state

    Raises
    ------
    ParameterError
        If any array has the wrong shape, a transition row or the initial
        distribution is not a probability vector, or the chain induced by
        the uniformly random policy is not irreducible.

    Notes
    -----
    Irreducibility of the uniform-policy chain is necessary, but not
    sufficient, for every stationary policy to induce a single recurrent
    class. Deterministic policies may still induce reducible chains;
    `stationary_distribution` reports those when they are evaluated.

    Examples
    --------
    >>> mdp = covertmdp.Mdp(
    ...     transition=[[[0.9, 0.1], [0.5, 0.5]], [[0.2, 0.8], [0.5, 0.5]]],
    ...     reward=[[1, 0], [0, 1]],
    ...     initial=[1, 0],
    ... )
    >>> mdp.num_states, mdp.num_actions
    (2, 2)
    """

    transition: np.ndarray
    reward: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        transition = _readonly(self.transition)
        reward = _readonly(self.reward)
        initial = _readonly(self.initial)

        if transition.ndim != 3 or transition.shape[0] != transition.shape[2]:
            raise ParameterError(
                "transition must have shape (num_states, num_actions, num_states), "
                "got shape={}".format(transition.shape)
            )

        num_states, num_actions = transition.shape[:2]
        if num_states < 1 or num_actions < 1:
            raise ParameterError("An MDP needs at least one state and one action")

        if reward.shape != (num_states, num_actions):
            raise ParameterError(
                "reward has shape={}, expected {}".format(
                    reward.shape, (num_states, num_actions)
                )
            )

        if not np.isfinite(reward).all():
            raise ParameterError("reward is not finite everywhere")

        for action in range(num_actions):
            try:
                valid_stochastic(transition[:, action, :], tol=STOCHASTIC_TOL)
            except ParameterError as exc:
                raise ParameterError("action {}: {}".format(action, exc))

        valid_distribution(initial, tol=STOCHASTIC_TOL, size=num_states)

        missing = unreachable_states(transition.mean(axis=1))
        if missing.size:
            raise ParameterError(
                "MDP is not recurrent: the uniform policy chain is reducible; "
                "unreachable states {}".format(missing.tolist())
            )

        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "reward", reward)
        object.__setattr__(self, "initial", initial)

    @property
    def num_states(self):
        return self.transition.shape[0]

    @property
    def num_actions(self):
        return self.transition.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Mdp):
            return NotImplemented
        return (
            np.array_equal(self.transition, other.transition)
            and np.array_equal(self.reward, other.reward)
            and np.array_equal(self.initial, other.initial)
        )

    __hash__ = None


def uniform_policy(mdp):
    """The policy choosing every action with equal probability in every state.

    Parameters
    ----------
    mdp : Mdp

    Returns
    -------
    policy : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
    """
    return np.full((mdp.num_states, mdp.num_actions), 1.0 / mdp.num_actions)


def deterministic_policy(mdp, actions):
    """Build a deterministic policy from one action index per state.

    Parameters
    ----------
    mdp : Mdp

    actions : iterable of int or int
        ``actions[s]`` is the action taken in state ``s``.
        A single integer selects the same action everywhere.

    Returns
    -------
    policy : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
        One-hot rows

    Raises
    ------
    ParameterError
        If the number of actions does not match the number of states,
        or an action index is out of range.

    Examples
    --------
    >>> mdp = covertmdp.util.load_mdp(covertmdp.ex('duplicate-rows'))
    >>> covertmdp.deterministic_policy(mdp, [0, 2])
    array([[1., 0., 0.],
           [0., 0., 1.]])
    """
    actions = np.asarray(actions, dtype=int)
    if actions.ndim == 0:
        actions = np.full(mdp.num_states, actions)

    if actions.shape != (mdp.num_states,):
        raise ParameterError(
            "Expected one action per state ({}), got {}".format(
                mdp.num_states, actions.shape
            )
        )

    if np.any(actions < 0) or np.any(actions >= mdp.num_actions):
        raise ParameterError(
            "action indices must lie in [0, {}), got {}".format(
                mdp.num_actions, actions.tolist()
            )
        )

    policy = np.zeros((mdp.num_states, mdp.num_actions))
    policy[np.arange(mdp.num_states), actions] = 1.0
    return policy
