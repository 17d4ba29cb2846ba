#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Empirical statistics
====================

State sequences
---------------
.. autosummary::
    :toctree: generated/

    Trajectory
    EmpiricalStats
    transition_counts
    empirical_stats

Divergences
-----------
.. autosummary::
    :toctree: generated/

    relative_entropy
    dk_divergence

Shift-invariant doublet distributions
-------------------------------------
.. autosummary::
    :toctree: generated/

    is_shift_invariant
    project_to_shift_invariant
    transition_from_doublet
"""

from dataclasses import dataclass

import numpy as np
import numba
import scipy.special

from .util.exceptions import ParameterError
from .util.utils import SHIFT_TOL, valid_doublet, shift_invariant_project

__all__ = [
    "Trajectory",
    "EmpiricalStats",
    "transition_counts",
    "empirical_stats",
    "relative_entropy",
    "dk_divergence",
    "is_shift_invariant",
    "project_to_shift_invariant",
    "transition_from_doublet",
]


@dataclass(frozen=True)
class Trajectory:
    """A finite sequence of visited states.

    Attributes
    ----------
    states : np.ndarray [shape=(n,), dtype=int]
        State indices ``s_1, ..., s_n``

    seed : int
        Seed of the generator that produced the sequence

    policy_label : str
        Free-form description of the generating policy
    """

    states: np.ndarray
    seed: int = 0
    policy_label: str = ""

    def __post_init__(self):
        raw = np.asarray(self.states)
        if raw.ndim != 1:
            raise ParameterError(
                "Trajectory states must be 1-dimensional, got shape={}".format(
                    raw.shape
                )
            )
        if raw.size and not np.issubdtype(raw.dtype, np.integer):
            if not np.issubdtype(raw.dtype, np.floating) or np.any(raw != np.round(raw)):
                raise ParameterError("Trajectory states must be integer indices")

        states = raw.astype(np.int64)
        if np.any(states < 0):
            raise ParameterError("Trajectory states must be non-negative")
        states.flags.writeable = False
        object.__setattr__(self, "states", states)

    def __len__(self):
        return self.states.shape[0]


@dataclass(frozen=True)
class EmpiricalStats:
    """Empirical state and transition frequencies of a trajectory.

    Attributes
    ----------
    tau : np.ndarray [shape=(num_states,)]
        State frequencies over all ``n`` states

    theta : np.ndarray [shape=(num_states, num_states)]
        Doublet frequencies over the ``n - 1`` transitions

    t_hat : np.ndarray [shape=(num_states, num_states)]
        ``theta / tau`` row-wise, with ``0 / 0 = 0``.
        Rows need not sum to one, since ``theta`` and ``tau`` are
        normalized by different sequence lengths.

    tau_prefix : np.ndarray [shape=(num_states,)]
        State frequencies over the first ``n - 1`` states.
        Equal to the row marginal of ``theta``.
    """

    tau: np.ndarray
    theta: np.ndarray
    t_hat: np.ndarray
    tau_prefix: np.ndarray


@numba.jit(nopython=True, nogil=True, cache=True)
def __count_transitions(states, num_states):  # pragma: no cover
    counts = np.zeros((num_states, num_states), dtype=np.int64)
    for t in range(states.shape[0] - 1):
        counts[states[t], states[t + 1]] += 1
    return counts


def _check_states(traj, num_states):
    if len(traj) < 2:
        raise ParameterError(
            "Doublet statistics need at least 2 states, trajectory has {}".format(
                len(traj)
            )
        )

    bad = np.flatnonzero((traj.states < 0) | (traj.states >= num_states))
    if bad.size:
        raise ParameterError(
            "Trajectory step {} has state {} outside [0, {})".format(
                bad[0], traj.states[bad[0]], num_states
            )
        )


def transition_counts(traj, num_states):
    """Count the transitions of a trajectory.

    Parameters
    ----------
    traj : Trajectory
        A sequence of at least two states

    num_states : int > 0
        Size of the state space

    Returns
    -------
    counts : np.ndarray [shape=(num_states, num_states), dtype=int]
        ``counts[s, s1]`` is the number of times ``t`` with
        ``states[t] == s`` and ``states[t + 1] == s1``

    Raises
    ------
    ParameterError
        If the trajectory is shorter than 2 or a state is out of range.
    """
    _check_states(traj, num_states)
    return __count_transitions(np.ascontiguousarray(traj.states), num_states)


def empirical_stats(traj, num_states):
    """Empirical state, doublet and transition frequencies of a trajectory.

    Parameters
    ----------
    traj : Trajectory
        A sequence of ``n >= 2`` states

    num_states : int > 0
        Size of the state space

    Returns
    -------
    stats : EmpiricalStats

    Raises
    ------
    ParameterError
        If ``n < 2`` or a state index is out of range.

    Examples
    --------
    >>> stats = covertmdp.statistics.empirical_stats(
    ...     covertmdp.statistics.Trajectory([0, 1, 0]), 2
    ... )
    >>> stats.tau
    array([0.66666667, 0.33333333])
    >>> stats.t_hat
    array([[0.  , 0.75],
           [1.5 , 0.  ]])
    """
    counts = transition_counts(traj, num_states)
    n = len(traj)

    tau = np.bincount(traj.states, minlength=num_states) / n
    theta = counts / (n - 1)
    tau_prefix = np.bincount(traj.states[:-1], minlength=num_states) / (n - 1)

    t_hat = np.zeros_like(theta)
    visited = tau > 0
    t_hat[visited] = theta[visited] / tau[visited, np.newaxis]

    return EmpiricalStats(tau=tau, theta=theta, t_hat=t_hat, tau_prefix=tau_prefix)


def relative_entropy(p, q):
    """Relative entropy ``H(p || q)`` in bits.

    Parameters
    ----------
    p, q : np.ndarray
        Probability distributions of the same shape

    Returns
    -------
    h : float >= 0
        ``sum(p * log2(p / q))``, with ``0 * log(0 / q) = 0``.
        ``np.inf`` if ``p`` puts mass where ``q`` does not.

    Raises
    ------
    ParameterError
        If the shapes differ.

    Examples
    --------
    >>> covertmdp.statistics.relative_entropy(np.array([1.0, 0]), np.array([0.5, 0.5]))
    1.0
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ParameterError(
            "Distribution shapes differ: {} != {}".format(p.shape, q.shape)
        )

    return float(scipy.special.rel_entr(p, q).sum() / np.log(2))


def is_shift_invariant(theta, tol=SHIFT_TOL):
    """Test whether a doublet distribution has equal row and column marginals.

    Parameters
    ----------
    theta : np.ndarray [shape=(n, n)]
        Doublet distribution

    tol : float >= 0
        Maximum allowed absolute difference between the marginals

    Returns
    -------
    shift_invariant : bool
    """
    theta = np.asarray(theta)
    return bool(np.max(np.abs(theta.sum(axis=1) - theta.sum(axis=0))) <= tol)


def transition_from_doublet(theta):
    """Transition matrix of a doublet distribution.

    Parameters
    ----------
    theta : np.ndarray [shape=(n, n)]
        Doublet distribution

    Returns
    -------
    transition : np.ndarray [shape=(n, n)]
        ``theta[s] / theta[s].sum()``, or zero where row ``s`` carries no mass
    """
    theta = np.asarray(theta, dtype=np.float64)
    mass = theta.sum(axis=1)
    transition = np.zeros_like(theta)
    visited = mass > 0
    transition[visited] = theta[visited] / mass[visited, np.newaxis]
    return transition


def dk_divergence(theta1, theta2, tol=SHIFT_TOL):
    """Divergence between the Markov chains of two shift-invariant doublet
    distributions, in bits.

    With ``tau1`` the marginal of ``theta1`` and ``T1``, ``T2`` the row-normalized
    transition matrices, this is ``sum_s tau1[s] * H(T1[s] || T2[s])``.

    Parameters
    ----------
    theta1, theta2 : np.ndarray [shape=(n, n)]
        Shift-invariant doublet distributions

    tol : float >= 0
        Tolerance for the shift-invariance check

    Returns
    -------
    d : float >= 0
        ``np.inf`` if ``theta1`` uses a transition that ``T2`` forbids

    Raises
    ------
    ParameterError
        If either input is not a doublet distribution, the shapes differ,
        or either input fails the shift-invariance check.

    See Also
    --------
    relative_entropy
    is_shift_invariant

    Examples
    --------
    >>> t1 = np.array([[0.9, 0.1], [0.2, 0.8]])
    >>> theta1 = covertmdp.doublet_distribution(np.array([2 / 3, 1 / 3]), t1)
    >>> theta2 = np.full((2, 2), 0.25)
    >>> covertmdp.statistics.dk_divergence(theta1, theta2)
    0.4466...
    """
    theta1 = np.asarray(theta1, dtype=np.float64)
    theta2 = np.asarray(theta2, dtype=np.float64)

    if theta1.shape != theta2.shape:
        raise ParameterError(
            "Doublet shapes differ: {} != {}".format(theta1.shape, theta2.shape)
        )

    for name, theta in (("theta1", theta1), ("theta2", theta2)):
        valid_doublet(theta, tol=SHIFT_TOL)
        if not is_shift_invariant(theta, tol=tol):
            raise ParameterError(
                "{} is not shift-invariant at tol={}".format(name, tol)
            )

    tau1 = theta1.sum(axis=1)
    t2 = transition_from_doublet(theta2)

    return float(
        scipy.special.rel_entr(theta1, tau1[:, np.newaxis] * t2).sum() / np.log(2)
    )


def project_to_shift_invariant(theta, mask=None):
    """Euclidean projection of a doublet distribution onto the shift-invariant set.

    Parameters
    ----------
    theta : np.ndarray [shape=(n, n)]
        Input doublet distribution

    mask : np.ndarray [shape=(n, n), dtype=bool] or None
        If provided, entries outside the mask are forced to zero

    Returns
    -------
    theta_proj : np.ndarray [shape=(n, n)]
        The closest non-negative, unit-mass matrix with equal row and
        column marginals

    Examples
    --------
    >>> covertmdp.statistics.project_to_shift_invariant(np.array([[0, 1.0], [0, 0]]))
    array([[0. , 0.5],
           [0.5, 0. ]])
    """
    return shift_invariant_project(theta, mask=mask)
