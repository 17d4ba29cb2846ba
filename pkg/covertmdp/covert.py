#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Perfectly covert policies
=========================

An adversarial policy is perfectly covert when it induces exactly the same
state transition matrix as the controller's policy: no detector observing
only the visited states can tell the two apart.

In state ``s`` such deviations ``delta`` satisfy ``C @ delta == 0``, where
``C`` stacks the transposed action-transition matrix ``T_s`` on a row of ones.

.. autosummary::
    :toctree: generated/

    ConstraintMatrix
    CovertLpResult
    build_constraint_matrix
    solve_covert_lp
    optimal_covert_policy
    is_perfectly_covert
    covert_regret_split
"""

import itertools
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.optimize
import scipy.special
from joblib import Parallel, delayed

from .core.markov import average_reward, induced_transition_matrix
from .util.exceptions import ParameterError
from .util.utils import valid_policy

__all__ = [
    "RANK_TOL",
    "MAX_VERTEX_CANDIDATES",
    "ConstraintMatrix",
    "CovertLpResult",
    "build_constraint_matrix",
    "solve_covert_lp",
    "optimal_covert_policy",
    "is_perfectly_covert",
    "covert_regret_split",
]

# Singular values below this are treated as zero
RANK_TOL = 1e-9

# Above this many candidate vertices, fall back to scipy.optimize.linprog
MAX_VERTEX_CANDIDATES = 2 ** 16

# Tolerance on box and tie comparisons in vertex enumeration
_LP_TOL = 1e-12


@dataclass(frozen=True)
class ConstraintMatrix:
    """Covertness constraint of one state.

    Attributes
    ----------
    c : np.ndarray [shape=(num_states + 1, num_actions)]
        Column ``a`` holds ``T(. | s, a)`` followed by a 1

    rank : int
        Numerical rank of ``c`` at tolerance `RANK_TOL`

    null_dim : int
        ``num_actions - rank``, the dimension of the covert deviations

    null_space : np.ndarray [shape=(num_actions, null_dim)]
        Orthonormal basis of the null space of ``c``
    """

    c: np.ndarray
    rank: int
    null_dim: int
    null_space: np.ndarray


class CovertLpResult(NamedTuple):
    """Optimal perfectly covert deviation in one state."""

    delta_pi: np.ndarray
    """Change of the action distribution, ``pi_adv[s] - pi_star[s]``"""

    objective: float
    """Change of the expected reward in state ``s``, ``delta_pi @ r[s]``"""

    feasible_dim: int
    """Dimension of the covert deviation space"""


def _check_state(mdp, s):
    if not isinstance(s, (int, np.integer)) or not 0 <= s < mdp.num_states:
        raise ParameterError(
            "Invalid state index {} for an MDP with {} states".format(s, mdp.num_states)
        )


def build_constraint_matrix(mdp, s):
    """Constraint matrix of perfectly covert deviations in state ``s``.

    Parameters
    ----------
    mdp : Mdp
    s : int
        State index

    Returns
    -------
    constraint : ConstraintMatrix

    Raises
    ------
    ParameterError
        If ``s`` is not a valid state.

    Examples
    --------
    >>> mdp = covertmdp.util.load_mdp(covertmdp.ex('duplicate-rows'))
    >>> cm = covertmdp.covert.build_constraint_matrix(mdp, 0)
    >>> cm.rank, cm.null_dim
    (2, 1)
    """
    _check_state(mdp, s)

    c = np.vstack([mdp.transition[s].T, np.ones(mdp.num_actions)])
    _, sv, vh = np.linalg.svd(c)
    rank = int(np.sum(sv > RANK_TOL))

    return ConstraintMatrix(
        c=c,
        rank=rank,
        null_dim=mdp.num_actions - rank,
        null_space=vh[rank:].T.copy(),
    )


def _enumerate_vertices(basis, lower, upper):
    """All vertices of ``{y : lower <= basis @ y <= upper}``, mapped to ``basis @ y``."""
    num_actions, dim = basis.shape
    vertices = []
    for active in itertools.combinations(range(num_actions), dim):
        rows = basis[list(active)]
        if np.linalg.matrix_rank(rows, tol=RANK_TOL) < dim:
            continue
        for use_upper in itertools.product((False, True), repeat=dim):
            bound = np.where(use_upper, upper[list(active)], lower[list(active)])
            delta = basis @ np.linalg.solve(rows, bound)
            if np.all(delta >= lower - _LP_TOL) and np.all(delta <= upper + _LP_TOL):
                vertices.append(np.clip(delta, lower, upper))
    return vertices


def solve_covert_lp(mdp, pi_star, s):
    """Best perfectly covert deviation from ``pi_star`` in state ``s``.

    Minimizes ``delta @ r[s]`` subject to ``C @ delta == 0`` and
    ``0 <= pi_star[s] + delta <= 1``.

    Small problems are solved exactly by enumerating the vertices of the
    feasible polytope in null-space coordinates. If the number of candidate
    vertices exceeds `MAX_VERTEX_CANDIDATES`, `scipy.optimize.linprog` is used.

    Parameters
    ----------
    mdp : Mdp
    pi_star : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
        The controller's policy
    s : int
        State index

    Returns
    -------
    result : CovertLpResult
        Among optimal vertices the lexicographically smallest ``delta_pi``
        is returned, including when the optimum is zero and the
        zero deviation ties with other vertices.

    Examples
    --------
    >>> mdp = covertmdp.util.load_mdp(covertmdp.ex('duplicate-rows'))
    >>> pi_star = covertmdp.util.load_policy(covertmdp.ex('duplicate-rows', kind='policy'))
    >>> covertmdp.covert.solve_covert_lp(mdp, pi_star, 0)
    CovertLpResult(delta_pi=array([-1.,  0.,  1.]), objective=-1.0, feasible_dim=1)
    """
    pi_star = np.asarray(pi_star, dtype=np.float64)
    valid_policy(pi_star, mdp.num_states, mdp.num_actions)
    constraint = build_constraint_matrix(mdp, s)

    zero = CovertLpResult(
        delta_pi=np.zeros(mdp.num_actions),
        objective=0.0,
        feasible_dim=constraint.null_dim,
    )
    if constraint.null_dim == 0:
        return zero

    reward = mdp.reward[s]
    lower = -pi_star[s]
    upper = 1.0 - pi_star[s]

    dim = constraint.null_dim
    n_candidates = int(scipy.special.comb(mdp.num_actions, dim, exact=True)) * 2 ** dim

    if n_candidates <= MAX_VERTEX_CANDIDATES:
        vertices = np.array(_enumerate_vertices(constraint.null_space, lower, upper))
        values = vertices @ reward
        best = values.min()
        ties = vertices[values <= best + _LP_TOL * max(1.0, np.abs(reward).max())]
        # lexicographic order: first column is the primary key
        keys = np.round(ties, 12)
        delta = ties[np.lexsort(keys.T[::-1])[0]]
    else:
        warnings.warn(
            "State {}: {} candidate vertices, falling back to linprog".format(
                s, n_candidates
            ),
            stacklevel=2,
        )
        result = scipy.optimize.linprog(
            reward,
            A_eq=constraint.c,
            b_eq=np.zeros(constraint.c.shape[0]),
            bounds=list(zip(lower, upper)),
            method="highs",
        )
        delta = result.x

    return CovertLpResult(
        delta_pi=delta, objective=float(delta @ reward), feasible_dim=dim
    )


def optimal_covert_policy(mdp, pi_star, n_jobs=None):
    """Reward-minimizing policy that induces the same transition matrix as ``pi_star``.

    Parameters
    ----------
    mdp : Mdp
    pi_star : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]

    n_jobs : int or None
        Number of threads solving the per-state problems.
        See `joblib.Parallel`.

    Returns
    -------
    pi_adv : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
        ``pi_star + delta_pi`` state by state

    See Also
    --------
    solve_covert_lp
    is_perfectly_covert
    """
    pi_star = np.asarray(pi_star, dtype=np.float64)
    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(solve_covert_lp)(mdp, pi_star, s) for s in range(mdp.num_states)
    )

    pi_adv = pi_star + np.array([res.delta_pi for res in results])
    pi_adv = np.clip(pi_adv, 0.0, 1.0)
    return pi_adv / pi_adv.sum(axis=1, keepdims=True)


def is_perfectly_covert(mdp, pi_star, pi_adv, tol=RANK_TOL):
    """Test whether two policies induce the same state transition matrix.

    Parameters
    ----------
    mdp : Mdp
    pi_star, pi_adv : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]

    tol : float >= 0
        Maximum allowed absolute difference of any transition probability

    Returns
    -------
    covert : bool
    """
    diff = induced_transition_matrix(mdp, pi_adv) - induced_transition_matrix(
        mdp, pi_star
    )
    return bool(np.max(np.abs(diff)) <= tol)


def covert_regret_split(mdp, pi_star, pi):
    """Split the regret of ``pi`` into its covert and its detectable part.

    With ``pi_c`` the optimal perfectly covert policy,
    ``J(pi_star) - J(pi) == [J(pi_star) - J(pi_c)] + [J(pi_c) - J(pi)]``.
    The first part is obtained without any risk of detection,
    however long the controller observes.

    Parameters
    ----------
    mdp : Mdp
    pi_star, pi : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]

    Returns
    -------
    covert_part : float
        ``J(pi_star) - J(pi_c)``

    detectable_part : float
        ``J(pi_c) - J(pi)``
    """
    pi_c = optimal_covert_policy(mdp, pi_star)
    j_c = average_reward(mdp, pi_c)
    return average_reward(mdp, pi_star) - j_c, j_c - average_reward(mdp, pi)
