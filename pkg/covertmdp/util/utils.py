#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Utility functions"""

import warnings

import numpy as np
import numba
import scipy.sparse
import scipy.sparse.csgraph

from .exceptions import ParameterError

# Tolerance for probability vectors and row-stochastic matrices
STOCHASTIC_TOL = 1e-12

# Default tolerance for shift-invariance of analytic doublet distributions
SHIFT_TOL = 1e-9

__all__ = [
    "STOCHASTIC_TOL",
    "SHIFT_TOL",
    "valid_int",
    "valid_distribution",
    "valid_stochastic",
    "valid_doublet",
    "valid_policy",
    "has_cycle",
    "simplex_project",
    "shift_invariant_system",
    "shift_invariant_projector",
    "shift_invariant_project",
]


def valid_int(x, cast=None):
    """Ensure that an input value is integer-typed.

    Parameters
    ----------
    x : number
        A scalar value to be cast to int

    cast : function [optional]
        A function to modify ``x`` before casting.
        Default: `np.floor`

    Returns
    -------
    x_int : int
        ``x_int = int(cast(x))``

    Raises
    ------
    ParameterError
        If ``cast`` is provided and is not callable.
    """

    if cast is None:
        cast = np.floor

    if not callable(cast):
        raise ParameterError("cast parameter must be callable")

    return int(cast(x))


def valid_distribution(p, tol=STOCHASTIC_TOL, size=None):
    """Determine whether an array is a probability vector.

    Parameters
    ----------
    p : np.ndarray [shape=(n,)]
        The candidate distribution

    tol : float >= 0
        Tolerance on the total mass

    size : int or None
        If provided, the required length of ``p``

    Returns
    -------
    valid : bool
        True if all tests pass

    Raises
    ------
    ParameterError
        If ``p`` is not a finite, non-negative 1-d array summing to 1,
        or if its length differs from ``size``.
    """
    if not isinstance(p, np.ndarray) or p.ndim != 1:
        raise ParameterError("Distribution must be a 1-d numpy.ndarray")

    if size is not None and p.shape != (size,):
        raise ParameterError(
            "Distribution has shape={}, expected ({},)".format(p.shape, size)
        )

    if not np.isfinite(p).all():
        raise ParameterError("Distribution is not finite everywhere")

    if np.any(p < 0) or np.any(p > 1 + tol):
        raise ParameterError("Distribution entries must lie in [0, 1]: {}".format(p))

    if abs(p.sum() - 1) > tol:
        raise ParameterError(
            "Distribution must sum to 1 (tol={}), sum={!r}".format(tol, p.sum())
        )

    return True


def valid_stochastic(transition, tol=STOCHASTIC_TOL):
    """Determine whether an array is a square row-stochastic matrix.

    Parameters
    ----------
    transition : np.ndarray [shape=(n, n)]
        The candidate transition matrix

    tol : float >= 0
        Tolerance on each row sum

    Returns
    -------
    valid : bool
        True if all tests pass

    Raises
    ------
    ParameterError
        If ``transition`` is not square, has entries outside ``[0, 1]``,
        or has a row whose sum differs from 1 by more than ``tol``.
    """
    if not isinstance(transition, np.ndarray) or transition.ndim != 2:
        raise ParameterError("Transition matrix must be a 2-d numpy.ndarray")

    if transition.shape[0] != transition.shape[1]:
        raise ParameterError(
            "Transition matrix must be square, shape={}".format(transition.shape)
        )

    if not np.isfinite(transition).all():
        raise ParameterError("Transition matrix is not finite everywhere")

    if np.any(transition < 0) or np.any(transition > 1 + tol):
        raise ParameterError("Transition matrix entries must lie in [0, 1]")

    bad = np.flatnonzero(np.abs(transition.sum(axis=1) - 1) > tol)
    if bad.size:
        raise ParameterError(
            "Invalid transition matrix: rows {} do not sum to 1 "
            "(tol={})".format(bad.tolist(), tol)
        )

    return True


def valid_doublet(theta, tol=STOCHASTIC_TOL):
    """Determine whether an array is a distribution over ordered state pairs.

    Parameters
    ----------
    theta : np.ndarray [shape=(n, n)]
        The candidate doublet distribution

    tol : float >= 0
        Tolerance on the total mass

    Returns
    -------
    valid : bool
        True if all tests pass

    Raises
    ------
    ParameterError
        If ``theta`` is not square, non-negative and of unit mass.
    """
    if not isinstance(theta, np.ndarray) or theta.ndim != 2:
        raise ParameterError("Doublet distribution must be a 2-d numpy.ndarray")

    if theta.shape[0] != theta.shape[1]:
        raise ParameterError(
            "Doublet distribution must be square, shape={}".format(theta.shape)
        )

    if not np.isfinite(theta).all() or np.any(theta < 0):
        raise ParameterError("Doublet distribution must be finite and non-negative")

    if abs(theta.sum() - 1) > tol:
        raise ParameterError(
            "Doublet distribution must sum to 1, sum={!r}".format(theta.sum())
        )

    return True


def valid_policy(policy, num_states=None, num_actions=None, tol=STOCHASTIC_TOL):
    """Determine whether an array is a stationary policy ``pi[s, a]``.

    Parameters
    ----------
    policy : np.ndarray [shape=(num_states, num_actions)]
        The candidate policy; row ``s`` is the action distribution in state ``s``

    num_states : int or None
    num_actions : int or None
        If provided, the required dimensions

    tol : float >= 0
        Tolerance on each row sum

    Returns
    -------
    valid : bool
        True if all tests pass

    Raises
    ------
    ParameterError
        If the dimensions do not match or a row is not a distribution.
    """
    if not isinstance(policy, np.ndarray) or policy.ndim != 2:
        raise ParameterError("Policy must be a 2-d numpy.ndarray")

    expected = (
        policy.shape[0] if num_states is None else num_states,
        policy.shape[1] if num_actions is None else num_actions,
    )
    if policy.shape != expected:
        raise ParameterError(
            "Policy has shape={}, expected {}".format(policy.shape, expected)
        )

    if not np.isfinite(policy).all():
        raise ParameterError("Policy is not finite everywhere")

    if np.any(policy < 0) or np.any(policy > 1 + tol):
        raise ParameterError("Policy entries must lie in [0, 1]")

    bad = np.flatnonzero(np.abs(policy.sum(axis=1) - 1) > tol)
    if bad.size:
        raise ParameterError(
            "Invalid policy: action distributions of states {} "
            "do not sum to 1".format(bad.tolist())
        )

    return True


def has_cycle(mask):
    """Determine whether a directed graph contains a cycle.

    A shift-invariant doublet distribution supported on ``mask`` exists
    if and only if the graph with adjacency matrix ``mask`` has a cycle.

    Parameters
    ----------
    mask : np.ndarray [shape=(n, n), dtype=bool]
        Adjacency matrix

    Returns
    -------
    cyclic : bool
    """
    mask = np.asarray(mask, dtype=bool)
    if np.any(np.diag(mask)):
        return True

    _, labels = scipy.sparse.csgraph.connected_components(
        scipy.sparse.csr_matrix(mask), directed=True, connection="strong"
    )
    return bool(np.bincount(labels).max() > 1)


@numba.jit(nopython=True, nogil=True, cache=True)
def __simplex_project_vector(x):  # pragma: no cover
    """Euclidean projection of a vector onto the probability simplex."""
    n = x.shape[0]
    u = np.sort(x)[::-1]
    css = np.cumsum(u)
    rho = 0
    for j in range(n):
        if u[j] - (css[j] - 1.0) / (j + 1) > 0:
            rho = j
    shift = (css[rho] - 1.0) / (rho + 1)
    return np.maximum(x - shift, 0.0)


def simplex_project(x):
    """Project each row of an array onto the probability simplex.

    Parameters
    ----------
    x : np.ndarray [shape=(..., n)]
        Input vectors, projected along the last axis

    Returns
    -------
    x_proj : np.ndarray [shape=x.shape]
        ``x_proj[i]`` is the closest probability vector to ``x[i]``
        in Euclidean distance.

    Examples
    --------
    >>> covertmdp.util.simplex_project(np.array([0.5, 0.9, -0.2]))
    array([0.3, 0.7, 0. ])
    """
    x = np.asarray(x, dtype=np.float64)
    flat = np.ascontiguousarray(x.reshape((-1, x.shape[-1])))
    out = np.empty_like(flat)
    for i in range(flat.shape[0]):
        out[i] = __simplex_project_vector(flat[i])
    return out.reshape(x.shape)


def shift_invariant_system(num_states, extra_rows=None, extra_rhs=None):
    """Affine equations describing unit-mass shift-invariant doublet distributions.

    Variables are the row-major entries of an ``(n, n)`` matrix ``nu``.
    The system encodes ``sum(nu) == 1`` and, for every state ``i`` but the
    last (which is implied), ``sum_j nu[i, j] == sum_j nu[j, i]``.

    Parameters
    ----------
    num_states : int > 0
        Number of states ``n``

    extra_rows : np.ndarray [shape=(k, n*n)] or None
    extra_rhs : np.ndarray [shape=(k,)] or None
        Additional affine equations appended to the system

    Returns
    -------
    B : np.ndarray [shape=(m, n*n)]
    e : np.ndarray [shape=(m,)]
        The system ``B @ nu.ravel() == e``
    """
    n = num_states
    rows = [np.ones(n * n)]
    rhs = [1.0]
    for i in range(n - 1):
        row = np.zeros((n, n))
        row[i, :] += 1
        row[:, i] -= 1
        rows.append(row.ravel())
        rhs.append(0.0)

    B = np.vstack(rows)
    e = np.asarray(rhs)
    if extra_rows is not None:
        B = np.vstack([B, np.atleast_2d(extra_rows)])
        e = np.concatenate([e, np.atleast_1d(extra_rhs)])
    return B, e


@numba.jit(nopython=True, nogil=True, cache=True)
def __dykstra(x, B, pinv, e, mask, tol, max_iter):  # pragma: no cover
    """Dykstra's alternating projection onto {B y = e} and {y >= 0, y[~mask] = 0}."""
    y = x.copy()
    q = np.zeros_like(x)
    z = np.empty_like(x)
    converged = False
    for _ in range(max_iter):
        # The affine set needs no correction term
        a = y - np.dot(pinv, np.dot(B, y) - e)
        diff = 0.0
        for i in range(y.shape[0]):
            z[i] = a[i] + q[i]
            if mask[i] and z[i] > 0:
                y_i = z[i]
            else:
                y_i = 0.0
            q[i] = z[i] - y_i
            diff = max(diff, abs(y_i - y[i]))
            y[i] = y_i
        if diff <= tol:
            converged = True
            break
    return y, converged


def shift_invariant_projector(
    num_states, mask=None, extra_rows=None, extra_rhs=None, tol=1e-14, max_iter=200000
):
    """Build a projection onto non-negative, unit-mass, shift-invariant matrices.

    The pseudo-inverse of the constraint system is computed once, so the
    returned function is cheap to call repeatedly.

    Parameters
    ----------
    num_states : int > 0
    mask, extra_rows, extra_rhs, tol, max_iter
        See `shift_invariant_project`

    Returns
    -------
    project : callable
        ``project(theta) -> nu`` for ``(num_states, num_states)`` arrays
    """
    n = num_states
    if mask is None:
        mask = np.ones((n, n), dtype=bool)

    B, e = shift_invariant_system(n, extra_rows=extra_rows, extra_rhs=extra_rhs)
    B = np.ascontiguousarray(B)
    pinv = np.ascontiguousarray(np.linalg.pinv(B))
    e = np.ascontiguousarray(e, dtype=np.float64)
    flat_mask = np.ascontiguousarray(np.asarray(mask, dtype=bool).ravel())

    def project(theta):
        theta = np.ascontiguousarray(np.asarray(theta, dtype=np.float64).ravel())
        nu, converged = __dykstra(theta, B, pinv, e, flat_mask, tol, max_iter)
        if not converged:
            warnings.warn(
                "Shift-invariant projection did not converge in {} iterations".format(
                    max_iter
                ),
                stacklevel=2,
            )
        return nu.reshape((n, n))

    return project


def shift_invariant_project(
    theta, mask=None, extra_rows=None, extra_rhs=None, tol=1e-14, max_iter=200000
):
    """Euclidean projection onto non-negative, unit-mass, shift-invariant matrices.

    The feasible set is
    ``{nu >= 0 : sum(nu) == 1, nu.sum(axis=1) == nu.sum(axis=0)}``,
    optionally intersected with a support constraint (``nu[~mask] == 0``)
    and additional affine equations. The projection is computed by
    Dykstra's alternating projection algorithm.

    Parameters
    ----------
    theta : np.ndarray [shape=(n, n)]
        Matrix to project

    mask : np.ndarray [shape=(n, n), dtype=bool] or None
        Allowed support. Default: all entries.

    extra_rows, extra_rhs : optional
        Additional affine equations on ``nu.ravel()``,
        see `shift_invariant_system`.

    tol : float > 0
        Stopping tolerance on the change between Dykstra iterations

    max_iter : int > 0
        Maximum number of Dykstra iterations

    Returns
    -------
    nu : np.ndarray [shape=(n, n)]
        The projection of ``theta``

    See Also
    --------
    shift_invariant_projector
    covertmdp.statistics.project_to_shift_invariant
    """
    theta = np.asarray(theta, dtype=np.float64)
    project = shift_invariant_projector(
        theta.shape[0],
        mask=mask,
        extra_rows=extra_rows,
        extra_rhs=extra_rhs,
        tol=tol,
        max_iter=max_iter,
    )
    return project(theta)
