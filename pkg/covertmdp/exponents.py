#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Error exponents
===============

Asymptotic decay rates, in bits per step, of the detectors' error
probabilities. They are infima of the divergence ``D_K(nu, theta)`` over
sets of shift-invariant doublet distributions ``nu``.

Rate minimization
-----------------
.. autosummary::
    :toctree: generated/

    SolverConfig
    HalfSpace
    DkBall
    RateMinimization
    minimize_rate
    dk_gradient
    gradient_check

Exponents
---------
.. autosummary::
    :toctree: generated/

    ExponentPair
    theorem2_exponents
    chernoff_stein_exponent
    theorem4_exponents
"""

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.optimize
import scipy.sparse
import scipy.sparse.csgraph
import scipy.special
from joblib import Parallel, delayed

from .detection import llr_weights
from .statistics import dk_divergence, is_shift_invariant, transition_from_doublet
from .util.exceptions import ParameterError
from .util.utils import (
    SHIFT_TOL,
    has_cycle,
    shift_invariant_projector,
    shift_invariant_system,
    valid_doublet,
)

__all__ = [
    "CLIP",
    "SolverConfig",
    "HalfSpace",
    "DkBall",
    "RateMinimization",
    "ExponentPair",
    "minimize_rate",
    "dk_gradient",
    "gradient_check",
    "theorem2_exponents",
    "chernoff_stein_exponent",
    "theorem4_exponents",
]

# Lower clip on doublet entries before taking logarithms
CLIP = 1e-12

_LN2 = np.log(2)

INTERIOR = "interior_optimum"
BOUNDARY = "boundary_optimum"
INFEASIBLE = "infeasible_empty_set"


@dataclass(frozen=True)
class SolverConfig:
    """Settings of the rate minimizer.

    Attributes
    ----------
    method : str
        ``'pgd'``: multistart projected gradient descent over the
        shift-invariant set.
        ``'tilted'``: exact Lagrangian subproblems, solved by the Perron
        eigenvectors of an exponentially tilted transition matrix.

    n_starts : int > 0
        Number of starting points for ``'pgd'``

    tol : float > 0
        Convergence tolerance on the objective

    max_iter : int > 0
        Iteration cap of a single descent

    dither_seed : int
        Seed of the perturbed starting points

    n_jobs : int or None
        Threads running the starts. Never changes the result.
    """

    method: str = "pgd"
    n_starts: int = 16
    tol: float = 1e-8
    max_iter: int = 2000
    dither_seed: int = 0
    n_jobs: Optional[int] = None

    def __post_init__(self):
        if self.method not in ("pgd", "tilted"):
            raise ParameterError("Unknown solver method: {}".format(self.method))
        if self.n_starts < 1:
            raise ParameterError("n_starts must be positive")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")


class HalfSpace(NamedTuple):
    """The set ``{nu : sum(weights * nu) <= bound}``."""

    weights: np.ndarray
    bound: float


class DkBall(NamedTuple):
    """The set ``{nu : D_K(nu, center) <= radius}``."""

    center: np.ndarray
    radius: float


class RateMinimization(NamedTuple):
    """Result of `minimize_rate`."""

    minimizer: np.ndarray
    """The achieving doublet distribution (nan if the set is empty)"""

    value: float
    """``D_K(minimizer, target)`` in bits, ``inf`` if the set is empty"""

    constraint_spec: object
    status: str
    """``'interior_optimum'``, ``'boundary_optimum'`` or ``'infeasible_empty_set'``"""


class ExponentPair(NamedTuple):
    """Asymptotic error exponents in bits per step; 0 means no decay."""

    e_alpha: float
    e_beta: float
    minimizer_alpha: Optional[np.ndarray] = None
    minimizer_beta: Optional[np.ndarray] = None


def _log2_clipped(x):
    return np.log2(np.maximum(x, CLIP))


def dk_gradient(nu, theta):
    """Gradient of ``D_K(nu, theta)`` with respect to ``nu``.

    ``d D_K / d nu[s, s1] = log2(nu[s, s1] / tau[s]) - log2(T[s, s1])``,
    where ``tau`` is the row marginal of ``nu`` and ``T`` the transition
    matrix of ``theta``. Entries are clipped below at `CLIP`.

    Parameters
    ----------
    nu, theta : np.ndarray [shape=(n, n)]

    Returns
    -------
    grad : np.ndarray [shape=(n, n)]
    """
    nu = np.asarray(nu, dtype=np.float64)
    tau = nu.sum(axis=1, keepdims=True)
    return _log2_clipped(nu) - _log2_clipped(tau) - _log2_clipped(
        transition_from_doublet(theta)
    )


def _dk_unconstrained(nu, theta):
    """D_K extended to every positive matrix, in bits."""
    tau = nu.sum(axis=1, keepdims=True)
    t = transition_from_doublet(theta)
    return float(np.sum(scipy.special.rel_entr(nu, tau * t)) / _LN2)


def gradient_check(nu, theta, eps=1e-7):
    """Compare `dk_gradient` with central finite differences.

    Parameters
    ----------
    nu : np.ndarray [shape=(n, n)]
        A strictly positive point

    theta : np.ndarray [shape=(n, n)]
        A doublet distribution with strictly positive transition matrix

    eps : float > 0
        Finite difference step

    Returns
    -------
    error : float
        Largest relative error ``|g - g_fd| / max(1, |g_fd|)`` over all entries
    """
    nu = np.asarray(nu, dtype=np.float64)
    analytic = dk_gradient(nu, theta)
    numeric = np.empty_like(nu)
    for idx in np.ndindex(*nu.shape):
        step = np.zeros_like(nu)
        step[idx] = eps
        numeric[idx] = (
            _dk_unconstrained(nu + step, theta) - _dk_unconstrained(nu - step, theta)
        ) / (2 * eps)

    return float(np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))))


def _check_doublet(theta, name):
    theta = np.asarray(theta, dtype=np.float64)
    valid_doublet(theta, tol=SHIFT_TOL)
    if not is_shift_invariant(theta, tol=SHIFT_TOL):
        raise ParameterError("{} is not shift-invariant".format(name))
    return theta


# Subproblem: minimize  sum(nu * log2(nu / tau)) - sum(nu * gain)  over shift-invariant nu


def _subproblem_value(nu, gain, mask):
    tau = nu.sum(axis=1, keepdims=True)
    entropy = (scipy.special.xlogy(nu, nu) - scipy.special.xlogy(nu, tau)).sum() / _LN2
    return float(entropy - np.sum(np.where(mask, nu * gain, 0.0)))


def _subproblem_gradient(nu, gain, mask):
    tau = nu.sum(axis=1, keepdims=True)
    return np.where(mask, _log2_clipped(nu) - _log2_clipped(tau) - gain, 0.0)


def _descend(gain, mask, project, start, tol, max_iter):
    """Projected gradient descent with Armijo backtracking."""
    nu = project(start)
    value = _subproblem_value(nu, gain, mask)
    step = 0.1

    for _ in range(max_iter):
        grad = _subproblem_gradient(nu, gain, mask)
        while step > 1e-14:
            candidate = project(nu - step * grad)
            diff = candidate - nu
            cand_value = _subproblem_value(candidate, gain, mask)
            if cand_value <= value + np.sum(grad * diff) + np.sum(diff ** 2) / (2 * step):
                break
            step *= 0.5
        else:
            return nu, value

        improvement = value - cand_value
        nu, value = candidate, cand_value
        step = min(2 * step, 10.0)
        if abs(improvement) <= tol:
            return nu, value

    warnings.warn(
        "Projected gradient descent did not converge in {} steps".format(max_iter),
        stacklevel=3,
    )
    return nu, value


def _tilted(gain, mask):
    """Exact minimizer of the subproblem by Perron-Frobenius tilting.

    The minimum is ``-log2(rho)`` with ``rho`` the spectral radius of
    ``A = 2**gain`` restricted to ``mask``; the minimizer is the doublet
    distribution of the chain ``A[s, s1] * v[s1] / (rho * v[s])``.
    """
    n = mask.shape[0]
    finite = np.where(mask, gain, -np.inf)
    shift = np.max(finite[mask])
    matrix = np.where(mask, np.exp2(np.where(mask, gain, 0.0) - shift), 0.0)

    _, labels = scipy.sparse.csgraph.connected_components(
        scipy.sparse.csr_matrix(mask), directed=True, connection="strong"
    )

    best = None
    for label in np.unique(labels):
        comp = np.flatnonzero(labels == label)
        sub = matrix[np.ix_(comp, comp)]
        if not np.any(sub > 0):
            continue
        vals, right = np.linalg.eig(sub)
        k = np.argmax(vals.real)
        rho = vals[k].real
        if best is not None and rho <= best[0] * (1 + 1e-14):
            continue
        vals_t, left = np.linalg.eig(sub.T)
        j = np.argmin(np.abs(vals_t - vals[k]))
        best = (rho, comp, sub, np.abs(right[:, k].real), np.abs(left[:, j].real))

    rho, comp, sub, v, u = best
    nu_sub = u[:, np.newaxis] * sub * v[np.newaxis, :] / rho
    nu = np.zeros((n, n))
    nu[np.ix_(comp, comp)] = nu_sub / nu_sub.sum()
    return nu


def _starts(target, reference, mask, config):
    """Deterministic multistart schedule."""
    rng = np.random.default_rng(config.dither_seed)
    base = [
        target,
        reference,
        0.5 * (target + reference),
        0.75 * target + 0.25 * reference,
        0.25 * target + 0.75 * reference,
    ]
    starts = list(base)
    k = 0
    while len(starts) < config.n_starts:
        center = base[k % 2]
        dither = np.where(mask, rng.uniform(0.5, 1.5, size=mask.shape), 0.0)
        point = center * dither + np.where(mask, 1e-3, 0.0)
        starts.append(point / point.sum())
        k += 1
    return starts[: config.n_starts]


def _multistart(gain, mask, project, target, reference, config):
    starts = _starts(target, reference, mask, config)
    results = Parallel(n_jobs=config.n_jobs, prefer="threads")(
        delayed(_descend)(gain, mask, project, start, config.tol, config.max_iter)
        for start in starts
    )
    # argmin keeps the first of equal values
    best = int(np.argmin([value for _, value in results]))
    return results[best][0]


def _solve_subproblem(gain, mask, config, project=None, target=None, reference=None, start=None):
    if config.method == "tilted":
        return _tilted(gain, mask)
    if start is not None:
        return _descend(gain, mask, project, start, config.tol, config.max_iter)[0]
    return _multistart(gain, mask, project, target, reference, config)


def _infeasible(n, constraint):
    return RateMinimization(
        minimizer=np.full((n, n), np.nan),
        value=np.inf,
        constraint_spec=constraint,
        status=INFEASIBLE,
    )


def _finish(nu, target, constraint):
    nu = np.maximum(nu, 0)
    nu = nu / nu.sum()
    value = dk_divergence(nu, target, tol=1e-8)
    return RateMinimization(
        minimizer=nu, value=value, constraint_spec=constraint, status=BOUNDARY
    )


def _halfspace(target, constraint, config):
    n = target.shape[0]
    weights = np.asarray(constraint.weights, dtype=np.float64)
    bound = float(constraint.bound)
    if weights.shape != target.shape or not np.isfinite(bound):
        raise ParameterError(
            "Malformed half-space: weights.shape={}, bound={}".format(
                weights.shape, bound
            )
        )

    mask = (target > 0) & (weights != np.inf)
    if np.any(np.isnan(weights[mask])) or np.any(weights[mask] == -np.inf):
        raise ParameterError("Half-space weights must be finite on the target support")

    if not has_cycle(mask):
        return _infeasible(n, constraint)

    w = np.where(mask, weights, 0.0)

    # Smallest attainable value of the constraint, by linear programming
    B, e = shift_invariant_system(n)
    cols = mask.ravel()
    lp = scipy.optimize.linprog(
        w.ravel()[cols], A_eq=B[:, cols], b_eq=e, bounds=(0, None), method="highs"
    )
    if lp.status != 0 or lp.fun > bound + 1e-12:
        return _infeasible(n, constraint)

    corner = np.zeros(n * n)
    corner[cols] = lp.x
    corner = corner.reshape((n, n))

    log_t = np.where(mask, _log2_clipped(transition_from_doublet(target)), 0.0)

    if config.method == "tilted":
        def level(lam):
            return np.sum(w * _tilted(log_t - lam * w, mask))

        lo, hi = 0.0, 1.0
        while level(hi) > bound and hi < 2.0 ** 60:
            lo, hi = hi, 2 * hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if level(mid) > bound:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * max(1.0, hi):
                break
        nu = _tilted(log_t - hi * w, mask)
    else:
        project = shift_invariant_projector(
            n, mask=mask, extra_rows=w.ravel()[np.newaxis], extra_rhs=[bound]
        )
        nu = _multistart(log_t, mask, project, target, corner, config)

    return _finish(nu, target, constraint)


def _ball(target, constraint, config):
    n = target.shape[0]
    center = _check_doublet(constraint.center, "ball center")
    radius = float(constraint.radius)
    if center.shape != target.shape or not radius >= 0:
        raise ParameterError(
            "Malformed D_K ball: center.shape={}, radius={}".format(center.shape, radius)
        )

    mask = (target > 0) & (center > 0)
    if not has_cycle(mask):
        return _infeasible(n, constraint)

    log_target = np.where(mask, _log2_clipped(transition_from_doublet(target)), 0.0)
    log_center = np.where(mask, _log2_clipped(transition_from_doublet(center)), 0.0)

    project = shift_invariant_projector(n, mask=mask)

    def solve(weight, start=None):
        gain = (1 - weight) * log_target + weight * log_center
        return _solve_subproblem(
            gain,
            mask,
            config,
            project=project,
            target=target,
            reference=center,
            start=start,
        )

    def radius_of(nu):
        return dk_divergence(np.maximum(nu, 0) / np.maximum(nu, 0).sum(), center, tol=1e-8)

    nearest = solve(1.0, start=None if config.method == "tilted" else center)
    if radius_of(nearest) > radius + 1e-9:
        return _infeasible(n, constraint)

    # Bisection on the weight of the constraint in the Lagrangian
    lo, hi = 0.0, 1.0
    nu_hi = nearest
    warm = target
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        nu_mid = solve(mid, start=None if config.method == "tilted" else warm)
        if radius_of(nu_mid) > radius:
            lo, warm = mid, nu_mid
        else:
            hi, nu_hi = mid, nu_mid
        if hi - lo <= 1e-12:
            break

    if config.method == "pgd":
        candidate = solve(hi)
        if radius_of(candidate) <= radius + 1e-9:
            nu_hi = candidate

    return _finish(nu_hi, target, constraint)


def minimize_rate(target, feasible=None, config=None):
    """Minimize ``D_K(nu, target)`` over shift-invariant ``nu`` in a feasible set.

    Parameters
    ----------
    target : np.ndarray [shape=(n, n)]
        Shift-invariant doublet distribution

    feasible : HalfSpace, DkBall or None
        The constraint set. ``None`` leaves ``nu`` unconstrained.
        Infima over open sets are computed over their closures.

    config : SolverConfig or None

    Returns
    -------
    result : RateMinimization
        ``value == 0`` with ``minimizer == target`` when the target is
        feasible; otherwise the optimum lies on the constraint boundary.
        ``value == inf`` when the feasible set contains no shift-invariant
        distribution that ``target`` gives positive probability to.

    Raises
    ------
    ParameterError
        If ``target`` is not shift-invariant or the constraint is malformed.

    Examples
    --------
    >>> t_star = np.array([[0.9, 0.1], [0.2, 0.8]])
    >>> theta_star = covertmdp.doublet_distribution(
    ...     covertmdp.stationary_distribution(t_star), t_star)
    >>> theta_adv = np.full((2, 2), 0.25)
    >>> w = covertmdp.detection.llr_weights(t_star, np.full((2, 2), 0.5))
    >>> res = covertmdp.exponents.minimize_rate(
    ...     theta_star, covertmdp.exponents.HalfSpace(w, 0.0))
    >>> res.status
    'boundary_optimum'
    """
    if config is None:
        config = SolverConfig()

    target = _check_doublet(target, "target")

    if feasible is None:
        return RateMinimization(
            minimizer=target, value=0.0, constraint_spec=None, status=INTERIOR
        )

    if isinstance(feasible, HalfSpace):
        weights = np.asarray(feasible.weights, dtype=np.float64)
        used = target > 0
        if weights.shape == target.shape and not np.any(np.isnan(weights[used])):
            with np.errstate(invalid="ignore"):
                level = np.sum(np.where(used, weights * target, 0.0))
            if level <= feasible.bound + 1e-12:
                return RateMinimization(
                    minimizer=target, value=0.0, constraint_spec=feasible, status=INTERIOR
                )
        return _halfspace(target, feasible, config)

    if isinstance(feasible, DkBall):
        center = _check_doublet(feasible.center, "ball center")
        if center.shape == target.shape and dk_divergence(target, center) <= feasible.radius:
            return RateMinimization(
                minimizer=target, value=0.0, constraint_spec=feasible, status=INTERIOR
            )
        return _ball(target, feasible, config)

    raise ParameterError("Unknown constraint description: {!r}".format(feasible))


def chernoff_stein_exponent(theta_star, theta_adv):
    """Best type II exponent under a type I error bound: ``D_K(theta_star, theta_adv)``.

    Parameters
    ----------
    theta_star, theta_adv : np.ndarray [shape=(n, n)]
        Shift-invariant doublet distributions

    Returns
    -------
    exponent : float

    Raises
    ------
    ParameterError
        If the divergence is infinite.
    """
    value = dk_divergence(theta_star, theta_adv)
    if not np.isfinite(value):
        raise ParameterError("D_K(theta_star, theta_adv) is infinite")
    return value


def theorem2_exponents(theta_star, theta_adv, eta, config=None):
    """Error exponents of the likelihood ratio test with a fixed threshold.

    The test accepts the null hypothesis iff ``L(theta_emp) > eta``, where
    ``L(nu) = sum(nu * log2(T_star / T_adv))`` is affine in ``nu``.

    Parameters
    ----------
    theta_star, theta_adv : np.ndarray [shape=(n, n)]
        Shift-invariant doublet distributions of both hypotheses

    eta : float
        Threshold in ``[-D_K(theta_adv, theta_star), D_K(theta_star, theta_adv)]``

    config : SolverConfig or None

    Returns
    -------
    exponents : ExponentPair
        ``e_alpha`` minimizes ``D_K(., theta_star)`` over ``{L <= eta}``,
        ``e_beta`` minimizes ``D_K(., theta_adv)`` over ``{L >= eta}``

    Raises
    ------
    ParameterError
        If ``eta`` is outside the admissible range.
    """
    theta_star = _check_doublet(theta_star, "theta_star")
    theta_adv = _check_doublet(theta_adv, "theta_adv")

    upper = dk_divergence(theta_star, theta_adv)
    lower = -dk_divergence(theta_adv, theta_star)
    if not lower - SHIFT_TOL <= eta <= upper + SHIFT_TOL:
        raise ParameterError(
            "eta={} outside the admissible range [{}, {}]".format(eta, lower, upper)
        )

    weights = llr_weights(
        transition_from_doublet(theta_star), transition_from_doublet(theta_adv)
    )

    res_alpha = minimize_rate(theta_star, HalfSpace(weights, eta), config)
    res_beta = minimize_rate(theta_adv, HalfSpace(-weights, -eta), config)
    return ExponentPair(
        e_alpha=res_alpha.value,
        e_beta=res_beta.value,
        minimizer_alpha=res_alpha.minimizer,
        minimizer_beta=res_beta.minimizer,
    )


def theorem4_exponents(theta_star, theta_adv, eta, config=None):
    """Error exponents of the universal test ``D_K(theta_emp, theta_star) < eta``.

    Parameters
    ----------
    theta_star, theta_adv : np.ndarray [shape=(n, n)]
        Shift-invariant doublet distributions of both hypotheses

    eta : float > 0
        Threshold, which is also the type I exponent

    config : SolverConfig or None

    Returns
    -------
    exponents : ExponentPair
        ``e_alpha == eta``; ``e_beta`` is the infimum of
        ``D_K(nu, theta_adv)`` over ``{nu : D_K(nu, theta_star) <= eta}``.
        It is 0 when ``D_K(theta_adv, theta_star) <= eta`` and ``inf``
        when the set contains no admissible ``nu``.

    Raises
    ------
    ParameterError
        If ``eta <= 0``.
    """
    if not eta > 0:
        raise ParameterError("eta must be positive, eta={}".format(eta))

    theta_star = _check_doublet(theta_star, "theta_star")
    theta_adv = _check_doublet(theta_adv, "theta_adv")

    res = minimize_rate(theta_adv, DkBall(theta_star, eta), config)
    return ExponentPair(
        e_alpha=float(eta), e_beta=res.value, minimizer_beta=res.minimizer
    )
