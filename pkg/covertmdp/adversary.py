#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Adversarial planning
====================

An adversary with full knowledge of the controller's policy ``pi_star``
looks for the stationary policy that loses the most average reward while
keeping the type II error exponent of the universal detector below a
chosen level ``eta_beta``.

.. autosummary::
    :toctree: generated/

    AdversaryProblem
    AdversaryConfig
    AdversarySolution
    constraint_value
    solve
    frontier
"""

import dataclasses
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from joblib import Parallel, delayed

from .core.markov import (
    differential_values,
    doublet_distribution,
    induced_transition_matrix,
    policy_iteration,
    regret,
    stationary_distribution,
)
from .core.mdp import Mdp
from .covert import optimal_covert_policy
from .exponents import SolverConfig, theorem4_exponents
from .util.exceptions import ParameterError
from .util.utils import simplex_project, valid_policy

__all__ = [
    "AdversaryProblem",
    "AdversaryConfig",
    "AdversarySolution",
    "constraint_value",
    "solve",
    "frontier",
]

_LN2 = np.log(2)


@dataclass(frozen=True)
class AdversaryProblem:
    """Planning problem of the adversary.

    Attributes
    ----------
    mdp : Mdp
    pi_star : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
        The controller's policy

    eta : float > 0
        Type I exponent of the controller's universal detector

    eta_beta : float > 0
        Largest type II exponent the adversary accepts
    """

    mdp: Mdp
    pi_star: np.ndarray
    eta: float
    eta_beta: float

    def __post_init__(self):
        if not isinstance(self.mdp, Mdp):
            raise ParameterError("mdp must be a covertmdp.Mdp")
        pi_star = np.array(self.pi_star, dtype=np.float64)
        valid_policy(pi_star, self.mdp.num_states, self.mdp.num_actions)
        pi_star.flags.writeable = False
        object.__setattr__(self, "pi_star", pi_star)

        if not self.eta > 0:
            raise ParameterError("eta must be positive, eta={}".format(self.eta))
        if not self.eta_beta > 0:
            raise ParameterError(
                "eta_beta must be positive, eta_beta={}".format(self.eta_beta)
            )


@dataclass(frozen=True)
class AdversaryConfig:
    """Settings of the multistart penalty method used by `solve`.

    Attributes
    ----------
    n_starts : int > 0
        Starting policies: ``pi_star``, the optimal covert policy, the
        reward-minimizing policy, then perturbed copies.

    max_iter : int > 0
        Gradient steps per penalty weight

    step : float > 0
        Initial step size

    penalty : float > 0
        Initial weight of the constraint violation

    max_doublings : int >= 0
        How often the penalty weight may be doubled

    tol : float > 0
        Tolerance on the constraint

    dither_seed : int
        Seed of the perturbed starting policies

    n_jobs : int or None
        Threads running the starts

    rate_config : covertmdp.exponents.SolverConfig
        Rate minimizer evaluating the constraint
    """

    n_starts: int = 6
    max_iter: int = 100
    step: float = 1.0
    penalty: float = 1.0
    max_doublings: int = 16
    tol: float = 1e-6
    dither_seed: int = 0
    n_jobs: Optional[int] = None
    rate_config: SolverConfig = field(
        default_factory=lambda: SolverConfig(method="tilted")
    )

    def __post_init__(self):
        if self.n_starts < 1 or self.max_iter < 1:
            raise ParameterError("n_starts and max_iter must be positive")
        if not self.step > 0 or not self.penalty > 0 or not self.tol > 0:
            raise ParameterError("step, penalty and tol must be positive")


class AdversarySolution(NamedTuple):
    """Result of `solve`."""

    policy: np.ndarray
    regret: float
    """``J(pi_star) - J(policy)``"""

    constraint_value: float
    """Type II exponent of the controller's detector against ``policy``"""

    feasible: bool
    eta_beta: float = np.nan


def _stationary_doublet(mdp, policy):
    t_pi = induced_transition_matrix(mdp, policy)
    return t_pi, doublet_distribution(stationary_distribution(t_pi), t_pi)


def _rate(problem, theta_star, policy, config):
    _, theta_adv = _stationary_doublet(problem.mdp, policy)
    return theorem4_exponents(theta_star, theta_adv, problem.eta, config.rate_config)


def constraint_value(problem, pi_adv, config=None):
    """Type II exponent of the universal detector against ``pi_adv``.

    This is the infimum of ``D_K(nu, theta_adv)`` over
    ``{nu : D_K(nu, theta_star) <= eta}``, where ``theta_star`` and
    ``theta_adv`` are the stationary doublet distributions induced by
    ``problem.pi_star`` and ``pi_adv``.

    Parameters
    ----------
    problem : AdversaryProblem
    pi_adv : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
    config : AdversaryConfig or None

    Returns
    -------
    value : float >= 0
        Zero when the two policies induce the same transition matrix

    See Also
    --------
    covertmdp.exponents.theorem4_exponents
    """
    if config is None:
        config = AdversaryConfig()
    _, theta_star = _stationary_doublet(problem.mdp, problem.pi_star)
    return _rate(problem, theta_star, pi_adv, config).e_beta


class _Point(NamedTuple):
    policy: np.ndarray
    gain: float
    rate: float
    grad_gain: np.ndarray
    grad_rate: np.ndarray


def _evaluate(problem, theta_star, policy, config):
    """Gain, constraint and their policy gradients, or None for a reducible chain."""
    mdp = problem.mdp
    try:
        t_pi, theta_adv = _stationary_doublet(mdp, policy)
        gain, bias = differential_values(mdp, policy)
        exponents = theorem4_exponents(
            theta_star, theta_adv, problem.eta, config.rate_config
        )
    except ParameterError:
        return None

    tau = theta_adv.sum(axis=1)
    q = mdp.reward + mdp.transition @ bias
    grad_gain = tau[:, np.newaxis] * q

    rate = exponents.e_beta
    if np.isfinite(rate):
        # Envelope theorem: only T_adv moves with the policy
        nu = exponents.minimizer_beta
        ratio = np.divide(nu, t_pi, out=np.zeros_like(nu), where=t_pi > 0)
        grad_rate = -np.einsum("st,sat->sa", ratio, mdp.transition) / _LN2
    else:
        grad_rate = np.zeros_like(policy)

    return _Point(policy, gain, rate, grad_gain, grad_rate)


def _merit(point, eta_beta, weight):
    if point is None or not np.isfinite(point.rate):
        return np.inf
    return point.gain + weight * max(0.0, point.rate - eta_beta)


def _merit_gradient(point, eta_beta, weight):
    if point.rate > eta_beta:
        return point.grad_gain + weight * point.grad_rate
    return point.grad_gain


def _descend(problem, theta_star, point, weight, config):
    """Projected gradient descent of the penalized gain."""
    step = config.step
    value = _merit(point, problem.eta_beta, weight)

    for _ in range(config.max_iter):
        grad = _merit_gradient(point, problem.eta_beta, weight)
        while step > 1e-12:
            policy = simplex_project(point.policy - step * grad)
            cand = _evaluate(problem, theta_star, policy, config)
            cand_value = _merit(cand, problem.eta_beta, weight)
            diff = policy - point.policy
            if cand_value <= value + np.sum(grad * diff) + np.sum(diff ** 2) / (2 * step):
                break
            step *= 0.5
        else:
            break

        improvement = value - cand_value
        point, value = cand, cand_value
        step = min(2 * step, config.step)
        if improvement <= 1e-12:
            break

    return point


def _restore(problem, theta_star, point, anchor, config):
    """Move towards a feasible anchor until the constraint holds."""
    limit = problem.eta_beta + config.tol
    if point.rate <= limit:
        return point

    lo, hi = 0.0, 1.0
    best = anchor
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        cand = _evaluate(
            problem, theta_star, (1 - mid) * anchor.policy + mid * point.policy, config
        )
        if cand is not None and cand.rate <= limit:
            lo, best = mid, cand
        else:
            hi = mid
    return best


def _run_start(problem, theta_star, start, anchor, config):
    point = _evaluate(problem, theta_star, start, config)
    if point is None:
        return anchor

    weight = config.penalty
    for _ in range(config.max_doublings + 1):
        point = _descend(problem, theta_star, point, weight, config)
        if point.rate <= problem.eta_beta + config.tol:
            break
        weight *= 2

    return _restore(problem, theta_star, point, anchor, config)


def _starts(problem, covert, config):
    mdp = problem.mdp
    starts = [np.array(problem.pi_star), covert]
    try:
        starts.append(policy_iteration(mdp, maximize=False)[0])
    except ParameterError:
        pass

    rng = np.random.default_rng(config.dither_seed)
    while len(starts) < config.n_starts:
        noise = rng.normal(scale=0.25, size=covert.shape)
        starts.append(simplex_project(covert + noise))
    return starts[: config.n_starts]


def _finalize(problem, point, config):
    policy = np.clip(point.policy, 0.0, 1.0)
    policy = policy / policy.sum(axis=1, keepdims=True)
    value = constraint_value(problem, policy, config)
    return AdversarySolution(
        policy=policy,
        regret=regret(problem.mdp, problem.pi_star, policy),
        constraint_value=value,
        feasible=bool(value <= problem.eta_beta + config.tol),
        eta_beta=problem.eta_beta,
    )


def solve(problem, config=None):
    """Most damaging stationary policy under a covertness constraint.

    Minimizes ``J(pi) - J(pi_star)`` subject to
    ``constraint_value(problem, pi) <= eta_beta``.

    The constraint is handled by an exact penalty whose weight doubles until
    the constraint holds at ``config.tol``. Each start then moves towards
    the optimal covert policy, which is always feasible, until the
    constraint is satisfied. The best feasible candidate is returned.

    Parameters
    ----------
    problem : AdversaryProblem
    config : AdversaryConfig or None

    Returns
    -------
    solution : AdversarySolution
        Never worse than the optimal perfectly covert policy.
        Identical inputs give identical solutions.

    See Also
    --------
    covertmdp.covert.optimal_covert_policy
    frontier

    Examples
    --------
    >>> mdp = covertmdp.util.load_mdp(covertmdp.ex('standard-pair'))
    >>> pi_star = covertmdp.util.load_policy(covertmdp.ex('standard-pair', kind='policy'))
    >>> problem = covertmdp.adversary.AdversaryProblem(mdp, pi_star, 0.05, 0.02)
    >>> sol = covertmdp.adversary.solve(problem)
    >>> sol.feasible
    True
    """
    if config is None:
        config = AdversaryConfig()

    _, theta_star = _stationary_doublet(problem.mdp, problem.pi_star)
    covert = optimal_covert_policy(problem.mdp, problem.pi_star)
    anchor = _evaluate(problem, theta_star, covert, config)
    if anchor is None:
        raise ParameterError("The optimal covert policy induces a reducible chain")

    results = Parallel(n_jobs=config.n_jobs, prefer="threads")(
        delayed(_run_start)(problem, theta_star, start, anchor, config)
        for start in _starts(problem, covert, config)
    )

    candidates = [anchor] + [
        point for point in results if point.rate <= problem.eta_beta + config.tol
    ]
    # argmin keeps the first of equal gains, so ties go to the covert policy
    best = int(np.argmin([point.gain for point in candidates]))
    return _finalize(problem, candidates[best], config)


def frontier(problem, eta_betas, config=None):
    """Trade-off between regret and covertness.

    Parameters
    ----------
    problem : AdversaryProblem
        Template; its ``eta_beta`` is replaced by each value in turn

    eta_betas : iterable of float
        Strictly positive, ascending constraint levels

    config : AdversaryConfig or None

    Returns
    -------
    solutions : list of AdversarySolution
        One per level. A policy feasible at a smaller level is feasible at
        every larger one, so regrets are non-decreasing.
    """
    if config is None:
        config = AdversaryConfig()

    eta_betas = np.asarray(list(eta_betas), dtype=np.float64)
    if eta_betas.ndim != 1 or eta_betas.size == 0:
        raise ParameterError("eta_betas must be a non-empty list")
    if not np.all(eta_betas > 0) or np.any(np.diff(eta_betas) < 0):
        raise ParameterError(
            "eta_betas must be positive and ascending, got {}".format(eta_betas.tolist())
        )

    # Starts run serially inside each level
    inner = dataclasses.replace(config, n_jobs=1)
    solutions = Parallel(n_jobs=config.n_jobs, prefer="threads")(
        delayed(solve)(dataclasses.replace(problem, eta_beta=float(level)), inner)
        for level in eta_betas
    )

    for k in range(1, len(solutions)):
        previous = solutions[k - 1]
        if previous.regret > solutions[k].regret:
            solutions[k] = previous._replace(eta_beta=solutions[k].eta_beta)

    return solutions
