#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Detection
=========

The controller observes the visited states and decides between the
null hypothesis (the actuator follows ``pi_star``) and the adversarial
hypothesis. A decision value of 0 accepts the null hypothesis.

Test statistics
---------------
.. autosummary::
    :toctree: generated/

    llr_weights
    log_likelihood_ratio
    llr_from_doublet
    dk_typical_membership

Detectors
---------
.. autosummary::
    :toctree: generated/

    Decision
    DetectorSpec
    np_detector
    hoeffding_detector
    SteinThreshold
    stein_threshold

Error probabilities
-------------------
.. autosummary::
    :toctree: generated/

    ErrorRates
    error_rates_monte_carlo
    exact_error_rates
    count_classes
    typical_set_masses
"""

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed

from ._cache import cache
from .core.markov import (
    doublet_distribution,
    induced_transition_matrix,
    sample_trajectory,
    stationary_distribution,
)
from .statistics import (
    dk_divergence,
    empirical_stats,
    project_to_shift_invariant,
    transition_counts,
)
from .util.exceptions import GuardError, ParameterError
from .util.utils import SHIFT_TOL, has_cycle

__all__ = [
    "MAX_ENUMERATION",
    "Decision",
    "DetectorSpec",
    "ErrorRates",
    "CountClasses",
    "TypicalSetMasses",
    "SteinThreshold",
    "llr_weights",
    "log_likelihood_ratio",
    "llr_from_doublet",
    "np_detector",
    "hoeffding_detector",
    "dk_typical_membership",
    "count_classes",
    "stein_threshold",
    "exact_error_rates",
    "error_rates_monte_carlo",
    "replication_seed",
    "typical_set_masses",
]

# Largest number of sequences ``num_states ** n`` enumerated exactly
MAX_ENUMERATION = 2 ** 24

ACCEPT_NULL = 0
ACCEPT_ADVERSARIAL = 1


class Decision(NamedTuple):
    """Outcome of a detector on one trajectory."""

    value: int
    """0 accepts the null hypothesis, 1 accepts the adversarial one"""

    statistic: float
    threshold: float


@dataclass(frozen=True)
class DetectorSpec:
    """Description of a detector.

    Attributes
    ----------
    kind : str
        - ``'np'``: likelihood ratio test, accepts the null iff ``L > eta``
        - ``'hoeffding'``: universal test, accepts the null iff
          ``D_K(theta_emp, theta_star) < eta``
        - ``'stein'``: likelihood ratio test minimizing the type II error
          subject to a type I error of ``alpha_max``, randomized at its
          boundary and found by exact enumeration (see `stein_threshold`)

    eta : float
        Threshold for ``'np'`` (finite) and ``'hoeffding'`` (positive).
        Ignored by ``'stein'``.

    alpha_max : float in (0, 1)
        Type I error budget of ``'stein'``
    """

    kind: str
    eta: float = 0.0
    alpha_max: float = 0.1

    def __post_init__(self):
        if self.kind not in ("np", "hoeffding", "stein"):
            raise ParameterError("Unknown detector kind: {}".format(self.kind))

        if self.kind == "np" and not np.isfinite(self.eta):
            raise ParameterError("np detector threshold must be finite")

        if self.kind == "hoeffding" and not self.eta > 0:
            raise ParameterError(
                "hoeffding detector threshold must be positive, eta={}".format(self.eta)
            )

        if self.kind == "stein" and not 0 < self.alpha_max < 1:
            raise ParameterError(
                "alpha_max={} must lie in (0, 1)".format(self.alpha_max)
            )


class ErrorRates(NamedTuple):
    """Type I and type II error probabilities of a detector at length ``n``."""

    alpha: float
    beta: float
    n: int
    method: str
    """``'monte_carlo'`` or ``'exact_enumeration'``"""

    replications: int = 0
    halfwidth_alpha: float = 0.0
    halfwidth_beta: float = 0.0


class SteinThreshold(NamedTuple):
    """Randomized boundary of the size-constrained likelihood ratio test."""

    eta: float
    """Largest LLR value that is always rejected"""

    boundary: float
    """Smallest LLR value that is not always rejected"""

    gamma: float
    """Rejection probability at ``boundary``"""


class CountClasses(NamedTuple):
    """State sequences grouped by first state and transition counts."""

    first: np.ndarray
    counts: np.ndarray
    multiplicity: np.ndarray


class TypicalSetMasses(NamedTuple):
    """Exact masses of the typical set under both hypotheses."""

    p_star: float
    p_adv: float
    divergence: float
    sandwich_holds: bool
    upper_bound: float
    """``2 ** (-(n - 1) * (divergence - delta))``"""

    lower_bound: float
    """``(1 - delta) * 2 ** (-(n - 1) * (divergence + delta))``"""

    size: int


def llr_weights(t_star, t_adv):
    """Per-transition log-likelihood ratios ``log2(t_star / t_adv)``.

    The normalized log-likelihood ratio of a trajectory is the
    inner product of these weights with its empirical doublet distribution.

    Parameters
    ----------
    t_star, t_adv : np.ndarray [shape=(n, n)]
        Transition matrices under the null and adversarial hypotheses

    Returns
    -------
    weights : np.ndarray [shape=(n, n)]
        ``-inf`` where only ``t_star`` vanishes, ``+inf`` where only
        ``t_adv`` vanishes, ``nan`` where both do
    """
    t_star = np.asarray(t_star, dtype=np.float64)
    t_adv = np.asarray(t_adv, dtype=np.float64)
    if t_star.shape != t_adv.shape:
        raise ParameterError(
            "Transition shapes differ: {} != {}".format(t_star.shape, t_adv.shape)
        )

    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log2(t_star) - np.log2(t_adv)


def _weighted_llr(weights, theta):
    used = theta > 0
    if np.any(np.isnan(weights[used])):
        raise ParameterError(
            "Trajectory uses a transition impossible under both hypotheses"
        )
    terms = weights[used] * theta[used]
    if np.any(terms == np.inf) and np.any(terms == -np.inf):
        raise ParameterError("Trajectory is impossible under both hypotheses")
    return float(np.sum(terms))


def llr_from_doublet(theta, t_star, t_adv):
    """Normalized log-likelihood ratio as a function of a doublet distribution.

    ``L(theta) = sum(theta * log2(t_star / t_adv))``, which is affine in ``theta``.

    Parameters
    ----------
    theta : np.ndarray [shape=(n, n)]
    t_star, t_adv : np.ndarray [shape=(n, n)]

    Returns
    -------
    llr : float
    """
    return _weighted_llr(llr_weights(t_star, t_adv), np.asarray(theta))


def log_likelihood_ratio(traj, t_star, t_adv):
    """Normalized log-likelihood ratio of a trajectory, in bits per transition.

    ``L = (1 / (n - 1)) * sum_t log2(t_star[s_t, s_t+1] / t_adv[s_t, s_t+1])``

    Parameters
    ----------
    traj : covertmdp.statistics.Trajectory
    t_star, t_adv : np.ndarray [shape=(num_states, num_states)]

    Returns
    -------
    llr : float
        ``-inf`` if the trajectory is impossible under the null hypothesis,
        ``+inf`` if it is impossible under the adversarial one

    Raises
    ------
    ParameterError
        If the trajectory is impossible under both hypotheses.

    Examples
    --------
    >>> t_star = np.array([[0.9, 0.1], [0.2, 0.8]])
    >>> t_adv = np.full((2, 2), 0.5)
    >>> traj = covertmdp.statistics.Trajectory([0, 1])
    >>> covertmdp.detection.log_likelihood_ratio(traj, t_star, t_adv)
    -2.321928094887362
    """
    weights = llr_weights(t_star, t_adv)
    counts = transition_counts(traj, weights.shape[0])
    return _weighted_llr(weights, counts) / (len(traj) - 1)


def np_detector(traj, t_star, t_adv, eta):
    """Likelihood ratio test: accept the null hypothesis iff ``L > eta``.

    Parameters
    ----------
    traj : covertmdp.statistics.Trajectory
    t_star, t_adv : np.ndarray [shape=(num_states, num_states)]
    eta : float
        Finite threshold. Ties reject the null hypothesis.

    Returns
    -------
    decision : Decision
    """
    if not np.isfinite(eta):
        raise ParameterError("Threshold must be finite, eta={}".format(eta))

    llr = log_likelihood_ratio(traj, t_star, t_adv)
    value = ACCEPT_NULL if llr > eta else ACCEPT_ADVERSARIAL
    return Decision(value=value, statistic=llr, threshold=eta)


def _hoeffding_statistic(theta, theta_star):
    """D_K of an empirical doublet distribution, projected onto the shift-invariant set."""
    violation = np.max(np.abs(theta.sum(axis=1) - theta.sum(axis=0)))
    if violation > SHIFT_TOL:
        support = theta > 0
        theta = project_to_shift_invariant(
            theta, mask=support if has_cycle(support) else None
        )
    return dk_divergence(theta, theta_star, tol=1e-8)


def hoeffding_detector(traj, theta_star, eta):
    """Universal test: accept the null hypothesis iff ``D_K(theta_emp, theta_star) < eta``.

    The empirical doublet distribution of a trajectory misses shift-invariance
    by at most ``1 / (n - 1)``, at its first and last states. It is projected
    onto the shift-invariant set before the divergence is computed.

    When the observed transitions contain a cycle, the projection keeps the
    observed support, so no unobserved transition gains mass. This differs
    from the unrestricted Euclidean projection, which is used only when the
    observed support has no cycle.

    Parameters
    ----------
    traj : covertmdp.statistics.Trajectory
        At least two states

    theta_star : np.ndarray [shape=(num_states, num_states)]
        Stationary doublet distribution under the null hypothesis

    eta : float > 0
        Threshold

    Returns
    -------
    decision : Decision

    Raises
    ------
    ParameterError
        If ``eta <= 0``, the trajectory is too short, or its empirical
        doublet distribution misses shift-invariance by more than ``2 / (n - 1)``.
    """
    if not eta > 0:
        raise ParameterError("Threshold must be positive, eta={}".format(eta))

    theta_star = np.asarray(theta_star, dtype=np.float64)
    theta = empirical_stats(traj, theta_star.shape[0]).theta

    violation = np.max(np.abs(theta.sum(axis=1) - theta.sum(axis=0)))
    if violation > 2.0 / (len(traj) - 1):
        raise ParameterError(
            "Empirical doublet distribution is {} away from shift-invariance".format(
                violation
            )
        )

    statistic = _hoeffding_statistic(theta, theta_star)
    value = ACCEPT_NULL if statistic < eta else ACCEPT_ADVERSARIAL
    return Decision(value=value, statistic=statistic, threshold=eta)


def _stationary_doublet(transition):
    return doublet_distribution(stationary_distribution(transition), transition)


def dk_typical_membership(traj, t_star, t_adv, delta):
    """Test whether a trajectory is typical for the null hypothesis.

    A trajectory is typical when its normalized log-likelihood ratio lies
    within ``delta`` of ``D_K(theta_star, theta_adv)``.

    Parameters
    ----------
    traj : covertmdp.statistics.Trajectory
    t_star, t_adv : np.ndarray [shape=(num_states, num_states)]
        Irreducible transition matrices under both hypotheses
    delta : float > 0

    Returns
    -------
    typical : bool

    Raises
    ------
    ParameterError
        If ``delta <= 0`` or the divergence is infinite.
    """
    if not delta > 0:
        raise ParameterError("delta must be positive, delta={}".format(delta))

    divergence = dk_divergence(_stationary_doublet(t_star), _stationary_doublet(t_adv))
    if not np.isfinite(divergence):
        raise ParameterError("D_K(theta_star, theta_adv) is infinite")

    return bool(abs(log_likelihood_ratio(traj, t_star, t_adv) - divergence) <= delta)


@cache(level=20)
def count_classes(num_states, n):
    """Group all state sequences of length ``n`` by first state and transition counts.

    The probability of a sequence under any Markov chain depends only on
    its first state and its transition counts, and so does every detector
    here. Classes are built by dynamic programming over sequence length.

    Parameters
    ----------
    num_states : int > 0
    n : int >= 2

    Returns
    -------
    classes : CountClasses
        ``first[k]`` and ``counts[k]`` describe class ``k``, which contains
        ``multiplicity[k]`` sequences. Classes are sorted by first state
        and then by counts.

    Raises
    ------
    GuardError
        If ``num_states ** n`` exceeds `MAX_ENUMERATION`.
    """
    if n < 2:
        raise ParameterError("Sequence length must be at least 2, n={}".format(n))

    if num_states ** n > MAX_ENUMERATION:
        raise GuardError(
            "Exact enumeration of {}**{} sequences exceeds the limit of {}".format(
                num_states, n, MAX_ENUMERATION
            )
        )

    size = num_states * num_states
    classes = {}
    for first in range(num_states):
        layer = {(first, (0,) * size): 1}
        for _ in range(n - 1):
            grown = defaultdict(int)
            for (last, counts), mult in layer.items():
                for state in range(num_states):
                    key = list(counts)
                    key[last * num_states + state] += 1
                    grown[(state, tuple(key))] += mult
            layer = grown

        # the last state is determined by the first state and the counts
        for (_, counts), mult in layer.items():
            classes[(first, counts)] = mult

    keys = sorted(classes)
    return CountClasses(
        first=np.array([k[0] for k in keys], dtype=np.int64),
        counts=np.array([k[1] for k in keys], dtype=np.int64).reshape(
            (-1, num_states, num_states)
        ),
        multiplicity=np.array([classes[k] for k in keys], dtype=np.float64),
    )


def _class_probabilities(classes, initial, transition):
    """Probability mass of every class under the chain ``(initial, transition)``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        log_t = np.log2(transition)
        log_mu = np.log2(initial)
        terms = np.where(classes.counts > 0, classes.counts * log_t, 0.0)
    log_p = log_mu[classes.first] + terms.sum(axis=(1, 2))
    return classes.multiplicity * np.exp2(log_p)


def _class_llr(classes, weights, n):
    """Normalized LLR of every class; nan for classes impossible under both hypotheses."""
    with np.errstate(invalid="ignore"):
        terms = np.where(classes.counts > 0, classes.counts * weights, 0.0)
        return terms.sum(axis=(1, 2)) / (n - 1)


def _class_decisions(classes, n, detector, weights, theta_star, eta):
    if detector.kind in ("np", "stein"):
        llr = _class_llr(classes, weights, n)
        return np.where(llr > eta, ACCEPT_NULL, ACCEPT_ADVERSARIAL)

    values = np.empty(len(classes.first), dtype=int)
    for k, counts in enumerate(classes.counts):
        statistic = _hoeffding_statistic(counts / (n - 1), theta_star)
        values[k] = ACCEPT_NULL if statistic < detector.eta else ACCEPT_ADVERSARIAL
    return values


def _chains(mdp, pi_star, pi_adv):
    return (
        induced_transition_matrix(mdp, pi_star),
        induced_transition_matrix(mdp, pi_adv),
    )


def stein_threshold(mdp, pi_star, pi_adv, n, alpha_max=0.1):
    """Randomized likelihood ratio test minimizing the type II error under
    a type I budget.

    Sequences with ``L <= eta`` are always rejected, sequences with
    ``L == boundary`` are rejected with probability ``gamma``, and the rest
    are accepted. ``gamma`` is chosen so that the exact type I error equals
    ``alpha_max``, which makes the test optimal among all tests of that size.

    Parameters
    ----------
    mdp : Mdp
    pi_star, pi_adv : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
    n : int >= 2
        Sequence length
    alpha_max : float in (0, 1)

    Returns
    -------
    threshold : SteinThreshold
        ``eta`` may be ``-inf``, rejecting only sequences impossible under
        the null. ``boundary`` is ``inf`` with ``gamma = 0`` when every
        possible sequence fits in the budget.
    """
    t_star, t_adv = _chains(mdp, pi_star, pi_adv)
    classes = count_classes(mdp.num_states, n)
    llr = _class_llr(classes, llr_weights(t_star, t_adv), n)
    p_star = _class_probabilities(classes, mdp.initial, t_star)

    possible = p_star > 0
    llr, p_star = llr[possible], p_star[possible]

    eta, rejected = -np.inf, 0.0
    for value in np.unique(llr):
        level = math.fsum(p_star[llr == value])
        if rejected + level > alpha_max:
            gamma = (alpha_max - rejected) / level
            return SteinThreshold(eta=float(eta), boundary=float(value), gamma=gamma)
        eta = value
        rejected += level
    return SteinThreshold(eta=float(eta), boundary=np.inf, gamma=0.0)


def exact_error_rates(mdp, pi_star, pi_adv, detector, n):
    """Exact type I and type II error probabilities by enumerating all sequences.

    Parameters
    ----------
    mdp : Mdp
    pi_star, pi_adv : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
        Null and adversarial policies

    detector : DetectorSpec
    n : int >= 2
        Sequence length

    Returns
    -------
    rates : ErrorRates
        ``alpha`` is the null probability of the rejected sequences and
        ``beta`` the adversarial probability of the accepted ones,
        each summed with `math.fsum`. For ``'stein'`` the boundary
        level contributes with weight ``gamma``, so ``alpha == alpha_max``.

    Raises
    ------
    GuardError
        If ``mdp.num_states ** n`` exceeds `MAX_ENUMERATION`.

    See Also
    --------
    count_classes
    error_rates_monte_carlo
    """
    t_star, t_adv = _chains(mdp, pi_star, pi_adv)
    classes = count_classes(mdp.num_states, n)
    weights = llr_weights(t_star, t_adv)

    eta = detector.eta
    if detector.kind == "stein":
        stein = stein_threshold(mdp, pi_star, pi_adv, n, detector.alpha_max)
        eta = stein.eta

    decisions = _class_decisions(
        classes, n, detector, weights, _stationary_doublet(t_star), eta
    )
    p_star = _class_probabilities(classes, mdp.initial, t_star)
    p_adv = _class_probabilities(classes, mdp.initial, t_adv)

    alpha = math.fsum(p_star[decisions == ACCEPT_ADVERSARIAL])
    beta = math.fsum(p_adv[decisions == ACCEPT_NULL])

    if detector.kind == "stein" and stein.gamma > 0:
        level = _class_llr(classes, weights, n) == stein.boundary
        alpha += stein.gamma * math.fsum(p_star[level])
        beta -= stein.gamma * math.fsum(p_adv[level])

    return ErrorRates(
        alpha=min(alpha, 1.0),
        beta=min(max(beta, 0.0), 1.0),
        n=n,
        method="exact_enumeration",
    )


def replication_seed(master_seed, replication, hypothesis):
    """Seed of one Monte-Carlo replication.

    Depends only on its arguments, never on scheduling, so serial and
    parallel runs draw identical trajectories.
    """
    sequence = np.random.SeedSequence([master_seed, replication, hypothesis])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _replicate(mdp, policy, n, seed, label, decide):
    return decide(sample_trajectory(mdp, policy, n, seed=seed, policy_label=label))


def error_rates_monte_carlo(
    mdp, pi_star, pi_adv, detector, n, replications, master_seed=0, n_jobs=None
):
    """Estimate type I and type II error probabilities by simulation.

    Parameters
    ----------
    mdp : Mdp
    pi_star, pi_adv : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
    detector : DetectorSpec
    n : int >= 2
        Trajectory length

    replications : int >= 1
        Trajectories simulated under each hypothesis

    master_seed : int >= 0
        Replication ``k`` under hypothesis ``h`` (0 null, 1 adversarial)
        uses `replication_seed` ``(master_seed, k, h)``

    n_jobs : int or None
        Number of threads. Never changes the result.

    Returns
    -------
    rates : ErrorRates
        With ``halfwidth = 1.96 * sqrt(p * (1 - p) / replications)`` per rate
    """
    if replications < 1:
        raise ParameterError(
            "replications must be positive, got {}".format(replications)
        )
    if n < 2:
        raise ParameterError("Trajectory length must be at least 2, n={}".format(n))

    t_star, t_adv = _chains(mdp, pi_star, pi_adv)

    if detector.kind == "hoeffding":
        theta_star = _stationary_doublet(t_star)

        def decide(traj):
            return hoeffding_detector(traj, theta_star, detector.eta).value

    else:
        eta, boundary, gamma = detector.eta, np.inf, 0.0
        if detector.kind == "stein":
            eta, boundary, gamma = stein_threshold(
                mdp, pi_star, pi_adv, n, detector.alpha_max
            )
        weights = llr_weights(t_star, t_adv)

        def decide(traj):
            counts = transition_counts(traj, mdp.num_states)
            llr = _weighted_llr(weights, counts) / (n - 1)
            if gamma > 0 and np.isclose(llr, boundary, rtol=0, atol=1e-12):
                # the coin is drawn from the replication's own seed
                coin = np.random.default_rng([traj.seed, 1]).random()
                return ACCEPT_ADVERSARIAL if coin < gamma else ACCEPT_NULL
            return ACCEPT_NULL if llr > eta else ACCEPT_ADVERSARIAL

    jobs = []
    for hypothesis, (policy, label) in enumerate(
        ((pi_star, "pi_star"), (pi_adv, "pi_adv"))
    ):
        for rep in range(replications):
            seed = replication_seed(master_seed, rep, hypothesis)
            jobs.append(delayed(_replicate)(mdp, policy, n, seed, label, decide))

    values = np.asarray(Parallel(n_jobs=n_jobs, prefer="threads")(jobs))
    alpha = float(np.mean(values[:replications] == ACCEPT_ADVERSARIAL))
    beta = float(np.mean(values[replications:] == ACCEPT_NULL))

    for name, rate in (("alpha", alpha), ("beta", beta)):
        if rate in (0.0, 1.0):
            warnings.warn(
                "Monte-Carlo estimate {}={} at n={}: exponent unmeasurable".format(
                    name, rate, n
                ),
                stacklevel=2,
            )

    return ErrorRates(
        alpha=alpha,
        beta=beta,
        n=n,
        method="monte_carlo",
        replications=replications,
        halfwidth_alpha=1.96 * np.sqrt(alpha * (1 - alpha) / replications),
        halfwidth_beta=1.96 * np.sqrt(beta * (1 - beta) / replications),
    )


def typical_set_masses(t_star, t_adv, initial, n, delta):
    """Exact masses of the set of sequences typical for the null hypothesis.

    A sequence is typical when its normalized log-likelihood ratio lies
    within ``delta`` of ``D = D_K(theta_star, theta_adv)``.

    Parameters
    ----------
    t_star, t_adv : np.ndarray [shape=(num_states, num_states)]
    initial : np.ndarray [shape=(num_states,)]
        Distribution of the first state, shared by both hypotheses
    n : int >= 2
    delta : float > 0

    Returns
    -------
    masses : TypicalSetMasses
        ``sandwich_holds`` is true when every typical sequence satisfies
        ``P_star * 2**(-(n-1)(D+delta)) <= P_adv <= P_star * 2**(-(n-1)(D-delta))``
        up to a relative rounding slack of ``1e-9``.
    """
    if not delta > 0:
        raise ParameterError("delta must be positive, delta={}".format(delta))

    t_star = np.asarray(t_star, dtype=np.float64)
    t_adv = np.asarray(t_adv, dtype=np.float64)
    initial = np.asarray(initial, dtype=np.float64)
    num_states = t_star.shape[0]

    divergence = dk_divergence(_stationary_doublet(t_star), _stationary_doublet(t_adv))
    if not np.isfinite(divergence):
        raise ParameterError("D_K(theta_star, theta_adv) is infinite")

    classes = count_classes(num_states, n)
    llr = _class_llr(classes, llr_weights(t_star, t_adv), n)
    with np.errstate(invalid="ignore"):
        typical = np.abs(llr - divergence) <= delta

    p_star = _class_probabilities(classes, initial, t_star)
    p_adv = _class_probabilities(classes, initial, t_adv)

    low = p_star * np.exp2(-(n - 1) * (divergence + delta))
    high = p_star * np.exp2(-(n - 1) * (divergence - delta))
    slack = 1e-9 * np.maximum(p_adv, 1e-300)
    sandwich = np.all((low[typical] <= p_adv[typical] + slack[typical]) & (
        p_adv[typical] <= high[typical] + slack[typical]
    ))

    return TypicalSetMasses(
        p_star=math.fsum(p_star[typical]),
        p_adv=math.fsum(p_adv[typical]),
        divergence=divergence,
        sandwich_holds=bool(sandwich),
        upper_bound=float(np.exp2(-(n - 1) * (divergence - delta))),
        lower_bound=float((1 - delta) * np.exp2(-(n - 1) * (divergence + delta))),
        size=int(classes.multiplicity[typical].sum()),
    )
