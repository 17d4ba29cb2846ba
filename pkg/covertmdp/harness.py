#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Experiments
===========

Reproducible experiment runs over the library: a JSON configuration is
resolved, dispatched to one of the analysis modes, and written out as a CSV
table with a JSON sidecar recording everything needed to reproduce it.

Configuration
-------------
.. autosummary::
    :toctree: generated/

    ExperimentConfig
    MODES

Sweeps
------
.. autosummary::
    :toctree: generated/

    SweepRow
    SweepReport
    SweepCheck
    SweepVerdict
    exponent_sweep
    fit_slope
    compare_sweep

Running
-------
.. autosummary::
    :toctree: generated/

    run
    read_table
    column_means
"""

import csv
import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from . import adversary
from .core.markov import (
    average_reward,
    doublet_distribution,
    induced_transition_matrix,
    regret,
    stationary_distribution,
)
from .covert import (
    RANK_TOL,
    is_perfectly_covert,
    optimal_covert_policy,
    solve_covert_lp,
)
from .detection import DetectorSpec, error_rates_monte_carlo, exact_error_rates
from .exponents import (
    ExponentPair,
    chernoff_stein_exponent,
    theorem2_exponents,
    theorem4_exponents,
)
from .statistics import dk_divergence
from .util.exceptions import ParameterError
from .util.files import load_json, load_mdp, load_policy
from .version import version as __version__

__all__ = [
    "MODES",
    "OUTPUT_DIR_ENV",
    "ExperimentConfig",
    "SweepRow",
    "SweepReport",
    "SweepCheck",
    "SweepVerdict",
    "exponent_sweep",
    "fit_slope",
    "compare_sweep",
    "run",
    "read_table",
    "column_means",
]

MODES = ("eval", "covert-lp", "detect", "exponents", "adversary", "exponent-sweep")

# Environment variable naming the default output directory
OUTPUT_DIR_ENV = "COVERTMDP_OUTPUT_DIR"

_NEEDS_ADVERSARY = ("eval", "detect", "exponents", "exponent-sweep")


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully specified experiment.

    Relative paths in a configuration file are resolved against the
    directory holding that file.

    Attributes
    ----------
    mdp_path, pi_star_path : str
        Model and controller policy files
    pi_adv_path : str or None
        Adversarial policy file, required by ``eval``, ``detect``,
        ``exponents`` and ``exponent-sweep``
    mode : str
        One of `MODES`
    detector : str
        ``'np'``, ``'hoeffding'`` or ``'stein'``
    eta : float
        Detector threshold, and the controller's type I exponent
        in ``adversary`` mode
    eta_beta : float or None
        Adversary's type II exponent budget
    n_values : tuple of int
        Sequence lengths, positive and ascending
    replications : int >= 1
        Monte-Carlo trajectories per hypothesis
    master_seed : int
        Root of all derived seeds
    output_path : str
        CSV destination. The sidecar goes next to it with suffix ``.json``.
    exact : bool
        Enumerate all sequences instead of simulating
    alpha_max : float
        Type I budget of the ``'stein'`` detector
    frontier : tuple of float or None
        Budgets swept in ``adversary`` mode instead of ``eta_beta``
    """

    mdp_path: str
    pi_star_path: str
    pi_adv_path: Optional[str] = None
    mode: str = "eval"
    detector: str = "hoeffding"
    eta: float = 0.1
    eta_beta: Optional[float] = None
    n_values: Tuple[int, ...] = (8, 10, 12, 14, 16, 18)
    replications: int = 1000
    master_seed: int = 0
    output_path: str = "covertmdp.csv"
    exact: bool = False
    alpha_max: float = 0.1
    frontier: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if self.frontier is not None:
            object.__setattr__(self, "frontier", tuple(float(e) for e in self.frontier))

        if self.mode not in MODES:
            raise ParameterError(
                "Unknown mode '{}', expected one of {}".format(self.mode, MODES)
            )
        if not self.n_values or min(self.n_values) < 2:
            raise ParameterError("n_values must be non-empty and at least 2")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ParameterError(
                "n_values must be strictly ascending, got {}".format(list(self.n_values))
            )
        if self.replications < 1:
            raise ParameterError("replications must be at least 1")
        if self.mode in _NEEDS_ADVERSARY and self.pi_adv_path is None:
            raise ParameterError("mode '{}' needs pi_adv_path".format(self.mode))
        if self.mode == "adversary" and self.eta_beta is None and not self.frontier:
            raise ParameterError("mode 'adversary' needs eta_beta or frontier")
        if Path(self.output_path).suffix == ".json":
            raise ParameterError("output_path must not end in .json, it names the sidecar")

    @classmethod
    def from_json(cls, path, **overrides):
        """Load a configuration file.

        Parameters
        ----------
        path : str or pathlib.Path
        **overrides
            Fields replacing the file's values, e.g. from the command line

        Raises
        ------
        ParameterError
            On unknown fields, invalid values or malformed JSON.
        """
        doc = load_json(path)
        if not isinstance(doc, dict):
            raise ParameterError("{}: expected a JSON object".format(path))

        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ParameterError("{}: unknown fields {}".format(path, unknown))

        base = Path(path).resolve().parent
        for key in ("mdp_path", "pi_star_path", "pi_adv_path", "output_path"):
            if doc.get(key) is not None and not os.path.isabs(doc[key]):
                doc[key] = str(base / doc[key])

        doc.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ParameterError("{}: {}".format(path, exc))

    def load(self):
        """Load and validate the referenced files.

        Returns
        -------
        mdp : Mdp
        pi_star : np.ndarray
        pi_adv : np.ndarray or None
        """
        mdp = load_mdp(self.mdp_path)
        pi_star = load_policy(self.pi_star_path, mdp)
        pi_adv = None
        if self.pi_adv_path is not None:
            pi_adv = load_policy(self.pi_adv_path, mdp)
        return mdp, pi_star, pi_adv

    def detector_spec(self):
        return DetectorSpec(kind=self.detector, eta=self.eta, alpha_max=self.alpha_max)


class SweepRow(NamedTuple):
    n: int
    alpha: float
    beta: float
    rate_alpha: float
    """``log2(alpha) / n``"""

    rate_beta: float
    method: str


class SweepReport(NamedTuple):
    """Error rates over a range of sequence lengths next to their theory."""

    rows: List[SweepRow]
    theory: ExponentPair
    fit_slope_alpha: float
    fit_slope_beta: float
    detector: DetectorSpec
    indistinguishable: bool
    """Both policies induce the same transition matrix"""

    same_policy: bool


class SweepCheck(NamedTuple):
    name: str
    measured: float
    expected: float
    gap: float
    """``|measured - expected| / expected``"""

    status: str


class SweepVerdict(NamedTuple):
    verdict: str
    checks: List[SweepCheck]


def fit_slope(n_values, rates):
    """Least-squares slope of ``log2(rate)`` against ``n`` over the largest half of ``n``.

    Parameters
    ----------
    n_values : sequence of int
    rates : sequence of float

    Returns
    -------
    slope : float
        ``nan`` unless every rate in the fitted range lies strictly in (0, 1)
    """
    n_values = np.asarray(n_values, dtype=np.float64)
    rates = np.asarray(rates, dtype=np.float64)
    keep = max(2, int(np.ceil(len(n_values) / 2)))
    n_values, rates = n_values[-keep:], rates[-keep:]

    if len(n_values) < 2 or np.any(rates <= 0) or np.any(rates >= 1):
        return np.nan
    return float(np.polyfit(n_values, np.log2(rates), 1)[0])


def _derived_seed(master_seed, n):
    sequence = np.random.SeedSequence([master_seed, n])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _log_rate(rate, n):
    return float(np.log2(rate) / n) if rate > 0 else -np.inf


def _theory(theta_star, theta_adv, detector):
    if detector.kind == "np":
        return theorem2_exponents(theta_star, theta_adv, detector.eta)
    if detector.kind == "hoeffding":
        return theorem4_exponents(theta_star, theta_adv, detector.eta)
    return ExponentPair(e_alpha=0.0, e_beta=chernoff_stein_exponent(theta_star, theta_adv))


def exponent_sweep(
    mdp,
    pi_star,
    pi_adv,
    detector,
    n_values,
    exact=False,
    replications=1000,
    master_seed=0,
    n_jobs=None,
):
    """Measure error rates over sequence lengths and fit their exponents.

    Parameters
    ----------
    mdp : Mdp
    pi_star, pi_adv : np.ndarray [shape=(mdp.num_states, mdp.num_actions)]
    detector : covertmdp.detection.DetectorSpec
    n_values : sequence of int
        Ascending sequence lengths
    exact : bool
        Use exact enumeration instead of Monte-Carlo simulation
    replications : int
    master_seed : int
        Length ``n`` simulates with a seed derived from ``(master_seed, n)``
    n_jobs : int or None

    Returns
    -------
    report : SweepReport
    """
    t_star = induced_transition_matrix(mdp, pi_star)
    t_adv = induced_transition_matrix(mdp, pi_adv)
    theta_star = doublet_distribution(stationary_distribution(t_star), t_star)
    theta_adv = doublet_distribution(stationary_distribution(t_adv), t_adv)

    rows = []
    for n in n_values:
        if exact:
            rates = exact_error_rates(mdp, pi_star, pi_adv, detector, n)
        else:
            rates = error_rates_monte_carlo(
                mdp,
                pi_star,
                pi_adv,
                detector,
                n,
                replications,
                master_seed=_derived_seed(master_seed, n),
                n_jobs=n_jobs,
            )
        rows.append(
            SweepRow(
                n=int(n),
                alpha=rates.alpha,
                beta=rates.beta,
                rate_alpha=_log_rate(rates.alpha, n),
                rate_beta=_log_rate(rates.beta, n),
                method=rates.method,
            )
        )

    ns = [row.n for row in rows]
    return SweepReport(
        rows=rows,
        theory=_theory(theta_star, theta_adv, detector),
        fit_slope_alpha=fit_slope(ns, [row.alpha for row in rows]),
        fit_slope_beta=fit_slope(ns, [row.beta for row in rows]),
        detector=detector,
        indistinguishable=is_perfectly_covert(mdp, pi_star, pi_adv, tol=RANK_TOL),
        same_policy=bool(np.array_equal(pi_star, pi_adv)),
    )


def _check(name, slope, exponent, tolerance):
    expected = -exponent
    if not np.isfinite(slope):
        return SweepCheck(name, slope, expected, np.nan, "unmeasurable")
    if expected == 0:
        gap = abs(slope)
    else:
        gap = abs(slope - expected) / abs(expected)
    return SweepCheck(name, slope, expected, gap, "pass" if gap <= tolerance else "fail")


def compare_sweep(report, tolerance=0.25, flat_tol=1e-9):
    """Compare fitted exponents with their theoretical values.

    Parameters
    ----------
    report : SweepReport
    tolerance : float > 0
        Largest accepted relative gap between a fitted slope and
        the negated theoretical exponent
    flat_tol : float >= 0
        Largest deviation of ``alpha + beta`` from 1 for indistinguishable
        hypotheses. Monte-Carlo rows widen it by their sampling error.

    Returns
    -------
    verdict : SweepVerdict
        ``verdict`` is one of

        - ``'no-decay confirmed'``: identical policies, rates flat
        - ``'perfectly covert: error rates flat'``: different policies
          with the same transition matrix
        - ``'pass'`` or ``'fail'``: every check within tolerance or not
        - ``'exponent unmeasurable at this n'``: some rate is exactly 0 or 1
          in the fitted range and no check failed
    """
    if report.indistinguishable:
        sums = np.array([row.alpha + row.beta for row in report.rows])
        noise = flat_tol
        if any(row.method == "monte_carlo" for row in report.rows):
            noise = max(flat_tol, 0.1)
        check = SweepCheck(
            "alpha + beta",
            float(np.max(np.abs(sums - 1))) if sums.size else 0.0,
            0.0,
            float(np.max(np.abs(sums - 1))) if sums.size else 0.0,
            "pass" if np.all(np.abs(sums - 1) <= noise) else "fail",
        )
        if check.status == "fail":
            return SweepVerdict("fail", [check])
        if report.same_policy:
            return SweepVerdict("no-decay confirmed", [check])
        return SweepVerdict("perfectly covert: error rates flat", [check])

    kind = report.detector.kind
    checks = []
    if kind in ("np", "hoeffding"):
        checks.append(
            _check(
                "alpha slope",
                report.fit_slope_alpha,
                report.theory.e_alpha,
                tolerance,
            )
        )
    if kind in ("np", "stein"):
        checks.append(
            _check(
                "beta slope",
                report.fit_slope_beta,
                report.theory.e_beta,
                tolerance,
            )
        )

    statuses = {check.status for check in checks}
    if "fail" in statuses:
        return SweepVerdict("fail", checks)
    if "unmeasurable" in statuses:
        return SweepVerdict("exponent unmeasurable at this n", checks)
    return SweepVerdict("pass", checks)


def _format(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _policy_columns(num_states, num_actions, prefix="pi"):
    return [
        "{}_{}_{}".format(prefix, s, a)
        for s in range(num_states)
        for a in range(num_actions)
    ]


def _run_eval(config, mdp, pi_star, pi_adv, n_jobs):
    tau_star = stationary_distribution(induced_transition_matrix(mdp, pi_star))
    tau_adv = stationary_distribution(induced_transition_matrix(mdp, pi_adv))
    header = ["j_star", "j_adv", "regret"]
    header += ["tau_star_{}".format(s) for s in range(mdp.num_states)]
    header += ["tau_adv_{}".format(s) for s in range(mdp.num_states)]
    row = [average_reward(mdp, pi_star), average_reward(mdp, pi_adv)]
    row.append(regret(mdp, pi_star, pi_adv))
    return header, [row + list(tau_star) + list(tau_adv)], {}


def _run_covert_lp(config, mdp, pi_star, pi_adv, n_jobs):
    policy = optimal_covert_policy(mdp, pi_star, n_jobs=n_jobs)
    header = ["state", "null_dim", "objective"]
    header += ["delta_{}".format(a) for a in range(mdp.num_actions)]
    header += ["pi_{}".format(a) for a in range(mdp.num_actions)]
    rows = []
    for s in range(mdp.num_states):
        res = solve_covert_lp(mdp, pi_star, s)
        rows.append([s, res.feasible_dim, res.objective] + list(res.delta_pi) + list(policy[s]))
    extra = dict(regret=regret(mdp, pi_star, policy))
    return header, rows, extra


def _run_detect(config, mdp, pi_star, pi_adv, n_jobs):
    detector = config.detector_spec()
    header = ["n", "alpha", "beta", "method", "replications"]
    header += ["halfwidth_alpha", "halfwidth_beta"]
    rows, seeds = [], {}
    for n in config.n_values:
        if config.exact:
            rates = exact_error_rates(mdp, pi_star, pi_adv, detector, n)
        else:
            seeds[str(n)] = _derived_seed(config.master_seed, n)
            rates = error_rates_monte_carlo(
                mdp,
                pi_star,
                pi_adv,
                detector,
                n,
                config.replications,
                master_seed=seeds[str(n)],
                n_jobs=n_jobs,
            )
        rows.append(
            [n, rates.alpha, rates.beta, rates.method, rates.replications]
            + [rates.halfwidth_alpha, rates.halfwidth_beta]
        )
    return header, rows, dict(derived_seeds=seeds)


def _run_exponents(config, mdp, pi_star, pi_adv, n_jobs):
    t_star = induced_transition_matrix(mdp, pi_star)
    t_adv = induced_transition_matrix(mdp, pi_adv)
    theta_star = doublet_distribution(stationary_distribution(t_star), t_star)
    theta_adv = doublet_distribution(stationary_distribution(t_adv), t_adv)

    pair = _theory(theta_star, theta_adv, config.detector_spec())
    header = ["detector", "eta", "e_alpha", "e_beta", "dk_star_adv", "dk_adv_star"]
    row = [config.detector, config.eta, pair.e_alpha, pair.e_beta]
    row += [dk_divergence(theta_star, theta_adv), dk_divergence(theta_adv, theta_star)]
    return header, [row], {}


def _run_adversary(config, mdp, pi_star, pi_adv, n_jobs):
    levels = config.frontier or (config.eta_beta,)
    problem = adversary.AdversaryProblem(mdp, pi_star, config.eta, levels[0])
    settings = adversary.AdversaryConfig(n_jobs=n_jobs)
    solutions = adversary.frontier(problem, levels, settings)

    header = ["eta_beta", "regret", "constraint_value", "feasible"]
    header += _policy_columns(mdp.num_states, mdp.num_actions)
    rows = [
        [sol.eta_beta, sol.regret, sol.constraint_value, sol.feasible]
        + list(sol.policy.ravel())
        for sol in solutions
    ]
    return header, rows, {}


def _run_sweep(config, mdp, pi_star, pi_adv, n_jobs):
    detector = config.detector_spec()
    report = exponent_sweep(
        mdp,
        pi_star,
        pi_adv,
        detector,
        config.n_values,
        exact=config.exact,
        replications=config.replications,
        master_seed=config.master_seed,
        n_jobs=n_jobs,
    )
    verdict = compare_sweep(report)
    header = list(SweepRow._fields)
    rows = [list(row) for row in report.rows]
    extra = dict(
        theory=dict(e_alpha=report.theory.e_alpha, e_beta=report.theory.e_beta),
        fit_slope_alpha=report.fit_slope_alpha,
        fit_slope_beta=report.fit_slope_beta,
        verdict=verdict.verdict,
        checks=[check._asdict() for check in verdict.checks],
    )
    if not config.exact:
        extra["derived_seeds"] = {
            str(n): _derived_seed(config.master_seed, n) for n in config.n_values
        }
    return header, rows, extra


_DISPATCH = {
    "eval": _run_eval,
    "covert-lp": _run_covert_lp,
    "detect": _run_detect,
    "exponents": _run_exponents,
    "adversary": _run_adversary,
    "exponent-sweep": _run_sweep,
}


def read_table(path):
    """Read a CSV written by `run`.

    Returns
    -------
    header : list of str
    columns : dict
        Column name to list of cell strings
    """
    with open(str(path), "r", newline="") as fdesc:
        reader = csv.reader(fdesc)
        header = next(reader)
        cells = list(reader)
    return header, {name: [row[k] for row in cells] for k, name in enumerate(header)}


def column_means(header, columns):
    """Mean of every numeric column, keyed by column name."""
    means = {}
    for name in header:
        try:
            values = np.array([float(cell) for cell in columns[name]])
        except ValueError:
            continue
        means[name] = float(np.mean(values)) if values.size else np.nan
    return means


def run(config, n_jobs=None):
    """Run an experiment and write its results.

    Parameters
    ----------
    config : ExperimentConfig
    n_jobs : int or None
        Threads used by the analysis. Never changes the output.

    Returns
    -------
    csv_path, sidecar_path : pathlib.Path
        The CSV has a header row naming every column, floats written with
        17 significant digits. The sidecar holds the resolved configuration,
        the package version, derived seeds, mode-specific summaries and the
        mean of every numeric column.

    Raises
    ------
    ParameterError
        If the configuration or a referenced file is invalid.
    GuardError
        If exact enumeration is requested for too long sequences.
    """
    mdp, pi_star, pi_adv = config.load()
    header, rows, extra = _DISPATCH[config.mode](config, mdp, pi_star, pi_adv, n_jobs)

    cells = [[_format(value) for value in row] for row in rows]
    csv_path = Path(config.output_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(str(csv_path), "w", newline="") as fdesc:
        writer = csv.writer(fdesc, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(cells)

    columns = {name: [row[k] for row in cells] for k, name in enumerate(header)}
    sidecar = dict(
        config=dataclasses.asdict(config),
        version=__version__,
        summary=column_means(header, columns),
    )
    sidecar.update(extra)

    sidecar_path = csv_path.with_suffix(".json")
    with open(str(sidecar_path), "w") as fdesc:
        json.dump(sidecar, fdesc, indent=2, sort_keys=True)

    return csv_path, sidecar_path
