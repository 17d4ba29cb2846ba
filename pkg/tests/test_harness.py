#!/usr/bin/env python
# unit tests for the experiment harness and command line

# Disable cache
import os

try:
    os.environ.pop("COVERTMDP_CACHE_DIR")
except:
    pass

import json

import numpy as np
import pytest

import covertmdp
from covertmdp.cli import main
from covertmdp.detection import DetectorSpec
from covertmdp.exponents import ExponentPair
from covertmdp.harness import (
    ExperimentConfig,
    SweepReport,
    SweepRow,
    column_means,
    compare_sweep,
    read_table,
)

from test_core import load_example


STANDARD = dict(
    mdp_path=covertmdp.ex("standard-pair"),
    pi_star_path=covertmdp.ex("standard-pair", kind="policy"),
    pi_adv_path=covertmdp.ex("standard-pair", kind="adversary"),
)


def model_args(key="standard-pair", adversary=True):
    args = ["--mdp", covertmdp.ex(key), "--pi-star", covertmdp.ex(key, kind="policy")]
    if adversary:
        args += ["--pi-adv", covertmdp.ex(key, kind="adversary")]
    return args


def synthetic_report(kind, slope_alpha, slope_beta, theory=ExponentPair(0.1, 0.2)):
    rows = [SweepRow(n, 0.1, 0.1, np.nan, np.nan, "exact_enumeration") for n in (8, 10)]
    return SweepReport(
        rows=rows,
        theory=theory,
        fit_slope_alpha=slope_alpha,
        fit_slope_beta=slope_beta,
        detector=DetectorSpec(kind, eta=0.1),
        indistinguishable=False,
        same_policy=False,
    )


@pytest.mark.xfail(raises=covertmdp.ParameterError)
@pytest.mark.parametrize(
    "kwargs",
    [
        dict(mode="simulate"),
        dict(n_values=(10, 8)),
        dict(n_values=(1, 8)),
        dict(replications=0),
        dict(pi_adv_path=None),
        dict(mode="adversary"),
        dict(output_path="results.json"),
    ],
)
def test_config_invalid(kwargs):
    args = dict(STANDARD)
    args.update(kwargs)
    ExperimentConfig(**args)


def test_config_from_json(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(
        json.dumps(
            dict(
                mdp_path=STANDARD["mdp_path"],
                pi_star_path=STANDARD["pi_star_path"],
                mode="covert-lp",
                output_path="out/result.csv",
                n_values=[4, 6],
            )
        )
    )
    config = ExperimentConfig.from_json(path, master_seed=5, output_path=None)
    assert config.master_seed == 5
    assert config.n_values == (4, 6)
    assert config.output_path == str(tmp_path.resolve() / "out" / "result.csv")


@pytest.mark.xfail(raises=covertmdp.ParameterError)
def test_config_from_json_unknown(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(dict(STANDARD, threshold=0.1)))
    ExperimentConfig.from_json(path)


def test_fit_slope():
    n = np.arange(8, 20, 2)
    assert np.isclose(covertmdp.harness.fit_slope(n, 2.0 ** (-0.3 * n)), -0.3)
    assert np.isnan(covertmdp.harness.fit_slope(n, np.zeros(len(n))))


def test_run_eval(tmp_path):
    config = ExperimentConfig(mode="eval", output_path=str(tmp_path / "eval.csv"), **STANDARD)
    csv_path, sidecar_path = covertmdp.harness.run(config)

    header, columns = read_table(csv_path)
    assert header[:3] == ["j_star", "j_adv", "regret"]
    assert np.isclose(float(columns["regret"][0]), 1.0 / 6)

    with open(str(sidecar_path)) as fdesc:
        sidecar = json.load(fdesc)
    assert sidecar["version"] == covertmdp.__version__
    assert sidecar["config"]["mode"] == "eval"


def test_run_covert_lp(tmp_path):
    mdp, pi_star = load_example("tied-columns")
    config = ExperimentConfig(
        mdp_path=covertmdp.ex("tied-columns"),
        pi_star_path=covertmdp.ex("tied-columns", kind="policy"),
        mode="covert-lp",
        output_path=str(tmp_path / "lp.csv"),
    )
    csv_path, sidecar_path = covertmdp.harness.run(config)

    _, columns = read_table(csv_path)
    assert [int(x) for x in columns["null_dim"]] == [1, 2, 2]
    assert np.isclose(float(columns["objective"][0]), -1.0 / 3)

    with open(str(sidecar_path)) as fdesc:
        sidecar = json.load(fdesc)
    pi_c = covertmdp.covert.optimal_covert_policy(mdp, pi_star)
    assert np.isclose(sidecar["regret"], covertmdp.regret(mdp, pi_star, pi_c))


def test_run_exponents(tmp_path):
    config = ExperimentConfig(
        mode="exponents", detector="np", eta=0.1, output_path=str(tmp_path / "e.csv"), **STANDARD
    )
    csv_path, _ = covertmdp.harness.run(config)
    _, columns = read_table(csv_path)
    assert np.isclose(float(columns["dk_star_adv"][0]), 0.446693, atol=1e-6)
    assert np.isclose(
        float(columns["e_beta"][0]) - float(columns["e_alpha"][0]), 0.1, atol=1e-3
    )


def test_compare_sweep_synthetic():
    assert compare_sweep(synthetic_report("np", -0.1, -0.2)).verdict == "pass"
    assert compare_sweep(synthetic_report("np", -0.1, -0.4)).verdict == "fail"
    assert compare_sweep(synthetic_report("hoeffding", -0.11, np.nan)).verdict == "pass"

    verdict = compare_sweep(synthetic_report("np", -0.1, np.nan))
    assert verdict.verdict == "exponent unmeasurable at this n"
    assert [check.status for check in verdict.checks] == ["pass", "unmeasurable"]

    verdict = compare_sweep(synthetic_report("stein", np.nan, -0.19))
    assert verdict.verdict == "pass"
    assert len(verdict.checks) == 1


def test_exponent_sweep_identical():
    mdp, pi_star = load_example("standard-pair")
    report = covertmdp.harness.exponent_sweep(
        mdp, pi_star, pi_star, DetectorSpec("hoeffding", eta=0.1), (6, 8, 10), exact=True
    )
    assert report.indistinguishable
    assert report.same_policy
    assert compare_sweep(report).verdict == "no-decay confirmed"


def test_exponent_sweep_covert():
    mdp, pi_star = load_example("tied-columns")
    pi_c = covertmdp.covert.optimal_covert_policy(mdp, pi_star)
    report = covertmdp.harness.exponent_sweep(
        mdp, pi_star, pi_c, DetectorSpec("hoeffding", eta=0.1), (4, 5, 6), exact=True
    )
    assert report.indistinguishable
    assert not report.same_policy
    assert report.theory.e_beta == 0
    assert compare_sweep(report).verdict == "perfectly covert: error rates flat"


def test_exponent_sweep_rows():
    mdp, pi_star = load_example("standard-pair")
    adv = covertmdp.util.load_policy(covertmdp.ex("standard-pair", kind="adversary"))
    report = covertmdp.harness.exponent_sweep(
        mdp, pi_star, adv, DetectorSpec("np", eta=0.1), (8, 10, 12), exact=True
    )
    assert [row.n for row in report.rows] == [8, 10, 12]
    for row in report.rows:
        assert row.method == "exact_enumeration"
        assert np.isclose(row.rate_alpha, np.log2(row.alpha) / row.n)


def test_cli_eval(tmp_path, capsys):
    out = tmp_path / "eval.csv"
    assert main(["--out", str(out), "eval"] + model_args()) == 0
    assert capsys.readouterr().out.strip() == str(out)
    assert out.exists()
    assert out.with_suffix(".json").exists()


def test_cli_threads_invariant(tmp_path):
    tables = []
    for threads in (1, 8):
        out = tmp_path / "detect_{}.csv".format(threads)
        argv = ["--seed", "3", "--threads", str(threads), "--out", str(out), "detect"]
        argv += model_args() + ["--detector", "np", "--n", "8,10", "--replications", "50"]
        assert main(argv) == 0
        tables.append(out.read_bytes())
    assert tables[0] == tables[1]


def test_cli_sidecar_summary(tmp_path):
    out = tmp_path / "detect.csv"
    argv = ["--out", str(out), "detect"] + model_args()
    argv += ["--n", "6,8", "--exact"]
    assert main(argv) == 0

    with open(str(out.with_suffix(".json"))) as fdesc:
        sidecar = json.load(fdesc)
    header, columns = read_table(out)
    assert sidecar["summary"] == column_means(header, columns)
    assert "method" not in sidecar["summary"]


def test_cli_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(covertmdp.harness.OUTPUT_DIR_ENV, str(tmp_path))
    assert main(["covert-lp"] + model_args("duplicate-rows", adversary=False)) == 0
    assert (tmp_path / "covert-lp.csv").exists()


def test_cli_adversary_frontier(tmp_path):
    out = tmp_path / "frontier.csv"
    argv = ["--out", str(out), "adversary"] + model_args(adversary=False)
    argv += ["--eta", "0.05", "--frontier", "0.01,0.04"]
    assert main(argv) == 0

    _, columns = read_table(out)
    regrets = [float(x) for x in columns["regret"]]
    assert len(regrets) == 2
    assert regrets[0] <= regrets[1]


def test_cli_run_config(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(
        json.dumps(dict(STANDARD, mode="exponent-sweep", exact=True, n_values=[6, 8, 10]))
    )
    out = tmp_path / "sweep.csv"
    assert main(["--out", str(out), "run", "--config", str(path)]) == 0

    with open(str(out.with_suffix(".json"))) as fdesc:
        sidecar = json.load(fdesc)
    assert sidecar["verdict"] in (
        "pass",
        "fail",
        "exponent unmeasurable at this n",
    )
    assert sidecar["config"]["exact"]


def test_cli_not_recurrent(tmp_path):
    mdp_path = tmp_path / "model.json"
    mdp_path.write_text(
        json.dumps(
            dict(
                num_states=2,
                num_actions=1,
                transition=[[[1.0, 0.0]], [[0.0, 1.0]]],
                reward=[[0.0], [1.0]],
                initial=[0.5, 0.5],
            )
        )
    )
    policy_path = tmp_path / "policy.json"
    policy_path.write_text(json.dumps(dict(probs=[[1.0], [1.0]])))

    argv = ["--out", str(tmp_path / "lp.csv"), "covert-lp"]
    argv += ["--mdp", str(mdp_path), "--pi-star", str(policy_path)]
    assert main(argv) == 2


def test_cli_guard(tmp_path):
    argv = ["--out", str(tmp_path / "detect.csv"), "detect"] + model_args()
    argv += ["--exact", "--n", "30"]
    assert main(argv) == 3


def test_cli_invalid_config(tmp_path):
    argv = ["--out", str(tmp_path / "detect.csv"), "detect"] + model_args()
    argv += ["--n", "10,8"]
    assert main(argv) == 2
