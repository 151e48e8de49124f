import json
import math
from xml.etree import ElementTree

import numpy as np
import pandas as pd
import pytest

from dstlab.exceptions import ComparisonError, NonFiniteLossError
from dstlab.main import EXIT_CONFIG, EXIT_NON_FINITE, EXIT_OK, main
from dstlab.schemas.run_config import parse_run_config
from dstlab.services import runner
from dstlab.services.comparison import COMPARISON_FILE, compare
from dstlab.services.runner import METRICS_COLUMNS, execute_run
from dstlab.services.storage import (AGGREGATE_FILE, BIAS_REPORT_FILE, CONFIG_FILE, METRICS_FILE,
                                     SUMMARY_FILE)
from dstlab.workers.pool import sweep


def _read_summary(run_dir):
    return json.loads((run_dir / SUMMARY_FILE).read_text())


def test_run_writes_artifacts(tmp_path, base_config):
    report = execute_run(parse_run_config(base_config), tmp_path / "run")
    run_dir = tmp_path / "run"
    for name in (CONFIG_FILE, METRICS_FILE, BIAS_REPORT_FILE, SUMMARY_FILE):
        assert (run_dir / name).exists()
    frame = pd.read_csv(run_dir / METRICS_FILE, na_values=["n/a"])
    assert list(frame.columns) == METRICS_COLUMNS
    assert frame["step"].tolist() == [10, 20]
    summary = _read_summary(run_dir)
    assert summary["status"] == "completed"
    assert math.isfinite(summary["final_accuracy"])
    assert summary["final_accuracy"] == pytest.approx(report.final_accuracy)
    assert summary["steps_completed"] == 20


def test_resolved_config_reloads(tmp_path, base_config):
    config = parse_run_config(base_config)
    execute_run(config, tmp_path / "run")
    resolved = json.loads((tmp_path / "run" / CONFIG_FILE).read_text())
    assert parse_run_config(resolved) == config


def test_bias_report_decomposes_final_error(tmp_path, base_config):
    execute_run(parse_run_config(base_config), tmp_path / "run")
    bias = json.loads((tmp_path / "run" / BIAS_REPORT_FILE).read_text())
    np.testing.assert_allclose(np.add(bias["data_bias"], bias["training_bias"]), bias["total"])
    np.testing.assert_allclose(bias["total"], bias["final"]["per_class_error"])
    assert bias["reference_steps"] == 10


def test_supervised_blobs_run(tmp_path, base_config):
    base_config["dataset"] = {"kind": "blobs", "num_classes": 3, "n_per_class": 40, "seed": 0}
    base_config["algorithm"] = {"kind": "supervised"}
    report = execute_run(parse_run_config(base_config), tmp_path / "run")
    assert report.algorithm == "supervised"
    assert report.pl_quantity is None
    frame = pd.read_csv(tmp_path / "run" / METRICS_FILE, na_values=["n/a"])
    assert frame["pl_quality"].isna().all()
    assert frame["loss_pseudo"].isna().all()


def test_round_summaries_follow_round_spans(tmp_path, base_config):
    base_config["algorithm"] = {"kind": "noisy_student", "rounds": 2}
    report = execute_run(parse_run_config(base_config), tmp_path / "noisy")
    assert [(r.round, r.start_step, r.end_step) for r in report.rounds] == [(0, 0, 10), (1, 10, 20)]
    base_config["algorithm"] = {"kind": "fixmatch"}
    assert execute_run(parse_run_config(base_config), tmp_path / "fixmatch").rounds == []


def test_debiased_run_logs_adversary(tmp_path, base_config):
    base_config["algorithm"]["debiased"] = True
    report = execute_run(parse_run_config(base_config), tmp_path / "run")
    assert report.algorithm == "dst_fixmatch"
    frame = pd.read_csv(tmp_path / "run" / METRICS_FILE, na_values=["n/a"])
    assert list(frame.columns) == METRICS_COLUMNS


def test_same_config_same_metrics(tmp_path, base_config):
    config = parse_run_config(base_config)
    execute_run(config, tmp_path / "a")
    execute_run(config, tmp_path / "b")
    assert (tmp_path / "a" / METRICS_FILE).read_bytes() == (tmp_path / "b" / METRICS_FILE).read_bytes()


def test_non_finite_loss_aborts_with_partial_artifacts(tmp_path, base_config, monkeypatch):
    original = runner.check_finite

    def diverge(metrics):
        if metrics.step >= 12:
            raise NonFiniteLossError(metrics.step, "loss_sup", float("nan"))
        original(metrics)

    monkeypatch.setattr(runner, "check_finite", diverge)
    with pytest.raises(NonFiniteLossError):
        execute_run(parse_run_config(base_config), tmp_path / "run")
    summary = _read_summary(tmp_path / "run")
    assert summary["status"] == "aborted"
    assert summary["failed_step"] == 12
    assert summary["steps_completed"] == 12
    assert len(pd.read_csv(tmp_path / "run" / METRICS_FILE)) == 1


def test_charts_written_when_enabled(tmp_path, base_config):
    base_config["metrics"]["charts"] = True
    report = execute_run(parse_run_config(base_config), tmp_path / "run")
    charts = list((tmp_path / "run" / "charts").glob("*.svg"))
    assert charts
    assert len(report.paths["charts"]) == len(charts)


def test_compare_tabulates_final_rows(tmp_path, base_config):
    execute_run(parse_run_config(base_config), tmp_path / "fixmatch")
    base_config["algorithm"]["debiased"] = True
    execute_run(parse_run_config(base_config), tmp_path / "dst")
    path = compare([tmp_path / "fixmatch", tmp_path / "dst"], tmp_path / "cmp", charts=False)
    assert path.name == COMPARISON_FILE
    table = pd.read_csv(path, na_values=["n/a"])
    assert table["run"].tolist() == ["fixmatch:fixmatch", "dst_fixmatch:dst"]
    assert (table["step"] == 20).all()


def test_compare_rejects_mismatched_headers(tmp_path, base_config):
    execute_run(parse_run_config(base_config), tmp_path / "good")
    odd = tmp_path / "odd"
    odd.mkdir()
    pd.DataFrame({"step": [10], "acc": [0.5], "epoch": [1]}).to_csv(odd / METRICS_FILE, index=False)
    with pytest.raises(ComparisonError) as excinfo:
        compare([tmp_path / "good", odd], tmp_path / "cmp", charts=False)
    assert "worst10" in excinfo.value.missing
    assert excinfo.value.extra == ["epoch"]


def test_compare_accepts_reordered_headers(tmp_path, base_config):
    execute_run(parse_run_config(base_config), tmp_path / "a")
    execute_run(parse_run_config(base_config), tmp_path / "b")
    metrics = tmp_path / "b" / METRICS_FILE
    frame = pd.read_csv(metrics, na_values=["n/a"])
    frame[list(reversed(frame.columns))].to_csv(metrics, index=False)
    path = compare([tmp_path / "a", tmp_path / "b"], tmp_path / "cmp", charts=False)
    table = pd.read_csv(path, na_values=["n/a"])
    assert list(table.columns) == ["run"] + METRICS_COLUMNS
    assert table["acc"].iloc[0] == pytest.approx(table["acc"].iloc[1])


@pytest.mark.parametrize("count", [0, 1])
def test_compare_needs_two_runs(tmp_path, base_config, count):
    execute_run(parse_run_config(base_config), tmp_path / "only")
    with pytest.raises(ComparisonError):
        compare([tmp_path / "only"] * count, tmp_path / "cmp")
    assert not (tmp_path / "cmp").exists()


def test_compare_overlay_charts_are_well_formed_svg(tmp_path, base_config):
    execute_run(parse_run_config(base_config), tmp_path / "fixmatch")
    base_config["algorithm"]["debiased"] = True
    execute_run(parse_run_config(base_config), tmp_path / "dst")
    compare([tmp_path / "fixmatch", tmp_path / "dst"], tmp_path / "cmp", charts=True)
    charts = sorted((tmp_path / "cmp").glob("*.svg"))
    assert charts
    for chart in charts:
        root = ElementTree.parse(chart).getroot()
        assert root.tag == "{http://www.w3.org/2000/svg}svg"


def test_sweep_aggregates_seed_runs(tmp_path, base_config, write_config):
    path = write_config(base_config)
    payload = sweep(path, [0, 1], jobs=1, out_dir=tmp_path / "sweep")
    assert payload["completed"] == 2 and not payload["partial"]
    finals = [_read_summary(tmp_path / "sweep" / f"seed_{s}")["final_accuracy"] for s in (0, 1)]
    assert payload["metrics"]["final_accuracy"]["mean"] == pytest.approx(np.mean(finals))
    assert payload["metrics"]["final_accuracy"]["std"] == pytest.approx(np.std(finals))
    written = json.loads((tmp_path / "sweep" / AGGREGATE_FILE).read_text())
    assert written["seeds"] == [0, 1]


def test_sweep_groups_labeled_amounts(tmp_path, base_config, write_config):
    payload = sweep(write_config(base_config), [0], out_dir=tmp_path / "sweep", labels_per_class=[2, 4])
    assert set(payload["by_labels_per_class"]) == {"k2", "k4"}
    assert (tmp_path / "sweep" / "k2" / "seed_0" / SUMMARY_FILE).exists()
    resolved = json.loads((tmp_path / "sweep" / "k2" / "seed_0" / CONFIG_FILE).read_text())
    assert resolved["split"]["k_per_class"] == 2


def test_sweep_records_failed_jobs(tmp_path, base_config, write_config):
    base_config["split"]["k_per_class"] = 90
    payload = sweep(write_config(base_config), [0], out_dir=tmp_path / "sweep")
    assert payload["partial"]
    assert payload["completed"] == 0
    assert "SplitError" in payload["failures"][0]["error"]


@pytest.mark.slow
def test_parallel_sweep_matches_inline(tmp_path, base_config, write_config):
    path = write_config(base_config)
    sweep(path, [0, 1], jobs=1, out_dir=tmp_path / "inline")
    sweep(path, [0, 1], jobs=2, out_dir=tmp_path / "parallel")
    for seed in (0, 1):
        inline = (tmp_path / "inline" / f"seed_{seed}" / METRICS_FILE).read_bytes()
        parallel = (tmp_path / "parallel" / f"seed_{seed}" / METRICS_FILE).read_bytes()
        assert inline == parallel


def test_cli_run_exit_codes(tmp_path, base_config, write_config):
    good = write_config(base_config, "good.json")
    assert main(["run", "--config", str(good), "--out", str(tmp_path / "run")]) == EXIT_OK
    base_config["algorithm"]["tau"] = 1.5
    bad = write_config(base_config, "bad.json")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "bad")]) == EXIT_CONFIG
    assert not (tmp_path / "bad").exists()


def test_cli_reports_divergence(tmp_path, base_config, write_config, monkeypatch):
    def diverge(metrics):
        raise NonFiniteLossError(metrics.step, "loss_sup", float("inf"))

    monkeypatch.setattr(runner, "check_finite", diverge)
    code = main(["run", "--config", str(write_config(base_config)), "--out", str(tmp_path / "run")])
    assert code == EXIT_NON_FINITE


def test_cli_rejects_bad_seed_list():
    with pytest.raises(SystemExit):
        main(["sweep", "--config", "x.json", "--seeds", "0,a"])
