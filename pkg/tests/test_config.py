import json
from pathlib import Path

import pytest

from dstlab.config import Settings
from dstlab.dst.config import AdversaryLoss, Alternation
from dstlab.exceptions import ConfigError
from dstlab.models.heads import HeadKind
from dstlab.schemas.run_config import RunConfig, load_run_config, parse_run_config
from dstlab.selftrain.kinds import AlgorithmKind

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_defaults_validate():
    config = parse_run_config({})
    assert config.algorithm.kind is AlgorithmKind.FIXMATCH
    assert config.dst.alternation is Alternation.TWO_STEP
    assert config.metrics.reference_steps == config.eval_every


def test_tau_outside_unit_interval_is_named(base_config):
    base_config["algorithm"]["tau"] = 1.5
    with pytest.raises(ConfigError) as excinfo:
        parse_run_config(base_config)
    assert any(message.startswith("algorithm.tau") for message in excinfo.value.errors)
    assert "algorithm.tau" in str(excinfo.value)


def test_unknown_keys_rejected(base_config):
    base_config["algorithm"]["temperature"] = 0.5
    with pytest.raises(ConfigError):
        parse_run_config(base_config)


def test_debiased_supervised_rejected(base_config):
    base_config["algorithm"] = {"kind": "supervised", "debiased": True}
    with pytest.raises(ConfigError) as excinfo:
        parse_run_config(base_config)
    assert "debiased" in str(excinfo.value)


def test_odd_moons_rejected(base_config):
    base_config["dataset"]["n"] = 201
    with pytest.raises(ConfigError):
        parse_run_config(base_config)


def test_blob_profile_length_checked(base_config):
    base_config["dataset"] = {"kind": "blobs", "num_classes": 3, "class_distance_profile": [1.0, 2.0]}
    with pytest.raises(ConfigError):
        parse_run_config(base_config)


def test_lambda_alias_round_trips(base_config):
    base_config["algorithm"]["lambda"] = 0.25
    config = parse_run_config(base_config)
    assert config.algorithm.lam == 0.25
    resolved = config.resolved()
    assert resolved["algorithm"]["lambda"] == 0.25
    assert parse_run_config(json.loads(json.dumps(resolved))) == config


def test_dst_config_carries_weight_and_threshold(base_config):
    base_config["algorithm"].update({"lambda": 0.5, "tau": 0.9})
    base_config["dst"]["alternation"] = "gradient_reversal"
    dst = parse_run_config(base_config).dst_config()
    assert (dst.lam, dst.tau) == (0.5, 0.9)
    assert dst.alternation is Alternation.GRADIENT_REVERSAL


def test_overrides_are_revalidated(base_config):
    config = parse_run_config(base_config)
    updated = config.with_overrides(seed=7, **{"split.k_per_class": 2})
    assert (updated.seed, updated.split.k_per_class) == (7, 2)
    assert config.seed == 0
    with pytest.raises(ConfigError):
        config.with_overrides(**{"split.k_per_class": 0})


def test_explicit_reference_steps_kept(base_config):
    base_config["metrics"]["reference_steps"] = 3
    assert parse_run_config(base_config).metrics.reference_steps == 3


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(tmp_path / "absent.json")


def test_load_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\"seed\": ")
    with pytest.raises(ConfigError) as excinfo:
        load_run_config(path)
    assert excinfo.value.errors


def test_load_non_object(write_config):
    with pytest.raises(ConfigError):
        load_run_config(write_config([1, 2]))


def test_load_valid_file(write_config, base_config):
    assert isinstance(load_run_config(write_config(base_config)), RunConfig)


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("DSTLAB_DEFAULT_JOBS", "4")
    monkeypatch.setenv("DSTLAB_CHARTS_ENABLED", "false")
    settings = Settings()
    assert settings.default_jobs == 4
    assert settings.charts_enabled is False


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda path: path.stem)
def test_shipped_configs_validate(path):
    config = load_run_config(path)
    assert config.name == path.stem


def test_two_moons_configs_differ_only_in_debiasing():
    plain = load_run_config(CONFIGS / "two_moons_fixmatch.json")
    debiased = load_run_config(CONFIGS / "two_moons_dst_fixmatch.json")
    assert debiased.augmentation == plain.augmentation
    assert debiased.dst.adversary_loss is AdversaryLoss.BOUNDED
    assert debiased.model.pseudo_head is HeadKind.LINEAR
