import os

import pytest
import yaml

from src.app.config import Config, RunConfig, load_run_config
from src.core.errors import ConfigError
from src.rum.spec import ModelKind


@pytest.fixture
def app_file(tmp_path):
    path = tmp_path / "app.yaml"
    path.write_text(yaml.safe_dump({
        "estimation": {"gradient_tolerance": 1e-5, "max_iterations": 500},
        "draws": {"count": 500, "kind": "halton"},
        "validation": {"folds": 5, "by": "situation"},
        "analysis": {"convention": "time_over_attribute"},
        "output": {"dir": "out"},
        "runtime": {"threads": 2},
    }))
    return path


def run_file(tmp_path, content):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(content))
    return str(path)


class TestConfig:
    def test_dotted_access(self, app_file):
        config = Config(str(app_file))
        assert config.get("draws.count") == 500
        assert config.get("draws.missing", "x") == "x"
        assert config.draws["kind"] == "halton"
        assert config["output"] == {"dir": "out"}
        assert "runtime" in config

    def test_default_file_is_the_shipped_one(self):
        assert Config().get("validation.folds") == 5

    def test_environment_overrides(self, app_file, monkeypatch):
        monkeypatch.setenv("CHOICEKIT_OUTPUT_DIR", "/tmp/elsewhere")
        monkeypatch.setenv("CHOICEKIT_THREADS", "7")
        config = Config(str(app_file))
        assert config.get("output.dir") == "/tmp/elsewhere"
        assert config.get("runtime.threads") == 7

    def test_bad_thread_count(self, app_file, monkeypatch):
        monkeypatch.setenv("CHOICEKIT_THREADS", "many")
        with pytest.raises(ConfigError):
            Config(str(app_file))


class TestLoadRunConfig:
    def test_app_defaults(self, app_file):
        cfg = load_run_config(None, {}, Config(str(app_file)))
        assert cfg.draws == 500
        assert cfg.threads == 2
        assert str(cfg.output_dir) == "out"

    def test_flags_beat_run_file_beat_defaults(self, app_file, tmp_path):
        path = run_file(tmp_path, {"draws": 100, "folds": 4, "seed": 3})
        cfg = load_run_config(path, {"draws": 50, "seed": None}, Config(str(app_file)))
        assert cfg.draws == 50
        assert cfg.folds == 4
        assert cfg.seed == 3

    def test_sections_are_merged(self, app_file, tmp_path):
        path = run_file(tmp_path, {"estimation": {"max_iterations": 40}})
        settings = load_run_config(path, {}, Config(str(app_file))).estimation_settings()
        assert settings.max_iterations == 40
        assert settings.gradient_tolerance == 1e-5
        assert settings.n_draws == 500

    def test_unknown_key(self, app_file, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(run_file(tmp_path, {"drawz": 10}), {}, Config(str(app_file)))

    def test_missing_run_file(self, app_file, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(str(tmp_path / "absent.yaml"), {}, Config(str(app_file)))

    def test_threads_default_to_cpu_count(self, tmp_path):
        path = tmp_path / "app.yaml"
        path.write_text(yaml.safe_dump({"runtime": {"threads": None}}))
        assert load_run_config(None, {}, Config(str(path))).threads == (os.cpu_count() or 1)


class TestRunConfig:
    def test_model_kinds(self):
        assert RunConfig(model_kind="both").kinds == [ModelKind.RUM, ModelKind.RRM]
        assert RunConfig(model_kind="rrm").kinds == [ModelKind.RRM]
        with pytest.raises(ValueError):
            RunConfig(model_kind="probit")

    def test_seed_required_for_stochastic_commands(self):
        with pytest.raises(ConfigError, match="seed"):
            RunConfig(command="simulate").require_seed()

    def test_hash_ignores_output_location(self):
        assert RunConfig(seed=1, output_dir="a").config_hash() == RunConfig(seed=1, output_dir="b").config_hash()
        assert RunConfig(seed=1).config_hash() != RunConfig(seed=2).config_hash()

    def test_default_model_follows_the_grid(self):
        cfg = RunConfig(random_cost=False)
        spec = cfg.model_spec()
        assert spec.parameter_names[0] == "b_shipping_cost"
        assert not spec.has_random

    def test_declared_schema_and_model(self):
        cfg = RunConfig(**{
            "schema": {"attributes": ["cost", "time"]},
            "model": {"terms": ["cost", "time"], "constants": 3, "reference_alternative": 2},
        })
        spec = cfg.model_spec()
        assert spec.parameter_names == ["b_cost", "b_time", "asc_1", "asc_2"]

    def test_unknown_attribute_in_model(self):
        cfg = RunConfig(model={"terms": ["shipping_cost", "weight"]})
        with pytest.raises(ConfigError, match="weight"):
            cfg.model_spec()

    def test_truth_overrides(self):
        cfg = RunConfig(random_cost=False, truth={"b_shipping_cost": -0.4})
        truth = cfg.truth_vector(cfg.model_spec())
        assert truth["b_shipping_cost"] == -0.4
        assert truth["b_tracking"] == 0.4

    def test_truth_with_unknown_name(self):
        cfg = RunConfig(random_cost=False, truth={"b_weight": 1.0})
        with pytest.raises(ConfigError):
            cfg.truth_vector(cfg.model_spec())

    def test_header_comment(self):
        cfg = RunConfig(seed=5)
        assert cfg.header_comment().startswith("choicekit ")
        assert cfg.header_comment().endswith(f"config={cfg.config_hash()} seed=5")

    @pytest.mark.parametrize("value, expected", [
        (None, None),
        ("all", []),
        ("ALL", []),
        ("PD1", ["PD1"]),
        (" PD1, PD3 ,", ["PD1", "PD3"]),
    ])
    def test_segment_filter(self, value, expected):
        assert RunConfig(segment=value).segment_filter() == expected

    def test_empty_segment_list(self):
        with pytest.raises(ConfigError, match="segment"):
            RunConfig(segment=" , ").segment_filter()

    def test_segment_flag_overrides_run_file(self, app_file, tmp_path):
        cfg = load_run_config(run_file(tmp_path, {"segment": "all"}), {"segment": "PD2"}, Config(str(app_file)))
        assert cfg.segment_filter() == ["PD2"]
