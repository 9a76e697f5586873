import json
import logging

import pytest
from pydantic import ValidationError

from szego_lab.config import SimulationConfig, configure_logging, get_settings, load_config_file


class TestSimulationConfig:
    def test_defaults(self):
        config = SimulationConfig()
        assert (config.N, config.M, config.matrix_size) == (64, 256, 64)
        plan = config.grid_plan()
        assert (plan.N, plan.M, plan.tail_guard) == (64, 256, config.tail_guard)

    @pytest.mark.parametrize(
        "values",
        [
            {"N": 64, "M": 128},
            {"N": 16, "M": 96},
            {"rel_tol": 1e-3},
            {"abs_tol": 1e-16},
            {"N": 16, "M": 64, "m": 17},
            {"t_max": 0.0},
        ],
    )
    def test_invalid(self, values):
        with pytest.raises(ValidationError):
            SimulationConfig(**values)

    def test_overrides_skip_none(self):
        config = SimulationConfig().with_overrides(alpha=-1.0, N=None, t_max=5.0)
        assert (config.alpha, config.N, config.t_max) == (-1.0, 64, 5.0)

    def test_overrides_are_validated(self):
        with pytest.raises(ValidationError):
            SimulationConfig().with_overrides(N=128)


class TestSettings:
    def test_defaults(self):
        settings = get_settings()
        assert settings.GROWTH.N == 256
        assert settings.DEFAULT.t_max == 10.0

    def test_config_file(self, tmp_path):
        path = tmp_path / "lab.json"
        path.write_text(json.dumps({"default": {"alpha": -2.0, "N": 32, "M": 128}, "log_level": "DEBUG"}))
        settings = get_settings(path)
        assert (settings.DEFAULT.alpha, settings.DEFAULT.N) == (-2.0, 32)
        assert settings.LOG_LEVEL == "DEBUG"

    def test_partial_regime_block_keeps_regime_defaults(self, tmp_path):
        path = tmp_path / "lab.json"
        path.write_text(json.dumps({"growth": {"t_max": 50.0}}))
        config, configured = get_settings(path).regime("growth")
        assert (config.N, config.M, config.t_max) == (256, 1024, 50.0)
        assert configured == {"t_max": 50.0}
        assert get_settings(path).regime("default")[1] == {}
        with pytest.raises(KeyError):
            get_settings(path).regime("lifted")

    def test_regime_values_from_environment(self, monkeypatch):
        monkeypatch.setenv("SZEGO_DEFAULT__N", "32")
        monkeypatch.setenv("SZEGO_DEFAULT__T_MAX", "4")
        config, configured = get_settings().regime("default")
        assert (config.N, config.t_max) == (32, 4.0)
        assert configured == {"N": 32, "t_max": 4.0}

    def test_config_file_from_environment(self, tmp_path, monkeypatch):
        path = tmp_path / "lab.json"
        path.write_text(json.dumps({"output_root": str(tmp_path / "runs")}))
        monkeypatch.setenv("SZEGO_CONFIG_FILE", str(path))
        assert get_settings().OUTPUT_ROOT == tmp_path / "runs"

    def test_config_file_must_hold_an_object(self, tmp_path):
        path = tmp_path / "lab.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValueError):
            load_config_file(path)


def test_configure_logging():
    configure_logging("debug")
    assert logging.getLogger("szego_lab").level == logging.DEBUG
    configure_logging("INFO")
    assert logging.getLogger("szego_lab.integrator").getEffectiveLevel() == logging.INFO
