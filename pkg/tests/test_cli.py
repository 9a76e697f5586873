import pytest

from szego_lab.cli import USAGE_ERROR, build_parser, main
from szego_lab.constants import ScenarioNameEnum
from szego_lab.experiments import SCENARIOS, Scenario, ScenarioContext


def _toy(context: ScenarioContext) -> None:
    context.check("alpha", context.config.alpha, 0.0, "lt")
    context.check("N", context.config.N, 16, "le")


@pytest.fixture
def toy_bounded(monkeypatch):
    scenario = Scenario(name=ScenarioNameEnum.BOUNDED, runner=_toy, overrides={"alpha": -1.0})
    monkeypatch.setitem(SCENARIOS, ScenarioNameEnum.BOUNDED, scenario)
    return scenario


def test_parser():
    args = build_parser().parse_args(["run", "growth", "--N", "128", "--grid", "512", "--tmax", "20"])
    assert (args.scenario, args.N, args.M, args.t_max, args.alpha) == ("growth", 128, 512, 20.0, None)
    args = build_parser().parse_args(["check", "runs/growth", "--ignore", "INTEGRATOR.TAIL"])
    assert args.ignore == ["INTEGRATOR.TAIL"]


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in ScenarioNameEnum)


def test_unknown_scenario(capsys):
    assert main(["run", "nope"]) == USAGE_ERROR
    assert "Unknown scenario" in capsys.readouterr().err


def test_invalid_configuration(capsys):
    assert main(["run", "bounded", "--N", "7", "--grid", "16"]) == USAGE_ERROR
    assert "Invalid configuration" in capsys.readouterr().err


def test_check_without_run(tmp_path):
    assert main(["check", str(tmp_path)]) == USAGE_ERROR


def test_run_and_check(toy_bounded, tmp_path, capsys):
    out = tmp_path / "bounded"
    assert main(["run", "bounded", "--N", "16", "--grid", "64", "--out", str(out)]) == 0
    assert "PASS alpha -1 lt 0" in capsys.readouterr().out
    assert main(["check", str(out)]) == 0


def test_exit_code_counts_failures(toy_bounded, tmp_path, capsys):
    out = tmp_path / "bounded"
    assert main(["run", "bounded", "--alpha", "1", "--out", str(out)]) == 2
    assert "bounded: 2 passed, 2 failed" in capsys.readouterr().out


def test_invalid_data_file(toy_bounded, tmp_path, capsys):
    data = tmp_path / "data.json"
    data.write_text('{"numerator": [[1, 0]]}')
    assert main(["run", "bounded", "--data", str(data), "--out", str(tmp_path / "run")]) == USAGE_ERROR
    assert "Invalid data file" in capsys.readouterr().err
    assert not (tmp_path / "run").exists()


def test_config_file_wins_over_scenario_defaults(monkeypatch, tmp_path):
    seen = []
    scenario = Scenario(
        name=ScenarioNameEnum.BOUNDED,
        runner=lambda context: seen.append(context.config),
        overrides={"alpha": -1.0, "t_max": 100.0},
    )
    monkeypatch.setitem(SCENARIOS, ScenarioNameEnum.BOUNDED, scenario)
    config_file = tmp_path / "lab.json"
    config_file.write_text('{"default": {"t_max": 3.0, "N": 16, "M": 64}}')

    assert main(["--config", str(config_file), "run", "bounded", "--out", str(tmp_path / "a")]) == 0
    assert (seen[-1].t_max, seen[-1].alpha) == (3.0, -1.0)
    assert main(["--config", str(config_file), "run", "bounded", "--tmax", "2", "--out", str(tmp_path / "b")]) == 0
    assert seen[-1].t_max == 2.0
