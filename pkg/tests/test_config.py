import json

import pytest
from rich.console import Console

import config_manager
import main
from src.config_loader import BUILTIN_DEFAULTS, ConfigLoader, build_scenario_config
from src.data_models import ChannelKind, OutputFormat
from src.errors import ConfigError, InvalidArgumentError
from src.reporting import render_config, render_summary


@pytest.fixture
def loader(tmp_path):
    return ConfigLoader(str(tmp_path))


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_missing_defaults_fall_back_to_builtin(loader, caplog):
    data = loader.load_defaults()
    assert data == BUILTIN_DEFAULTS
    assert "不存在" in caplog.text


def test_malformed_defaults_fall_back_to_builtin(loader):
    loader.defaults_file.write_text("{not json", encoding="utf-8")
    assert loader.load_defaults() == BUILTIN_DEFAULTS


def test_shipped_defaults_are_valid():
    shipped = ConfigLoader("config")
    data = json.loads(shipped.defaults_file.read_text(encoding="utf-8"))
    assert shipped.validate_config(data) == []
    assert data["scenarios"]["scatter2"]["samples"] == 30000
    assert data["scenarios"]["validate3"]["samples"] == 20000


def test_validate_config_reports_every_problem(loader):
    errors = loader.validate_config({
        "defaults": {"seed": -1, "channel": "amplitude", "k": [1]},
        "scenarios": {"nope": {}, "scatter2": {"samples": 0, "colour": "red"}},
        "extra": 1,
    })
    assert any("extra" in e for e in errors)
    assert any("seed" in e for e in errors)
    assert any("channel" in e for e in errors)
    assert any("defaults.k" in e for e in errors)
    assert any("nope" in e for e in errors)
    assert any("samples" in e for e in errors)
    assert any("colour" in e for e in errors)


def test_load_user_config_json_and_toml(loader, tmp_path):
    path = write_json(tmp_path / "user.json", {"defaults": {"seed": 3}})
    assert loader.load_user_config(path) == {"defaults": {"seed": 3}}
    toml = tmp_path / "user.toml"
    toml.write_text('[defaults]\nseed = 4\n\n[scenarios.zphase]\nk = [5]\n', encoding="utf-8")
    pytest.importorskip("tomllib")
    data = loader.load_user_config(str(toml))
    assert data["scenarios"]["zphase"]["k"] == [5]


@pytest.mark.parametrize("name,content", [
    ("bad.json", "{oops"),
    ("bad.yaml", "seed: 1"),
    ("invalid.json", '{"defaults": {"samples": -5}}'),
])
def test_load_user_config_errors(loader, tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ConfigError):
        loader.load_user_config(str(path))


def test_missing_user_config(loader, tmp_path):
    with pytest.raises(ConfigError, match="不存在"):
        loader.load_user_config(str(tmp_path / "none.json"))


def test_precedence():
    defaults = {"defaults": {"seed": 1, "samples": 10}, "scenarios": {"scatter2": {"samples": 20}}}
    user = {"defaults": {"seed": 2}, "scenarios": {"scatter2": {"samples": 30, "format": "json"}}}
    config = build_scenario_config("scatter2", defaults, user, {"samples": 40, "seed": None})
    assert config.samples == 40
    assert config.seed == 2
    assert config.fmt is OutputFormat.JSON

    config = build_scenario_config("zphase", defaults, user)
    assert config.samples == 10
    assert config.seed == 2


def test_builtin_scenario_overrides():
    config = build_scenario_config("dephasing-check")
    assert config.channel is ChannelKind.DEPHASING
    assert config.k_values == (2, 3, 4, 5, 6)
    assert build_scenario_config("scatter2").samples == 30000


def test_bad_overrides():
    with pytest.raises(ConfigError):
        build_scenario_config("scatter2", cli_overrides={"format": "xml"})
    with pytest.raises(InvalidArgumentError):
        build_scenario_config("scatter2", cli_overrides={"channel": "amplitude"})


def test_save_and_sample_config(loader):
    path = loader.create_sample_config()
    assert path.exists()
    assert loader.validate_config(json.loads(path.read_text(encoding="utf-8"))) == []
    assert loader.save_user_config({"defaults": {"seed": 9}}, "other.json")


def test_render_functions():
    console = Console(record=True, width=120)
    render_config(BUILTIN_DEFAULTS, console)
    render_summary({
        "scenario": "pure2", "rows": 3, "ranges": {"eta": [1.0, 3.0]},
        "checks": {"max_deviation": 1e-12, "violations": 0}, "violations": 0,
    }, console)
    text = console.export_text()
    assert "scatter2" in text
    assert "pure2" in text
    assert "所有检查通过" in text


def test_cli_success(tmp_path, capsys):
    out = tmp_path / "pure.csv"
    code = main.run(["pure2", "--out", str(out), "--quiet"])
    assert code == 0
    assert out.exists()
    assert (tmp_path / "pure.csv.summary.json").exists()


def test_cli_list():
    console = Console(record=True, width=160)
    assert main.run(["--list"], console=console) == 0
    assert "concurrence-speed" in console.export_text()


def test_cli_unknown_scenario(capsys):
    assert main.run(["nope", "--quiet"]) == 2
    lines = [l for l in capsys.readouterr().err.splitlines() if l.startswith("sodelab:")]
    assert len(lines) == 1
    assert lines[0].startswith("sodelab: error=unknown-scenario message=")


def test_cli_invalid_argument(capsys):
    assert main.run(["scatter2", "--samples", "0", "--quiet"]) == 2
    assert "error=invalid-argument" in capsys.readouterr().err


def test_cli_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops", encoding="utf-8")
    assert main.run(["pure2", "--config", str(bad), "--quiet"]) == 2
    assert "error=config-error" in capsys.readouterr().err


def test_cli_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main.run(["pure2", "--out", str(blocker / "x.csv"), "--quiet"]) == 2
    assert "error=output-error" in capsys.readouterr().err


def test_cli_flags_override_config_file(tmp_path):
    user = write_json(tmp_path / "user.json", {"scenarios": {"weighted2": {"samples": 500}}})
    out = tmp_path / "s.json"
    code = main.run(["weighted2", "--config", user, "--samples", "4", "--format", "json",
                     "--out", str(out), "--quiet"])
    assert code == 0
    assert len(json.loads(out.read_text(encoding="utf-8"))) == 4


def test_cli_bad_flag_value_is_one_line(capsys):
    assert main.run(["scatter2", "--samples", "abc"]) == 2
    err = capsys.readouterr().err
    lines = err.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("sodelab: error=invalid-argument message=")
    assert "usage:" not in err


def test_cli_bad_choice_is_one_line(capsys):
    assert main.run(["pure2", "--channel", "amplitude"]) == 2
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("sodelab: error=invalid-argument message=")


def test_cli_dump_states(tmp_path):
    dump = tmp_path / "pure.jsonl"
    assert main.run(["pure2", "--dump-states", str(dump), "--quiet"]) == 0
    rows = [json.loads(line) for line in dump.read_text(encoding="utf-8").splitlines()]
    assert rows[0]["index"] == 0
    assert rows[0]["k"] == 2
    assert len(rows[0]["rho"]) == 4


def test_dump_states_must_be_string(loader):
    errors = loader.validate_config({"scenarios": {"pure2": {"dump_states": 3}}})
    assert any("dump_states" in e for e in errors)
    config = build_scenario_config("pure2", cli_overrides={"dump_states": "s.jsonl"})
    assert config.dump_states == "s.jsonl"


def test_cli_internal_error(monkeypatch, capsys):
    def boom(config):
        raise RuntimeError("kaput\nsecond line")
    monkeypatch.setattr(main, "run_scenario", boom)
    assert main.run(["pure2", "--quiet"]) == 1
    err = capsys.readouterr().err.strip()
    assert err == "sodelab: error=internal message=RuntimeError: kaput second line"


def test_config_manager_commands(tmp_path):
    good = write_json(tmp_path / "good.json", {"defaults": {"seed": 1}})
    bad = write_json(tmp_path / "bad.json", {"defaults": {"seed": "x"}})
    assert config_manager.main(["validate", good]) == 0
    assert config_manager.main(["validate", bad]) == 2
    assert config_manager.main(["--help"]) == 0
    assert config_manager.main(["frobnicate"]) == 2
