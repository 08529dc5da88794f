import json

import pytest

from twophase.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main
from twophase.config import SCHEMA_VERSION, load_config, validate
from twophase.errors import ConfigError
from twophase.experiments import run
from twophase.presets import PRESETS, get_preset, list_presets

REQUIRED = {"kernel-checks", "concentric-benchmark", "concentric-vs-offset", "annulus-rejection",
            "overdetermined-neumann", "inner-level", "invert-roundtrip", "poisson-vs-modified",
            "comparison-battery"}


def test_required_presets_listed():
    names = {n for n, _ in list_presets()}
    assert REQUIRED <= names
    assert all(desc for _, desc in list_presets())


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_validates(name):
    validate(get_preset(name))


def test_get_preset_returns_copy():
    a = get_preset("invert-roundtrip")
    a["params"]["rhos"].append(0.95)
    assert 0.95 not in get_preset("invert-roundtrip")["params"]["rhos"]


def test_unknown_preset():
    with pytest.raises(ConfigError):
        get_preset("no-such-thing")


@pytest.mark.parametrize("mutate,fragment", [
    (lambda c: c.update(schema="twophase/0"), "schema"),
    (lambda c: c.update(kind="plot"), "kind"),
    (lambda c: c["params"].update(R=-1.0), "params/R"),
    (lambda c: c["params"].update(bogus=1), "bogus"),
    (lambda c: c["params"].update(rhos=[0.5, 1.5]), "rhos"),
    (lambda c: c["params"].update(g=0.0), "g"),
    (lambda c: c.update(seed=-3), "seed"),
])
def test_invalid_configs_name_the_problem(mutate, fragment):
    cfg = get_preset("invert-roundtrip")
    mutate(cfg)
    with pytest.raises(ConfigError, match=fragment):
        validate(cfg)


def test_semantic_checks():
    cfg = get_preset("concentric-benchmark")
    cfg["params"]["T"] = 5.0
    with pytest.raises(ConfigError, match="T >= 12"):
        validate(cfg)
    cfg = get_preset("overdetermined-neumann")
    cfg["params"]["offsets"] = [0.0, 0.7]
    with pytest.raises(ConfigError, match="leaves omega"):
        validate(cfg)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)


def _strip_times(report_dict):
    report_dict = dict(report_dict)
    report_dict.pop("wall_clock_s")
    report_dict.pop("started_at")
    return report_dict


def test_report_deterministic(tmp_path):
    cfg = get_preset("comparison-battery")
    cfg["params"]["per_case"] = 5
    a = run(cfg, out_dir=tmp_path / "a", seed=7)
    b = run(cfg, out_dir=tmp_path / "b", seed=7)
    ja = _strip_times(json.loads((tmp_path / "a" / "report.json").read_text()))
    jb = _strip_times(json.loads((tmp_path / "b" / "report.json").read_text()))
    assert ja == jb and a.seed == b.seed == 7
    assert (tmp_path / "a" / "crossings.ndjson").read_bytes() == (tmp_path / "b" / "crossings.ndjson").read_bytes()


def test_cli_lists_presets_without_arguments(capsys):
    assert main([]) == EXIT_OK
    out = capsys.readouterr().out
    assert all(name in out for name in REQUIRED)
    assert main(["presets"]) == EXIT_OK


def test_cli_runs_preset_and_writes_report(tmp_path, capsys):
    assert main(["run", "--preset", "poisson-vs-modified", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] and report["config"]["kind"] == "invert"
    assert {c["name"] for c in report["checks"]} >= {"poisson_value_spread", "modified_spread"}
    assert (tmp_path / "contrast.csv").exists()
    assert "PASS" in capsys.readouterr().out


def test_cli_kind_subcommand_with_config(tmp_path):
    cfg = get_preset("parallel-curves")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["detect", "--config", str(path), "--quiet"]) == EXIT_OK
    assert main(["invert", "--config", str(path)]) == EXIT_CONFIG


def test_cli_check_failure_exit_code(tmp_path):
    cfg = get_preset("parallel-curves")
    cfg["thresholds"]["circle_weingarten"] = 1e-20
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path)]) == EXIT_FAIL


def test_cli_config_errors(tmp_path):
    assert main(["run", "--preset", "nope"]) == EXIT_CONFIG
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"schema": SCHEMA_VERSION, "kind": "invert", "params": {"R": "one"}}))
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG
    assert main(["run"]) == 2  # neither --config nor --preset
    assert main(["run", "--preset", "kernel-checks", "--seed", "-1"]) == 2


def test_cli_seed_accepts_u64(tmp_path):
    cfg = get_preset("comparison-battery")
    cfg["params"]["per_case"] = 2
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["compare-lemma", "--config", str(path), "--seed", str(2 ** 64 - 1), "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "report.json").read_text())["seed"] == 2 ** 64 - 1


def test_missing_threshold_is_config_error(tmp_path):
    cfg = get_preset("parallel-curves")
    del cfg["thresholds"]
    with pytest.raises(ConfigError, match="thresholds"):
        run(cfg)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG
