import json
import math

import numpy as np
import pytest

from weakvalues import cli
from weakvalues.io import dumps, format_value, read_csv, to_jsonable, write_csv


def write_config(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def run(tmp_path, data, *extra):
    cfg = write_config(tmp_path, data)
    return cli.main(["run", cfg, "--out", str(tmp_path / "out" / "r"), *extra])


def summary(tmp_path):
    return json.loads((tmp_path / "out" / "r.summary.json").read_text())


# -- io -----------------------------------------------------------------------

def test_format_value_round_trips():
    for v in (0.1, 1 / 3, np.pi * 1e-300, -2.5e17):
        assert float(format_value(v)) == v
    assert format_value(np.int64(7)) == "7"
    assert format_value(True) == "true"


def test_csv_round_trip(tmp_path):
    path = write_csv(tmp_path / "a" / "t.csv", ["x", "y"], [(1, 0.1), (2, 1 / 3)])
    header, rows = read_csv(path)
    assert header == ["x", "y"]
    assert float(rows[1][1]) == 1 / 3
    assert path.read_bytes().endswith(b"\n") and b"\r" not in path.read_bytes()


def test_json_conversion():
    out = to_jsonable({"c": 1 + 2j, "a": np.array([1.0, np.nan]), "b": np.float32(0.5)})
    assert out == {"c": {"re": 1.0, "im": 2.0}, "a": [1.0, None], "b": 0.5}
    text = dumps({"b": 1, "a": math.inf})
    assert text.index('"a"') < text.index('"b"') and "null" in text


# -- config parsing -------------------------------------------------------------

def test_single_scenario_shorthand():
    cfg = cli.parse_config({"schema_version": 1, "kind": "fig1", "params": {"n_samples": 10}})
    assert len(cfg.scenarios) == 1 and cfg.scenarios[0].params.n_samples == 10


@pytest.mark.parametrize("data", [
    {"kind": "fig1"},
    {"schema_version": 2, "kind": "fig1"},
    {"schema_version": 1, "kind": "fig1", "extra": 1},
    {"schema_version": 1, "kind": "fig1", "params": {"omega": 1.0, "bogus": 2}},
    {"schema_version": 1, "kind": "fig1", "params": {"omega": -1.0}},
    {"schema_version": 1, "kind": "fig1", "params": {"omega": "1.0"}},
    {"schema_version": 1, "kind": "fig1", "params": {"omega": 1.0, "horizon": np.pi}},
    {"schema_version": 1, "kind": "nope"},
    {"schema_version": 1, "scenarios": []},
    {"schema_version": 1, "kind": "hjac", "params": {"n": 100}},
    {"schema_version": 1, "kind": "cqed", "params": {"alpha": 8.0, "fock_cutoff": 60}},
    {"schema_version": 1, "kind": "cqed", "params": {"kappa": 0.0, "epsilon": 1.0}},
    {"schema_version": 1, "kind": "pointer", "params": {"g_min": 0.1, "g_max": 0.01}},
    {"schema_version": 1, "kind": "fig1", "scenarios": [{"kind": "fig1"}]},
])
def test_strict_parsing_rejects(data):
    with pytest.raises(cli.ConfigError):
        cli.parse_config(data)


def test_config_error_exit_code(tmp_path, capsys):
    assert run(tmp_path, {"schema_version": 1, "kind": "fig1", "params": {"x": 1}}) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and err["exit_code"] == 2


def test_unreadable_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", str(bad)]) == 2
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2


# -- scenarios ------------------------------------------------------------------

def test_fig1_endpoints(tmp_path):
    assert run(tmp_path, {"schema_version": 1, "kind": "fig1", "params": {"n_samples": 101}}) == 0
    header, rows = read_csv(tmp_path / "out" / "r.fig1.csv")
    assert header == ["t", "Z_w", "Z_expect", "anomaly_flag"]
    assert len(rows) == 101
    assert float(rows[0][1]) == pytest.approx(1.0, abs=1e-12)
    assert float(rows[-1][1]) == pytest.approx(-1.0, abs=1e-12)
    assert any(r[3] == "1" for r in rows)
    s = summary(tmp_path)
    assert s["passed"] and s["scenarios"][0]["inputs"]["n_samples"] == 101


def test_aav_last_row(tmp_path):
    data = {"schema_version": 1, "kind": "aav", "params": {"g_values": [1e-1, 1e-3, 1e-5]}}
    assert run(tmp_path, data) == 0
    _, rows = read_csv(tmp_path / "out" / "r.aav.csv")
    assert abs(float(rows[-1][1]) - 100) / 100 < 0.05


def test_numeric_error_exit_code(tmp_path, capsys):
    assert run(tmp_path, {"schema_version": 1, "kind": "aav", "params": {"target": 1e9}}) == 3
    assert "PostselectionImpossible" in capsys.readouterr().err
    s = summary(tmp_path)
    assert not s["passed"] and s["scenarios"][0]["error"]["type"] == "PostselectionImpossible"


def test_numeric_error_outranks_invariant_failure(tmp_path):
    data = {"schema_version": 1, "scenarios": [
        {"kind": "pointer", "params": {"n_g": 3}},
        {"kind": "aav", "params": {"target": 1e9}},
    ]}
    assert run(tmp_path, data) == 3


def test_pointer_invariant_failure_exit_code(tmp_path):
    # the first-order truncation residual scales as g^2, so the slope-3 check fails
    assert run(tmp_path, {"schema_version": 1, "kind": "pointer", "params": {"n_g": 3}}) == 4
    inv = summary(tmp_path)["scenarios"][0]["invariants"]
    assert inv["first_order_slope_3"] is False


def test_verify_all_subset(tmp_path):
    data = {"schema_version": 1, "kind": "verify-all", "params": {"criteria": [1, 7], "include_determinism": False}}
    assert run(tmp_path, data) == 0
    crit = summary(tmp_path)["scenarios"][0]["derived"]["criteria"]
    assert [c["id"] for c in crit] == [1, 7] and all(c["passed"] for c in crit)


def test_verify_all_fails_when_a_criterion_fails(tmp_path):
    data = {"schema_version": 1, "kind": "verify-all", "params": {"criteria": [3], "include_determinism": False}}
    assert run(tmp_path, data) == 4


@pytest.mark.parametrize("kind", ["genmeas", "quasiprob", "wigner", "cqed", "hjac"])
def test_other_kinds_run(tmp_path, kind):
    params = {c["kind"]: c["params"] for c in cli.DETERMINISM_CONFIGS}[kind]
    assert run(tmp_path, {"schema_version": 1, "kind": kind, "params": params}) == 0
    entry = summary(tmp_path)["scenarios"][0]
    assert entry["passed"] and entry["files"]
    for name in entry["files"]:
        header, rows = read_csv(tmp_path / "out" / name)
        assert header and rows


# -- seeds, outputs, determinism -----------------------------------------------------

GENMEAS = {"schema_version": 1, "seed": 5, "kind": "genmeas", "params": {"model": "qubit", "n_events": 2000}}


def events_bytes(tmp_path, sub, *extra):
    cfg = write_config(tmp_path, GENMEAS)
    cli.main(["run", cfg, "--out", str(tmp_path / sub / "r"), *extra])
    return (tmp_path / sub / "r.genmeas.events.csv").read_bytes()


def test_byte_identical_reruns(tmp_path):
    assert events_bytes(tmp_path, "a") == events_bytes(tmp_path, "b")


def test_seed_override(tmp_path):
    base = events_bytes(tmp_path, "a")
    assert events_bytes(tmp_path, "b", "--seed", "5") == base
    assert events_bytes(tmp_path, "c", "--seed", "6") != base
    s = json.loads((tmp_path / "c" / "r.summary.json").read_text())
    assert s["seed"] == 6


def test_parallel_matches_sequential(tmp_path):
    data = {"schema_version": 1, "seed": 3, "scenarios": [
        {"kind": "genmeas", "params": {"model": "qubit", "n_events": 1000}},
        {"kind": "fig1", "params": {"n_samples": 50}},
        {"kind": "genmeas", "name": "second", "params": {"model": "two_outcome", "n_events": 1000}},
    ]}
    cfg = write_config(tmp_path, data)
    cli.main(["run", cfg, "--out", str(tmp_path / "seq" / "r")])
    cli.main(["run", cfg, "--out", str(tmp_path / "par" / "r"), "--parallel"])
    seq = sorted(p.name for p in (tmp_path / "seq").iterdir())
    assert seq == sorted(p.name for p in (tmp_path / "par").iterdir())
    assert "r.second.events.csv" in seq
    for n in seq:
        assert (tmp_path / "seq" / n).read_bytes() == (tmp_path / "par" / n).read_bytes()


def test_scenario_seeds_independent_of_order():
    assert cli.derived_seed(7, 0) != cli.derived_seed(7, 1)
    assert cli.derived_seed(7, 1) == cli.derived_seed(7, 1)
    assert 0 <= cli.derived_seed(7, 3) < 2**63


def test_env_var_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envout"))
    cfg = write_config(tmp_path, {"schema_version": 1, "kind": "fig1", "params": {"n_samples": 5}}, "myrun.json")
    assert cli.main(["run", cfg]) == 0
    assert (tmp_path / "envout" / "myrun.fig1.csv").exists()
    assert (tmp_path / "envout" / "myrun.summary.json").exists()


def test_config_output_field(tmp_path):
    cfg = write_config(tmp_path, {"schema_version": 1, "output": str(tmp_path / "o" / "p"), "kind": "fig1",
                                  "params": {"n_samples": 5}})
    assert cli.main(["run", cfg]) == 0
    assert (tmp_path / "o" / "p.fig1.csv").exists()


def test_determinism_check_all_kinds():
    mismatched, kinds = cli.determinism_check()
    assert mismatched == []
    assert set(kinds) == set(cli.PARAMS) - {"verify-all"}
