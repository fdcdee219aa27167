import json
import shutil
from pathlib import Path

import pytest

from satcoex.cli import main
from satcoex.experiment import (
    COLUMNS,
    CompareError,
    ConfigError,
    ExperimentConfig,
    compare_policies,
    read_results_csv,
    results_csv_text,
    run_experiment,
)

GOLDEN = Path(__file__).resolve().parent / "golden"
HEADER = f"# satcoex-results v1 columns={','.join(COLUMNS)}\n{','.join(COLUMNS)}\n"


def tiny_cfg(tmp_path, **kw):
    doc = json.loads((GOLDEN / "tiny_config.json").read_text())
    doc.update(kw)
    doc["out"] = str(tmp_path / "out")
    return ExperimentConfig.from_dict(doc)


def test_golden_csv(tmp_path):
    rc = main(["run", "--config", str(GOLDEN / "tiny_config.json"), "--out", str(tmp_path / "o")])
    assert rc == 0
    assert (tmp_path / "o" / "results.csv").read_bytes() == (GOLDEN / "tiny_results.csv").read_bytes()


def test_row_count_is_cartesian(tmp_path):
    cfg = tiny_cfg(tmp_path, policies=["cat3s", "baseline1", "baseline2"], pointing_angles=[20, 30, 40, 50])
    rep = run_experiment(cfg)
    assert len(rep.rows) == 24 and rep.n_errors == 0
    assert len(list((tmp_path / "out" / "decisions").glob("*.json"))) == 24
    data = json.loads((tmp_path / "out" / "results.json").read_text())
    assert len(data["rows"]) == 24 and data["columns"] == list(COLUMNS)
    for r in rep.rows:
        if r["policy"] == "cat3s":
            assert r["aggregate_in_db"] <= r["i_th_db"]


def test_worker_count_does_not_change_outputs(tmp_path):
    a = run_experiment(tiny_cfg(tmp_path / "a", workers=1))
    b = run_experiment(tiny_cfg(tmp_path / "b", workers=3))
    for name in ("results.csv", "results.json"):
        assert (a.out_dir / name).read_bytes() == (b.out_dir / name).read_bytes()
    for f in (a.out_dir / "decisions").iterdir():
        assert f.read_bytes() == (b.out_dir / "decisions" / f.name).read_bytes()


def test_brute_cap_only_hits_brute_rows(tmp_path):
    cfg = tiny_cfg(tmp_path, generator={"n_buildings": 50}, pointing_angles=[30], weather=["sunny"])
    rep = run_experiment(cfg)
    by = {r["policy"]: r for r in rep.rows}
    assert by["brute"]["error"].startswith("cap exceeded")
    assert all(not by[p]["error"] for p in ("cat3s", "baseline1", "baseline2"))
    assert not rep.all_failed


def test_bad_weather_isolated_to_its_point(tmp_path):
    cfg = tiny_cfg(tmp_path, weather=["sunny", "missing.json"], pointing_angles=[30], policies=["cat3s"])
    rep = run_experiment(cfg)
    assert [bool(r["error"]) for r in rep.rows] == [False, True]
    text = (tmp_path / "out" / "results.csv").read_text()
    assert "FileNotFoundError" in text


@pytest.mark.parametrize(
    "patch",
    [{"policies": []}, {"policies": ["greedy"]}, {"pointing_angles": []}, {"arrays": ["4by4"]}, {"seed": -1}, {"colour": 1}],
)
def test_config_validation(tmp_path, patch):
    with pytest.raises(ConfigError):
        tiny_cfg(tmp_path, **patch)


# -- compare ---------------------------------------------------------------------


def _csv(rows):
    return HEADER + "".join(",".join(r) + "\n" for r in rows)


def _row(policy, in_db, active="3", cap="10.0", i_th="-8.5"):
    return ["4x4", "30.0", "sunny", policy, i_th, in_db, active, cap, "5", "1.0", ""]


def test_compare_delta(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text(_csv([_row("cat3s", "-10"), _row("baseline1", "-2", active="1", cap="4.5")]))
    s = compare_policies(p)
    assert len(s.deltas) == 1
    d = s.deltas[0]
    assert (d.policy, d.d_in_db, d.d_active, d.d_capacity) == ("baseline1", 8.0, -2, -5.5)
    assert not s.violations


def test_compare_single_policy_and_violation(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text(_csv([_row("cat3s", "-7.0")]))
    s = compare_policies(p)
    assert s.deltas == [] and len(s.violations) == 1


def test_compare_reports_line_numbers(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text(_csv([_row("cat3s", "-10"), ["4x4", "30", "sunny"]]))
    with pytest.raises(CompareError) as e:
        compare_policies(p)
    assert e.value.line == 4
    p.write_text(_csv([_row("cat3s", "oops")]))
    with pytest.raises(CompareError) as e:
        read_results_csv(p)
    assert e.value.line == 3


def test_results_text_round_trips():
    rows = [dict(zip(COLUMNS, ["4x4", 30.0, "sunny", "cat3s", -8.5, -9.0, 3, 12.5, 7, 9.75, ""]))]
    parsed = read_results_csv(results_csv_text(rows))
    assert parsed[0]["aggregate_in_db"] == -9.0 and parsed[0]["policy"] == "cat3s"


# -- CLI -------------------------------------------------------------------------


def test_cli_generate_and_env_override(tmp_path, monkeypatch):
    out = tmp_path / "s.json"
    monkeypatch.setenv("SATCOEX_SEED", "9")
    assert main(["generate", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["scenario"]["seed"] == 9 and len(doc["base_stations"]) == 33
    assert main(["generate", "--out", str(out), "--seed", "3"]) == 0
    assert json.loads(out.read_text())["scenario"]["seed"] == 3


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"policies": []}')
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--bogus"]) == 2
    allfail = tmp_path / "allfail.json"
    cfg = json.loads((GOLDEN / "tiny_config.json").read_text())
    cfg.update(weather=["nowhere.json"], pointing_angles=[30])
    allfail.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(allfail), "--out", str(tmp_path / "o")]) == 1
    shutil.copy(GOLDEN / "tiny_results.csv", tmp_path / "r.csv")
    assert main(["compare", str(tmp_path / "r.csv")]) == 0
    assert "baseline1" in capsys.readouterr().out


def test_cli_rerun_byte_identical(tmp_path, monkeypatch):
    monkeypatch.setenv("SATCOEX_WORKERS", "2")
    cfg = str(GOLDEN / "tiny_config.json")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "17"]) == 0
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "17"]) == 0
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()
