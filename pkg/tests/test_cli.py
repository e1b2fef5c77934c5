"""End-to-end command tests: artifacts, schemas, determinism, exit codes."""

import hashlib
import json
import os

import jsonschema

from qfoundations import schemas
from qfoundations.cli import main


def _validate(path, schema_name):
    with open(path) as fh:
        payload = json.load(fh)
    jsonschema.Draft202012Validator(schemas.SCHEMAS[schema_name]).validate(payload)
    return payload


def _sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# ---------------------------------------------------------------------------
# verbs and usage


def test_schema_verb(capsys):
    assert main(["schema"]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert set(printed) == set(schemas.SCHEMAS)
    assert main(["schema", "manifest"]) == 0
    single = json.loads(capsys.readouterr().out)
    assert single["type"] == "object"


def test_usage_errors_exit_one(capsys):
    assert main([]) == 1
    assert main(["run", "unknown_scenario"]) == 1
    assert main(["run", "eraser", "--no-such-flag"]) == 1
    assert main(["schema", "nope"]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# eraser scenario


def test_eraser_analytic_artifacts(tmp_path, capsys):
    out = tmp_path / "eraser"
    code = main(["run", "eraser", "--out", str(out), "--format", "json,csv,svg"])
    assert code == 0
    capsys.readouterr()

    joint = _validate(out / "joint_distribution.json", "joint_distribution")
    assert joint["mode"] == "analytic"
    probs = {(e["left"], e["right"]): e["probability"] for e in joint["entries"]}
    assert probs[("L1", "R1")] == 0.5 and probs[("L2", "R2")] == 0.5
    assert any(e.get("exact") == "1/2" for e in joint["entries"])

    transport = _validate(out / "transport_distribution.json", "joint_distribution")
    moved = {(e["left"], e["right"]): e["probability"] for e in transport["entries"]}
    # transport only lists reachable outcomes; absences must be Born zeros
    for key, p in probs.items():
        assert moved.get(key, 0.0) == p

    assert (out / "joint_distribution.csv").exists()
    assert (out / "records.svg").read_text().startswith("<svg")

    manifest = _validate(out / "manifest.json", "manifest")
    listed = {e["path"]: e for e in manifest["files"]}
    for name in ("joint_distribution.json", "transport_distribution.json",
                 "joint_distribution.csv", "records.svg"):
        assert _sha(out / name) == listed[name]["sha256"]
    assert manifest["config"]["scenario"] == "eraser"


def test_eraser_emitted_json_is_canonical(tmp_path, capsys):
    out = tmp_path / "eraser"
    assert main(["run", "eraser", "--out", str(out), "--format", "json"]) == 0
    capsys.readouterr()
    raw = (out / "joint_distribution.json").read_text()
    payload = json.loads(raw)
    assert raw == json.dumps(payload, indent=2, sort_keys=True) + "\n"


def test_eraser_montecarlo_worker_independence(tmp_path, capsys):
    args = ["run", "eraser", "--mode", "montecarlo", "--trials", "25000",
            "--seed", "5", "--format", "json,csv"]
    outs = {}
    for workers in (1, 4):
        out = tmp_path / f"w{workers}"
        code = main(args + ["--out", str(out), "--workers", str(workers)])
        assert code == 0
        outs[workers] = out
    capsys.readouterr()

    for name in ("joint_frequencies.json", "path_records.json", "outcomes.csv"):
        assert (outs[1] / name).read_bytes() == (outs[4] / name).read_bytes(), name

    freq = _validate(outs[1] / "joint_frequencies.json", "joint_distribution")
    assert freq["n"] == 25000
    total = sum(e["count"] for e in freq["entries"])
    assert total == 25000
    records = _validate(outs[1] / "path_records.json", "path_records")
    assert 0 < len(records) <= 500

    # full rerun with identical arguments is byte-identical, manifest included
    repeat = tmp_path / "w1_again"
    assert main(args + ["--out", str(repeat), "--workers", "1"]) == 0
    capsys.readouterr()
    for name in ("joint_frequencies.json", "path_records.json", "outcomes.csv"):
        assert (outs[1] / name).read_bytes() == (repeat / name).read_bytes()
    m1 = json.loads((outs[1] / "manifest.json").read_text())
    m2 = json.loads((repeat / "manifest.json").read_text())
    m1["config"].pop("out"), m2["config"].pop("out")
    assert m1 == m2


def test_eraser_setting_flags(tmp_path, capsys):
    out = tmp_path / "wp"
    code = main(["run", "eraser", "--out", str(out), "--left", "whichpath",
                 "--right", "interference", "--right-acts-first",
                 "--format", "json"])
    assert code == 0
    capsys.readouterr()
    joint = _validate(out / "joint_distribution.json", "joint_distribution")
    names = {(e["left"], e["right"]) for e in joint["entries"]}
    assert names == {(l, r) for l in ("L3", "L4") for r in ("R1", "R2")}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["right_acts_first"] is True


# ---------------------------------------------------------------------------
# grid scenarios


def test_free_packet_scenario_small(tmp_path, capsys):
    out = tmp_path / "fp"
    code = main(["run", "free_packet", "--out", str(out), "--trials", "50",
                 "--steps", "40", "--save-every", "20",
                 "--format", "json,csv,svg"])
    assert code == 0
    capsys.readouterr()

    report = _validate(out / "equivariance_report.json", "equivariance_report")
    assert report["verdict"] == "pass"
    assert report["n"] == 50
    assert report["order_swaps"] == 0
    assert report["norm_drift"] < 1e-8
    assert abs(report["final_time"] - 40 * 0.001) < 1e-12

    traj = (out / "trajectories.csv").read_text().splitlines()
    assert traj[0] == "trajectory_id,time,q1"
    waves = sorted((out / "wavefunctions").iterdir())
    assert len(waves) == 3  # saved steps 0, 20, 40
    assert (out / "trajectories.svg").read_text().startswith("<svg")


def test_grid_scenario_rejects_analytic_mode(tmp_path, capsys):
    code = main(["run", "free_packet", "--out", str(tmp_path / "x"),
                 "--mode", "analytic"])
    assert code == 1
    assert "no analytic mode" in capsys.readouterr().err


def test_unstable_dt_exits_two(tmp_path, capsys):
    code = main(["run", "free_packet", "--out", str(tmp_path / "x"),
                 "--trials", "10", "--dt", "1.0", "--steps", "5"])
    assert code == 2
    err = capsys.readouterr().err
    assert "runtime failure" in err and "ValueError" in err


# ---------------------------------------------------------------------------
# repeatability and bell scenarios


def test_repeatability_scenario(tmp_path, capsys):
    out = tmp_path / "rep"
    code = main(["run", "repeatability", "--out", str(out), "--trials", "500"])
    assert code == 0
    capsys.readouterr()
    with_c = _validate(out / "repeatability_with_collapse.json", "test_report")
    without = _validate(out / "repeatability_without_collapse.json", "test_report")
    assert with_c["verdict"] == "satisfied" and with_c["statistic"] == 0.0
    assert without["verdict"] == "violated"
    assert abs(without["statistic"] - 0.5) < 0.1
    assert (out / "repeatability.csv").exists()


def test_bell_scenario(tmp_path, capsys):
    out = tmp_path / "bell"
    code = main(["run", "bell_chsh", "--out", str(out)])
    assert code == 0
    capsys.readouterr()
    res = _validate(out / "chsh_result.json", "chsh_result")
    assert abs(res["s_max"] - 2 * 2 ** 0.5) < 1e-9
    assert res["local_model_max"] == 2.0
    assert res["exact_value"] == "2*sqrt(2)"
    assert (out / "chsh_summary.csv").exists()


# ---------------------------------------------------------------------------
# config handling


def test_config_file_then_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "repeatability", "trials": 64, "seed": 3}))
    out = tmp_path / "rep"
    code = main(["run", "repeatability", "--config", str(cfg),
                 "--trials", "32", "--out", str(out)])
    assert code == 0
    capsys.readouterr()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["trials"] == 32  # flag beats file
    assert manifest["config"]["seed"] == 3  # file beats default
    assert manifest["config"]["mode"] == "montecarlo"  # untouched default


def test_config_scenario_mismatch(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "repeatability"}))
    code = main(["run", "eraser", "--config", str(cfg)])
    assert code == 1
    assert "repeatability" in capsys.readouterr().err


def test_config_schema_violation_reports_path(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": -5}))
    code = main(["run", "repeatability", "--config", str(cfg)])
    assert code == 1
    err = capsys.readouterr().err
    assert "config error at" in err and "trials" in err


def test_config_malformed_json(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{\"trials\": }")
    code = main(["run", "repeatability", "--config", str(cfg)])
    assert code == 1
    err = capsys.readouterr().err
    assert "line 1" in err

    cfg.write_text("[1, 2]")
    assert main(["run", "repeatability", "--config", str(cfg)]) == 1
    assert "JSON object" in capsys.readouterr().err

    code = main(["run", "repeatability", "--config", str(tmp_path / "absent.json")])
    assert code == 1
    assert "cannot read" in capsys.readouterr().err


def test_blocked_output_directory_exits_two(tmp_path, capsys):
    blocker = tmp_path / "blocked"
    blocker.write_text("a file, not a directory")
    code = main(["run", "repeatability", "--out", str(blocker), "--trials", "10"])
    assert code == 2
    assert "cannot create output directory" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# plot verb


def test_plot_trajectory_csv_and_records_json(tmp_path, capsys):
    grid_out = tmp_path / "fp"
    assert main(["run", "free_packet", "--out", str(grid_out), "--trials", "20",
                 "--steps", "20", "--save-every", "10"]) == 0
    svg = tmp_path / "traj.svg"
    assert main(["plot", str(grid_out / "trajectories.csv"), "--out", str(svg)]) == 0
    assert svg.read_text().startswith("<svg")

    mc_out = tmp_path / "mc"
    assert main(["run", "eraser", "--mode", "montecarlo", "--trials", "50",
                 "--out", str(mc_out)]) == 0
    default_target = mc_out / "path_records.svg"
    assert main(["plot", str(mc_out / "path_records.json")]) == 0
    assert default_target.read_text().startswith("<svg")
    capsys.readouterr()


def test_plot_failures(tmp_path, capsys):
    assert main(["plot", str(tmp_path / "missing.csv")]) == 2
    note = tmp_path / "note.txt"
    note.write_text("not plottable")
    assert main(["plot", str(note)]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"not": "records"}))
    assert main(["plot", str(bad)]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------------------
# claims suite


def test_claims_suite_starved_trials_exits_three(tmp_path, capsys):
    out = tmp_path / "claims"
    code = main(["run", "claims_suite", "--out", str(out), "--trials", "4"])
    assert code == 3
    err = capsys.readouterr().err
    assert "mismatch" in err.lower()
    payload = _validate(out / "claims_suite.json", "claims_suite")
    assert payload["all_match"] is False
    mismatched = [c for c in payload["claims"] if not c["matches"]]
    assert mismatched
    # starved monte-carlo claims must degrade to inconclusive, never to a
    # confidently wrong verdict
    for c in mismatched:
        if c["report"]["mode"] == "monte-carlo" and c["report"]["n"] <= 4:
            assert c["report"]["verdict"] == "inconclusive"
    assert (out / "manifest.json").exists()
