import csv
import json

import pytest

from fleetcharge.cli import GANTT_COLUMNS, main
from fleetcharge.io import read_instance
from fleetcharge.model import TAU_P_KW


@pytest.fixture()
def small_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["generate", "--preset", "small", "--n", "8", "--seed", "42", "-o", str(path)]) == 0
    return path


def test_generate_is_byte_identical(tmp_path, small_file):
    again = tmp_path / "again.json"
    assert main(["generate", "--preset", "small", "--n", "8", "--seed", "42", "-o", str(again)]) == 0
    assert again.read_bytes() == small_file.read_bytes()


def test_generate_large_preset(tmp_path):
    path = tmp_path / "large.json"
    assert main(["generate", "--preset", "large", "--n", "100", "-o", str(path)]) == 0
    inst, _ = read_instance(path)
    assert inst.n_ports == 10 and inst.station.station_cap == 3350.0 and inst.n_trucks == 100


def test_solve_rollout_reports_improvement(tmp_path, small_file):
    ro, base = tmp_path / "ro.json", tmp_path / "edf.json"
    trace = tmp_path / "trace.json"
    assert main(["solve", str(small_file), "--policy", "rollout:edf", "-o", str(ro), "--trace", str(trace)]) == 0
    assert main(["solve", str(small_file), "--policy", "edf", "-o", str(base)]) == 0
    r, b = json.loads(ro.read_text()), json.loads(base.read_text())
    assert r["improved_or_equal"] is True
    assert r["base_cost"] == b["cost"]["total"]
    assert r["cost"]["total"] <= b["cost"]["total"]
    assert r["inner_evaluations"] == 3 * 8 * 9 // 2 + 1
    assert json.loads(trace.read_text())["evaluations"] == r["inner_evaluations"]
    _, digest = read_instance(small_file)
    assert r["instance"]["sha256"] == digest
    assert all(1 <= row["port"] <= 3 for row in r["trucks"])


def test_exact_refuses_large_fleets(tmp_path, capsys):
    path = tmp_path / "n9.json"
    main(["generate", "--preset", "small", "--n", "9", "-o", str(path)])
    assert main(["solve", str(path), "--policy", "exact", "-o", str(tmp_path / "x.json")]) == 4
    assert "N=9" in capsys.readouterr().err


def test_compare_table(tmp_path):
    path = tmp_path / "n4.json"
    main(["generate", "--preset", "small", "--n", "4", "--seed", "3", "-o", str(path)])
    stem = tmp_path / "cmp"
    policies = "fcfs,edf,scdf,rollout:fcfs,rollout:edf,rollout:scdf,exact"
    assert main(["compare", str(path), "--policies", policies, "-o", str(stem)]) == 0
    rows = json.loads(stem.with_suffix(".json").read_text())["rows"]
    by = {r["policy"]: r for r in rows}
    assert min(r["total"] for r in rows) == by["exact"]["total"]
    for kind in ("fcfs", "edf", "scdf"):
        assert by[f"rollout:{kind}"]["total"] <= by[kind]["total"]
    assert all(r["gap_pct"] >= 0 for r in rows)
    with open(stem.with_suffix(".csv"), newline="") as fh:
        table = list(csv.reader(fh))
    assert table[0][:6] == ["policy", "status", "total", "energy", "waiting", "tardiness"]
    assert len(table) == 8
    float(table[1][2])  # '.' decimal separator


def test_compare_refuses_mixed_hashes(tmp_path, small_file, capsys):
    other = tmp_path / "other.json"
    main(["generate", "--preset", "small", "--seed", "7", "-o", str(other)])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["solve", str(small_file), "--policy", "fcfs", "-o", str(a)])
    main(["solve", str(other), "--policy", "fcfs", "-o", str(b)])
    assert main(["compare", "--reports", str(a), str(b), "-o", str(tmp_path / "c")]) == 2
    assert "different instances" in capsys.readouterr().err
    c = tmp_path / "c2.json"
    main(["solve", str(small_file), "--policy", "scdf", "-o", str(c)])
    assert main(["compare", "--reports", str(a), str(c), "-o", str(tmp_path / "ok")]) == 0


def test_gantt(tmp_path, small_file):
    rep = tmp_path / "rep.json"
    main(["solve", str(small_file), "--policy", "rollout:fcfs", "-o", str(rep)])
    out = tmp_path / "g.csv"
    assert main(["gantt", str(rep), "-o", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0].keys()) == GANTT_COLUMNS
    doc = json.loads(rep.read_text())
    cap = doc["station_cap_kw"]
    assert max(float(r["aggregate_power_kw"]) for r in rows) <= cap + TAU_P_KW
    assert all(float(r["power_kw"]) > 0 for r in rows)
    delta = doc["timeline"]["slot_minutes"]
    for t in doc["trucks"]:
        kwh = sum(float(r["power_kw"]) for r in rows if int(r["truck"]) == t["truck"]) * delta / 60
        assert kwh == pytest.approx(t["demand_kwh"], abs=1e-3)


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("FLEETCHARGE_OUT_DIR", str(tmp_path / "out"))
    assert main(["generate", "--preset", "small", "--seed", "1"]) == 0
    assert (tmp_path / "out" / "small_n8_s1.json").exists()


def test_bad_instance_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "nope"}')
    assert main(["solve", str(bad), "--policy", "edf", "-o", str(tmp_path / "r.json")]) == 2
