"""End-to-end CLI pipeline tests."""

import csv
import json

import pytest

from tdroute.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Generated instance, landmark file, and summary store on disk."""
    root = tmp_path_factory.mktemp("cli")
    inst = root / "g.tdi"
    lms = root / "lm.txt"
    store = root / "s.cflt"
    assert main(["generate", "--kind", "grid", "--rows", "6", "--cols", "6",
                 "--seed", "3", "-o", str(inst)]) == 0
    assert main(["landmarks", "-i", str(inst), "--policy", "SR",
                 "--size", "4", "--exclusion", "2", "--seed", "1",
                 "-o", str(lms)]) == 0
    assert main(["preprocess", "-i", str(inst), "-l", str(lms),
                 "--epsilon", "0.1", "--seed", "1", "-o", str(store)]) == 0
    return inst, lms, store


def test_generate_reports_shape(tmp_path, capsys):
    out_file = tmp_path / "g.tdi"
    code, out, _ = _run(capsys, "generate", "--kind", "grid", "--rows", "4",
                        "--cols", "5", "--seed", "1", "-o", str(out_file))
    assert code == 0
    assert "20 vertices" in out
    assert out_file.exists()


def test_contract_round_trip(pipeline, tmp_path, capsys):
    inst, _, _ = pipeline
    out_file = tmp_path / "c.tdi"
    code, out, _ = _run(capsys, "contract", "-i", str(inst),
                        "-o", str(out_file))
    assert code == 0
    assert "vertices kept" in out
    assert out_file.exists()


def test_landmarks_mix_builds_disjoint_batches(pipeline, tmp_path, capsys):
    inst, _, _ = pipeline
    out_file = tmp_path / "mix.txt"
    code, out, _ = _run(capsys, "landmarks", "-i", str(inst), "--policy", "R",
                        "--size", "3", "--exclusion", "2", "--seed", "2",
                        "--mix", "SR:3", "-o", str(out_file))
    assert code == 0
    from tdroute.landmarks import load_landmarks
    lset = load_landmarks(out_file)
    assert lset.policy == "R+SR"
    assert len(set(lset.ids)) == 6


def test_query_reports_cost_and_path(pipeline, capsys):
    inst, _, store = pipeline
    code, out, _ = _run(capsys, "query", "-i", str(inst), "-s", str(store),
                        "--from", "0", "--to", "35", "--at", "30000",
                        "--n", "2")
    assert code == 0
    assert out.startswith("cost ")
    assert "path arcs:" in out


def test_stats_table(pipeline, capsys):
    _, _, store = pipeline
    code, out, _ = _run(capsys, "stats", "-s", str(store))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split() == ["landmark", "bytes", "unique", "owned",
                                "shared", "unreach", "rep-share"]
    assert len(lines) == 5  # header + 4 landmarks


def test_bench_json_and_csv(pipeline, tmp_path, capsys):
    inst, _, store = pipeline
    csv_file = tmp_path / "rows.csv"
    code, out, _ = _run(capsys, "bench", "-i", str(inst), "-s", str(store),
                        "--queries", "15", "--seed", "4", "--n", "1,2",
                        "--csv", str(csv_file))
    assert code == 0
    report = json.loads(out)
    assert report["queries"] == 15
    assert set(report["aggregates"]) == {"1", "2"}
    for agg in report["aggregates"].values():
        assert agg["avg_error_pct"] >= 0.0
        assert set(agg["quantiles_pct"]) == {"p50", "p90", "p95", "p99",
                                             "p100"}
        assert 0.0 <= agg["exact_share"] <= 1.0
    with open(csv_file, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 30  # 15 queries x 2 N values
    assert {"o", "d", "t0", "n", "oracle_cost", "rel_error_pct"} <= rows[0].keys()
    assert all(float(r["rel_error_pct"]) >= 0.0 for r in rows)


def test_bench_deterministic_for_seed(pipeline, capsys):
    inst, _, store = pipeline
    args = ("bench", "-i", str(inst), "-s", str(store), "--queries", "10",
            "--seed", "7", "--n", "2")
    _, out1, _ = _run(capsys, *args)
    _, out2, _ = _run(capsys, *args)
    r1, r2 = json.loads(out1), json.loads(out2)
    a1 = r1["aggregates"]["2"]
    a2 = r2["aggregates"]["2"]
    assert a1["avg_error_pct"] == a2["avg_error_pct"]
    assert a1["max_error_pct"] == a2["max_error_pct"]


def test_update_reports_windows(pipeline, capsys):
    inst, _, store = pipeline
    code, out, _ = _run(capsys, "update", "-i", str(inst), "-s", str(store),
                        "--arc", "10", "--from", "30000", "--to", "40000",
                        "--factor", "2")
    assert code == 0
    report = json.loads(out)
    assert report["expiry"] == 40000.0
    assert set(map(int, report["windows"])) <= set(report["affected_landmarks"])
    for t_s, t_e in report["windows"].values():
        assert t_s < t_e <= 40000.0


def test_usage_errors_exit_nonzero(pipeline, tmp_path, capsys):
    inst, lms, store = pipeline
    # missing input file
    assert main(["contract", "-i", str(tmp_path / "nope.tdi"),
                 "-o", str(tmp_path / "c.tdi")]) == 1
    capsys.readouterr()
    # out-of-range vertex
    assert main(["query", "-i", str(inst), "-s", str(store),
                 "--from", "0", "--to", "99999", "--at", "0"]) == 1
    _, err = capsys.readouterr().out, capsys.readouterr().err
    # oversized landmark request
    assert main(["landmarks", "-i", str(inst), "--policy", "R",
                 "--size", "1000", "-o", str(tmp_path / "l.txt")]) == 1
