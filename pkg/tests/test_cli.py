import json
from pathlib import Path

import pytest

from tailcert import cli, dp

CASES = Path(__file__).resolve().parent.parent / "cases"


@pytest.fixture
def cache(tmp_path, monkeypatch, desk_table):
    """Point the table cache at a directory that already holds the desk table."""
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
    dp.persist(desk_table, cli.cache_dir() / cli._table_name(dp.DESK_BETA, dp.DESK_ITERATIONS, -3, 3))
    return tmp_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv,first", [
    (["--w", "1,1,1,1,1,1", "--x-sq", "6", "--two-sided"], "7/32"),
    (["--w", "1", "--x", "1"], "1/2"),
    (["--w", "2,2,2,1,1,1,1", "--x", "4", "--strict"], "7/64"),
    (["--w", "1,1,1,1,1,1,1", "--y", "1/sqrt(5)", "--two-sided"], "29/64"),
])
def test_oracle(capsys, argv, first):
    code, out, _ = run(capsys, "oracle", *argv)
    assert code == 0 and out.split()[0] == first


def test_oracle_errors(capsys):
    code, _, err = run(capsys, "oracle", "--w", "1,zz", "--x", "1")
    assert code == 2 and "weight #2" in err
    code, _, err = run(capsys, "oracle", "--w", "1", "--x", "1", "--y", "1")
    assert code == 2


def test_prawitz(capsys):
    code, out, _ = run(capsys, "prawitz", "--a", "0.2", "--x", "0.5", "--T", "12", "--q", "0.15",
                       "--subdivisions", "256")
    assert code == 0 and 0 < float(out) < 0.31
    code, out, _ = run(capsys, "prawitz", "--a", "0.2", "--x", "0.5", "--subdivisions", "64")
    assert code == 0 and "T=" in out
    assert run(capsys, "prawitz", "--a", "0.2", "--x", "0.5", "--T", "3")[0] == 2


def test_dp_build_and_query(tmp_path, capsys):
    out = tmp_path / "t.tbl"
    code, text, _ = run(capsys, "dp", "build", "--beta", "1/20", "--iterations", "2", "--x-min", "-1",
                        "--x-max", "1", "--out", str(out))
    assert code == 0 and out.exists() and "passes=2" in text
    code, text, _ = run(capsys, "dp", "query", "--table", str(out), "--a", "1/4", "--x=-1/2")
    assert code == 0 and 0.5 <= float(text) <= 1


def test_paper_scale_requires_flag(capsys):
    code, _, err = run(capsys, "dp", "build", "--scale", "paper")
    assert code == 2 and "allow-paper-scale" in err


def test_corrupt_table_is_an_error(tmp_path, capsys):
    bad = tmp_path / "bad.tbl"
    bad.write_bytes(b"junk")
    code, _, err = run(capsys, "dp", "query", "--table", str(bad), "--a", "1/2", "--x", "0")
    assert code == 2 and ("checksum" in err or "header" in err)


def test_search_sqrt7(cache, capsys):
    report = cache / "s.json"
    code, out, _ = run(capsys, "search", "--case", str(CASES / "sqrt7.case"), "--out", str(report))
    assert code == 0 and out.startswith("pass")
    data = json.loads(report.read_text())
    assert data["verdict"] == "pass" and len(data["rounds"]) == 5
    first = report.read_text()
    run(capsys, "search", "--case", str(CASES / "sqrt7.case"), "--out", str(report))
    assert report.read_text() == first


def test_search_envelope_failure(cache, tmp_path, capsys):
    case = tmp_path / "tight.case"
    case.write_text("threshold 1\ntarget 7/64\ndepth 2\ngrid 4\nexpect-envelope 1 0.9 1\n")
    code, out, _ = run(capsys, "search", "--case", str(case))
    assert code == 1 and out.startswith("fail")


def test_search_budget_is_inconclusive(cache, tmp_path, capsys):
    case = tmp_path / "tiny.case"
    case.write_text("threshold 1\ntarget 7/64\ndepth 3\ngrid 8\nbudget 3\n")
    code, out, _ = run(capsys, "search", "--case", str(case))
    assert code == 3 and out.startswith("inconclusive")


def test_reproduce_h(capsys):
    code, out, _ = run(capsys, "reproduce", "H", "--scale", "desk")
    assert code == 0
    assert "(1/8, 9/128, 1/32, 1/128)" in out


def test_reproduce_sqrt7_with_search(cache, capsys):
    code, out, _ = run(capsys, "reproduce", "sqrt7", "--scale", "desk")
    assert code == 0 and "desk search envelope within 0.05" in out


def test_reproduce_budget_inconclusive(cache, capsys):
    code, out, _ = run(capsys, "reproduce", "sqrt7", "--budget", "5")
    assert code == 3 and "inconclusive" in out


def test_config_overrides_flags(cache, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"budget": 5}))
    code, _, _ = run(capsys, "--config", str(cfg), "reproduce", "sqrt7", "--budget", "100000")
    assert code == 3
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert run(capsys, "--config", str(cfg), "reproduce", "H")[0] == 2


def test_reproduce_unknown_case(capsys):
    code, _, err = run(capsys, "reproduce", "Q")
    assert code == 2 and "unknown case" in err


def test_reproduce_all_and_report(cache, tmp_path, capsys):
    out_dir = tmp_path / "reports"
    assert run(capsys, "reproduce", "all", "--out-dir", str(out_dir))[0] == 0
    snapshot = {p.name: p.read_bytes() for p in out_dir.iterdir()}
    assert run(capsys, "reproduce", "all", "--out-dir", str(out_dir))[0] == 0
    assert snapshot == {p.name: p.read_bytes() for p in out_dir.iterdir()}
    code, out, _ = run(capsys, "report", "--dir", str(out_dir), "--out", str(tmp_path / "summary.txt"))
    assert code == 0
    assert "f(y) = 7/32 for y in (2/sqrt(6), 1]  [pass]" in out
    assert out.count("[pass]") == 6
    for value in ("1/2", "29/64", "3/8", "1/4", "7/32"):
        assert f"gives {value}" in out


def test_report_fails_on_failed_case(cache, tmp_path, capsys):
    out_dir = tmp_path / "reports"
    run(capsys, "reproduce", "all", "--out-dir", str(out_dir), "--no-search")
    data = json.loads((out_dir / "sqrt5.json").read_text())
    data["verdict"] = "fail"
    (out_dir / "sqrt5.json").write_text(json.dumps(data))
    code, out, _ = run(capsys, "report", "--dir", str(out_dir))
    assert code == 1 and "29/64 for y in (1/sqrt(7), 1/sqrt(5)]  [fail]" in out


def test_report_empty_dir_lists_cases(tmp_path, capsys):
    code, _, err = run(capsys, "report", "--dir", str(tmp_path))
    assert code == 2
    for cid in ("A", "H", "sqrt7", "2sqrt6"):
        assert cid in err


def test_plateau_witnesses():
    assert all(row[-1] for row in cli.plateau_witnesses())
