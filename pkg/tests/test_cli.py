from __future__ import annotations

import json

import pytest
from helpers import corrupt_read

from auditsim.cli import main
from auditsim.traceio import dumps, parse_trace


def _run(tmp_path, *argv, name="t.jsonl"):
    path = tmp_path / name
    code = main(["run", *argv, "--trace", str(path)])
    return code, path


def test_run_register_rr(tmp_path):
    code, path = _run(tmp_path, "--object", "register", "--writers", "1", "--readers", "1",
                      "--ops-per-proc", "1", "--schedule", "rr")
    assert code == 0
    assert len(parse_trace(path.read_text()).operations()) == 2


def test_run_seeded_twice_identical(tmp_path):
    args = ["--writers", "2", "--readers", "2", "--auditors", "1", "--ops-per-proc", "3",
            "--schedule", "random", "--seed", "11"]
    _, a = _run(tmp_path, *args, name="a.jsonl")
    _, b = _run(tmp_path, *args, name="b.jsonl")
    assert a.read_bytes() == b.read_bytes()


def test_run_consensus(tmp_path):
    code, path = _run(tmp_path, "--object", "consensus", "--procs", "2")
    assert code == 0
    ops = parse_trace(path.read_text()).operations()
    assert len({op.result for op in ops}) == 1


@pytest.mark.parametrize("argv", [
    ["run", "--object", "nope"],
    ["run", "--writers", "0"],
    ["run", "--object", "denylist", "--procs", "1"],
    ["bogus"],
])
def test_config_errors(argv):
    assert main(argv) == 2


def test_check_solo_read(tmp_path, capsys):
    code, path = _run(tmp_path, "--ops-per-proc", "1")
    capsys.readouterr()
    assert main(["check", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["linearizable"] is True


def test_check_corrupted(tmp_path, capsys):
    _, path = _run(tmp_path, "--ops-per-proc", "2")
    bad = corrupt_read(parse_trace(path.read_text()))
    path.write_text(dumps(bad))
    for mode in ("bruteforce", "certify", "both"):
        assert main(["check", str(path), "--mode", mode]) == 1
    capsys.readouterr()


def test_check_unreadable(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text("{nope\n")
    assert main(["check", str(path)]) == 2
    assert main(["check", str(tmp_path / "missing.jsonl")]) == 2


def test_check_denylist_uses_bruteforce(tmp_path, capsys):
    _, path = _run(tmp_path, "--object", "denylist", "--procs", "2", "--ops-per-proc", "2",
                   "--auditors", "1", "--schedule", "random")
    assert main(["check", str(path)]) == 0
    assert main(["check", str(path), "--mode", "certify"]) == 2
    capsys.readouterr()


def test_explore_register(capsys):
    assert main(["explore", "--writers", "1", "--readers", "1"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["traces"] > 0 and stats["max_loop_iters"] <= 3


def test_explore_llsc(capsys):
    assert main(["explore", "--object", "llsc", "--writers", "2", "--ops-per-proc", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["traces"] > 0


def test_explore_cap(capsys, monkeypatch):
    assert main(["explore", "--cap", "3"]) == 6
    monkeypatch.setenv("AUDITSIM_CAP", "2")
    assert main(["explore"]) == 6
    assert "BudgetExceeded" in capsys.readouterr().err


def test_bench(capsys):
    assert main(["bench", "--writers", "2", "--readers", "2", "--total-ops", "200",
                 "--mix", "random"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["size"] == 4 and report["worst_c"] <= report["bound_c"]
