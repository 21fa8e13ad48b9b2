import json
import subprocess
import sys

import pytest

from designworld.cli import main
from designworld.discourse import check_conformance
from designworld.textformat import parse_transcript

FREE = {"commcost": 0, "infcost": 0, "retcost": 0}


def write_config(path, **kw):
    cfg = {"task": "standard", "strategy_a": "explicit-warrant", "strategy_b": "all-implicit", "runs": 6, **FREE}
    cfg.update(kw)
    path.write_text(json.dumps(cfg))
    return path


def test_simulate_prints_conforming_transcript(capsys):
    assert main(["simulate", "--radius", "16", "--seed", "1"]) == 0
    t = parse_transcript(capsys.readouterr().out)
    assert check_conformance(t) == []
    assert sum(a.kind.value == "propose" for a in t.acts) >= 8


def test_simulate_gloss(capsys):
    assert main(["simulate", "--radius", "16", "--seed", "0", "--gloss"]) == 0
    out = capsys.readouterr().out
    assert ";; BILL: First, put the " in out
    assert "Then, let's put the " in out


def test_simulate_flagged_dialogue_still_prints(capsys):
    assert main(["simulate", "--act-cap", "3"]) == 3
    captured = capsys.readouterr()
    assert captured.out.strip()
    assert "flagged" in captured.err


def test_invalid_strategy_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--strategy-a", "shouty"])
    assert exc.value.code == 1


def test_mpie_outside_matched_pair_task_is_a_usage_error(capsys):
    assert main(["simulate", "--strategy-a", "mpie"]) == 1


def test_experiment_writes_files(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    assert main(["experiment", str(cfg), "--out", str(tmp_path / "out")]) == 0
    files = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert len(files) == 2 and files[0].endswith(".results.csv") and files[1].endswith(".summary.csv")
    summary = (tmp_path / "out" / files[1]).read_text()
    assert summary.count("\ncontrast,") == 3


def test_experiment_jobs_do_not_change_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", runs=8)
    assert main(["experiment", str(cfg), "--out", str(tmp_path / "one"), "--jobs", "1"]) == 0
    assert main(["experiment", str(cfg), "--out", str(tmp_path / "many"), "--jobs", "8"]) == 0
    one = {p.name: p.read_bytes() for p in (tmp_path / "one").iterdir()}
    many = {p.name: p.read_bytes() for p in (tmp_path / "many").iterdir()}
    assert one == many


def test_missing_scenario_names_the_path(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", scenario="nowhere/scenario.json")
    assert main(["experiment", str(cfg), "--out", str(tmp_path / "out")]) == 2
    assert "nowhere/scenario.json" in capsys.readouterr().err


@pytest.mark.parametrize("extra,fragment", [
    ({"colour": "green"}, "unknown config keys: colour"),
    ({"task": "decorate"}, "unknown task"),
    ({"strategy_a": "loud"}, "unknown strategy"),
    ({"commcost": -1}, "commcost"),
    ({"runs": "many"}, "runs must be an integer"),
    ({"awm_low": []}, "awm_low"),
    ({"znmb_whole_plan": "yes"}, "znmb_whole_plan"),
])
def test_config_errors_are_explicit(tmp_path, capsys, extra, fragment):
    cfg = write_config(tmp_path / "c.json", **extra)
    assert main(["experiment", str(cfg), "--out", str(tmp_path / "out")]) == 1
    assert fragment in capsys.readouterr().err


def test_missing_required_key(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"task": "standard"}))
    assert main(["experiment", str(tmp_path / "c.json"), "--out", str(tmp_path)]) == 1
    assert "strategy_a" in capsys.readouterr().err


def test_report_needs_results(tmp_path, capsys):
    assert main(["report", str(tmp_path)]) == 2
    assert "no experiment summaries" in capsys.readouterr().err


def test_report_on_two_experiments(tmp_path, capsys):
    out = tmp_path / "out"
    for task in ("standard", "zero-invalids"):
        cfg = write_config(tmp_path / f"{task}.json", task=task, strategy_a="close-consequence")
        assert main(["experiment", str(cfg), "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    text = capsys.readouterr().out
    assert text.count(" vs ") == 2
    assert len(list(out.glob("*.difference.csv"))) == 2


def test_report_classifies_znmb_free_costs(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", task="zero-nonmatching-beliefs", runs=200)
    assert main(["experiment", str(cfg), "--out", str(tmp_path / "out"), "--jobs", "4"]) == 0
    capsys.readouterr()
    assert main(["report", str(tmp_path / "out")]) == 0
    text = capsys.readouterr().out
    assert "beneficial for low awm at p<" in text
    assert "beneficial for mid awm at p<" in text


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "designworld.cli", "simulate", "--radius", "6", "--seed", "3"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("(")
