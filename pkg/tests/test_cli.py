import csv
import json
import logging

import pytest

from evoniche.cli import ALGORITHMS, ExperimentSpec, build_parser, main, parse_config, run_experiment
from evoniche.exceptions import ConfigError


@pytest.fixture
def seq_file(tmp_path):
    path = tmp_path / "seq.txt"
    path.write_text("# small test chain\nHPHPPHHPHH\n")
    return path


def test_minimal_spec_defaults():
    spec = parse_config("algorithm = de\nproblem = bench:sphere\nseed = 1\n")
    assert spec.algorithm == "de" and spec.seed == 1
    assert spec.budget == ExperimentSpec().budget and spec.scale_factor == 0.5


def test_json_config():
    spec = parse_config('{"algorithm": "crowding-de-stl", "problem": "bench:equal-maxima", "repeats": 2}')
    assert spec.algorithm == "crowding-de-stl" and spec.repeats == 2


def test_unknown_key_named():
    with pytest.raises(ConfigError, match=r"line 2.*'colour'"):
        parse_config("algorithm = de\ncolour = blue\n")


def test_unknown_algorithm_named():
    with pytest.raises(ConfigError, match="algorithm"):
        parse_config("algorithm = pso\n")


def test_type_mismatch():
    with pytest.raises(ConfigError, match="budget"):
        parse_config("budget = lots\n")


def test_incompatible_operator():
    with pytest.raises(ConfigError):
        parse_config("algorithm = ga\nproblem = bench:nope\n")


def test_tl_degrades_on_hp(seq_file, caplog):
    with caplog.at_level(logging.WARNING):
        spec = parse_config(f"algorithm = crowding-de-tl\nproblem = hp:{seq_file}\n")
    assert spec.algorithm == "crowding-de" and "crowding-de-tl" in caplog.text
    spec = parse_config(f"algorithm = crowding-de-stl\nproblem = hp:{seq_file}\n")
    assert spec.algorithm == "crowding-de-sl"


def test_missing_sequence_file():
    with pytest.raises(ConfigError, match="problem"):
        parse_config("problem = hp:/no/such/file.txt\n")


def _read(out):
    return (out / "runs.csv").read_bytes(), (out / "summary.json").read_bytes()


def test_repeats_and_determinism(tmp_path):
    spec = dict(algorithm="crowding-de-stl", problem="bench:equal-maxima", budget=600, repeats=3,
                out=str(tmp_path / "a"))
    outputs = []
    for _ in range(2):
        assert run_experiment(parse_config("", spec)) == 0
        outputs.append(_read(tmp_path / "a"))
    assert outputs[0] == outputs[1]
    rows = list(csv.DictReader((tmp_path / "a" / "runs.csv").open()))
    assert {r["run"] for r in rows} == {"0", "1", "2"}
    assert "peaks_found" in rows[0]
    for run in "012":
        evals = [int(r["evaluations"]) for r in rows if r["run"] == run]
        assert all(b > a for a, b in zip(evals, evals[1:])) and evals[-1] <= 600
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["runs"][0]["peaks_total"] == 5
    assert [r["seed"] for r in summary["runs"]] == [0, 1, 2]


def test_hp_run_writes_conformation(tmp_path, seq_file):
    out = tmp_path / "hp"
    status = main(["--algorithm", "crowding-de", "--problem", f"hp:{seq_file}", "--budget", "500",
                   "--out", str(out)])
    assert status == 0
    summary = json.loads((out / "summary.json").read_text())
    block = (out / summary["runs"][0]["conformation_file"]).read_text()
    assert block.startswith("moves ") and "energy" in block
    header = (out / "runs.csv").read_text().splitlines()[0]
    assert header == "run,generation,evaluations,best_fitness,mean_fitness"


def test_overrides_beat_config(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("algorithm = ga\nbudget = 300\nseed = 4\n")
    out = tmp_path / "o"
    assert main(["--config", str(cfg), "--seed", "9", "--out", str(out), "--problem", "bench:himmelblau"]) == 0
    spec = json.loads((out / "summary.json").read_text())["spec"]
    assert spec["seed"] == 9 and spec["budget"] == 300 and spec["algorithm"] == "ga"


def test_bad_config_exit_code(tmp_path, capsys):
    assert main(["--set", "bogus=1"]) != 0
    assert "bogus" in capsys.readouterr().err


def test_initialization_failure_exit_code(tmp_path):
    path = tmp_path / "long.txt"
    path.write_text("H" * 60 + "\n")
    spec = parse_config(f"problem = hp:{path}\nbudget = 100\nout = {tmp_path / 'x'}\n")
    import evoniche.hp_lattice as hp
    original = hp.make_problem
    try:
        hp.make_problem = lambda *a, **k: original(*a, **{**k, "max_retries": 1})
        assert run_experiment(spec) != 0
    finally:
        hp.make_problem = original


def test_help_lists_every_key_with_default(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--help"])
    text = capsys.readouterr().out
    defaults = ExperimentSpec()
    for name, value in vars(defaults).items():
        shown = "" if value is None else value
        assert f"  {name} = {shown}  #" in text
    for algo in ALGORITHMS:
        assert algo in text


def test_console_script_is_deterministic(tmp_path):
    import subprocess
    import sys

    out = tmp_path / "proc"
    cmd = [sys.executable, "-m", "evoniche.cli", "--algorithm", "de", "--problem", "bench:sphere",
           "--budget", "300", "--repeats", "2", "--out", str(out)]
    snapshots = []
    for _ in range(2):
        subprocess.run(cmd, check=True, capture_output=True)
        snapshots.append(_read(out))
    assert snapshots[0] == snapshots[1]
