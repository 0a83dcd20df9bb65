import json
import math
import re
from pathlib import Path

import pytest

from agency_phenotyper.cli import main, run_table
from agency_phenotyper.tmaze import builtin_model_text

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table_rows(text):
    lines = text.strip().splitlines()
    header = lines[0].split()
    return [dict(zip(header, line.split())) for line in lines[2:]]


def test_run_table_shows_baseline_then_post_cue(capsys):
    code, out, _ = run(capsys, "run", "--model", "minimal-tmaze", "--seeds", "0", "--format", "table")
    assert code == 0
    rows = table_rows(out)
    assert [r["subjective_potential"] for r in rows] == ["1.00000", "1.58496"]
    assert [r["phenotype"] for r in rows] == ["Intermediate", "High"]
    assert [r["action"] for r in rows][0] == "Cue"


def test_run_inverted_collapses_to_zero(capsys):
    code, out, _ = run(capsys, "run", "--model", "minimal-tmaze", "--preset", "preference-inverted", "--seeds", "0")
    assert code == 0
    assert table_rows(out)[1]["subjective_potential"] == "0.00000"


@pytest.mark.parametrize(
    "argv, field",
    [
        (["run", "--horizon", "0"], "horizon"),
        (["run", "--gamma", "-1"], "gamma"),
        (["run", "--jobs", "0"], "jobs"),
        (["run", "--model", "no-such-model"], "model"),
        (["run", "--preset", "likelihood-corrupted:2"], "preset"),
        (["phenotype", "--presets"], "presets"),
    ],
)
def test_config_errors_exit_2_and_name_the_field(capsys, argv, field):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert field in err


def test_argparse_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--format", "yaml"])
    assert exc.value.code == 2


def test_phenotype_summary(capsys):
    code, out, _ = run(capsys, "phenotype", "--presets", "standard", "preference-inverted", "likelihood-corrupted:1", "--seeds", "0", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("standard: [Intermediate, High]")
    assert lines[1].startswith("preference-inverted: [Intermediate, Zero]")
    assert lines[2].startswith("likelihood-corrupted:1: [Zero, Zero]")


def test_empowerment_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "empowerment", "--model", "minimal-tmaze", "--belief", "Start")
    assert code == 0 and "bits: 1.00000" in out and "converged: True" in out and "gap:" in out

    path = tmp_path / "identity.json"
    path.write_text(json.dumps({"inputs": ["a", "b", "c"], "outputs": ["x", "y", "z"], "rows": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}))
    code, out, _ = run(capsys, "empowerment", "--channel", str(path))
    assert code == 0 and "bits: 1.58496" in out

    code, out, _ = run(capsys, "empowerment", "--model", "multimodality-tmaze", "--modalities", "reward")
    assert code == 0 and "bits: 1.00000" in out


def test_empowerment_variants(capsys):
    code, out, _ = run(capsys, "empowerment", "--model", "minimal-tmaze", "--belief", "Start", "--actual")
    assert code == 0 and "subjective_actual" in out and "bits: 0.00000" in out
    code, out, _ = run(capsys, "empowerment", "--model", "minimal-tmaze", "--objective")
    assert "objective_potential" in out and "bits: 1.00000" in out
    code, out, _ = run(capsys, "empowerment", "--model", "minimal-tmaze", "--objective", "--context", "CheeseLeft")
    assert "bits: 1.58496" in out
    code, out, _ = run(capsys, "empowerment", "--model", "minimal-tmaze", "--objective", "--position", "ArmLeft")
    assert "bits: 0.00000" in out
    code, out, _ = run(capsys, "empowerment", "--model", "minimal-tmaze", "--belief", "Start", "--format", "json")
    doc = json.loads(out)
    assert doc["reading"]["bits"] == pytest.approx(1.0, abs=1e-9)


def test_empowerment_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"inputs": ["a"], "outputs": ["x", "y"], "rows": [[0.5, 0.6]]}))
    assert run(capsys, "empowerment", "--channel", str(bad))[0] == 1
    bad.write_text("{oops")
    assert run(capsys, "empowerment", "--channel", str(bad))[0] == 1
    assert run(capsys, "empowerment", "--model", "minimal-tmaze", "--belief", "Nowhere")[0] == 2
    assert run(capsys, "empowerment")[0] == 2
    assert run(capsys, "empowerment", "--model", "minimal-tmaze", "--modalities", "reward")[0] == 1


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"preset": "preference-inverted", "seeds": [0], "format": "json"}))
    code, out, _ = run(capsys, "run", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["traces"][0]["steps"][0]["action"] in ("Left", "Right")
    code, out, _ = run(capsys, "run", "--config", str(cfg), "--preset", "standard")
    assert json.loads(out)["traces"][0]["steps"][0]["action"] == "Cue"
    cfg.write_text(json.dumps({"horizon": 0}))
    code, _, err = run(capsys, "run", "--config", str(cfg))
    assert code == 2 and "horizon" in err
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert run(capsys, "run", "--config", str(cfg))[0] == 2


def test_seed_env_var(capsys, monkeypatch):
    monkeypatch.setenv("AGENCY_PHENOTYPER_SEED", "7")
    _, out, _ = run(capsys, "run", "--format", "json")
    assert json.loads(out)["config"]["seeds"] == [7]
    monkeypatch.setenv("AGENCY_PHENOTYPER_SEED", "seven")
    assert run(capsys, "run")[0] == 2


@pytest.mark.parametrize(
    "golden, argv",
    [
        ("run_minimal_seeds01.json", ["run", "--model", "minimal-tmaze", "--seeds", "0", "1", "--format", "json"]),
        ("phenotype_standard_inverted.json", ["phenotype", "--seeds", "0", "1", "2", "--format", "json"]),
    ],
)
def test_golden_files_are_byte_identical(capsys, tmp_path, golden, argv):
    out_path = tmp_path / golden
    assert run(capsys, *argv, "--output", str(out_path))[0] == 0
    assert out_path.read_bytes() == (GOLDEN / golden).read_bytes()
    again = tmp_path / "again.json"
    run(capsys, *argv, "--output", str(again), "--jobs", "2")
    assert again.read_bytes() == out_path.read_bytes()


def test_table_numbers_round_trip_from_json(capsys):
    _, out, _ = run(capsys, "run", "--seeds", "0", "3", "--preset", "likelihood-corrupted:0.3", "--format", "json")
    doc = json.loads(out)
    table = run_table(doc)
    _, printed, _ = run(capsys, "run", "--seeds", "0", "3", "--preset", "likelihood-corrupted:0.3", "--format", "table")
    assert printed == table
    numbers = [float(x) for x in re.findall(r"-?\d+\.\d{5}", table)]
    steps = [s for t in doc["traces"] for s in t["steps"]]
    expected = []
    for s in steps:
        chosen = next(b for b in s["efe"] if b["action"] == s["action"])
        emp = s["empowerment"]
        expected += [chosen["epistemic_bits"], chosen["pragmatic"], chosen["efe"],
                     emp["subjective_potential"]["bits"], emp["subjective_actual"]["bits"], emp["objective_potential"]["bits"]]
    assert len(numbers) == len(expected)
    for shown, exact in zip(numbers, expected):
        assert math.isclose(shown, round(exact, 5), abs_tol=1e-12)


def test_csv_output(capsys, tmp_path):
    path = tmp_path / "out.csv"
    code, out, _ = run(capsys, "phenotype", "--seeds", "0", "--format", "csv", "--output", str(path))
    assert code == 0 and out.startswith("standard:")
    assert path.read_text().splitlines()[0].startswith("spec,seed,step,action,observation")


def test_validate(capsys, tmp_path):
    good = tmp_path / "good.json"
    good.write_text(builtin_model_text("minimal-tmaze"))
    code, out, _ = run(capsys, "validate", str(good))
    assert code == 0 and "valid" in out
    doc = json.loads(good.read_text())
    doc["B"][0][0] = [0, 0.9, 0, 0, 0, 0]
    doc["C"] = [1, 2]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1
    assert "TransitionNotStochastic" in out and "PreferenceShapeMismatch" in out
    bad.write_text("[")
    assert run(capsys, "validate", str(bad))[0] == 1
    assert run(capsys, "validate", str(tmp_path / "missing.json"))[0] == 2


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    path = tmp_path / "m.json"
    path.write_text(builtin_model_text("minimal-tmaze"))
    proc = subprocess.run([sys.executable, "-m", "agency_phenotyper", "validate", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "valid" in proc.stdout
