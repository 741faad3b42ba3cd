import json
import os

from deskdft.cli import main

from suites import FIXED_XYZ


def _write_manifest(tmp_path):
    man = tmp_path / "m.jsonl"
    lines = [
        json.dumps({"id": "h2", "xyz": FIXED_XYZ["h2"]}),
        json.dumps({"id": "h2o", "xyz": FIXED_XYZ["h2o"], "smiles": "O"}),
    ]
    man.write_text("\n".join(lines) + "\n")
    return str(man)


def test_generate_compare_variance_flow(tmp_path, capsys):
    man = _write_manifest(tmp_path)
    out_a = str(tmp_path / "a.jsonl")
    out_b = str(tmp_path / "b.jsonl")
    base = ["generate", "--manifest", man, "--workers", "1",
            "--grid-level", "0", "--conv-std", "1e-4", "--max-iter", "30"]
    assert main(base + ["--out", out_a, "--precision", "f64"]) == 0
    assert main(base + ["--out", out_b, "--precision", "f32"]) == 0

    report = str(tmp_path / "rep.json")
    assert main(["compare", "--a", out_a, "--b", out_b, "--report", report]) == 0
    rep = json.loads(open(report).read())
    assert rep["n_molecules"] == 2
    assert rep["mae_energy_mev"] < 50.0

    hist = str(tmp_path / "h.csv")
    assert main(["variance", "--in", out_a, "--out", hist]) == 0
    assert os.path.exists(hist)


def test_generate_resume_flag(tmp_path):
    man = _write_manifest(tmp_path)
    out = str(tmp_path / "r.jsonl")
    args = ["generate", "--manifest", man, "--out", out, "--workers", "1",
            "--grid-level", "0", "--conv-std", "1e-4"]
    assert main(args) == 0
    n1 = len(open(out).read().strip().splitlines())
    assert main(args + ["--resume"]) == 0
    n2 = len(open(out).read().strip().splitlines())
    assert n1 == n2 == 2


def test_usage_error_exit_code():
    assert main(["generate", "--manifest"]) == 1
    assert main(["frobnicate"]) == 1


def test_io_error_exit_code(tmp_path):
    missing = str(tmp_path / "nope.jsonl")
    assert main(["compare", "--a", missing, "--b", missing,
                 "--report", str(tmp_path / "r.json")]) == 2
