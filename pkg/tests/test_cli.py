import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from resonant_fk.cli import main
from resonant_fk.lindstedt import loads

ROOT = Path(__file__).resolve().parents[1]
EXAMPLE = ROOT / "configs" / "example.yaml"


def write_config(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_lindstedt_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["lindstedt", "--config", str(EXAMPLE), "--out", str(a), "--order", "3", "--eps", "1e-3,2e-3"]) == 0
    assert main(["lindstedt", "--config", str(EXAMPLE), "--out", str(b), "--order", "3", "--eps", "1e-3,2e-3"]) == 0
    for name in ("solution.json", "residuals.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma, mb = (json.loads((d / "manifest.json").read_text()) for d in (a, b))
    ma.pop("created"), mb.pop("created")
    assert ma == mb
    assert ma["outputs"].keys() == {"solution.json", "residuals.csv"}
    assert {"numpy", "scipy", "python"} <= ma["versions"].keys()
    sol = loads((a / "solution.json").read_text())
    assert sol.order == 3


def test_auxiliary_unit_amplitude(tmp_path):
    cfg = write_config(tmp_path, """
alpha: [1.0, 1.4142135623730951]
potential: {example: {A: 1.0, C: 1.0}}
resonance: {k: [1, 1], m: 1}
order: 1
eps: [0.01]
""")
    assert main(["auxiliary", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    out = json.loads((tmp_path / "o" / "auxiliary.json").read_text())
    etas = [z["eta"] for z in out["zeros"]]
    assert etas == pytest.approx([0.0, 0.5], abs=1e-10)
    row = read_csv(tmp_path / "o" / "depinning.csv")[0]
    assert float(row["lambda_max"]) == pytest.approx(2 * math.pi * (1 + math.sqrt(2)) * 1e-2, rel=1e-10)


def test_simulate_free_map(tmp_path):
    cfg = write_config(tmp_path, f"""
alpha: [1.0, 1.4142135623730951]
potential: {{file: modes.txt}}
resonance: {{omega: 0.41421356237309515}}
simulate: {{steps: 10000, orbits: 2, structure_steps: 100}}
""")
    (tmp_path / "modes.txt").write_text("1 0 0.025330295910584444 0\n1 1 0.025330295910584444 0\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o"), "--eps", "0", "--seed", "7"]) == 0
    rows = read_csv(tmp_path / "o" / "lyapunov.csv")
    assert len(rows) == 2
    shear = 2 * math.log(1 + 1e4 * math.sqrt(3)) / 1e4
    for row in rows:
        assert all(abs(float(row[f"chi_{i}"])) <= shear for i in (1, 2, 3))
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["seed"] == 7


def test_resonance_phonon_verify(tmp_path):
    assert main(["resonance", "--config", str(EXAMPLE), "--out", str(tmp_path / "r")]) == 0
    res = json.loads((tmp_path / "r" / "resonance.json").read_text())
    assert res["B"] == [[1, 0], [1, 1]] and res["L"] == [0, 1] and res["k"] == [1, 1]
    assert main(["phonon", "--config", str(EXAMPLE), "--out", str(tmp_path / "p"), "--eps", "0"]) == 0
    for row in read_csv(tmp_path / "p" / "phonon.csv"):
        assert float(row["gap"]) == pytest.approx(float(row["free_laplacian_gap"]), abs=1e-10)
    assert main(["verify", "--config", str(EXAMPLE), "--out", str(tmp_path / "v"), "--order", "1",
                 "--eps", "1e-2,5e-3,2.5e-3"]) == 0
    assert json.loads((tmp_path / "v" / "verify.json").read_text())["slope_v"] == pytest.approx(2.0, abs=0.3)


@pytest.mark.parametrize("body,code", [
    ("alpha: [1.0, 1.4142135623730951]\npotential: {example: {}}\nresonance: {k: [2, 2], m: 1}\n", "not_primitive"),
    ("alpha: [1.0, 2.0]\npotential: {example: {}}\nresonance: {k: [1, 1], m: 1}\n", "medium_resonant"),
    ("alpha: [1.0, 1.4142135623730951]\nresonance: {k: [1, 1], m: 1}\n", "config_error"),
    ("alpha: [1.0, 1.4142135623730951]\npotential: {modes: ['1 0 1 0']}\nresonance: {k: [1, 1], m: 1}\n"
     "cutoff: 1\n", "cutoff_overflow"),
])
def test_errors_are_machine_readable(tmp_path, body, code):
    cfg = write_config(tmp_path, body)
    assert main(["lindstedt", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    err = json.loads((tmp_path / "o" / "error.json").read_text())
    assert err["error"] == code
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["exit_code"] == 2


def test_missing_config_file(tmp_path):
    assert main(["resonance", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "resonant_fk", "resonance", "--config", str(EXAMPLE),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "resonance.json").exists()
