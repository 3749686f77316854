import json
import math
import subprocess
import sys

import numpy as np
import pytest

from photonic_qgan.cli import main
from photonic_qgan.data import read_loss_csv, read_pgm

REFERENCE_PNR = """integer,outcome
0,"|0,0,3>"
1,"|0,1,2>"
2,"|0,2,1>"
3,"|0,3,0>"
4,"|1,0,2>"
5,"|1,1,1>"
6,"|1,2,0>"
7,"|2,0,1>"
8,"|2,1,0>"
9,"|3,0,0>"
"""

REFERENCE_THRESHOLD = """integer,outcome
0,"|0,0,click>"
1,"|0,click,0>"
2,"|0,click,click>"
3,"|click,0,0>"
4,"|click,0,click>"
5,"|click,click,0>"
6,"|click,click,click>"
"""


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_config(path, **kw):
    path.write_text(json.dumps(kw))
    return str(path)


def test_map_pnr(capsys):
    code, out, _ = run(capsys, "map", "--modes", "3", "--photons", "3", "--detector", "pnr")
    assert code == 0 and out == REFERENCE_PNR


def test_map_threshold(capsys):
    code, out, _ = run(capsys, "map", "--modes", "3", "--photons", "3", "--detector", "threshold")
    assert code == 0 and out == REFERENCE_THRESHOLD


def test_map_lossy_threshold(capsys):
    code, out, _ = run(capsys, "map", "--modes", "3", "--photons", "3", "--detector", "threshold", "--lossy")
    assert out == 'integer,outcome\n0,"|click,click,click>"\n'


def test_map_impossible_lossy(capsys):
    code, _, err = run(capsys, "map", "--modes", "2", "--photons", "3", "--detector", "threshold", "--lossy")
    assert code == 2 and "error" in err


def parse_dist(out):
    lines = out.strip().splitlines()
    assert lines[0] == "outcome,probability"
    return {line.rsplit(",", 1)[0].strip('"'): float(line.rsplit(",", 1)[1]) for line in lines[1:]}


def test_dist_identity(capsys, tmp_path):
    cfg = write_config(tmp_path / "id.json", modes=3, input_state=[1, 0, 1], ansatz="VEV",
                       sub_generators=1, init_params=[[0.0] * 10])
    code, out, _ = run(capsys, "dist", "--config", cfg)
    probs = parse_dist(out)
    assert code == 0
    assert probs["|1,0,1>"] == pytest.approx(1.0, abs=1e-12)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-9)


def test_dist_hong_ou_mandel(capsys, tmp_path):
    cfg = write_config(tmp_path / "hom.json", modes=2, input_state=[1, 1], ansatz="EV",
                       sub_generators=1, init_params=[[0.0, 0.0, math.pi / 4]])
    code, out, _ = run(capsys, "dist", "--config", cfg)
    probs = parse_dist(out)
    assert code == 0
    assert abs(probs["|1,1>"]) <= 1e-10
    assert probs["|2,0>"] == pytest.approx(0.5, abs=1e-10)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "kw, field",
    [({"modes": 3}, "modes"), ({"detector": "spad"}, "detector"), ({"transmission": 2}, "transmission"),
     ({"iterations": 0}, "iterations"), ({"colour": 1}, "colour"), ({"ansatz": "Q"}, "ansatz"),
     ({"input_state": [1, 0]}, "input_state")],
)
def test_config_errors_name_the_field(capsys, tmp_path, kw, field):
    cfg = write_config(tmp_path / "bad.json", **kw)
    code, _, err = run(capsys, "dist", "--config", cfg) if field != "modes" else run(
        capsys, "train", "--config", cfg, "--data", "unused")
    assert code == 2
    assert f"'{field}'" in err


def test_unknown_config_file(capsys, tmp_path):
    code, _, err = run(capsys, "dist", "--config", str(tmp_path / "missing.json"))
    assert code == 2 and "not found" in err


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory, digits_path):
    root = tmp_path_factory.mktemp("cli")
    cfg = write_config(root / "tiny.json", iterations=3, spsa_steps_per_iter=2, snapshot_every=2)
    out = subprocess.run(
        [sys.executable, "-m", "photonic_qgan", "train", "--config", cfg, "--data", str(digits_path),
         "--seed", "4", "--threads", "1", "--out", str(root / "runs")],
        capture_output=True, text=True, check=True,
    )
    from pathlib import Path

    return Path(out.stdout.strip())


def test_train_writes_run_directory(trained_run):
    assert trained_run.name.endswith("-seed4")
    rows = read_loss_csv(trained_run / "loss.csv")
    assert [r[0] for r in rows] == [1, 2, 3]
    snaps = sorted(p.name for p in trained_run.glob("snapshot_*.pgm"))
    assert snaps == [f"snapshot_{it:05d}_{i}.pgm" for it in (2, 3) for i in range(4)]
    doc = json.loads((trained_run / "model.json").read_text())
    assert doc["format"] == "photonic-qgan-model" and doc["seed"] == 4
    assert doc["counters"]["spsa_steps"] == 6


def test_sample_is_deterministic(capsys, trained_run, tmp_path):
    model = str(trained_run / "model.json")
    for d in ("a", "b"):
        assert run(capsys, "sample", "--model", model, "--count", "16", "--seed", "2", "--out", str(tmp_path / d))[0] == 0
    files = sorted((tmp_path / "a").glob("*.pgm"))
    assert len(files) == 16
    for f in files:
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
        assert read_pgm(f).shape == (64,)
    other = tmp_path / "c"
    run(capsys, "sample", "--model", model, "--count", "16", "--seed", "3", "--out", str(other))
    assert any(f.read_bytes() != (other / f.name).read_bytes() for f in files)


def test_sample_rejects_foreign_model(capsys, tmp_path):
    (tmp_path / "m.json").write_text('{"format": "something-else"}')
    code, _, err = run(capsys, "sample", "--model", str(tmp_path / "m.json"), "--out", str(tmp_path))
    assert code == 2 and "error" in err


@pytest.mark.parametrize("preset", ["ideal", "noisy", "qpu"])
def test_presets_are_accepted(preset):
    from photonic_qgan.config import load_config

    cfg = load_config(preset)
    gen = cfg.build_generator()
    assert gen.generate(np.zeros((1, gen.noise_dim)), seed=0).shape == (1, 64)
