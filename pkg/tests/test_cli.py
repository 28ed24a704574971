import csv
import hashlib
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from simart.cli import main
from simart.io import read_pgm16

P1_CONFIG = {
    "name": "full-square",
    "model": {"kind": "percolation", "d": 2, "p": 1.0},
    "depth": 4,
    "replicates": 2,
    "seeds": {"root": 11},
    "families": [{"id": "diag", "type": "line", "point": [0.0, 0.0], "direction": [1.0, 1.0]}],
    "analyses": [{"type": "render", "id": "img", "level": 4, "resolution": 32}],
}

BALL_CONFIG = {
    "model": {"kind": "ball-cutout", "d": 2, "alpha": 0.5},
    "depth": 5,
    "replicates": 3,
    "seeds": {"root": 12, "overrides": {"2": 99}},
    "window": "family",
    "families": [{"id": "mid", "type": "line", "point": [0.0, 0.1], "direction": [1.0, 0.0]}],
    "analyses": [{"type": "tail-audit", "id": "tail", "family": "mid", "level": 3,
                  "kappas": [0.5, 1.0], "replicates": 10}],
}


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=1))
    return path


def run(tmp_path, cfg, out="out", *extra):
    path = write_config(tmp_path, cfg)
    return main(["run", "--config", str(path), "--out", str(tmp_path / out), *extra])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestRun:
    def test_constant_masses_for_full_square(self, tmp_path):
        assert run(tmp_path, P1_CONFIG) == 0
        rows = read_rows(tmp_path / "out" / "masses.csv")
        assert len(rows) == 2 * 5
        ys = {float(r["Y"]) for r in rows}
        assert len(ys) == 1 and ys.pop() == pytest.approx(math.sqrt(2), abs=1e-12)
        assert all(r["increment"] in ("0.0", "") for r in rows)

    def test_rerun_is_byte_identical(self, tmp_path):
        assert run(tmp_path, BALL_CONFIG, "a") == 0
        assert run(tmp_path, BALL_CONFIG, "b") == 0
        ma = (tmp_path / "a" / "manifest.json").read_bytes()
        mb = (tmp_path / "b" / "manifest.json").read_bytes()
        assert ma == mb
        files = json.loads(ma)["files"]
        assert "masses.csv" in files and "tail.csv" in files
        for rel, digest in files.items():
            assert hashlib.sha256((tmp_path / "b" / rel).read_bytes()).hexdigest() == digest

    def test_threads_do_not_change_outputs(self, tmp_path):
        assert run(tmp_path, BALL_CONFIG, "one") == 0
        assert run(tmp_path, BALL_CONFIG, "two", "--threads", "3") == 0
        for name in ("masses.csv", "simulate.csv"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

    def test_manifest_config_hash(self, tmp_path):
        path = write_config(tmp_path, BALL_CONFIG)
        assert main(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == 0
        canonical = json.dumps(json.loads(path.read_text()), sort_keys=True, separators=(",", ":"),
                               ensure_ascii=True)
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["config_hash"] == hashlib.sha256(canonical.encode()).hexdigest()
        assert "timing.json" not in manifest["files"]
        assert (tmp_path / "out" / "timing.json").exists()

    def test_every_row_carries_its_seed(self, tmp_path):
        assert run(tmp_path, BALL_CONFIG) == 0
        out = tmp_path / "out"
        masses = read_rows(out / "masses.csv")
        seeds = {r["replicate"]: r["seed"] for r in masses}
        assert seeds == {"0": "12:0.0", "1": "12:0.1", "2": "99:"}
        assert all(r["seed"] for r in read_rows(out / "simulate.csv"))
        assert all(r["seed"] == "12:2.0" for r in read_rows(out / "tail.csv"))

    def test_single_row_reproducible_in_isolation(self, tmp_path):
        from simart.core import SeedPath
        from simart.families import PlaneParam
        from simart.intersect import mass_sequence, sampling_window
        from simart.models import ModelSpec, realize

        assert run(tmp_path, BALL_CONFIG) == 0
        row = read_rows(tmp_path / "out" / "masses.csv")[7]
        model = ModelSpec("ball-cutout", 2, {"alpha": 0.5})
        V = PlaneParam.line([0.0, 0.1], [1.0, 0.0])
        real = realize(model, SeedPath.from_text(row["seed"]), 5, sampling_window(model, V))
        assert repr(float(mass_sequence(real, V, 5).values[int(row["n"])])) == row["Y"]

    def test_stage_subcommands_reuse_stored_realizations(self, tmp_path):
        path = write_config(tmp_path, BALL_CONFIG)
        out = str(tmp_path / "out")
        assert main(["simulate", "--config", str(path), "--out", out]) == 0
        assert main(["intersect", "--config", str(path), "--out", out]) == 0
        assert run(tmp_path, BALL_CONFIG, "full") == 0
        assert ((tmp_path / "out" / "masses.csv").read_bytes()
                == (tmp_path / "full" / "masses.csv").read_bytes())

    def test_seed_override(self, tmp_path):
        path = write_config(tmp_path, P1_CONFIG)
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o"),
                     "--seed-override", "5"]) == 0
        seeds = [r["seed"] for r in read_rows(tmp_path / "o" / "simulate.csv")]
        assert seeds == ["5:0.0", "5:0.1"]


class TestErrors:
    def test_hypothesis_violation_exits_2(self, tmp_path, capsys):
        cfg = dict(P1_CONFIG, model={"kind": "percolation", "d": 2, "p": 0.4}, regime="limit")
        assert run(tmp_path, cfg) == 2
        assert "s > α" in capsys.readouterr().err

    def test_growth_regime_is_accepted(self, tmp_path):
        cfg = dict(P1_CONFIG, model={"kind": "percolation", "d": 2, "p": 0.4}, regime="growth",
                   analyses=[])
        assert run(tmp_path, cfg) == 0
        report = json.loads((tmp_path / "out" / "reports" / "masses.json").read_text())
        assert report["sequences"][0]["regime"] == "growth-regime"

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        assert run(tmp_path, dict(P1_CONFIG, colour="blue")) == 2
        assert "colour" in capsys.readouterr().err

    def test_resource_cap_exits_3(self, tmp_path):
        cfg = dict(BALL_CONFIG, engine={"method": "quadrature", "tol": 1e-12}, analyses=[])
        assert run(tmp_path, cfg) == 3

    def test_unwritable_output_exits_4(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        path = write_config(tmp_path, P1_CONFIG)
        assert main(["run", "--config", str(path), "--out", str(blocker / "sub")]) == 4

    def test_missing_config_exits_4(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 4


class TestRender:
    def test_full_square_is_white(self, tmp_path):
        assert run(tmp_path, P1_CONFIG) == 0
        img = read_pgm16(tmp_path / "out" / "renders" / "img_rep0000.pgm")
        assert img.shape == (32, 32) and np.all(img == 65535)

    def test_alpha_zero_cutout_is_white_disk(self, tmp_path):
        cfg = {"model": {"kind": "ball-cutout", "d": 2, "alpha": 0.0}, "depth": 3,
               "seeds": {"root": 1}}
        path = write_config(tmp_path, cfg)
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
        real = tmp_path / "o" / "realizations" / "rep_0000.json"
        pgm = tmp_path / "disk.pgm"
        assert main(["render", str(real), "--resolution", "64", "--out", str(pgm)]) == 0
        img = read_pgm16(pgm)
        c = (np.arange(64) + 0.5) / 64 * 2 - 1
        inside = (c[:, None] ** 2 + c[None, :] ** 2) <= 1
        assert np.all(img[inside] == 65535) and np.all(img[~inside] == 0)

    def test_same_seed_same_bytes(self, tmp_path):
        cfg = dict(BALL_CONFIG, window="none", analyses=[{"type": "render", "id": "r",
                                                          "resolution": 64}])
        assert run(tmp_path, cfg, "a") == 0
        assert run(tmp_path, cfg, "b") == 0
        a = (tmp_path / "a" / "renders" / "r_rep0000.pgm").read_bytes()
        assert a == (tmp_path / "b" / "renders" / "r_rep0000.pgm").read_bytes()
        assert a.startswith(b"P5\n64 64\n65535\n")

    def test_requires_plane(self, tmp_path, capsys):
        cfg = {"model": {"kind": "percolation", "d": 1, "p": 0.8}, "depth": 3}
        path = write_config(tmp_path, cfg)
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
        real = tmp_path / "o" / "realizations" / "rep_0000.tree"
        assert main(["render", str(real), "--out", str(tmp_path / "x.pgm")]) == 2
        assert "d = 2" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    path = write_config(tmp_path, P1_CONFIG)
    proc = subprocess.run([sys.executable, "-m", "simart.cli", "simulate", "--config", str(path),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    rows = read_rows(tmp_path / "o" / "simulate.csv")
    assert [math.isclose(float(r["total_mass"]), 1.0) for r in rows] == [True, True]
