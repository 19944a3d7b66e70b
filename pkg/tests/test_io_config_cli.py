import json

import numpy as np
import pytest
import yaml

from hardychoquard.cli import main
from hardychoquard.config import ConfigError, config_hash, dump_config, parse_config
from hardychoquard.core import RadialField, make_grid, make_params
from hardychoquard.io import FieldFormatError, read_field, write_document, write_field, write_rows

BASE = {"model": {"d": 3, "alpha": 2, "p": 3}, "grid": {"N": 256, "r_max": 30.0, "grading": "algebraic:2"}}


def write_cfg(tmp_path, raw, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw))
    return str(path)


# -- field files -----------------------------------------------------------------------


def test_field_round_trip_bit_exact(tmp_path):
    params = make_params(3, 2, 3)
    grid = make_grid(300, 17.3, "algebraic:2")
    rng = np.random.default_rng(0)
    f = RadialField(grid, rng.standard_normal(300) * np.exp(1j * rng.standard_normal(300)))
    path = write_field(tmp_path / "f.txt", f, params)
    g, prm = read_field(path)
    assert np.array_equal(g.values, f.values)
    assert g.grid.same_as(grid) and (prm.d, prm.alpha, prm.p) == (3, 2.0, 3.0)


@pytest.mark.parametrize(
    "mutate, needle",
    [
        (lambda lines: lines[:1] + ["1.0 2.0"] + lines[2:], ":2:"),
        (lambda lines: lines[:3] + ["1.0 abc 0.0"] + lines[4:], ":4:"),
        (lambda lines: lines[:-1], "header says N"),
        (lambda lines: ["# d=3 alpha=2 p=3"] + lines[1:], "missing N"),
        (lambda lines: lines[1:], ":1:"),
        (lambda lines: lines[:2] + ["1.0 nan 0.0"] + lines[3:], ":3: non-finite"),
    ],
)
def test_malformed_field_names_line(tmp_path, mutate, needle):
    params = make_params(3, 2, 3)
    path = write_field(tmp_path / "f.txt", RadialField(make_grid(32, 5.0), np.ones(32)), params)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(mutate(lines)) + "\n")
    with pytest.raises(FieldFormatError, match=needle.replace("(", r"\(")):
        read_field(path)


def test_rows_and_documents(tmp_path):
    rows = [{"t": 0.1, "x": 1.0 / 3.0}, {"t": 0.2, "x": float("inf")}]
    write_rows(tmp_path / "a.csv", rows, ["t", "x"])
    assert (tmp_path / "a.csv").read_text().splitlines()[1] == "0.10000000000000001,0.33333333333333331"
    write_rows(tmp_path / "a.jsonl", rows, ["t", "x"], "json-lines")
    recs = [json.loads(x) for x in (tmp_path / "a.jsonl").read_text().splitlines()]
    assert recs[0]["x"] == 1.0 / 3.0 and recs[1]["x"] == "inf"
    with pytest.raises(ValueError):
        write_rows(tmp_path / "b", rows, ["t"], "xml")
    write_document(tmp_path / "d.txt", {"ok": True, "n": 3})
    assert (tmp_path / "d.txt").read_text() == "ok: true\nn: 3\n"


# -- configuration ---------------------------------------------------------------------


def test_config_round_trip_and_hash():
    cfg = parse_config({**BASE, "dynamics": {"dt0": 0.01, "snapshot_interval": 0.1}, "seed": 4})
    again = parse_config(yaml.safe_load(dump_config(cfg)))
    assert again == cfg and config_hash(again) == config_hash(cfg)
    other = parse_config({**BASE, "seed": 5})
    assert config_hash(other) != config_hash(cfg)
    assert cfg.grid.N == 256 and isinstance(cfg.model.alpha, float)


@pytest.mark.parametrize(
    "raw, needle",
    [
        ({"model": BASE["model"]}, "missing required block"),
        ({**BASE, "grid": {"r_max": 3.0}}, "missing key"),
        ({**BASE, "solver": {"tolerance": 1e-8}}, "unknown key"),
        ({**BASE, "extra": 1}, "unknown top-level"),
        ({**BASE, "grid": {"N": "many", "r_max": 3.0}}, "expected an integer"),
        ({**BASE, "grid": {"N": 8, "r_max": 3.0}}, "N must be"),
        ({**BASE, "datum": {"kind": "file"}}, "needs datum.path"),
        ({**BASE, "outputs": {"formats": ["xml"]}}, "formats"),
        ({**BASE, "dynamics": {"blowup_factor": 0.5}}, "blowup_factor"),
    ],
)
def test_config_errors(raw, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(raw)


# -- command line ----------------------------------------------------------------------


def test_cli_ground_state(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE)
    out = tmp_path / "gs"
    assert main(["ground-state", "--config", cfg, "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "sharp_C:" in text and "M_gs:" in text
    manifest = (out / "manifest.txt").read_text()
    assert "config_hash:" in manifest and "seed: 0" in manifest
    f, _ = read_field(out / "ground_state_profile.txt")
    assert f.grid.n == 256
    # the saved profile is a valid datum
    assert main(["classify", "--config", cfg, "--out", str(tmp_path / "c"), "--datum",
                 str(out / "ground_state_profile.txt")]) == 0
    assert "verdict: Undetermined" in (tmp_path / "c" / "verdict.txt").read_text()


def test_cli_excluded_exponent(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {**BASE, "model": {"d": 3, "alpha": 2, "p": 6}})
    assert main(["ground-state", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    assert "excluded by Pohožaev identities" in capsys.readouterr().err


def test_cli_config_errors(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"model": BASE["model"]})
    assert main(["ground-state", "--config", cfg]) == 2
    assert "missing required block(s): grid" in capsys.readouterr().err
    assert main(["ground-state", "--config", str(tmp_path / "nope.yaml")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("# d=3 alpha=2 p=3 N=256 r_max=30 grading=algebraic:2\n1 2\n")
    cfg = write_cfg(tmp_path, BASE, "ok.yaml")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "s"), "--datum", str(bad)]) == 2
    assert "bad.txt:2:" in capsys.readouterr().err


def test_cli_simulate_json_lines(tmp_path):
    raw = {**BASE, "grid": {"N": 256, "r_max": 20.0}, "dynamics": {"dt0": 0.01, "t_end": 0.1, "snapshot_interval": 0.02},
           "datum": {"kind": "gaussian", "amplitude": 0.5, "chirp": 0.1}}
    cfg = write_cfg(tmp_path, raw)
    out = tmp_path / "sim"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--format", "json-lines"]) == 0
    recs = [json.loads(x) for x in (out / "trajectory.jsonl").read_text().splitlines()]
    assert len(recs) == 6 and recs[-1]["t"] == pytest.approx(0.1)
    assert set(recs[0]) >= {"t", "mass", "energy", "hardy_norm", "gamma"}
    doc = json.loads((out / "simulate.jsonl").read_text())
    assert doc["status"] == "Completed" and "verdict" in doc
    assert yaml.safe_load((out / "config.yaml").read_text())["dynamics"]["dt0"] == 0.01


def test_cli_verify_phase_is_seeded(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"model": {"d": 3, "alpha": 2, "p": 3}, "grid": {"N": 512, "r_max": 20.0}})
    assert main(["verify", "phase", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "1"]) == 0
    assert main(["verify", "phase", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "1"]) == 0
    assert (tmp_path / "a" / "verify_phase.csv").read_text() == (tmp_path / "b" / "verify_phase.csv").read_text()
    assert "PASS" in capsys.readouterr().out


def test_cli_verify_failure_exit_code(tmp_path, capsys):
    # 256 cells cannot resolve the random trial fields: the identity check fails
    cfg = write_cfg(tmp_path, {"model": {"d": 3, "alpha": 2, "p": 3}, "grid": {"N": 256, "r_max": 20.0}})
    assert main(["verify", "phase", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "1"]) == 1
    assert "FAIL" in capsys.readouterr().out
