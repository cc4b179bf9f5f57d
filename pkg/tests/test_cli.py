import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from freesurf.cli import ConfigError, load_config, main
from freesurf.io import checkpoint_read, read_csv_1d

CONFIGS = Path(__file__).parents[1] / "configs"


def small_dam_break(tmp_path, **changes):
    cfg = json.loads((CONFIGS / "swe_dam_break.json").read_text())
    cfg["mesh"]["n"] = 50
    for path, value in changes.items():
        node = cfg
        keys = path.split(".")
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    p = tmp_path / "case.json"
    p.write_text(json.dumps(cfg))
    return p


def test_dam_break_tutorial_runs(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["--config", str(CONFIGS / "swe_dam_break.json"), "--output", str(out)])
    assert code == 0
    csvs = sorted(out.glob("swe_*.csv"))
    assert len(csvs) == 6
    names, cols = read_csv_1d(csvs[-1])
    assert names[:3] == ["x", "h", "hu"] and cols.shape[1] == 400
    state, t, _ = checkpoint_read(out / "swe.ckpt")
    assert t == 0.5 and np.array_equal(state.Q[0, :400], cols[1])
    text = capsys.readouterr().out
    assert "dt=" in text and "wall" in text


def test_tag_typo_exits_2(tmp_path, capsys):
    cfg = small_dam_break(tmp_path, **{"mesh.left_tag": "inflow"})
    data = json.loads(cfg.read_text())
    data["bcs"][0]["tag"] = "inflw"
    cfg.write_text(json.dumps(data))
    assert main(["--config", str(cfg), "--output", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "inflw" in err and "inflow" in err


def test_end_time_zero_gives_one_snapshot(tmp_path):
    cfg = small_dam_break(tmp_path)
    out = tmp_path / "o"
    assert main(["--config", str(cfg), "--output", str(out), "--end-time", "0"]) == 0
    files = sorted(out.glob("*.csv"))
    assert len(files) == 1
    _, cols = read_csv_1d(files[0])
    x = cols[0]
    assert np.array_equal(cols[1], np.where(x < 5, 1.0, 0.5))


def test_write_interval_override(tmp_path):
    cfg = small_dam_break(tmp_path)
    out = tmp_path / "o"
    assert main(["--config", str(cfg), "--output", str(out), "--end-time", "0.2", "--write-interval", "0.05"]) == 0
    assert len(list(out.glob("*.csv"))) == 5


def test_validate_prints_layout(tmp_path, capsys):
    assert main(["--config", str(CONFIGS / "sme_2d_channel.json"), "--validate-only"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("OK\n")
    assert "h, ha0, ha1, hb0, hb1" in out and "nu=0.001" in out


@pytest.mark.parametrize("name", ["swe_dam_break", "poisson", "vam_bump", "sme_2d_channel"])
def test_tutorial_configs_validate(name):
    assert main(["--config", str(CONFIGS / f"{name}.json"), "--validate-only"]) == 0


def test_missing_level(tmp_path, capsys):
    cfg = json.loads((CONFIGS / "sme_2d_channel.json").read_text())
    del cfg["model"]["level"]
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    with pytest.raises(ConfigError) as info:
        load_config(p)
    assert info.value.key == "model.level"
    assert main(["--config", str(p), "--validate-only"]) == 2
    assert "model.level" in capsys.readouterr().err


def test_unknown_identifier_in_expression(tmp_path):
    p = small_dam_break(tmp_path, ic=["x < 5 ? 1 : hr", "0"])
    with pytest.raises(ConfigError) as info:
        load_config(p)
    assert "'hr'" in str(info.value) and "position 12" in str(info.value)


@pytest.mark.parametrize(
    "change, key",
    [
        ({"ic": ["1"]}, "ic"),
        ({"model.name": "euler"}, "model.name"),
        ({"solver.cfl": 2.0}, "solver"),
        ({"mesh.n": True}, "mesh.n"),
        ({"output.formats": ["vtk"]}, "output.formats"),
        ({"solver.type": "steady"}, "solver.type"),
        ({"model.parameters": {"gravity": 9.81}}, "model.parameters.gravity"),
    ],
)
def test_validation_names_the_key(tmp_path, change, key):
    with pytest.raises(ConfigError) as info:
        load_config(small_dam_break(tmp_path, **change))
    assert info.value.key == key


def test_bad_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{ not json")
    assert main(["--config", str(p)]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_runtime_failure_exits_1(tmp_path, capsys):
    p = small_dam_break(tmp_path, ic=["x < 5 ? 1 : -1", "0"])
    assert main(["--config", str(p), "--output", str(tmp_path / "o")]) == 1
    assert "step" in capsys.readouterr().err


def test_unknown_flag_exits_2():
    r = subprocess.run([sys.executable, "-m", "freesurf", "--config", "x.json", "--bogus"],
                       capture_output=True, text=True)
    assert r.returncode == 2 and "--bogus" in r.stderr


def test_repeated_runs_are_byte_identical(tmp_path):
    cfg = small_dam_break(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--config", str(cfg), "--output", str(a)]) == 0
    assert main(["--config", str(cfg), "--output", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    assert all((a / n).read_bytes() == (b / n).read_bytes() for n in names)


def test_poisson_config_matches_quadratic(tmp_path):
    out = tmp_path / "p"
    assert main(["--config", str(CONFIGS / "poisson.json"), "--output", str(out)]) == 0
    (f,) = sorted(out.glob("*.csv"))
    _, cols = read_csv_1d(f)
    assert np.abs(cols[1] - (cols[0] ** 2 + 1)).max() <= 1e-8
