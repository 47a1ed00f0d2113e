import json
import math

import numpy as np
import pytest

from scalarcf import cli, configfile, engine, scenarios


def run_cli(*argv):
    return cli.main(list(argv))


def test_theta_star_prints_degrees(capsys):
    assert run_cli("theta-star", "--epsilon", "0.2588") == 0
    out = capsys.readouterr().out.strip()
    assert abs(float(out) - 71.4) < 0.1


def test_theta_star_rejects_unreachable(capsys):
    assert run_cli("theta-star", "--epsilon", "1.5") == 2
    assert "epsilon" in capsys.readouterr().err


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli(
        "run", "--scenario", "sim3", "--out", str(out), "--dt", "0.01"
    )
    assert code == 0
    files = {p.name for p in out.iterdir()}
    assert files == {
        "sim3-scalar-2.csv",
        "sim3-vector-baseline.csv",
        "sim3.svg",
        "sim3-manifest.json",
        "sim3-resolved.cfg",
    }
    man = json.loads((out / "sim3-manifest.json").read_text())
    assert man["scenario"] == "sim3" and man["dt"] == 0.01
    cols = engine.load_csv(out / "sim3-scalar-2.csv")
    assert cols["t"].size == scenarios.config_for("sim3", dt=0.01).steps + 1
    # resolved config round-trips to the same run setup
    vals = configfile.load_config(out / "sim3-resolved.cfg")
    assert vals["dt"] == 0.01


def test_run_variant_subset(tmp_path):
    out = tmp_path / "o"
    code = run_cli(
        "run",
        "--scenario",
        "sim1",
        "--out",
        str(out),
        "--dt",
        "0.01",
        "--variants",
        "vector-baseline",
    )
    assert code == 0
    csvs = [p.name for p in out.iterdir() if p.suffix == ".csv"]
    assert csvs == ["sim1-vector-baseline.csv"]


def test_run_unknown_variant_exits_2(tmp_path, capsys):
    code = run_cli(
        "run", "--scenario", "sim3", "--out", str(tmp_path), "--variants", "scalar-6"
    )
    assert code == 2
    assert "scalar-6" in capsys.readouterr().err


def test_run_custom_needs_family(tmp_path, capsys):
    code = run_cli("run", "--scenario", "custom", "--out", str(tmp_path))
    assert code == 2
    assert "family" in capsys.readouterr().err


def test_run_custom_from_config(tmp_path):
    cfg_path = tmp_path / "my.cfg"
    cfg_path.write_text(
        "family = sim3\nduration = 1.0\ndt = 0.01\nk_scalar = 1.0\n"
    )
    out = tmp_path / "out"
    code = run_cli(
        "run", "--scenario", "custom", "--config", str(cfg_path), "--out", str(out)
    )
    assert code == 0
    assert (out / "custom-scalar-2.csv").exists()


def test_run_bad_config_line_diagnosed(tmp_path, capsys):
    cfg_path = tmp_path / "broken.cfg"
    cfg_path.write_text("family = sim3\nduration == 2\n")
    code = run_cli(
        "run", "--scenario", "custom", "--config", str(cfg_path), "--out", str(tmp_path)
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "broken.cfg:2" in err


def test_run_missing_config_file(tmp_path, capsys):
    code = run_cli(
        "run",
        "--scenario",
        "sim2",
        "--config",
        str(tmp_path / "nope.cfg"),
        "--out",
        str(tmp_path),
    )
    assert code == 2


def test_cli_overrides_beat_config(tmp_path):
    cfg_path = tmp_path / "s.cfg"
    cfg_path.write_text("family = sim3\nduration = 1.0\ndt = 0.02\nseed = 4\n")
    out = tmp_path / "out"
    code = run_cli(
        "run",
        "--scenario",
        "custom",
        "--config",
        str(cfg_path),
        "--out",
        str(out),
        "--dt",
        "0.01",
        "--seed",
        "9",
    )
    assert code == 0
    man = json.loads((out / "custom-manifest.json").read_text())
    assert man["dt"] == 0.01
    assert man["seed"] == 9


def test_bundled_configs_parse_to_canonical():
    import importlib.resources as res

    for scen in ("sim1", "sim2", "sim3"):
        text = (res.files("scalarcf") / "configs" / f"{scen}.cfg").read_text()
        vals = configfile.parse_config(text, source=f"{scen}.cfg")
        assert vals.pop("scenario") == scen
        vals.pop("family")
        cfg = scenarios.config_for(scen, **vals)
        canon = scenarios.config_for(scen)
        assert cfg.duration == canon.duration
        assert cfg.k_scalar == canon.k_scalar
        assert cfg.psi0 == canon.psi0  # 'deg' suffix reproduces radians exactly
        assert np.array_equal(cfg.r0_hat, canon.r0_hat)


def test_theta_star_matches_library(capsys):
    from scalarcf import analysis

    eps = math.sin(math.radians(15.0))
    assert run_cli("theta-star", "--epsilon", repr(eps)) == 0
    out = float(capsys.readouterr().out)
    assert abs(out - math.degrees(analysis.solve_theta_star(eps))) < 1e-5
