import json
from dataclasses import dataclass

import numpy as np
import pytest

from kerr_bsv.cli import main
from kerr_bsv.io import ConfigError, config_from_dict, read_csv, sha256, write_csv
from kerr_bsv.scenarios import NegativityScanConfig, negativity_point


@dataclass(frozen=True)
class _Cfg:
    a: float
    b: list[int]
    c: str = "x"
    d: float | None = None


def test_config_strict():
    cfg = config_from_dict(_Cfg, {"a": 1, "b": [1, 2]})
    assert cfg.a == 1.0 and isinstance(cfg.a, float) and cfg.d is None
    with pytest.raises(ConfigError, match="unknown"):
        config_from_dict(_Cfg, {"a": 1, "b": [], "zz": 0})
    with pytest.raises(ConfigError, match="missing"):
        config_from_dict(_Cfg, {"b": []})
    with pytest.raises(ConfigError):
        config_from_dict(_Cfg, {"a": "1", "b": []})
    with pytest.raises(ConfigError):
        config_from_dict(_Cfg, {"a": 1, "b": [1.5]})
    with pytest.raises(ConfigError):
        config_from_dict(_Cfg, {"a": True, "b": []})


def test_config_validation_surfaces_as_config_error():
    with pytest.raises(ConfigError, match="family"):
        config_from_dict(NegativityScanConfig, {"family": "cat", "photons": [1], "phi_kerr": 0.1, "dim": 10})


def test_csv_format(tmp_path):
    p = write_csv(tmp_path / "t.csv", ["a", "b"], [[0.1, 3], [1 / 3, 7]])
    text = p.read_text(encoding="utf-8").splitlines()
    assert text[0] == "a,b"
    assert text[1] == "0.10000000000000001,3"
    assert text[2] == format(1 / 3, ".17g") + ",7"
    header, data = read_csv(p)
    assert header == ["a", "b"] and data[1, 0] == 1 / 3
    with pytest.raises(ValueError):
        write_csv(tmp_path / "u.csv", ["a"], [[1, 2]])


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


SMALL = {
    "negativity-scan": {"family": "squeezed", "photons": [4, 8], "phi_kerr": 0.6, "dim": 100},
    "sv-kerr": {"n_s": [2], "chi_t": [0.05], "dims": [120], "losses": [0.0, 0.2], "oversample": 1.0},
    "husimi-shear": {"var_x": 100.0, "var_p": 0.1, "count": 20000, "chi_t": [0.0, 0.003], "seed": 3},
    "bsv-params": {"photons": [1e4], "losses": [0.05, 0.1]},
    "f2f-roundtrip": {"amp_min": 0.1, "amp_max": 10.0, "n_amp": 3, "n_phase": 2, "seed": 1},
    "mode-analysis": {"shots": 300, "var_x": 100.0, "var_p": 0.1, "seed": 2, "setup": {"n_points": 128, "delay": 150e-15}},
    "wigner": {"state": "fock", "n": 1, "dim": 10},
}


@pytest.mark.parametrize("name", sorted(SMALL))
def test_subcommands_run_and_reproduce(name, tmp_path, capsys):
    cfg = _write(tmp_path, "cfg.json", SMALL[name])
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main([name, "--config", str(cfg), "--out", str(out), "--seed", "5"]) == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["scenario"] == name
    manifest = json.loads((outs[0] / "manifest.json").read_text())
    assert manifest["seed"] == 5 and manifest["config"]
    assert set(manifest["versions"]) == {"kerr_bsv", "numpy", "scipy"}
    csvs = sorted(p.name for p in outs[0].glob("*.csv"))
    assert csvs
    for fname in csvs:
        assert sha256(outs[0] / fname) == sha256(outs[1] / fname)
        assert manifest["outputs"][fname] == sha256(outs[0] / fname)


def test_threads_do_not_change_output(tmp_path):
    cfg = _write(tmp_path, "cfg.json", SMALL["negativity-scan"])
    assert main(["negativity-scan", "--config", str(cfg), "--out", str(tmp_path / "one")]) == 0
    assert main(["negativity-scan", "--config", str(cfg), "--out", str(tmp_path / "two"), "--threads", "2"]) == 0
    f = "negativity_squeezed.csv"
    assert (tmp_path / "one" / f).read_bytes() == (tmp_path / "two" / f).read_bytes()


def test_cli_rejects_bad_config(tmp_path, capsys):
    bad = _write(tmp_path, "bad.json", {**SMALL["bsv-params"], "extra": 1})
    assert main(["bsv-params", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "unknown" in capsys.readouterr().err


def test_cli_refuses_small_dim_with_hint(tmp_path, capsys):
    cfg = _write(tmp_path, "cfg.json", {"family": "coherent", "photons": [25, 200], "phi_kerr": 0.6, "dim": 120})
    assert main(["negativity-scan", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "use dim >=" in err


def test_zero_kerr_gives_zero_negativity():
    for family in ("coherent", "squeezed"):
        for n in (5, 20):
            # at a converged cutoff only the Fourier-route round-off floor remains;
            # near the truncation gate the ripple of the cut tail is ~1e-7
            p = negativity_point(family, n, 0.0, 260)
            assert p["negativity"] < 1e-8


def test_hint_dimension_is_sufficient():
    with pytest.raises(ValueError) as exc:
        negativity_point("squeezed", 30, 0.6, 60)
    hint = int(str(exc.value).rsplit(">=", 1)[1])
    p = negativity_point("squeezed", 30, 0.6, hint)
    assert np.isfinite(p["negativity"]) and p["negativity"] > 0
