import csv
import json

import pytest

from spd import cli, pauli_algebra
from spd.config import ConfigError, apply_overrides, parse_threshold, validate
from spd.runner import auto_term_limit, read_series

TI = {
    "model": {"name": "tilted_ising", "L": 9},
    "evolution": {"delta": "2^-12", "dt": 0.02, "t_max": 0.4, "record_every": 5},
    "observables": {"spectrum_max_m": 3},
}
TFIM = {
    "model": {"name": "tfim", "extents": [3, 3], "h": 3.04438},
    "evolution": {"delta": "2^-12", "dt": 0.04, "t_max": 0.4, "x_cutoff": 3},
}


def write_cfg(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return str(p)


def run_cli(*args):
    return cli.main([str(a) for a in args])


def test_parse_threshold():
    assert parse_threshold("2^-15", "d") == 2.0**-15
    assert parse_threshold("2**-3", "d") == 0.125
    assert parse_threshold(0.5, "d") == 0.5
    with pytest.raises(ConfigError, match="^d:"):
        parse_threshold("tiny", "d")


@pytest.mark.parametrize(
    "patch,path",
    [
        ({"model": {"name": ""}}, "model.name"),
        ({"model": {"name": "heisenberg", "L": 9}}, "model.name"),
        ({"model": {"name": "tilted_ising", "L": 8}}, "model.L"),
        ({"model": {"name": "tfim", "extents": [4, 3], "h": 1.0}}, "model.extents[0]"),
        ({"evolution": {"delta": 0, "dt": 0.02, "t_max": 0.03}}, "evolution.t_max"),
        ({"evolution": {"delta": "small", "dt": 0.02, "t_max": 1}}, "evolution.delta"),
        ({"resources": {"max_terms": 0}}, "resources.max_terms"),
        ({"observables": {"fit_window": [20, 10]}}, "observables.fit_window"),
        ({"bogus": 1}, "<root>.bogus"),
    ],
)
def test_schema_errors_name_the_field(patch, path):
    raw = {**TI, **patch}
    with pytest.raises(ConfigError) as exc:
        validate(raw)
    assert str(exc.value).startswith(path)


def test_defaults():
    cfg = validate(TI)
    assert cfg.observables.fit_window == [10.0, 20.0]
    assert cfg.observables.profile and cfg.observables.msd
    assert cfg.resources.max_terms == "auto"
    assert validate(TFIM).observables.magnetization


def test_overrides():
    raw = apply_overrides(TI, ["evolution.delta=2^-9", "model.L=11", "observables.fit_window=[1,2]"])
    cfg = validate(raw)
    assert cfg.evolution.delta == 2.0**-9
    assert cfg.model.L == 11
    assert TI["model"]["L"] == 9


def test_auto_term_limit():
    assert auto_term_limit(21, memory=144 * 1000) == 1000
    assert auto_term_limit(121, memory=10**18) == 2**31


def test_run_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    code = run_cli("run", "--config", write_cfg(tmp_path, TI), "--output-dir", out, "--checkpoint-every", 10)
    assert code == 0
    series = read_series(out / "series.csv")
    assert list(series["step"]) == [0, 5, 10, 15, 20]
    assert series["msd"][0] == pytest.approx(2 * 0.25 / 3.77812025, abs=1e-14)
    assert sum(series[f"F_{m}"][0] for m in (1, 2, 3)) + series["F_rest"][0] == pytest.approx(
        1.0
    )
    with open(out / "profile.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "time", "site", "C", "raw"]
    assert len(rows) == 1 + 5 * 9
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "ok"
    assert summary["truncated"] is False
    assert summary["peak_terms"] >= summary["final_terms"] > 0
    assert "wall_clock_s" in summary
    assert (out / "checkpoint.bin").exists()


def test_invalid_config_exit_code(tmp_path, capsys):
    raw = {**TI, "model": {"name": ""}}
    assert run_cli("run", "--config", write_cfg(tmp_path, raw)) == 2
    assert "model.name" in capsys.readouterr().err
    assert run_cli("run", "--config", tmp_path / "missing.json") == 2


def test_resource_limit_keeps_partial_csv(tmp_path):
    out = tmp_path / "lim"
    code = run_cli("run", "--config", write_cfg(tmp_path, TI), "--output-dir", out, "--max-terms", 60)
    assert code == 3
    series = read_series(out / "series.csv")
    assert len(series["step"]) >= 1
    summary = json.loads((out / "summary.json").read_text())
    assert summary["truncated"] is True
    assert summary["status"] == "resource-limit"


def test_resume_reproduces_full_run(tmp_path):
    full = tmp_path / "full"
    part = tmp_path / "part"
    cfg = write_cfg(tmp_path, TI)
    assert run_cli("run", "--config", cfg, "--output-dir", full) == 0
    assert run_cli("run", "--config", cfg, "--output-dir", part, "--checkpoint-every", 10,
                   "--set", "evolution.t_max=0.26") == 0
    assert run_cli("resume", "--output-dir", part, "--set", "evolution.t_max=0.4") == 0
    assert (part / "series.csv").read_bytes() == (full / "series.csv").read_bytes()
    assert (part / "profile.csv").read_bytes() == (full / "profile.csv").read_bytes()


def test_resume_without_checkpoint(tmp_path):
    out = tmp_path / "x"
    assert run_cli("run", "--config", write_cfg(tmp_path, TI), "--output-dir", out) == 0
    assert run_cli("resume", "--output-dir", out) == 2


def test_threads_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, TFIM)
    assert run_cli("run", "--config", cfg, "--output-dir", tmp_path / "t1", "--threads", 1) == 0
    assert run_cli("run", "--config", cfg, "--output-dir", tmp_path / "t8", "--threads", 8) == 0
    assert (tmp_path / "t1/series.csv").read_bytes() == (tmp_path / "t8/series.csv").read_bytes()


def test_sweep(tmp_path):
    base = {**TFIM, "output_dir": str(tmp_path / "sw")}
    code = run_cli("sweep", "--config", write_cfg(tmp_path, base), "--delta", "2^-8", "--delta", "2^-9",
                   "--delta", "2^-10")
    assert code == 0
    summary = json.loads((tmp_path / "sw/sweep.json").read_text())
    assert len(summary["runs"]) == 3
    assert isinstance(summary["extrapolation_all"], float)
    assert len(summary["pairwise"]) == 3
    assert all(r["metric"] == "magnetization" for r in summary["runs"])


def test_sweep_rejects_mixed_models(tmp_path):
    a = write_cfg(tmp_path, {**TI, "output_dir": str(tmp_path / "a")}, "a.json")
    b = write_cfg(tmp_path, {**TFIM, "output_dir": str(tmp_path / "b")}, "b.json")
    assert run_cli("sweep", "--config", a, b) == 2


def test_validate_passes(capsys):
    assert run_cli("validate") == 0
    out = capsys.readouterr().out
    assert "PASS  convention table" in out
    assert "max deviation" in out


def test_validate_catches_flipped_convention(monkeypatch, capsys):
    flipped = lambda z_a, x_a, z_b, x_b: (int(z_a & x_b).bit_count()) & 1  # noqa: E731
    monkeypatch.setattr(pauli_algebra, "product_parity", flipped)
    from spd import validation

    result = validation.convention_table(n_random=50)
    assert not result.passed
    assert "FAIL" in result.line()


def test_unreachable_configs_fail_at_guard(tmp_path):
    raw = {
        "model": {"name": "tfim", "extents": [11, 11], "h": 3.04438},
        "evolution": {"delta": "2^-23", "dt": 0.04, "t_max": 2.0, "x_cutoff": 5},
        "resources": {"max_terms": 20000},
    }
    assert run_cli("run", "--config", write_cfg(tmp_path, raw), "--output-dir", tmp_path / "big") == 3
    summary = json.loads((tmp_path / "big/summary.json").read_text())
    assert summary["truncated"]
