import csv
import json
import math

import pytest

from duet import cli
from duet.checkpoint import read_checkpoint, save_checkpoint
from duet.config import OUTPUT_ENV, from_mapping, parse_config
from duet.errors import SchemaError
from duet.zakharov import soliton_mass


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        comment = fh.readline()
        rows = list(csv.DictReader(fh))
    return comment, rows


@pytest.fixture(autouse=True)
def no_env_override(monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)


class TestConfig:
    def test_zakharov_defaults(self):
        cfg = parse_config('{"system": "zakharov"}')
        assert cfg.grid_shape == (1024,) and cfg.grid_periods == (100.0,)
        assert cfg.schedule.gamma_exp == 2.0 and cfg.schedule.beta_exp == 2.0 and cfg.schedule.c_step == 0.5
        assert cfg.picard.substeps == 16 and cfg.picard.tol == 1e-10 and cfg.picard.max_iter == 50
        assert cfg.prefix == "zakharov" and cfg.initial == {"kind": "zero"}

    def test_kgs_defaults(self):
        cfg = parse_config('{"system": "kgs"}')
        assert cfg.grid_shape == (32, 32, 32)
        assert cfg.grid_periods == pytest.approx((16 * math.pi,) * 3)
        assert cfg.schedule.gamma_exp == 4.0 and cfg.schedule.delta_exp == 0.75

    def test_sweep_defaults(self):
        cfg = parse_config('{"system": "estimate_sweep"}')
        assert cfg.sweep["lattice_sizes"] == [64, 128, 256] and cfg.sweep["kind"] == "S"

    @pytest.mark.parametrize("data,path", [
        ({"system": "zakharov", "betta": 1}, "betta"),
        ({"system": "zakharov", "schedule": {"betta": 2}}, "schedule.betta"),
        ({"system": "zakharov", "initial": {"kind": "soliton", "etta": 1}}, "initial.etta"),
        ({"system": "zakharov", "grid": {"n_points": 100}}, "grid.n_points"),
        ({"system": "zakharov", "coupling_sign": 2}, "coupling_sign"),
        ({"system": "kgs", "initial": {"kind": "soliton"}}, "initial.kind"),
        ({"system": "kgs", "couplings": {"alpha": "x"}}, "couplings.alpha"),
        ({"system": "heat"}, "system"),
        ({}, "system"),
        ({"system": "estimate_sweep", "sweep": {"sums": [0.5]}}, "sweep.sums"),
        ({"system": "estimate_sweep", "t_end": 1.0}, "t_end"),
    ])
    def test_schema_errors(self, data, path):
        with pytest.raises(SchemaError) as info:
            from_mapping(data)
        assert info.value.path == path

    def test_invalid_json(self):
        with pytest.raises(SchemaError):
            parse_config("{")

    def test_env_override(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "elsewhere"))
        cfg = parse_config('{"system": "zakharov", "output": {"directory": "here"}}')
        assert cfg.output_dir == str(tmp_path / "elsewhere")


def small_zakharov(tmp_path, **extra):
    data = {"system": "zakharov", "seed": 4, "t_end": 1.0, "grid": {"n_points": 128, "period": 40.0},
            "output": {"directory": str(tmp_path / "out")}}
    data.update(extra)
    return data


class TestRun:
    def test_zero_data(self, tmp_path):
        code = cli.main(["run", write_config(tmp_path, small_zakharov(tmp_path))])
        assert code == cli.EXIT_OK
        comment, rows = read_csv(tmp_path / "out" / "zakharov.csv")
        assert comment.strip() == "# seed=4 system=zakharov"
        assert list(rows[0]) == list(cli.CSV_COLUMNS)
        assert [float(r["t"]) for r in rows] == [0.0, 0.5, 1.0]
        assert all(float(r["n_norm"]) == 0 and float(r["mass"]) == 0 for r in rows)
        summary = json.loads((tmp_path / "out" / "zakharov.json").read_text())
        assert summary["steps"] == 2 and summary["fitted_c"] == 0.0 and summary["seed"] == 4

    def test_soliton(self, tmp_path):
        data = small_zakharov(tmp_path, initial={"kind": "soliton", "eta": 1.0, "c": 0.5})
        data["grid"] = {"n_points": 1024, "period": 100.0}
        assert cli.main(["run", write_config(tmp_path, data)]) == cli.EXIT_OK
        summary = json.loads((tmp_path / "out" / "zakharov.json").read_text())
        assert summary["mass_drift"] <= 1e-6
        _, rows = read_csv(tmp_path / "out" / "zakharov.csv")
        assert float(rows[0]["mass"]) == pytest.approx(soliton_mass(1.0, 0.5), rel=1e-12)

    def test_deterministic(self, tmp_path):
        data = small_zakharov(tmp_path, initial={"kind": "random", "u_l2": 1.0, "wave_norm": 1.0})
        path = write_config(tmp_path, data)
        cli.main(["run", path])
        first = (tmp_path / "out" / "zakharov.csv").read_bytes()
        first_ckpt = (tmp_path / "out" / "zakharov.ckpt").read_bytes()
        cli.main(["run", path])
        assert (tmp_path / "out" / "zakharov.csv").read_bytes() == first
        assert (tmp_path / "out" / "zakharov.ckpt").read_bytes() == first_ckpt

    def test_env_redirects_output(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "redirected"))
        assert cli.main(["run", write_config(tmp_path, small_zakharov(tmp_path))]) == 0
        assert (tmp_path / "redirected" / "zakharov.csv").exists()
        assert not (tmp_path / "out").exists()

    def test_checkpoint_restart(self, tmp_path):
        data = small_zakharov(tmp_path, initial={"kind": "random"}, output={"directory": str(tmp_path / "a")})
        assert cli.main(["run", write_config(tmp_path, data)]) == 0
        restart = small_zakharov(tmp_path, initial={"kind": "checkpoint", "path": str(tmp_path / "a" / "zakharov.ckpt")},
                                 output={"directory": str(tmp_path / "b"), "prefix": "second"})
        assert cli.main(["run", write_config(tmp_path, restart, "r.json")]) == 0
        header, state = read_checkpoint(tmp_path / "b" / "second.ckpt")
        assert state.time == pytest.approx(2.0)

    def test_kgs_plane_wave(self, tmp_path):
        data = {"system": "kgs", "t_end": 0.25, "grid": {"n_points": 8, "period": 6.283185307179586},
                "initial": {"kind": "plane_wave", "amplitude": 0.02, "k": [1, 0, 0]},
                "couplings": {"alpha": 1.0, "beta": 1.0, "gamma": 1.0},
                "output": {"directory": str(tmp_path / "out")}}
        assert cli.main(["run", write_config(tmp_path, data)]) == 0
        _, rows = read_csv(tmp_path / "out" / "kgs.csv")
        masses = [float(r["mass"]) for r in rows]
        assert max(masses) - min(masses) <= 1e-6 * masses[0]


class TestExitCodes:
    def test_schema(self, tmp_path):
        assert cli.main(["run", write_config(tmp_path, {"system": "zakharov", "betta": 1})]) == cli.EXIT_SCHEMA

    def test_command_system_mismatch(self, tmp_path):
        assert cli.main(["sweep", write_config(tmp_path, {"system": "zakharov"})]) == cli.EXIT_SCHEMA

    def test_missing_file(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "absent.json")]) == cli.EXIT_IO

    def test_bad_checkpoint(self, tmp_path):
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(b"garbage bytes")
        assert cli.main(["verify", str(bad)]) == cli.EXIT_IO
        data = small_zakharov(tmp_path, initial={"kind": "checkpoint", "path": str(bad)})
        assert cli.main(["run", write_config(tmp_path, data)]) == cli.EXIT_IO

    def test_no_contraction(self, tmp_path):
        data = small_zakharov(tmp_path, initial={"kind": "random"}, picard={"max_iter": 1, "tol": 1e-14},
                              schedule={"max_retries": 0})
        assert cli.main(["run", write_config(tmp_path, data)]) == cli.EXIT_NO_CONTRACTION

    def test_step_underflow_writes_partial_output(self, tmp_path):
        data = small_zakharov(tmp_path, schedule={"c_step": 0.5, "min_step": 0.6})
        assert cli.main(["run", write_config(tmp_path, data)]) == cli.EXIT_STEP_UNDERFLOW
        summary = json.loads((tmp_path / "out" / "zakharov.json").read_text())
        assert summary["status"] == cli.EXIT_STEP_UNDERFLOW and summary["steps"] == 0


class TestSweepAndInspect:
    def test_sweep(self, tmp_path):
        data = {"system": "estimate_sweep", "seed": 1, "output": {"directory": str(tmp_path / "out")},
                "sweep": {"sums": [0.9, 1.0], "lattice_sizes": [16, 32], "families": ["gaussian"], "samples": 1}}
        assert cli.main(["sweep", write_config(tmp_path, data)]) == 0
        comment, rows = read_csv(tmp_path / "out" / "estimate_sweep.csv")
        assert comment.startswith("# seed=1") and len(rows) == 4
        summary = json.loads((tmp_path / "out" / "estimate_sweep.json").read_text())
        assert summary["rows"] == 4 and "trend" in summary

    def test_verify_and_info(self, tmp_path, capsys):
        from duet.zakharov import soliton
        from duet.spectral import Grid1D
        path = tmp_path / "s.ckpt"
        save_checkpoint(soliton(1.0, 0.5, 0.0, Grid1D(1024, 100.0)), path, seed=9)
        assert cli.main(["verify", str(path)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["mass"] == pytest.approx(soliton_mass(1.0, 0.5)) and report["finite"]
        assert cli.main(["info", str(path)]) == 0
        assert json.loads(capsys.readouterr().out)["seed"] == 9

    def test_trend_report_flags_inversions(self):
        from duet.estimates import SweepRow
        rows = [SweepRow("S", 0.3, 0.3, 0.3, 0.9, "below", "characteristic", 16, 8, 1.0, math.nan),
                SweepRow("S", 0.3, 0.3, 0.3, 0.9, "below", "characteristic", 32, 8, 1.2, 1.2),
                SweepRow("S", 0.4, 0.4, 0.4, 1.2, "above", "characteristic", 16, 8, 1.0, math.nan),
                SweepRow("S", 0.4, 0.4, 0.4, 1.2, "above", "characteristic", 32, 8, 1.5, 1.5)]
        report = cli.trend_report(rows)
        assert report["inversions"] == [{"sum": 1.2, "refinement": 1, "growth": 1.5, "reference": 1.2}]


def test_module_entry_point():
    import subprocess
    import sys
    out = subprocess.run([sys.executable, "-m", "duet", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "run" in out.stdout
