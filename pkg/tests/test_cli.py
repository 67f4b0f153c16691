import numpy as np
import pytest

from distyle.cli import main
from distyle.grid import solve_grid
from distyle.model import ModelParams


def run(argv):
    return main([str(a) for a in argv])


class TestGridCommand:
    def test_writes_csv(self, tmp_path, capsys):
        code = run(["grid", "--r", 3, "--d", 2, "--n", 6, "--out", tmp_path])
        assert code == 0
        err = capsys.readouterr().err
        assert "solved N=6" in err
        lines = (tmp_path / "grid_p.csv").read_text().splitlines()
        assert lines[0] == "i,j,p"
        assert len(lines) == 37
        sol = solve_grid(ModelParams(3.0, 2.0), 6)
        i, j, p = lines[1].split(",")
        assert (i, j) == ("1", "1")
        assert float(p) == pytest.approx(sol.p(1, 1), rel=1e-11)

    def test_stdout_by_default(self, capsys):
        assert run(["grid", "--r", 3, "--d", 2, "--n", 3]) == 0
        out = capsys.readouterr().out
        assert out.startswith("i,j,p\n")
        assert len(out.splitlines()) == 10

    def test_rejects_bad_rates(self, capsys):
        assert run(["grid", "--r", 2, "--d", 3, "--n", 4]) == 2
        assert "error:" in capsys.readouterr().err


class TestMcCommand:
    def test_point_mode(self, tmp_path):
        code = run(
            ["mc", "--r", 3, "--d", 2, "--i", 1, "--j", 2,
             "--m", 40, "--t", 200, "--seed", 9, "--out", tmp_path]
        )
        assert code == 0
        lines = (tmp_path / "mc_p.csv").read_text().splitlines()
        assert lines[0] == "i,j,p_hat,ci_low,ci_high,M,T,seed"
        cells = lines[1].split(",")
        assert cells[:2] == ["1", "2"]
        assert cells[5:] == ["40", "200", "9"]

    def test_lattice_mode(self, tmp_path):
        code = run(
            ["mc", "--r", 3, "--d", 2, "--imax", 3, "--jmax", 2,
             "--m", 20, "--t", 100, "--out", tmp_path]
        )
        assert code == 0
        lines = (tmp_path / "mc_p.csv").read_text().splitlines()
        assert len(lines) == 7

    def test_incomplete_modes_rejected(self, capsys):
        assert run(["mc", "--r", 3, "--d", 2, "--imax", 3]) == 2
        assert run(["mc", "--r", 3, "--d", 2]) == 2
        assert run(["mc", "--r", 3, "--d", 2, "--i", 0, "--j", 4]) == 2
        assert capsys.readouterr().err.count("error:") == 3


class TestGreensCommand:
    def test_small_sweep(self, tmp_path):
        code = run(
            ["greens", "--r", 3, "--d", 2, "--n", 12,
             "--xmin", 0.2, "--xmax", 0.3, "--nx", 2,
             "--ymin", 0.2, "--ymax", 0.3, "--ny", 2, "--out", tmp_path]
        )
        assert code == 0
        lines = (tmp_path / "genfunc.csv").read_text().splitlines()
        assert lines[0] == "x,y,P_quadrature,P_series,abs_diff"
        assert len(lines) == 5
        for line in lines[1:]:
            vals = [float(v) for v in line.split(",")]
            assert np.isfinite(vals).all()
            assert vals[4] < 1e-2


class TestCharacteristicsCommand:
    def test_curve_csv(self, tmp_path, capsys):
        code = run(
            ["characteristics", "--r", 3, "--d", 2,
             "--x0", 0.3, "--y0", 0.6, "--samples", 50, "--out", tmp_path]
        )
        assert code == 0
        err = capsys.readouterr().err
        assert "s0=" in err and "s_plus=" in err
        lines = (tmp_path / "characteristic.csv").read_text().splitlines()
        assert lines[0] == "s,x,y,integrating_factor"
        assert len(lines) == 51
        first = [float(v) for v in lines[1].split(",")]
        assert first == pytest.approx([0.0, 0.3, 0.6, 1.0])


class TestCompareCommand:
    def test_two_grids(self, tmp_path, capsys):
        run(["grid", "--r", 3, "--d", 2, "--n", 8, "--out", tmp_path / "a"])
        run(["grid", "--r", 3, "--d", 2, "--n", 8, "--method", "direct",
             "--out", tmp_path / "b"])
        capsys.readouterr()
        code = run(
            ["compare", "--field-a", tmp_path / "a" / "grid_p.csv",
             "--field-b", tmp_path / "b" / "grid_p.csv", "--out", tmp_path]
        )
        assert code == 0
        assert "rqe_by_b=" in capsys.readouterr().err
        lines = (tmp_path / "comparison_stats.csv").read_text().splitlines()
        assert lines[0] == "metric,mean,st_dev,min,max"
        metrics = {line.split(",")[0] for line in lines[1:]}
        assert metrics == {"square_error", "absolute_error", "relative_error"}

    def test_missing_file(self, tmp_path, capsys):
        code = run(
            ["compare", "--field-a", tmp_path / "nope.csv",
             "--field-b", tmp_path / "nope.csv"]
        )
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestExperimentCommand:
    def test_config_run(self, tmp_path, capsys):
        cfg = tmp_path / "spec.cfg"
        cfg.write_text(
            "r = 3\nd = 2\ngrid_n = 6\nmc_m = 10\nmc_t = 100\n"
            "conv_min = 4\nconv_max = 8\nconv_reference = 8\nseed = 3\nsublattice = 3\n"
        )
        code = run(["experiment", "--config", cfg, "--out", tmp_path / "run"])
        assert code == 0
        for name in ("manifest.txt", "grid_p.csv", "mc_p.csv", "nconv.csv"):
            assert (tmp_path / "run" / name).exists()
        assert "config: grid ->" in capsys.readouterr().err

    def test_both_presets_make_subdirs(self, tmp_path):
        code = run(
            ["experiment", "--preset", "both", "--grid-n", 5,
             "--no-mc", "--no-convergence", "--out", tmp_path / "runs"]
        )
        assert code == 0
        sup = (tmp_path / "runs" / "supercritical" / "manifest.txt").read_text()
        near = (tmp_path / "runs" / "near-critical" / "manifest.txt").read_text()
        assert "r = 3" in sup
        assert "r = 2.002" in near
        assert "grid_n = 5" in sup and "grid_n = 5" in near

    def test_unknown_preset_rejected(self):
        with pytest.raises(SystemExit):
            run(["experiment", "--preset", "critical", "--out", "x"])

    def test_out_required(self):
        with pytest.raises(SystemExit):
            run(["experiment", "--preset", "supercritical"])


def test_subcommand_required():
    with pytest.raises(SystemExit):
        main([])
