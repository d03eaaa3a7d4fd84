import importlib.util
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
import plot  # noqa: E402


def write_decay(path, rate=-1.0, n=60):
    t = np.linspace(0.0, 6.0, n)
    h = np.exp(rate * t)
    lines = ["# manifest: experiment=renewal-decay config_sha=deadbeef tool_version=0.1.0",
             "t,H,m,sigma_hat_running"]
    lines += [f"{ti:.17g},{hi:.17g},1.0,0" for ti, hi in zip(t, h)]
    path.write_text("\n".join(lines) + "\n")


def write_ladder(path, hs=(1e-1, 5e-2, 2.5e-2), errs=(1e-1, 5e-2, 2.5e-2)):
    lines = ["# manifest: experiment=claw-converge config_sha=deadbeef tool_version=0.1.0",
             "h,error"]
    lines += [f"{h:.17g},{e:.17g}" for h, e in zip(hs, errs)]
    path.write_text("\n".join(lines) + "\n")


class TestFits:
    def test_decay_semilog_slope(self, tmp_path):
        csv = tmp_path / "decay.csv"
        write_decay(csv, rate=-1.0)
        out = tmp_path / "decay.png"
        res = plot.render(plot.PlotJob("decay-semilog", [csv], out, True))
        assert out.exists() and out.stat().st_size > 0
        assert res.fits["slope"] == pytest.approx(-1.0, abs=0.02)

    def test_ladder_order(self, tmp_path):
        csv = tmp_path / "ladder.csv"
        write_ladder(csv)
        out = tmp_path / "ladder.png"
        res = plot.render(plot.PlotJob("ladder", [csv], out, True))
        assert out.exists()
        assert res.fits["order"] == pytest.approx(1.0, abs=0.05)

    def test_cli_reports_fit(self, tmp_path, capsys):
        csv = tmp_path / "decay.csv"
        write_decay(csv, rate=-0.5)
        code = plot.main(["decay-semilog", "--in", str(csv),
                          "--out", str(tmp_path / "d.png"), "--deterministic"])
        assert code == 0
        out = capsys.readouterr().out
        slope = float([ln for ln in out.splitlines()
                       if ln.startswith("fit slope=")][0].split("=")[1])
        assert slope == pytest.approx(-0.5, abs=0.02)


class TestSchemaValidation:
    def test_missing_column_exit2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("time,height\n0,1\n1,2\n")
        code = plot.main(["decay-semilog", "--in", str(bad),
                          "--out", str(tmp_path / "x.png")])
        assert code == 2
        assert "missing column 't'" in capsys.readouterr().err

    def test_empty_data_exit3(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("t,H\n")
        code = plot.main(["decay-semilog", "--in", str(empty),
                          "--out", str(tmp_path / "x.png")])
        assert code == 3

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(SystemExit):
            plot.main(["hexbin", "--in", "x.csv", "--out", "y.png"])

    def test_missing_file_exit2(self, tmp_path):
        code = plot.main(["ladder", "--in", str(tmp_path / "nope.csv"),
                          "--out", str(tmp_path / "x.png")])
        assert code == 2


class TestDeterminism:
    def test_idempotent_rendering(self, tmp_path):
        csv = tmp_path / "ladder.csv"
        write_ladder(csv)
        out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
        plot.render(plot.PlotJob("ladder", [csv], out1, True))
        plot.render(plot.PlotJob("ladder", [csv], out2, True))
        assert out1.read_bytes() == out2.read_bytes()


class TestOtherKinds:
    def test_residual_bar(self, tmp_path):
        csv = tmp_path / "res.csv"
        lines = ["k,phi_index,residual,tolerance,pass"]
        rng = np.random.default_rng(3)
        for k in (-0.5, 0.0, 0.5):
            for i in range(8):
                r = abs(rng.normal(0, 0.01))
                lines.append(f"{k},{i},{r:.6g},1.5,1")
        csv.write_text("\n".join(lines) + "\n")
        out = tmp_path / "res.png"
        res = plot.render(plot.PlotJob("residual-bar", [csv], out, True))
        assert out.exists()
        assert res.fits["min_residual"] >= 0

    def test_field_snapshot(self, tmp_path):
        csv = tmp_path / "traj.csv"
        lines = ["t,x,value"]
        for t in (0.0, 0.5, 1.0):
            for x in np.linspace(0, 6.28, 32):
                lines.append(f"{t},{x:.6g},{np.sin(x - t):.6g}")
        csv.write_text("\n".join(lines) + "\n")
        out = tmp_path / "snap.png"
        res = plot.render(plot.PlotJob("field-snapshot", [csv], out, True))
        assert out.exists()
        assert res.fits["t_final"] == 1.0


@pytest.mark.skipif(importlib.util.find_spec("entropy_lab") is None,
                    reason="primary package not installed")
class TestAgainstPrimaryArtifacts:
    def test_renders_real_decay_csv(self, tmp_path):
        from entropy_lab.cli import main as lab_main

        cfg = tmp_path / "cfg.ini"
        cfg.write_text("""
[birth]
kind = exp
params = 1.0

[grid]
x_max = 24.0
n = 1200

[time]
t_end = 3.0

[init]
kind = perturbed
""")
        out_dir = tmp_path / "out"
        assert lab_main(["renewal-decay", "--config", str(cfg),
                         "--out", str(out_dir)]) == 0
        img = tmp_path / "decay.png"
        res = plot.render(plot.PlotJob("decay-semilog",
                                       [out_dir / "decay.csv"], img, True))
        assert img.exists()
        assert res.fits["slope"] < 0
