import json

import numpy as np
import pytest

from entropy_lab.cli import main

CONSTANT_ENTROPY = """
[claw]
n_x = 256
t_end = 0.5
n_snapshots = 20
k_values = -0.5 0 0.5
flux = burgers
u0 = constant
"""

RENEWAL_STEADY = """
[birth]
kind = exp
params = 1.0

[grid]
x_max = 24.0
n = 2400

[time]
t_end = 2.0

[init]
kind = steady
"""

CONTRACTION = """
[contraction]
n_x = 128
t_end = 0.8
n_snapshots = 8
flux = burgers
u0 = sin
phase_shift = 0.3
"""

CLAW_SMALL = """
[claw]
n_x = 256
t_end = 0.6
viscosity_ladder = 16 64
n_snapshots = 8
flux = burgers
u0 = sin
"""

EULER_SMALL = """
[euler]
fine_n = 256
levels = 32 64
amplitude = 0.25
t_end = 0.2
n_snapshots = 8
"""


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_catalog_listing(capsys):
    assert main([]) == 0
    out = capsys.readouterr().out
    for name in ("claw-converge", "entropy-check", "young-measure",
                 "contraction", "euler-weak-strong", "renewal-decay"):
        assert name in out


def test_unknown_experiment(capsys):
    code = main(["no-such-thing", "--config", "x.ini"])
    assert code == 2
    record = json.loads(capsys.readouterr().err)
    assert "renewal-decay" in record["message"]


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = write(tmp_path, "[claw]\nn_x = 64\nwibble = 3\n")
    code = main(["claw-converge", "--config", str(cfg),
                 "--out", str(tmp_path / "out")])
    assert code == 2
    record = json.loads(capsys.readouterr().err)
    assert "wibble" in record["message"]


def test_missing_config(capsys):
    assert main(["claw-converge"]) == 2


def test_entropy_check_constant_data(tmp_path):
    cfg = write(tmp_path, CONSTANT_ENTROPY)
    out = tmp_path / "out"
    assert main(["entropy-check", "--config", str(cfg), "--out", str(out)]) == 0
    body = (out / "residuals.csv").read_text().splitlines()
    assert body[0].startswith("# manifest: experiment=entropy-check config_sha=")
    assert body[1] == "k,phi_index,residual,tolerance,pass"
    assert all(row.endswith(",1") for row in body[2:])


def test_renewal_steady_run(tmp_path):
    cfg = write(tmp_path, RENEWAL_STEADY)
    out = tmp_path / "out"
    assert main(["renewal-decay", "--config", str(cfg), "--out", str(out)]) == 0
    decay = (out / "decay.csv").read_text().splitlines()
    assert decay[1] == "t,H,m,sigma_hat_running"
    h_vals = [float(r.split(",")[1]) for r in decay[2:]]
    assert max(h_vals) < 1e-6
    assert (out / "eigen.csv").read_text().splitlines()[1] == "x,N,phi"


def test_renewal_invariant_violation_exit3(tmp_path, capsys):
    cfg = write(tmp_path, RENEWAL_STEADY.replace(
        "t_end = 2.0", "t_end = 2.0\nm_tol = 1e-13"))
    out = tmp_path / "out"
    code = main(["renewal-decay", "--config", str(cfg), "--out", str(out)])
    assert code == 3
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "invariant-violation"


def test_contraction_run(tmp_path):
    cfg = write(tmp_path, CONTRACTION)
    out = tmp_path / "out"
    assert main(["contraction", "--config", str(cfg), "--out", str(out)]) == 0
    rows = (out / "contraction.csv").read_text().splitlines()[2:]
    d = np.array([float(r.split(",")[1]) for r in rows])
    assert np.all(d[1:] <= d[:-1] + 1e-12 * d[0])


def test_claw_converge_run_and_determinism(tmp_path):
    cfg = write(tmp_path, CLAW_SMALL)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["claw-converge", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["claw-converge", "--config", str(cfg), "--out", str(out2)]) == 0
    for name in ("ladder.csv", "reference.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    ladder = (out1 / "ladder.csv").read_text().splitlines()
    assert ladder[1] == "h,error"
    errs = [float(r.split(",")[1]) for r in ladder[2:]]
    assert errs[0] > errs[-1]


def test_euler_weak_strong_run(tmp_path):
    cfg = write(tmp_path, EULER_SMALL)
    out = tmp_path / "out"
    assert main(["euler-weak-strong", "--config", str(cfg), "--out", str(out)]) == 0
    for name in ("strong_trajectory.csv", "gronwall_32.csv", "gronwall_64.csv"):
        assert (out / name).exists()
    rows = (out / "gronwall_32.csv").read_text().splitlines()
    assert rows[1] == "t,E_rel,bound,pass"
    assert all(r.endswith(",1") for r in rows[2:])


def test_io_error_exit4(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    cfg = write(tmp_path, CONTRACTION)
    code = main(["contraction", "--config", str(cfg),
                 "--out", str(blocker / "sub")])
    assert code == 4
    assert json.loads(capsys.readouterr().err)["error"] == "io-error"


def test_seeded_random_data(tmp_path):
    cfg = write(tmp_path, CONTRACTION.replace("u0 = sin", "u0 = random"))
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["contraction", "--config", str(cfg), "--out", str(out1),
                 "--seed", "7"]) == 0
    assert main(["contraction", "--config", str(cfg), "--out", str(out2),
                 "--seed", "7"]) == 0
    assert (out1 / "contraction.csv").read_bytes() == \
        (out2 / "contraction.csv").read_bytes()


def test_random_without_seed_rejected(tmp_path, capsys):
    cfg = write(tmp_path, CONTRACTION.replace("u0 = sin", "u0 = random"))
    assert main(["contraction", "--config", str(cfg),
                 "--out", str(tmp_path / "out")]) == 2


@pytest.mark.skipif(__import__("shutil").which("entropy-lab") is None,
                    reason="console script not on PATH")
def test_console_script(tmp_path):
    import subprocess

    proc = subprocess.run(["entropy-lab"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "renewal-decay" in proc.stdout


def test_renewal_table_inputs(tmp_path):
    x = np.linspace(0, 12, 600)
    birth = tmp_path / "birth.csv"
    birth.write_text("\n".join(f"{a},{2.0 * np.exp(-a)}" for a in x))
    init = tmp_path / "init.csv"
    init.write_text("\n".join(f"{a},{np.exp(-a)}" for a in np.linspace(0, 20, 400)))
    cfg = write(tmp_path, f"""
[birth]
kind = table
table = {birth}

[grid]
x_max = 24.0
n = 2400

[time]
t_end = 1.0
m_tol = 0.05

[init]
kind = table
table = {init}
""")
    out = tmp_path / "out"
    assert main(["renewal-decay", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "decay.csv").exists()


def test_timestamps_flag_adds_comment(tmp_path):
    cfg = write(tmp_path, CONTRACTION)
    out = tmp_path / "out"
    assert main(["contraction", "--config", str(cfg), "--out", str(out),
                 "--timestamps"]) == 0
    lines = (out / "contraction.csv").read_text().splitlines()
    assert lines[1].startswith("# generated: ")


def test_young_measure_run(tmp_path):
    cfg = write(tmp_path, """
[claw]
n_x = 256
t_end = 0.6
viscosity_ladder = 16 64
n_snapshots = 16
flux = burgers
u0 = sin

[young]
bins = 32
truncation_radius = 2.0
n_x_coarse = 8
n_t_coarse = 4
""")
    out = tmp_path / "out"
    assert main(["young-measure", "--config", str(cfg), "--out", str(out)]) == 0
    m = (out / "measure.csv").read_text().splitlines()
    assert m[1] == "cell_x,cell_t,bin_lo,bin_hi,weight"
    assert len(m) == 2 + 8 * 4 * 32
    side = (out / "concentration.csv").read_text().splitlines()
    assert side[1] == "cell_x,cell_t,m1,w_plus,w_minus"
