import csv
import math
import subprocess
import sys

import pytest

from dickemirror.cli import main
from dickemirror.report import read_manifest

FAST = ["--cutoff-field", "14", "--cutoff-mirror", "14", "--steps", "12", "--tmax", "20"]


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out-dir", str(out)])
    return code, out, read_manifest(out / "manifest.txt")


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_fig2_writes_series_tl_and_manifest(tmp_path):
    code, out, man = run(tmp_path, "fig2", "--J-list", "2,3", *FAST, "--cutoff-tol", "1")
    assert code == 0
    for name in ("occupation_J2.csv", "occupation_J3.csv", "occupation_TL.csv", "convergence.csv",
                 "plot_fig2.py"):
        assert (out / name).exists()
        assert name in man["files"]
    assert rows(out / "occupation_J2.csv")[0].keys() == {"t", "value", "label"}
    assert man["status"] == "ok"
    assert "g0_source" in man and "J_list_source" in man
    assert man["derived.lambda_c"] == "0.5"


def test_fig2_empty_J_list_gives_only_tl(tmp_path):
    code, out, man = run(tmp_path, "fig2", "--J-list", "", *FAST)
    assert code == 0
    assert sorted(p.name for p in out.glob("occupation_*.csv")) == ["occupation_TL.csv"]


def test_fig2_refuses_normal_phase(tmp_path, capsys):
    code, out, man = run(tmp_path, "fig2", "--lambda", "0.4", *FAST)
    assert code == 2
    err = capsys.readouterr().err
    assert "lambda_c=0.5" in err and "mu=1.5625" in err
    assert man["status"] == "failed" and man["exit_code"] == "2"


def test_cutoff_failure_exits_3_after_writing(tmp_path):
    code, out, man = run(tmp_path, "fig2", "--J-list", "2", *FAST, "--cutoff-tol", "1e-30")
    assert code == 3
    assert (out / "occupation_J2.csv").exists()
    assert "error" in man


def test_fig3_single_J(tmp_path):
    code, out, man = run(tmp_path, "fig3", "--J-list", "3", *FAST, "--cutoff-tol", "1")
    assert code == 0
    assert [p.name for p in out.glob("entropy_J*.csv")] == ["entropy_J3.csv"]
    summary = rows(out / "entropy_summary.csv")
    assert len(summary) == 1 and float(summary[0]["entropy_t0"]) < 1e-10


def test_determinism_byte_identical(tmp_path):
    args = ["fig2", "--J-list", "2", *FAST, "--cutoff-tol", "1"]
    _, a, _ = run(tmp_path, *args, name="a")
    _, b, _ = run(tmp_path, *args, name="b")
    for name in ("occupation_J2.csv", "occupation_TL.csv", "convergence.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "p.txt"
    cfg.write_text("lambda=0.7\nJ=2\ncutoff_field=12\n")
    code, _, man = run(tmp_path, "ground", "--config", str(cfg), "--lambda", "0.65", "--cutoff-tol", "1")
    assert code == 0
    assert man["lambda"] == "0.65"
    assert man["J"] == "2.0"
    assert man["cutoff_field"] == "12"


def test_unknown_config_key_refused(tmp_path):
    cfg = tmp_path / "p.txt"
    cfg.write_text("lamda=0.7\n")
    code, _, man = run(tmp_path, "ground", "--config", str(cfg))
    assert code == 2
    assert "unknown parameter" in man["error"]


def test_missing_config_is_io_error(tmp_path):
    code, _, man = run(tmp_path, "ground", "--config", str(tmp_path / "nope.txt"))
    assert code == 4
    assert man["status"] == "failed"


def test_unwritable_out_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["ground", "--J", "1", "--out-dir", str(blocker / "sub")]) == 4


def test_phase_scan_tl_kink(tmp_path):
    grid = "0.45,0.5,0.55,0.6"
    code, out, _ = run(tmp_path, "phase-scan", "--lambda-grid", grid, "--J", "2", *FAST,
                       "--cutoff-tol", "1")
    assert code == 0
    table = rows(out / "phase_scan.csv")
    tl = [float(r["peak_occupation_TL"]) for r in table]
    assert tl[:2] == [0.0, 0.0] and 0 < tl[2] < tl[3]
    assert math.isnan(float(table[0]["Omega"]))
    p06 = 4 * (0.2 * 0.36 * (1 - (1 / 1.44) ** 2)) ** 2 / 0.01
    assert tl[3] == pytest.approx(p06, rel=1e-12)


def test_phase_scan_single_point(tmp_path):
    code, out, _ = run(tmp_path, "phase-scan", "--lambda-grid", "0.7", "--J", "1", *FAST,
                       "--cutoff-tol", "1")
    assert code == 0
    assert len(rows(out / "phase_scan.csv")) == 1


def test_classical_kappa_manifest(tmp_path):
    code, out, man = run(tmp_path, "classical", "--kappa", "0.2", "--J", "1e5", "--tmax", "10")
    assert code == 0
    assert float(man["lambda_c_kappa"]) == pytest.approx(0.509902, abs=1e-6)
    assert len(rows(out / "fixed_points.csv")) == 2
    assert rows(out / "trajectory.csv")


def test_classical_flat_from_origin_below_transition(tmp_path):
    code, out, man = run(tmp_path, "classical", "--lambda", "0.4", "--initial", "origin", "--tmax", "20")
    assert code == 0
    traj = rows(out / "trajectory.csv")
    assert all(float(r[k]) == 0.0 for r in traj for k in ("q1", "q2", "q3"))
    assert float(man["drive"]) == 0.0


def test_classical_drive_identity(tmp_path):
    code, _, man = run(tmp_path, "classical", "--J", "1e5", "--tmax", "5")
    assert code == 0
    omega = -(0.2 * 0.36) * (1 - (1 / 1.44) ** 2)
    assert float(man["drive"]) == pytest.approx(math.sqrt(2) * 0.1 * abs(omega), rel=1e-12)


def test_classical_bad_initial(tmp_path):
    code, _, _ = run(tmp_path, "classical", "--initial", "1,2,3")
    assert code == 2


def test_evolve_mirror_matches_tl(tmp_path):
    code, out, _ = run(tmp_path, "evolve", "--hamiltonian", "mirror", "--cutoff-mirror", "40",
                       "--steps", "9")
    assert code == 0
    got = [float(r["value"]) for r in rows(out / "occupation.csv")]
    ref = [float(r["value"]) for r in rows(out / "occupation_TL.csv")]
    assert max(abs(a - b) for a, b in zip(got, ref)) < 1e-9


def test_plot_flag_renders_png(tmp_path):
    pytest.importorskip("matplotlib")
    code, out, man = run(tmp_path, "fig2", "--J-list", "2", *FAST, "--cutoff-tol", "1", "--plot")
    assert code == 0
    assert (out / "fig2.png").stat().st_size > 0
    assert "fig2.png" in man["files"]


def test_emitted_plot_script_runs(tmp_path):
    pytest.importorskip("matplotlib")
    code, out, _ = run(tmp_path, "fig3", "--J-list", "2", *FAST, "--cutoff-tol", "1")
    assert code == 0
    subprocess.run([sys.executable, "plot_fig3.py", "fig.png"], cwd=out, check=True)
    assert (out / "fig.png").stat().st_size > 0
