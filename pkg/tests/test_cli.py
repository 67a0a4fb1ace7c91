import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from snakesim.calibration import mocap_from_shapes, write_mocap_csv
from snakesim.cli import main, read_calibration_csv, read_cot_csv, read_sweep_csv
from snakesim.dynamics import (
    DissipationParams,
    integrate_motion_trajectory,
    read_step_energies_csv,
    read_trajectory_csv,
)
from snakesim.analysis import (
    PowerLog,
    cost_of_transport,
    read_matrix_csv,
    write_displacements_file,
    write_power_csv,
)
from snakesim.errors import NoConvergence
from snakesim.optimize import DISSIPATION_COEFFICIENT_GRID, read_report_csv
from snakesim.shapespace import GaitEllipse, gait_to_shape_sequence, read_gait_file, write_gait_file


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def gait_file(tmp_path):
    path = tmp_path / "gait.txt"
    write_gait_file(path, GaitEllipse(1.0, 0.0, 0.0, 0.0, 3.0, 1.0), 12, 6, 0.92)
    return str(path)


@pytest.fixture
def mocap_file(tmp_path):
    cycle = gait_to_shape_sequence(GaitEllipse(1.0, 0.0, 0.0, 0.0, 3.0, 1.0), 16, 6, 0.92)
    params = DissipationParams.uniform(1.38, 7, 0.3)
    traj = integrate_motion_trajectory(cycle + [cycle[0]], params)
    path = tmp_path / "mocap.csv"
    write_mocap_csv(path, mocap_from_shapes(traj.shapes, np.linspace(0.0, 1.0, len(traj.shapes))))
    return str(path)


class TestSimulate:
    def test_writes_all_outputs(self, tmp_path, capsys, gait_file):
        out = tmp_path / "run"
        code, stdout, _ = run(capsys, "simulate", gait_file, "--out", str(out))
        assert code == 0
        assert "net displacement" in stdout
        shapes = read_trajectory_csv(out / "trajectory.csv")
        assert len(shapes) == 13  # metadata timesteps + closing shape
        energies = read_step_energies_csv(out / "energies.csv")
        assert len(energies) == 12
        ET.parse(out / "trajectory.svg")

    def test_byte_identical_reruns(self, tmp_path, capsys, gait_file):
        for name in ("a", "b"):
            code, _, _ = run(capsys, "simulate", gait_file, "--out", str(tmp_path / name))
            assert code == 0
        for name in ("trajectory.csv", "energies.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_zero_amplitude_com_is_a_point(self, tmp_path, capsys):
        gait_path = tmp_path / "flat.txt"
        write_gait_file(gait_path, GaitEllipse(0.5, 0.0, 0.0, 0.0, 0.0, 1.0), 8, 5, 0.92)
        out = tmp_path / "run"
        code, stdout, _ = run(capsys, "simulate", str(gait_path), "--out", str(out))
        assert code == 0
        shapes = read_trajectory_csv(out / "trajectory.csv")
        for shape in shapes[1:]:
            assert np.array_equal(shape.vertices, shapes[0].vertices)

    def test_isotropic_flag_reports_no_displacement(self, tmp_path, capsys, gait_file):
        code, stdout, _ = run(
            capsys, "simulate", gait_file, "--epsilon", "1.0", "--out", str(tmp_path / "run")
        )
        assert code == 0
        line = next(l for l in stdout.splitlines() if "body lengths" in l)
        body_lengths = float(line.split("(")[1].split()[0])
        assert abs(body_lengths) < 1e-9

    def test_flag_overrides_gait_metadata(self, tmp_path, capsys, gait_file):
        out = tmp_path / "run"
        code, _, _ = run(capsys, "simulate", gait_file, "--timesteps", "8", "--out", str(out))
        assert code == 0
        assert len(read_trajectory_csv(out / "trajectory.csv")) == 9

    def test_flag_overrides_config_file(self, tmp_path, capsys, gait_file):
        config = tmp_path / "run.cfg"
        config.write_text("epsilon = 1.0\n# comment line\n")
        out = tmp_path / "run"
        code, stdout, _ = run(
            capsys, "simulate", gait_file,
            "--config", str(config), "--epsilon", "0.1865", "--out", str(out),
        )
        assert code == 0
        line = next(l for l in stdout.splitlines() if "body lengths" in l)
        assert float(line.split("(")[1].split()[0]) > 1e-3  # anisotropic, so it moves

    def test_parse_errors_exit_2(self, tmp_path, capsys, gait_file):
        code, _, err = run(capsys, "simulate", str(tmp_path / "missing.txt"))
        assert code == 2 and "error" in err
        bad = tmp_path / "bad.txt"
        bad.write_text("not a gait\n")
        code, _, _ = run(capsys, "simulate", str(bad))
        assert code == 2
        config = tmp_path / "bad.cfg"
        config.write_text("no_such_key = 1\n")
        code, _, _ = run(capsys, "simulate", gait_file, "--config", str(config))
        assert code == 2
        code, _, _ = run(capsys, "simulate", gait_file, "--epsilon", "0.0")
        assert code == 2

    def test_out_dir_collision_exits_2(self, tmp_path, capsys, gait_file):
        blocker = tmp_path / "blocked"
        blocker.write_text("")
        code, _, _ = run(capsys, "simulate", gait_file, "--out", str(blocker))
        assert code == 2

    def test_solver_failure_exits_3(self, tmp_path, capsys, gait_file, monkeypatch):
        import snakesim.cli as cli

        def fails(*args, **kwargs):
            raise NoConvergence("timestep 3: synthetic stall")

        monkeypatch.setattr(cli, "simulate_gait", fails)
        code, _, err = run(capsys, "simulate", gait_file, "--out", str(tmp_path / "run"))
        assert code == 3
        assert "solver failed" in err and "timestep 3" in err


class TestOptimize:
    def test_improves_and_round_trips(self, tmp_path, capsys):
        out = tmp_path / "run"
        code, stdout, _ = run(
            capsys, "optimize", "--seed", "3", "--timesteps", "10", "--edges", "5",
            "--max-evals", "25", "--out", str(out),
        )
        assert code == 0
        assert "best loss" in stdout
        history = read_report_csv(out / "report.csv")
        assert min(r.loss for r in history) <= history[0].loss
        best, meta = read_gait_file(out / "gait_optimized.txt")
        assert meta["timesteps"] == 10 and meta["edges"] == 5

    def test_fixed_xi_in_output_file(self, tmp_path, capsys):
        out = tmp_path / "run"
        code, _, _ = run(
            capsys, "optimize", "--seed", "3", "--timesteps", "10", "--edges", "5",
            "--max-evals", "20", "--fixed-xi", "1.25", "--out", str(out),
        )
        assert code == 0
        best, _ = read_gait_file(out / "gait_optimized.txt")
        assert best.xi == 1.25

    def test_c_sweep_emits_grid_table(self, tmp_path, capsys):
        out = tmp_path / "run"
        code, _, _ = run(
            capsys, "optimize", "--seed", "3", "--timesteps", "8", "--edges", "5",
            "--max-evals", "12", "--c-sweep", "--out", str(out),
        )
        assert code == 0
        rows = read_sweep_csv(out / "c_sweep.csv")
        assert [row[0] for row in rows] == list(DISSIPATION_COEFFICIENT_GRID)
        for c, displacement, energy in rows:
            assert np.isfinite(displacement) and np.isfinite(energy)
            assert (out / f"gait_c{c:g}.txt").exists()

    def test_c_sweep_parallel_matches_grid(self, tmp_path, capsys):
        out = tmp_path / "run"
        code, _, _ = run(
            capsys, "optimize", "--seed", "3", "--timesteps", "8", "--edges", "5",
            "--max-evals", "10", "--c-sweep", "--jobs", "2", "--out", str(out),
        )
        assert code == 0
        rows = read_sweep_csv(out / "c_sweep.csv")
        assert [row[0] for row in rows] == list(DISSIPATION_COEFFICIENT_GRID)


class TestCalibrate:
    def test_recovers_epsilon_and_emits_sweep(self, tmp_path, capsys, mocap_file):
        out = tmp_path / "run"
        code, stdout, _ = run(capsys, "calibrate", mocap_file, "--out", str(out))
        assert code == 0
        line = next(l for l in stdout.splitlines() if l.startswith("fitted epsilon"))
        fitted = float(line.split("=")[1].split()[0])
        assert abs(fitted - 0.3) < 1e-3
        evaluations = read_calibration_csv(out / "calibration.csv")
        assert len(evaluations) >= 3
        assert all(eps <= 1.0 for eps, _, _ in evaluations)
        ET.parse(out / "calibration.svg")


class TestResim:
    def test_self_consistency(self, tmp_path, capsys, mocap_file):
        out = tmp_path / "run"
        code, stdout, _ = run(
            capsys, "resim", mocap_file, "--epsilon", "0.3", "--out", str(out)
        )
        assert code == 0
        line = next(l for l in stdout.splitlines() if "rms deviation" in l)
        rms = float(line.split("=")[1].split()[0])
        assert rms < 1e-8
        shapes = read_trajectory_csv(out / "resim_trajectory.csv")
        assert len(shapes) == 17  # 16-step cycle plus the closing shape
        ET.parse(out / "resim_comparison.svg")


class TestAnalyze:
    def test_identity_classes_give_unit_matrix(self, tmp_path, capsys):
        delta = tmp_path / "delta.txt"
        write_displacements_file(delta, [0.2, 0.3, 0.25])
        out = tmp_path / "run"
        code, stdout, _ = run(
            capsys, "analyze", f"Exp={delta}", f"Sim={delta}", "--out", str(out)
        )
        assert code == 0
        xi, _ = read_matrix_csv(out / "xi_Exp_Sim.csv")
        assert np.array_equal(xi, np.ones((3, 3)))
        ET.parse(out / "xi_Exp_Sim.svg")
        d, _ = read_matrix_csv(out / "delta_Exp.csv")
        assert d[0, 1] == pytest.approx(0.2 / 0.3)

    def test_swapped_classes_invert_quotients(self, tmp_path, capsys):
        exp = tmp_path / "exp.txt"
        sim = tmp_path / "sim.txt"
        write_displacements_file(exp, [0.2, 0.3, 0.25])
        write_displacements_file(sim, [0.22, 0.28, 0.3])
        code, _, _ = run(
            capsys, "analyze", f"Exp={exp}", f"Sim={sim}", "--out", str(tmp_path / "ab")
        )
        assert code == 0
        code, _, _ = run(
            capsys, "analyze", f"Sim={sim}", f"Exp={exp}", "--out", str(tmp_path / "ba")
        )
        assert code == 0
        xi_ab, _ = read_matrix_csv(tmp_path / "ab" / "xi_Exp_Sim.csv")
        xi_ba, _ = read_matrix_csv(tmp_path / "ba" / "xi_Sim_Exp.csv")
        assert np.allclose(xi_ab, 1.0 / xi_ba)

    def test_transport_cost_table(self, tmp_path, capsys):
        delta = tmp_path / "delta.txt"
        write_displacements_file(delta, [0.2, 0.3])
        power = tmp_path / "power.csv"
        write_power_csv(power, PowerLog(np.array([0.0, 1.0]), np.array([4.0, 6.0])))
        out = tmp_path / "run"
        code, stdout, _ = run(
            capsys, "analyze", f"Exp={delta}",
            "--power", str(power), "--duration", "5.0", "--out", str(out),
        )
        assert code == 0
        rows = read_cot_csv(out / "cot.csv")
        assert len(rows) == 1
        label, mean_disp, velocity, cot = rows[0]
        assert label == "Exp"
        assert mean_disp == pytest.approx(0.25)
        assert velocity == pytest.approx(0.05)
        assert cot == pytest.approx(cost_of_transport(5.0, 1.38, 9.81, 0.05))

    def test_bad_inputs_exit_2(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)  # default --out is the working directory
        delta = tmp_path / "delta.txt"
        write_displacements_file(delta, [0.2, 0.3])
        code, _, _ = run(capsys, "analyze", "Exp" + str(delta))  # missing '='
        assert code == 2
        code, _, _ = run(capsys, "analyze", f"Measured={delta}")  # unknown label
        assert code == 2
        power = tmp_path / "power.csv"
        write_power_csv(power, PowerLog(np.array([0.0]), np.array([4.0])))
        code, _, _ = run(capsys, "analyze", f"Exp={delta}", "--power", str(power))
        assert code == 2  # --duration missing


class TestGaitSample:
    def test_deterministic_file(self, tmp_path, capsys):
        for name in ("a", "b"):
            code, stdout, _ = run(capsys, "gait-sample", "--seed", "9", "--out", str(tmp_path / name))
            assert code == 0
            assert "sigma=" in stdout
        assert (
            (tmp_path / "a" / "gait_seed9.txt").read_bytes()
            == (tmp_path / "b" / "gait_seed9.txt").read_bytes()
        )
        gait, meta = read_gait_file(tmp_path / "a" / "gait_seed9.txt")
        assert meta["timesteps"] == 50 and meta["edges"] == 11

    def test_module_entry_point(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "snakesim", "gait-sample", "--seed", "1", "--out", str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert (tmp_path / "gait_seed1.txt").exists()
