import numpy as np
import pytest

from snakesim.calibration import (
    AnisotropyFit,
    ComCurve,
    MocapTrajectory,
    com_curve,
    extract_shapes,
    fit_anisotropy,
    mocap_from_shapes,
    read_mocap_csv,
    read_weights_file,
    resimulate,
    rms_error,
    write_mocap_csv,
    write_weights_file,
)
from snakesim.dynamics import DissipationParams, geometric_momentum, integrate_motion_trajectory
from snakesim.errors import (
    EmptyCurve,
    FileFormatError,
    InconsistentMarkerCount,
    InvalidAnisotropy,
    InvalidWeight,
    NonMonotoneWarning,
)
from snakesim.shapespace import GaitEllipse, gait_to_shape_sequence

BODY_LENGTH = 0.92
TOTAL_MASS = 1.38


def synthetic_mocap(epsilon, gait=None, timesteps=30, edges=9):
    """A marker recording produced by the simulator itself."""
    if gait is None:
        gait = GaitEllipse(sigma=1.0, xc=0.0, yc=0.0, theta=0.0, a=3.0, xi=1.0)
    cycle = gait_to_shape_sequence(gait, timesteps, edges, BODY_LENGTH)
    params = DissipationParams.uniform(TOTAL_MASS, edges + 1, epsilon)
    traj = integrate_motion_trajectory(cycle + [cycle[0]], params)
    times = np.linspace(0.0, 1.0, len(traj.shapes))
    return mocap_from_shapes(traj.shapes, times), params


class TestExtractShapes:
    def test_translating_rod_keeps_shape_class(self):
        base = np.array([[0.0, 0.0], [0.3, 0.0], [0.6, 0.0]])
        frames = np.stack([base + [0.1 * t, 0.05 * t] for t in range(4)])
        shapes = extract_shapes(MocapTrajectory(np.arange(4.0), frames))
        for t, shape in enumerate(shapes):
            assert np.allclose(shape.tangents, [[1, 0, 0]] * 3)
            assert np.allclose(shape.vertices[0, :2], [0.1 * t, 0.05 * t])

    def test_round_trip_through_marker_frames(self):
        mocap, params = synthetic_mocap(0.3, timesteps=10, edges=5)
        shapes = extract_shapes(mocap)
        for frame, shape in zip(mocap.frames, shapes):
            assert np.array_equal(shape.vertices[:, :2], frame)
            assert np.all(shape.vertices[:, 2] == 0.0)

    def test_downsampling_keeps_endpoints(self):
        rng = np.random.default_rng(30)
        frames = rng.normal(size=(150, 4, 2)).cumsum(axis=0) * 0.01 + [[0, 0], [0.3, 0], [0.6, 0], [0.9, 0]]
        mocap = MocapTrajectory(np.arange(150.0), frames)
        shapes = extract_shapes(mocap, target_steps=50)
        assert len(shapes) == 50
        assert np.array_equal(shapes[0].vertices[:, :2], frames[0])
        assert np.array_equal(shapes[-1].vertices[:, :2], frames[-1])

    def test_single_marker_rejected(self):
        mocap = MocapTrajectory(np.arange(3.0), np.zeros((3, 1, 2)))
        with pytest.raises(InconsistentMarkerCount):
            extract_shapes(mocap)

    def test_constructor_validation(self):
        with pytest.raises(InconsistentMarkerCount):
            MocapTrajectory(np.arange(2.0), np.zeros((2, 3)))
        with pytest.raises(InconsistentMarkerCount):
            MocapTrajectory(np.arange(3.0), np.zeros((2, 3, 2)))
        with pytest.raises(FileFormatError):
            MocapTrajectory(np.array([0.0, 0.0]), np.zeros((2, 3, 2)))


class TestResimulate:
    def test_self_consistency(self):
        mocap, params = synthetic_mocap(0.25)
        traj = resimulate(mocap, params)
        source = com_curve(mocap, params.weights)
        redone = com_curve(traj, params.weights, times=mocap.times)
        assert np.max(np.linalg.norm(source.positions - redone.positions, axis=1)) < 1e-8 * BODY_LENGTH

    def test_motionless_markers_stay_put(self):
        frame = np.array([[0.0, 0.0], [0.3, 0.1], [0.5, 0.3]])
        mocap = MocapTrajectory(np.arange(5.0), np.stack([frame] * 5))
        params = DissipationParams.uniform(TOTAL_MASS, 3, 0.4)
        traj = resimulate(mocap, params)
        for shape in traj.shapes:
            assert np.max(np.abs(shape.vertices[:, :2] - frame)) < 1e-12
        assert np.all(traj.step_energies == 0.0)

    def test_noisy_markers_still_solve_to_tolerance(self):
        rng = np.random.default_rng(31)
        mocap, params = synthetic_mocap(0.3, timesteps=20, edges=9)
        noisy = MocapTrajectory(mocap.times, mocap.frames + rng.normal(scale=1e-3, size=mocap.frames.shape))
        traj = resimulate(noisy, params)
        for prev, nxt in zip(traj.shapes, traj.shapes[1:]):
            mu = geometric_momentum(prev, nxt, params)
            residual = np.array([mu[2], mu[3], mu[4]])
            scale = params.weights.sum() * nxt.polyline_length
            assert np.linalg.norm(residual) <= 1e-10 * scale


class TestComCurve:
    def test_two_markers_midpoint(self):
        frames = np.array([[[0.0, 0.0], [2.0, 0.0]], [[0.0, 2.0], [2.0, 2.0]]])
        curve = com_curve(MocapTrajectory(np.arange(2.0), frames), [1.0, 1.0])
        assert np.allclose(curve.positions, [[1.0, 0.0], [1.0, 2.0]])

    def test_weighted_mean(self):
        frames = np.array([[[0.0, 0.0], [4.0, 0.0]]])
        curve = com_curve(MocapTrajectory(np.array([0.0]), frames), [1.0, 3.0])
        assert np.allclose(curve.positions, [[3.0, 0.0]])

    def test_matches_trajectory_com_path(self):
        mocap, params = synthetic_mocap(0.3, timesteps=8, edges=5)
        traj = resimulate(mocap, params)
        curve = com_curve(traj, params.weights, times=mocap.times)
        assert np.allclose(curve.positions, traj.com_path(params.weights)[:, :2])
        assert np.array_equal(curve.times, mocap.times)

    def test_rejects_bad_weights(self):
        frames = np.zeros((2, 3, 2))
        mocap = MocapTrajectory(np.arange(2.0), frames)
        with pytest.raises(InvalidWeight):
            com_curve(mocap, [1.0, -1.0, 1.0])
        with pytest.raises(InconsistentMarkerCount):
            com_curve(mocap, [1.0, 1.0])

    def test_displacement_magnitudes(self):
        curve = ComCurve(np.arange(3.0), np.array([[0.0, 0.0], [3.0, 4.0], [6.0, 8.0]]))
        assert np.allclose(curve.displacement_magnitudes, [0.0, 5.0, 10.0])
        assert curve.final_displacement == 10.0


class TestRmsError:
    def test_identical_curves(self):
        curve = ComCurve(np.arange(4.0), np.random.default_rng(32).normal(size=(4, 2)))
        assert rms_error(curve, curve) == 0.0

    def test_constant_offset(self):
        rng = np.random.default_rng(33)
        a = ComCurve(np.arange(5.0), rng.normal(size=(5, 2)))
        d = 0.37
        b = ComCurve(a.times, a.positions + d * np.array([0.6, 0.8]))
        assert rms_error(a, b) == pytest.approx(d)

    def test_single_frame_distance(self):
        a = ComCurve(np.array([0.0]), np.array([[0.0, 0.0]]))
        b = ComCurve(np.array([0.0]), np.array([[3.0, 0.0]]))
        assert rms_error(a, b) == pytest.approx(3.0)

    def test_metric_properties(self):
        rng = np.random.default_rng(34)
        times = np.arange(6.0)
        for _ in range(20):
            a, b, c = (ComCurve(times, rng.normal(size=(6, 2))) for _ in range(3))
            assert abs(rms_error(a, b) - rms_error(b, a)) < 1e-12
            assert rms_error(a, c) <= rms_error(a, b) + rms_error(b, c) + 1e-12

    def test_resampling_is_linear(self):
        # a straight-line CoM sampled at two rates compares as equal
        fine_t = np.linspace(0.0, 1.0, 120)
        coarse_t = np.linspace(0.0, 1.0, 50)
        direction = np.array([0.3, -0.1])
        fine = ComCurve(fine_t, np.outer(fine_t, direction))
        coarse = ComCurve(coarse_t, np.outer(coarse_t, direction))
        assert rms_error(fine, coarse) < 1e-12

    def test_empty_curve_rejected(self):
        empty = ComCurve(np.array([]), np.zeros((0, 2)))
        full = ComCurve(np.array([0.0]), np.zeros((1, 2)))
        with pytest.raises(EmptyCurve):
            rms_error(empty, full)


class TestFitAnisotropy:
    def test_recovers_published_average_ratio(self):
        mocap, params = synthetic_mocap(0.1865)
        fit = fit_anisotropy(mocap, params.weights)
        assert abs(fit.epsilon - 0.1865) < 1e-3
        # noise-free data: the best candidate's curve error is tiny relative
        # to the ~0.23 m traveled
        assert fit.rms < 1e-5

    def test_truth_at_bound_is_recovered(self):
        mocap, params = synthetic_mocap(0.25)
        fit = fit_anisotropy(mocap, params.weights, bounds=(0.25, 1.0))
        assert abs(fit.epsilon - 0.25) < 1e-3

    def test_gait_independence(self):
        gaits = [
            GaitEllipse(sigma=1.0, xc=0.0, yc=0.0, theta=0.0, a=3.0, xi=1.0),
            GaitEllipse(sigma=0.6, xc=0.5, yc=-0.3, theta=0.8, a=2.0, xi=1.4),
        ]
        for gait in gaits:
            mocap, params = synthetic_mocap(0.3, gait=gait)
            fit = fit_anisotropy(mocap, params.weights)
            assert abs(fit.epsilon - 0.3) < 2e-3

    def test_unpacks_as_pair(self):
        fit = AnisotropyFit(0.25, 1e-9, [(0.25, 1e-9, 0.1)])
        epsilon, rms = fit
        assert (epsilon, rms) == (0.25, 1e-9)

    def test_invalid_bounds(self):
        mocap, params = synthetic_mocap(0.3, timesteps=6, edges=4)
        for bounds in ((0.0, 1.0), (0.5, 0.2), (0.1, 1.5)):
            with pytest.raises(InvalidAnisotropy):
                fit_anisotropy(mocap, params.weights, bounds=bounds)

    def test_non_monotone_falls_back_to_rms_search(self, monkeypatch):
        import snakesim.calibration as cal

        def synthetic(mocap, weights, exp_curve, epsilon):
            # RMS has its minimum at 0.3 while displacement is V-shaped: the
            # monotonicity check must fail and hand over to the RMS search.
            return epsilon, (epsilon - 0.3) ** 2, 0.1 + abs(epsilon - 0.4)

        monkeypatch.setattr(cal, "_evaluate", synthetic)
        mocap, params = synthetic_mocap(0.3, timesteps=6, edges=4)
        with pytest.warns(NonMonotoneWarning):
            fit = cal.fit_anisotropy(mocap, params.weights)
        assert abs(fit.epsilon - 0.3) < 1e-3


class TestFileFormats:
    def test_mocap_round_trip(self, tmp_path):
        mocap, _ = synthetic_mocap(0.3, timesteps=6, edges=4)
        path = tmp_path / "mocap.csv"
        write_mocap_csv(path, mocap)
        back = read_mocap_csv(path)
        assert np.array_equal(back.times, mocap.times)
        assert np.array_equal(back.frames, mocap.frames)

    def test_header_must_name_time_and_marker_pairs(self, tmp_path):
        bad_headers = [
            "t,m0_x,m0_y",  # wrong time column name
            "time_s,m0_x",  # dangling coordinate
            "time_s",  # no markers at all
        ]
        for text in bad_headers:
            path = tmp_path / "bad.csv"
            path.write_text(text + "\n0.0,0.0,0.0\n")
            with pytest.raises(FileFormatError):
                read_mocap_csv(path)

    def test_rejects_ragged_and_non_numeric_rows(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("time_s,m0_x,m0_y\n0.0,1.0\n")
        with pytest.raises(FileFormatError):
            read_mocap_csv(path)
        path.write_text("time_s,m0_x,m0_y\n0.0,1.0,spam\n")
        with pytest.raises(FileFormatError):
            read_mocap_csv(path)
        path.write_text("time_s,m0_x,m0_y\n")
        with pytest.raises(FileFormatError):
            read_mocap_csv(path)

    def test_weights_round_trip(self, tmp_path):
        path = tmp_path / "weights.txt"
        weights = np.array([0.115, 0.115, 0.12, 0.11])
        write_weights_file(path, weights)
        assert np.array_equal(read_weights_file(path), weights)

    def test_weights_comments_and_errors(self, tmp_path):
        path = tmp_path / "weights.txt"
        path.write_text("# segment masses in kg\n0.115\n\n0.2\n")
        assert np.array_equal(read_weights_file(path), [0.115, 0.2])
        path.write_text("0.1\nnot-a-weight\n")
        with pytest.raises(FileFormatError):
            read_weights_file(path)
        path.write_text("# nothing\n")
        with pytest.raises(FileFormatError):
            read_weights_file(path)
