"""Fit the anisotropy ratio against recorded marker trajectories.

The pipeline: marker frames -> positioned shapes -> re-integrated trajectory
under candidate dissipation parameters -> center-of-mass curve -> RMS
distance to the measured curve.  Because net displacement shrinks
monotonically as the anisotropy ratio approaches 1, a bisection on the final
displacement brackets the ratio quickly; the reported fit is the candidate
with the smallest RMS over the whole search history.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import DissipationParams, Trajectory, integrate_motion_trajectory
from .errors import (
    EmptyCurve,
    FileFormatError,
    InconsistentMarkerCount,
    InvalidAnisotropy,
    InvalidWeight,
    NonMonotoneWarning,
)
from .geometry import PositionedShape, tangents_from_vertices

__all__ = [
    "MocapTrajectory",
    "ComCurve",
    "AnisotropyFit",
    "extract_shapes",
    "resimulate",
    "com_curve",
    "rms_error",
    "fit_anisotropy",
    "mocap_from_shapes",
    "read_mocap_csv",
    "write_mocap_csv",
    "read_weights_file",
    "write_weights_file",
]

BISECTION_INTERVAL_TOL = 1e-4
BISECTION_MAX_ITERATIONS = 50
MONOTONE_SLACK = 0.01


@dataclass(frozen=True)
class MocapTrajectory:
    """Time-stamped planar marker positions, one row of markers per frame."""

    times: np.ndarray
    frames: np.ndarray  # (T, N, 2) meters

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        frames = np.asarray(self.frames, dtype=float)
        if frames.ndim != 3 or frames.shape[2] != 2:
            raise InconsistentMarkerCount(
                f"frames must be (T, N, 2), got shape {frames.shape}"
            )
        if len(times) != frames.shape[0]:
            raise InconsistentMarkerCount(
                f"{len(times)} timestamps for {frames.shape[0]} frames"
            )
        if len(times) and np.any(np.diff(times) <= 0):
            raise FileFormatError("timestamps must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "frames", frames)

    @property
    def num_markers(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class ComCurve:
    """Center-of-mass positions over time."""

    times: np.ndarray
    positions: np.ndarray  # (T, 2) meters

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        positions = np.atleast_2d(np.asarray(self.positions, dtype=float))[:, :2]
        if len(times) != len(positions):
            raise EmptyCurve(f"{len(times)} times for {len(positions)} positions")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)

    @property
    def displacement_magnitudes(self) -> np.ndarray:
        """|CoM(t) - CoM(0)| per frame, meters."""
        return np.linalg.norm(self.positions - self.positions[0], axis=1)

    @property
    def final_displacement(self) -> float:
        return float(self.displacement_magnitudes[-1])


@dataclass(frozen=True)
class AnisotropyFit:
    """Best-RMS anisotropy ratio plus the full (epsilon, rms, displacement) history."""

    epsilon: float
    rms: float
    evaluations: list[tuple[float, float, float]]

    def __iter__(self):
        # unpacks as the (epsilon, rms) pair
        return iter((self.epsilon, self.rms))


def extract_shapes(mocap: MocapTrajectory, target_steps: int | None = None) -> list[PositionedShape]:
    """Turn marker frames into positioned shapes (markers become vertices).

    With `target_steps` the frames are uniformly downsampled to that count,
    always keeping the first and last frame.
    """
    if mocap.num_markers < 2:
        raise InconsistentMarkerCount("need at least 2 markers per frame")
    frames = mocap.frames
    if target_steps is not None and target_steps < len(frames):
        idx = np.round(np.linspace(0, len(frames) - 1, target_steps)).astype(int)
        frames = frames[idx]
    shapes = []
    for frame in frames:
        verts = np.zeros((len(frame), 3))
        verts[:, :2] = frame
        shapes.append(PositionedShape(verts, tangents_from_vertices(verts)))
    return shapes


def resimulate(mocap: MocapTrajectory, params: DissipationParams) -> Trajectory:
    """Re-integrate the executed shape sequence from the first measured pose."""
    return integrate_motion_trajectory(extract_shapes(mocap), params)


def com_curve(source, weights, times=None) -> ComCurve:
    """Weighted center-of-mass curve of a Trajectory or a MocapTrajectory."""
    w = np.asarray(weights, dtype=float).ravel()
    if np.any(w <= 0):
        raise InvalidWeight("weights must be strictly positive")
    if isinstance(source, MocapTrajectory):
        if len(w) != source.num_markers:
            raise InconsistentMarkerCount(
                f"{len(w)} weights for {source.num_markers} markers"
            )
        positions = np.einsum("k,tkd->td", w, source.frames) / w.sum()
        return ComCurve(source.times, positions)
    path = source.com_path(w)[:, :2]
    if times is None:
        times = np.arange(len(path), dtype=float)
    return ComCurve(times, path)


def rms_error(a: ComCurve, b: ComCurve) -> float:
    """Root-mean-square distance between two CoM curves, meters.

    Curves of different lengths are aligned by linearly resampling the longer
    one onto the shorter one's time grid.
    """
    if len(a.times) == 0 or len(b.times) == 0:
        raise EmptyCurve("cannot compare empty curves")
    if len(a.times) != len(b.times):
        if len(a.times) > len(b.times):
            a, b = b, a
        resampled = np.column_stack(
            [np.interp(a.times, b.times, b.positions[:, d]) for d in range(2)]
        )
        b = ComCurve(a.times, resampled)
    return float(np.sqrt(np.mean(np.sum((a.positions - b.positions) ** 2, axis=1))))


def _evaluate(mocap, weights, exp_curve, epsilon):
    params = DissipationParams(weights, epsilon)
    traj = resimulate(mocap, params)
    curve = com_curve(traj, weights, times=mocap.times)
    return epsilon, rms_error(curve, exp_curve), curve.final_displacement


def fit_anisotropy(
    exp_mocap: MocapTrajectory,
    weights,
    bounds: tuple[float, float] = (0.01, 1.0),
) -> AnisotropyFit:
    """Fit the anisotropy ratio to a measured trajectory.

    Bisection on the final CoM displacement (monotone in the ratio) samples
    candidates until the bracket is narrower than 1e-4; the returned fit is
    the sampled candidate whose full CoM curve has minimal RMS distance to
    the measurement.  If the sampled displacements are not monotone within a
    1% slack, a NonMonotoneWarning is issued and a golden-section
    minimization of the RMS itself takes over.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not 0.0 < lo < hi <= 1.0:
        raise InvalidAnisotropy(f"need 0 < lo < hi <= 1, got ({lo}, {hi})")
    w = np.asarray(weights, dtype=float).ravel()
    exp_curve = com_curve(exp_mocap, w)
    target = exp_curve.final_displacement

    history = [_evaluate(exp_mocap, w, exp_curve, lo), _evaluate(exp_mocap, w, exp_curve, hi)]
    iterations = 0
    while hi - lo >= BISECTION_INTERVAL_TOL and iterations < BISECTION_MAX_ITERATIONS:
        iterations += 1
        mid = 0.5 * (lo + hi)
        record = _evaluate(exp_mocap, w, exp_curve, mid)
        history.append(record)
        if record[2] > target:
            lo = mid  # still displacing too much: ratio must grow
        else:
            hi = mid

    ordered = sorted(history)
    for (e0, _, d0), (e1, _, d1) in zip(ordered, ordered[1:]):
        if d1 > d0 * (1.0 + MONOTONE_SLACK):
            warnings.warn(
                f"displacement not monotone in the anisotropy ratio between "
                f"{e0:.4g} and {e1:.4g}; falling back to golden-section RMS search",
                NonMonotoneWarning,
            )
            history.extend(
                _golden_section(
                    lambda eps: _evaluate(exp_mocap, w, exp_curve, eps),
                    float(bounds[0]),
                    float(bounds[1]),
                )
            )
            break

    best = min(history, key=lambda rec: rec[1])
    return AnisotropyFit(best[0], best[1], history)


def _golden_section(evaluate, lo, hi, tol=BISECTION_INTERVAL_TOL, max_iterations=60):
    """Bounded golden-section minimization of rec[1]; returns all evaluations."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    rec_c, rec_d = evaluate(c), evaluate(d)
    records = [rec_c, rec_d]
    for _ in range(max_iterations):
        if b - a < tol:
            break
        if rec_c[1] < rec_d[1]:
            b, d, rec_d = d, c, rec_c
            c = b - invphi * (b - a)
            rec_c = evaluate(c)
            records.append(rec_c)
        else:
            a, c, rec_c = c, d, rec_d
            d = a + invphi * (b - a)
            rec_d = evaluate(d)
            records.append(rec_d)
    return records


# -- synthetic data and file formats ------------------------------------------


def mocap_from_shapes(shapes, times=None) -> MocapTrajectory:
    """Package positioned shapes as a marker recording (vertices = markers)."""
    frames = np.stack([s.vertices[:, :2] for s in shapes])
    if times is None:
        times = np.arange(len(shapes), dtype=float)
    return MocapTrajectory(times, frames)


def write_mocap_csv(path, mocap: MocapTrajectory):
    """Header time_s, m0_x, m0_y, ... then one row per frame, meters."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        header = ["time_s"]
        for k in range(mocap.num_markers):
            header += [f"m{k}_x", f"m{k}_y"]
        writer.writerow(header)
        for t, frame in zip(mocap.times, mocap.frames):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in frame.ravel()])


def read_mocap_csv(path) -> MocapTrajectory:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[0].strip() != "time_s" or len(header) < 3 or len(header) % 2 == 0:
            raise FileFormatError(f"{path}: expected header 'time_s, m0_x, m0_y, ...'")
        num_markers = (len(header) - 1) // 2
        times, frames = [], []
        for row in reader:
            if not row:
                continue
            if len(row) != 1 + 2 * num_markers:
                raise FileFormatError(f"{path}: row has {len(row)} fields, expected {1 + 2 * num_markers}")
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise FileFormatError(f"{path}: non-numeric value in row {row!r}") from exc
            times.append(values[0])
            frames.append(np.reshape(values[1:], (num_markers, 2)))
    if not times:
        raise FileFormatError(f"{path}: no data rows")
    return MocapTrajectory(np.array(times), np.stack(frames))


def write_weights_file(path, weights):
    with open(path, "w") as handle:
        for w in np.asarray(weights, dtype=float).ravel():
            handle.write(f"{float(w)!r}\n")


def read_weights_file(path) -> np.ndarray:
    values = []
    with open(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                values.append(float(text))
            except ValueError as exc:
                raise FileFormatError(f"{path}:{line_no}: not a weight: {text!r}") from exc
    if not values:
        raise FileFormatError(f"{path}: no weights found")
    return np.array(values)
