"""Random gait sampling and derivative-free gait optimization.

The objective is -displacement + c * dissipated energy, both taken from the
same forward simulation of a closed gait cycle.  The forward map goes through
a Newton solve per timestep, so the search is derivative-free: Nelder-Mead
over box-normalized parameters, with bounds enforced by clipping at
evaluation time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .dynamics import DissipationParams, Trajectory, integrate_motion_trajectory, total_energy
from .errors import FileFormatError, NonFiniteLoss, ShapeMismatch
from .shapespace import GaitEllipse, gait_to_shape_sequence

__all__ = [
    "GaitBounds",
    "SimConfig",
    "ObjectiveConfig",
    "EvaluationRecord",
    "DEFAULT_BOUNDS",
    "DISSIPATION_COEFFICIENT_GRID",
    "random_gait",
    "simulate_gait",
    "net_displacement",
    "gait_loss",
    "optimize_gait",
    "write_report_csv",
    "read_report_csv",
]

_PARAM_NAMES = ("sigma", "xc", "yc", "theta", "a", "xi")

# study grid for the energy-penalty coefficient
DISSIPATION_COEFFICIENT_GRID = (0.0, 0.5, 1.0, 1.5, 1.7, 2.0, 2.5)

MAX_EVALUATIONS = 500
SIMPLEX_DIAMETER_TOL = 1e-4
_SIMPLEX_SPREAD = 0.1


@dataclass(frozen=True)
class GaitBounds:
    """Closed search intervals for the six ellipse parameters."""

    sigma: tuple[float, float] = (0.2, 1.0)
    xc: tuple[float, float] = (-3.0, 3.0)
    yc: tuple[float, float] = (-3.0, 3.0)
    theta: tuple[float, float] = (0.0, np.pi)
    a: tuple[float, float] = (0.5, 8.0)
    xi: tuple[float, float] = (0.5, 2.0)

    def __post_init__(self):
        for name in _PARAM_NAMES:
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: lower bound {lo} exceeds upper bound {hi}")
        if self.sigma[0] < 0.0 or self.sigma[1] > 1.0:
            raise ValueError(f"sigma bounds must lie in [0, 1], got {self.sigma}")
        if self.a[0] <= 0.0 or self.xi[0] <= 0.0:
            raise ValueError("a and xi lower bounds must be positive")

    def as_arrays(self):
        lo = np.array([getattr(self, n)[0] for n in _PARAM_NAMES])
        hi = np.array([getattr(self, n)[1] for n in _PARAM_NAMES])
        return lo, hi

    def contains(self, gait: GaitEllipse) -> bool:
        lo, hi = self.as_arrays()
        v = _gait_vector(gait)
        return bool(np.all(v >= lo) and np.all(v <= hi))


DEFAULT_BOUNDS = GaitBounds()


@dataclass(frozen=True)
class SimConfig:
    """Discretization of one forward simulation."""

    timesteps: int = 50
    edges: int = 11
    body_length: float = 0.92
    cycles: int = 1

    def __post_init__(self):
        if self.timesteps < 2 or self.edges < 2:
            raise ValueError("need timesteps >= 2 and edges >= 2")
        if self.body_length <= 0 or self.cycles < 1:
            raise ValueError("body_length must be positive and cycles >= 1")

    @property
    def num_vertices(self) -> int:
        return self.edges + 1


@dataclass(frozen=True)
class ObjectiveConfig:
    """Loss settings: energy-penalty coefficient, optional frequency pin, sim setup."""

    params: DissipationParams
    sim: SimConfig = field(default_factory=SimConfig)
    dissipation_coefficient: float = 0.0
    fixed_xi: float | None = None

    def __post_init__(self):
        if self.dissipation_coefficient < 0:
            raise ValueError(
                f"dissipation coefficient must be >= 0, got {self.dissipation_coefficient}"
            )
        if len(self.params.weights) != self.sim.num_vertices:
            raise ShapeMismatch(
                f"{len(self.params.weights)} weights for {self.sim.num_vertices} vertices"
            )


@dataclass(frozen=True)
class EvaluationRecord:
    """One objective evaluation: the gait tried and what it scored."""

    iteration: int
    loss: float
    displacement: float
    energy: float
    gait: GaitEllipse


def _gait_vector(gait: GaitEllipse) -> np.ndarray:
    return np.array([getattr(gait, n) for n in _PARAM_NAMES])


def _gait_from_vector(v) -> GaitEllipse:
    return GaitEllipse(*(float(x) for x in v))


def random_gait(seed: int, bounds: GaitBounds = DEFAULT_BOUNDS) -> GaitEllipse:
    """Uniform sample of the six parameters; deterministic in the seed."""
    lo, hi = bounds.as_arrays()
    rng = np.random.default_rng(seed)
    return _gait_from_vector(rng.uniform(lo, hi))


def simulate_gait(gait: GaitEllipse, sim: SimConfig, params: DissipationParams) -> Trajectory:
    """Integrate `cycles` repetitions of the gait, closing back on the start shape."""
    cycle = gait_to_shape_sequence(gait, sim.timesteps, sim.edges, sim.body_length)
    shapes = cycle * sim.cycles + [cycle[0]]
    return integrate_motion_trajectory(shapes, params)


def evaluate_gait(gait: GaitEllipse, cfg: ObjectiveConfig) -> tuple[float, float, float]:
    """(loss, net displacement, total energy) from one forward simulation."""
    if cfg.fixed_xi is not None:
        gait = gait.with_xi(cfg.fixed_xi)
    traj = simulate_gait(gait, cfg.sim, cfg.params)
    displacement = traj.net_displacement
    energy = total_energy(traj)
    loss = -displacement + cfg.dissipation_coefficient * energy
    return loss, displacement, energy


def net_displacement(gait: GaitEllipse, cfg: ObjectiveConfig) -> float:
    """Magnitude of the net CoM translation over the configured cycles, meters."""
    return evaluate_gait(gait, cfg)[1]


def gait_loss(gait: GaitEllipse, cfg: ObjectiveConfig) -> float:
    """-displacement + c * energy; pins the spatial frequency when configured."""
    return evaluate_gait(gait, cfg)[0]


def optimize_gait(
    seed_gait: GaitEllipse,
    bounds: GaitBounds,
    cfg: ObjectiveConfig,
    max_evaluations: int = MAX_EVALUATIONS,
) -> tuple[GaitEllipse, list[EvaluationRecord]]:
    """Nelder-Mead search from `seed_gait`; returns the best gait and all evaluations.

    The six parameters are normalized to [0, 1] over their bound intervals
    (parameters with zero-width bounds, and the spatial frequency when it is
    pinned, are held fixed).  Out-of-box trial points are clipped at
    evaluation.  The search stops when the simplex diameter falls below 1e-4
    in normalized coordinates or after `max_evaluations` objective calls.
    The returned gait never scores worse than the seed.
    """
    lo, hi = bounds.as_arrays()
    x_seed = np.clip(_gait_vector(seed_gait), lo, hi)
    if cfg.fixed_xi is not None:
        xi_lo, xi_hi = bounds.xi
        if not xi_lo <= cfg.fixed_xi <= xi_hi:
            raise ValueError(
                f"fixed xi {cfg.fixed_xi} outside bounds [{xi_lo}, {xi_hi}]"
            )
        x_seed[_PARAM_NAMES.index("xi")] = cfg.fixed_xi
    width = hi - lo
    free = width > 0
    if cfg.fixed_xi is not None:
        free[_PARAM_NAMES.index("xi")] = False

    history: list[EvaluationRecord] = []

    def decode(u) -> GaitEllipse:
        x = x_seed.copy()
        x[free] = lo[free] + np.clip(u, 0.0, 1.0) * width[free]
        return _gait_from_vector(x)

    def objective(u) -> float:
        gait = decode(u)
        loss, displacement, energy = evaluate_gait(gait, cfg)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"loss {loss} at {gait}", gait=gait)
        history.append(EvaluationRecord(len(history), loss, displacement, energy, gait))
        return loss

    if not np.any(free):
        objective(np.empty(0))
    else:
        u0 = (x_seed[free] - lo[free]) / width[free]
        simplex = [u0]
        for i in range(len(u0)):
            vertex = u0.copy()
            vertex[i] += _SIMPLEX_SPREAD if vertex[i] + _SIMPLEX_SPREAD <= 1.0 else -_SIMPLEX_SPREAD
            simplex.append(vertex)
        minimize(
            objective,
            u0,
            method="Nelder-Mead",
            options={
                "initial_simplex": np.array(simplex),
                "xatol": SIMPLEX_DIAMETER_TOL,
                "fatol": np.inf,
                "maxfev": max_evaluations,
                "disp": False,
            },
        )

    best = min(history, key=lambda rec: rec.loss)
    return best.gait, history


# -- report file ---------------------------------------------------------------

_REPORT_HEADER = ["iteration", "loss", "delta_com", "energy", "sigma", "xc", "yc", "theta", "a", "xi"]


def write_report_csv(path, history: list[EvaluationRecord]):
    """One row per objective evaluation, in evaluation order."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_REPORT_HEADER)
        for rec in history:
            writer.writerow(
                [rec.iteration, repr(rec.loss), repr(rec.displacement), repr(rec.energy)]
                + [repr(float(getattr(rec.gait, n))) for n in _PARAM_NAMES]
            )


def read_report_csv(path) -> list[EvaluationRecord]:
    records = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != _REPORT_HEADER:
            raise FileFormatError(f"{path}: expected header {','.join(_REPORT_HEADER)}")
        for row in reader:
            if not row:
                continue
            try:
                records.append(
                    EvaluationRecord(
                        int(row[0]),
                        float(row[1]),
                        float(row[2]),
                        float(row[3]),
                        GaitEllipse(*(float(v) for v in row[4:10])),
                    )
                )
            except (ValueError, IndexError) as exc:
                raise FileFormatError(f"{path}: bad report row {row!r}") from exc
    return records
