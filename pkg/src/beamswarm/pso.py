"""Box-bounded particle swarm optimiser with fitness-adaptive inertia.

Each particle's inertia weight is interpolated between ``w_min`` and
``w_max`` from where its current fitness sits between the swarm minimum and
the swarm average; particles worse than average coast at ``w_max``.

Swarm state is held as arrays (struct-of-arrays): row ``i`` of every array
belongs to particle ``i``. Randomness is drawn from one stream per
iteration, ``default_rng([seed, t])``, with ``t = 0`` for initialisation;
row ``i`` of each draw is particle ``i``'s substream, so results do not
depend on the order in which the objective is evaluated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

log = logging.getLogger(__name__)

# Per-dimension velocity cap as a fraction of the search width.
VMAX_FRACTION = 0.5


@dataclass(frozen=True)
class PsoParams:
    bounds: tuple[tuple[float, float], ...]
    n_particles: int = 100
    c1: float = 0.2
    c2: float = 0.2
    w_min: float = 0.6
    w_max: float = 0.8
    t_max: int = 50
    fitness_threshold: float = 0.005
    seed: int = 0

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if self.n_particles < 1:
            raise ValueError(f"n_particles must be >= 1, got {self.n_particles}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")
        if len(bounds) < 1:
            raise ValueError("need at least one dimension")
        if not all(lo < hi for lo, hi in bounds):
            raise ValueError(f"every bound needs lower < upper, got {bounds}")
        if not 0 <= self.w_min <= self.w_max:
            raise ValueError(f"need 0 <= w_min <= w_max, got {self.w_min}, {self.w_max}")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("acceleration coefficients must be >= 0")
        if not self.fitness_threshold > 0:
            raise ValueError(f"fitness_threshold must be > 0, got {self.fitness_threshold}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")

    @property
    def dims(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])

    @property
    def v_max(self) -> np.ndarray:
        return VMAX_FRACTION * (self.upper - self.lower)


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_fitness: float
    inertia: float


@dataclass
class SwarmState:
    positions: np.ndarray
    velocities: np.ndarray
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray
    inertia: np.ndarray
    gbest_position: np.ndarray
    gbest_fitness: float = np.inf
    iteration: int = 0
    trace: list = field(default_factory=list)
    nan_evaluations: int = 0

    def particle(self, i: int) -> Particle:
        return Particle(
            self.positions[i].copy(),
            self.velocities[i].copy(),
            self.pbest_positions[i].copy(),
            float(self.pbest_fitness[i]),
            float(self.inertia[i]),
        )


@dataclass
class PsoResult:
    best_position: np.ndarray
    best_fitness: float
    trace: list
    iterations: int
    converged: bool
    nan_evaluations: int = 0


class ObjectiveError(RuntimeError):
    pass


def adaptive_inertia(fit, fit_min, fit_ave, params: PsoParams):
    """Inertia weight for particles with current fitness ``fit``.

    Works on scalars or broadcastable arrays. When the swarm average equals the swarm
    minimum the ratio is undefined and ``w_min`` is returned.
    """
    fit = np.asarray(fit, dtype=float)
    w_lo, w_hi = params.w_min, params.w_max
    spread = np.asarray(fit_ave, dtype=float) - fit_min
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = (fit - fit_min) / spread
    w = np.where(spread > 0, w_lo + (w_hi - w_lo) * ratio, w_lo)
    w = np.where(fit > fit_ave, w_hi, w)
    w = np.where(np.isfinite(fit), w, w_hi)
    w = np.clip(w, w_lo, w_hi)
    return float(w) if w.ndim == 0 else w


def update_velocity(position, velocity, pbest, gbest, w, params: PsoParams, r1, r2):
    """Inertia + cognitive + social velocity update, capped at ``+-v_max``.

    ``w`` is per particle (shape ``(n,)``) or a scalar; ``r1``/``r2`` are
    uniform draws shaped like ``position``.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    v = w * velocity + params.c1 * r1 * (pbest - position) + params.c2 * r2 * (gbest - position)
    vmax = params.v_max
    return np.clip(v, -vmax, vmax)


def update_position(position, velocity, bounds):
    """Step by ``velocity`` then clamp into ``bounds``."""
    bounds = np.asarray(bounds, dtype=float)
    return np.clip(position + velocity, bounds[:, 0], bounds[:, 1])


def update_bests(state: SwarmState, fitness) -> SwarmState:
    """Fold one round of fitness values into the personal and global bests.

    A best only moves on strict improvement. Non-finite fitness ranks below
    every finite value and is counted in ``state.nan_evaluations``. Ties for
    the global best go to the lowest particle index.
    """
    fitness = np.asarray(fitness, dtype=float)
    bad = ~np.isfinite(fitness)
    state.nan_evaluations += int(np.count_nonzero(np.isnan(fitness)))
    ranked = np.where(bad, np.inf, fitness)
    better = ranked < state.pbest_fitness
    state.pbest_positions[better] = state.positions[better]
    state.pbest_fitness[better] = ranked[better]
    best = int(np.argmin(state.pbest_fitness))
    if state.pbest_fitness[best] < state.gbest_fitness:
        state.gbest_fitness = float(state.pbest_fitness[best])
        state.gbest_position = state.pbest_positions[best].copy()
    return state


def _draw_stream(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng([seed, t])


def init_swarm(params: PsoParams) -> SwarmState:
    """Uniform positions inside the box, uniform velocities inside ``+-v_max``."""
    n, m = params.n_particles, params.dims
    rng = _draw_stream(params.seed, 0)
    lo, hi, vmax = params.lower, params.upper, params.v_max
    positions = lo + rng.random((n, m)) * (hi - lo)
    velocities = -vmax + rng.random((n, m)) * (2 * vmax)
    return SwarmState(
        positions=positions,
        velocities=velocities,
        pbest_positions=positions.copy(),
        pbest_fitness=np.full(n, np.inf),
        inertia=np.full(n, params.w_max),
        gbest_position=positions[0].copy(),
    )


def _evaluate(objective, positions, vectorized):
    if vectorized:
        return np.asarray(objective(positions), dtype=float)
    return np.array([objective(p) for p in positions], dtype=float)


def run(
    objective: Callable[[np.ndarray], float] | Callable[[np.ndarray], Sequence[float]],
    params: PsoParams,
    vectorized: bool = False,
) -> PsoResult:
    """Minimise ``objective`` over the box in ``params.bounds``.

    Each iteration evaluates the swarm, folds the results into the bests,
    stops if the global best meets ``fitness_threshold``, and otherwise
    moves every particle. The loop ends after ``t_max`` iterations, so
    ``t_max = 1`` performs exactly one swarm update. With ``vectorized``
    the objective receives the whole ``(n, m)`` position block at once.
    """
    state = init_swarm(params)
    bounds = np.array(params.bounds)
    converged = False
    for t in range(1, params.t_max + 1):
        fitness = _evaluate(objective, state.positions, vectorized)
        if t == 1 and np.count_nonzero(np.isnan(fitness)) * 2 > params.n_particles:
            raise ObjectiveError(
                f"objective returned NaN for {np.count_nonzero(np.isnan(fitness))} of "
                f"{params.n_particles} initial particles; check its configuration"
            )
        update_bests(state, fitness)
        state.iteration = t
        state.trace.append(state.gbest_fitness)
        if state.gbest_fitness <= params.fitness_threshold:
            converged = True
            break
        finite = fitness[np.isfinite(fitness)]
        if finite.size:
            fit_min, fit_ave = float(finite.min()), float(finite.mean())
        else:
            fit_min = fit_ave = np.inf
        state.inertia = np.atleast_1d(adaptive_inertia(fitness, fit_min, fit_ave, params))
        rng = _draw_stream(params.seed, t)
        r1 = rng.random(state.positions.shape)
        r2 = rng.random(state.positions.shape)
        state.velocities = update_velocity(
            state.positions, state.velocities, state.pbest_positions, state.gbest_position,
            state.inertia, params, r1, r2,
        )
        state.positions = update_position(state.positions, state.velocities, bounds)
    if state.nan_evaluations:
        log.warning("objective returned NaN %d times during the run", state.nan_evaluations)
    return PsoResult(
        best_position=state.gbest_position.copy(),
        best_fitness=state.gbest_fitness,
        trace=list(state.trace),
        iterations=state.iteration,
        converged=converged,
        nan_evaluations=state.nan_evaluations,
    )
