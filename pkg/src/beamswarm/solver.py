"""Find the self-consistent tip state of a loaded cantilever by swarm search.

A particle is a hypothesised tip ``(Qx, Qy, theta0)``. Its fitness is the
mismatch between the hypothesis and the tip obtained by integrating the
beam from the root under that hypothesis: position error over the beam
length plus slope error over ``2 pi``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import pso
from .beam import BeamGeometry, DeflectionCurve, TipLoad, TipState, integrate_deflection, integrate_tips


@dataclass
class SolveResult:
    tip: TipState
    fitness: float
    curve: DeflectionCurve
    iterations: int
    trace: list
    converged: bool
    seed: int = 0


def default_bounds(geometry: BeamGeometry) -> tuple:
    ell = geometry.length
    return ((-ell, ell), (-ell, ell), (-math.pi, math.pi))


def default_params(geometry: BeamGeometry, **overrides) -> pso.PsoParams:
    """Swarm settings used throughout: 100 particles, c1 = c2 = 0.2,
    inertia in [0.6, 0.8], 50 iterations, threshold 0.005."""
    overrides.setdefault("bounds", default_bounds(geometry))
    return pso.PsoParams(**overrides)


def batch_fitness(geometry: BeamGeometry, load: TipLoad, guesses: np.ndarray, flex=None) -> np.ndarray:
    guesses = np.atleast_2d(np.asarray(guesses, dtype=float))
    tips = integrate_tips(geometry, load, guesses, flex)
    dpos = np.hypot(guesses[:, 0] - tips[:, 0], guesses[:, 1] - tips[:, 1])
    return dpos / geometry.length + np.abs(guesses[:, 2] - tips[:, 2]) / (2 * math.pi)


def fitness(geometry: BeamGeometry, load: TipLoad, guess: TipState) -> float:
    """Self-consistency error of ``guess``; zero exactly at a fixed point."""
    return float(batch_fitness(geometry, load, guess.as_array())[0])


def normalized_tip_error(predicted: TipState, measured, length: float) -> float:
    """Tip position distance to a measured ``(x, y)`` over the beam length."""
    if not length > 0:
        raise ValueError(f"length must be > 0 m, got {length!r}")
    mx, my = measured
    return math.hypot(predicted.qx - mx, predicted.qy - my) / length


def solve_tip_locus(geometry: BeamGeometry, load: TipLoad, params: pso.PsoParams | None = None) -> SolveResult:
    """Run the swarm on the tip problem and rebuild the curve at the best tip.

    A run that exhausts ``t_max`` above threshold comes back with
    ``converged=False``.
    """
    if params is None:
        params = default_params(geometry)
    if params.dims != 3:
        raise ValueError(f"the tip problem has 3 unknowns, params has {params.dims} dimensions")
    flex = geometry.flexibility()
    res = pso.run(lambda block: batch_fitness(geometry, load, block, flex), params, vectorized=True)
    tip = TipState.from_array(res.best_position)
    curve, _ = integrate_deflection(geometry, load, tip)
    return SolveResult(
        tip=tip,
        fitness=res.best_fitness,
        curve=curve,
        iterations=res.iterations,
        trace=res.trace,
        converged=res.best_fitness <= params.fitness_threshold,
        seed=params.seed,
    )


def derive_seed(master: int, *keys: int) -> int:
    """Child seed for a case index (and retry attempt) from the master seed."""
    return int(np.random.SeedSequence([master, *keys]).generate_state(1, np.uint32)[0])


def sweep_loads(geometry: BeamGeometry, loads, params: pso.PsoParams | None = None, jobs: int = 1) -> list[SolveResult]:
    """Solve each load with its own derived seed; order follows ``loads``.

    Non-converged cases stay in the list flagged ``converged=False``.
    """
    loads = list(loads)
    if not loads:
        raise ValueError("need at least one load case")
    if params is None:
        params = default_params(geometry)
    tasks = [replace(params, seed=derive_seed(params.seed, k)) for k in range(len(loads))]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(lambda a: solve_tip_locus(geometry, *a), zip(loads, tasks)))
    return [solve_tip_locus(geometry, load, p) for load, p in zip(loads, tasks)]
