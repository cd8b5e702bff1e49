"""Deterministic reference solutions for the tip problem.

``newton_shooting_solve`` drives the same self-consistency residual the
swarm minimises to zero with a damped Newton iteration (forward-difference
Jacobian). ``linear_tip_deflection`` is small-deflection beam theory for
uniform beams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beam import BeamGeometry, TipLoad, TipState, integrate_tips, second_moment_profile

PICARD_WARMUP = 5
MIN_STEP = 1.0 / 64


@dataclass(frozen=True)
class OracleParams:
    max_newton_iters: int = 50
    residual_tol: float = 1e-9
    fd_step: float = 1e-6
    damping: float = 1.0

    def __post_init__(self):
        if self.max_newton_iters < 1:
            raise ValueError(f"max_newton_iters must be >= 1, got {self.max_newton_iters}")
        if not self.residual_tol > 0:
            raise ValueError(f"residual_tol must be > 0, got {self.residual_tol}")
        if not self.fd_step > 0:
            raise ValueError(f"fd_step must be > 0, got {self.fd_step}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")


class OracleError(RuntimeError):
    """Newton failed; carries the last iterate and its residual norm."""

    def __init__(self, message, last: TipState, residual_norm: float):
        super().__init__(f"{message} (residual norm {residual_norm:.3e})")
        self.last = last
        self.residual_norm = residual_norm


def wrap_angle(a):
    """Map angles onto (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    w = np.mod(a + math.pi, 2 * math.pi) - math.pi
    w = np.where(w == -math.pi, math.pi, w)
    return float(w) if w.ndim == 0 else w


def _residuals(geometry, load, guesses, flex):
    guesses = np.atleast_2d(guesses)
    tips = integrate_tips(geometry, load, guesses, flex)
    r = tips - guesses
    r[:, 2] = wrap_angle(r[:, 2])
    return r


def residual(geometry: BeamGeometry, load: TipLoad, guess: TipState) -> np.ndarray:
    """Computed tip minus hypothesised tip, angle wrapped to (-pi, pi]."""
    return _residuals(geometry, load, guess.as_array(), geometry.flexibility())[0]


def residual_norm(r, length: float) -> float:
    return math.hypot(r[0], r[1]) / length + abs(r[2]) / (2 * math.pi)


@dataclass
class OracleReport:
    tip: TipState
    residual_norm: float
    newton_iters: int
    continuation_steps: int = 0


def _newton(geometry, load, x, params, flex):
    ell = geometry.length
    h = params.fd_step * np.array([2 * ell, 2 * ell, 2 * math.pi])
    r = _residuals(geometry, load, x, flex)[0]
    norm = residual_norm(r, ell)
    for k in range(params.max_newton_iters + 1):
        if norm <= params.residual_tol:
            return x, norm, k
        if k == params.max_newton_iters:
            break
        # all 3 perturbed columns in one batch
        probes = x + np.diag(h)
        jac = ((_residuals(geometry, load, probes, flex) - r) / h).T
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            raise OracleError("singular Jacobian", TipState.from_array(x), norm) from None
        if not np.all(np.isfinite(step)):
            raise OracleError("non-finite Newton step", TipState.from_array(x), norm)
        lam = params.damping
        while True:
            trial = x + lam * step
            r_trial = _residuals(geometry, load, trial, flex)[0]
            n_trial = residual_norm(r_trial, ell)
            if n_trial < norm:
                break
            lam *= 0.5
            if lam < MIN_STEP:
                raise OracleError("line search stalled", TipState.from_array(x), norm)
        x, r, norm = trial, r_trial, n_trial
    raise OracleError(f"no convergence in {params.max_newton_iters} Newton steps", TipState.from_array(x), norm)


def newton_shooting_solve(
    geometry: BeamGeometry,
    load: TipLoad,
    params: OracleParams | None = None,
    initial_guess: TipState | None = None,
) -> OracleReport:
    """Damped Newton on the tip residual.

    Without ``initial_guess`` the start comes from five Picard sweeps
    (feed the computed tip back as the next hypothesis) beginning at the
    undeformed tip. Raises :class:`OracleError` on failure.
    """
    params = params or OracleParams()
    flex = geometry.flexibility()
    if initial_guess is None:
        x = np.array([geometry.length, 0.0, 0.0])
        for _ in range(PICARD_WARMUP):
            x = integrate_tips(geometry, load, x, flex)[0]
    else:
        x = initial_guess.as_array()
    x, norm, iters = _newton(geometry, load, x, params, flex)
    # the wrapped residual leaves theta0 free up to 2 pi
    x[2] = wrap_angle(x[2])
    return OracleReport(TipState.from_array(x), norm, iters)


def continuation_solve(geometry: BeamGeometry, load: TipLoad, params: OracleParams | None = None, steps: int = 10) -> OracleReport:
    """Ramp the load from zero in ``steps`` equal increments, warm-starting each Newton solve."""
    params = params or OracleParams()
    guess = TipState(geometry.length, 0.0, 0.0)
    total = 0
    report = None
    for k in range(1, steps + 1):
        report = newton_shooting_solve(geometry, load.scaled(k / steps), params, initial_guess=guess)
        guess = report.tip
        total += report.newton_iters
    report.newton_iters = total
    report.continuation_steps = steps
    return report


def reference_solve(geometry: BeamGeometry, load: TipLoad, params: OracleParams | None = None, steps: int = 10) -> OracleReport:
    """Continuation solve, retried with finer load steps if a step fails.

    Continuation keeps the answer on the branch connected to the unloaded
    beam; a direct solve from the Picard start can land on another branch.
    """
    try:
        return continuation_solve(geometry, load, params, steps)
    except OracleError:
        return continuation_solve(geometry, load, params, 4 * steps)


def linear_tip_deflection(geometry: BeamGeometry, load: TipLoad) -> TipState:
    """Small-deflection tip of a uniform cantilever under transverse force and moment."""
    if not geometry.is_uniform:
        raise ValueError("linear closed form needs a uniform beam")
    axial = load.force * math.cos(load.phi)
    if abs(axial) > 1e-9 * max(load.force, 1.0):
        raise ValueError(f"linear closed form takes transverse loads only, axial component is {axial:.3e} N")
    ell = geometry.length
    ei = geometry.youngs_modulus * float(second_moment_profile(geometry)[0])
    f_perp = load.force * math.sin(load.phi)
    y = f_perp * ell**3 / (3 * ei) + load.moment * ell**2 / (2 * ei)
    theta = f_perp * ell**2 / (2 * ei) + load.moment * ell / ei
    return TipState(ell, y, theta)
