"""Beam geometry, tip loads and the unit-chain forward integration.

All quantities are SI (m, N, N*m, Pa, rad). The beam is split into ``nl``
equal units of length ``dl = l / nl``; unit ``i`` bends by
``M_i * dl / (E * I_i)`` where ``M_i`` is the tip-load moment taken about
the unit's start point, and the chord of the unit is laid down at the slope
held at that start point (explicit forward scheme).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import integrate_chain

# Explicit scheme: a unit's chord follows the slope at its start point.
CHORD_SLOPE = "start"


@dataclass(frozen=True)
class BeamGeometry:
    """Straight cantilever of rectangular section with per-unit widths."""

    length: float
    thickness: float
    youngs_modulus: float
    unit_widths: tuple[float, ...]

    def __post_init__(self):
        widths = tuple(float(w) for w in self.unit_widths)
        object.__setattr__(self, "unit_widths", widths)
        if not self.length > 0:
            raise ValueError(f"length must be > 0 m, got {self.length!r}")
        if not self.thickness > 0:
            raise ValueError(f"thickness must be > 0 m, got {self.thickness!r}")
        if not self.youngs_modulus > 0:
            raise ValueError(f"youngs_modulus must be > 0 Pa, got {self.youngs_modulus!r}")
        if len(widths) < 1:
            raise ValueError("unit_widths must hold at least one unit")
        if not all(w > 0 and math.isfinite(w) for w in widths):
            raise ValueError("every unit width must be a finite value > 0 m")

    @classmethod
    def uniform(cls, length, thickness, youngs_modulus, width, n_units=200):
        if n_units < 1:
            raise ValueError(f"n_units must be >= 1, got {n_units}")
        return cls(length, thickness, youngs_modulus, (float(width),) * int(n_units))

    @classmethod
    def from_knots(cls, length, thickness, youngs_modulus, knots, n_units=200):
        return cls(length, thickness, youngs_modulus, tuple(interpolate_width_profile(knots, n_units)))

    @property
    def n_units(self) -> int:
        return len(self.unit_widths)

    @property
    def unit_length(self) -> float:
        return self.length / self.n_units

    @property
    def is_uniform(self) -> bool:
        return len(set(self.unit_widths)) == 1

    def flexibility(self) -> np.ndarray:
        """Per-unit slope increment per unit moment, ``dl / (E * I_i)`` [1/(N*m)]."""
        return self.unit_length / (self.youngs_modulus * second_moment_profile(self))


@dataclass(frozen=True)
class WidthKnots:
    """Knot widths at ``n_segments + 1`` equally spaced stations."""

    knot_widths: tuple[float, ...]

    def __post_init__(self):
        widths = tuple(float(w) for w in self.knot_widths)
        object.__setattr__(self, "knot_widths", widths)
        if len(widths) < 2:
            raise ValueError("need at least two knots (one segment)")
        if not all(w > 0 and math.isfinite(w) for w in widths):
            raise ValueError("every knot width must be a finite value > 0 m")

    @property
    def n_segments(self) -> int:
        return len(self.knot_widths) - 1


@dataclass(frozen=True)
class TipLoad:
    """Tip force ``force`` at inclination ``phi`` plus tip moment ``moment``."""

    force: float = 0.0
    phi: float = 0.0
    moment: float = 0.0

    def __post_init__(self):
        if not self.force >= 0:
            raise ValueError(f"force must be >= 0 N, got {self.force!r}")
        if not -math.pi < self.phi <= math.pi:
            raise ValueError(f"phi must lie in (-pi, pi] rad, got {self.phi!r}")
        if not math.isfinite(self.moment):
            raise ValueError(f"moment must be finite N*m, got {self.moment!r}")

    def scaled(self, factor: float) -> "TipLoad":
        return TipLoad(self.force * factor, self.phi, self.moment * factor)


@dataclass(frozen=True)
class TipState:
    """Tip coordinates and slope: the three unknowns of the tip problem."""

    qx: float
    qy: float
    theta0: float

    def as_array(self) -> np.ndarray:
        return np.array([self.qx, self.qy, self.theta0])

    @classmethod
    def from_array(cls, arr) -> "TipState":
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass(frozen=True)
class DeflectionCurve:
    """Unit-boundary points ``(x, y, theta)`` from the root (row 0) to the tip."""

    points: np.ndarray = field(repr=False)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def theta(self) -> np.ndarray:
        return self.points[:, 2]

    @property
    def tip(self) -> TipState:
        return TipState.from_array(self.points[-1])

    def chord_lengths(self) -> np.ndarray:
        return np.hypot(np.diff(self.x), np.diff(self.y))


def second_moment_profile(geometry: BeamGeometry) -> np.ndarray:
    """Per-unit second moment of area ``w * t**3 / 12`` [m^4]."""
    return np.asarray(geometry.unit_widths) * geometry.thickness**3 / 12.0


def interpolate_width_profile(knots: WidthKnots, n_units: int) -> list[float]:
    """Spread knot widths over ``n_units`` units by piecewise-linear blending.

    Unit ``i`` (1-based) sits ``i`` units
    from the root; units landing on a station take the knot value exactly.
    ``n_units`` must be a multiple of the segment count.
    """
    if not isinstance(knots, WidthKnots):
        knots = WidthKnots(tuple(knots))
    n_seg = knots.n_segments
    if n_units < 1 or n_units % n_seg:
        raise ValueError(f"n_units ({n_units}) must be a positive multiple of n_segments ({n_seg})")
    per_seg = n_units // n_seg
    w = knots.knot_widths
    out = []
    for i in range(1, n_units + 1):
        seg, rem = divmod(i, per_seg)
        if rem:
            out.append(w[seg] + rem / per_seg * (w[seg + 1] - w[seg]))
        else:
            out.append(w[seg])
    return out


def generate_random_widths(lower: float, upper: float, n_knots: int = 11, seed: int = 0) -> WidthKnots:
    """Draw ``n_knots`` widths independently and uniformly on ``[lower, upper]``.

    Seed mapping: ``numpy.random.default_rng(seed)`` (PCG64 seeded through
    ``SeedSequence``), one ``uniform`` draw of size ``n_knots``. A degenerate
    interval returns ``lower`` exactly.
    """
    if not lower > 0:
        raise ValueError(f"lower width must be > 0 m, got {lower!r}")
    if upper < lower:
        raise ValueError(f"upper width ({upper!r}) must be >= lower width ({lower!r})")
    if n_knots < 2:
        raise ValueError(f"n_knots must be >= 2, got {n_knots}")
    if upper == lower:
        return WidthKnots((float(lower),) * n_knots)
    rng = np.random.default_rng(seed)
    draws = lower + rng.random(n_knots) * (upper - lower)
    return WidthKnots(tuple(float(v) for v in draws))


def moment_at(load: TipLoad, tip: TipState, x: float, y: float) -> float:
    """Bending moment [N*m] about ``(x, y)`` from the tip load applied at ``tip``."""
    return (
        load.force * math.sin(load.phi) * (tip.qx - x)
        - load.force * math.cos(load.phi) * (tip.qy - y)
        + load.moment
    )


def integrate_deflection(geometry: BeamGeometry, load: TipLoad, tip_guess: TipState):
    """March the unit chain from the clamped root for one hypothesised tip.

    Returns ``(curve, computed_tip)``; ``computed_tip`` is the last row of
    the curve.
    """
    tips, path = integrate_chain(
        geometry.flexibility(),
        load.force,
        load.phi,
        load.moment,
        geometry.unit_length,
        tip_guess.as_array(),
        keep_path=True,
    )
    curve = DeflectionCurve(path[0])
    return curve, TipState.from_array(tips[0])


def integrate_tips(geometry: BeamGeometry, load: TipLoad, guesses: np.ndarray, flex=None) -> np.ndarray:
    """Batch form of :func:`integrate_deflection`: ``(n, 3)`` guesses to ``(n, 3)`` tips."""
    if flex is None:
        flex = geometry.flexibility()
    tips, _ = integrate_chain(flex, load.force, load.phi, load.moment, geometry.unit_length, guesses)
    return tips
