"""Run configuration: TOML text in, validated :class:`RunConfig` out.

Schema (``format_version = 1``)::

    format_version = 1
    units = "mm-N"          # "mm-N": mm, N, N*mm, MPa   |  "SI": m, N, N*m, Pa
    seed = 0                # master seed

    [geometry]              # exactly one of width / knots / random_knots
    length = 180.0
    thickness = 1.15
    youngs_modulus = 45360.0
    n_units = 200
    width = 25.0
    # knots = [22.6, 26.9, ...]
    # random_knots = { lower = 20.0, upper = 30.0, n_knots = 11, seed = 7 }

    [[loads]]               # single cases
    id = "c1"               # optional, default "L000", "L001", ...
    force = 1.034           # or mass = 0.11 (kg, force = mass * 9.8)
    phi_deg = -90.0         # or phi (rad)
    moment = 0.0            # or lever_arm = 10.0, giving moment = -force * lever_arm
    extra_weight = 0.0      # N, added to the force (pulley weight)

    [[sweeps]]              # one case per entry of forces / masses
    label = "phi-150"
    masses = [0.11, 0.21]
    phi_deg = -150.0
    lever_arm = 0.0

    [pso]                   # defaults shown
    n_particles = 100
    c1 = 0.2
    c2 = 0.2
    w_min = 0.6
    w_max = 0.8
    t_max = 50
    fitness_threshold = 0.005
    retries = 0             # re-runs with fresh seeds on non-convergence
    # qx_bounds / qy_bounds (length units), theta_bounds (rad); default +-l, +-pi

    [oracle]
    enabled = true
    max_newton_iters = 50
    residual_tol = 1e-9
    fd_step = 1e-6
    damping = 1.0
    continuation_steps = 10

    [output]
    dir = "out"
    jobs = 1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .beam import BeamGeometry, TipLoad, WidthKnots, generate_random_widths
from .oracle import OracleParams
from .pso import PsoParams

FORMAT_VERSION = 1
GRAVITY = 9.8

# scale factors into SI for (length, moment, modulus)
UNIT_SYSTEMS = {
    "mm-N": (1e-3, 1e-3, 1e6),
    "SI": (1.0, 1.0, 1.0),
}

_TOP_KEYS = {"format_version", "units", "seed", "geometry", "loads", "sweeps", "pso", "oracle", "output"}
_GEOM_KEYS = {"length", "thickness", "youngs_modulus", "n_units", "width", "knots", "random_knots"}
_RANDOM_KEYS = {"lower", "upper", "n_knots", "seed"}
_LOAD_KEYS = {"id", "force", "mass", "phi", "phi_deg", "moment", "lever_arm", "extra_weight"}
_SWEEP_KEYS = {"label", "forces", "masses", "phi", "phi_deg", "moment", "lever_arm", "extra_weight"}
_PSO_KEYS = {
    "n_particles", "c1", "c2", "w_min", "w_max", "t_max", "fitness_threshold", "retries",
    "qx_bounds", "qy_bounds", "theta_bounds",
}
_ORACLE_KEYS = {"enabled", "max_newton_iters", "residual_tol", "fd_step", "damping", "continuation_steps"}
_OUTPUT_KEYS = {"dir", "jobs"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LoadCase:
    case_id: str
    load: TipLoad


@dataclass
class RunConfig:
    geometry: BeamGeometry
    geometry_kind: str
    loads: list
    pso: PsoParams
    retries: int = 0
    oracle_enabled: bool = True
    oracle: OracleParams = field(default_factory=OracleParams)
    continuation_steps: int = 10
    out_dir: str = "out"
    jobs: int = 1
    seed: int = 0
    units: str = "mm-N"
    knots: WidthKnots | None = None


def _check_keys(table, allowed, path):
    if not isinstance(table, dict):
        raise ConfigError(f"{path}: expected a table")
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")


def _number(table, key, path, default=None, positive=False, minimum=None, integer=False, unit=""):
    if key not in table:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    if integer and not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{path}.{key}: must be finite")
    if positive and not value > 0:
        raise ConfigError(f"{path}.{key}: must be > 0{unit}, got {value!r}{unit}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}{unit}, got {value!r}{unit}")
    return value


def _one_of(table, keys, path, required=True):
    present = [k for k in keys if k in table]
    if len(present) > 1:
        raise ConfigError(f"{path}: give exactly one of {' / '.join(keys)}, got {' and '.join(present)}")
    if required and not present:
        raise ConfigError(f"{path}: give exactly one of {' / '.join(keys)}")
    return present[0] if present else None


def _wrap_phi(phi):
    # fold into (-pi, pi]
    w = math.remainder(phi, 2 * math.pi)
    return math.pi if w == -math.pi else w


def _phi(table, path):
    key = _one_of(table, ("phi", "phi_deg"), path, required=False)
    if key is None:
        return 0.0
    value = _number(table, key, path)
    return _wrap_phi(math.radians(value) if key == "phi_deg" else value)


def _geometry(raw, units):
    path = "geometry"
    _check_keys(raw, _GEOM_KEYS, path)
    ls, _, es = UNIT_SYSTEMS[units]
    lu = "mm" if units == "mm-N" else "m"
    eu = "MPa" if units == "mm-N" else "Pa"
    length = _number(raw, "length", path, positive=True, unit=f" {lu}") * ls
    thickness = _number(raw, "thickness", path, positive=True, unit=f" {lu}") * ls
    modulus = _number(raw, "youngs_modulus", path, positive=True, unit=f" {eu}") * es
    n_units = _number(raw, "n_units", path, default=200, integer=True, minimum=1)
    kind = _one_of(raw, ("width", "knots", "random_knots"), path)
    knots = None
    if kind == "width":
        width = _number(raw, "width", path, positive=True, unit=f" {lu}")
        return BeamGeometry.uniform(length, thickness, modulus, width * ls, n_units), kind, None
    if kind == "knots":
        vals = raw["knots"]
        if not isinstance(vals, list) or len(vals) < 2:
            raise ConfigError(f"{path}.knots: expected a list of at least 2 widths [{lu}]")
        for i, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"{path}.knots[{i}]: width must be a number > 0 {lu}, got {v!r}")
        knots = WidthKnots(tuple(v * ls for v in vals))
    else:
        sub = raw["random_knots"]
        spath = f"{path}.random_knots"
        _check_keys(sub, _RANDOM_KEYS, spath)
        lower = _number(sub, "lower", spath, positive=True, unit=f" {lu}")
        upper = _number(sub, "upper", spath, positive=True, unit=f" {lu}")
        if upper < lower:
            raise ConfigError(f"{spath}.upper: must be >= lower ({lower} {lu}), got {upper} {lu}")
        n_knots = _number(sub, "n_knots", spath, default=11, integer=True, minimum=2)
        kseed = _number(sub, "seed", spath, default=0, integer=True, minimum=0)
        knots = generate_random_widths(lower * ls, upper * ls, n_knots, kseed)
    if n_units % knots.n_segments:
        raise ConfigError(f"{path}.n_units: {n_units} is not a multiple of the {knots.n_segments} knot segments")
    return BeamGeometry.from_knots(length, thickness, modulus, knots, n_units), kind, knots


def _force_and_moment(entry, path, units, force_value):
    ls, ms, _ = UNIT_SYSTEMS[units]
    lu = " mm" if units == "mm-N" else " m"
    extra = _number(entry, "extra_weight", path, default=0.0, minimum=0.0, unit=" N")
    force = force_value + extra
    key = _one_of(entry, ("moment", "lever_arm"), path, required=False)
    if key == "moment":
        moment = _number(entry, "moment", path, unit=" N*mm" if units == "mm-N" else " N*m") * ms
    elif key == "lever_arm":
        moment = -force * _number(entry, "lever_arm", path, minimum=0.0, unit=lu) * ls
    else:
        moment = 0.0
    return force, moment


def _loads(raw, units):
    cases = []
    for i, entry in enumerate(raw.get("loads", [])):
        path = f"loads[{i}]"
        _check_keys(entry, _LOAD_KEYS, path)
        key = _one_of(entry, ("force", "mass"), path, required=False)
        if key == "mass":
            base = _number(entry, "mass", path, minimum=0.0, unit=" kg") * GRAVITY
        elif key == "force":
            base = _number(entry, "force", path, minimum=0.0, unit=" N")
        else:
            base = 0.0
        force, moment = _force_and_moment(entry, path, units, base)
        case_id = entry.get("id", f"L{i:03d}")
        cases.append(LoadCase(str(case_id), TipLoad(force, _phi(entry, path), moment)))
    for i, entry in enumerate(raw.get("sweeps", [])):
        path = f"sweeps[{i}]"
        _check_keys(entry, _SWEEP_KEYS, path)
        key = _one_of(entry, ("forces", "masses"), path)
        vals = entry[key]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"{path}.{key}: expected a non-empty list")
        label = str(entry.get("label", f"S{i:02d}"))
        phi = _phi(entry, path)
        for j, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
                unit = "kg" if key == "masses" else "N"
                raise ConfigError(f"{path}.{key}[{j}]: must be a number >= 0 {unit}, got {v!r}")
            base = v * GRAVITY if key == "masses" else float(v)
            force, moment = _force_and_moment(entry, path, units, base)
            cases.append(LoadCase(f"{label}-{j:02d}", TipLoad(force, phi, moment)))
    if not cases:
        raise ConfigError("loads: at least one load case (loads or sweeps) is required")
    seen = set()
    for c in cases:
        if c.case_id in seen:
            raise ConfigError(f"loads: duplicate case id {c.case_id!r}")
        if not c.case_id or any(ch in c.case_id for ch in "/\\,\n"):
            raise ConfigError(f"loads: case id {c.case_id!r} must be non-empty without '/', '\\', ',' or newlines")
        seen.add(c.case_id)
    return cases


def _bounds(raw, key, path, default, scale):
    if key not in raw:
        return default
    val = raw[key]
    if (
        not isinstance(val, list)
        or len(val) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val)
        or not val[0] < val[1]
    ):
        raise ConfigError(f"{path}.{key}: expected [lower, upper] with lower < upper, got {val!r}")
    return (val[0] * scale, val[1] * scale)


def parse_config(text: str) -> RunConfig:
    """Parse and validate TOML config text; errors name the offending key."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    _check_keys(raw, _TOP_KEYS, "config")
    version = raw.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ConfigError(f"format_version: unsupported version {version!r} (expected {FORMAT_VERSION})")
    units = raw.get("units", "mm-N")
    if units not in UNIT_SYSTEMS:
        raise ConfigError(f"units: expected one of {', '.join(UNIT_SYSTEMS)}, got {units!r}")
    seed = _number(raw, "seed", "config", default=0, integer=True, minimum=0)
    if "geometry" not in raw:
        raise ConfigError("geometry: required")
    geometry, kind, knots = _geometry(raw["geometry"], units)
    loads = _loads(raw, units)

    pso_raw = raw.get("pso", {})
    _check_keys(pso_raw, _PSO_KEYS, "pso")
    ls = UNIT_SYSTEMS[units][0]
    ell = geometry.length
    bounds = (
        _bounds(pso_raw, "qx_bounds", "pso", (-ell, ell), ls),
        _bounds(pso_raw, "qy_bounds", "pso", (-ell, ell), ls),
        _bounds(pso_raw, "theta_bounds", "pso", (-math.pi, math.pi), 1.0),
    )
    w_min = _number(pso_raw, "w_min", "pso", default=0.6, minimum=0.0)
    w_max = _number(pso_raw, "w_max", "pso", default=0.8, minimum=0.0)
    if w_max < w_min:
        raise ConfigError(f"pso.w_max: must be >= w_min ({w_min}), got {w_max}")
    pso = PsoParams(
        bounds=bounds,
        n_particles=_number(pso_raw, "n_particles", "pso", default=100, integer=True, minimum=1),
        c1=_number(pso_raw, "c1", "pso", default=0.2, minimum=0.0),
        c2=_number(pso_raw, "c2", "pso", default=0.2, minimum=0.0),
        w_min=w_min,
        w_max=w_max,
        t_max=_number(pso_raw, "t_max", "pso", default=50, integer=True, minimum=1),
        fitness_threshold=_number(pso_raw, "fitness_threshold", "pso", default=0.005, positive=True),
        seed=seed,
    )
    retries = _number(pso_raw, "retries", "pso", default=0, integer=True, minimum=0)

    oracle_raw = raw.get("oracle", {})
    _check_keys(oracle_raw, _ORACLE_KEYS, "oracle")
    enabled = oracle_raw.get("enabled", True)
    if not isinstance(enabled, bool):
        raise ConfigError(f"oracle.enabled: expected true/false, got {enabled!r}")
    damping = _number(oracle_raw, "damping", "oracle", default=1.0, positive=True)
    if damping > 1:
        raise ConfigError(f"oracle.damping: must lie in (0, 1], got {damping}")
    oracle = OracleParams(
        max_newton_iters=_number(oracle_raw, "max_newton_iters", "oracle", default=50, integer=True, minimum=1),
        residual_tol=_number(oracle_raw, "residual_tol", "oracle", default=1e-9, positive=True),
        fd_step=_number(oracle_raw, "fd_step", "oracle", default=1e-6, positive=True),
        damping=damping,
    )
    steps = _number(oracle_raw, "continuation_steps", "oracle", default=10, integer=True, minimum=1)

    out_raw = raw.get("output", {})
    _check_keys(out_raw, _OUTPUT_KEYS, "output")
    out_dir = out_raw.get("dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError(f"output.dir: expected a non-empty path string, got {out_dir!r}")
    jobs = _number(out_raw, "jobs", "output", default=1, integer=True, minimum=1)

    return RunConfig(
        geometry=geometry,
        geometry_kind=kind,
        loads=loads,
        pso=pso,
        retries=retries,
        oracle_enabled=enabled,
        oracle=oracle,
        continuation_steps=steps,
        out_dir=out_dir,
        jobs=jobs,
        seed=seed,
        units=units,
        knots=knots,
    )


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
