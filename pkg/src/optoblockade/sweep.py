"""Parameter grids, ZPL-following scans and phonon-cutoff convergence.

A :class:`SweepSpec` names a model, a flat map of fixed parameters (internal
angular units) and up to two axes.  An axis is either a parameter name such as
``kc_x0`` or ``omega_m``, or a ratio ``"num/den"`` of two parameters, in which
case the axis value sets ``num = value * den`` (``"g_m/omega_m"``,
``"Delta/g0"``).  Every grid point is an independent task; results come back in
row-major grid order whatever the number of worker processes.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from optoblockade import __version__, spectra
from optoblockade.errors import BlockadeError, MixedStateError, NonConvergenceError, ParameterDomainError
from optoblockade.fockspace import ExpansionOrder
from optoblockade.models import JcParams, MotionParams, OmParams
from optoblockade.solver import g2_zero, mean_photon, solve_finite_drive, solve_weak_drive

CONVERGENCE_TOL = 1e-4
M_MAX_CEILING = 256
M_MAX_START = 8
G2_FLOOR = 1e-3
REFERENCE_DRIVE = 1e-2  # E0 / sqrt(kappa) used for <a^dag a> when drive_E0 is unset
THREADS_ENV = "OPTOBLOCKADE_THREADS"
UNIT_NOTE = "frequencies and rates in rad/us (2 pi x MHz); kc_x0 in rad; drive_E0 in sqrt(rad/us)"

OM_FIELDS = tuple(f.name for f in dataclasses.fields(OmParams))
JC_FIELDS = tuple(f.name for f in dataclasses.fields(JcParams))
MOTION_FIELDS = ("omega_m", "omega_rec")
MODEL_FIELDS = {
    "om": OM_FIELDS,
    "jc-static": JC_FIELDS,
    "jc-motion": JC_FIELDS + MOTION_FIELDS,
    "om-effective": JC_FIELDS + MOTION_FIELDS,
}
DIMENSIONLESS = frozenset({"kc_x0"})


def is_dimensional(name):
    """True for parameters carrying frequency units (axes that are ratios are dimensionless)."""
    return "/" not in name and name not in DIMENSIONLESS and name != "drive_E0"


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 2:
            raise ParameterDomainError(f"axis {self.name!r}: points must be an integer >= 2, got {self.points}")
        object.__setattr__(self, "points", int(self.points))
        if self.spacing not in ("linear", "log"):
            raise ParameterDomainError(f"axis {self.name!r}: spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise ParameterDomainError(f"axis {self.name!r}: log spacing needs positive endpoints")

    def values(self):
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    def echo(self):
        return {"name": self.name, "start": self.start, "stop": self.stop, "points": self.points, "spacing": self.spacing}


def parse_detuning(policy):
    """'fixed' -> (False, 0), 'zpl' -> (True, 0), 'sideband:m' -> (True, m)."""
    policy = str(policy).lower()
    if policy == "fixed":
        return False, 0
    if policy == "zpl":
        return True, 0
    if policy.startswith("sideband:"):
        try:
            m = int(policy.split(":", 1)[1])
        except ValueError:
            m = -1
        if m >= 0:
            return True, m
    raise ParameterDomainError(f"detuning policy must be 'fixed', 'zpl' or 'sideband:<m>', got {policy!r}")


def parse_solver(solver):
    """'ladder' -> None, 'finite:<ratio>' -> ratio (drive E0 in units of sqrt(kappa))."""
    solver = str(solver).lower()
    if solver == "ladder":
        return None
    if solver.startswith("finite:"):
        try:
            ratio = float(solver.split(":", 1)[1])
        except ValueError:
            ratio = -1.0
        if ratio > 0:
            return ratio
    raise ParameterDomainError(f"solver must be 'ladder' or 'finite:<E0/sqrt(kappa)>', got {solver!r}")


@dataclass(frozen=True)
class SweepSpec:
    model: str
    params: dict
    axes: tuple = ()
    detuning: str = "zpl"
    order: str = "linear"
    zpl_mode: str = "numeric"
    solver: str = "ladder"
    tol: float = CONVERGENCE_TOL
    m_max_ceiling: int = M_MAX_CEILING
    # Fixed phonon cutoff; None means converge it point by point.
    m_max: int | None = None
    n_max: int = 2

    def __post_init__(self):
        if self.model not in MODEL_FIELDS:
            raise ParameterDomainError(f"unknown model {self.model!r}; expected one of {tuple(MODEL_FIELDS)}")
        allowed = MODEL_FIELDS[self.model]
        object.__setattr__(self, "params", {k: float(v) for k, v in dict(self.params).items()})
        object.__setattr__(self, "axes", tuple(a if isinstance(a, Axis) else Axis(**a) for a in self.axes))
        object.__setattr__(self, "order", ExpansionOrder.parse(self.order).value)
        for key in self.params:
            if key not in allowed:
                raise ParameterDomainError(f"params.{key}: not a parameter of model {self.model!r}")
        if len(self.axes) > 2:
            raise ParameterDomainError(f"at most two axes are supported, got {len(self.axes)}")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ParameterDomainError(f"duplicate axis names {names}")
        for axis in self.axes:
            for part in axis.name.split("/"):
                if part not in allowed:
                    raise ParameterDomainError(f"axis {axis.name!r}: {part!r} is not a parameter of model {self.model!r}")
            if axis.name.count("/") > 1:
                raise ParameterDomainError(f"axis {axis.name!r}: only one ratio is allowed")
        follow, sideband = parse_detuning(self.detuning)
        set_names = {a.name.split("/")[0] for a in self.axes}
        if follow and "delta_c" in set_names:
            raise ParameterDomainError("delta_c cannot be an axis when the detuning follows a resonance")
        if self.model == "jc-static" and sideband:
            raise ParameterDomainError("the static Jaynes-Cummings model has no phonon sidebands")
        if str(self.zpl_mode).lower() not in ("numeric", "analytic"):
            raise ParameterDomainError(f"zpl_mode must be 'numeric' or 'analytic', got {self.zpl_mode!r}")
        parse_solver(self.solver)
        if not self.tol > 0:
            raise ParameterDomainError(f"convergence tolerance must be > 0, got {self.tol}")
        if self.m_max is not None and (int(self.m_max) != self.m_max or self.m_max < 1):
            raise ParameterDomainError(f"m_max must be an integer >= 1, got {self.m_max}")
        if int(self.m_max_ceiling) < M_MAX_START * 2:
            raise ParameterDomainError(f"m_max ceiling must be >= {2 * M_MAX_START}, got {self.m_max_ceiling}")
        # Fail on missing parameters now rather than once per grid point.
        point_params(self, self.axis_value_grid()[0] if self.axes else ())

    @property
    def shape(self):
        return tuple(a.points for a in self.axes)

    def axis_value_grid(self):
        """Row-major list of axis-value tuples."""
        return list(itertools.product(*(a.values().tolist() for a in self.axes)))

    def echo(self):
        return {
            "model": self.model,
            "params": dict(sorted(self.params.items())),
            "axes": [a.echo() for a in self.axes],
            "detuning": self.detuning,
            "order": self.order,
            "zpl_mode": self.zpl_mode,
            "solver": self.solver,
            "tol": self.tol,
            "m_max_ceiling": self.m_max_ceiling,
            "m_max": self.m_max,
            "n_max": self.n_max,
        }

    def digest(self):
        text = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def point_params(spec, values):
    """Flat parameter map of one grid point; ratio axes are applied after plain ones."""
    flat = dict(spec.params)
    pairs = list(zip(spec.axes, values))
    for axis, value in pairs:
        if "/" not in axis.name:
            flat[axis.name] = value
    for axis, value in pairs:
        if "/" in axis.name:
            num, den = axis.name.split("/")
            if den not in flat:
                raise ParameterDomainError(f"axis {axis.name!r}: {den!r} has no value")
            flat[num] = value * flat[den]
    required = {"om": ("omega_m", "kappa"), "jc-static": ("g0", "kappa", "gamma", "Delta")}
    required["jc-motion"] = required["om-effective"] = required["jc-static"] + MOTION_FIELDS
    if spec.model == "om" and "g_m" not in flat and "g_m0" not in flat:
        raise ParameterDomainError("params: the optomechanical model needs g_m0 or g_m")
    for key in required[spec.model]:
        if key not in flat:
            raise ParameterDomainError(f"params.{key}: required by model {spec.model!r}")
    return flat


@dataclass(frozen=True)
class PointValue:
    g2: float
    mean_photon: float
    delta_c: float
    zpl_delta_c: float
    zpl_fallback: bool


@dataclass(frozen=True)
class Point:
    """One parameter point of a model, evaluable at any phonon cutoff."""

    model: str
    params: object
    motion: MotionParams | None = None
    detuning: str = "zpl"
    zpl_mode: str = "numeric"
    solver: str = "ladder"
    n_max: int = 2

    @property
    def static(self):
        return self.model == "jc-static"

    def resonance(self, m_max):
        """(delta_c, fell_back) of the tracked resonance; Analytic is the fallback for mixed states."""
        _, sideband = parse_detuning(self.detuning)
        motion = None if self.motion is None else dataclasses.replace(self.motion, m_max=m_max)
        kwargs = dict(sideband=sideband, m_max=None if self.static else m_max)
        try:
            return spectra.zpl_detuning(self.model, self.params, motion, self.zpl_mode, **kwargs), False
        except MixedStateError:
            return spectra.zpl_detuning(self.model, self.params, motion, "analytic", **kwargs), True

    def evaluate(self, m_max):
        m_max = 0 if self.static else int(m_max)
        follow, _ = parse_detuning(self.detuning)
        zpl, fallback = self.resonance(m_max)
        delta_c = zpl if follow else self.params.delta_c
        p = dataclasses.replace(self.params, delta_c=delta_c)
        motion = None if self.motion is None else dataclasses.replace(self.motion, m_max=m_max)
        blocks = spectra.build_model(self.model, p, motion, n_max=self.n_max, m_max=None if self.static else m_max)
        kappa = p.kappa
        ratio = parse_solver(self.solver)
        E0 = p.drive_E0 if p.drive_E0 > 0 else REFERENCE_DRIVE * math.sqrt(kappa)
        if ratio is None:
            amps = solve_weak_drive(blocks)
            n = mean_photon(amps, E0)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                amps = solve_finite_drive(blocks, ratio * math.sqrt(kappa))
            n = mean_photon(amps)
        return PointValue(g2_zero(amps), n, delta_c, zpl, fallback)


def make_point(spec, values):
    flat = point_params(spec, values)
    if spec.model == "om":
        params = OmParams(**{k: flat[k] for k in OM_FIELDS if k in flat})
        motion = None
    else:
        params = JcParams(**{k: flat[k] for k in JC_FIELDS if k in flat})
        motion = None
        if spec.model != "jc-static":
            motion = MotionParams(flat["omega_m"], flat["omega_rec"], spec.order, spec.m_max or M_MAX_START)
    return Point(spec.model, params, motion, spec.detuning, spec.zpl_mode, spec.solver, spec.n_max)


def _converged(a, b, tol):
    return abs(a - b) < tol * max(abs(b), G2_FLOOR)


def _converge(point, tol, ceiling, start=M_MAX_START):
    """(m_max, value at m_max, trace of (m, g2)); raises NonConvergenceError at the ceiling."""
    if getattr(point, "static", False):
        return 0, point.evaluate(0), [(0, None)]
    evaluate = point.evaluate if hasattr(point, "evaluate") else point
    m = start
    current = evaluate(m)
    trace = [(m, _g2_of(current))]
    while 2 * m <= ceiling:
        nxt = evaluate(2 * m)
        trace.append((2 * m, _g2_of(nxt)))
        if _converged(_g2_of(current), _g2_of(nxt), tol):
            return m, current, trace
        m, current = 2 * m, nxt
    raise NonConvergenceError(f"g2 not converged to {tol:g} up to m_max = {ceiling}", trace)


def _g2_of(value):
    return value.g2 if isinstance(value, PointValue) else float(value)


def converge_m_max(point, tol=CONVERGENCE_TOL, ceiling=M_MAX_CEILING, start=M_MAX_START):
    """Smallest m_max in start, 2 start, ... whose g2 changes by < tol relative on doubling.

    ``point`` is a :class:`Point` or any callable mapping m_max to g2.  The
    static Jaynes-Cummings model has no phonons and returns 0 at once.
    """
    if not tol > 0:
        raise ParameterDomainError(f"tolerance must be > 0, got {tol}")
    return _converge(point, tol, ceiling, start)[0]


def _record(spec, index, values):
    point = make_point(spec, values)
    rec = {a.name: v for a, v in zip(spec.axes, values)}
    rec.update(g2=math.nan, mean_photon=math.nan, delta_c=math.nan, zpl_delta_c=math.nan)
    rec.update(m_max=spec.m_max or 0, converged=False, zpl_fallback=False, error="")
    try:
        if spec.m_max is not None and not point.static:
            value = point.evaluate(spec.m_max)
            check = point.evaluate(2 * spec.m_max)
            converged = _converged(value.g2, check.g2, spec.tol)
            m = spec.m_max
        else:
            m, value, _ = _converge(point, spec.tol, spec.m_max_ceiling)
            converged = True
        rec.update(
            g2=value.g2,
            mean_photon=value.mean_photon,
            delta_c=value.delta_c,
            zpl_delta_c=value.zpl_delta_c,
            m_max=m,
            converged=converged,
            zpl_fallback=value.zpl_fallback,
        )
    except NonConvergenceError as exc:
        rec.update(g2=exc.trace[-1][1], m_max=exc.trace[-1][0], error=str(exc))
    except BlockadeError as exc:
        rec["error"] = f"{type(exc).__name__}: {exc}"
    return rec


def _record_at(args):
    spec, index, values = args
    return _record(spec, index, values)


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.spec.shape

    def column(self, name):
        return np.array([r[name] for r in self.records])

    def grid(self, name):
        return self.column(name).reshape(self.shape or (1,))

    @property
    def all_converged(self):
        return all(r["converged"] for r in self.records)


def resolve_threads(threads=None):
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ParameterDomainError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            threads = os.cpu_count() or 1
    threads = int(threads)
    if threads < 1:
        raise ParameterDomainError(f"thread count must be >= 1, got {threads}")
    return threads


def run_grid(spec, threads=None):
    """Evaluate every grid point of ``spec``; per-point failures land in the record's ``error`` field."""
    points = spec.axis_value_grid() if spec.axes else [()]
    tasks = [(spec, i, v) for i, v in enumerate(points)]
    workers = min(resolve_threads(threads), len(tasks))
    if workers <= 1:
        records = [_record_at(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map yields in submission order, which restores grid order
            records = list(pool.map(_record_at, tasks, chunksize=chunk))
    metadata = {
        "spec": spec.echo(),
        "spec_sha256": spec.digest(),
        "units": UNIT_NOTE,
        "version": __version__,
        "shape": list(spec.shape),
    }
    return SweepResult(spec, records, metadata)


def flat_params(params, motion=None):
    """Flat parameter map of parameter dataclasses, as used by :class:`SweepSpec`."""
    flat = {k: v for k, v in vars(params).items() if v is not None}
    if motion is not None:
        flat.update(omega_m=motion.omega_m, omega_rec=motion.omega_rec)
    return flat


@dataclass(frozen=True)
class ZplTrace:
    kc_x0: np.ndarray
    delta_c: np.ndarray
    g2: np.ndarray
    fallback: np.ndarray
    result: SweepResult = field(repr=False)


def follow_zpl(model, params, motion=None, x0_range=(0.0, math.pi / 2), points=61, *, sideband=0, zpl_mode="numeric",
               m_max=None, tol=CONVERGENCE_TOL, threads=None):
    """g2 along the zero-phonon line (or phonon sideband ``sideband``) as kc_x0 is scanned."""
    flat = flat_params(params, motion)
    flat.pop("kc_x0", None)
    if model == "om":
        flat.pop("omega_rec", None)
    spec = SweepSpec(
        model=model,
        params=flat,
        axes=(Axis("kc_x0", x0_range[0], x0_range[1], points),),
        detuning="zpl" if sideband == 0 else f"sideband:{sideband}",
        order=motion.expansion_order.value if motion is not None else "linear",
        zpl_mode=zpl_mode,
        tol=tol,
        m_max=m_max,
    )
    result = run_grid(spec, threads)
    return ZplTrace(
        result.column("kc_x0"), result.column("delta_c"), result.column("g2"), result.column("zpl_fallback"), result
    )


def symmetry_deviation(result, name="g2", axis="kc_x0"):
    """Largest |f(x) - f(-x)| over a grid whose ``axis`` is symmetric about zero."""
    idx = [a.name for a in result.spec.axes].index(axis)
    values = result.grid(name)
    flipped = np.flip(values, axis=idx)
    coords = result.spec.axes[idx].values()
    if not np.allclose(coords, -coords[::-1], atol=1e-12):
        raise ParameterDomainError(f"axis {axis!r} is not symmetric about zero")
    return float(np.nanmax(np.abs(values - flipped)))
