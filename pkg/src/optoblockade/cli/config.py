"""Run configuration: TOML files and command-line overrides.

Dimensional inputs are strings carrying a unit, as quoted in experiments:
``omega_m = "0.2 MHz"`` means omega_m = 2 pi x 0.2 MHz.  Accepted units are
GHz, MHz, kHz, Hz, rad/us (the internal unit itself) or the name of another
dimensional parameter (``Delta = "12 g0"``).  ``kc_x0`` may be written as a
number or a multiple of pi (``"pi/3"``).  ``drive`` is E0 / sqrt(kappa).

    command = "sweep"
    model = "jc-motion"
    detuning = "zpl"

    [params]
    g0 = "1.4 MHz"
    Delta = "12 g0"

    [options]
    order = "linear"

    [[axes]]
    name = "kc_x0"
    start = 0.0
    stop = "pi/2"
    points = 61

    [output]
    format = "csv"
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

from optoblockade.errors import ParameterDomainError
from optoblockade.fockspace import ExpansionOrder
from optoblockade.spectra import MODELS
from optoblockade.sweep import (
    CONVERGENCE_TOL,
    M_MAX_CEILING,
    MODEL_FIELDS,
    Axis,
    SweepSpec,
    is_dimensional,
    parse_detuning,
    parse_solver,
)
from optoblockade.units import SCALES, TWO_PI

COMMANDS = ("g2", "spectrum", "effective", "sweep", "figure")
FORMATS = ("csv", "json")
TOP_KEYS = ("command", "model", "preset", "detuning", "params", "options", "axes", "output")
OPTION_KEYS = ("order", "zpl", "solver", "mmax_tol", "m_max_ceiling", "m_max", "n_max", "threads", "dispersive")
OUTPUT_KEYS = ("path", "format")
AXIS_KEYS = ("name", "start", "stop", "points", "spacing")
INTERNAL_UNIT = "rad/us"

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*\*?\s*([A-Za-z_/][A-Za-z_0-9/]*)\s*$")
_PI = re.compile(r"^\s*([-+])?\s*((?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


class ConfigError(ParameterDomainError):
    """Invalid configuration; the message starts with the offending key path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def _params_of(model):
    names = [n for n in MODEL_FIELDS[model] if n != "drive_E0"]
    return tuple(names) + ("drive",)


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; ``params`` hold internal angular units (and ``drive`` as E0/sqrt(kappa))."""

    command: str
    model: str = "jc-motion"
    params: dict = field(default_factory=dict)
    axes: tuple = ()
    detuning: str = "zpl"
    order: str = "linear"
    zpl: str = "numeric"
    solver: str = "ladder"
    mmax_tol: float = CONVERGENCE_TOL
    m_max_ceiling: int = M_MAX_CEILING
    m_max: int | None = None
    n_max: int = 2
    threads: int | None = None
    dispersive: bool = False
    out: str | None = None
    format: str = "csv"
    preset: str | None = None

    def flat_params(self):
        """Parameter map in the form :class:`SweepSpec` takes (``drive`` becomes ``drive_E0``)."""
        flat = {k: v for k, v in self.params.items() if k != "drive"}
        if "drive" in self.params:
            if "kappa" not in flat:
                raise ConfigError("params.drive", "needs kappa to set the absolute drive")
            flat["drive_E0"] = self.params["drive"] * math.sqrt(flat["kappa"])
        return flat

    def sweep_spec(self, with_axes=True):
        try:
            return SweepSpec(
                model=self.model,
                params=self.flat_params(),
                axes=self.axes if with_axes else (),
                detuning=self.detuning,
                order=self.order,
                zpl_mode=self.zpl,
                solver=self.solver,
                tol=self.mmax_tol,
                m_max_ceiling=self.m_max_ceiling,
                m_max=self.m_max,
                n_max=self.n_max,
            )
        except ConfigError:
            raise
        except ParameterDomainError as exc:
            raise ConfigError("config", str(exc)) from None

    def echo(self):
        """Plain nested dict that :func:`parse_config_dict` maps back to an equal RunConfig."""
        out = {"command": self.command, "model": self.model, "detuning": self.detuning}
        if self.preset is not None:
            out["preset"] = self.preset
        out["params"] = {k: format_param(k, v) for k, v in self.params.items()}
        options = {
            "order": self.order,
            "zpl": self.zpl,
            "solver": self.solver,
            "mmax_tol": self.mmax_tol,
            "m_max_ceiling": self.m_max_ceiling,
            "n_max": self.n_max,
            "dispersive": self.dispersive,
        }
        if self.m_max is not None:
            options["m_max"] = self.m_max
        if self.threads is not None:
            options["threads"] = self.threads
        out["options"] = options
        if self.axes:
            out["axes"] = [
                {
                    "name": a.name,
                    "start": format_param(a.name, a.start),
                    "stop": format_param(a.name, a.stop),
                    "points": a.points,
                    "spacing": a.spacing,
                }
                for a in self.axes
            ]
        output = {"format": self.format}
        if self.out is not None:
            output["path"] = self.out
        out["output"] = output
        return out


def format_param(name, value):
    """Text form of an internal value that parses back to exactly the same float."""
    if not is_dimensional(name) or name == "drive":
        return float(value)
    f = value / TWO_PI
    # shortest decimal whose conversion gives back the same double
    for digits in range(1, 18):
        candidate = float(f"{f:.{digits}g}")
        if TWO_PI * (candidate * SCALES["MHz"]) == value:
            return f"{candidate!r} MHz"
    for candidate in (math.nextafter(f, math.inf), math.nextafter(f, -math.inf)):
        if TWO_PI * (candidate * SCALES["MHz"]) == value:
            return f"{candidate!r} MHz"
    return f"{float(value)!r} {INTERNAL_UNIT}"


def _number(path, value):
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        match = _PI.match(value)
        if match:
            sign = -1.0 if match.group(1) == "-" else 1.0
            coeff = float(match.group(2)) if match.group(2) else 1.0
            den = float(match.group(3)) if match.group(3) else 1.0
            return sign * coeff * math.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(path, f"expected a number, got {value!r}")


def _quantity(path, value, refs):
    """(internal value, None) or (coefficient, referenced parameter)."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        raise ConfigError(path, f"missing unit on {value!r}; write e.g. \"{value} MHz\"")
    if not isinstance(value, str):
        raise ConfigError(path, f"expected a string like \"0.2 MHz\", got {value!r}")
    try:
        float(value)
    except ValueError:
        pass
    else:
        raise ConfigError(path, f"missing unit on {value!r}; write e.g. \"{value} MHz\"")
    match = _QUANTITY.match(value)
    if not match:
        raise ConfigError(path, f"cannot parse {value!r}; expected '<number> <unit>'")
    number, unit = float(match.group(1)), match.group(2)
    if unit in SCALES:
        return TWO_PI * (number * SCALES[unit]), None
    if unit == INTERNAL_UNIT:
        return number, None
    if unit in refs and is_dimensional(unit):
        return number, unit
    raise ConfigError(path, f"unknown unit {unit!r}; expected one of {sorted(SCALES) + [INTERNAL_UNIT]} or a parameter name")


def _resolve_params(raw, model):
    allowed = _params_of(model)
    pending, params = {}, {}
    for key, value in raw.items():
        path = f"params.{key}"
        if key not in allowed:
            raise ConfigError(path, f"unknown parameter for model {model!r}; expected one of {list(allowed)}")
        if not is_dimensional(key) or key == "drive":
            params[key] = _number(path, value)
            if key == "drive" and params[key] < 0:
                raise ConfigError(path, "drive must be >= 0")
            continue
        amount, ref = _quantity(path, value, allowed)
        if ref is None:
            params[key] = amount
        else:
            pending[key] = (amount, ref)
    while pending:
        progress = False
        for key, (coeff, ref) in list(pending.items()):
            if ref in params:
                params[key] = coeff * params[ref]
                del pending[key]
                progress = True
        if not progress:
            key, (_, ref) = next(iter(pending.items()))
            raise ConfigError(f"params.{key}", f"refers to {ref!r}, which has no value (or the references form a cycle)")
    return {k: params[k] for k in raw}


def _axis(path, raw, allowed):
    if not isinstance(raw, dict):
        raise ConfigError(path, "each axis must be a table")
    for key in raw:
        if key not in AXIS_KEYS:
            raise ConfigError(f"{path}.{key}", f"unknown key; expected one of {list(AXIS_KEYS)}")
    for key in ("name", "start", "stop", "points"):
        if key not in raw:
            raise ConfigError(f"{path}.{key}", "missing")
    name = raw["name"]
    for part in str(name).split("/"):
        if part not in allowed or part == "drive":
            raise ConfigError(f"{path}.name", f"{part!r} is not a parameter of this model")
    ends = []
    for key in ("start", "stop"):
        if is_dimensional(name):
            value, ref = _quantity(f"{path}.{key}", raw[key], ())
            ends.append(value)
        else:
            ends.append(_number(f"{path}.{key}", raw[key]))
    points = raw["points"]
    if isinstance(points, bool) or not isinstance(points, int):
        raise ConfigError(f"{path}.points", f"expected an integer, got {points!r}")
    try:
        return Axis(name, ends[0], ends[1], points, raw.get("spacing", "linear"))
    except ParameterDomainError as exc:
        raise ConfigError(path, str(exc)) from None


def _choice(path, value, choices):
    if value not in choices:
        raise ConfigError(path, f"expected one of {list(choices)}, got {value!r}")
    return value


def _int(path, value, minimum):
    if isinstance(value, str):
        try:
            value = int(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(path, f"expected an integer >= {minimum}, got {value!r}")
    return value


def _bool(path, value):
    if isinstance(value, str) and value.lower() in ("true", "false"):
        return value.lower() == "true"
    if not isinstance(value, bool):
        raise ConfigError(path, f"expected true or false, got {value!r}")
    return value


def parse_config_dict(data):
    """Validate a nested mapping (parsed TOML, or a JSON ``config`` echo) into a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a table")
    for key in data:
        if key not in TOP_KEYS:
            raise ConfigError(key, f"unknown key; expected one of {list(TOP_KEYS)}")
    for key in ("params", "options", "output"):
        if key in data and not isinstance(data[key], dict):
            raise ConfigError(key, "must be a table")
    command = _choice("command", data.get("command", "g2"), COMMANDS)
    model = _choice("model", data.get("model", "jc-motion"), MODELS)
    detuning = data.get("detuning", "zpl")
    try:
        parse_detuning(detuning)
    except ParameterDomainError as exc:
        raise ConfigError("detuning", str(exc)) from None

    params = _resolve_params(data.get("params", {}), model)

    opts = data.get("options", {})
    for key in opts:
        if key not in OPTION_KEYS:
            raise ConfigError(f"options.{key}", f"unknown key; expected one of {list(OPTION_KEYS)}")
    kwargs = {}
    if "order" in opts:
        try:
            kwargs["order"] = ExpansionOrder.parse(opts["order"]).value
        except ParameterDomainError as exc:
            raise ConfigError("options.order", str(exc)) from None
    if "zpl" in opts:
        kwargs["zpl"] = _choice("options.zpl", opts["zpl"], ("numeric", "analytic"))
    if "solver" in opts:
        try:
            parse_solver(opts["solver"])
        except ParameterDomainError as exc:
            raise ConfigError("options.solver", str(exc)) from None
        kwargs["solver"] = opts["solver"]
    if "mmax_tol" in opts:
        tol = _number("options.mmax_tol", opts["mmax_tol"])
        if not tol > 0:
            raise ConfigError("options.mmax_tol", f"must be > 0, got {tol}")
        kwargs["mmax_tol"] = tol
    if "m_max_ceiling" in opts:
        kwargs["m_max_ceiling"] = _int("options.m_max_ceiling", opts["m_max_ceiling"], 16)
    if "m_max" in opts:
        kwargs["m_max"] = _int("options.m_max", opts["m_max"], 1)
    if "n_max" in opts:
        kwargs["n_max"] = _int("options.n_max", opts["n_max"], 2)
    if "threads" in opts:
        kwargs["threads"] = _int("options.threads", opts["threads"], 1)
    if "dispersive" in opts:
        kwargs["dispersive"] = _bool("options.dispersive", opts["dispersive"])

    allowed = _params_of(model)
    raw_axes = data.get("axes", [])
    if not isinstance(raw_axes, list):
        raise ConfigError("axes", "must be an array of tables")
    axes = tuple(_axis(f"axes[{i}]", a, allowed) for i, a in enumerate(raw_axes))

    output = data.get("output", {})
    for key in output:
        if key not in OUTPUT_KEYS:
            raise ConfigError(f"output.{key}", f"unknown key; expected one of {list(OUTPUT_KEYS)}")
    fmt = _choice("output.format", output.get("format", "csv"), FORMATS)
    preset = data.get("preset")
    if preset is not None and not isinstance(preset, str):
        raise ConfigError("preset", f"expected a string, got {preset!r}")
    return RunConfig(
        command=command,
        model=model,
        params=params,
        axes=axes,
        detuning=detuning,
        out=output.get("path"),
        format=fmt,
        preset=preset,
        **kwargs,
    )


def parse_config(text="", overrides=None):
    """Parse TOML ``text`` and apply ``overrides`` (a nested mapping of the same shape; flags win)."""
    try:
        data = tomllib.loads(text) if text else {}
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML ({exc})") from None
    if overrides:
        data = merge(data, overrides)
    return parse_config_dict(data)


def merge(base, overrides):
    out = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


def dump_config(config):
    """TOML text of a RunConfig; ``parse_config(dump_config(c)) == c``."""
    return tomli_w.dumps(config.echo())
