"""Configurations behind every figure table.

Each preset maps a table suffix to a configuration in the same nested form a
TOML file takes.  Grid resolutions and the x0 / delta_c / omega_m / Delta
ranges are chosen to frame the features of each figure; they are
approximate choices, not quoted values.
"""

from __future__ import annotations

import copy

from optoblockade.cli.config import merge, parse_config_dict
from optoblockade.errors import ParameterDomainError

HALF_PI = "pi/2"

_MEMBRANE = {"g_m0": "0.16 MHz", "kappa": "0.02 MHz", "omega_m": "0.2 MHz"}
_IDEAL_JC = {"g0": "2 MHz", "kappa": "0.02 MHz", "gamma": "0.02 MHz", "Delta": "3 g0"}
_IDEAL_MOTION = {
    "g0": "10 MHz",
    "kappa": "0.02 MHz",
    "gamma": "0.02 MHz",
    "Delta": "5 g0",
    "omega_m": "0.5 MHz",
    "omega_rec": "6.8 kHz",
}
_CA = {"g0": "1.4 MHz", "kappa": "0.05 MHz", "gamma": "11 MHz", "omega_rec": "6.8 kHz"}


def _x0(points, start=f"-{HALF_PI}", stop=HALF_PI):
    return {"name": "kc_x0", "start": start, "stop": stop, "points": points}


def _table(model, params, axes, detuning="zpl", order="linear"):
    return {
        "command": "sweep",
        "model": model,
        "detuning": detuning,
        "params": dict(params),
        "options": {"order": order},
        "axes": list(axes),
    }


def _grid_and_trace(model, params, delta_c_axis, order="linear", points=(61, 61), trace_points=121):
    return {
        "grid": _table(model, params, [_x0(points[0]), delta_c_axis], detuning="fixed", order=order),
        "zpl": _table(model, params, [_x0(trace_points)], order=order),
    }


_OM_OMEGA_AXES = [
    {"name": "omega_m", "start": "0.02 MHz", "stop": "0.5 MHz", "points": 31, "spacing": "log"},
]

PRESETS = {
    "fig1c": {
        "description": "optomechanical g2 on the ZPL versus g_m/omega_m and kappa/omega_m",
        "tables": {
            "": _table(
                "om",
                {"omega_m": "1 MHz", "kappa": "0.1 MHz", "g_m": "0.5 MHz"},
                [
                    {"name": "g_m/omega_m", "start": 0.05, "stop": 1.2, "points": 61},
                    {"name": "kappa/omega_m", "start": 0.01, "stop": 1.0, "points": 41, "spacing": "log"},
                ],
            )
        },
    },
    "fig1d": {
        "description": "optomechanical g2 versus x0 and delta_c/omega_m, and along the ZPL",
        "tables": _grid_and_trace(
            "om", _MEMBRANE, {"name": "delta_c/omega_m", "start": -1.0, "stop": 1.25, "points": 61}
        ),
    },
    "fig2b": {
        "description": "static Jaynes-Cummings g2 versus x0 and delta_c near the photon-like level",
        "tables": _grid_and_trace(
            "jc-static", _IDEAL_JC, {"name": "delta_c", "start": "-0.8 MHz", "stop": "0.2 MHz", "points": 61}
        ),
    },
    "fig3a": {
        "description": "moving atom, idealised parameters, Delta = 5 g0",
        "tables": _grid_and_trace(
            "jc-motion", _IDEAL_MOTION, {"name": "delta_c", "start": "-2.5 MHz", "stop": "1 MHz", "points": 71}
        ),
    },
    "fig3b": {
        "description": "moving Ca+ ion, Delta = 12 g0, omega_m = 0.1 MHz",
        "tables": _grid_and_trace(
            "jc-motion",
            dict(_CA, Delta="12 g0", omega_m="0.1 MHz"),
            {"name": "delta_c", "start": "-0.25 MHz", "stop": "0.15 MHz", "points": 61},
        ),
    },
    "fig3c": {
        "description": "Ca+ g2 on the ZPL at kc_x0 = pi/3 versus omega_m and Delta/g0",
        "tables": {
            "": _table(
                "jc-motion",
                dict(_CA, kc_x0="pi/3", Delta="12 g0", omega_m="0.1 MHz"),
                _OM_OMEGA_AXES + [{"name": "Delta/g0", "start": 4.0, "stop": 24.0, "points": 31}],
            )
        },
    },
    "fig3d": {
        "description": "Ca+ g2 on the ZPL versus x0 and omega_m, Delta = 12 g0",
        "tables": {
            "": _table(
                "jc-motion",
                dict(_CA, Delta="12 g0", omega_m="0.1 MHz"),
                [_x0(41, start=0.0)] + _OM_OMEGA_AXES,
            )
        },
    },
    "figS1a": {
        "description": "Ca+ with quadratic mode-profile expansion, Delta = 10 g0, omega_m = 0.09 MHz",
        "tables": _grid_and_trace(
            "jc-motion",
            dict(_CA, Delta="10 g0", omega_m="0.09 MHz"),
            {"name": "delta_c", "start": "-0.25 MHz", "stop": "0.15 MHz", "points": 61},
            order="quadratic",
        ),
    },
    "figS1b": {
        "description": "ZPL traces at quadratic and linear order, Delta = 10 g0, omega_m = 0.09 MHz",
        "tables": {
            order: _table("jc-motion", dict(_CA, Delta="10 g0", omega_m="0.09 MHz"), [_x0(121)], order=order)
            for order in ("quadratic", "linear")
        },
    },
    "figS1c": {
        "description": "quadratic order g2 on the ZPL at kc_x0 = 1.15 versus omega_m and Delta/g0",
        "tables": {
            "": _table(
                "jc-motion",
                dict(_CA, kc_x0=1.15, Delta="10 g0", omega_m="0.09 MHz"),
                _OM_OMEGA_AXES + [{"name": "Delta/g0", "start": 4.0, "stop": 24.0, "points": 31}],
                order="quadratic",
            )
        },
    },
    "figS1d": {
        "description": "quadratic order g2 on the ZPL versus x0 and omega_m, Delta = 10 g0",
        "tables": {
            "": _table(
                "jc-motion",
                dict(_CA, Delta="10 g0", omega_m="0.09 MHz"),
                [_x0(41, start=0.0)] + _OM_OMEGA_AXES,
                order="quadratic",
            )
        },
    },
}


def preset_names():
    return tuple(PRESETS)


def preset_tables(name, overrides=None, points=None):
    """{suffix: RunConfig} of preset ``name``; ``overrides`` go through the normal config merge.

    ``points`` replaces every axis resolution, for quick previews.
    """
    if name not in PRESETS:
        raise ParameterDomainError(f"unknown figure preset {name!r}; expected one of {list(PRESETS)}")
    tables = {}
    for suffix, raw in PRESETS[name]["tables"].items():
        data = copy.deepcopy(raw)
        data["preset"] = name
        if overrides:
            data = merge(data, overrides)
        if points is not None:
            for axis in data.get("axes", []):
                axis["points"] = points
        tables[suffix] = parse_config_dict(data)
    return tables
