"""``optoblockade`` command: g2, spectrum, effective, sweep and figure tables."""

from __future__ import annotations

import argparse
import dataclasses
import io
import os
import sys

from optoblockade import __version__, effective, spectra
from optoblockade.cli.config import COMMANDS, ConfigError, parse_config
from optoblockade.cli.emit import EmitError, emit_text, table_text, write_file, write_json
from optoblockade.cli.presets import PRESETS, preset_tables
from optoblockade.errors import BlockadeError, ParameterDomainError
from optoblockade.sweep import THREADS_ENV, make_point, run_grid
from optoblockade.units import to_mhz

SPECTRUM_M_MAX = 16


def build_parser():
    parser = argparse.ArgumentParser(
        prog="optoblockade",
        description="Photon blockade of a trapped atom or membrane in a driven cavity.",
        epilog=f"Presets: {', '.join(PRESETS)}.  Worker count defaults to ${THREADS_ENV}, else the CPU count.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("preset", nargs="?", help="figure preset (figure command only)")
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--out", help="output file (figure: output directory); default stdout / current directory")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--model", choices=spectra.MODELS)
    parser.add_argument("--order", choices=("linear", "quadratic", "exact"))
    parser.add_argument("--zpl", choices=("numeric", "analytic"), help="how the zero-phonon line is located")
    parser.add_argument("--detuning", help="fixed, zpl or sideband:<m>")
    parser.add_argument("--solver", help="ladder (default) or finite:<E0/sqrt(kappa)>")
    parser.add_argument("--mmax-tol", help="relative g2 tolerance of the phonon-cutoff doubling")
    parser.add_argument("--m-max", help="fixed phonon cutoff instead of convergence")
    parser.add_argument("--threads", help="worker processes for sweeps")
    parser.add_argument("--dispersive", action="store_true", help="effective parameters with delta0 = -Delta")
    parser.add_argument(
        "--param", action="append", default=[], metavar="KEY=VALUE", help='parameter override, e.g. omega_m="0.2 MHz"'
    )
    parser.add_argument(
        "--axis", action="append", default=[], metavar="NAME:START:STOP:POINTS[:log]", help="sweep axis (replaces file axes)"
    )
    parser.add_argument("--points", type=int, help="figure: override every axis resolution")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def _axis_override(text):
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise ConfigError("--axis", f"expected NAME:START:STOP:POINTS[:log], got {text!r}")
    try:
        points = int(parts[3])
    except ValueError:
        raise ConfigError("--axis", f"points must be an integer, got {parts[3]!r}") from None
    axis = {"name": parts[0], "start": parts[1], "stop": parts[2], "points": points}
    if len(parts) == 5:
        axis["spacing"] = parts[4]
    return axis


def overrides_from_args(args):
    """Nested override mapping built from the command-line flags."""
    over = {"command": args.command}
    options = {}
    for flag, key in (("order", "order"), ("zpl", "zpl"), ("solver", "solver"), ("mmax_tol", "mmax_tol"),
                      ("m_max", "m_max"), ("threads", "threads")):
        value = getattr(args, flag)
        if value is not None:
            options[key] = value
    if args.dispersive:
        options["dispersive"] = True
    if options:
        over["options"] = options
    if args.model is not None:
        over["model"] = args.model
    if args.detuning is not None:
        over["detuning"] = args.detuning
    params = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError("--param", f"expected KEY=VALUE, got {item!r}")
        params[key.strip()] = value.strip()
    if params:
        over["params"] = params
    if args.axis:
        over["axes"] = [_axis_override(a) for a in args.axis]
    output = {}
    if args.format is not None:
        output["format"] = args.format
    if args.out is not None and args.command != "figure":
        output["path"] = args.out
    if output:
        over["output"] = output
    return over


def cmd_g2(config):
    result = run_grid(config.sweep_spec(with_axes=False), config.threads)
    rec = result.records[0]
    if config.format == "json":
        document = {
            "g2": rec["g2"],
            "zpl_delta_c": to_mhz(rec["zpl_delta_c"]),
            "m_max_used": rec["m_max"],
            "converged": rec["converged"],
            "delta_c": to_mhz(rec["delta_c"]),
            "mean_photon": rec["mean_photon"],
            "zpl_fallback": rec["zpl_fallback"],
            "error": rec["error"],
            "params_echo": config.echo()["params"],
            "metadata": dict(result.metadata, units="frequencies in MHz (linear)", config=config.echo()),
        }
        buf = io.StringIO()
        write_json(document, buf)
        text = buf.getvalue()
    else:
        text = emit_text(result, "csv")
    return text, 1 if rec["error"] else 0


def cmd_spectrum(config):
    spec = config.sweep_spec(with_axes=False)
    m_max = config.m_max or SPECTRUM_M_MAX
    point = make_point(spec, ())
    motion = None if point.motion is None else dataclasses.replace(point.motion, m_max=m_max)
    blocks = spectra.build_model(config.model, point.params, motion, n_max=config.n_max,
                                 m_max=None if point.static else m_max)
    rows = []
    for k in range(1, config.n_max + 1):
        res = spectra.numeric_manifold_spectrum(blocks, k)
        for i, (level, overlap, label) in enumerate(zip(res.levels, res.overlaps, res.labels)):
            rows.append({
                "manifold": k,
                "index": i,
                "level_MHz": to_mhz(float(level.real)),
                "half_width_MHz": to_mhz(float(-level.imag)),
                "overlap": float(overlap),
                "label": label,
            })
    return table_text(rows, config.format, {"config": config.echo(), "m_max": m_max}), 0


def cmd_effective(config):
    if config.model not in ("jc-motion", "om-effective"):
        raise ConfigError("model", "effective parameters need a moving atom (jc-motion or om-effective)")
    spec = config.sweep_spec(with_axes=False)
    point = make_point(spec, ())
    params = point.params
    if spec.detuning != "fixed":
        delta_c, _ = point.resonance(config.m_max or SPECTRUM_M_MAX)
        params = dataclasses.replace(params, delta_c=delta_c)
    motion = point.motion
    kw = {"dispersive": config.dispersive}
    model = effective.effective_model(params, motion, **kw)
    d0 = -params.Delta if config.dispersive else params.delta0
    row = {
        "delta_c_MHz": to_mhz(params.delta_c),
        "delta0_MHz": to_mhz(d0),
        "eta_ld": model.eta_ld,
        "light_shift_MHz": to_mhz(effective.light_shift(params, d0)),
        "g_eff_MHz": to_mhz(model.g_eff),
        "kappa_eff_MHz": to_mhz(model.kappa_eff),
        "delta_c_dressed_MHz": to_mhz(model.delta_c_dressed),
        "two_level_anharmonicity_MHz": to_mhz(effective.two_level_anharmonicity(params)),
        "motional_anharmonicity_MHz": to_mhz(effective.motional_anharmonicity(params, motion, **kw)),
        "quality": model.quality,
        "dispersive": config.dispersive,
    }
    return table_text([row], config.format, {"config": config.echo()}), 0


def cmd_sweep(config):
    if not config.axes:
        raise ConfigError("axes", "a sweep needs at least one axis")
    result = run_grid(config.sweep_spec(), config.threads)
    return emit_text(result, config.format, config.echo()), 0


def run_figure(name, overrides=None, points=None, out_dir=".", fmt=None):
    """Run every table of a preset and write them to ``out_dir``; returns [(path, result)]."""
    written = []
    overrides = dict(overrides or {})
    if fmt is not None:
        overrides.setdefault("output", {})["format"] = fmt
    for suffix, config in preset_tables(name, overrides, points).items():
        result = run_grid(config.sweep_spec(), config.threads)
        stem = f"{name}_{suffix}" if suffix else name
        path = os.path.join(out_dir, f"{stem}.{config.format}")
        write_file(path, emit_text(result, config.format, config.echo()))
        written.append((path, result))
    return written


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "figure":
            if args.preset is None:
                parser.error(f"figure needs a preset: {', '.join(PRESETS)}")
            over = overrides_from_args(args)
            over.pop("command")
            out_dir = args.out or "."
            os.makedirs(out_dir, exist_ok=True)
            status = 0
            for path, result in run_figure(args.preset, over, args.points, out_dir):
                failed = sum(1 for r in result.records if r["error"])
                flag = "converged" if result.all_converged else "NOT converged"
                print(f"{path}: {len(result.records)} rows, {flag}, {failed} failed points")
                status = status or (0 if result.all_converged and not failed else 1)
            return status
        if args.preset is not None:
            parser.error("only the figure command takes a preset")
        text = ""
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(args.config, f"cannot read ({exc.strerror or exc})") from None
        config = parse_config(text, overrides_from_args(args))
        handler = {"g2": cmd_g2, "spectrum": cmd_spectrum, "effective": cmd_effective, "sweep": cmd_sweep}
        output, status = handler[config.command](config)
        if config.out:
            write_file(config.out, output)
        else:
            sys.stdout.write(output)
        return status
    except (ConfigError, ParameterDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EmitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BlockadeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
