"""CSV and JSON writers for sweep results and single-point tables.

Column contract of a sweep table, in order:

    <axis columns>   one per axis; dimensional axes carry a ``_MHz`` suffix
    g2               normalised g2(0) of the cavity field
    zpl_delta_c_MHz  tracked resonance (ZPL, or the requested sideband)
    m_max            phonon cutoff the value was computed at
    converged        true if g2 moved by less than the tolerance on doubling m_max
    delta_c_MHz      laser-cavity detuning actually driven
    mean_photon      <a^dag a> at the reference drive
    zpl_fallback     true if the resonance was mixed and the analytic value was used
    error            empty, or the reason the point failed

Frequencies are linear (the value f of "2 pi x f MHz").  Floats are written
with 17 significant digits, so tables round-trip to the exact doubles.
"""

from __future__ import annotations

import csv
import io
import json
import math

from optoblockade import __version__
from optoblockade.sweep import UNIT_NOTE, is_dimensional
from optoblockade.units import to_mhz

CSV_UNIT_NOTE = "frequencies in MHz (linear, f of 2 pi x f); kc_x0 in rad"
BASE_COLUMNS = ("g2", "zpl_delta_c_MHz", "m_max", "converged")
EXTRA_COLUMNS = ("delta_c_MHz", "mean_photon", "zpl_fallback", "error")


class EmitError(OSError):
    """Output could not be written; carries the path."""


def axis_column(name):
    return f"{name}_MHz" if is_dimensional(name) else name


def table_rows(result):
    """Sweep records as ordered dicts of output columns (linear MHz)."""
    rows = []
    for rec in result.records:
        row = {}
        for axis in result.spec.axes:
            value = rec[axis.name]
            row[axis_column(axis.name)] = to_mhz(value) if is_dimensional(axis.name) else value
        row.update(
            g2=rec["g2"],
            zpl_delta_c_MHz=to_mhz(rec["zpl_delta_c"]),
            m_max=rec["m_max"],
            converged=rec["converged"],
            delta_c_MHz=to_mhz(rec["delta_c"]),
            mean_photon=rec["mean_photon"],
            zpl_fallback=rec["zpl_fallback"],
            error=rec["error"],
        )
        rows.append(row)
    return rows


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_csv(rows, stream, columns=None):
    if columns is None:
        columns = list(rows[0]) if rows else []
    writer = csv.writer(stream, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])


def write_json(document, stream):
    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        return _json_value(obj)

    json.dump(clean(document), stream, indent=2, allow_nan=False)
    stream.write("\n")


def result_document(result, config_echo=None):
    metadata = dict(result.metadata)
    metadata["units"] = {"records": CSV_UNIT_NOTE, "spec": UNIT_NOTE}
    if config_echo is not None:
        metadata["config"] = config_echo
    return {"metadata": metadata, "records": table_rows(result)}


def emit(result, fmt, stream, config_echo=None):
    """Write a sweep result to ``stream`` as csv or json."""
    if fmt == "csv":
        write_csv(table_rows(result), stream)
    elif fmt == "json":
        write_json(result_document(result, config_echo), stream)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def emit_table(rows, fmt, stream, metadata=None):
    """Write plain rows (single points, spectra, effective parameters)."""
    if fmt == "csv":
        write_csv(rows, stream)
    elif fmt == "json":
        meta = {"version": __version__, "units": CSV_UNIT_NOTE}
        meta.update(metadata or {})
        write_json({"metadata": meta, "records": rows}, stream)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def emit_text(result, fmt, config_echo=None):
    buf = io.StringIO()
    emit(result, fmt, buf, config_echo)
    return buf.getvalue()


def table_text(rows, fmt, metadata=None):
    buf = io.StringIO()
    emit_table(rows, fmt, buf, metadata)
    return buf.getvalue()


def write_file(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc.strerror or exc}") from None
