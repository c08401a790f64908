import csv
import importlib
import io
import json
import math

import pytest

from optoblockade import sweep
from optoblockade.cli.config import ConfigError, RunConfig, dump_config, format_param, parse_config, parse_config_dict
from optoblockade.cli.emit import EmitError, emit, write_file
from optoblockade.cli.main import main, run_figure
from optoblockade.cli.presets import PRESETS, preset_tables
from optoblockade.units import TWO_PI, khz, mhz

# the package re-exports main(), which shadows the submodule attribute
cli_main = importlib.import_module("optoblockade.cli.main")

CA_TOML = """
command = "g2"
model = "jc-motion"

[params]
g0 = "1.4 MHz"
kappa = "0.05 MHz"
gamma = "11 MHz"
Delta = "12 g0"
omega_m = "0.1 MHz"
omega_rec = "6.8 kHz"
kc_x0 = "pi/3"
"""


def run(argv, capsys):
    status = main(argv)
    out, err = capsys.readouterr()
    return status, out, err


def test_unit_rule():
    config = parse_config('[params]\nomega_m = "0.2 MHz"\nomega_rec = "6.8 kHz"\ng0 = "12 omega_m"\ngamma = "0.5 rad/us"')
    assert config.params["omega_m"] == pytest.approx(TWO_PI * 0.2)
    assert config.params["omega_rec"] == pytest.approx(khz(6.8))
    assert config.params["g0"] == pytest.approx(12 * TWO_PI * 0.2)
    assert config.params["gamma"] == 0.5
    assert parse_config('[params]\nkappa = "1 GHz"').params["kappa"] == pytest.approx(mhz(1000))


@pytest.mark.parametrize("text, path", [
    ('[params]\nomega_m = "0.2"', "params.omega_m"),
    ("[params]\nomega_m = 0.2", "params.omega_m"),
    ('[params]\nomega_m = "0.2 furlongs"', "params.omega_m"),
    ('[params]\nomega = "0.2 MHz"', "params.omega"),
    ('colour = "red"', "colour"),
    ("[options]\nspeed = 3", "options.speed"),
    ('[options]\norder = "cubic"', "options.order"),
    ("[options]\nm_max = 0", "options.m_max"),
    ('[output]\nformat = "xml"', "output.format"),
    ('detuning = "blue"', "detuning"),
    ('[params]\ng0 = "2 Delta"\nDelta = "3 g0"', "params.g0"),
    ('[[axes]]\nname = "omega_m"\nstart = 0.1\nstop = "1 MHz"\npoints = 3', "axes[0].start"),
    ('[[axes]]\nname = "spin"\nstart = 0.1\nstop = 1\npoints = 3', "axes[0].name"),
    ('[[axes]]\nname = "kc_x0"\nstart = 0\nstop = 1', "axes[0].points"),
])
def test_errors_name_the_key(text, path):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.path == path
    assert str(info.value).startswith(path + ":")


def test_pi_expressions_and_dimensionless_inputs():
    for text, value in (('"pi/3"', math.pi / 3), ('"-pi/2"', -math.pi / 2), ('"2pi/3"', 2 * math.pi / 3),
                        ("0.25", 0.25), ('"pi"', math.pi)):
        assert parse_config(f"[params]\nkc_x0 = {text}").params["kc_x0"] == pytest.approx(value)
    config = parse_config('[params]\nkappa = "0.05 MHz"\ndrive = 0.01')
    assert config.flat_params()["drive_E0"] == pytest.approx(0.01 * math.sqrt(mhz(0.05)))
    with pytest.raises(ConfigError):
        parse_config("[params]\ndrive = 0.01").flat_params()


def test_flags_override_file():
    config = parse_config(CA_TOML, {"params": {"omega_m": "0.3 MHz"}, "options": {"order": "exact"}})
    assert config.params["omega_m"] == pytest.approx(mhz(0.3))
    assert config.params["g0"] == pytest.approx(mhz(1.4))
    assert config.order == "exact"


def test_round_trip_through_toml_and_echo():
    config = parse_config(CA_TOML + '\n[[axes]]\nname = "omega_m"\nstart = "0.02 MHz"\nstop = "0.5 MHz"\n'
                          'points = 4\nspacing = "log"\n[options]\nm_max = 12\nthreads = 2\n')
    assert parse_config(dump_config(config)) == config
    assert parse_config_dict(config.echo()) == config
    awkward = RunConfig("g2", params={"gamma": mhz(11), "kappa": 0.1 + 0.2, "kc_x0": 0.1})
    assert parse_config_dict(awkward.echo()) == awkward
    assert format_param("gamma", mhz(11)) == "11.0 MHz"


def test_fig3b_preset_values():
    tables = preset_tables("fig3b")
    assert set(tables) == {"grid", "zpl"}
    p = tables["zpl"].params
    assert p["g0"] == pytest.approx(mhz(1.4))
    assert p["kappa"] == pytest.approx(mhz(0.05))
    assert p["gamma"] == pytest.approx(mhz(11))
    assert p["omega_rec"] == pytest.approx(khz(6.8))
    assert p["omega_m"] == pytest.approx(mhz(0.1))
    assert p["Delta"] == pytest.approx(12 * mhz(1.4))
    assert tables["zpl"].detuning == "zpl" and tables["grid"].detuning == "fixed"
    assert tables["zpl"].preset == "fig3b"


def test_presets_reject_unknown_names():
    with pytest.raises(ValueError):
        preset_tables("fig9")


@pytest.mark.parametrize("name", list(PRESETS))
def test_every_preset_runs_and_converges(name, tmp_path):
    written = run_figure(name, points=3, out_dir=str(tmp_path), fmt="csv")
    assert written
    for path, result in written:
        assert result.all_converged, path
        assert not any(r["error"] for r in result.records)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == len(result.records)


def test_figure_fig1d_writes_grid_and_trace(tmp_path, capsys):
    status, out, _ = run(["figure", "fig1d", "--points", "3", "--out", str(tmp_path)], capsys)
    assert status == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["fig1d_grid.csv", "fig1d_zpl.csv"]
    assert out.count("converged") == 2
    with open(tmp_path / "fig1d_grid.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header[:2] == ["kc_x0", "delta_c/omega_m"]


def test_sweep_csv_contract(tmp_path, capsys):
    out_path = tmp_path / "sweep.csv"
    status, _, _ = run(["sweep", "--model", "om", "--param", "omega_m=1 MHz", "--param", "kappa=0.05 MHz",
                        "--param", "g_m0=0.4 MHz", "--axis", "kc_x0:0.2:0.6:2", "--axis", "kappa:0.05 MHz:0.1 MHz:2",
                        "--out", str(out_path)], capsys)
    assert status == 0
    raw = out_path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert len(lines) == 5
    assert lines[0] == ("kc_x0,kappa_MHz,g2,zpl_delta_c_MHz,m_max,converged,delta_c_MHz,mean_photon,"
                        "zpl_fallback,error")
    first = next(csv.DictReader(io.StringIO(raw.decode())))
    assert first["converged"] == "true"
    assert float(first["kappa_MHz"]) == pytest.approx(0.05, rel=1e-15)
    assert first["g2"] == format(float(first["g2"]), ".17g")


def test_csv_floats_round_trip_exactly():
    spec = sweep.SweepSpec("om", {"omega_m": 1.0, "kappa": 0.05, "g_m": 0.3}, axes=(sweep.Axis("kc_x0", 0.1, 0.7, 3),))
    result = sweep.run_grid(spec, 1)
    buf = io.StringIO()
    emit(result, "csv", buf)
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert [float(r["g2"]) for r in rows] == list(result.column("g2"))


def test_g2_json_schema(tmp_path, capsys):
    cfg = tmp_path / "ca.toml"
    cfg.write_text(CA_TOML)
    status, out, _ = run(["g2", "--config", str(cfg), "--format", "json"], capsys)
    assert status == 0
    doc = json.loads(out)
    for key in ("g2", "zpl_delta_c", "m_max_used", "params_echo", "converged", "metadata"):
        assert key in doc
    assert doc["g2"] == pytest.approx(0.83, abs=0.05)
    assert doc["m_max_used"] >= 8 and doc["converged"] is True
    assert doc["params_echo"]["g0"] == "1.4 MHz"
    # the echoed configuration rebuilds the run exactly
    assert parse_config_dict(doc["metadata"]["config"]) == parse_config(CA_TOML, {"output": {"format": "json"}})


def test_sweep_json_document(capsys):
    status, out, _ = run(["sweep", "--config", "/dev/null", "--model", "om", "--format", "json",
                          "--param", "omega_m=1 MHz", "--param", "kappa=0.05 MHz", "--param", "g_m0=0.4 MHz",
                          "--axis", "kc_x0:0.2:0.6:3"], capsys)
    assert status == 0
    doc = json.loads(out)
    assert len(doc["records"]) == 3
    assert list(doc["records"][0])[:5] == ["kc_x0", "g2", "zpl_delta_c_MHz", "m_max", "converged"]
    meta = doc["metadata"]
    assert meta["version"] and meta["spec"]["model"] == "om" and "units" in meta
    assert parse_config_dict(meta["config"]).axes[0].points == 3


def test_spectrum_and_effective_commands(tmp_path, capsys):
    cfg = tmp_path / "ca.toml"
    cfg.write_text(CA_TOML)
    status, out, _ = run(["spectrum", "--config", str(cfg), "--m-max", "4"], capsys)
    assert status == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["manifold"] for r in rows} == {"1", "2"}
    assert any(r["label"].startswith("photon-like") for r in rows)
    status, out, _ = run(["effective", "--config", str(cfg), "--format", "json", "--dispersive"], capsys)
    assert status == 0
    row = json.loads(out)["records"][0]
    assert row["eta_ld"] == pytest.approx(0.2608, abs=1e-4)
    # 2 g0^4/Delta^3 cos^4(pi/3), with 2 g0^4/Delta^3 = 1.4 MHz / 864
    assert row["two_level_anharmonicity_MHz"] == pytest.approx(1.4 / 864 / 16, rel=1e-9)
    assert row["dispersive"] is True


def test_effective_needs_moving_atom(capsys):
    status, _, err = run(["effective", "--model", "om", "--param", "omega_m=1 MHz", "--param", "kappa=0.1 MHz",
                          "--param", "g_m0=0.1 MHz"], capsys)
    assert status == 2 and "model" in err


def test_missing_unit_on_command_line(capsys):
    status, _, err = run(["g2", "--model", "om", "--param", "omega_m=0.2"], capsys)
    assert status == 2
    assert "params.omega_m" in err and "missing unit" in err


def test_blockade_errors_exit_nonzero(capsys):
    status, out, _ = run(["g2", "--model", "om", "--detuning", "fixed", "--format", "json", "--param", "omega_m=1 MHz",
                          "--param", "kappa=0 MHz", "--param", "g_m0=0 MHz"], capsys)
    assert status == 1
    assert "LosslessResonanceError" in json.loads(out)["error"]


def test_unwritable_output_reports_path(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    with pytest.raises(EmitError, match="missing"):
        write_file(str(target), "x\n")


def test_thread_flag_and_environment(monkeypatch, capsys):
    seen = []
    real = cli_main.run_grid

    def spy(spec, threads=None):
        seen.append(sweep.resolve_threads(threads))
        return real(spec, 1)

    monkeypatch.setattr(cli_main, "run_grid", spy)
    monkeypatch.setenv(sweep.THREADS_ENV, "3")
    args = ["g2", "--model", "om", "--param", "omega_m=1 MHz", "--param", "kappa=0.05 MHz", "--param", "g_m=0.3 MHz"]
    assert run(args, capsys)[0] == 0
    assert run(args + ["--threads", "2"], capsys)[0] == 0
    assert seen == [3, 2]


def test_parser_rejections(capsys):
    with pytest.raises(SystemExit):
        main(["figure"])
    with pytest.raises(SystemExit):
        main(["g2", "fig3b"])
    status, _, err = run(["sweep", "--model", "om", "--param", "omega_m=1 MHz", "--param", "kappa=0.1 MHz",
                          "--param", "g_m0=0.1 MHz"], capsys)
    assert status == 2 and "axes" in err
    status, _, err = run(["sweep", "--axis", "kc_x0:0:1"], capsys)
    assert status == 2 and "--axis" in err
