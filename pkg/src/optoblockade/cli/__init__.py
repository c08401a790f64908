"""Command-line front end: configuration, figure presets and table writers."""

from optoblockade.cli.config import ConfigError, RunConfig, dump_config, parse_config, parse_config_dict
from optoblockade.cli.emit import emit, emit_table
from optoblockade.cli.main import main
from optoblockade.cli.presets import PRESETS, preset_tables

__all__ = [
    "ConfigError",
    "PRESETS",
    "RunConfig",
    "dump_config",
    "emit",
    "emit_table",
    "main",
    "parse_config",
    "parse_config_dict",
    "preset_tables",
]
