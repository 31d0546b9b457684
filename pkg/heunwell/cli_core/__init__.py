"""
CLI Core - Command-line entry point, run configuration and CSV/JSON emitters
"""

from .cli import build_parser, main
from .emitters import write_csv, write_json
from .run_config import RunConfig, build_run_config, load_config_file

__all__ = [
    "build_parser",
    "main",
    "write_csv",
    "write_json",
    "RunConfig",
    "build_run_config",
    "load_config_file",
]
