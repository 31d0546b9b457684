"""
Run configuration for the command-line interface.

Values come from three layers, later ones winning: a named preset, a YAML
config file, and explicit flags. Config-file keys are the long flag names,
written with either '-' or '_'.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError
from ruamel.yaml import YAML

from ..errors import ConfigError
from ..model_core.model import WellParameters
from ..oracle_core.fd_oracle import FdGrid
from ..report_core.report_helper import ReportHelper
from ..series_core.frobenius import SSign
from ..series_core.heun import SeriesControl
from ..solver_core.eigensolver import SolveOptions

logger = logging.getLogger(__name__)
yaml = YAML(typ="safe")

COMMANDS = ("solve", "wronskian-sweep", "wavefunction", "threshold", "qes", "oracle")
FULL_WELL_COMMANDS = ("solve", "wronskian-sweep", "wavefunction", "oracle")

W_KEYS = ("w1", "w2", "w3")
V_KEYS = ("V1", "V2", "V3", "L")
SOLVE_KEYS = ("z_match", "grid_points", "refine_tol", "E_floor", "ceiling", "s_sign")
SERIES_KEYS = ("max_terms", "tail_tol", "tail_window")
COMMAND_KEYS = ("E_min", "E_max", "points", "step", "k", "order", "w2_cap",
                "w2_min", "w2_max", "w3_min", "w3_max", "resolution", "workers",
                "fd_z_span", "fd_points")
OTHER_KEYS = ("preset", "output", "format", "templates", "qes_sign")
KNOWN_KEYS = set(W_KEYS + V_KEYS + SOLVE_KEYS + SERIES_KEYS + COMMAND_KEYS + OTHER_KEYS)


class RunConfig(BaseModel):
    """Everything one CLI invocation needs, validated."""

    model_config = ConfigDict(frozen=True)

    command: Literal["solve", "wronskian-sweep", "wavefunction", "threshold", "qes", "oracle"]
    params: Optional[WellParameters] = None
    w1: Optional[float] = None
    w3: Optional[float] = None
    solve: SolveOptions = SolveOptions()
    output: Optional[Path] = None
    format: Literal["csv", "json"] = "json"
    templates: Optional[Path] = None

    E_min: Optional[float] = None
    E_max: Optional[float] = None
    points: int = 400
    k: int = 10
    order: int = 0
    qes_sign: SSign = SSign.PLUS
    w2_cap: float = 200.0
    w2_range: Tuple[float, float] = (-30.0, 30.0)
    w3_range: Tuple[float, float] = (-30.0, 30.0)
    resolution: int = 60
    workers: Optional[int] = None
    fd_grid: FdGrid = FdGrid(z_span=25.0, points=10001)

    @property
    def series(self) -> SeriesControl:
        return self.solve.series


def normalize_keys(values: Dict[str, Any], source: str) -> Dict[str, Any]:
    out = {}
    for key, value in values.items():
        name = str(key).replace("-", "_")
        if name not in KNOWN_KEYS:
            raise ConfigError(f"Unknown setting '{key}' in {source}")
        out[name] = value
    return out


def load_config_file(path: Path) -> Dict[str, Any]:
    """Read a flat YAML key-value config file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except Exception as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a key-value mapping")
    return normalize_keys(data, str(path))


def _well(values: Dict[str, Any], command: str) -> Tuple[Optional[WellParameters], Optional[float], Optional[float]]:
    w_given = [k for k in W_KEYS if values.get(k) is not None]
    v_given = [k for k in V_KEYS if values.get(k) is not None]
    if w_given and v_given:
        raise ConfigError(f"Give either w1, w2, w3 or V1, V2, V3, L, not both (got {w_given + v_given})")

    if v_given:
        if len(v_given) != len(V_KEYS):
            missing = [k for k in V_KEYS if k not in v_given]
            raise ConfigError(f"Dimensional input needs V1, V2, V3 and L; missing {missing}")
        p = WellParameters.from_dimensional(*(float(values[k]) for k in V_KEYS))
        return p, p.w1, p.w3

    if command in FULL_WELL_COMMANDS:
        if len(w_given) != len(W_KEYS):
            missing = [k for k in W_KEYS if k not in w_given]
            raise ConfigError(f"'{command}' needs a full well: missing {missing} (or give V1, V2, V3, L)")
        p = WellParameters(**{k: float(values[k]) for k in W_KEYS})
        return p, p.w1, p.w3

    w1 = values.get("w1")
    w3 = values.get("w3")
    if w1 is None:
        raise ConfigError(f"'{command}' needs w1")
    if command == "qes" and w3 is None:
        raise ConfigError("'qes' needs w3")
    return None, float(w1), None if w3 is None else float(w3)


def build_run_config(command: str, flags: Dict[str, Any],
                     reports: Optional[ReportHelper] = None) -> RunConfig:
    """
    Merge preset, config file and flags into a validated RunConfig.

    Args:
        command: Subcommand name
        flags: Explicitly given flags (None means not given), may include config and preset
        reports: ReportHelper holding the presets

    Returns:
        RunConfig

    Raises:
        ConfigError: On any invalid or inconsistent input
    """
    if command not in COMMANDS:
        raise ConfigError(f"Unknown command '{command}'")
    flags = dict(flags)
    config_path = flags.pop("config", None)
    file_values = load_config_file(Path(config_path)) if config_path else {}
    explicit = {k: v for k, v in flags.items() if v is not None}

    values: Dict[str, Any] = {}
    preset_name = explicit.get("preset", file_values.get("preset"))
    if preset_name:
        helper = reports or ReportHelper()
        try:
            preset = helper.get_preset(preset_name)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        preset.pop("description", None)
        kind = preset.pop("kind", "well")
        if kind == "threshold":
            w2_lo, w2_hi = preset.pop("w2_range")
            w3_lo, w3_hi = preset.pop("w3_range")
            preset.update(w2_min=w2_lo, w2_max=w2_hi, w3_min=w3_lo, w3_max=w3_hi)
        values.update(normalize_keys(preset, f"preset '{preset_name}'"))
        # dimensional flags replace a dimensionless preset well
        if any(k in explicit or k in file_values for k in V_KEYS):
            for k in W_KEYS:
                values.pop(k, None)
    values.update(file_values)
    values.update(explicit)
    logger.debug(f"Run settings for {command}: {values}")

    try:
        params, w1, w3 = _well(values, command)
        series = SeriesControl(
            max_terms=values.get("max_terms", 5000),
            tail_tol=values.get("tail_tol", 1e-14),
            tail_window=values.get("tail_window", 4),
        )
        solve = SolveOptions(
            z_match=values.get("z_match", 0.2),
            grid_points=values.get("grid_points", 2000),
            refine_tol=values.get("refine_tol", 1e-10),
            E_floor=values.get("E_floor", 1e-6),
            ceiling_override=values.get("ceiling"),
            s_sign=SSign(values.get("s_sign", SSign.MINUS.value)),
            wavefunction_step=values.get("step", 0.005),
            series=series,
        )
        w2_range = (float(values.get("w2_min", -30.0)), float(values.get("w2_max", 30.0)))
        w3_range = (float(values.get("w3_min", -30.0)), float(values.get("w3_max", 30.0)))
        optional = {k: values[k] for k in ("E_min", "E_max", "points", "k", "order", "w2_cap", "qes_sign",
                                           "resolution", "workers", "templates") if k in values}
        return RunConfig(
            command=command,
            params=params,
            w1=w1,
            w3=w3,
            solve=solve,
            output=values.get("output"),
            format=values.get("format", "json"),
            w2_range=w2_range,
            w3_range=w3_range,
            fd_grid=FdGrid(z_span=values.get("fd_z_span", 25.0), points=values.get("fd_points", 10001)),
            **optional,
        )
    except ConfigError:
        raise
    except (ValidationError, ValueError, TypeError) as e:
        raise ConfigError(f"Invalid configuration: {e}") from e
