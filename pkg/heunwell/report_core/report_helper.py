"""
ReportHelper - Named well presets and report templates loaded from YAML
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union
import logging

from jinja2 import Environment, StrictUndefined, TemplateError, meta
from ruamel.yaml import YAML

from ..model_core.model import WellParameters

logger = logging.getLogger(__name__)
yaml = YAML(typ="safe")

PACKAGE_DATA = Path(__file__).parent.parent / "presets"


class ReportHelper:
    """
    Helper class for loading parameter presets and rendering report templates.

    Packaged presets.yaml and reports.yaml are always loaded first; a user
    file or directory is merged on top. Entries with a `template` key are
    report templates, all others are presets.
    """

    def __init__(self, user_source: Optional[Union[str, Path]] = None):
        """
        Initialize the ReportHelper.

        Args:
            user_source: Extra YAML file or directory of presets and/or templates
        """
        self.presets: Dict[str, Dict] = {}
        self.reports: Dict[str, Dict] = {}
        self.env = Environment(undefined=StrictUndefined, keep_trailing_newline=True)

        self.sources = [PACKAGE_DATA / "presets.yaml", PACKAGE_DATA / "reports.yaml"]
        if user_source is not None:
            self.sources.append(Path(user_source))
        self.load()

    def load(self) -> None:
        """Load every configured source."""
        for source in self.sources:
            if source.is_file():
                self._load_from_file(source)
            elif source.is_dir():
                self._load_from_directory(source)
            else:
                raise ValueError(f"Preset/report source not found: {source}")

        logger.info(f"Loaded {len(self.presets)} presets and {len(self.reports)} report templates")

    def _load_from_file(self, file_path: Path) -> None:
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                data = yaml.load(f)
        except Exception as e:
            logger.error(f"Error loading {file_path}: {e}")
            raise

        if not isinstance(data, dict):
            raise ValueError(f"Invalid YAML structure in {file_path}")
        for key, entry in data.items():
            if not isinstance(entry, dict):
                raise ValueError(f"Entry '{key}' in {file_path} must be a mapping")
            if "template" in entry:
                self.reports[key] = dict(entry)
            else:
                self.presets[key] = dict(entry)

    def _load_from_directory(self, dir_path: Path) -> None:
        yaml_files = sorted(list(dir_path.glob("*.yaml")) + list(dir_path.glob("*.yml")))
        if not yaml_files:
            raise ValueError(f"No YAML files found in directory: {dir_path}")
        for yaml_file in yaml_files:
            self._load_from_file(yaml_file)

    def get_preset_keys(self, kind: Optional[str] = None) -> List[str]:
        """Preset names, optionally only those of one kind ("well" or "threshold")."""
        if kind is None:
            return list(self.presets.keys())
        return [k for k, v in self.presets.items() if v.get("kind", "well") == kind]

    def get_preset(self, name: str) -> Dict[str, Any]:
        if name not in self.presets:
            raise ValueError(f"Preset '{name}' not found. Available: {self.get_preset_keys()}")
        return self.presets[name].copy()

    def well_parameters(self, name: str) -> WellParameters:
        """WellParameters of a well preset (dimensionless or V1, V2, V3, L)."""
        preset = self.get_preset(name)
        if all(k in preset for k in ("V1", "V2", "V3", "L")):
            return WellParameters.from_dimensional(preset["V1"], preset["V2"], preset["V3"], preset["L"])
        try:
            return WellParameters(w1=preset["w1"], w2=preset["w2"], w3=preset["w3"])
        except KeyError as e:
            raise ValueError(f"Preset '{name}' is missing {e}") from e

    def get_report_keys(self) -> List[str]:
        return list(self.reports.keys())

    def get_template_variables(self, report_key: str) -> set:
        """Variables a report template refers to."""
        source = self._template_source(report_key)
        return meta.find_undeclared_variables(self.env.parse(source))

    def _template_source(self, report_key: str) -> str:
        if report_key not in self.reports:
            raise ValueError(f"Report '{report_key}' not found. Available: {self.get_report_keys()}")
        return self.reports[report_key]["template"]

    def render(self, report_key: str, **kwargs) -> str:
        """
        Render a report template.

        Args:
            report_key: Template name
            **kwargs: Template variables; every referenced variable must be given

        Returns:
            Rendered text
        """
        source = self._template_source(report_key)
        try:
            return self.env.from_string(source).render(**kwargs)
        except TemplateError as e:
            logger.error(f"Jinja2 render error in report '{report_key}': {e}")
            raise ValueError(f"Cannot render report '{report_key}': {e}") from e
