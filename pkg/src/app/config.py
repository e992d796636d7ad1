#!/usr/bin/env python3
"""
Configuration handling for the choice estimation toolkit.

``Config`` holds the application defaults from ``config/app_config.yaml``
with environment overrides; ``RunConfig`` is one validated run, assembled
from those defaults, a YAML run file and command-line flags (in increasing
precedence).
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src import __version__
from src.choicedata.models import AttributeSchema
from src.core.errors import ConfigError
from src.engine.estimation import EstimationSettings
from src.postest.wtp import WtpConvention
from src.rum.spec import ModelKind, ModelSpec, ParameterVector
from src.synth.design import DesignGrid, courier_model_spec
from src.synth.simulator import default_truth

logger = logging.getLogger(__name__)

project_root = Path(__file__).resolve().parent.parent.parent

# Load environment variables from .env file
load_dotenv(project_root / '.env')

ENV_OUTPUT_DIR = "CHOICEKIT_OUTPUT_DIR"
ENV_THREADS = "CHOICEKIT_THREADS"


class Config:
    """
    Application defaults.

    Values are read from a YAML file and can be reached by attribute access,
    item access or a dotted path through :meth:`get`. Environment variables
    take precedence over YAML values.
    """

    def __init__(self, config_file: Optional[str] = None):
        """
        Parameters:
        -----------
        config_file : str, optional
            Path to the configuration file; defaults to
            ``config/app_config.yaml`` under the project root.
        """
        self._config: Dict[str, Any] = {}
        if config_file is None:
            config_file = str(project_root / 'config' / 'app_config.yaml')
        self.load_config(config_file)
        self._apply_environment_overrides()

    def load_config(self, config_file: str) -> bool:
        """Load configuration from a YAML file; returns False if it cannot be read."""
        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                self._config = yaml.safe_load(f) or {}
            logger.debug(f"Configuration loaded from {config_file}")
            return True
        except Exception as e:
            logger.error(f"Error loading configuration: {e}")
            return False

    def _apply_environment_overrides(self):
        """Environment variables for the output directory and the thread cap."""
        output_dir = os.getenv(ENV_OUTPUT_DIR)
        if output_dir:
            self._config.setdefault('output', {})['dir'] = output_dir
            logger.debug(f"Override config from environment: output.dir")
        threads = os.getenv(ENV_THREADS)
        if threads:
            if not threads.isdigit() or int(threads) < 1:
                raise ConfigError(f"{ENV_THREADS} must be a positive integer, got '{threads}'")
            self._config.setdefault('runtime', {})['threads'] = int(threads)
            logger.debug(f"Override config from environment: runtime.threads")

    def get(self, key: str, default: Any = None) -> Any:
        """Value at ``key``, which may be a dotted path such as ``draws.count``."""
        value = self._config
        for part in key.split('.'):
            if isinstance(value, dict) and part in value:
                value = value[part]
            else:
                return default
        return value

    def __getattr__(self, key: str) -> Any:
        if key.startswith('_'):
            raise AttributeError(key)
        if key in self._config:
            return self._config[key]
        raise AttributeError(f"'{self.__class__.__name__}' object has no attribute '{key}'")

    def __getitem__(self, key: str) -> Any:
        if key in self._config:
            return self._config[key]
        raise KeyError(key)

    def __contains__(self, key: str) -> bool:
        return key in self._config


class RunConfig(BaseModel):
    """
    One command invocation.

    Top-level scalars can each be overridden by a command flag of the same
    name. ``model_kind`` may be ``both`` to run RUM and RRM side by side.
    """
    model_config = ConfigDict(extra="forbid", protected_namespaces=(), populate_by_name=True)

    command: Optional[str] = None
    dataset: Optional[Path] = None
    model_kind: str = "RUM"
    draws: int = Field(default=500, ge=1)
    draw_kind: str = "halton"
    seed: Optional[int] = None
    folds: int = 5
    output_dir: Path = Path("output")
    n_situations: int = 1000
    n_alternatives: int = 4
    threads: int = Field(default=1, ge=1)
    segment: Optional[str] = None

    attribute_schema: Optional[Dict[str, Any]] = Field(default=None, alias="schema")
    model: Optional[Dict[str, Any]] = None
    random_cost: bool = True
    truth: Dict[str, float] = {}
    grid: Dict[str, Any] = {}
    estimation: Dict[str, Any] = {}
    validation: Dict[str, Any] = {}
    analysis: Dict[str, Any] = {}

    @field_validator("model_kind")
    @classmethod
    def _known_kind(cls, value: str) -> str:
        value = str(value).upper()
        if value not in ("RUM", "RRM", "BOTH"):
            raise ValueError(f"model_kind must be RUM, RRM or both, got '{value}'")
        return value

    # -- derived objects -----------------------------------------------------

    @property
    def kinds(self) -> List[ModelKind]:
        if self.model_kind == "BOTH":
            return [ModelKind.RUM, ModelKind.RRM]
        return [ModelKind(self.model_kind)]

    def design_grid(self) -> DesignGrid:
        return DesignGrid(**self.grid)

    def build_schema(self) -> AttributeSchema:
        """Declared schema, or the courier grid's when none is declared."""
        if self.attribute_schema is not None:
            return AttributeSchema.from_mapping(self.attribute_schema)
        return self.design_grid().schema()

    def model_spec(self, schema: Optional[AttributeSchema] = None) -> ModelSpec:
        """Declared model, or the default courier model; checked against ``schema``."""
        if self.model is not None:
            spec = ModelSpec.from_mapping(self.model)
        else:
            spec = courier_model_spec(self.design_grid(), self.n_alternatives, self.random_cost)
        spec.check_schema(schema or self.build_schema())
        return spec

    def truth_vector(self, spec: ModelSpec) -> ParameterVector:
        unknown = sorted(set(self.truth) - set(spec.parameter_names))
        if unknown:
            raise ConfigError(f"truth names unknown parameters {unknown}")
        base = default_truth(spec).as_dict()
        base.update(self.truth)
        return ParameterVector.from_mapping(spec, base)

    def estimation_settings(self) -> EstimationSettings:
        return EstimationSettings(**{**self.estimation, "n_draws": self.draws, "draw_kind": self.draw_kind})

    def segment_filter(self) -> Optional[List[str]]:
        """Requested segment labels; None runs the pooled data, [] every segment."""
        if self.segment is None:
            return None
        if self.segment.strip().lower() == "all":
            return []
        labels = [label.strip() for label in self.segment.split(",") if label.strip()]
        if not labels:
            raise ConfigError("segment must be 'all' or a comma-separated list of product labels")
        return labels

    def wtp_convention(self) -> WtpConvention:
        return WtpConvention(self.analysis.get("convention", WtpConvention.TIME_OVER_ATTRIBUTE.value))

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError(f"command '{self.command}' is stochastic and needs a seed (--seed or 'seed:' in the run file)")
        return self.seed

    def config_hash(self) -> str:
        """Hash of everything that affects results (not paths of outputs or thread counts)."""
        payload = self.model_dump(mode="json", exclude={"output_dir", "threads", "command"}, by_alias=True)
        text = json.dumps(payload, sort_keys=True, default=str)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def header_comment(self) -> str:
        return f"choicekit {__version__} config={self.config_hash()} seed={self.seed}"


def _defaults_from(app: Config) -> Dict[str, Any]:
    """Map application defaults onto run-config fields."""
    mapping = {
        "draws": app.get("draws.count"),
        "draw_kind": app.get("draws.kind"),
        "folds": app.get("validation.folds"),
        "n_situations": app.get("simulation.n_situations"),
        "n_alternatives": app.get("simulation.n_alternatives"),
        "output_dir": app.get("output.dir"),
        "threads": app.get("runtime.threads") or os.cpu_count() or 1,
        "estimation": app.get("estimation"),
        "validation": app.get("validation"),
        "analysis": app.get("analysis"),
    }
    return {key: value for key, value in mapping.items() if value is not None}


def load_run_config(
    path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    app_config: Optional[Config] = None,
) -> RunConfig:
    """
    Assemble a :class:`RunConfig`.

    Parameters:
    -----------
    path : str, optional
        YAML run file.
    overrides : dict, optional
        Command-line values; ``None`` entries are ignored.
    app_config : Config, optional
        Application defaults (``config/app_config.yaml`` if omitted).
    """
    app_config = app_config or Config()
    values = _defaults_from(app_config)
    if path is not None:
        run_file = Path(path)
        if not run_file.exists():
            raise ConfigError(f"run file not found: {run_file}")
        try:
            content = yaml.safe_load(run_file.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse run file {run_file}: {exc}")
        if not isinstance(content, dict):
            raise ConfigError(f"run file {run_file} must be a mapping")
        for section in ("estimation", "validation", "analysis"):
            if section in content and section in values:
                content[section] = {**values[section], **(content[section] or {})}
        values.update(content)
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return RunConfig(**values)
    except ValueError as exc:
        raise ConfigError(f"invalid run configuration: {exc}")
