#!/usr/bin/env python3
"""
Estimation result model and its report formats.

Two outputs: a JSON document whose field names are the model's fields, and
a key-value text report. Both carry the spec hash, seed, draw settings and
tolerances; neither carries timestamps, so reruns are byte-identical.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from src import __version__
from src.rum.spec import ModelKind, ModelSpec, ParameterVector

logger = logging.getLogger(__name__)

T_CRITICAL_5 = 1.960
T_CRITICAL_10 = 1.645


def significance_mark(t_stat: Optional[float]) -> str:
    """``**`` at 5%, ``*`` at 10% (two-sided), else empty."""
    if t_stat is None or not math.isfinite(t_stat):
        return ""
    if abs(t_stat) >= T_CRITICAL_5:
        return "**"
    if abs(t_stat) >= T_CRITICAL_10:
        return "*"
    return ""


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if value is not None and math.isfinite(value) else None


def fit_statistics(loglik: float, loglik_null: float, n_parameters: int, n_observations: int) -> Dict[str, float]:
    """Rho-squared, adjusted rho-squared, AIC and BIC."""
    return {
        "rho_squared": 1.0 - loglik / loglik_null if loglik_null else float("nan"),
        "adjusted_rho_squared": 1.0 - (loglik - n_parameters) / loglik_null if loglik_null else float("nan"),
        "aic": 2.0 * n_parameters - 2.0 * loglik,
        "bic": n_parameters * math.log(max(n_observations, 1)) - 2.0 * loglik,
    }


class EstimationResult(BaseModel):
    """Everything reported about one estimated model."""
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model_kind: ModelKind
    parameter_names: List[str]
    params: Dict[str, float]
    std_errors: Dict[str, Optional[float]]
    t_stats: Dict[str, Optional[float]]
    significance: Dict[str, str]
    loglik_final: float
    loglik_null: float
    rho_squared: float
    adjusted_rho_squared: float
    aic: float
    bic: float
    n_observations: int
    n_parameters: int
    iterations: int
    converged: bool
    gradient_norm: float
    message: str = ""
    covariance: Optional[List[List[float]]] = None
    spec: ModelSpec
    spec_hash: str
    seed: Optional[int] = None
    n_draws: Optional[int] = None
    draw_kind: Optional[str] = None
    segment: Optional[str] = None
    settings: Dict[str, Any] = {}
    header: Dict[str, Any] = {}

    @classmethod
    def build(
        cls,
        kind: ModelKind,
        spec: ModelSpec,
        params: ParameterVector,
        cov: Optional[np.ndarray],
        loglik: float,
        loglik_null: float,
        n_observations: int,
        iterations: int,
        converged: bool,
        gradient_norm: float,
        message: str = "",
        seed: Optional[int] = None,
        n_draws: Optional[int] = None,
        draw_kind: Optional[str] = None,
        settings: Optional[Dict[str, Any]] = None,
        config_hash: Optional[str] = None,
    ) -> "EstimationResult":
        """Assemble a result; sds are reported as absolute values."""
        reported = params.reported(spec)
        names = list(reported.names)
        se = np.full(len(names), np.nan) if cov is None else np.sqrt(np.where(np.diag(cov) > 0, np.diag(cov), np.nan))
        t = np.where(se > 0, reported.values / np.where(se > 0, se, 1.0), np.nan)
        stats = fit_statistics(loglik, loglik_null, len(names), n_observations)
        spec_hash = spec.spec_hash()
        return cls(
            model_kind=kind,
            parameter_names=names,
            params=reported.as_dict(),
            std_errors={n: _finite_or_none(v) for n, v in zip(names, se)},
            t_stats={n: _finite_or_none(v) for n, v in zip(names, t)},
            significance={n: significance_mark(_finite_or_none(v)) for n, v in zip(names, t)},
            loglik_final=float(loglik),
            loglik_null=float(loglik_null),
            n_observations=n_observations,
            n_parameters=len(names),
            iterations=iterations,
            converged=converged,
            gradient_norm=float(gradient_norm),
            message=message,
            covariance=None if cov is None else np.asarray(cov, dtype=float).tolist(),
            spec=spec,
            spec_hash=spec_hash,
            seed=seed,
            n_draws=n_draws,
            draw_kind=draw_kind,
            settings=dict(settings or {}),
            header={"tool": "choicekit", "version": __version__, "config_hash": config_hash or spec_hash, "seed": seed},
            **stats,
        )

    # -- accessors -----------------------------------------------------------

    def parameter_vector(self) -> ParameterVector:
        return ParameterVector(tuple(self.parameter_names), np.array([self.params[n] for n in self.parameter_names]))

    def covariance_matrix(self) -> Optional[np.ndarray]:
        return None if self.covariance is None else np.array(self.covariance, dtype=float)

    def summary_frame(self) -> pd.DataFrame:
        """One row per parameter: estimate, std error, t-stat, mark."""
        return pd.DataFrame(
            {
                "parameter": self.parameter_names,
                "estimate": [self.params[n] for n in self.parameter_names],
                "std_error": [self.std_errors.get(n) for n in self.parameter_names],
                "t_stat": [self.t_stats.get(n) for n in self.parameter_names],
                "significance": [self.significance.get(n, "") for n in self.parameter_names],
            }
        )

    # -- serialization -------------------------------------------------------

    def header_line(self) -> str:
        h = self.header
        return f"choicekit {h.get('version')} config={h.get('config_hash')} seed={h.get('seed')}"

    def to_text(self) -> str:
        """Key-value report, one ``key = value`` per line."""
        lines = [f"# {self.header_line()}"]
        scalars = {
            "model_kind": self.model_kind.value,
            "segment": self.segment or "",
            "converged": str(self.converged).lower(),
            "message": self.message,
            "iterations": self.iterations,
            "gradient_norm": f"{self.gradient_norm:.6g}",
            "loglik_final": f"{self.loglik_final:.6f}",
            "loglik_null": f"{self.loglik_null:.6f}",
            "rho_squared": f"{self.rho_squared:.6f}",
            "adjusted_rho_squared": f"{self.adjusted_rho_squared:.6f}",
            "aic": f"{self.aic:.4f}",
            "bic": f"{self.bic:.4f}",
            "n_observations": self.n_observations,
            "n_parameters": self.n_parameters,
            "spec_hash": self.spec_hash,
            "seed": self.seed,
            "n_draws": self.n_draws,
            "draw_kind": self.draw_kind,
        }
        for key, value in self.settings.items():
            scalars[f"settings.{key}"] = value
        lines += [f"{key} = {value}" for key, value in scalars.items()]
        for name in self.parameter_names:
            se, t = self.std_errors.get(name), self.t_stats.get(name)
            lines.append(
                f"param.{name} = {self.params[name]:.6f} se={'nan' if se is None else f'{se:.6f}'} "
                f"t={'nan' if t is None else f'{t:.3f}'} {self.significance.get(name, '')}".rstrip()
            )
        return "\n".join(lines) + "\n"

    def write(self, directory: Union[str, Path], stem: str = "estimate") -> Dict[str, Path]:
        """Write ``<stem>.json`` and ``<stem>.txt`` into ``directory``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        json_path = directory / f"{stem}.json"
        text_path = directory / f"{stem}.txt"
        json_path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        text_path.write_text(self.to_text(), encoding="utf-8")
        logger.info(f"Wrote estimation results to {json_path} and {text_path}")
        return {"json": json_path, "text": text_path}

    @classmethod
    def read(cls, path: Union[str, Path]) -> "EstimationResult":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
