#!/usr/bin/env python3
"""
Command implementations behind the ``estimate``, ``simulate``, ``validate``
and ``analyze`` subcommands.

Each command takes a :class:`RunConfig`, writes its files into the output
directory and returns an exit code. Errors are raised; ``main`` maps them
to exit codes.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.choicedata.ingestion import load_csv
from src.choicedata.models import SEGMENT_COLUMN, AttributeSchema, ChoiceDataset
from src.choicedata.validators import validate_dataset
from src.core.errors import ConfigError, SchemaError
from src.engine.estimation import estimate, model_for
from src.engine.results import EstimationResult
from src.postest.comparison import compare_elasticities, compare_wtp
from src.postest.elasticity import elasticity_table
from src.postest.tables import write_table
from src.postest.wtp import wtp_table
from src.rum.spec import ModelKind, ParameterVector
from src.synth.design import generate_design
from src.synth.simulator import read_truth, simulate_choices, truth_metadata, write_simulation
from src.validate.crossval import cross_validate
from .config import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2


def _output_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_dataset(cfg: RunConfig, schema: AttributeSchema) -> ChoiceDataset:
    if cfg.dataset is None:
        raise ConfigError(f"command '{cfg.command}' needs a dataset (--dataset or 'dataset:' in the run file)")
    ds = load_csv(cfg.dataset, schema)
    report = validate_dataset(ds)
    if report.has_errors:
        report_path = report.write(_output_dir(cfg) / "data_validation.txt")
        codes = sorted({f.code for f in report.findings if f.severity.value == "ERROR"})
        raise SchemaError(f"dataset {cfg.dataset} failed validation ({', '.join(codes)}); see {report_path}")
    return ds


def _segments(cfg: RunConfig, ds: ChoiceDataset) -> List[Tuple[str, ChoiceDataset]]:
    """``(label, data)`` per requested product segment; ``("", ds)`` when unsegmented."""
    wanted = cfg.segment_filter()
    if wanted is None:
        return [("", ds)]
    if not ds.segment_labels:
        raise ConfigError(f"dataset {cfg.dataset} has no '{SEGMENT_COLUMN}' column to segment by")
    labels = wanted or ds.segment_labels
    segments = [(label, ds.segment(label)) for label in labels]
    sizes = ", ".join(f"{name} ({len(part)})" for name, part in segments)
    logger.info(f"Running {len(segments)} segments: {sizes}")
    return segments


def _suffix(label: Optional[str]) -> str:
    return f"_{label}" if label else ""


def cmd_estimate(cfg: RunConfig) -> int:
    """Estimate every requested model kind (per segment if asked) and write its result files."""
    schema = cfg.build_schema()
    spec = cfg.model_spec(schema)
    ds = _load_dataset(cfg, schema)
    settings = cfg.estimation_settings()
    if spec.has_random and settings.draw_kind != "halton":
        cfg.require_seed()
    out = _output_dir(cfg)
    exit_code = EXIT_OK
    for label, data in _segments(cfg, ds):
        for kind in cfg.kinds:
            result = estimate(spec, data, kind, settings, seed=cfg.seed, config_hash=cfg.config_hash())
            if label:
                result = result.model_copy(update={"segment": label})
            result.write(out, stem=f"estimate_{kind.value.lower()}{_suffix(label)}")
            if not result.converged:
                logger.warning(f"{kind.value}{_suffix(label)} estimation did not converge: {result.message}")
                exit_code = EXIT_NOT_CONVERGED
    return exit_code


def cmd_simulate(cfg: RunConfig) -> int:
    """Generate a design, simulate choices from the truth and write both files."""
    seed = cfg.require_seed()
    if len(cfg.kinds) != 1:
        raise ConfigError("simulate needs a single model_kind (RUM or RRM)")
    kind = cfg.kinds[0]
    grid = cfg.design_grid()
    schema = grid.schema()
    spec = cfg.model_spec(schema)
    truth = cfg.truth_vector(spec)
    design = generate_design(grid, cfg.n_situations, cfg.n_alternatives, seed)
    ds = simulate_choices(design, spec, truth, kind, seed)
    path = cfg.dataset or (_output_dir(cfg) / "simulated.csv")
    metadata = truth_metadata(spec, truth, kind, seed, ds, extra={"grid": grid.model_dump(mode="json")})
    write_simulation(ds, path, metadata, header_comment=cfg.header_comment())
    return EXIT_OK


def _fixed_params(cfg: RunConfig, spec) -> Optional[ParameterVector]:
    if not cfg.validation.get("use_truth", False):
        return None
    metadata = read_truth(cfg.dataset)
    return ParameterVector.from_mapping(spec, metadata["truth"])


def cmd_validate(cfg: RunConfig) -> int:
    """k-fold validation of every requested model kind."""
    seed = cfg.require_seed()
    schema = cfg.build_schema()
    spec = cfg.model_spec(schema)
    ds = _load_dataset(cfg, schema)
    settings = cfg.estimation_settings()
    fixed = _fixed_params(cfg, spec)
    out = _output_dir(cfg)
    exit_code = EXIT_OK
    for label, data in _segments(cfg, ds):
        for kind in cfg.kinds:
            summary = cross_validate(
                data, spec, kind,
                folds=cfg.folds,
                seed=seed,
                settings=settings,
                fixed_params=fixed,
                by=cfg.validation.get("by", "situation"),
                threads=cfg.threads,
            )
            summary.write(out / f"validation_{kind.value.lower()}{_suffix(label)}.csv",
                          header_comment=cfg.header_comment())
            if summary.n_failed or not all(f.converged for f in summary.folds):
                exit_code = EXIT_NOT_CONVERGED
    return exit_code


def _result_paths(cfg: RunConfig) -> List[Path]:
    listed = cfg.analysis.get("results")
    if listed:
        return [Path(p) for p in listed]
    out = Path(cfg.output_dir)
    found = sorted(out.glob("estimate_rum*.json")) + sorted(out.glob("estimate_rrm*.json"))
    if not found:
        raise ConfigError(f"no estimation results given and none found in {out}")
    return found


def _grouped_results(cfg: RunConfig) -> Dict[str, Dict[ModelKind, EstimationResult]]:
    """Estimation results by segment label ("" for pooled data), then model kind."""
    groups: Dict[str, Dict[ModelKind, EstimationResult]] = {}
    for path in _result_paths(cfg):
        if not Path(path).exists():
            raise ConfigError(f"result file not found: {path}")
        result = EstimationResult.read(path)
        group = groups.setdefault(result.segment or "", {})
        if result.model_kind in group:
            raise ConfigError(f"two {result.model_kind.value} results for segment '{result.segment or 'pooled'}'")
        group[result.model_kind] = result
    wanted = cfg.segment_filter()
    if wanted:
        missing = sorted(set(wanted) - set(groups))
        if missing:
            raise ConfigError(f"no estimation results for segments {missing}")
        groups = {label: groups[label] for label in wanted}
    elif wanted == []:
        groups = {label: group for label, group in groups.items() if label}
        if not groups:
            raise ConfigError("no per-segment estimation results found")
    return dict(sorted(groups.items()))


def _analyze_group(
    cfg: RunConfig,
    results: Dict[ModelKind, EstimationResult],
    dataset: Optional[ChoiceDataset],
    label: str,
) -> None:
    out = _output_dir(cfg)
    header = cfg.header_comment()
    convention = cfg.wtp_convention()
    wtp_draws = int(cfg.analysis.get("wtp_draws", 100000))
    suffix = _suffix(label)

    if ModelKind.RUM in results and ModelKind.RRM in results:
        rum_names, rrm_names = results[ModelKind.RUM].parameter_names, results[ModelKind.RRM].parameter_names
        if rum_names != rrm_names:
            mismatch = sorted(set(rum_names) ^ set(rrm_names)) or ["ordering"]
            raise ConfigError(f"coefficient names differ between RUM and RRM results{suffix}: {mismatch}")

    reports, tables = {}, {}
    for kind in (ModelKind.RUM, ModelKind.RRM):
        if kind not in results:
            continue
        result = results[kind]
        name = f"{kind.value.lower()}{suffix}"
        has_random = result.spec.has_random
        seed = cfg.require_seed() if has_random else cfg.seed
        report = wtp_table(result, cfg.analysis.get("attributes"), convention,
                           reference=cfg.analysis.get("reference"), n_draws=wtp_draws, seed=seed)
        reports[kind] = report
        write_table(report.to_frame(), out / f"wtp_{name}.csv", header,
                    note=f"convention={convention.value} reference={report.reference}")
        for entry in report.entries:
            if entry.density is not None:
                entry.density.write(out / f"wtp_density_{name}_{entry.coefficient}.csv", header)

        if dataset is None:
            logger.info(f"No dataset given; {name} elasticities skipped")
            continue
        model = model_for(kind, result.spec)
        draws = None
        if has_random:
            draws = model.make_draws(
                dataset,
                result.n_draws or cfg.draws,
                result.draw_kind or cfg.draw_kind,
                seed,
                result.settings.get("draws_per", cfg.estimation_settings().draws_per),
            )
        table = elasticity_table(model, result.parameter_vector(), dataset,
                                 attributes=cfg.analysis.get("elasticity_attributes"), draws=draws)
        tables[kind] = table
        table.write(out / f"elasticity_{name}.csv", header)

    if len(reports) == 2:
        write_table(compare_wtp(reports[ModelKind.RUM], reports[ModelKind.RRM]), out / f"wtp_comparison{suffix}.csv",
                    header, note="Ratio = RRM/RUM")
        if len(tables) == 2:
            write_table(compare_elasticities(tables[ModelKind.RUM], tables[ModelKind.RRM]),
                        out / f"elasticity_comparison{suffix}.csv", header, note="% = (RRM - RUM) / RRM * 100")
    else:
        logger.info(f"Only one model given{suffix}; RUM/RRM comparison skipped")


def cmd_analyze(cfg: RunConfig) -> int:
    """WTP, elasticity and (with two models) comparison tables, per segment of results."""
    groups = _grouped_results(cfg)
    dataset = None
    if cfg.dataset is not None:
        dataset = _load_dataset(cfg, cfg.build_schema())
    for label, results in groups.items():
        data = dataset.segment(label) if (dataset is not None and label) else dataset
        _analyze_group(cfg, results, data, label)
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "analyze": cmd_analyze,
}
