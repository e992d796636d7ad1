#!/usr/bin/env python3
"""
K-fold estimate-then-predict validation.

Each fold estimates on the training part, freezes the parameters and scores
the test part: the mean predicted probability of every alternative (its
predicted market share) against the observed choice frequencies, with MAPE
as the error measure.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.choicedata.folds import split_kfold
from src.choicedata.models import ChoiceDataset
from src.core.errors import ChoiceKitError, EstimationError, MapeUndefinedError
from src.engine.estimation import EstimationSettings, estimate, model_for
from src.postest.elasticity import alternative_labels
from src.postest.tables import write_table
from src.rum.spec import ModelKind, ModelSpec, ParameterVector
from .metrics import mape

logger = logging.getLogger(__name__)

SCORED_QUANTITY = "per-alternative market share of the test fold (mean predicted probability vs. choice frequency)"


@dataclass
class FoldResult:
    """Outcome of one fold; ``failed`` folds carry no shares."""
    fold_index: int
    n_train: int
    n_test: int
    train_loglik: Optional[float] = None
    predicted_shares: Optional[np.ndarray] = None
    observed_shares: Optional[np.ndarray] = None
    fold_mape: Optional[float] = None
    converged: bool = False
    failed: bool = False
    error: str = ""


@dataclass
class ValidationSummary:
    """Fold results in fold order and their average MAPE."""
    model_kind: str
    folds: List[FoldResult]
    labels: List[str]
    average_mape: float
    n_failed: int = 0
    definition: str = SCORED_QUANTITY
    params_source: str = "estimated"

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for fold in self.folds:
            row: Dict[str, object] = {"fold": fold.fold_index, "n_train": fold.n_train, "n_test": fold.n_test}
            for j, label in enumerate(self.labels):
                row[f"observed_{label}"] = np.nan if fold.failed else fold.observed_shares[j]
            for j, label in enumerate(self.labels):
                row[f"predicted_{label}"] = np.nan if fold.failed else fold.predicted_shares[j]
            row["train_loglik"] = np.nan if fold.train_loglik is None else fold.train_loglik
            row["mape"] = np.nan if fold.fold_mape is None else fold.fold_mape
            row["converged"] = int(fold.converged)
            row["failed"] = int(fold.failed)
            rows.append(row)
        return pd.DataFrame(rows)

    def summary_line(self) -> str:
        return (
            f"model_kind={self.model_kind} folds={len(self.folds)} failed={self.n_failed} "
            f"average_mape={self.average_mape:.6f} params={self.params_source}"
        )

    def write(self, path: Union[str, Path], header_comment: Optional[str] = None) -> Path:
        """Fold table as CSV; the summary record goes in a ``.summary.txt`` sibling."""
        path = Path(path)
        write_table(self.to_frame(), path, header_comment, note=f"scored: {self.definition}")
        lines = [f"# {header_comment}"] if header_comment else []
        lines.append(self.summary_line())
        path.with_name(path.stem + ".summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def _score_fold(
    fold_index: int,
    train: ChoiceDataset,
    test: ChoiceDataset,
    spec: ModelSpec,
    kind: ModelKind,
    settings: EstimationSettings,
    seed: Optional[int],
    fixed_params: Optional[ParameterVector],
) -> FoldResult:
    result = FoldResult(fold_index=fold_index, n_train=len(train), n_test=len(test))
    model = model_for(kind, spec)
    try:
        if fixed_params is not None:
            params = fixed_params
            train_draws = model.make_draws(train, settings.n_draws, settings.draw_kind, seed, settings.draws_per)
            result.train_loglik = model.loglik(params, train, train_draws).loglik
            result.converged = True
        else:
            estimated = estimate(spec, train, kind, settings.model_copy(update={"compute_covariance": False}), seed)
            params = estimated.parameter_vector()
            result.train_loglik = estimated.loglik_final
            result.converged = estimated.converged
        test_draws = model.make_draws(test, settings.n_draws, settings.draw_kind, seed, settings.draws_per)
        probabilities = model.probabilities(params, test, test_draws)
    except (ChoiceKitError, ValueError) as exc:
        logger.warning(f"Fold {fold_index} failed: {exc}")
        result.failed = True
        result.error = str(exc)
        return result

    slots = np.flatnonzero(train.present.any(axis=0) | test.present.any(axis=0))
    result.predicted_shares = probabilities.mean(axis=0)[slots]
    result.observed_shares = (np.bincount(test.chosen, minlength=test.n_alternatives) / len(test))[slots]
    try:
        result.fold_mape = mape(result.observed_shares, result.predicted_shares)
    except MapeUndefinedError as exc:
        raise MapeUndefinedError(f"fold {fold_index}: {exc}", fold_index=fold_index)
    logger.info(f"Fold {fold_index}: MAPE={result.fold_mape:.4f}% on {len(test)} test situations")
    return result


def cross_validate(
    ds: ChoiceDataset,
    spec: ModelSpec,
    kind: Union[ModelKind, str] = ModelKind.RUM,
    folds: int = 5,
    seed: Optional[int] = None,
    settings: Optional[EstimationSettings] = None,
    fixed_params: Optional[ParameterVector] = None,
    by: str = "situation",
    threads: int = 1,
) -> ValidationSummary:
    """
    Run the k-fold protocol.

    Parameters:
    -----------
    ds : ChoiceDataset
        Validated data with observed choices.
    spec, kind : ModelSpec, ModelKind
        Model to estimate on every training part.
    folds, seed, by :
        Passed to :func:`split_kfold`.
    settings : EstimationSettings
        Estimation options; covariances are never computed here.
    fixed_params : ParameterVector
        Score these parameters on every fold instead of estimating.
    threads : int
        Folds run concurrently on up to this many threads; results are
        assembled in fold order either way.

    Raises:
    -------
    MapeUndefinedError
        An alternative is never chosen in some test fold (carries the fold).
    EstimationError
        Every fold failed.
    """
    kind = ModelKind(kind)
    settings = settings or EstimationSettings()
    pairs = split_kfold(ds, folds, seed, by=by)

    def run(index: int) -> FoldResult:
        train, test = pairs[index]
        return _score_fold(index, train, test, spec, kind, settings, seed, fixed_params)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=min(threads, folds)) as pool:
            results = list(pool.map(run, range(folds)))
    else:
        results = [run(index) for index in range(folds)]

    scored = [r.fold_mape for r in results if not r.failed]
    n_failed = len(results) - len(scored)
    if not scored:
        raise EstimationError(f"all {folds} folds failed")
    if n_failed:
        logger.warning(f"{n_failed} of {folds} folds failed and are excluded from the average")
    labels = alternative_labels(ds)
    present = np.flatnonzero(ds.present.any(axis=0))
    summary = ValidationSummary(
        model_kind=kind.value,
        folds=results,
        labels=[labels[j] for j in present],
        average_mape=float(np.mean(scored)),
        n_failed=n_failed,
        params_source="fixed" if fixed_params is not None else "estimated",
    )
    logger.info(f"{kind.value} cross-validation: average MAPE {summary.average_mape:.4f}% over {len(scored)} folds")
    return summary
