"""Prediction-quality metrics and side-by-side model comparison."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import Dataset

__all__ = [
    "ErrorCdf",
    "ModelEvaluation",
    "ComparisonReport",
    "rmse",
    "abs_error_cdf",
    "confidence_bound",
    "compare_models",
]


def _paired(predictions, truths) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truths, dtype=float).ravel()
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} predictions, {t.size} truths")
    if p.size == 0:
        raise ValueError("empty prediction set")
    return p, t


def rmse(predictions, truths) -> float:
    """Root mean square prediction error."""
    p, t = _paired(predictions, truths)
    return float(np.sqrt(np.mean((p - t) ** 2)))


@dataclass(frozen=True)
class ErrorCdf:
    """Empirical CDF of absolute errors at midpoint plotting positions.

    errors is sorted ascending; probabilities are (i - 0.5) / m.
    """

    errors: np.ndarray
    probabilities: np.ndarray

    @classmethod
    def from_errors(cls, errors) -> "ErrorCdf":
        e = np.sort(np.abs(np.asarray(errors, dtype=float).ravel()))
        if e.size == 0:
            raise ValueError("empty error set")
        m = e.size
        return cls(errors=e, probabilities=(np.arange(1, m + 1) - 0.5) / m)


def abs_error_cdf(predictions, truths) -> ErrorCdf:
    """Empirical CDF of |prediction - truth|."""
    p, t = _paired(predictions, truths)
    return ErrorCdf.from_errors(p - t)


def confidence_bound(cdf: ErrorCdf, level: float) -> float:
    """Smallest error e with empirical P(|err| <= e) >= level.

    The ceiling order statistic: conservative, and exact on ties.
    """
    if not (0.0 < level < 1.0):
        raise ValueError("level must lie in (0, 1)")
    m = cdf.errors.size
    # guard the ceiling against float fuzz like 0.9 * 10 = 9.000000000000002
    rank = int(np.ceil(level * m - 1e-9))
    rank = min(max(rank, 1), m)
    return float(cdf.errors[rank - 1])


@dataclass(frozen=True)
class ModelEvaluation:
    """One model's metrics on the shared test set; error is the failure
    text when its predictor raised instead of predicting."""

    name: str
    n_samples: int
    rmse: float | None = None
    bound90: float | None = None
    per_angle_rmse: dict | None = None
    error: str | None = None


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ModelEvaluation, ...]

    def to_dict(self) -> dict:
        out = []
        for row in self.rows:
            out.append(
                {
                    "name": row.name,
                    "n_samples": row.n_samples,
                    "rmse": row.rmse,
                    "bound90": row.bound90,
                    "per_angle_rmse": row.per_angle_rmse,
                    "error": row.error,
                }
            )
        return {"models": out}

    def as_text(self) -> str:
        lines = [f"{'model':<24} {'rmse':>12} {'90% bound':>12} {'n':>8}"]
        for row in self.rows:
            if row.error is not None:
                lines.append(f"{row.name:<24} failed: {row.error}")
            else:
                lines.append(
                    f"{row.name:<24} {row.rmse:>12.6f} {row.bound90:>12.6f} "
                    f"{row.n_samples:>8d}"
                )
        return "\n".join(lines)


def compare_models(
    ds_test: Dataset,
    entries: Sequence[tuple[str, Callable]],
) -> ComparisonReport:
    """Evaluate every (name, predictor) pair on the same test samples.

    A predictor maps (f_ghz array, theta_deg array, thickness_m) to
    predicted magnitudes. A predictor that raises contributes a failure
    row instead of aborting the rest. Row order follows the input.
    """
    if not entries:
        raise ValueError("need at least one model entry")
    f = np.array([s.f_ghz for s in ds_test.samples])
    t = np.array([s.theta_deg for s in ds_test.samples])
    g = np.array([s.gamma for s in ds_test.samples])
    rows = []
    for name, predictor in entries:
        try:
            pred = np.asarray(
                predictor(f, t, ds_test.thickness_m), dtype=float
            ).ravel()
            model_rmse = rmse(pred, g)
            bound = confidence_bound(abs_error_cdf(pred, g), 0.9)
            per_angle = {}
            for angle in np.unique(t):
                mask = t == angle
                per_angle[float(angle)] = rmse(pred[mask], g[mask])
        except Exception as exc:  # noqa: BLE001 - per-entry isolation is the contract
            rows.append(
                ModelEvaluation(name=name, n_samples=g.size, error=str(exc))
            )
            continue
        rows.append(
            ModelEvaluation(
                name=name,
                n_samples=g.size,
                rmse=model_rmse,
                bound90=bound,
                per_angle_rmse=per_angle,
            )
        )
    return ComparisonReport(rows=tuple(rows))
