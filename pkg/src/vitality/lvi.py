"""Long-term vitality per sector and census year, plus the 2026 forecast
race between linear regression, a random forest, and a small MLP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cvi import CviResult
from .errors import DegenerateSeriesError, EmptySectorError, ValidationError
from .learners import fit_forest, fit_linear, fit_mlp, mse, predict_mlp

MODEL_PRECEDENCE = ("LR", "RF", "MLP")
RF_FORECAST_TREES = 100


@dataclass(frozen=True)
class LviSeries:
    sector: str
    points: tuple[tuple[int, float], ...]
    source: tuple[str, ...]

    def __post_init__(self):
        years = [y for y, _ in self.points]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise ValidationError(f"sector {self.sector}: years must strictly increase")
        if not self.source:
            raise ValidationError(f"sector {self.sector}: no member DAs")
        for y, v in self.points:
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"sector {self.sector}: lvi {v} outside [0, 1] at {y}")

    @property
    def years(self) -> list[int]:
        return [y for y, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]


@dataclass(frozen=True)
class ModelScore:
    prediction: float
    raw_prediction: float
    training_mse: float
    clamped: bool


@dataclass(frozen=True)
class ForecastResult:
    sector: str
    target_year: int
    models: dict[str, ModelScore]
    selected_model: str

    def __post_init__(self):
        best = min(score.training_mse for score in self.models.values())
        if self.models[self.selected_model].training_mse != best:
            raise ValidationError("selected model must have the minimal MSE")


def compute_lvi(cvis_by_year: dict[int, CviResult],
                assignments: dict[str, str],
                sector_names) -> list[LviSeries]:
    """Per sector and year, the unweighted mean CVI over member DAs."""
    members: dict[str, list[str]] = {name: [] for name in sector_names}
    for result in cvis_by_year.values():
        for da in result.da_ids:
            if da not in assignments:
                raise ValidationError(f"DA {da} has no sector assignment")
    for da, sector in assignments.items():
        if sector not in members:
            raise ValidationError(f"DA {da} assigned to unknown sector {sector!r}")
        members[sector].append(da)
    series = []
    for name in sector_names:
        das = members[name]
        if not das:
            raise EmptySectorError(f"sector {name} has no member DAs")
        points = []
        for year in sorted(cvis_by_year):
            result = cvis_by_year[year]
            pos = {da: i for i, da in enumerate(result.da_ids)}
            total = 0.0
            for da in das:
                total += float(result.cvis[pos[da]])
            points.append((year, total / len(das)))
        series.append(LviSeries(sector=name, points=tuple(points),
                                source=tuple(das)))
    return series


def _rescale_years(years: np.ndarray) -> tuple[np.ndarray, float, float]:
    lo = float(years.min())
    hi = float(years.max())
    if lo == hi:
        raise DegenerateSeriesError("series years are constant")
    return (years - lo) / (hi - lo), lo, hi


def forecast(series: LviSeries, target_year: int, seed: int = 0) -> ForecastResult:
    """Fit LR, RF and MLP on the observed points and score by training MSE.

    Years are affinely rescaled to [0, 1] before fitting; predictions are
    clamped to [0, 1] with a flag. Ties on MSE resolve LR, then RF, then MLP.
    """
    if len(series.points) < 2:
        raise ValidationError(f"sector {series.sector}: need >= 2 points to forecast")
    if target_year <= series.years[-1]:
        raise ValidationError(
            f"target year {target_year} not after last observed {series.years[-1]}"
        )
    years = np.asarray(series.years, dtype=np.float64)
    values = np.asarray(series.values, dtype=np.float64)
    t01, lo, hi = _rescale_years(years)
    target01 = (target_year - lo) / (hi - lo)

    scores: dict[str, ModelScore] = {}

    lr = fit_linear(t01, values)
    scores["LR"] = _score(lr.predict(target01), mse(values, lr.predict(t01)))

    rf = fit_forest(t01.reshape(-1, 1), values, n_trees=RF_FORECAST_TREES,
                    bootstrap=False, feature_subset_size=1, seed=seed)
    rf_fit = rf.predict(t01.reshape(-1, 1))
    scores["RF"] = _score(float(rf.predict(np.array([[target01]]))[0]),
                          mse(values, rf_fit))

    mlp = fit_mlp(t01, values, seed=seed)
    mlp_fit = predict_mlp(mlp, t01)
    scores["MLP"] = _score(float(predict_mlp(mlp, np.array(target01))),
                           mse(values, mlp_fit))

    return ForecastResult(sector=series.sector, target_year=target_year,
                          models=scores, selected_model=select_model(scores))


def select_model(scores: dict[str, ModelScore]) -> str:
    """Lowest training MSE wins; exact ties fall back on LR, RF, MLP order."""
    return min(
        MODEL_PRECEDENCE,
        key=lambda name: (scores[name].training_mse, MODEL_PRECEDENCE.index(name)),
    )


def _score(raw: float, training_mse: float) -> ModelScore:
    raw = float(raw)
    clamped = raw < 0.0 or raw > 1.0
    return ModelScore(
        prediction=min(1.0, max(0.0, raw)),
        raw_prediction=raw,
        training_mse=float(training_mse),
        clamped=clamped,
    )


def lvi_timeseries_payload(series_list, forecasts) -> dict:
    """Chart payload: observed solid segments plus dotted forecast tails."""
    by_sector = {f.sector: f for f in forecasts}
    if set(by_sector) != {s.sector for s in series_list}:
        raise ValidationError("forecasts do not match series sectors")
    years: set[int] = set()
    sectors = []
    for series in series_list:
        fc = by_sector[series.sector]
        years.update(series.years)
        years.add(fc.target_year)
        selected = fc.models[fc.selected_model]
        points = [[y, v, "observed"] for y, v in series.points]
        points.append([fc.target_year, selected.prediction, "predicted"])
        sectors.append(
            {
                "sector": series.sector,
                "observed": [[y, v] for y, v in series.points],
                "solid": [[y, v] for y, v in series.points],
                "dotted": [
                    [series.years[-1], series.values[-1]],
                    [fc.target_year, selected.prediction],
                ],
                "points": points,
                "forecast": {
                    name: {
                        "prediction": score.prediction,
                        "raw_prediction": score.raw_prediction,
                        "mse": score.training_mse,
                        "clamped": score.clamped,
                    }
                    for name, score in fc.models.items()
                },
                "selected_model": fc.selected_model,
                "target_year": fc.target_year,
            }
        )
    return {"years": sorted(years), "sectors": sectors}
