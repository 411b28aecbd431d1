"""Per-series daily demand forecasting.

Glass-box linear models over lag and calendar-indicator features, fit by
regularized least squares. A glass-box keeps the surrogate explanations
checkable against the true coefficients. All feature construction is
leakage-free: a vector for target date t only reads observations dated
strictly before t.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from urllib.parse import quote, unquote

import numpy as np

from .errors import (
    DegenerateDesignError,
    DimensionMismatchError,
    InsufficientDataError,
    InsufficientHistoryError,
)
from .ingestion import DemandStore, SeriesKey

_WEEKDAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
_MONTHS = [
    "january", "february", "march", "april", "may", "june",
    "july", "august", "september", "october", "november", "december",
]

# name -> (attribute, value) where attribute is weekday() or month
CALENDAR_FEATURES: dict[str, tuple[str, int]] = {}
for _i, _name in enumerate(_WEEKDAYS):
    CALENDAR_FEATURES[f"is_{_name}"] = ("weekday", _i)
for _i, _name in enumerate(_MONTHS, start=1):
    CALENDAR_FEATURES[f"is_{_name}"] = ("month", _i)

DEFAULT_LAGS = (1, 2, 7, 14, 28)
DEFAULT_CALENDAR = tuple(f"is_{name}" for name in _WEEKDAYS + _MONTHS)


@dataclass(frozen=True)
class ModelSpec:
    lags: tuple[int, ...] = DEFAULT_LAGS
    calendar_features: tuple[str, ...] = DEFAULT_CALENDAR
    regularization: float = 0.1
    clamp_nonnegative: bool = True

    def __post_init__(self):
        if not self.lags:
            raise ValueError("lags must be non-empty")
        if any(l <= 0 for l in self.lags) or list(self.lags) != sorted(set(self.lags)):
            raise ValueError("lags must be positive and strictly increasing")
        unknown = [f for f in self.calendar_features if f not in CALENDAR_FEATURES]
        if unknown:
            raise ValueError(f"unknown calendar features: {unknown}")
        if self.regularization < 0:
            raise ValueError("regularization must be >= 0")

    @property
    def feature_dimension(self) -> int:
        return len(self.lags) + len(self.calendar_features)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f"lag_{l}" for l in self.lags) + self.calendar_features


@dataclass(frozen=True)
class FeatureVector:
    series: SeriesKey
    target_date: date
    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.names):
            raise DimensionMismatchError(
                f"{len(self.values)} values for {len(self.names)} names"
            )


@dataclass(frozen=True)
class ForecastRecord:
    forecast_id: str
    series: SeriesKey
    target_date: date
    quantity: float
    model_id: str
    created_at: datetime

    def __post_init__(self):
        if self.quantity < 0:
            raise ValueError("forecast quantity must be >= 0")


@dataclass(frozen=True)
class BacktestReport:
    series: SeriesKey
    folds: int
    mae: float
    baseline_mae: float


@dataclass(frozen=True)
class LinearModel:
    """Trained glass-box predictor: intercept + coefficients over named features."""

    model_id: str
    series: SeriesKey
    spec: ModelSpec
    seed: int
    feature_names: tuple[str, ...]
    coefficients: np.ndarray
    intercept: float
    feature_means: np.ndarray = field(repr=False)  # training column means, used by the explainer

    def raw_predict(self, values: np.ndarray) -> float:
        if len(values) != len(self.coefficients):
            raise DimensionMismatchError(
                f"model has {len(self.coefficients)} features, got {len(values)}"
            )
        return float(self.intercept + self.coefficients @ np.asarray(values, dtype=float))


def _calendar_value(name: str, on: date) -> float:
    attr, expected = CALENDAR_FEATURES[name]
    actual = on.weekday() if attr == "weekday" else on.month
    return 1.0 if actual == expected else 0.0


def build_features(
    store: DemandStore, series: SeriesKey, target_date: date, spec: ModelSpec
) -> FeatureVector:
    """Lag and calendar features for one target date; reads only dates < target."""
    if series not in store:
        raise InsufficientHistoryError(f"no observations for series {series}")
    max_lag = max(spec.lags)
    if (target_date - store.first_date(series)).days < max_lag:
        raise InsufficientHistoryError(
            f"series {series} needs {max_lag} days of history before {target_date}"
        )
    values = [store.quantity(series, target_date - timedelta(days=lag)) for lag in spec.lags]
    values += [_calendar_value(name, target_date) for name in spec.calendar_features]
    return FeatureVector(series, target_date, np.array(values), spec.feature_names)


def _fit_ridge(X: np.ndarray, y: np.ndarray, regularization: float) -> tuple[np.ndarray, float]:
    """Least squares with an L2 penalty on coefficients; intercept unpenalized."""
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    if regularization == 0 and np.any(np.ptp(X, axis=0) == 0):
        raise DegenerateDesignError(
            "constant feature column with zero regularization makes the fit singular"
        )
    gram = Xc.T @ Xc + regularization * np.eye(X.shape[1])
    try:
        beta = np.linalg.solve(gram, Xc.T @ (y - y_mean))
    except np.linalg.LinAlgError:
        raise DegenerateDesignError("singular design matrix") from None
    return beta, float(y_mean - x_mean @ beta)


def training_rows(
    store: DemandStore, series: SeriesKey, spec: ModelSpec
) -> tuple[np.ndarray, np.ndarray, list[date]]:
    """Design matrix over all observed dates with enough prior history.

    Targets are the observed quantities; gaps in the series never become
    targets but do appear as zero-demand days inside lag features.
    """
    first = store.first_date(series)
    max_lag = max(spec.lags)
    dates = [d for d in store.observed_dates(series) if (d - first).days >= max_lag]
    if not dates:
        raise InsufficientDataError(f"series {series} has no usable training rows")
    dense = store.dense(series)
    idx = np.array([(d - first).days for d in dates])
    columns = [dense[idx - lag] for lag in spec.lags]
    weekdays = (first.weekday() + idx) % 7
    months = (np.datetime64(first) + idx.astype("timedelta64[D]")).astype("datetime64[M]").astype(int) % 12 + 1
    for name in spec.calendar_features:
        attr, expected = CALENDAR_FEATURES[name]
        hits = weekdays == expected if attr == "weekday" else months == expected
        columns.append(hits.astype(float))
    return np.column_stack(columns), dense[idx], dates


def train(store: DemandStore, series: SeriesKey, spec: ModelSpec, seed: int) -> LinearModel:
    X, y, _ = training_rows(store, series, spec)
    if len(y) < spec.feature_dimension + 2:
        raise InsufficientDataError(
            f"series {series}: {len(y)} usable rows < {spec.feature_dimension + 2} required"
        )
    beta, intercept = _fit_ridge(X, y, spec.regularization)
    return LinearModel(
        model_id=f"md-{uuid.uuid4().hex}",
        series=series,
        spec=spec,
        seed=seed,
        feature_names=spec.feature_names,
        coefficients=beta,
        intercept=intercept,
        feature_means=X.mean(axis=0),
    )


def predict(model: LinearModel, features: FeatureVector) -> ForecastRecord:
    if len(features.values) != len(model.coefficients):
        raise DimensionMismatchError(
            f"model has {len(model.coefficients)} features, vector has {len(features.values)}"
        )
    quantity = model.raw_predict(features.values)
    if model.spec.clamp_nonnegative:
        quantity = max(0.0, quantity)
    return ForecastRecord(
        forecast_id=f"fc-{uuid.uuid4().hex}",
        series=features.series,
        target_date=features.target_date,
        quantity=quantity,
        model_id=model.model_id,
        created_at=datetime.now(timezone.utc),
    )


def backtest(
    store: DemandStore,
    series: SeriesKey,
    spec: ModelSpec,
    folds: int,
    seed: int,
    *,
    horizon: int = 7,
) -> BacktestReport:
    """Expanding-window evaluation against a last-observed-value baseline.

    Fold i trains on everything before its cut date, then scores every day
    of the following horizon one step ahead. Model and baseline are scored
    on identical dates.
    """
    if folds < 1:
        raise InsufficientDataError("folds must be >= 1")
    if horizon < 1:
        raise InsufficientDataError("horizon must be >= 1")
    last = store.last_date(series)
    first_cut = last - timedelta(days=folds * horizon - 1)
    min_rows = spec.feature_dimension + 2
    errors: list[float] = []
    baseline_errors: list[float] = []
    for fold in range(folds):
        cut = first_cut + timedelta(days=fold * horizon)
        train_store = _truncate(store, series, cut)
        try:
            model = train(train_store, series, spec, seed)
        except InsufficientDataError:
            raise InsufficientDataError(
                f"series {series}: fewer than {min_rows} training rows before fold {fold} cut {cut}"
            ) from None
        for step in range(horizon):
            target = cut + timedelta(days=step)
            actual = store.quantity(series, target)
            predicted = model.raw_predict(build_features(store, series, target, spec).values)
            if spec.clamp_nonnegative:
                predicted = max(0.0, predicted)
            baseline = store.quantity(series, target - timedelta(days=1))
            errors.append(abs(predicted - actual))
            baseline_errors.append(abs(baseline - actual))
    return BacktestReport(
        series=series,
        folds=folds,
        mae=float(np.mean(errors)),
        baseline_mae=float(np.mean(baseline_errors)),
    )


def _truncate(store: DemandStore, series: SeriesKey, before: date) -> DemandStore:
    kept = [o for o in store.observations(series) if o.date < before]
    if not kept:
        raise InsufficientDataError(f"series {series} has no data before {before}")
    return DemandStore(kept)


# --- model persistence: one flat key-value text file per series ---

def model_filename(series: SeriesKey) -> str:
    return f"{quote(series.material_id, safe='')}@{quote(series.client_id, safe='')}.model"


def save_model(model: LinearModel, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / model_filename(model.series)
    lines = [
        f"model_id: {model.model_id}",
        f"material_id: {model.series.material_id}",
        f"client_id: {model.series.client_id}",
        f"seed: {model.seed}",
        f"lags: {','.join(str(l) for l in model.spec.lags)}",
        f"calendar_features: {','.join(model.spec.calendar_features)}",
        f"regularization: {model.spec.regularization!r}",
        f"clamp_nonnegative: {str(model.spec.clamp_nonnegative).lower()}",
        f"intercept: {model.intercept!r}",
    ]
    for name, coef, mean in zip(model.feature_names, model.coefficients, model.feature_means):
        lines.append(f"feature: {name} {float(coef)!r} {float(mean)!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def load_model(path: str | Path) -> LinearModel:
    fields: dict[str, str] = {}
    features: list[tuple[str, float, float]] = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(": ")
        if key == "feature":
            name, coef, mean = value.rsplit(" ", 2)
            features.append((name, float(coef), float(mean)))
        else:
            fields[key] = value
    spec = ModelSpec(
        lags=tuple(int(l) for l in fields["lags"].split(",")),
        calendar_features=tuple(f for f in fields["calendar_features"].split(",") if f),
        regularization=float(fields["regularization"]),
        clamp_nonnegative=fields["clamp_nonnegative"] == "true",
    )
    return LinearModel(
        model_id=fields["model_id"],
        series=SeriesKey(fields["material_id"], fields["client_id"]),
        spec=spec,
        seed=int(fields["seed"]),
        feature_names=tuple(name for name, _, _ in features),
        coefficients=np.array([coef for _, coef, _ in features]),
        intercept=float(fields["intercept"]),
        feature_means=np.array([mean for _, _, mean in features]),
    )


def load_models(directory: str | Path) -> dict[SeriesKey, LinearModel]:
    models = {}
    for path in sorted(Path(directory).glob("*.model")):
        model = load_model(path)
        models[model.series] = model
    return models


def parse_series_filename(name: str) -> SeriesKey:
    stem = name[: -len(".model")] if name.endswith(".model") else name
    material, _, client = stem.partition("@")
    return SeriesKey(unquote(material), unquote(client))
