"""Local surrogate explanations for single forecasts.

Perturbs the instance by swapping random feature subsets for their
training means, weights samples by proximity in mask space, and fits a
weighted linear surrogate whose coefficients become the attributions.
The top-k attributions are what the explanation panel displays.
"""

from __future__ import annotations

import math
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .errors import DegenerateFitError, DimensionMismatchError
from .forecasting import FeatureVector, LinearModel

SURROGATE_REGULARIZATION = 1e-6  # numerical stability only; sparsity comes from top-k truncation


@dataclass(frozen=True)
class ExplainerConfig:
    """Sampling parameters; n_perturbations and kernel_width default to
    50*d and 0.75*sqrt(d) for feature dimension d when left unset."""

    n_perturbations: int | None = None
    kernel_width: float | None = None
    top_k: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.n_perturbations is not None and self.n_perturbations < 1:
            raise ValueError("n_perturbations must be positive")
        if self.kernel_width is not None and self.kernel_width <= 0:
            raise ValueError("kernel_width must be positive")
        if self.top_k < 1:
            raise ValueError("top_k must be positive")

    def resolve(self, dimension: int) -> tuple[int, float]:
        n = self.n_perturbations if self.n_perturbations is not None else 50 * dimension
        sigma = self.kernel_width if self.kernel_width is not None else 0.75 * math.sqrt(dimension)
        if self.top_k > dimension:
            raise ValueError(f"top_k {self.top_k} exceeds feature dimension {dimension}")
        if n < 2 * dimension:
            raise ValueError(f"n_perturbations {n} < 2 * feature dimension {dimension}")
        return n, sigma


@dataclass(frozen=True)
class Attribution:
    feature_name: str
    weight: float


@dataclass(frozen=True)
class ExplanationRecord:
    explanation_id: str
    forecast_id: str
    attributions: tuple[Attribution, ...]
    fidelity: float
    created_at: datetime

    def feature_names(self) -> tuple[str, ...]:
        return tuple(a.feature_name for a in self.attributions)


@dataclass(frozen=True)
class PerturbationSet:
    samples: np.ndarray  # n x d feature values
    masks: np.ndarray    # n x d, 1 = original value kept, 0 = replaced by mean


def perturb(features: FeatureVector, means: np.ndarray, n: int, seed: int) -> PerturbationSet:
    """n samples with uniformly random keep/replace masks; sample 0 is the original."""
    if n < 1:
        raise ValueError("n must be >= 1")
    values = np.asarray(features.values, dtype=float)
    means = np.asarray(means, dtype=float)
    if means.shape != values.shape:
        raise DimensionMismatchError(f"means shape {means.shape} != values shape {values.shape}")
    rng = np.random.default_rng(seed)
    masks = rng.integers(0, 2, size=(n, len(values)))
    masks[0] = 1
    samples = means + masks * (values - means)
    return PerturbationSet(samples=samples, masks=masks)


def kernel_weight(distance: float, sigma: float) -> float:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return math.exp(-(distance ** 2) / sigma ** 2)


def fit_surrogate(
    masks: np.ndarray, predictions: np.ndarray, weights: np.ndarray
) -> tuple[np.ndarray, float, float]:
    """Weighted ridge of predictions on binary masks.

    Returns (coefficients in mask space, intercept, fidelity). Fidelity is
    the weighted R^2 clamped to [0, 1]; a zero-variance target counts as a
    perfect (trivial) fit.
    """
    masks = np.asarray(masks, dtype=float)
    predictions = np.asarray(predictions, dtype=float)
    weights = np.asarray(weights, dtype=float)
    d = masks.shape[1]
    if np.count_nonzero(weights) < d + 1:
        raise DegenerateFitError(
            f"need at least {d + 1} samples with nonzero weight, got {np.count_nonzero(weights)}"
        )
    if np.all(masks == masks[0]):
        raise DegenerateFitError("all perturbation masks identical; nothing to fit")

    total = weights.sum()
    mask_mean = weights @ masks / total
    pred_mean = weights @ predictions / total
    Xc = masks - mask_mean
    yc = predictions - pred_mean
    gram = Xc.T @ (weights[:, None] * Xc) + SURROGATE_REGULARIZATION * np.eye(d)
    coefficients = np.linalg.solve(gram, Xc.T @ (weights * yc))
    intercept = float(pred_mean - mask_mean @ coefficients)

    ss_tot = float(weights @ yc ** 2)
    if ss_tot == 0.0:
        return coefficients, intercept, 1.0
    residuals = predictions - (intercept + masks @ coefficients)
    ss_res = float(weights @ residuals ** 2)
    fidelity = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return coefficients, intercept, fidelity


def top_attributions(names, weights, k: int) -> tuple[Attribution, ...]:
    """Largest |weight| first; exact ties fall back to feature name ascending."""
    ranked = sorted(zip(names, weights), key=lambda pair: (-abs(pair[1]), pair[0]))
    return tuple(Attribution(name, float(weight)) for name, weight in ranked[: min(k, len(ranked))])


def explain(
    model: LinearModel, features: FeatureVector, config: ExplainerConfig, forecast_id: str
) -> ExplanationRecord:
    """Full pipeline: perturb, predict, weight by mask distance, fit, rank top-k.

    The surrogate is fit on the model's unclamped linear response so that
    attributions reflect the model itself rather than the display clamp.
    """
    d = len(model.coefficients)
    if len(features.values) != d:
        raise DimensionMismatchError(f"model has {d} features, vector has {len(features.values)}")
    n, sigma = config.resolve(d)
    perturbed = perturb(features, model.feature_means, n, config.seed)
    predictions = model.intercept + perturbed.samples @ model.coefficients
    distances = np.sqrt((perturbed.masks == 0).sum(axis=1))
    weights = np.exp(-(distances ** 2) / sigma ** 2)
    coefficients, _, fidelity = fit_surrogate(perturbed.masks, predictions, weights)
    attributions = top_attributions(model.feature_names, coefficients, config.top_k)
    return ExplanationRecord(
        explanation_id=f"xp-{uuid.uuid4().hex}",
        forecast_id=forecast_id,
        attributions=attributions,
        fidelity=fidelity,
        created_at=datetime.now(timezone.utc),
    )
