"""Binary CDDO: thresholded positions as feature masks, wrapper fitness, selection."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import core
from .classify import error_rate, nearest_labels, stratified_indices, vote
from .data import Dataset

# above this many floats the per-feature distance tensor is not precomputed
_TENSOR_LIMIT = 20_000_000


@dataclass(frozen=True)
class FitnessWeights:
    a: float = 0.90

    def __post_init__(self):
        if not 0.0 < self.a <= 1.0:
            raise ValueError(f"weight a must lie in (0, 1], got {self.a}")

    @property
    def b(self) -> float:
        return 1.0 - self.a


def binarize(position, threshold: float = 0.5) -> np.ndarray:
    """Feature i is selected iff position[i] > threshold (strictly)."""
    if not np.isfinite(threshold):
        raise ValueError("threshold must be finite")
    return np.asarray(position) > threshold


def repair_mask(mask, position) -> np.ndarray:
    """Guarantee at least one selected feature by switching on argmax(position)."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != np.shape(position):
        raise ValueError("mask and position lengths differ")
    if mask.any():
        return mask
    out = np.zeros_like(mask)
    out[int(np.argmax(position))] = True  # argmax returns the first maximum
    return out


def combine_fitness(error: float, selected: int, n_features: int, weights: FitnessWeights) -> float:
    return weights.a * error + weights.b * (selected / n_features)


class WrapperFitness:
    """KNN-error wrapper objective for masks over a fixed fit/validate pair.

    Squared per-feature differences between every validation and fit sample
    are precomputed once, so a mask's distance matrix is a single matrix-vector
    product. Results are cached by mask; ``calls`` counts every request,
    cached or not.
    """

    def __init__(self, fit: Dataset, validate: Dataset, weights: FitnessWeights = FitnessWeights(), k: int = 5):
        if validate.n_samples == 0:
            raise ValueError("empty validation set")
        if fit.n_features != validate.n_features:
            raise ValueError("fit and validate feature counts differ")
        if not 1 <= k <= fit.n_samples:
            raise ValueError(f"k must be in [1, {fit.n_samples}]")
        self.fit, self.validate = fit, validate
        self.weights = weights
        self.k = k
        self.n_features = fit.n_features
        self.n_classes = max(fit.n_classes, validate.n_classes)
        self.calls = 0
        self._cache: dict[bytes, tuple] = {}
        size = validate.n_samples * fit.n_samples * fit.n_features
        if size <= _TENSOR_LIMIT:
            diff = validate.features[:, None, :] - fit.features[None, :, :]
            self._sq = diff * diff
        else:
            self._sq = None

    def _distances(self, mask: np.ndarray) -> np.ndarray:
        if self._sq is not None:
            return self._sq @ mask.astype(float)
        v = self.validate.features[:, mask]
        f = self.fit.features[:, mask]
        d = v[:, None, :] - f[None, :, :]
        return np.einsum("qnd,qnd->qn", d, d)

    def error(self, mask) -> float:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.n_features,):
            raise ValueError(f"mask must have length {self.n_features}")
        if not mask.any():
            raise ValueError("mask selects no features")
        key = np.packbits(mask).tobytes()
        hit = self._cache.get(key)
        if hit is None:
            labels = nearest_labels(self._distances(mask), self.fit.labels, self.k)
            pred = vote(labels, self.n_classes)
            hit = (error_rate(pred, self.validate.labels),)
            self._cache[key] = hit
        return hit[0]

    def __call__(self, mask) -> float:
        self.calls += 1
        mask = np.asarray(mask, dtype=bool)
        return combine_fitness(self.error(mask), int(mask.sum()), self.n_features, self.weights)

    def decompose(self, mask):
        """(fitness, classifier_error, selected_count) without counting a call."""
        mask = np.asarray(mask, dtype=bool)
        err = self.error(mask)
        n = int(mask.sum())
        return combine_fitness(err, n, self.n_features, self.weights), err, n


def wrapper_fitness(mask, train: Dataset, validate: Dataset,
                    weights: FitnessWeights = FitnessWeights(), k: int = 5) -> float:
    """a * KNN error on ``validate`` + b * selected / D, using masked features of ``train``."""
    return WrapperFitness(train, validate, weights, k)(mask)


@dataclass
class SelectionResult:
    mask: np.ndarray
    fitness: float
    classifier_error: float
    selected_count: int
    fitness_history: np.ndarray
    seed: int
    evaluations: int = 0
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SearchSplit:
    """The rows used during search: a fit part and a validate part of the training data."""
    fit: Dataset
    validate: Dataset


def search_split(train: Dataset, seed: int, fit_fraction: float = 0.8) -> SearchSplit:
    fi, vi = stratified_indices(train.labels, fit_fraction, seed)
    return SearchSplit(train.subset(fi), train.subset(vi))


def mask_fitness_fn(evaluator: WrapperFitness, threshold: float):
    def fitness(position):
        return evaluator(repair_mask(binarize(position, threshold), position))
    return fitness


def check_selectable(dataset: Dataset):
    if dataset.n_features < 2:
        raise ValueError("feature selection needs at least 2 features")
    if len(np.unique(dataset.labels)) < 2:
        raise ValueError("dataset has a single class; nothing to classify")


def select_features(dataset: Dataset, config, split_seed: Optional[int] = None,
                    evaluator: Optional[WrapperFitness] = None) -> SelectionResult:
    """Run binary CDDO over [0, 1]^D on ``dataset`` (the training portion).

    ``dataset`` is re-split into fit/validate parts with ``split_seed``
    (default: ``config.seed``); the optimizer itself is seeded with
    ``config.seed``. ``config`` is a RunConfig or anything with the same
    fields.
    """
    check_selectable(dataset)
    if evaluator is None:
        s = search_split(dataset, config.seed if split_seed is None else split_seed, config.fit_fraction)
        evaluator = WrapperFitness(s.fit, s.validate, FitnessWeights(config.weight_a), config.knn_k)
    params = config.cddo_params()
    calls_before = evaluator.calls
    res = core.optimize(params, dataset.n_features, mask_fitness_fn(evaluator, config.threshold))
    mask = repair_mask(binarize(res.best_position, config.threshold), res.best_position)
    fitness, err, n = evaluator.decompose(mask)
    return SelectionResult(
        mask=mask,
        fitness=fitness,
        classifier_error=err,
        selected_count=n,
        fitness_history=res.fitness_history,
        seed=params.seed,
        evaluations=evaluator.calls - calls_before,
    )
