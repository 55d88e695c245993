"""Baselines, the exhaustive oracle and repeated-seed experiments."""
from __future__ import annotations

import itertools
import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .binary import (
    FitnessWeights,
    SelectionResult,
    WrapperFitness,
    check_selectable,
    search_split,
    select_features,
)
from .classify import confusion, knn_predict_many, metrics_from_confusion, stratified_split
from .data import Dataset, normalize_minmax


class OracleLimitError(ValueError):
    pass


class SeedRunError(RuntimeError):
    def __init__(self, seed: int, cause: BaseException):
        super().__init__(f"run with seed {seed} failed: {cause}")
        self.seed = seed


def make_synthetic(n_samples: int = 200, n_informative: int = 3, n_noise: int = 5,
                   seed: int = 0, shuffle_columns: bool = False) -> Dataset:
    """Two-class data whose label depends only on the informative columns.

    Informative columns are uniform on [0, 1] and the class is whether their
    sum exceeds half the column count; noise columns are independent uniforms.
    Informative columns come first unless ``shuffle_columns``.
    """
    rng = np.random.default_rng(seed)
    inf = rng.uniform(size=(n_samples, n_informative))
    noise = rng.uniform(size=(n_samples, n_noise))
    y = (inf.sum(axis=1) > n_informative / 2).astype(np.int64)
    X = np.hstack([inf, noise])
    names = [f"inf{i}" for i in range(n_informative)] + [f"noise{i}" for i in range(n_noise)]
    if shuffle_columns:
        perm = rng.permutation(X.shape[1])
        X = X[:, perm]
        names = [names[i] for i in perm]
    # both classes must have at least two members to be splittable
    if np.bincount(y, minlength=2).min() < 2:
        y[:2] = [0, 1]
    return Dataset(X, y, tuple(names), ("neg", "pos"))


@dataclass(frozen=True)
class PreparedData:
    """Normalized train/test portions plus the fit/validate pair used during search."""
    train: Dataset
    test: Dataset
    evaluator: WrapperFitness


def prepare(dataset: Dataset, config, split_seed: Optional[int] = None) -> PreparedData:
    """Normalize, split train/test, and build the search-time evaluator.

    Normalization uses full-dataset min/max unless
    ``config.normalize_train_only``, in which case train statistics are
    applied to both parts. ``split_seed`` defaults to ``config.seed``.
    """
    seed = config.seed if split_seed is None else split_seed
    if config.normalize_train_only:
        train, test = stratified_split(dataset, config.train_fraction, seed)
        train = normalize_minmax(train)
        test = normalize_minmax(test, params=train.scale)
    else:
        data = dataset if dataset.normalized else normalize_minmax(dataset)
        train, test = stratified_split(data, config.train_fraction, seed)
    s = search_split(train, seed, config.fit_fraction)
    ev = WrapperFitness(s.fit, s.validate, FitnessWeights(config.weight_a), config.knn_k)
    return PreparedData(train, test, ev)


def all_masks(n_features: int):
    """Every non-empty mask, in increasing binary order of (bit0, bit1, ...)."""
    for bits in itertools.product((False, True), repeat=n_features):
        if any(bits):
            yield np.array(bits)


def _lex_key(mask) -> tuple:
    return tuple(int(b) for b in mask)


def exhaustive_ranking(evaluator: WrapperFitness, limit: int = 20):
    """All non-empty masks ranked by (fitness, lexicographic mask)."""
    d = evaluator.n_features
    if d > limit:
        raise OracleLimitError(f"exhaustive search over D={d} features exceeds the limit of {limit}")
    rows = []
    for m in all_masks(d):
        f, err, n = evaluator.decompose(m)
        rows.append((f, _lex_key(m), err, n))
    rows.sort(key=lambda r: (r[0], r[1]))
    return [(np.array(key, dtype=bool), f, err, n) for f, key, err, n in rows]


def exhaustive_oracle(dataset: Dataset, weights: FitnessWeights = FitnessWeights(), k: int = 5,
                      split_seed: int = 0, config=None, limit: Optional[int] = None):
    """Best (mask, fitness) over all 2^D - 1 masks under the selection split protocol.

    ``dataset`` is the full dataset; it goes through the same normalization
    and splits as ``run_experiment``.
    """
    from .config import RunConfig

    if config is None:
        config = RunConfig(weight_a=weights.a, knn_k=k, seed=split_seed)
    if limit is None:
        limit = config.oracle_limit
    if dataset.n_features > limit:
        raise OracleLimitError(f"exhaustive search over D={dataset.n_features} features exceeds the limit of {limit}")
    prep = prepare(dataset, config, split_seed)
    mask, fitness, _, _ = exhaustive_ranking(prep.evaluator, limit)[0]
    return mask, fitness


def random_search(evaluator: WrapperFitness, budget: int, seed: int = 0, dedup: bool = False) -> SelectionResult:
    """Best of ``budget`` uniformly random non-empty masks.

    With ``dedup`` no mask is drawn twice; the budget is capped at 2^D - 1.
    Ties keep the lexicographically smallest mask.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    d = evaluator.n_features
    rng = np.random.default_rng(seed)
    seen = set()
    if dedup:
        budget = min(budget, 2 ** d - 1) if d < 64 else budget
    best_key = None
    best = None
    history = np.empty(budget)
    for i in range(budget):
        while True:
            m = rng.random(d) < 0.5
            if not m.any():
                continue
            key = _lex_key(m)
            if dedup and key in seen:
                continue
            seen.add(key)
            break
        f = evaluator(m)
        if best is None or (f, key) < (best, best_key):
            best, best_key = f, key
        history[i] = best
    mask = np.array(best_key, dtype=bool)
    fitness, err, n = evaluator.decompose(mask)
    return SelectionResult(mask, fitness, err, n, history, seed, evaluations=budget)


def evaluate_mask(train: Dataset, test: Dataset, mask, k: int):
    """Train KNN on the masked training portion and score it on the test portion."""
    mask = np.asarray(mask, dtype=bool)
    n_classes = max(train.n_classes, test.n_classes)
    pred = knn_predict_many(train.features[:, mask], train.labels, test.features[:, mask], k, n_classes)
    cm = confusion(pred, test.labels, n_classes)
    return cm, metrics_from_confusion(cm)


@dataclass
class SeedRun:
    selection: SelectionResult
    confusion: list
    metrics: dict
    support: int
    wall_seconds: float


def _stats(values):
    values = [float(v) for v in values]
    return {
        "mean": statistics.fmean(values),
        "min": min(values),
        "max": max(values),
        "std": statistics.pstdev(values) if len(values) > 1 else 0.0,
    }


@dataclass
class ExperimentReport:
    runs: list
    split_seed: int
    feature_names: tuple
    class_names: tuple
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self.summary = summarize(self.runs)


def summarize(runs) -> dict:
    return {
        "accuracy": _stats(r.metrics["accuracy"] for r in runs),
        "precision": _stats(r.metrics["precision"] for r in runs),
        "recall": _stats(r.metrics["recall"] for r in runs),
        "f1": _stats(r.metrics["f1"] for r in runs),
        "fitness": _stats(r.selection.fitness for r in runs),
        "selected_count_mean": statistics.fmean(r.selection.selected_count for r in runs),
        "num_seeds": len(runs),
    }


def run_experiment(dataset: Dataset, config, num_seeds: Optional[int] = None) -> ExperimentReport:
    """Select features under seeds config.seed .. config.seed + num_seeds - 1.

    Every run shares one train/test and fit/validate split, drawn with
    ``config.seed``, so runs differ only in the optimizer's randomness and are
    directly comparable with ``exhaustive_oracle(..., split_seed=config.seed)``.
    """
    n = config.num_seeds if num_seeds is None else num_seeds
    if n < 1:
        raise ValueError("num_seeds must be >= 1")
    check_selectable(dataset)
    prep = prepare(dataset, config)
    runs = []
    for seed in range(config.seed, config.seed + n):
        t0 = time.perf_counter()
        try:
            sel = select_features(prep.train, config.with_seed(seed), evaluator=prep.evaluator)
            cm, met = evaluate_mask(prep.train, prep.test, sel.mask, config.knn_k)
        except Exception as exc:
            raise SeedRunError(seed, exc) from exc
        runs.append(SeedRun(sel, cm.tolist(), met.as_dict(), cm.total, time.perf_counter() - t0))
    return ExperimentReport(runs, config.seed, dataset.feature_names, dataset.class_names)


def relative_gap(value: float, optimum: float) -> float:
    if optimum == 0:
        return math.inf if value > 0 else 0.0
    return (value - optimum) / abs(optimum)
