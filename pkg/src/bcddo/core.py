"""Child Drawing Development Optimization (continuous, minimization).

Each drawing is a position in a box. Per iteration a random hand pressure
is drawn; drawings whose own hand pressure falls below it take a skill step
towards their personal and global bests, offset by a golden-ratio term.
Drawings whose length/width ratio sits near the golden ratio are instead
rebuilt from the pattern memory of past global bests. Bests and the pattern
memory are refreshed after every iteration.

Random draws come from a single ``numpy.random.Generator`` in a fixed order:
the iteration's random hand pressure, then per drawing the hand-pressure
index, the two rate draws, the length/width indices and, for creativity
updates only, the pattern-memory index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

PHI = (1 + math.sqrt(5)) / 2
EPS_DIV = 1e-9
HIGH_RATES = (0.6, 1.0)
LOW_RATES = (0.0, 0.5)


class FitnessEvaluationError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"fitness evaluation failed for drawing {index}: {cause!r}")
        self.index = index


class EmptyPatternMemory(LookupError):
    pass


@dataclass(frozen=True)
class Bounds:
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"lower bound {self.lower} must be below upper bound {self.upper}")

    def clip(self, x):
        return np.clip(x, self.lower, self.upper)

    def reflect(self, x):
        span = self.upper - self.lower
        y = np.mod(np.asarray(x, dtype=float) - self.lower, 2 * span)
        return self.lower + np.where(y > span, 2 * span - y, y)

    def wrap(self, x):
        span = self.upper - self.lower
        return self.lower + np.mod(np.asarray(x, dtype=float) - self.lower, span)


BOUNDARY_POLICIES = ("clip", "reflect", "wrap", "random")


def apply_boundary(x, bounds: Bounds, policy: str, rng: np.random.Generator) -> np.ndarray:
    """Bring an updated position back into the box."""
    x = np.asarray(x, dtype=float)
    if policy == "clip":
        return bounds.clip(x)
    if policy == "reflect":
        return bounds.reflect(x)
    if policy == "wrap":
        return bounds.wrap(x)
    if policy == "random":
        out = (x < bounds.lower) | (x > bounds.upper)
        # one draw per component keeps the draw count independent of x
        fresh = rng.uniform(bounds.lower, bounds.upper, size=x.shape)
        return np.where(out, fresh, x)
    raise ValueError(f"unknown boundary policy {policy!r}")


@dataclass(frozen=True)
class CddoParams:
    population_size: int = 30
    max_iterations: int = 100
    cr: float = 0.1
    sr_init: float = 0.9
    lr_init: float = 0.01
    pattern_size: int = 10
    bounds: Bounds = field(default_factory=Bounds)
    gr_tolerance: float = 0.1
    seed: int = 0
    # keep SR/LR at sr_init/lr_init instead of redrawing them per branch
    fixed_rates: bool = False
    boundary: str = "reflect"

    def __post_init__(self):
        if self.boundary not in BOUNDARY_POLICIES:
            raise ValueError(f"boundary must be one of {BOUNDARY_POLICIES}")
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.pattern_size < 1:
            raise ValueError("pattern_size must be positive")
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError("cr must lie in [0, 1]")
        if not self.gr_tolerance > 0:
            raise ValueError("gr_tolerance must be positive")


@dataclass(frozen=True)
class Drawing:
    position: np.ndarray
    personal_best_position: np.ndarray
    personal_best_fitness: float
    current_fitness: float


class GlobalBest(NamedTuple):
    position: np.ndarray
    fitness: float


@dataclass(frozen=True)
class PatternMemory:
    capacity: int
    entries: tuple = ()
    write_cursor: int = 0

    def __len__(self):
        return len(self.entries)


@dataclass
class OptimizeResult:
    best_position: np.ndarray
    best_fitness: float
    fitness_history: np.ndarray
    evaluations: int


def random_hand_pressure(bounds: Bounds, rng: np.random.Generator) -> float:
    return float(rng.uniform(bounds.lower, bounds.upper))


def select_hand_pressure(drawing: Drawing, rng: np.random.Generator) -> float:
    x = drawing.position
    return float(x[rng.integers(len(x))])


def select_lw_indices(dimension: int, rng: np.random.Generator):
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    length, width = rng.integers(dimension, size=2)
    return int(length), int(width)


def golden_ratio(position, length_index: int, width_index: int, eps: float = EPS_DIV) -> float:
    """(x_L + x_W) / x_L.

    A length component smaller than ``eps`` in magnitude is replaced by
    ``eps`` carrying its sign (+eps for exact zero), so the ratio stays finite.
    """
    xl = float(position[length_index])
    xw = float(position[width_index])
    if abs(xl) < eps:
        xl = math.copysign(eps, xl) if xl != 0.0 else eps
    return (xl + xw) / xl


def skill_update(drawing: Drawing, gbest, gr: float, sr: float, lr: float) -> np.ndarray:
    x = drawing.position
    return gr + sr * (drawing.personal_best_position - x) + lr * (np.asarray(gbest) - x)


def creativity_update(pm_entry, gbest, cr: float) -> np.ndarray:
    return np.asarray(pm_entry, dtype=float) + cr * np.asarray(gbest, dtype=float)


def pattern_memory_store(pm: PatternMemory, gbest_position) -> PatternMemory:
    entries = list(pm.entries)
    item = np.array(gbest_position, dtype=float)
    if len(entries) < pm.capacity:
        entries.append(item)
    else:
        entries[pm.write_cursor] = item
    return replace(pm, entries=tuple(entries), write_cursor=(pm.write_cursor + 1) % pm.capacity)


def pattern_memory_sample(pm: PatternMemory, rng: np.random.Generator) -> np.ndarray:
    if not pm.entries:
        raise EmptyPatternMemory("pattern memory is empty")
    return pm.entries[int(rng.integers(len(pm.entries)))]


def _evaluate(fitness_fn, position, index) -> float:
    try:
        return float(fitness_fn(position))
    except Exception as exc:
        raise FitnessEvaluationError(index, exc) from exc


def init_population(params: CddoParams, dimension: int, rng: np.random.Generator) -> list:
    """Uniform random positions; personal bests start at the initial positions.

    Fitness fields are left as +inf; ``evaluate_population`` fills them in.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    b = params.bounds
    pos = rng.uniform(b.lower, b.upper, size=(params.population_size, dimension))
    return [Drawing(p, p.copy(), math.inf, math.inf) for p in pos]


def evaluate_population(population, fitness_fn):
    out = []
    for i, d in enumerate(population):
        f = _evaluate(fitness_fn, d.position, i)
        out.append(Drawing(d.position, d.position.copy(), f, f))
    return out


def best_of(population) -> GlobalBest:
    i = min(range(len(population)), key=lambda j: population[j].personal_best_fitness)
    d = population[i]
    return GlobalBest(d.personal_best_position.copy(), d.personal_best_fitness)


def propose(drawing: Drawing, rhp: float, pm: PatternMemory, gbest: GlobalBest,
            params: CddoParams, rng: np.random.Generator) -> Optional[np.ndarray]:
    """New (unclipped) position for one drawing, or None if it stays put."""
    hp = select_hand_pressure(drawing, rng)
    low = hp < rhp
    if params.fixed_rates:
        sr, lr = params.sr_init, params.lr_init
    else:
        sr, lr = rng.uniform(*(HIGH_RATES if low else LOW_RATES), size=2)
    length, width = select_lw_indices(len(drawing.position), rng)
    gr = golden_ratio(drawing.position, length, width)
    if low:
        return skill_update(drawing, gbest.position, gr, sr, lr)
    if abs(gr - PHI) <= params.gr_tolerance:
        try:
            entry = pattern_memory_sample(pm, rng)
        except EmptyPatternMemory:
            entry = gbest.position
        return creativity_update(entry, gbest.position, params.cr)
    return None


def step(population, pm: PatternMemory, gbest: GlobalBest, params: CddoParams,
         fitness_fn: Callable, rng: np.random.Generator):
    """One iteration. Returns (population, pattern memory, global best, evaluations).

    All moves are computed against the global best from the start of the
    iteration; bests are committed afterwards in drawing order. Drawings that
    did not move keep their cached fitness and are not re-evaluated.
    """
    rhp = random_hand_pressure(params.bounds, rng)
    moves = [propose(d, rhp, pm, gbest, params, rng) for d in population]

    new_pop = []
    evaluations = 0
    best = gbest
    for i, (d, new) in enumerate(zip(population, moves)):
        if new is None:
            nd = d
        else:
            x = apply_boundary(new, params.bounds, params.boundary, rng)
            f = _evaluate(fitness_fn, x, i)
            evaluations += 1
            if f < d.personal_best_fitness:
                nd = Drawing(x, x.copy(), f, f)
            else:
                nd = Drawing(x, d.personal_best_position, d.personal_best_fitness, f)
        if nd.personal_best_fitness < best.fitness:
            best = GlobalBest(nd.personal_best_position.copy(), nd.personal_best_fitness)
        new_pop.append(nd)
    return new_pop, pattern_memory_store(pm, best.position), best, evaluations


def optimize(params: CddoParams, dimension: int, fitness_fn: Callable,
             rng: Optional[np.random.Generator] = None, callback=None) -> OptimizeResult:
    """Minimize ``fitness_fn`` over ``params.bounds ** dimension``.

    ``rng`` defaults to ``numpy.random.default_rng(params.seed)``. ``callback``
    is called as ``callback(t, population, gbest)`` after every iteration.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    population = evaluate_population(init_population(params, dimension, rng), fitness_fn)
    evaluations = len(population)
    gbest = best_of(population)
    pm = pattern_memory_store(PatternMemory(params.pattern_size), gbest.position)

    history = np.empty(params.max_iterations)
    for t in range(params.max_iterations):
        population, pm, gbest, n = step(population, pm, gbest, params, fitness_fn, rng)
        evaluations += n
        history[t] = gbest.fitness
        if callback is not None:
            callback(t, population, gbest)
    return OptimizeResult(gbest.position, gbest.fitness, history, evaluations)
