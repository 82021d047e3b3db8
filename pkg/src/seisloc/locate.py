"""Differential-evolution least-squares localization baseline.

Minimizes the squared L2 distance between an observed TDoA feature and the
feature predicted at a candidate position under an estimated slowness model.
Variant: DE/rand/1/bin over the continuous field box, clipped at the
boundary, with greedy selection.  The search is grid-granular: a candidate
is scored at the center of the grid cell containing it (scores memoized per
cell), and the best cell's center is the answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfFieldError, ParameterError
from .field import FieldConfig, SensorArray, SlownessModel, cell_of
from .raytrace import assemble_event_matrix
from .simulate import propagation_times, tdoa_from_times


@dataclass(frozen=True)
class DeConfig:
    population: int = 30
    weight: float = 0.7  # differential weight F
    crossover: float = 0.9  # crossover rate CR
    max_generations: int = 200
    stagnation_patience: int = 30
    stagnation_eps: float = 1e-12
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population < 4:
            raise ParameterError("population must be at least 4")
        if not 0.0 < self.weight < 2.0:
            raise ParameterError("differential weight must be in (0, 2)")
        if not 0.0 <= self.crossover <= 1.0:
            raise ParameterError("crossover rate must be in [0, 1]")


def de_cost(
    p: tuple[float, float],
    f_obs: np.ndarray,
    s_hat: SlownessModel,
    sensors: SensorArray,
) -> float:
    """Squared residual between the observed and the predicted TDoA feature."""
    config = s_hat.config
    if not config.contains(p[0], p[1]):
        raise OutOfFieldError(f"candidate position {p} outside field")
    times = propagation_times(assemble_event_matrix(p, sensors, config), s_hat)
    residual = np.asarray(f_obs, dtype=float) - tdoa_from_times(times)
    return float(residual @ residual)


def de_localize(
    f_obs: np.ndarray,
    s_hat: SlownessModel,
    sensors: SensorArray,
    cfg: DeConfig = DeConfig(),
) -> tuple[tuple[float, float], int, float]:
    """Best cell center, its grid cell, and the final cost."""
    config = s_hat.config
    rng = np.random.default_rng(cfg.seed)
    lo = np.zeros(2)
    hi = np.array([config.width_km, config.height_km])

    cell_costs: dict[int, float] = {}

    def cost_at(p) -> float:
        cell = cell_of((float(p[0]), float(p[1])), config)
        cached = cell_costs.get(cell)
        if cached is None:
            cached = de_cost(config.cell_center(cell), f_obs, s_hat, sensors)
            cell_costs[cell] = cached
        return cached

    pop = rng.uniform(lo, hi, size=(cfg.population, 2))
    costs = np.array([cost_at(p) for p in pop])
    best = int(np.argmin(costs))
    best_cost = costs[best]
    stale = 0
    for _gen in range(cfg.max_generations):
        for i in range(cfg.population):
            r1, r2, r3 = _distinct_indices(rng, cfg.population, i)
            mutant = pop[r1] + cfg.weight * (pop[r2] - pop[r3])
            np.clip(mutant, lo, hi, out=mutant)
            cross = rng.random(2) < cfg.crossover
            cross[rng.integers(2)] = True  # at least one mutated coordinate
            trial = np.where(cross, mutant, pop[i])
            trial_cost = cost_at(trial)
            if trial_cost <= costs[i]:
                pop[i] = trial
                costs[i] = trial_cost
        gen_best = int(np.argmin(costs))
        if costs[gen_best] < best_cost - cfg.stagnation_eps:
            best, best_cost = gen_best, costs[gen_best]
            stale = 0
        else:
            if costs[gen_best] < best_cost:
                best, best_cost = gen_best, costs[gen_best]
            stale += 1
            if stale >= cfg.stagnation_patience:
                break

    cell = cell_of((float(pop[best, 0]), float(pop[best, 1])), config)
    return config.cell_center(cell), cell, float(best_cost)


def _distinct_indices(rng: np.random.Generator, n: int, exclude: int):
    picks = []
    while len(picks) < 3:
        r = int(rng.integers(n))
        if r != exclude and r not in picks:
            picks.append(r)
    return picks


def localization_error(predicted, true_src) -> float:
    """Euclidean distance (km) between a predicted point and the true source."""
    dx = float(predicted[0]) - float(true_src[0])
    dy = float(predicted[1]) - float(true_src[1])
    return float(np.hypot(dx, dy))


def cell_center_error(cell: int, true_src, config: FieldConfig) -> float:
    """Localization error of a grid-granular answer, via the cell center."""
    return localization_error(config.cell_center(cell), true_src)
