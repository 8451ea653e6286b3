"""Differential-evolution search for weight sets.

Classic rand/1/bin: per target, mutant = x_r1 + F*(x_r2 - x_r3) over three
distinct random population members, binomial crossover with probability CR
(one coordinate always taken from the mutant), feasibility repair, then
greedy one-to-one selection.  The objective is the density-evolution BER
at the configured (d_c, R, snr) point.  The objective is a Monte-Carlo
estimate, so each generation evaluates the surviving targets and their
trials under one shared seed: comparisons are paired on common random
numbers rather than taken across generations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import run_de
from .errors import InvalidCandidateError, InvalidConfigurationError
from .weights import WeightSet

WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    d_c: int
    r_afc: float
    snr: float
    population: int = 50
    crossover: float = 1.0
    mutation: float = 0.85
    generations: int = 100
    de_iters: int = 100           # density-evolution rounds per fitness evaluation
    de_samples: int = 1000        # Monte-Carlo samples per density
    stall_generations: int = 20   # stop after this many generations without
    stall_rel_improvement: float = 0.01  # ...this much relative improvement

    def __post_init__(self):
        if self.population < 4:
            raise InvalidConfigurationError("population must be at least 4")
        if not 0.0 <= self.crossover <= 1.0:
            raise InvalidConfigurationError("crossover probability must be in [0, 1]")
        if not 0.0 < self.mutation <= 2.0:
            raise InvalidConfigurationError("mutation factor must be in (0, 2]")
        if self.d_c < 1 or self.r_afc <= 0 or self.snr <= 0:
            raise InvalidConfigurationError("invalid objective parameters")


@dataclass
class Candidate:
    raw: np.ndarray
    fitness: float = math.inf

    def weight_set(self) -> WeightSet:
        return repair(self.raw)


@dataclass(frozen=True)
class OptimizeResult:
    best: WeightSet
    ber: float
    history: list[float]
    generations_run: int
    evaluations: int


def repair(raw) -> WeightSet:
    """Project a raw vector onto the feasible set: positive coordinates
    (absolute value, floored at 1e-6) scaled to unit power."""
    x = np.abs(np.asarray(raw, dtype=np.float64))
    if not np.isfinite(x).all() or x.max() == 0.0:
        raise InvalidCandidateError("cannot repair a degenerate candidate")
    x = np.maximum(x, WEIGHT_FLOOR)
    x /= math.sqrt(float(np.dot(x, x)))
    return WeightSet(tuple(x))


def evaluate_weights(w: WeightSet, cfg: OptimizerConfig, rng_seed) -> float:
    """Fitness of one weight set: DE-predicted BER at the configured point."""
    return run_de(w, cfg.r_afc, cfg.snr, iters=cfg.de_iters,
                  samples=cfg.de_samples, rng_seed=rng_seed).ber


def optimize(cfg: OptimizerConfig, rng_seed: int = 0) -> OptimizeResult:
    """Run the search; returns the best repaired weight set, its BER, and
    the per-generation best-fitness history (non-increasing)."""
    master = np.random.SeedSequence(rng_seed)
    init_rng = np.random.default_rng(master.spawn(1)[0])
    gen_seeds = master.spawn(cfg.generations + 1)

    def sample_candidate() -> Candidate:
        for _ in range(100):
            raw = init_rng.uniform(0.0, 1.0, size=cfg.d_c)
            try:
                repair(raw)
            except InvalidCandidateError:
                continue
            return Candidate(raw=raw)
        raise InvalidCandidateError("could not draw a repairable initial candidate")

    pop = [sample_candidate() for _ in range(cfg.population)]
    evaluations = 0
    for cand in pop:
        cand.fitness = evaluate_weights(cand.weight_set(), cfg, gen_seeds[0])
        evaluations += 1

    history = [min(c.fitness for c in pop)]
    best_at_stall_check = history[0]
    stall = 0
    gens_run = 0
    for gen in range(1, cfg.generations + 1):
        gens_run = gen
        seed = gen_seeds[gen]
        rng = np.random.default_rng(seed)
        # Re-evaluate survivors under this generation's seed so that the
        # target/trial comparison is paired.
        for cand in pop:
            cand.fitness = evaluate_weights(cand.weight_set(), cfg, seed)
            evaluations += 1
        new_pop = []
        for i, target in enumerate(pop):
            r1, r2, r3 = _distinct_indices(rng, cfg.population, i)
            mutant = pop[r1].raw + cfg.mutation * (pop[r2].raw - pop[r3].raw)
            trial = target.raw.copy()
            cross = rng.random(cfg.d_c) < cfg.crossover
            cross[rng.integers(cfg.d_c)] = True
            trial[cross] = mutant[cross]
            try:
                trial_ws = repair(trial)
            except InvalidCandidateError:
                new_pop.append(target)
                continue
            trial_fit = evaluate_weights(trial_ws, cfg, seed)
            evaluations += 1
            if trial_fit <= target.fitness:
                new_pop.append(Candidate(raw=trial, fitness=trial_fit))
            else:
                new_pop.append(target)
        pop = new_pop
        history.append(min(min(c.fitness for c in pop), history[-1]))

        if history[-1] < best_at_stall_check * (1.0 - cfg.stall_rel_improvement):
            best_at_stall_check = history[-1]
            stall = 0
        else:
            stall += 1
            if stall >= cfg.stall_generations:
                break

    best = min(pop, key=lambda c: c.fitness)
    return OptimizeResult(best=best.weight_set(), ber=best.fitness,
                          history=history, generations_run=gens_run,
                          evaluations=evaluations)


def _distinct_indices(rng: np.random.Generator, size: int, exclude: int):
    picks: list[int] = []
    while len(picks) < 3:
        j = int(rng.integers(size))
        if j != exclude and j not in picks:
            picks.append(j)
    return picks
