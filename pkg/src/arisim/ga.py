"""Genetic optimization of the surface phase shifts.

Maximizes the closed-form sum rate over the N phase angles, which is cheap
and deterministic, so the search never pays for Monte Carlo averaging.
The population evolves under elitism (the best individuals survive
unchanged, making the best-ever fitness monotone), fitness-proportional
parent selection among the non-elites, per-gene uniform crossover, and
Gaussian mutation of the leftover individuals.  Iteration stops at the
generation cap or once the mean fitness has stopped moving.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analytic import closed_form_rates, compute_stats
from .budget import ConfigurationError, LinkBudget, SystemConfig
from .channel import Geometry
from .transceiver import PhaseConfig

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GAParams:
    """Population structure and termination settings.

    Every generation is rebuilt as n_elite survivors + n_crossover
    offspring + n_mutation mutants, so the three must sum to n_total.
    Parents are drawn from the non-elites; mutants from the individuals
    that are neither elites nor parents.
    """

    n_total: int = 200
    n_elite: int = 20
    n_parents: int = 40
    n_crossover: int = 144
    n_mutation: int = 36
    mutation_sigma: float = np.pi / 8.0  # radians
    max_iters: int = 100
    f_tol: float = 1e-4                  # mean-fitness change threshold, bits
    window: int = 10                     # generations averaged for the f_tol test
    seed: int = 0

    def __post_init__(self):
        if self.n_elite < 1:
            raise ConfigurationError("at least one elite is required")
        if self.n_elite + self.n_crossover + self.n_mutation != self.n_total:
            raise ConfigurationError(
                f"elites + crossover + mutation offspring must equal the population "
                f"({self.n_elite}+{self.n_crossover}+{self.n_mutation} != {self.n_total})"
            )
        if self.n_parents < 2 or self.n_elite + self.n_parents > self.n_total:
            raise ConfigurationError("parent count must fit among the non-elites")
        if self.n_mutation > 0 and self.n_elite + self.n_parents >= self.n_total:
            raise ConfigurationError("mutation needs at least one non-elite non-parent individual")
        if self.mutation_sigma <= 0.0:
            raise ConfigurationError("mutation_sigma must be positive")
        if self.max_iters < 1 or self.window < 1:
            raise ConfigurationError("max_iters and window must be positive")


@dataclass
class GAHistory:
    """Per-generation trace of the search."""

    best_fitness: list = field(default_factory=list)
    mean_fitness: list = field(default_factory=list)
    best_theta: list = field(default_factory=list)

    @property
    def generations(self) -> int:
        return len(self.best_fitness)

    def rows(self):
        """(generation, best, mean) tuples, e.g. for CSV export."""
        return [
            (g, self.best_fitness[g], self.mean_fitness[g])
            for g in range(self.generations)
        ]


def crossover(parent_a: np.ndarray, parent_b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Per-gene uniform choice between the two parents."""
    mask = rng.random(parent_a.shape[0]) < 0.5
    return np.where(mask, parent_a, parent_b)


def mutate(theta: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add zero-mean Gaussian noise to every gene, reduced modulo 2*pi."""
    return np.mod(theta + rng.normal(0.0, sigma, theta.shape[0]), TWO_PI)


def _roulette(indices: np.ndarray, weights: np.ndarray, count: int, rng) -> np.ndarray:
    """Fitness-proportional selection without replacement; strictly positive
    weights are guaranteed by shifting, so degenerate fitness falls back to
    a nearly uniform draw."""
    w = weights - weights.min() + 1e-12
    return rng.choice(indices, size=count, replace=False, p=w / w.sum())


def optimize_phases(
    geom: Geometry,
    cfg: SystemConfig,
    budget: LinkBudget,
    params: GAParams,
    fitness=None,
) -> tuple[PhaseConfig, GAHistory]:
    """Run the genetic search and return the best phases ever seen.

    `fitness` maps a phase vector (N,) to a scalar; by default it is the
    closed-form sum rate for the budget's operating mode.  The surface must
    be started up, otherwise every candidate scores zero and there is
    nothing to optimize.
    """
    if not budget.startup_met:
        raise ConfigurationError("cannot optimize a surface that does not start up")

    if fitness is None:
        def fitness(theta):
            stats = compute_stats(geom, cfg, PhaseConfig(theta))
            return float(closed_form_rates(stats, budget, cfg).sum())

    rng = np.random.default_rng(np.random.SeedSequence(params.seed))
    pop = rng.uniform(0.0, TWO_PI, (params.n_total, cfg.N))
    fit = np.array([fitness(t) for t in pop])

    history = GAHistory()
    best_idx = int(np.argmax(fit))
    best_theta = pop[best_idx].copy()
    best_fit = float(fit[best_idx])

    def record():
        history.best_fitness.append(best_fit)
        history.mean_fitness.append(float(fit.mean()))
        history.best_theta.append(best_theta.copy())

    record()
    for _ in range(params.max_iters):
        order = np.argsort(-fit, kind="stable")
        elites = pop[order[: params.n_elite]]
        non_elite = order[params.n_elite :]

        parent_idx = _roulette(non_elite, fit[non_elite], params.n_parents, rng)
        parents = pop[parent_idx]
        children = np.empty((params.n_crossover, cfg.N))
        for c in range(params.n_crossover):
            a, b = rng.integers(0, params.n_parents, 2)
            children[c] = crossover(parents[a], parents[b], rng)

        if params.n_mutation > 0:
            leftover = np.setdiff1d(non_elite, parent_idx)
            pick = rng.choice(leftover, size=params.n_mutation,
                              replace=len(leftover) < params.n_mutation)
            mutants = np.array([mutate(pop[j], params.mutation_sigma, rng) for j in pick])
        else:
            mutants = np.empty((0, cfg.N))

        pop = np.concatenate([elites, children, mutants])
        fit = np.array([fitness(t) for t in pop])

        gen_best = int(np.argmax(fit))
        if fit[gen_best] > best_fit:
            best_fit = float(fit[gen_best])
            best_theta = pop[gen_best].copy()
        record()

        if history.generations > params.window:
            deltas = np.abs(np.diff(history.mean_fitness[-(params.window + 1):]))
            if deltas.mean() < params.f_tol:
                break

    return PhaseConfig(best_theta), history
