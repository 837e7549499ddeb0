"""Tournament-based steady-state genetic search plus post-hoc analyses.

The loop keeps a fixed-size population of evaluated candidates. Each step
selects two parents by tournament, produces a child by uniform crossover
(or clones the fitter parent), mutates it, evaluates it, and inserts it in
place of the current lowest-fitness member. Every evaluation, including
failed ones, is appended to the run history; the analyses (Pareto front,
fitness trace, cumulative Pareto fraction) work off that history.
"""

from __future__ import annotations

import bisect
import random
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .arch_model import instantiate
from .evaluator import BackendError
from .fitness import Constraints, EvalMetrics, FitnessWeights, fitness
from .resources import ResourceEstimate, estimate
from .search_space import (
    ALPHAS,
    COLORS,
    DEPTH_LIMITS,
    RESOLUTIONS,
    Candidate,
    DataConfig,
    ModelConfig,
    random_candidate,
    repair_depths,
)


@dataclass(frozen=True)
class EvaluatedCandidate:
    """One history entry: a candidate with its metrics, resources, and fitness.

    ``metrics`` and ``fitness_value`` are ``None`` when the evaluation
    failed; ``error`` then carries the reason.
    """

    candidate: Candidate
    metrics: EvalMetrics | None
    estimate: ResourceEstimate
    fitness_value: float | None
    eval_index: int
    wall_time: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SearchConfig:
    constraints: Constraints
    population_size: int = 25
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.15
    max_evaluations: int | None = None
    max_seconds: float | None = None
    seed: int = 0
    weights: FitnessWeights = field(default_factory=FitnessWeights)
    evaluator: str = "surrogate"
    fixed_resolution: int | None = None
    fixed_color: str | None = None

    def __post_init__(self) -> None:
        if not self.population_size >= self.tournament_size >= 2:
            raise ValueError("need population_size >= tournament_size >= 2")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.max_evaluations is None and self.max_seconds is None:
            raise ValueError("set a budget: max_evaluations and/or max_seconds")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")
        if self.fixed_resolution is not None and self.fixed_resolution not in RESOLUTIONS:
            raise ValueError(f"fixed_resolution {self.fixed_resolution} not one of {RESOLUTIONS}")
        if self.fixed_color is not None and self.fixed_color not in COLORS:
            raise ValueError(f"fixed_color {self.fixed_color!r} not one of {COLORS}")


@dataclass
class SearchHistory:
    records: list[EvaluatedCandidate]
    config: SearchConfig
    started_at: float  # unix time


def tournament_select(
    population: Sequence[EvaluatedCandidate],
    tournament_size: int,
    rng: random.Random,
) -> EvaluatedCandidate:
    """Best-of-k selection; ties go to the older (lower eval_index) member."""
    if not population:
        raise ValueError("tournament over an empty population")
    if tournament_size > len(population):
        raise ValueError(
            f"tournament_size {tournament_size} exceeds population size {len(population)}"
        )
    contestants = rng.sample(list(population), tournament_size)
    return max(contestants, key=lambda member: (member.fitness_value, -member.eval_index))


def crossover(a: Candidate, b: Candidate, rng: random.Random) -> Candidate:
    """Uniform gene-wise crossover with suffix-zero repair of the depth tuple."""
    pick = lambda x, y: x if rng.random() < 0.5 else y
    resolution = pick(a.data.resolution, b.data.resolution)
    color = pick(a.data.color, b.data.color)
    depths = tuple(pick(da, db) for da, db in zip(a.model.depths, b.model.depths))
    alpha = pick(a.model.alpha, b.model.alpha)
    return Candidate(DataConfig(resolution, color), ModelConfig(repair_depths(depths), alpha))


def _step_or_jump(ordered: Sequence, value, rng: random.Random):
    """Half the time move to a neighbor in the ordered set, else jump elsewhere."""
    index = ordered.index(value)
    neighbors = [i for i in (index - 1, index + 1) if 0 <= i < len(ordered)]
    if rng.random() < 0.5:
        return ordered[rng.choice(neighbors)]
    # Far jumps exclude the immediate neighbors so local and global moves
    # stay distinct; landing back on the current value is allowed.
    return ordered[rng.choice([i for i in range(len(ordered)) if i not in neighbors])]


def mutate(
    candidate: Candidate,
    mutation_rate: float,
    rng: random.Random,
    *,
    freeze_resolution: bool = False,
    freeze_color: bool = False,
) -> Candidate:
    """Resample each gene independently with probability ``mutation_rate``."""
    resolution = candidate.data.resolution
    color = candidate.data.color
    depths = list(candidate.model.depths)
    alpha = candidate.model.alpha
    if not freeze_resolution and rng.random() < mutation_rate:
        resolution = _step_or_jump(RESOLUTIONS, resolution, rng)
    if not freeze_color and rng.random() < mutation_rate:
        color = rng.choice(COLORS)
    for i, limit in enumerate(DEPTH_LIMITS):
        if rng.random() < mutation_rate:
            depths[i] = rng.randint(0, limit)
    if rng.random() < mutation_rate:
        alpha = _step_or_jump(ALPHAS, alpha, rng)
    return Candidate(
        DataConfig(resolution, color),
        ModelConfig(repair_depths(tuple(depths)), alpha),
    )


def run_search(
    config: SearchConfig,
    evaluate: Callable[[Candidate], EvalMetrics],
    *,
    on_record: Callable[[EvaluatedCandidate], None] | None = None,
) -> SearchHistory:
    """Run the genetic search until the budget is exhausted.

    ``evaluate`` raises a :class:`~datanas.evaluator.BackendError` to
    signal a failed evaluation; the failure is logged to the history but
    the candidate is not inserted into the population. If failures leave
    the population too small to hold a tournament, fresh random candidates
    are sampled instead of breeding.
    """
    rng = random.Random(config.seed)
    started_at = time.time()
    t0 = time.monotonic()
    records: list[EvaluatedCandidate] = []
    population: list[EvaluatedCandidate] = []
    history = SearchHistory(records, config, started_at)

    def budget_left() -> bool:
        if config.max_evaluations is not None and len(records) >= config.max_evaluations:
            return False
        if config.max_seconds is not None and time.monotonic() - t0 >= config.max_seconds:
            return False
        return True

    def run_one(candidate: Candidate) -> EvaluatedCandidate:
        resources = estimate(instantiate(candidate))
        try:
            metrics = evaluate(candidate)
        except BackendError as exc:
            record = EvaluatedCandidate(
                candidate, None, resources, None,
                len(records), time.monotonic() - t0, error=str(exc),
            )
        else:
            score = fitness(metrics, resources, config.constraints, config.weights)
            record = EvaluatedCandidate(
                candidate, metrics, resources, score, len(records), time.monotonic() - t0,
            )
        records.append(record)
        if on_record is not None:
            on_record(record)
        return record

    def fresh(uid: int) -> Candidate:
        return random_candidate(
            rng,
            fixed_resolution=config.fixed_resolution,
            fixed_color=config.fixed_color,
            uid=uid,
        )

    for _ in range(config.population_size):
        if not budget_left():
            break
        record = run_one(fresh(uid=len(records)))
        if record.ok:
            population.append(record)

    while budget_left():
        if len(population) < config.tournament_size:
            child = fresh(uid=len(records))
        else:
            parent_a = tournament_select(population, config.tournament_size, rng)
            parent_b = tournament_select(population, config.tournament_size, rng)
            if rng.random() < config.crossover_rate:
                child = crossover(parent_a.candidate, parent_b.candidate, rng)
            else:
                fitter = max(
                    (parent_a, parent_b),
                    key=lambda member: (member.fitness_value, -member.eval_index),
                )
                child = fitter.candidate
            child = mutate(
                child,
                config.mutation_rate,
                rng,
                freeze_resolution=config.fixed_resolution is not None,
                freeze_color=config.fixed_color is not None,
            )
            child = replace(child, uid=len(records))
        record = run_one(child)
        if record.ok:
            if len(population) < config.population_size:
                population.append(record)
            else:
                weakest = min(
                    range(len(population)),
                    key=lambda i: (population[i].fitness_value, population[i].eval_index),
                )
                population[weakest] = record
    return history


class _Skyline:
    """Minima of (ram, flash) pairs seen so far.

    Invariant: rams strictly increasing, flashes strictly decreasing, so
    the cheapest flash among all points with ram <= R sits right before
    bisect's insertion point.
    """

    def __init__(self) -> None:
        self.rams: list[int] = []
        self.flashes: list[int] = []

    def covers(self, ram: int, flash: int) -> bool:
        """Does any recorded point satisfy ram' <= ram and flash' <= flash?"""
        i = bisect.bisect_right(self.rams, ram)
        return i > 0 and self.flashes[i - 1] <= flash

    def add(self, ram: int, flash: int) -> None:
        i = bisect.bisect_left(self.rams, ram)
        if i > 0 and self.flashes[i - 1] <= flash:
            return  # already covered by a cheaper point
        if i < len(self.rams) and self.rams[i] == ram:
            if self.flashes[i] <= flash:
                return
            self.flashes[i] = flash
        else:
            self.rams.insert(i, ram)
            self.flashes.insert(i, flash)
        j = i + 1
        k = j
        while k < len(self.rams) and self.flashes[k] >= flash:
            k += 1
        del self.rams[j:k]
        del self.flashes[j:k]


def pareto_front(records: Sequence[EvaluatedCandidate]) -> list[EvaluatedCandidate]:
    """Non-dominated successful records, in evaluation order.

    Dominance: at least as accurate, no more RAM, no more flash, strictly
    better somewhere. Records are processed in accuracy-descending groups;
    a record is dominated either by the (ram, flash) skyline of strictly
    more accurate records, or by an equal-accuracy record that is strictly
    cheaper on one resource and no worse on the other. Runs in O(n log n)
    instead of comparing all pairs, which matters for long histories.
    """
    ok = [r for r in records if r.ok]
    ordered = sorted(
        ok,
        key=lambda r: (-r.metrics.accuracy, r.estimate.ram_bytes, r.estimate.flash_bytes),
    )
    front: list[EvaluatedCandidate] = []
    skyline = _Skyline()
    start = 0
    while start < len(ordered):
        stop = start
        accuracy = ordered[start].metrics.accuracy
        while stop < len(ordered) and ordered[stop].metrics.accuracy == accuracy:
            stop += 1
        group = ordered[start:stop]

        # Within the group (sorted by ram then flash ascending), track the
        # cheapest flash at strictly lower ram and the cheapest flash of
        # the current equal-ram run; either one, if <= (respectively <)
        # this record's flash, witnesses an equal-accuracy dominator.
        best_flash_below: int | None = None
        run_ram: int | None = None
        run_min_flash = 0
        for record in group:
            ram = record.estimate.ram_bytes
            flash = record.estimate.flash_bytes
            if ram != run_ram:
                if run_ram is not None:
                    best_flash_below = (
                        run_min_flash
                        if best_flash_below is None
                        else min(best_flash_below, run_min_flash)
                    )
                run_ram = ram
                run_min_flash = flash
            dominated = (
                skyline.covers(ram, flash)
                or (best_flash_below is not None and best_flash_below <= flash)
                or flash > run_min_flash
            )
            if not dominated:
                front.append(record)
        for record in group:
            skyline.add(record.estimate.ram_bytes, record.estimate.flash_bytes)
        start = stop
    front.sort(key=lambda r: r.eval_index)
    return front


def cumulative_pareto_fraction(
    records: Sequence[EvaluatedCandidate],
) -> list[tuple[int, float]]:
    """Fraction of the final Pareto front discovered by each evaluation index."""
    front = pareto_front(records)
    if not front:
        return []
    front_indices = sorted(r.eval_index for r in front)
    series = []
    found = 0
    for record in records:
        while found < len(front_indices) and front_indices[found] <= record.eval_index:
            found += 1
        series.append((record.eval_index, found / len(front_indices)))
    return series


def fitness_evolution(
    records: Sequence[EvaluatedCandidate],
    window: int = 25,
) -> list[tuple[int, float]]:
    """Trailing-window mean fitness over successful evaluations."""
    if window < 1:
        raise ValueError("window must be >= 1")
    ok = [r for r in records if r.ok]
    series = []
    for i, record in enumerate(ok):
        chunk = ok[max(0, i - window + 1) : i + 1]
        series.append((record.eval_index, sum(r.fitness_value for r in chunk) / len(chunk)))
    return series
