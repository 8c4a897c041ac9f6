"""Two-objective NSGA-II over binary feature-subset chromosomes.

Objectives, both minimized: the negated permutation merit of the subset,
and its cardinality. Each individual's merit is evaluated once at
creation from a stream derived from (seed, generation, index) and cached,
so results are identical under any evaluation schedule.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import learner as learner_mod
from .dataset import Dataset, Partition, Task
from .errors import PermselError
from .learner import LearnerSpec
from .metrics import Metric
from .permutation import EvalContext, merit


@dataclass(frozen=True)
class MoeaConfig:
    population_size: int = 50
    generations: int = 2000
    crossover_prob: float = 1.0
    mutation_prob: float = 0.02
    seed: int = 0
    variant: str = "v1"
    init_prob: float | None = None  # None: min(0.5, 100 / n_features)

    def validate(self):
        if self.population_size < 4 or self.population_size % 2 != 0:
            raise PermselError("population_size must be even and >= 4")
        if not (0.0 <= self.crossover_prob <= 1.0):
            raise PermselError("crossover_prob must be in [0, 1]")
        if not (0.0 <= self.mutation_prob <= 1.0):
            raise PermselError("mutation_prob must be in [0, 1]")
        if self.generations < 0:
            raise PermselError("generations must be nonnegative")
        if self.variant not in ("v1", "v2"):
            raise PermselError("variant must be 'v1' or 'v2'")
        if self.init_prob is not None and not (0.0 <= self.init_prob <= 1.0):
            raise PermselError("init_prob must be in [0, 1]")


class Individual:
    """Chromosome plus cached minimization objectives (-merit, cardinality)."""

    __slots__ = ("bits", "objectives", "rank", "crowding")

    def __init__(self, bits: np.ndarray, merit_value: float):
        self.bits = bits
        self.objectives = (-merit_value, float(int(bits.sum())))
        self.rank = 0
        self.crowding = 0.0

    @property
    def merit(self) -> float:
        return -self.objectives[0]

    @property
    def cardinality(self) -> int:
        return int(self.objectives[1])


@dataclass
class RunTrace:
    """Everything a single evolutionary run produced."""

    hypervolume: list[float]
    front: list[Individual]
    best: Individual
    wall_time_seconds: float
    seed: int
    variant: str
    config: MoeaConfig
    metric_range: float = 1.0
    best_merit_history: list[float] = field(default_factory=list)

    def selected_features(self) -> np.ndarray:
        return np.flatnonzero(self.best.bits)

    def to_json_dict(self) -> dict:
        front_sorted = sorted(self.front,
                              key=lambda ind: (ind.objectives[0], ind.objectives[1]))
        return {
            "seed": self.seed,
            "variant": self.variant,
            "config": {
                "population_size": self.config.population_size,
                "generations": self.config.generations,
                "crossover_prob": self.config.crossover_prob,
                "mutation_prob": self.config.mutation_prob,
                "init_prob": self.config.init_prob,
            },
            "metric_range": self.metric_range,
            "hypervolume": list(self.hypervolume),
            "front": [[ind.merit, ind.cardinality, chromosome_to_hex(ind.bits)]
                      for ind in front_sorted],
            "best": {
                "merit": self.best.merit,
                "cardinality": self.best.cardinality,
                "chromosome_hex": chromosome_to_hex(self.best.bits),
            },
            "wall_time_seconds": self.wall_time_seconds,
        }


def chromosome_to_hex(bits: np.ndarray) -> str:
    """Pack a bit vector into hex (bit i = feature i, MSB-first per byte)."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes().hex()


def hex_to_chromosome(text: str, width: int) -> np.ndarray:
    raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
    return np.unpackbits(raw)[:width]


def dominates(a, b) -> bool:
    """True iff a is no worse in every objective and better in at least one."""
    if len(a) != len(b):
        raise PermselError("objective vectors must have equal arity")
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def fast_nondominated_sort(objectives) -> list[list[int]]:
    """Partition objective vectors into Pareto fronts (indices, best first)."""
    n = len(objectives)
    if n == 0:
        raise PermselError("empty population")
    dominated_by = [[] for _ in range(n)]
    n_dominators = [0] * n
    fronts: list[list[int]] = [[]]
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(objectives[i], objectives[j]):
                dominated_by[i].append(j)
                n_dominators[j] += 1
            elif dominates(objectives[j], objectives[i]):
                dominated_by[j].append(i)
                n_dominators[i] += 1
    for i in range(n):
        if n_dominators[i] == 0:
            fronts[0].append(i)
    k = 0
    while fronts[k]:
        nxt = []
        for i in fronts[k]:
            for j in dominated_by[i]:
                n_dominators[j] -= 1
                if n_dominators[j] == 0:
                    nxt.append(j)
        k += 1
        fronts.append(nxt)
    fronts.pop()
    return fronts


def crowding_distance(front_objectives) -> np.ndarray:
    """Crowding distances for one front of objective vectors.

    Boundary points per objective get +inf; interior points sum the
    range-normalized gap between their neighbors over the objectives.
    """
    objs = np.asarray(front_objectives, dtype=float)
    n = objs.shape[0]
    if n == 0:
        raise PermselError("empty front")
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for m in range(objs.shape[1]):
        vals = objs[:, m]
        order = np.argsort(vals, kind="stable")
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = vals[order[-1]] - vals[order[0]]
        if span <= 0:
            continue
        gaps = (vals[order[2:]] - vals[order[:-2]]) / span
        dist[order[1:-1]] += gaps
    return dist


def hux_crossover(p1: np.ndarray, p2: np.ndarray,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Half-uniform crossover: swap exactly floor(H/2) of the differing bits."""
    if p1.shape != p2.shape:
        raise PermselError("parents must have equal length")
    c1, c2 = p1.copy(), p2.copy()
    diff = np.flatnonzero(p1 != p2)
    k = diff.size // 2
    if k > 0:
        swap = rng.choice(diff, size=k, replace=False)
        c1[swap] = p2[swap]
        c2[swap] = p1[swap]
    return c1, c2


def bit_flip_mutation(bits: np.ndarray, prob: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Flip each bit independently with the given probability."""
    if not (0.0 <= prob <= 1.0):
        raise PermselError("mutation probability must be in [0, 1]")
    flips = rng.random(bits.shape[0]) < prob
    return np.bitwise_xor(bits, flips.astype(np.uint8))


def initialize(n_features: int, cfg: MoeaConfig,
               rng: np.random.Generator) -> list[np.ndarray]:
    """Seeded initial chromosomes, each bit set with the configured bias.

    The default bias min(0.5, 100 / n_features) keeps initial subsets
    small when the feature space is large.
    """
    if n_features < 1:
        raise PermselError("need at least one feature")
    p = cfg.init_prob if cfg.init_prob is not None else min(0.5, 100.0 / n_features)
    mat = (rng.random((cfg.population_size, n_features)) < p).astype(np.uint8)
    return [mat[i] for i in range(cfg.population_size)]


def hypervolume_2d(front_objectives, reference) -> float:
    """Exact area dominated by the points, bounded by the reference.

    Minimization convention: every point must be componentwise <= the
    reference. The area is accumulated as disjoint rectangles after
    sorting on the first objective.
    """
    pts = np.asarray(front_objectives, dtype=float).reshape(-1, 2)
    ref_x, ref_y = float(reference[0]), float(reference[1])
    if pts.shape[0] == 0:
        return 0.0
    if np.any(pts[:, 0] > ref_x) or np.any(pts[:, 1] > ref_y):
        raise PermselError("point beyond the reference")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    hv = 0.0
    y_prev = ref_y
    for x, y in pts[order]:
        if y < y_prev:
            hv += (ref_x - x) * (y_prev - y)
            y_prev = y
    return hv


def select_final(front: list[Individual]) -> Individual:
    """Front member with the best merit.

    Ties go to the smaller cardinality and then to the lexicographically
    smaller chromosome.
    """
    if not front:
        raise PermselError("empty front")
    return min(front, key=lambda ind: (ind.objectives[0], ind.objectives[1],
                                       tuple(ind.bits.tolist())))


def _tournament(pop: list[Individual], rng: np.random.Generator) -> Individual:
    i, j = rng.integers(0, len(pop), size=2)
    a, b = pop[int(i)], pop[int(j)]
    if (a.rank, -a.crowding) <= (b.rank, -b.crowding):
        return a
    return b


def _assign_ranks_and_crowding(pop: list[Individual]) -> list[list[int]]:
    objs = [ind.objectives for ind in pop]
    fronts = fast_nondominated_sort(objs)
    for rank, front in enumerate(fronts):
        dist = crowding_distance([objs[i] for i in front])
        for pos, i in enumerate(front):
            pop[i].rank = rank
            pop[i].crowding = float(dist[pos])
    return fronts


def _environmental_selection(pool: list[Individual], mu: int) -> list[Individual]:
    fronts = _assign_ranks_and_crowding(pool)
    survivors: list[Individual] = []
    for front in fronts:
        if len(survivors) + len(front) <= mu:
            survivors.extend(pool[i] for i in front)
            continue
        need = mu - len(survivors)
        # fill by crowding; break crowding ties toward better objectives so
        # the best-merit member of a crowded front is never dropped
        members = sorted((pool[i] for i in front),
                         key=lambda ind: (-ind.crowding, ind.objectives[0],
                                          ind.objectives[1]))
        survivors.extend(members[:need])
        break
    return survivors


def _normalized_front_hv(pop: list[Individual], metric_range: float,
                         n_features: int) -> float:
    pts = [(max(-1.0, ind.objectives[0] / metric_range),
            min(1.0, ind.objectives[1] / (n_features + 1)))
           for ind in pop if ind.rank == 0]
    return hypervolume_2d(pts, (0.0, 1.0))


def evolve_on_context(ctx: EvalContext, cfg: MoeaConfig) -> RunTrace:
    """Run the generational loop against a prepared evaluation context."""
    cfg.validate()
    t0 = time.perf_counter()
    w = ctx.n_features
    mu = cfg.population_size
    metric_range = ctx.metric_range()

    init_rng = np.random.default_rng([cfg.seed, 0])
    chromosomes = initialize(w, cfg, init_rng)
    pop = [Individual(bits, merit(ctx, bits, np.random.default_rng([cfg.seed, 1, 0, i])))
           for i, bits in enumerate(chromosomes)]
    _assign_ranks_and_crowding(pop)
    hv_history = [_normalized_front_hv(pop, metric_range, w)]
    best_history = [max(ind.merit for ind in pop)]

    for gen in range(1, cfg.generations + 1):
        var_rng = np.random.default_rng([cfg.seed, 2, gen])
        child_bits: list[np.ndarray] = []
        while len(child_bits) < mu:
            pa = _tournament(pop, var_rng)
            pb = _tournament(pop, var_rng)
            if var_rng.random() < cfg.crossover_prob:
                c1, c2 = hux_crossover(pa.bits, pb.bits, var_rng)
            else:
                c1, c2 = pa.bits.copy(), pb.bits.copy()
            child_bits.append(bit_flip_mutation(c1, cfg.mutation_prob, var_rng))
            child_bits.append(bit_flip_mutation(c2, cfg.mutation_prob, var_rng))
        offspring = [
            Individual(bits, merit(ctx, bits,
                                   np.random.default_rng([cfg.seed, 1, gen, i])))
            for i, bits in enumerate(child_bits)
        ]
        pop = _environmental_selection(pop + offspring, mu)
        hv_history.append(_normalized_front_hv(pop, metric_range, w))
        best_history.append(max(ind.merit for ind in pop))

    front = [ind for ind in pop if ind.rank == 0]
    best = select_final(front)
    return RunTrace(
        hypervolume=hv_history,
        front=front,
        best=best,
        wall_time_seconds=time.perf_counter() - t0,
        seed=cfg.seed,
        variant=cfg.variant,
        config=cfg,
        metric_range=metric_range,
        best_merit_history=best_history,
    )


def evolve(dataset: Dataset, partition: Partition, learner_spec: LearnerSpec,
           cfg: MoeaConfig) -> RunTrace:
    """Train the baseline model for the configured variant and search.

    Variant v1 trains on the train rows and scores merit on the held-out
    validation rows; v2 trains and scores on the merged train+validation
    rows. The test rows are never touched.
    """
    cfg.validate()
    if cfg.variant == "v1":
        train_rows = dataset.rows(partition.train_idx)
        eval_rows = dataset.rows(partition.val_idx)
    else:
        merged = partition.train_val_idx
        train_rows = dataset.rows(merged)
        eval_rows = dataset.rows(merged)
    model = learner_mod.fit(learner_spec, train_rows)
    metric = Metric.ACC if dataset.task is Task.CLASSIFICATION else Metric.RMSE
    ctx = EvalContext(model, eval_rows, metric)
    return evolve_on_context(ctx, cfg)
