"""
Integer differential evolution over basematrices.

Genomes are real-valued relaxations of the M x N entries. Each trial vector is
rounded to the nearest integer and clipped to {0, ..., S} before its P-EXIT
threshold is evaluated. Infeasible matrices score +inf.
"""

import hashlib
import itertools
import json
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from apps.common.exceptions import BracketError, ConfigurationError, InfeasibilityError
from apps.common.streams import generator_state, restore_generator, stream
from apps.constellation.shaping import MODES, SHAPED, UNIFORM
from apps.pexit.basematrix import Basematrix, default_level_order, is_feasible
from apps.pexit.threshold import threshold
from apps.protopt.lineage import GenerationRecord, LineageLog
from apps.surrogates.matching import SurrogateKind
from constants import PEXIT, PROTOPT

logger = logging.getLogger('protoshape.protopt')


@dataclass(frozen=True)
class SearchSpec:
    """
    Search space and DE parameters.

    ``population_size`` defaults to 10 M N, capped at 60 and at least 4.
    """
    m: int
    code_rate: float
    d_per_level: int
    s_max: int
    snr_bracket: Tuple[float, float]
    surrogate: SurrogateKind = SurrogateKind.BIAWGN
    mode: str = UNIFORM
    population_size: Optional[int] = None
    generations: int = 200
    f_weight: float = PROTOPT['F_WEIGHT']
    crossover_rate: float = PROTOPT['CROSSOVER_RATE']
    rng_seed: int = 0
    level_order: Optional[Tuple[int, ...]] = None
    delta: float = PEXIT['DELTA']
    max_iterations: int = PEXIT['MAX_ITERATIONS']
    resolution_db: float = PEXIT['RESOLUTION_DB']
    scan_step_db: float = PEXIT['SCAN_STEP_DB']

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError(f"m must be >= 1, got {self.m}", 'm')
        if self.d_per_level < 1:
            raise ConfigurationError(f"D must be >= 1, got {self.d_per_level}", 'd_per_level')
        if self.s_max < 1:
            raise ConfigurationError(f"S must be >= 1, got {self.s_max}", 's_max')
        if not 0 < self.code_rate < 1:
            raise ConfigurationError(f"code rate must lie in (0, 1), got {self.code_rate}", 'code_rate')
        checks = self.N * (1 - self.code_rate)
        if abs(checks - round(checks)) > 1e-9 or round(checks) < 1:
            raise ConfigurationError(
                f"N (1 - c) = {checks:.6g} is not a positive integer for N={self.N}", 'code_rate'
            )
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}", 'mode')
        if self.mode == SHAPED and self.m < 2:
            raise ConfigurationError("shaped search needs m >= 2", 'mode')
        if self.population_size is not None and self.population_size < PROTOPT['POPULATION_MIN']:
            raise ConfigurationError(
                f"population must be >= {PROTOPT['POPULATION_MIN']}", 'population_size'
            )
        if not 0 < self.f_weight <= 1:
            raise ConfigurationError("F must lie in (0, 1]", 'f_weight')
        if not 0 <= self.crossover_rate <= 1:
            raise ConfigurationError("CR must lie in [0, 1]", 'crossover_rate')
        if self.generations < 0:
            raise ConfigurationError("generations must be >= 0", 'generations')
        low, high = self.snr_bracket
        if not high > low:
            raise ConfigurationError("SNR bracket must be increasing", 'snr_bracket')
        order = self.level_order or default_level_order(self.m)
        if sorted(order) != list(range(1, self.m + 1)):
            raise ConfigurationError(f"{list(order)} is not a permutation of 1..{self.m}", 'level_order')

    @property
    def N(self) -> int:
        return self.d_per_level * self.m

    @property
    def M(self) -> int:
        return int(round(self.N * (1 - self.code_rate)))

    @property
    def population(self) -> int:
        if self.population_size is not None:
            return int(self.population_size)
        size = min(PROTOPT['POPULATION_PER_ENTRY'] * self.M * self.N, PROTOPT['POPULATION_CAP'])
        return max(size, PROTOPT['POPULATION_MIN'])

    def threshold_options(self) -> dict:
        return {
            'delta': self.delta,
            'max_iterations': self.max_iterations,
            'resolution_db': self.resolution_db,
            'scan_step_db': self.scan_step_db,
        }

    def digest(self) -> str:
        data = asdict(self)
        data['surrogate'] = self.surrogate.value
        return hashlib.sha256(json.dumps(data, sort_keys=True, default=list).encode()).hexdigest()


class ThresholdEvaluator:
    """
    Memoized fitness: the threshold of a candidate in dB, +inf when infeasible
    or when the bracket does not straddle its threshold.

    Safe for concurrent calls; two threads racing on one key compute the same
    value and the first insert wins.
    """

    def __init__(self, spec: SearchSpec):
        self.spec = spec
        self._cache: Dict[bytes, float] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.evaluations = 0

    def _key(self, a: np.ndarray) -> bytes:
        return a.astype(np.int64).tobytes()

    def __call__(self, a: np.ndarray) -> float:
        a = np.asarray(a, dtype=np.int64).reshape(self.spec.M, self.spec.N)
        key = self._key(a)
        with self._lock:
            if key in self._cache:
                self.hits += 1
                return self._cache[key]
        value = self._compute(a)
        with self._lock:
            self.evaluations += 1
            return self._cache.setdefault(key, value)

    def _compute(self, a: np.ndarray) -> float:
        spec = self.spec
        if not is_feasible(a) or a.max() > spec.s_max:
            return math.inf
        base = Basematrix(a, spec.d_per_level, level_order=spec.level_order, s_max=spec.s_max)
        try:
            return threshold(base, spec.m, spec.mode, spec.surrogate, spec.snr_bracket,
                             **spec.threshold_options())
        except BracketError as exc:
            logger.warning("candidate %s scored +inf: %s", a.tolist(), exc)
            return math.inf


def evaluate(a: Union[Basematrix, np.ndarray], spec: SearchSpec,
             evaluator: Optional[ThresholdEvaluator] = None) -> float:
    """Threshold of ``a`` under ``spec``; +inf for infeasible matrices."""
    evaluator = evaluator or ThresholdEvaluator(spec)
    entries = a.a if isinstance(a, Basematrix) else np.asarray(a)
    return evaluator(entries)


@dataclass
class SearchOutcome:
    """Best basematrix of a search with its threshold and trace."""
    basematrix: Basematrix
    threshold_db: float
    history: List[float] = field(default_factory=list)
    evaluations: int = 0
    cache_hits: int = 0
    ranking: List[Tuple[list, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'basematrix': self.basematrix.to_dict(),
            'threshold_db': self.threshold_db,
            'history': [None if math.isinf(v) else v for v in self.history],
            'evaluations': self.evaluations,
            'cache_hits': self.cache_hits,
        }


def _selection_key(fitness: float, a: np.ndarray) -> Tuple[float, int]:
    return fitness, int(a.sum(axis=0).max())


class DifferentialEvolution:
    """
    DE/rand/1/bin with elitist one-to-one selection.

    Trial vectors of a generation are drawn sequentially from one generator
    and evaluated as a batch, so results do not depend on the worker count.
    """

    def __init__(self, spec: SearchSpec, threads: int = 1,
                 lineage: Optional[LineageLog] = None):
        self.spec = spec
        self.threads = max(int(threads), 1)
        self.lineage = lineage
        self.evaluator = ThresholdEvaluator(spec)
        self.rng = stream(spec.rng_seed)

    def to_matrix(self, genome: np.ndarray) -> np.ndarray:
        spec = self.spec
        return np.clip(np.rint(genome), 0, spec.s_max).astype(np.int64).reshape(spec.M, spec.N)

    def _evaluate(self, genomes: np.ndarray) -> np.ndarray:
        matrices = [self.to_matrix(g) for g in genomes]
        if self.threads == 1:
            return np.array([self.evaluator(a) for a in matrices])
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return np.array(list(pool.map(self.evaluator, matrices)))

    def initial_population(self) -> np.ndarray:
        """
        Uniform integer genomes, infeasible members resampled.

        Raises:
            InfeasibilityError: no member is feasible after the resampling budget.
        """
        spec = self.spec
        size, genes = spec.population, spec.M * spec.N
        population = self.rng.integers(0, spec.s_max + 1, size=(size, genes)).astype(float)
        for _ in range(PROTOPT['RESAMPLE_ATTEMPTS']):
            infeasible = [i for i, g in enumerate(population) if not is_feasible(self.to_matrix(g))]
            if not infeasible:
                break
            population[infeasible] = self.rng.integers(0, spec.s_max + 1, size=(len(infeasible), genes))
        if not any(is_feasible(self.to_matrix(g)) for g in population):
            raise InfeasibilityError(
                f"no feasible {spec.M}x{spec.N} basematrix with entries up to {spec.s_max} "
                f"after {PROTOPT['RESAMPLE_ATTEMPTS']} resampling rounds"
            )
        return population

    def trials(self, population: np.ndarray) -> np.ndarray:
        spec = self.spec
        size, genes = population.shape
        trials = np.empty_like(population)
        for i in range(size):
            others = [j for j in range(size) if j != i]
            r1, r2, r3 = self.rng.choice(others, size=3, replace=False)
            mutant = population[r1] + spec.f_weight * (population[r2] - population[r3])
            cross = self.rng.random(genes) < spec.crossover_rate
            cross[self.rng.integers(genes)] = True
            trials[i] = np.where(cross, mutant, population[i])
        return trials

    def _best(self, population: np.ndarray, fitness: np.ndarray) -> int:
        keys = [_selection_key(f, self.to_matrix(g)) for f, g in zip(fitness, population)]
        return min(range(len(keys)), key=keys.__getitem__)

    def _record(self, generation, population, fitness) -> GenerationRecord:
        best = self._best(population, fitness)
        return GenerationRecord(
            generation=generation,
            best_matrix=self.to_matrix(population[best]).tolist(),
            best_threshold_db=float(fitness[best]),
            population=population,
            fitness=fitness,
            rng_state=generator_state(self.rng),
            spec_hash=self.spec.digest(),
        )

    def run(self, resume: bool = False) -> SearchOutcome:
        spec = self.spec
        history: List[float] = []
        start = 1
        resumed = self.lineage.resume_point(spec.digest()) if (resume and self.lineage) else None
        if resumed is not None:
            population, fitness = resumed.population, resumed.fitness
            self.rng = restore_generator(resumed.rng_state)
            history = [r.best_threshold_db for r in self.lineage.records()]
            start = resumed.generation + 1
            logger.info("resuming optimization at generation %d", start)
        else:
            if self.lineage:
                self.lineage.reset()
            population = self.initial_population()
            fitness = self._evaluate(population)
            record = self._record(0, population, fitness)
            history.append(record.best_threshold_db)
            if self.lineage:
                self.lineage.append(record)

        for generation in range(start, spec.generations + 1):
            trials = self.trials(population)
            trial_fitness = self._evaluate(trials)
            for i, (trial, value) in enumerate(zip(trials, trial_fitness)):
                if (_selection_key(value, self.to_matrix(trial))
                        <= _selection_key(fitness[i], self.to_matrix(population[i]))):
                    population[i], fitness[i] = trial, value
            record = self._record(generation, population, fitness)
            history.append(record.best_threshold_db)
            if self.lineage:
                self.lineage.append(record)
            logger.info("generation %d best %.4f dB (%d evaluations, %d cache hits)",
                        generation, record.best_threshold_db, self.evaluator.evaluations,
                        self.evaluator.hits)

        best = self._best(population, fitness)
        if math.isinf(fitness[best]):
            raise InfeasibilityError("no candidate reached a finite threshold inside the bracket")
        return SearchOutcome(
            basematrix=Basematrix(self.to_matrix(population[best]), spec.d_per_level,
                                  level_order=spec.level_order, s_max=spec.s_max),
            threshold_db=float(fitness[best]),
            history=history,
            evaluations=self.evaluator.evaluations,
            cache_hits=self.evaluator.hits,
        )


def optimize(spec: SearchSpec, threads: int = 1, lineage_path: Optional[Path] = None,
             resume: bool = False) -> SearchOutcome:
    """
    Best basematrix found by differential evolution, its threshold and the
    per-generation best-fitness history; deterministic given ``spec.rng_seed``.
    """
    lineage = LineageLog(lineage_path) if lineage_path else None
    return DifferentialEvolution(spec, threads=threads, lineage=lineage).run(resume=resume)


def exhaustive_search(spec: SearchSpec, threads: int = 1) -> SearchOutcome:
    """
    Evaluate every matrix in {0, ..., S}^(M x N); for small spaces only.

    Raises:
        ConfigurationError: the space exceeds the enumeration limit.
        InfeasibilityError: no matrix reaches a finite threshold.
    """
    genes = spec.M * spec.N
    size = (spec.s_max + 1) ** genes
    if size > PROTOPT['EXHAUSTIVE_LIMIT']:
        raise ConfigurationError(f"{size} candidates exceed the exhaustive limit", 's_max')
    evaluator = ThresholdEvaluator(spec)
    matrices = [np.array(point, dtype=np.int64).reshape(spec.M, spec.N)
                for point in itertools.product(range(spec.s_max + 1), repeat=genes)]
    with ThreadPoolExecutor(max_workers=max(int(threads), 1)) as pool:
        values = list(pool.map(evaluator, matrices))

    ranking = sorted(((a.tolist(), v) for a, v in zip(matrices, values)),
                     key=lambda item: _selection_key(item[1], np.asarray(item[0])))
    best, value = ranking[0]
    if math.isinf(value):
        raise InfeasibilityError("no matrix reaches a finite threshold inside the bracket")
    return SearchOutcome(
        basematrix=Basematrix(np.asarray(best), spec.d_per_level,
                              level_order=spec.level_order, s_max=spec.s_max),
        threshold_db=value,
        evaluations=evaluator.evaluations,
        cache_hits=evaluator.hits,
        ranking=ranking,
    )


def best_matrices(outcome: SearchOutcome, tolerance_db: float = 0.0) -> List[list]:
    """Matrices of the ranking within ``tolerance_db`` of the best threshold."""
    return [a for a, v in outcome.ranking if v <= outcome.threshold_db + tolerance_db]
