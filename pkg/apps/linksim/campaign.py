"""
Monte-Carlo link campaigns.

Frames are independent work units. Frame f at SNR point s draws all of its
randomness from ``stream(seed, s, f)`` and frames are folded into the
accumulators in index order, so results do not depend on the worker count or
the batch size.
"""

import hashlib
import itertools
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from apps.common.exceptions import ConfigurationError
from apps.common.streams import permutation_key, stream
from apps.common.units import linear_to_db
from apps.constellation.channel import Constellation, bit_uncertainties
from apps.constellation.shaping import MODES, SHAPED, mb_operating_point, snr_gap, trajectory_point
from apps.linksim.decoder import BeliefPropagation
from apps.linksim.demapper import demap, modulate
from apps.linksim.source import symbol_bits, systematic_block, transmission_order
from apps.qclift.encoder import encode, to_lifted_order
from apps.qclift.lifting import QCCode
from apps.surrogates.matching import SurrogateKind, SurrogateVector, match_biawgn
from constants import LINKSIM

logger = logging.getLogger('protoshape.linksim')


@dataclass(frozen=True, eq=False)
class SimConfig:
    """
    Campaign configuration.

    ``nu`` pins the Maxwell-Boltzmann parameter of shaped runs; when None the
    shaped operating point is optimized at every SNR point.
    """
    code: QCCode
    mode: str
    snr_points_db: Tuple[float, ...]
    max_frames: int = LINKSIM['MAX_FRAMES']
    min_frame_errors: int = LINKSIM['MIN_FRAME_ERRORS']
    max_iterations: int = LINKSIM['MAX_ITERATIONS']
    rng_seed: int = 0
    bitmapper_permutation: Optional[Tuple[int, ...]] = None
    include_priors: bool = True
    nu: Optional[float] = None
    threads: int = 1
    histograms: bool = False

    def __post_init__(self):
        if self.code.encoder is None:
            raise ConfigurationError("campaign needs a code with a prepared encoder", 'code')
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}", 'mode')
        if self.code.n % self.m:
            raise ConfigurationError(f"n={self.code.n} is not a multiple of m={self.m}", 'code')
        if self.max_frames < 1 or self.min_frame_errors < 1 or self.max_iterations < 1:
            raise ConfigurationError("frame and iteration limits must be positive")
        if self.bitmapper_permutation is not None:
            if sorted(self.bitmapper_permutation) != list(range(1, self.m + 1)):
                raise ConfigurationError(
                    f"{list(self.bitmapper_permutation)} is not a permutation of 1..{self.m}",
                    'bitmapper_permutation',
                )
        object.__setattr__(self, 'snr_points_db', tuple(float(s) for s in self.snr_points_db))

    @property
    def m(self) -> int:
        return self.code.base.m

    def designed_constellation(self, snr_db: float) -> Constellation:
        """Constellation the source shapes for, in code-level labels."""
        if self.mode == SHAPED and self.nu is not None:
            return mb_operating_point(self.m, snr_db, self.nu)
        return trajectory_point(self.m, snr_db, self.mode)

    def constellation(self, snr_db: float) -> Constellation:
        """Physical constellation at ``snr_db``, bit-mapper permutation applied."""
        designed = self.designed_constellation(snr_db)
        if self.bitmapper_permutation is None:
            return designed
        return designed.with_level_permutation(self.bitmapper_permutation)

    def with_permutation(self, permutation: Optional[Sequence[int]]) -> 'SimConfig':
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data['bitmapper_permutation'] = None if permutation is None else tuple(permutation)
        return SimConfig(**data)

    def digest(self) -> str:
        data = {f: getattr(self, f) for f in self.__dataclass_fields__ if f not in ('code', 'threads')}
        data['code'] = self.code.to_dict()
        return hashlib.sha256(json.dumps(data, sort_keys=True, default=list).encode()).hexdigest()


@dataclass
class FrameOutcome:
    bit_errors: int
    iterations: int
    power: float
    histogram: Optional[np.ndarray] = None


@dataclass
class SnrRecord:
    """Accumulated statistics of one SNR point."""
    snr_db: float
    r_tx: float
    delta_snr_db: Optional[float]
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    iterations: int = 0
    power_sum: float = 0.0
    bits_per_frame: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.bits_per_frame) if self.frames else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def avg_iters(self) -> float:
        return self.iterations / self.frames if self.frames else 0.0

    @property
    def fer_upper_95(self) -> Optional[float]:
        """One-sided 95% bound on the FER when no frame failed."""
        if self.frame_errors or not self.frames:
            return None
        return 3.0 / self.frames

    @property
    def power_db(self) -> float:
        return float(linear_to_db(self.power_sum / self.frames)) if self.frames else math.nan

    def add(self, outcome: FrameOutcome):
        self.frames += 1
        self.bit_errors += outcome.bit_errors
        self.frame_errors += int(outcome.bit_errors > 0)
        self.iterations += outcome.iterations
        self.power_sum += outcome.power

    def row(self) -> dict:
        return {
            'snr_db': self.snr_db,
            'delta_snr_db': self.delta_snr_db,
            'frames': self.frames,
            'bit_errors': self.bit_errors,
            'frame_errors': self.frame_errors,
            'ber': self.ber,
            'fer': self.fer,
            'avg_iters': self.avg_iters,
            'fer_upper_95': self.fer_upper_95,
            'r_tx': self.r_tx,
            'power_db': self.power_db,
        }

    def to_dict(self) -> dict:
        return asdict(self)


CSV_FIELDS = ('snr_db', 'delta_snr_db', 'frames', 'bit_errors', 'frame_errors', 'ber', 'fer',
              'avg_iters', 'fer_upper_95', 'r_tx', 'power_db')


@dataclass
class LlrHistogram:
    """Per-level counts of demapper L-values for transmitted code bit 0."""
    snr_db: float
    edges: np.ndarray
    counts: np.ndarray
    surrogate_sigma: np.ndarray

    def rows(self) -> Iterable[dict]:
        widths = np.diff(self.edges)
        centers = 0.5 * (self.edges[1:] + self.edges[:-1])
        surrogate = SurrogateVector(SurrogateKind.BIAWGN, self.surrogate_sigma)
        for level, counts in enumerate(self.counts, start=1):
            total = counts.sum()
            density = counts / (total * widths) if total else np.zeros_like(widths)
            matched = surrogate.density(level, centers)
            for low, high, value, reference in zip(self.edges[:-1], self.edges[1:], density, matched):
                yield {
                    'snr_db': self.snr_db, 'level': level, 'bin_low': float(low),
                    'bin_high': float(high), 'density': float(value),
                    'surrogate_density': float(reference),
                }


HISTOGRAM_FIELDS = ('snr_db', 'level', 'bin_low', 'bin_high', 'density', 'surrogate_density')


@dataclass
class SimResult:
    """Per-SNR records with provenance."""
    records: List[SnrRecord]
    seed: int
    config_hash: str
    permutation: Optional[Tuple[int, ...]] = None
    histograms: List[LlrHistogram] = field(default_factory=list)

    def rows(self) -> List[dict]:
        return [record.row() for record in self.records]

    def provenance(self) -> dict:
        return {
            'seed': self.seed,
            'config_hash': self.config_hash,
            'permutation': None if self.permutation is None else list(self.permutation),
            'snr_points_db': [r.snr_db for r in self.records],
        }


def _histogram_edges() -> np.ndarray:
    low, high = LINKSIM['HISTOGRAM_RANGE']
    return np.linspace(low, high, LINKSIM['HISTOGRAM_BINS'] + 1)


class Campaign:
    """Runs the frames of a configuration over its SNR points."""

    def __init__(self, config: SimConfig, surrogate: Optional[SurrogateVector] = None,
                 use_surrogate: bool = False):
        self.config = config
        self.code = config.code
        self.decoder = BeliefPropagation(config.code)
        self.use_surrogate = use_surrogate or surrogate is not None
        self.surrogate = surrogate
        self.permutation = (np.asarray(config.bitmapper_permutation, dtype=int)
                            if config.bitmapper_permutation is not None else None)
        self.column_levels = np.repeat(self.code.base.column_levels, self.code.q)
        self.edges = _histogram_edges()

    def _sigma(self, constellation: Constellation) -> np.ndarray:
        """Surrogate deviations per code level."""
        if self.surrogate is not None:
            return self.surrogate.params
        sigma = match_biawgn(bit_uncertainties(constellation)).params
        return sigma if self.permutation is None else sigma[self.permutation - 1]

    def _channel_llrs(self, transmitted: np.ndarray, constellation: Constellation,
                      rng: np.random.Generator) -> Tuple[np.ndarray, float, Optional[np.ndarray]]:
        code_bits = symbol_bits(transmitted, self.config.m)
        x = modulate(code_bits, constellation, self.permutation)
        y = x + rng.standard_normal(x.size)
        llrs = demap(y, constellation, self.config.include_priors, self.permutation)
        histogram = None
        if self.config.histograms:
            histogram = np.stack([
                np.histogram(llrs[code_bits[:, level] == 0, level], bins=self.edges)[0]
                for level in range(self.config.m)
            ])
        return transmission_order(llrs), float(np.mean(x ** 2)), histogram

    def _surrogate_llrs(self, codeword: np.ndarray, sigma: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray:
        deviations = sigma[self.column_levels - 1]
        signs = 1.0 - 2.0 * codeword
        return signs * deviations ** 2 / 2.0 + deviations * rng.standard_normal(codeword.size)

    def frame(self, snr_index: int, frame: int, designed: Constellation, constellation: Constellation,
              sigma: Optional[np.ndarray]) -> FrameOutcome:
        """
        One frame: the source draws from ``designed`` while the channel
        carries the physical ``constellation``.
        """
        rng = stream(self.config.rng_seed, snr_index, frame)
        systematic = systematic_block(self.code, designed, rng)
        codeword = encode(self.code, systematic)
        histogram = None
        if self.use_surrogate:
            llrs = self._surrogate_llrs(codeword, sigma, rng)
            power = float(np.dot(constellation.dist, (constellation.delta * constellation.points) ** 2))
        else:
            transmitted, power, histogram = self._channel_llrs(codeword[self.code.layout], constellation, rng)
            llrs = to_lifted_order(self.code, transmitted)
        result = self.decoder.decode(llrs, self.config.max_iterations)
        columns = self.code.encoder.systematic_columns
        bit_errors = int(np.count_nonzero(result.hard[columns] != systematic))
        return FrameOutcome(bit_errors, result.iterations, power, histogram)

    def point(self, snr_index: int, snr_db: float) -> Tuple[SnrRecord, Optional[LlrHistogram]]:
        config = self.config
        designed = config.designed_constellation(snr_db)
        constellation = config.constellation(snr_db)
        r_tx = constellation.input_entropy - (1.0 - self.code.base.rate) * config.m
        record = SnrRecord(
            snr_db=snr_db,
            r_tx=r_tx,
            delta_snr_db=snr_gap(snr_db, r_tx) if r_tx > 0 else None,
            bits_per_frame=self.code.k,
        )
        sigma = self._sigma(constellation) if (self.use_surrogate or config.histograms) else None
        counts = np.zeros((config.m, self.edges.size - 1), dtype=np.int64)

        batch = max(config.threads, 1) * LINKSIM['FRAMES_PER_WORKER']
        frames = iter(range(config.max_frames))
        with ThreadPoolExecutor(max_workers=max(config.threads, 1)) as pool:
            while record.frames < config.max_frames and record.frame_errors < config.min_frame_errors:
                indices = list(itertools.islice(frames, batch))
                if not indices:
                    break
                outcomes = pool.map(lambda f: self.frame(snr_index, f, designed, constellation, sigma), indices)
                for outcome in outcomes:
                    record.add(outcome)
                    if outcome.histogram is not None:
                        counts += outcome.histogram
                    if record.frame_errors >= config.min_frame_errors:
                        break
        logger.info("%.3f dB: %d frames, %d frame errors, FER %.3e, BER %.3e",
                    snr_db, record.frames, record.frame_errors, record.fer, record.ber)
        histogram = LlrHistogram(snr_db, self.edges, counts, sigma) if config.histograms else None
        return record, histogram


class Checkpoint:
    """Completed SNR records of a campaign, keyed by the configuration hash."""

    def __init__(self, path: Optional[Path], config_hash: str):
        self.path = Path(path) if path else None
        self.config_hash = config_hash
        self.records: Dict[float, SnrRecord] = {}
        if self.path and self.path.exists():
            data = json.loads(self.path.read_text())
            if data.get('config_hash') == config_hash:
                self.records = {r['snr_db']: SnrRecord(**r) for r in data['records']}
                logger.info("checkpoint %s holds %d completed SNR points", self.path, len(self.records))
            else:
                logger.warning("ignoring checkpoint %s written for another configuration", self.path)

    def save(self, record: SnrRecord):
        self.records[record.snr_db] = record
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            payload = {'config_hash': self.config_hash,
                       'records': [r.to_dict() for r in self.records.values()]}
            self.path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n')


def _run(config: SimConfig, campaign: Campaign, checkpoint_path: Optional[Path], tag: str) -> SimResult:
    config_hash = hashlib.sha256((config.digest() + tag).encode()).hexdigest()
    checkpoint = Checkpoint(checkpoint_path, config_hash)
    records, histograms = [], []
    for index, snr_db in enumerate(config.snr_points_db):
        if snr_db in checkpoint.records and not config.histograms:
            records.append(checkpoint.records[snr_db])
            continue
        record, histogram = campaign.point(index, snr_db)
        checkpoint.save(record)
        records.append(record)
        if histogram is not None:
            histograms.append(histogram)
    return SimResult(records=records, seed=config.rng_seed, config_hash=config_hash,
                     permutation=config.bitmapper_permutation, histograms=histograms)


def run_campaign(config: SimConfig, checkpoint_path: Optional[Path] = None) -> SimResult:
    """Simulate the physical link at every SNR point of ``config``."""
    return _run(config, Campaign(config), checkpoint_path, 'channel')


def surrogate_campaign(config: SimConfig, surrogate: Optional[SurrogateVector] = None,
                       checkpoint_path: Optional[Path] = None) -> SimResult:
    """
    Replace channel and demapper by per-level biAWGN L-values.

    A given ``surrogate`` is used at every SNR point; otherwise the matched
    biAWGN surrogate of each operating point is used.
    """
    if surrogate is not None and (surrogate.kind is not SurrogateKind.BIAWGN or surrogate.m != config.m):
        raise ConfigurationError(f"surrogate must be biAWGN with {config.m} levels", 'surrogate')
    tag = 'surrogate' if surrogate is None else 'surrogate:' + ','.join(f'{v:.12g}' for v in surrogate.params)
    return _run(config, Campaign(config, surrogate, use_surrogate=True), checkpoint_path, tag)


def permutation_sweep(config: SimConfig,
                      permutations: Optional[Iterable[Sequence[int]]] = None) -> Dict[str, SimResult]:
    """Campaign per bit-mapper permutation, keyed like '123'; identity first."""
    if permutations is None:
        permutations = itertools.permutations(range(1, config.m + 1))
    results = {}
    for permutation in permutations:
        key = permutation_key(permutation)
        logger.info("bit-mapper permutation %s", key)
        results[key] = run_campaign(config.with_permutation(permutation))
    return results

