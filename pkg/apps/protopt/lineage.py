"""JSON-lines lineage log of an optimization run."""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from apps.common.exceptions import ConfigurationError

logger = logging.getLogger('protoshape.protopt')


def _encode_fitness(values) -> list:
    return [None if math.isinf(v) else float(v) for v in values]


def _decode_fitness(values) -> np.ndarray:
    return np.array([math.inf if v is None else v for v in values], dtype=float)


@dataclass
class GenerationRecord:
    """State after one complete generation; enough to resume from."""
    generation: int
    best_matrix: list
    best_threshold_db: float
    population: np.ndarray
    fitness: np.ndarray
    rng_state: dict
    spec_hash: str

    def to_json(self) -> str:
        return json.dumps({
            'generation': self.generation,
            'best_matrix': self.best_matrix,
            'best_threshold_db': None if math.isinf(self.best_threshold_db) else self.best_threshold_db,
            'population': self.population.tolist(),
            'fitness': _encode_fitness(self.fitness),
            'rng_state': self.rng_state,
            'spec_hash': self.spec_hash,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> 'GenerationRecord':
        data = json.loads(line)
        best = data['best_threshold_db']
        return cls(
            generation=int(data['generation']),
            best_matrix=data['best_matrix'],
            best_threshold_db=math.inf if best is None else float(best),
            population=np.asarray(data['population'], dtype=float),
            fitness=_decode_fitness(data['fitness']),
            rng_state=data['rng_state'],
            spec_hash=data['spec_hash'],
        )


class LineageLog:
    """Append-only lineage file; each line is one ``GenerationRecord``."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def reset(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text('')

    def append(self, record: GenerationRecord):
        with self.path.open('a') as handle:
            handle.write(record.to_json() + '\n')

    def _scan(self) -> Tuple[List[GenerationRecord], List[str]]:
        records, lines = [], []
        for number, line in enumerate(self.path.read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(GenerationRecord.from_json(line))
            except (json.JSONDecodeError, KeyError) as exc:
                logger.warning("ignoring unreadable lineage line %d of %s: %s", number, self.path, exc)
                break
            lines.append(line)
        return records, lines

    def records(self) -> List[GenerationRecord]:
        """Complete records in file order; a torn last line is dropped."""
        if not self.path.exists():
            return []
        return self._scan()[0]

    def resume_point(self, spec_hash: str) -> Optional[GenerationRecord]:
        """
        Last complete record, after cutting the file back to the complete
        records so that appended generations start on a fresh line.
        """
        if not self.path.exists():
            return None
        records, lines = self._scan()
        if not records:
            return None
        if records[-1].spec_hash != spec_hash:
            raise ConfigurationError(f"lineage {self.path} belongs to a different search spec", 'resume')
        complete = ''.join(line + '\n' for line in lines)
        if self.path.read_text() != complete:
            logger.warning("truncating %s after generation %d", self.path, records[-1].generation)
            self.path.write_text(complete)
        return records[-1]
