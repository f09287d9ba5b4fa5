"""Run manifests: one per command invocation, listing every artifact it wrote."""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(',', ':'))


def config_hash(config: dict) -> str:
    """SHA-256 of the configuration's canonical JSON form."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec='seconds')


@dataclass
class RunManifest:
    """
    Provenance of one run.

    Attributes:
        command: subcommand name
        config_hash: SHA-256 of the validated configuration
        seed: master seed of the run
        version: tool version
        started_at: UTC start time, ISO 8601
        finished_at: UTC end time, set by ``finish``
        outputs: artifact paths relative to the output directory
        summary: headline numbers of the run
    """
    command: str
    config_hash: str
    seed: int
    version: str
    started_at: str = field(default_factory=_now)
    finished_at: Optional[str] = None
    outputs: List[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def filename(self) -> str:
        return f'{self.command}-manifest.json'

    def add_output(self, path: Path, root: Path):
        name = Path(path).resolve().relative_to(Path(root).resolve()).as_posix()
        if name not in self.outputs:
            self.outputs.append(name)

    def finish(self, root: Path) -> Path:
        self.finished_at = _now()
        self.outputs.sort()
        path = Path(root) / self.filename
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + '\n')
        return path

    @classmethod
    def read(cls, path: Path) -> 'RunManifest':
        return cls(**json.loads(Path(path).read_text()))
