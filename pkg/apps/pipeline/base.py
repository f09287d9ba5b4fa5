"""
Shared plumbing of the pipeline commands.

Every command reads a JSON configuration, validates it, writes its artifacts
under ``--out`` and records them in a run manifest. Domain errors leave the
process with their class exit code.
"""

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from apps.common.exceptions import ConfigurationError, ProtoshapeError
from apps.pexit.basematrix import Basematrix
from apps.pipeline.manifest import RunManifest, config_hash
from apps.pipeline.schemas import load_config
from constants import PUBLISHED_PROTOGRAPHS

logger = logging.getLogger('protoshape.pipeline')

SEED_MAX = 2 ** 64 - 1


def toolkit_settings() -> dict:
    return getattr(settings, 'PROTOSHAPE', {})


def read_config(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration: {exc}", 'config') from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON at line {exc.lineno}: {exc.msg}", 'config') from exc


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return format(value, '.10g')
    return value


def write_csv(path: Path, fields: Sequence[str], rows: Iterable[dict]) -> Path:
    """CSV with a fixed column order and float formatting."""
    with open(path, 'w', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fields), lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(row.get(key)) for key in fields})
    return Path(path)


def write_json(path: Path, data) -> Path:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + '\n')
    return Path(path)


def threshold_options(config: dict) -> dict:
    """P-EXIT options from the configuration, falling back to the toolkit settings."""
    defaults = toolkit_settings()
    keys = {
        'delta': 'PEXIT_DELTA',
        'max_iterations': 'PEXIT_MAX_ITERATIONS',
        'resolution_db': 'THRESHOLD_RESOLUTION_DB',
        'scan_step_db': 'THRESHOLD_SCAN_STEP_DB',
    }
    options = {}
    for option, setting in keys.items():
        value = config.get(option)
        if value is None:
            value = defaults.get(setting)
        if value is not None:
            options[option] = value
    return options


@dataclass(frozen=True)
class Design:
    """A basematrix with the modulation it was designed for."""
    base: Basematrix
    m: int
    mode: Optional[str]
    snr_bracket: Optional[Tuple[float, float]]
    blocklength: Optional[int] = None
    preset: Optional[str] = None


def resolve_design(config: dict) -> Design:
    """
    Design from a published preset or an inline basematrix.

    Explicit ``m``, ``mode`` and ``snr_bracket`` keys override the preset's.
    """
    bracket = config.get('snr_bracket')
    name = config.get('preset')
    if name is not None:
        preset = PUBLISHED_PROTOGRAPHS[name]
        base = Basematrix(preset['matrix'], preset['d_per_level'])
        m = config.get('m') or preset['m']
        if m != base.m:
            raise ConfigurationError(f"preset {name} carries m={base.m}", 'm')
        return Design(
            base=base,
            m=m,
            mode=config.get('mode') or preset['mode'],
            snr_bracket=tuple(bracket or preset['snr_bracket']),
            blocklength=preset['blocklength'],
            preset=name,
        )
    data = config['basematrix']
    base = Basematrix(
        data['matrix'], data['d_per_level'],
        level_order=data.get('level_order'), s_max=data.get('s_max'),
        min_degree=data.get('min_degree', 2),
    )
    m = config.get('m') or base.m
    if m != base.m:
        raise ConfigurationError(f"basematrix carries {base.m} bit levels, m={m}", 'm')
    return Design(base=base, m=m, mode=config.get('mode'),
                  snr_bracket=tuple(bracket) if bracket else None)


class ProtoshapeCommand(BaseCommand):
    """
    Base class of the pipeline commands.

    Subclasses set ``schema`` and implement ``run(config, out, seed, threads)``,
    registering artifacts through ``self.output``.
    """
    schema = None

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, type=Path,
                            help='JSON run configuration')
        parser.add_argument('--out', type=Path, default=None,
                            help='Output directory (default: PROTOSHAPE_OUTPUT_DIR)')
        parser.add_argument('--seed', type=int, default=0,
                            help='Master seed, 0 .. 2^64-1')
        parser.add_argument('--threads', type=int, default=None,
                            help='Worker bound (default: PROTOSHAPE_THREADS)')

    def handle(self, *args, **options):
        try:
            self.execute_run(options)
        except ProtoshapeError as exc:
            logger.error("%s failed: %s", self.command_name, exc)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    @property
    def command_name(self) -> str:
        return self.__module__.rsplit('.', 1)[-1]

    def resolve_threads(self, value: Optional[int]) -> int:
        threads = value if value is not None else toolkit_settings().get('THREADS', 1)
        if threads < 1:
            raise ConfigurationError(f"thread count must be >= 1, got {threads}", 'threads')
        return int(threads)

    def execute_run(self, options):
        seed = options['seed']
        if not 0 <= seed <= SEED_MAX:
            raise ConfigurationError(f"seed must lie in [0, 2^64 - 1], got {seed}", 'seed')
        threads = self.resolve_threads(options.get('threads'))
        config = load_config(self.schema(), read_config(options['config']))
        self.config_dir = Path(options['config']).resolve().parent
        out = Path(options['out'] or toolkit_settings().get('OUTPUT_DIR', 'runs'))
        out.mkdir(parents=True, exist_ok=True)

        self.out = out
        self.manifest = RunManifest(
            command=self.command_name,
            config_hash=config_hash(config),
            seed=seed,
            version=toolkit_settings().get('VERSION', ''),
        )
        logger.info("%s: config %s, seed %d, %d thread(s)",
                    self.command_name, self.manifest.config_hash[:12], seed, threads)
        self.run(config, out, seed, threads)
        path = self.manifest.finish(out)
        self.stdout.write(self.style.SUCCESS(
            f"{self.command_name}: wrote {len(self.manifest.outputs)} artifact(s), manifest {path}"
        ))

    def output(self, path: Path) -> Path:
        self.manifest.add_output(path, self.out)
        return path

    def run(self, config: dict, out: Path, seed: int, threads: int):
        raise NotImplementedError
