"""
BER/FER campaign of a lifted code over the ASK link or its surrogate.
"""
from pathlib import Path

from apps.linksim.campaign import (
    CSV_FIELDS, HISTOGRAM_FIELDS, SimConfig, permutation_sweep, run_campaign, surrogate_campaign,
)
from apps.pipeline.base import ProtoshapeCommand, write_csv, write_json
from apps.pipeline.schemas import SimulateConfigSchema
from apps.qclift.alist import read_code
from apps.qclift.encoder import encoder_prep
from apps.surrogates.matching import SurrogateKind, SurrogateVector
from constants import LINKSIM

LIMITS = {
    'max_frames': 'MAX_FRAMES',
    'min_frame_errors': 'MIN_FRAME_ERRORS',
    'max_iterations': 'MAX_ITERATIONS',
}


class Command(ProtoshapeCommand):
    help = 'Simulate BER/FER of a lifted code with BMD and belief propagation'
    schema = SimulateConfigSchema

    def code_path(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self.config_dir / path

    def sim_config(self, config: dict, seed: int, threads: int) -> SimConfig:
        code = read_code(self.code_path(config['code']['alist']),
                         self.code_path(config['code']['sidecar']))
        code = encoder_prep(code)
        limits = {key: config[key] if config.get(key) is not None else LINKSIM[setting]
                  for key, setting in LIMITS.items()}
        permutation = config.get('bitmapper_permutation')
        return SimConfig(
            code=code,
            mode=config['mode'],
            snr_points_db=tuple(config['snr_points_db']),
            rng_seed=seed,
            bitmapper_permutation=tuple(permutation) if permutation else None,
            include_priors=config['include_priors'],
            nu=config.get('nu'),
            threads=threads,
            histograms=config['histograms'],
            **limits,
        )

    def run(self, config, out, seed, threads):
        sim = self.sim_config(config, seed, threads)
        if config['permutation_sweep']:
            self.sweep(sim, out)
            return

        checkpoint = out / 'checkpoint.json'
        if not config['resume'] and checkpoint.exists():
            checkpoint.unlink()
        if config.get('surrogate') is not None:
            sigma = config.get('surrogate_sigma')
            surrogate = SurrogateVector(SurrogateKind.BIAWGN, sigma) if sigma is not None else None
            result = surrogate_campaign(sim, surrogate, checkpoint_path=checkpoint)
        else:
            result = run_campaign(sim, checkpoint_path=checkpoint)
        if checkpoint.exists():
            self.output(checkpoint)

        self.output(write_csv(out / 'simulation.csv', CSV_FIELDS, result.rows()))
        provenance = result.provenance()
        provenance.update({
            'mode': sim.mode,
            'include_priors': sim.include_priors,
            'surrogate': config.get('surrogate'),
            'code': sim.code.to_dict(),
        })
        self.output(write_json(out / 'provenance.json', provenance))
        if result.histograms:
            rows = [row for histogram in result.histograms for row in histogram.rows()]
            self.output(write_csv(out / 'llr_histograms.csv', HISTOGRAM_FIELDS, rows))
        self.manifest.summary = {f"{r['snr_db']:g}": r['fer'] for r in result.rows()}

    def sweep(self, sim: SimConfig, out: Path):
        results = permutation_sweep(sim)
        summary = {}
        for key, result in results.items():
            self.output(write_csv(out / f'simulation-{key}.csv', CSV_FIELDS, result.rows()))
            summary[key] = [r['fer'] for r in result.rows()]
        self.output(write_json(out / 'provenance.json', {
            'seed': sim.rng_seed,
            'snr_points_db': list(sim.snr_points_db),
            'permutations': {key: r.provenance() for key, r in results.items()},
            'code': sim.code.to_dict(),
        }))
        self.manifest.summary = summary
        for key, fers in summary.items():
            self.stdout.write(f"permutation {key}: FER {fers}")
