"""
Differential-evolution search for the basematrix with the lowest threshold.
"""
from apps.protopt.optimizer import SearchSpec, best_matrices, exhaustive_search, optimize
from apps.pipeline.base import ProtoshapeCommand, threshold_options, write_json
from apps.pipeline.schemas import OptimizeConfigSchema
from apps.surrogates.matching import SurrogateKind
from constants import PROTOPT

SPEC_KEYS = ('m', 'code_rate', 'd_per_level', 's_max', 'mode', 'population_size', 'generations')


def search_spec(config: dict, seed: int) -> SearchSpec:
    options = {key: config[key] for key in SPEC_KEYS}
    options.update(threshold_options(config))
    return SearchSpec(
        snr_bracket=tuple(config['snr_bracket']),
        surrogate=SurrogateKind(config['surrogate']),
        f_weight=config['f_weight'] if config.get('f_weight') is not None else PROTOPT['F_WEIGHT'],
        crossover_rate=(config['crossover_rate'] if config.get('crossover_rate') is not None
                        else PROTOPT['CROSSOVER_RATE']),
        rng_seed=seed,
        level_order=tuple(config['level_order']) if config.get('level_order') else None,
        **options,
    )


class Command(ProtoshapeCommand):
    help = 'Optimize a protograph basematrix for the surrogate threshold'
    schema = OptimizeConfigSchema

    def run(self, config, out, seed, threads):
        spec = search_spec(config, seed)
        if config['exhaustive']:
            outcome = exhaustive_search(spec, threads=threads)
            payload = outcome.to_dict()
            payload['ties'] = best_matrices(outcome)
        else:
            lineage = self.output(out / 'lineage.jsonl')
            outcome = optimize(spec, threads=threads, lineage_path=lineage, resume=config['resume'])
            payload = outcome.to_dict()

        # counters depend on thread interleaving; they go to the manifest only
        evaluations = payload.pop('evaluations')
        cache_hits = payload.pop('cache_hits')
        payload['spec_hash'] = spec.digest()
        self.output(write_json(out / 'basematrix.json', payload))
        self.manifest.summary = {
            'threshold_db': outcome.threshold_db,
            'evaluations': evaluations,
            'cache_hits': cache_hits,
        }
        self.stdout.write(f"best threshold {outcome.threshold_db:.4f} dB: {outcome.basematrix.a.tolist()}")
