"""
Lift a basematrix to a quasi-cyclic code and write it as alist plus sidecar.
"""
from apps.common.exceptions import ConfigurationError
from apps.pipeline.base import ProtoshapeCommand, resolve_design
from apps.pipeline.schemas import LiftConfigSchema
from apps.qclift.alist import write_code
from apps.qclift.encoder import encoder_prep
from apps.qclift.lifting import lift
from constants import QCLIFT


def lifting_factor(config: dict, n_base: int, default_blocklength=None) -> int:
    """Q from an explicit ``q`` or from a blocklength divisible by N."""
    if config.get('q') is not None:
        return config['q']
    blocklength = config.get('blocklength') or default_blocklength
    if blocklength is None:
        raise ConfigurationError("give 'q' or 'blocklength'", 'q')
    if blocklength % n_base:
        raise ConfigurationError(f"blocklength {blocklength} is not a multiple of N={n_base}", 'blocklength')
    return blocklength // n_base


class Command(ProtoshapeCommand):
    help = 'Lift a basematrix by circulants and write the parity-check matrix'
    schema = LiftConfigSchema

    def run(self, config, out, seed, threads):
        design = resolve_design(config)
        q = lifting_factor(config, design.base.N, design.blocklength)
        max_moves = config['max_moves'] if config.get('max_moves') is not None else QCLIFT['MAX_MOVES']
        code = lift(design.base, q, seed=seed, max_moves=max_moves)
        if config['encoder']:
            code = encoder_prep(code)

        for path in write_code(code, out):
            self.output(path)
        self.manifest.summary = {
            'n': code.n,
            'q': code.q,
            'k': code.k,
            'lift_seed': code.seed,
            'four_cycles': code.four_cycles,
            'six_cycles': code.six_cycles,
        }
        self.stdout.write(f"n={code.n} Q={code.q}: {code.four_cycles} 4-cycles, "
                          f"{code.six_cycles if code.six_cycles is not None else 'n/a'} 6-cycles")
