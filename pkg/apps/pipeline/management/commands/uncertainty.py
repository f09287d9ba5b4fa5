"""
Bit-level uncertainties along the uniform and shaped SNR trajectories.
"""
import numpy as np

from apps.constellation.channel import bit_uncertainties
from apps.constellation.shaping import trajectory_point
from apps.pipeline.base import ProtoshapeCommand, write_csv
from apps.pipeline.schemas import UncertaintyConfigSchema


def snr_grid(config: dict) -> list:
    if config.get('snr_points_db') is not None:
        return [float(s) for s in config['snr_points_db']]
    grid = config['snr_grid']
    points = np.arange(grid['start'], grid['stop'] + grid['step'] / 2, grid['step'])
    return [round(float(s), 10) for s in points]


def uncertainty_fields(m: int) -> list:
    return (['snr_db', 'mode', 'nu', 'delta']
            + [f'h_cond_{i}' for i in range(1, m + 1)]
            + ['h_input', 'r_bmd', 'r_tx']
            + [f'mi_{i}' for i in range(1, m + 1)]
            + ['rate_backoff'])


def uncertainty_row(m: int, snr_db: float, mode: str, code_rate=None) -> dict:
    constellation = trajectory_point(m, snr_db, mode)
    uncertainties = bit_uncertainties(constellation, code_rate=code_rate)
    row = {
        'snr_db': snr_db,
        'mode': mode,
        'nu': float(constellation.nu),
        'delta': float(constellation.delta),
        'h_input': uncertainties.h_input,
        'r_bmd': uncertainties.r_bmd,
        'r_tx': uncertainties.r_tx,
        'rate_backoff': uncertainties.rate_backoff,
    }
    for level, (h, mi) in enumerate(zip(uncertainties.h_cond, uncertainties.mutual_informations), start=1):
        row[f'h_cond_{level}'] = float(h)
        row[f'mi_{level}'] = float(mi)
    return row


class Command(ProtoshapeCommand):
    help = 'Tabulate H(B_i|L_i), H(B), R_BMD and R_tx over an SNR grid'
    schema = UncertaintyConfigSchema

    def run(self, config, out, seed, threads):
        m = config['m']
        grid = snr_grid(config)
        rows = [uncertainty_row(m, snr_db, mode, config.get('code_rate'))
                for mode in config['modes'] for snr_db in grid]
        path = write_csv(out / 'uncertainty.csv', uncertainty_fields(m), rows)
        self.output(path)
        self.manifest.summary = {'m': m, 'rows': len(rows)}
