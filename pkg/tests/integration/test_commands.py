"""
Integration tests for the pipeline management commands
"""

import csv
import io
import json
import tempfile
from pathlib import Path

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from apps.linksim.campaign import CSV_FIELDS
from apps.pipeline.manifest import RunManifest
from constants import PUBLISHED_PROTOGRAPHS

RATE_HALF_4ASK = PUBLISHED_PROTOGRAPHS['ask4-r12-uniform']

TOY_SEARCH = {
    'm': 1,
    'code_rate': 0.5,
    'd_per_level': 2,
    's_max': 3,
    'surrogate': 'bec',
    'population_size': 8,
    'generations': 3,
    'snr_bracket': [-4.0, 10.0],
    'scan_step_db': 0.25,
    'resolution_db': 0.01,
}


class CommandTestMixin:
    """Temporary output directory and helpers to run a command on a config."""

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def write_config(self, data, name='config.json'):
        path = self.root / name
        path.write_text(json.dumps(data) if not isinstance(data, str) else data)
        return path

    def run_command(self, command, config, out='out', **options):
        path = config if isinstance(config, Path) else self.write_config(config, f'{command}.json')
        stdout = io.StringIO()
        call_command(command, config=path, out=self.root / out, stdout=stdout, **options)
        return self.root / out, stdout.getvalue()

    def assertExitCode(self, code, command, config, **options):
        with self.assertRaises(CommandError) as context:
            self.run_command(command, config, **options)
        self.assertEqual(context.exception.returncode, code)

    def read_csv(self, path):
        with open(path, newline='') as handle:
            return list(csv.DictReader(handle))

    def manifest(self, out, command):
        return RunManifest.read(out / f'{command}-manifest.json')


@pytest.mark.integration
class TestUncertaintyCommand(CommandTestMixin, SimpleTestCase):

    def test_table(self):
        out, _ = self.run_command('uncertainty', {'m': 2, 'modes': ['uniform'], 'snr_points_db': [0.0, 5.0]})
        rows = self.read_csv(out / 'uncertainty.csv')
        self.assertEqual(len(rows), 2)
        self.assertEqual(list(rows[0])[:6], ['snr_db', 'mode', 'nu', 'delta', 'h_cond_1', 'h_cond_2'])
        self.assertEqual(rows[1]['mode'], 'uniform')
        self.assertGreater(float(rows[1]['r_bmd']), float(rows[0]['r_bmd']))

        manifest = self.manifest(out, 'uncertainty')
        self.assertEqual(manifest.outputs, ['uncertainty.csv'])
        self.assertEqual(manifest.summary, {'m': 2, 'rows': 2})
        self.assertIsNotNone(manifest.finished_at)

    def test_grid_and_both_modes(self):
        config = {'m': 3, 'snr_grid': {'start': 6.0, 'stop': 8.0, 'step': 0.5}, 'code_rate': 2 / 3}
        out, _ = self.run_command('uncertainty', config)
        rows = self.read_csv(out / 'uncertainty.csv')
        self.assertEqual(len(rows), 10)
        self.assertEqual([r['snr_db'] for r in rows[:5]], ['6', '6.5', '7', '7.5', '8'])
        shaped = [r for r in rows if r['mode'] == 'shaped']
        self.assertTrue(all(float(r['nu']) > 0 for r in shaped))

    def test_empty_grid_writes_header_only(self):
        out, _ = self.run_command('uncertainty', {'m': 2, 'snr_points_db': []})
        lines = (out / 'uncertainty.csv').read_text().splitlines()
        self.assertEqual(len(lines), 1)
        self.assertTrue(lines[0].startswith('snr_db,mode'))

    def test_rerun_is_byte_identical(self):
        config = {'m': 2, 'snr_points_db': [4.0, 6.5]}
        first, _ = self.run_command('uncertainty', config, out='first')
        second, _ = self.run_command('uncertainty', config, out='second')
        self.assertEqual((first / 'uncertainty.csv').read_bytes(), (second / 'uncertainty.csv').read_bytes())
        self.assertEqual(self.manifest(first, 'uncertainty').config_hash,
                         self.manifest(second, 'uncertainty').config_hash)

    def test_configuration_errors(self):
        self.assertExitCode(2, 'uncertainty', {'m': 2, 'snr_points_db': [1.0], 'colour': 'red'})
        self.assertExitCode(2, 'uncertainty', {'m': 1, 'modes': ['shaped'], 'snr_points_db': [1.0]})
        self.assertExitCode(2, 'uncertainty', {'m': 2})
        self.assertExitCode(2, 'uncertainty', '{"m": 2,')
        self.assertExitCode(2, 'uncertainty', self.root / 'missing.json')
        self.assertExitCode(2, 'uncertainty', {'m': 2, 'snr_points_db': [1.0]}, seed=-1)


@pytest.mark.integration
class TestThresholdCommand(CommandTestMixin, SimpleTestCase):

    def test_preset(self):
        out, stdout = self.run_command('threshold', {'preset': 'ask4-r12-uniform', 'surrogates': ['bec', 'biawgn']})
        payload = json.loads((out / 'threshold.json').read_text())
        self.assertEqual(sorted(payload['reports']), ['bec', 'biawgn'])
        self.assertAlmostEqual(payload['reports']['biawgn']['threshold_db'], 5.57, delta=0.05)
        self.assertEqual(payload['preset'], 'ask4-r12-uniform')
        self.assertIn('biawgn: threshold', stdout)
        self.assertEqual(self.manifest(out, 'threshold').outputs, ['threshold.json'])

    def test_inline_basematrix(self):
        config = {
            'basematrix': {'matrix': RATE_HALF_4ASK['matrix'], 'd_per_level': 3},
            'm': 2, 'mode': 'uniform', 'snr_bracket': [5.0, 6.5],
        }
        out, _ = self.run_command('threshold', config)
        summary = self.manifest(out, 'threshold').summary
        self.assertAlmostEqual(summary['biawgn'], 5.57, delta=0.05)

    def test_bracket_error(self):
        self.assertExitCode(3, 'threshold', {'preset': 'ask4-r12-uniform', 'snr_bracket': [8.0, 9.0]})

    def test_configuration_errors(self):
        inline = {'basematrix': {'matrix': [[3, 3]], 'd_per_level': 1}}
        self.assertExitCode(2, 'threshold', inline)
        self.assertExitCode(2, 'threshold', {'preset': 'ask4-r12-uniform', 'basematrix': inline['basematrix']})
        self.assertExitCode(2, 'threshold', {'preset': 'ask16'})
        self.assertExitCode(2, 'threshold', {'preset': 'ask4-r12-uniform', 'm': 3})
        ragged = {'basematrix': {'matrix': [[3, 3], [3]], 'd_per_level': 1},
                  'm': 2, 'mode': 'uniform', 'snr_bracket': [0.0, 10.0]}
        self.assertExitCode(2, 'threshold', ragged)
        infeasible = {'basematrix': {'matrix': [[3, 0]], 'd_per_level': 1},
                      'm': 2, 'mode': 'uniform', 'snr_bracket': [0.0, 10.0]}
        self.assertExitCode(2, 'threshold', infeasible)


@pytest.mark.integration
class TestOptimizeCommand(CommandTestMixin, SimpleTestCase):

    def test_search(self):
        out, _ = self.run_command('optimize', TOY_SEARCH, seed=3)
        payload = json.loads((out / 'basematrix.json').read_text())
        self.assertEqual(len(payload['history']), 4)
        self.assertNotIn('evaluations', payload)
        self.assertEqual(len((out / 'lineage.jsonl').read_text().splitlines()), 4)

        manifest = self.manifest(out, 'optimize')
        self.assertEqual(manifest.outputs, ['basematrix.json', 'lineage.jsonl'])
        self.assertEqual(manifest.seed, 3)
        self.assertIn('evaluations', manifest.summary)

    def test_threads_and_reruns_agree(self):
        first, _ = self.run_command('optimize', TOY_SEARCH, out='first', threads=1)
        second, _ = self.run_command('optimize', TOY_SEARCH, out='second', threads=3)
        self.assertEqual((first / 'basematrix.json').read_bytes(), (second / 'basematrix.json').read_bytes())
        self.assertEqual((first / 'lineage.jsonl').read_bytes(), (second / 'lineage.jsonl').read_bytes())

    def test_resume(self):
        out, _ = self.run_command('optimize', TOY_SEARCH)
        expected = (out / 'basematrix.json').read_bytes()
        lineage = out / 'lineage.jsonl'
        lineage.write_text(''.join(lineage.read_text().splitlines(keepends=True)[:2]))
        self.run_command('optimize', dict(TOY_SEARCH, resume=True))
        self.assertEqual((out / 'basematrix.json').read_bytes(), expected)

    def test_exhaustive(self):
        out, _ = self.run_command('optimize', dict(TOY_SEARCH, exhaustive=True))
        payload = json.loads((out / 'basematrix.json').read_text())
        self.assertIn(payload['basematrix']['matrix'], payload['ties'])
        self.assertFalse((out / 'lineage.jsonl').exists())

    def test_infeasible_space(self):
        self.assertExitCode(4, 'optimize', dict(TOY_SEARCH, s_max=1))

    def test_configuration_errors(self):
        self.assertExitCode(2, 'optimize', dict(TOY_SEARCH, code_rate=0.3))
        self.assertExitCode(2, 'optimize', {k: v for k, v in TOY_SEARCH.items() if k != 'snr_bracket'})
        self.assertExitCode(2, 'optimize', dict(TOY_SEARCH, snr_bracket=[1.0]))


@pytest.mark.integration
class TestLiftAndSimulateCommands(CommandTestMixin, SimpleTestCase):
    """Lift a code, then simulate it from the written files"""

    def lift_code(self):
        config = {'basematrix': {'matrix': RATE_HALF_4ASK['matrix'], 'd_per_level': 3},
                  'q': 13, 'max_moves': 200}
        out, _ = self.run_command('lift', config, out='code')
        return out

    def simulation(self, **overrides):
        config = {
            'code': {'alist': 'code/code.alist', 'sidecar': 'code/code.json'},
            'mode': 'uniform',
            'snr_points_db': [6.0, 16.0],
            'max_frames': 6,
        }
        config.update(overrides)
        return config

    def test_lift(self):
        out = self.lift_code()
        sidecar = json.loads((out / 'code.json').read_text())
        self.assertEqual(sidecar['n'], 78)
        self.assertEqual((out / 'code.alist').read_text().splitlines()[0], '78 39')
        manifest = self.manifest(out, 'lift')
        self.assertEqual(manifest.outputs, ['code.alist', 'code.json'])
        self.assertEqual(manifest.summary['q'], 13)
        self.assertEqual(manifest.summary['k'], 39)

    def test_lift_below_twice_the_largest_entry(self):
        config = {'basematrix': {'matrix': RATE_HALF_4ASK['matrix'], 'd_per_level': 3}, 'q': 7}
        self.assertExitCode(3, 'lift', config)

    def test_lift_shaped_preset_with_encoder(self):
        out, _ = self.run_command('lift', {'preset': 'ask8-r23-shaped', 'q': 13, 'max_moves': 50})
        summary = self.manifest(out, 'lift').summary
        self.assertEqual(summary['n'], 78)
        self.assertGreaterEqual(summary['k'], 52)

    def test_lift_blocklength(self):
        config = {'preset': 'ask4-r12-uniform', 'blocklength': 120, 'max_moves': 50}
        out, _ = self.run_command('lift', config)
        self.assertEqual(self.manifest(out, 'lift').summary['n'], 120)
        self.assertExitCode(2, 'lift', dict(config, blocklength=100))
        self.assertExitCode(2, 'lift', dict(config, q=20))

    def test_simulate(self):
        self.lift_code()
        out, _ = self.run_command('simulate', self.simulation(), seed=11)
        rows = self.read_csv(out / 'simulation.csv')
        self.assertEqual(tuple(rows[0]), CSV_FIELDS)
        self.assertEqual([r['snr_db'] for r in rows], ['6', '16'])
        self.assertEqual(rows[1]['frame_errors'], '0')

        provenance = json.loads((out / 'provenance.json').read_text())
        self.assertEqual(provenance['seed'], 11)
        self.assertEqual(provenance['code']['n'], 78)
        manifest = self.manifest(out, 'simulate')
        self.assertEqual(manifest.outputs, ['checkpoint.json', 'provenance.json', 'simulation.csv'])

    def test_simulation_is_reproducible(self):
        self.lift_code()
        first, _ = self.run_command('simulate', self.simulation(), out='first', threads=1)
        second, _ = self.run_command('simulate', self.simulation(), out='second', threads=3)
        self.assertEqual((first / 'simulation.csv').read_bytes(), (second / 'simulation.csv').read_bytes())

    def test_surrogate_and_histograms(self):
        self.lift_code()
        out, _ = self.run_command('simulate', self.simulation(surrogate='matched', surrogate_sigma=[30.0, 30.0]))
        rows = self.read_csv(out / 'simulation.csv')
        self.assertEqual({r['frame_errors'] for r in rows}, {'0'})

        out, _ = self.run_command('simulate', self.simulation(histograms=True), out='histograms')
        histogram = self.read_csv(out / 'llr_histograms.csv')
        self.assertEqual(len(histogram), 2 * 2 * 160)

    def test_permutation_sweep(self):
        self.lift_code()
        out, _ = self.run_command('simulate', self.simulation(permutation_sweep=True, snr_points_db=[16.0]))
        self.assertTrue((out / 'simulation-12.csv').exists())
        self.assertTrue((out / 'simulation-21.csv').exists())
        self.assertEqual(sorted(self.manifest(out, 'simulate').summary), ['12', '21'])

    def test_configuration_errors(self):
        self.lift_code()
        self.assertExitCode(2, 'simulate', self.simulation(code={'alist': 'nope.alist', 'sidecar': 'nope.json'}))
        self.assertExitCode(2, 'simulate', self.simulation(permutation_sweep=True, bitmapper_permutation=[2, 1]))
        self.assertExitCode(2, 'simulate', self.simulation(surrogate_sigma=[1.0, 1.0]))
        self.assertExitCode(2, 'simulate', self.simulation(bitmapper_permutation=[1, 1]))
