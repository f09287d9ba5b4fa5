"""
Unit tests for the basematrix optimizer and its lineage log
"""

import math
import tempfile
from pathlib import Path

import numpy as np
import pytest
from django.test import SimpleTestCase

from apps.common.exceptions import ConfigurationError, InfeasibilityError
from apps.protopt.lineage import LineageLog
from apps.protopt.optimizer import (
    DifferentialEvolution, ThresholdEvaluator, best_matrices, evaluate, exhaustive_search, optimize,
)
from apps.pexit.threshold import threshold
from apps.surrogates.matching import SurrogateKind
from tests.factories import BasematrixFactory, SearchSpecFactory


@pytest.mark.unit
class TestSearchSpec(SimpleTestCase):
    """Validation and derived sizes"""

    def test_dimensions(self):
        spec = SearchSpecFactory(m=2, d_per_level=3, population_size=None)
        self.assertEqual((spec.M, spec.N), (3, 6))
        self.assertEqual(spec.population, 60)
        self.assertEqual(SearchSpecFactory(population_size=None).population, 20)

    def test_invalid_specs(self):
        invalid = [
            {'code_rate': 0.3},
            {'code_rate': 1.0},
            {'mode': 'shaped'},
            {'mode': 'square'},
            {'population_size': 2},
            {'snr_bracket': (5.0, 5.0)},
            {'s_max': 0},
            {'level_order': (2,)},
            {'crossover_rate': 1.5},
        ]
        for overrides in invalid:
            with self.assertRaises(ConfigurationError, msg=str(overrides)):
                SearchSpecFactory(**overrides)

    def test_digest_tracks_every_field(self):
        spec = SearchSpecFactory()
        self.assertEqual(spec.digest(), SearchSpecFactory().digest())
        self.assertNotEqual(spec.digest(), SearchSpecFactory(rng_seed=2).digest())
        self.assertNotEqual(spec.digest(), SearchSpecFactory(surrogate=SurrogateKind.BIAWGN).digest())


@pytest.mark.unit
class TestEvaluate(SimpleTestCase):
    """Memoized threshold fitness"""

    def setUp(self):
        self.spec = SearchSpecFactory()

    def test_infeasible_scores_infinity(self):
        self.assertTrue(math.isinf(evaluate(np.array([[3, 0]]), self.spec)))
        self.assertTrue(math.isinf(evaluate(np.array([[1, 3]]), self.spec)))

    def test_matches_threshold_search(self):
        base = BasematrixFactory(a=[[3, 3]], d_per_level=2)
        expected = threshold(base, 1, 'uniform', SurrogateKind.BEC, self.spec.snr_bracket,
                             **self.spec.threshold_options())
        self.assertEqual(evaluate(base, self.spec), expected)

    def test_cache_hit(self):
        evaluator = ThresholdEvaluator(self.spec)
        first = evaluator(np.array([[3, 3]]))
        second = evaluator(np.array([[3, 3]]))
        self.assertEqual(first, second)
        self.assertEqual(evaluator.evaluations, 1)
        self.assertEqual(evaluator.hits, 1)

    def test_bracket_miss_scores_infinity(self):
        spec = SearchSpecFactory(snr_bracket=(8.0, 10.0))
        self.assertTrue(math.isinf(evaluate(np.array([[3, 3]]), spec)))


@pytest.mark.unit
class TestDifferentialEvolution(SimpleTestCase):
    """Search results on the toy space {0..3}^(1x2)"""

    def setUp(self):
        self.spec = SearchSpecFactory()

    def test_initial_population_is_feasible(self):
        search = DifferentialEvolution(self.spec)
        population = search.initial_population()
        self.assertEqual(population.shape, (8, 2))
        for genome in population:
            self.assertTrue(np.all(search.to_matrix(genome) >= 2))

    def test_rounding_and_clipping(self):
        search = DifferentialEvolution(self.spec)
        np.testing.assert_array_equal(search.to_matrix(np.array([-0.7, 4.6])), [[0, 3]])
        np.testing.assert_array_equal(search.to_matrix(np.array([1.5, 2.4])), [[2, 2]])

    def test_agrees_with_exhaustive_search(self):
        found = optimize(self.spec)
        reference = exhaustive_search(self.spec)
        self.assertAlmostEqual(found.threshold_db, reference.threshold_db, places=12)
        self.assertIn(found.basematrix.a.tolist(), best_matrices(reference))

    def test_history_is_monotone(self):
        history = optimize(self.spec).history
        self.assertEqual(len(history), self.spec.generations + 1)
        self.assertTrue(all(b <= a for a, b in zip(history, history[1:])))

    def test_thread_count_does_not_change_the_result(self):
        single = optimize(self.spec, threads=1)
        pooled = optimize(self.spec, threads=3)
        self.assertEqual(single.history, pooled.history)
        self.assertEqual(single.basematrix, pooled.basematrix)

    def test_shaped_search(self):
        spec = SearchSpecFactory(m=2, d_per_level=1, mode='shaped', surrogate=SurrogateKind.BIAWGN,
                                 snr_bracket=(0.0, 14.0), population_size=4, generations=2)
        found = optimize(spec)
        self.assertEqual(found.basematrix.a.shape, (1, 2))
        self.assertTrue(0.0 < found.threshold_db < 14.0)
        self.assertEqual(len(found.history), 3)
        self.assertEqual(found.threshold_db, evaluate(found.basematrix, spec))

    def test_no_feasible_member(self):
        with self.assertRaises(InfeasibilityError):
            optimize(SearchSpecFactory(s_max=1))


@pytest.mark.unit
class TestExhaustiveSearch(SimpleTestCase):

    def test_ranking_covers_the_space(self):
        outcome = exhaustive_search(SearchSpecFactory())
        self.assertEqual(len(outcome.ranking), 16)
        finite = [a for a, v in outcome.ranking if not math.isinf(v)]
        self.assertEqual(sorted(finite), [[2, 2], [2, 3], [3, 2], [3, 3]])

    def test_space_limit(self):
        with self.assertRaises(ConfigurationError):
            exhaustive_search(SearchSpecFactory(m=2, d_per_level=3, s_max=6))


@pytest.mark.unit
class TestLineage(SimpleTestCase):
    """JSON-lines lineage and resumption"""

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name) / 'lineage.jsonl'
        self.spec = SearchSpecFactory(generations=6)

    def tearDown(self):
        self.directory.cleanup()

    def test_one_line_per_generation(self):
        optimize(self.spec, lineage_path=self.path)
        records = LineageLog(self.path).records()
        self.assertEqual([r.generation for r in records], list(range(7)))
        self.assertTrue(all(r.spec_hash == self.spec.digest() for r in records))

    def test_resume_reproduces_the_run(self):
        complete = optimize(self.spec, lineage_path=self.path)
        lines = self.path.read_text().splitlines(keepends=True)
        self.path.write_text(''.join(lines[:3]))

        resumed = optimize(self.spec, lineage_path=self.path, resume=True)
        self.assertEqual(resumed.history, complete.history)
        self.assertEqual(resumed.basematrix, complete.basematrix)
        self.assertEqual(len(LineageLog(self.path).records()), 7)

    def test_torn_line_is_ignored(self):
        optimize(SearchSpecFactory(generations=2), lineage_path=self.path)
        with self.path.open('a') as handle:
            handle.write('{"generation": 3, "best')
        self.assertEqual(len(LineageLog(self.path).records()), 3)

    def test_resume_after_a_torn_line(self):
        complete = optimize(self.spec, lineage_path=self.path)
        lines = self.path.read_text().splitlines(keepends=True)
        self.path.write_text(''.join(lines[:4]) + lines[4][:25])

        resumed = optimize(self.spec, lineage_path=self.path, resume=True)
        records = LineageLog(self.path).records()
        self.assertEqual([r.generation for r in records], list(range(7)))
        self.assertEqual(resumed.history, complete.history)
        self.assertTrue(self.path.read_text().endswith('\n'))

    def test_resume_restores_a_missing_newline(self):
        optimize(self.spec, lineage_path=self.path)
        lines = self.path.read_text().splitlines()
        self.path.write_text('\n'.join(lines[:3]))

        optimize(self.spec, lineage_path=self.path, resume=True)
        self.assertEqual([r.generation for r in LineageLog(self.path).records()], list(range(7)))

    def test_resume_rejects_another_spec(self):
        optimize(self.spec, lineage_path=self.path)
        with self.assertRaises(ConfigurationError):
            optimize(SearchSpecFactory(generations=6, rng_seed=5), lineage_path=self.path, resume=True)

    def test_resume_without_lineage_starts_over(self):
        fresh = optimize(self.spec, lineage_path=self.path, resume=True)
        self.assertEqual(fresh.history, optimize(self.spec).history)


@pytest.mark.campaign
class TestPublishedSearch(SimpleTestCase):
    """Full-budget search on the rate-1/2 4-ASK space; run with PROTOSHAPE_LONG_TESTS=1"""

    def test_rate_half_four_ask(self):
        spec = SearchSpecFactory(m=2, d_per_level=3, s_max=6, surrogate=SurrogateKind.BIAWGN,
                                 snr_bracket=(4.0, 9.0), population_size=40, generations=200)
        found = optimize(spec, threads=4)
        self.assertEqual(found.basematrix.a.shape, (3, 6))
        self.assertLessEqual(found.threshold_db, 5.65)
