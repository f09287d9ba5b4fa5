"""
Unit tests for the J-function and surrogate matching
"""

import numpy as np
import pytest
from django.test import SimpleTestCase

from apps.common.exceptions import DomainError
from apps.constellation.channel import Constellation, bit_uncertainties, UncertaintySet
from apps.surrogates.jfunction import j_function, j_inverse, j_table
from apps.surrogates.matching import (
    SurrogateKind, SurrogateVector, match, match_bec, match_biawgn,
)
from constants import J_FUNCTION


def uncertainty_set(h_cond):
    h_cond = np.asarray(h_cond, dtype=float)
    return UncertaintySet(snr_db=0.0, h_cond=h_cond, h_input=float(h_cond.size), r_bmd=0.0,
                          r_tx=0.0, code_rate=0.5, h_levels=np.ones(h_cond.size))


@pytest.mark.unit
class TestJFunction(SimpleTestCase):
    """Exact J and its inverse"""

    def test_limits(self):
        self.assertEqual(j_function(0.0), 0.0)
        self.assertGreater(j_function(40.0), 1.0 - 1e-9)

    def test_monotone(self):
        sigma = np.linspace(0.0, 12.0, 241)
        values = j_function(sigma)
        self.assertTrue(np.all(np.diff(values) > 0))

    def test_round_trip_grid(self):
        grid = np.linspace(0.01, 0.99, 99)
        np.testing.assert_allclose(j_function(j_inverse(grid)), grid, atol=1e-8)

    def test_inverse_identity(self):
        self.assertEqual(j_inverse(0.0), 0.0)
        self.assertAlmostEqual(j_inverse(j_function(2.0)), 2.0, delta=1e-6)

    def test_half_information(self):
        sigma = j_inverse(0.5)
        self.assertAlmostEqual(j_function(sigma), 0.5, delta=1e-9)

    def test_near_one_is_finite(self):
        sigma = j_inverse(0.9999)
        self.assertTrue(np.isfinite(sigma))
        self.assertLess(sigma, 40.0)

    def test_clamp(self):
        self.assertAlmostEqual(j_inverse(1.0), j_inverse(J_FUNCTION['CLAMP']), places=9)
        with self.assertRaises(DomainError):
            j_inverse(1.0, clamp=False)
        with self.assertRaises(DomainError):
            j_inverse(-0.1)
        with self.assertRaises(DomainError):
            j_function(-1.0)


@pytest.mark.unit
class TestJTable(SimpleTestCase):
    """Tabulated J used by P-EXIT"""

    def setUp(self):
        self.table = j_table()

    def test_agrees_with_exact(self):
        sigma = np.linspace(0.05, 10.0, 57)
        np.testing.assert_allclose(self.table.j(sigma), j_function(sigma), atol=1e-7)

    def test_inverse_agrees_with_exact(self):
        grid = np.linspace(0.02, 0.98, 25)
        np.testing.assert_allclose(self.table.inverse(grid), j_inverse(grid), atol=1e-4)

    def test_monotone_round_trip(self):
        grid = np.linspace(0.0, 0.999, 500)
        sigma = self.table.inverse(grid)
        self.assertTrue(np.all(np.diff(sigma) >= 0))
        np.testing.assert_allclose(self.table.j(sigma), grid, atol=1e-9)

    def test_saturates(self):
        self.assertEqual(float(self.table.j(np.array(1e3))), 1.0)
        top = float(self.table.inverse(np.array(1.0)))
        self.assertLessEqual(top, self.table.sigma_clamp)
        self.assertGreater(top, self.table.sigma_clamp - 2 * J_FUNCTION['TABLE_RESOLUTION'])


@pytest.mark.unit
class TestMatching(SimpleTestCase):
    """BEC and biAWGN surrogate vectors"""

    def test_bec_is_identity(self):
        np.testing.assert_array_equal(match_bec(uncertainty_set([0.5, 0.2, 0.1])).params, [0.5, 0.2, 0.1])
        np.testing.assert_array_equal(match_bec(uncertainty_set([0.0, 0.0])).params, [0.0, 0.0])

    def test_biawgn_identity(self):
        u = bit_uncertainties(Constellation.at_snr(2, 5.57))
        surrogate = match_biawgn(u)
        np.testing.assert_allclose(1.0 - j_function(surrogate.params), u.h_cond, atol=1e-6)

    def test_biawgn_extremes(self):
        params = match_biawgn(uncertainty_set([1.0, 0.0])).params
        self.assertEqual(params[0], 0.0)
        self.assertAlmostEqual(params[1], j_inverse(J_FUNCTION['CLAMP']), places=6)

    def test_bec_from_channel(self):
        u = bit_uncertainties(Constellation.at_snr(2, 5.57))
        surrogate = match(u, SurrogateKind.BEC)
        self.assertIs(surrogate.kind, SurrogateKind.BEC)
        np.testing.assert_array_equal(surrogate.params, u.h_cond)

    def test_out_of_range(self):
        with self.assertRaises(DomainError):
            match_biawgn(uncertainty_set([1.2, 0.1]))
        with self.assertRaises(DomainError):
            SurrogateVector(SurrogateKind.BEC, [0.5, 1.5])
        with self.assertRaises(DomainError):
            SurrogateVector(SurrogateKind.BIAWGN, [-1.0])

    def test_per_variable_node(self):
        surrogate = SurrogateVector(SurrogateKind.BIAWGN, [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(surrogate.per_variable_node([2, 2, 3, 1]), [2.0, 2.0, 3.0, 1.0])

    def test_density_is_consistent(self):
        surrogate = SurrogateVector(SurrogateKind.BIAWGN, [2.0])
        llr = np.linspace(-30, 30, 60001)
        density = surrogate.density(1, llr)
        step = llr[1] - llr[0]
        self.assertAlmostEqual(float(density.sum() * step), 1.0, places=6)
        self.assertAlmostEqual(float((llr * density).sum() * step), 2.0, places=5)
