"""
Unit tests for the ASK channel, quadrature and shaping
"""

import numpy as np
import pytest
from django.test import SimpleTestCase

from apps.common.exceptions import DegenerateLevelError, DomainError
from apps.common.streams import stream
from apps.common.units import capacity_snr_db
from apps.constellation.channel import (
    Constellation, ask_points, bit_uncertainties, brgc_labels, llr_distribution, snr_of,
    symbol_information,
)
from apps.constellation.quadrature import gaussian_expectation
from apps.constellation.shaping import (
    SHAPED, UNIFORM, bmd_limit_snr, maxwell_boltzmann, mb_operating_point, shaped_operating_point,
    snr_gap, trajectory_point,
)
from constants import BMD_LIMITS_DB


@pytest.mark.unit
class TestConstellation(SimpleTestCase):
    """Points, labels and power"""

    def test_points_are_odd_integers(self):
        np.testing.assert_array_equal(ask_points(2), [-3, -1, 1, 3])
        np.testing.assert_array_equal(ask_points(3), [-7, -5, -3, -1, 1, 3, 5, 7])

    def test_gray_labels_differ_in_one_bit(self):
        for m in range(1, 7):
            labels = brgc_labels(m)
            self.assertEqual(labels.shape, (2 ** m, m))
            flips = np.abs(np.diff(labels.astype(int), axis=0)).sum(axis=1)
            self.assertTrue(np.all(flips == 1))
            self.assertEqual(len({tuple(row) for row in labels}), 2 ** m)

    def test_sign_bit_splits_the_constellation(self):
        labels = brgc_labels(3)
        np.testing.assert_array_equal(labels[:, 0], [0, 0, 0, 0, 1, 1, 1, 1])

    def test_snr_of_uniform(self):
        self.assertAlmostEqual(snr_of(Constellation.uniform(1)), 0.0, places=12)
        self.assertAlmostEqual(snr_of(Constellation.uniform(2)), 10 * np.log10(5), places=12)
        self.assertAlmostEqual(snr_of(Constellation.uniform(3)), 10 * np.log10(21), places=12)

    def test_at_snr_meets_power_with_equality(self):
        for snr_db in (-3.0, 5.57, 25.52):
            dist = maxwell_boltzmann(3, 0.05)
            self.assertAlmostEqual(snr_of(Constellation.at_snr(3, snr_db, dist=dist)), snr_db, places=9)

    def test_invalid_distribution(self):
        with self.assertRaises(DomainError):
            Constellation(m=2, delta=1.0, dist=np.array([0.5, 0.5, 0.5, 0.5]))
        with self.assertRaises(DomainError):
            Constellation(m=2, delta=0.0, dist=np.full(4, 0.25))

    def test_point_index_inverts_labels(self):
        constellation = Constellation.uniform(4)
        np.testing.assert_array_equal(constellation.point_index(constellation.labels), np.arange(16))

    def test_uniform_prior_terms_vanish(self):
        np.testing.assert_allclose(Constellation.uniform(3).prior_terms, 0.0, atol=1e-15)

    def test_shaped_sign_bit_is_uniform(self):
        constellation = Constellation.at_snr(3, 8.0, dist=maxwell_boltzmann(3, 0.04))
        self.assertAlmostEqual(constellation.bit_marginals[0, 0], 0.5, places=12)

    def test_level_permutation_keeps_power(self):
        designed = Constellation.at_snr(3, 8.0, dist=maxwell_boltzmann(3, 0.04))
        permuted = designed.with_level_permutation([2, 1, 3])
        self.assertAlmostEqual(snr_of(permuted), 8.0, places=9)
        np.testing.assert_allclose(permuted.bit_marginals[[1, 0, 2]], designed.bit_marginals, atol=1e-12)


@pytest.mark.unit
class TestLLRValues(SimpleTestCase):
    """L-values of the bit-metric demapper"""

    def test_two_ask_closed_form(self):
        rng = np.random.default_rng(3)
        constellation = Constellation.at_snr(1, 4.0)
        y = rng.normal(0.0, 2.0, size=20)
        llrs = constellation.llr_values(y)[:, 0]
        np.testing.assert_allclose(llrs, -2.0 * constellation.delta * y, rtol=1e-12, atol=1e-12)

    def test_symmetric_origin(self):
        llrs = Constellation.at_snr(2, 6.0).llr_values(np.array([0.0]))
        self.assertAlmostEqual(llrs[0, 0], 0.0, places=12)

    def test_consistent_density_mean(self):
        constellation = Constellation.at_snr(1, 3.0)
        density = llr_distribution(constellation, 1)
        variance = 4.0 * constellation.delta ** 2
        self.assertAlmostEqual(density.mean(0), variance / 2.0, places=6)

    def test_histogram_is_a_density(self):
        constellation = Constellation.at_snr(3, 8.1, dist=maxwell_boltzmann(3, 0.03))
        density, edges = llr_distribution(constellation, 2).histogram(0, bins=100, value_range=(-30, 30))
        self.assertAlmostEqual(float(np.sum(density * np.diff(edges))), 1.0, places=6)

    def test_degenerate_level(self):
        dist = np.array([0.5, 0.0, 0.0, 0.5])
        constellation = Constellation(m=2, delta=1.0, dist=dist)
        with self.assertRaises(DegenerateLevelError):
            llr_distribution(constellation, 2)
        with self.assertRaises(DegenerateLevelError):
            bit_uncertainties(constellation)


@pytest.mark.unit
class TestBitUncertainties(SimpleTestCase):
    """Conditional entropies and BMD rates"""

    def test_entropy_bounds(self):
        for snr_db in (-5.0, 0.0, 7.74, 15.0):
            for mode in (UNIFORM, SHAPED):
                constellation = trajectory_point(3, snr_db, mode)
                u = bit_uncertainties(constellation)
                self.assertTrue(np.all(u.h_cond >= 0.0))
                self.assertTrue(np.all(u.h_cond <= u.h_levels + 1e-12))
                self.assertTrue(np.all(u.h_levels <= 1.0 + 1e-12))
                self.assertAlmostEqual(u.r_bmd, max(u.h_input - u.h_cond.sum(), 0.0), places=12)

    def test_noiseless_limit(self):
        u = bit_uncertainties(Constellation.at_snr(2, 45.0))
        np.testing.assert_allclose(u.h_cond, 0.0, atol=1e-9)
        self.assertAlmostEqual(u.r_bmd, 2.0, places=8)

    def test_rate_half_bmd_limit(self):
        u = bit_uncertainties(Constellation.at_snr(2, 5.2805))
        self.assertAlmostEqual(u.r_bmd, 1.0, delta=0.003)

    def test_rate_three_quarter_bmd_limit(self):
        u = bit_uncertainties(Constellation.at_snr(2, 9.308))
        self.assertAlmostEqual(u.r_bmd, 1.5, delta=0.003)

    def test_transmission_rate(self):
        u = bit_uncertainties(trajectory_point(3, 7.74, SHAPED), code_rate=2 / 3)
        self.assertAlmostEqual(u.r_tx, u.h_input - 1.0, places=12)
        self.assertAlmostEqual(u.rate_backoff, u.r_bmd - u.r_tx, places=12)
        np.testing.assert_allclose(u.mutual_informations, u.h_levels - u.h_cond)

    def test_gaussian_expectation(self):
        self.assertAlmostEqual(float(gaussian_expectation(lambda z: z ** 2)), 1.0, places=10)
        self.assertAlmostEqual(float(gaussian_expectation(lambda z: np.abs(z))), np.sqrt(2 / np.pi), places=6)

    def test_sampled_entropies_match_quadrature(self):
        rng = stream(21)
        for constellation in (Constellation.at_snr(2, 6.0), mb_operating_point(3, 8.0, 0.04)):
            u = bit_uncertainties(constellation)
            for level in range(1, constellation.m + 1):
                density = llr_distribution(constellation, level)
                sampled = 0.0
                for bit, weight in enumerate(constellation.bit_marginals[level - 1]):
                    llrs = density.sample(bit, 100000, rng)
                    sampled += weight * np.mean(np.logaddexp(0.0, -(1.0 - 2.0 * bit) * llrs)) / np.log(2.0)
                self.assertAlmostEqual(sampled, u.h_cond[level - 1], delta=0.01)

    def test_entropies_fall_with_snr(self):
        grid = np.arange(-2.0, 20.0, 1.5)
        for point in (lambda s: Constellation.at_snr(3, s), lambda s: mb_operating_point(3, s, 0.04)):
            h = np.array([bit_uncertainties(point(s)).h_cond for s in grid])
            self.assertTrue(np.all(np.diff(h, axis=0) <= 1e-7))

    def test_trajectory_power(self):
        for mode in (UNIFORM, SHAPED):
            for snr_db in (4.0, 7.74, 12.0):
                self.assertAlmostEqual(snr_of(trajectory_point(3, snr_db, mode)), snr_db, delta=0.02)


@pytest.mark.unit
class TestSymbolInformation(SimpleTestCase):
    """I(X;Y) of the symbol channel"""

    def test_bounds(self):
        for snr_db in (0.0, 7.74, 15.0):
            for mode in (UNIFORM, SHAPED):
                constellation = trajectory_point(3, snr_db, mode)
                information = symbol_information(constellation)
                self.assertLessEqual(information, constellation.input_entropy + 1e-12)
                self.assertGreaterEqual(information, bit_uncertainties(constellation).r_bmd - 1e-6)

    def test_noiseless_limit(self):
        self.assertAlmostEqual(symbol_information(Constellation.at_snr(2, 45.0)), 2.0, places=8)

    def test_two_ask_equals_the_bit_rate(self):
        constellation = Constellation.at_snr(1, 2.0)
        self.assertAlmostEqual(symbol_information(constellation),
                               1.0 - bit_uncertainties(constellation).h_cond[0], places=7)


@pytest.mark.unit
class TestShaping(SimpleTestCase):
    """Maxwell-Boltzmann trajectory and SNR gaps"""

    def test_zero_parameter_is_uniform(self):
        np.testing.assert_allclose(maxwell_boltzmann(3, 0.0), np.full(8, 1 / 8))

    def test_distribution_is_symmetric(self):
        dist = maxwell_boltzmann(4, 0.01)
        np.testing.assert_allclose(dist, dist[::-1])
        self.assertAlmostEqual(dist.sum(), 1.0, places=12)

    def test_negative_parameter(self):
        with self.assertRaises(DomainError):
            maxwell_boltzmann(2, -1.0)

    def test_shaping_does_not_lose_rate(self):
        for snr_db in (5.0, 7.74, 12.0):
            uniform = Constellation.at_snr(3, snr_db)
            shaped = shaped_operating_point(3, snr_db)
            self.assertGreaterEqual(symbol_information(shaped), symbol_information(uniform) - 1e-9)
            shaped = shaped_operating_point(3, snr_db, criterion='bmd')
            self.assertGreaterEqual(bit_uncertainties(shaped).r_bmd, bit_uncertainties(uniform).r_bmd - 1e-9)

    def test_shaped_trajectory_entropy(self):
        self.assertAlmostEqual(trajectory_point(3, 7.75, SHAPED).input_entropy, 2.3434, delta=0.005)
        entropies = [trajectory_point(3, s, SHAPED).input_entropy for s in (7.0, 7.5, 8.0, 8.5)]
        self.assertTrue(all(b > a for a, b in zip(entropies, entropies[1:])))

    def test_shaped_trajectory_sits_on_the_bmd_plateau(self):
        for snr_db in (7.25, 7.75, 8.25):
            best = bit_uncertainties(shaped_operating_point(3, snr_db, criterion='bmd')).r_bmd
            chosen = bit_uncertainties(trajectory_point(3, snr_db, SHAPED)).r_bmd
            self.assertGreaterEqual(best, chosen - 1e-6)
            self.assertLess(best - chosen, 0.01)

    def test_unknown_criterion(self):
        with self.assertRaises(DomainError):
            shaped_operating_point(3, 7.0, criterion='entropy')

    def test_shaping_needs_two_levels(self):
        with self.assertRaises(DomainError):
            shaped_operating_point(1, 3.0)

    def test_snr_gap(self):
        self.assertAlmostEqual(snr_gap(0.0, 0.5), 0.0, places=12)
        self.assertAlmostEqual(capacity_snr_db(0.5), 0.0, places=12)
        with self.assertRaises(DomainError):
            snr_gap(3.0, 0.0)

    def test_uniform_bmd_limits(self):
        for (m, code_rate), expected in BMD_LIMITS_DB.items():
            self.assertAlmostEqual(bmd_limit_snr(m, m * code_rate), expected, delta=0.03)
