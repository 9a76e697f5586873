import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from szego_lab.constants import DominanceEnum
from szego_lab.hardy import FourierState
from szego_lab.spectral import (
    decompose,
    detect_crossings,
    eigenspace_coefficients,
    ranks,
    reconstruction_residuals,
    sum_rule_residuals,
    summarize_spectrum,
    verify_projection_norms,
    verify_v_norm,
)


class TestOnePlusZ:
    def test_levels(self, one_plus_z):
        dec = decompose(one_plus_z)
        assert_allclose(dec.rho**2, [(3 + math.sqrt(5)) / 2, (3 - math.sqrt(5)) / 2], rtol=1e-12)
        assert_allclose(dec.sigma, [1.0, 0.0], atol=1e-12)
        assert dec.k_levels[-1].dominance is DominanceEnum.K_DOMINANT
        assert dec.is_generic()
        assert dec.interlacing_ok()

    def test_ranks(self, one_plus_z):
        report = ranks(one_plus_z)
        assert (report.rank_h, report.rank_k) == (2, 1)
        assert report.consistent

    def test_summary(self, one_plus_z):
        summary, dec = summarize_spectrum(one_plus_z)
        assert dec is not None
        assert not summary.frozen_labels
        assert summary.h_multiplicities == [1, 1]
        assert summary.k_dominant == pytest.approx([1.0, 0.0], abs=1e-12)

    def test_blaschke_of_simple_levels_is_constant(self, one_plus_z):
        dec = decompose(one_plus_z)
        for level in dec.h_levels:
            assert level.blaschke is not None
            assert level.blaschke.degree == 0


def test_dominance_is_scale_invariant(one_plus_z):
    dec = decompose(one_plus_z)
    small = decompose(FourierState.from_coeffs(1e-6 * one_plus_z.coeffs))
    assert_allclose(small.rho, 1e-6 * dec.rho, rtol=1e-8)
    assert [level.dominance for level in small.h_levels] == [level.dominance for level in dec.h_levels]
    assert [level.dominance for level in small.k_levels] == [level.dominance for level in dec.k_levels]


def test_zero_state_has_no_levels():
    dec = decompose(FourierState.zeros(8))
    assert dec.h_levels == [] and dec.k_levels == []
    assert dec.rank_h == 0


def test_identities_on_a_rank_two_state(rank_two_state):
    dec = decompose(rank_two_state)
    assert len(dec.h_levels) == len(dec.k_levels)
    residuals = verify_projection_norms(dec)
    assert residuals.max() < 1e-8
    assert max(verify_v_norm(dec)) < 1e-8
    assert max(sum_rule_residuals(dec)) < 1e-8
    h_error, k_error = reconstruction_residuals(rank_two_state, dec)
    assert max(h_error, k_error) < 1e-10
    h_expansion, k_expansion = eigenspace_coefficients(dec)
    assert max(h_expansion + k_expansion) < 1e-8


def test_ranks_of_rank_two_state(rank_two_state):
    report = ranks(rank_two_state)
    assert report.consistent
    assert (report.rank_h, report.rank_k) == (3, 2)


class TestDetectCrossings:
    def test_linear_crossing_is_located(self):
        times = np.linspace(0.0, 2.0, 21)
        h_values = [[2.5 + t, t] for t in times]
        report = detect_crossings(times, h_values, 1.0)
        assert report.times == pytest.approx([1.0], abs=1e-9)
        assert not report.permanent

    def test_no_crossing(self):
        times = np.linspace(0.0, 1.0, 11)
        report = detect_crossings(times, [[2.0] for _ in times], 1.0)
        assert report.times == []

    def test_permanent_coincidence(self):
        times = np.linspace(0.0, 1.0, 11)
        report = detect_crossings(times, [[1.0] for _ in times], 1.0)
        assert report.permanent
