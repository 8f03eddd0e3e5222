#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for the Beta-posterior bookkeeping of `calibroute`."""

import math
import itertools

import numpy as np
import pytest

from calibroute import trust
from calibroute.models import BetaParams, ContextBucket, EASY, HARD
from calibroute.delegation import SkillRegistry
from calibroute.trust import (CapabilityProfile, TransferResult, init_prior, posterior_mean, posterior_variance,
                              update_outcome, cold_start_transfer, neighbor_buckets, belief_divergence,
                              misreport_gap, transfer_shift, transfer_bias_bound)
from calibroute.exceptions import (InvalidParameterError, NotRegisteredError, TransferAfterDataError,
                                   InvalidInputError)

MEDIUM = ContextBucket('medium', 'isolated', 'no')
registry = SkillRegistry({'agent_a': ['code'], 'agent_b': ['code', 'search']})


def make_profile(owner='agent_a', declarations=None, **kwargs):
    return CapabilityProfile(owner, registry, declarations or {}, **kwargs)


class TestPrior:
    """Tests for the self-report prior."""

    @pytest.mark.parametrize('c_self,alpha,beta', [(0.9, 1.8, 0.2), (0.5, 1.0, 1.0), (0.0, 0.02, 1.98),
                                                   (1.0, 1.98, 0.02)])
    def test_init_prior(self, c_self, alpha, beta):
        prior = init_prior(c_self, 2.0)
        assert prior.alpha == pytest.approx(alpha, abs=1e-12)
        assert prior.beta == pytest.approx(beta, abs=1e-12)
        assert prior.n == 0

    @pytest.mark.parametrize('kappa', [0, -1.0])
    def test_init_prior_rejects_kappa(self, kappa):
        with pytest.raises(InvalidParameterError):
            init_prior(0.5, kappa)

    def test_posterior_moments(self):
        cell = BetaParams(1.8, 0.2)
        assert posterior_mean(cell) == pytest.approx(0.9, abs=1e-12)
        assert posterior_variance(cell) == pytest.approx(0.03, abs=1e-12)
        assert posterior_variance(BetaParams(1.0, 1.0)) == pytest.approx(1.0 / 12, abs=1e-12)

    def test_profile_rejects_transfer_mass(self):
        with pytest.raises(InvalidParameterError):
            make_profile(transfer_mass=3.0)


class TestCapabilityProfile:
    """Tests for CapabilityProfile Class."""

    def test_profile(self):
        profile = make_profile()
        assert profile.__repr__() == 'calibroute.trust.CapabilityProfile(agent_a, cells=0)'
        assert len(profile) == 0

    def test_lazy_cell_uses_declaration(self):
        profile = make_profile(declarations={('agent_b', 'code', EASY): 0.9, ('agent_b', 'code', None): 0.3})
        assert posterior_mean(profile.cell('agent_b', 'code', EASY)) == pytest.approx(0.9)
        assert posterior_mean(profile.cell('agent_b', 'code', HARD)) == pytest.approx(0.3)
        assert posterior_mean(profile.cell('agent_a', 'code', HARD)) == pytest.approx(0.5)
        assert len(profile) == 3
        assert ('agent_b', 'code', EASY) in profile

    def test_update_outcome(self):
        profile = make_profile()
        cell = update_outcome(profile, 'agent_b', 'code', EASY, 1)
        assert (cell.alpha, cell.beta, cell.n) == (2.0, 1.0, 1)
        cell = update_outcome(profile, 'agent_b', 'code', EASY, 0)
        assert (cell.alpha, cell.beta, cell.n) == (2.0, 2.0, 2)

    def test_update_conserves_mass(self):
        profile = make_profile(kappa=3.0)
        rng = np.random.default_rng(1)
        for _ in range(25):
            update_outcome(profile, 'agent_a', 'code', HARD, int(rng.random() < 0.4))
        cell = profile.cell('agent_a', 'code', HARD)
        assert cell.alpha + cell.beta == pytest.approx(3.0 + cell.transferred + cell.n, abs=1e-12)
        assert cell.n == 25

    def test_update_is_monotone(self):
        profile = make_profile()
        before = posterior_mean(profile.cell('agent_a', 'code', EASY))
        after = posterior_mean(update_outcome(profile, 'agent_a', 'code', EASY, 1))
        assert after > before
        assert posterior_mean(update_outcome(profile, 'agent_a', 'code', EASY, 0)) < after

    def test_unknown_peer_or_skill(self):
        profile = make_profile()
        with pytest.raises(NotRegisteredError):
            update_outcome(profile, 'agent_z', 'code', EASY, 1)
        with pytest.raises(NotRegisteredError):
            update_outcome(profile, 'agent_a', 'cooking', EASY, 1)

    def test_undeclared_but_known_skill(self):
        profile = make_profile()
        cell = update_outcome(profile, 'agent_a', 'search', EASY, 1)
        assert cell.n == 1

    def test_converges_to_truth(self):
        profile = make_profile()
        rng = np.random.default_rng(7)
        for _ in range(1000):
            update_outcome(profile, 'agent_b', 'code', HARD, int(rng.random() < 0.7))
        assert abs(posterior_mean(profile.cell('agent_b', 'code', HARD)) - 0.7) <= 0.05

    def test_history(self):
        profile = make_profile()
        cell = profile.observe_history('agent_a', 'code', HARD, 160, 240)
        assert cell.n == 400
        assert posterior_mean(cell) == pytest.approx(161.0 / 402.0)

    def test_static_profile_collapses_buckets(self):
        declarations = {('agent_a', 'code', EASY): 0.9, ('agent_a', 'code', HARD): 0.25}
        profile = make_profile(declarations=declarations, contextual=False)
        assert profile.cell('agent_a', 'code', EASY) is profile.cell('agent_a', 'code', HARD)
        assert posterior_mean(profile.cell('agent_a', 'code', EASY)) == pytest.approx(0.575)
        update_outcome(profile, 'agent_a', 'code', HARD, 1)
        assert profile.cell('agent_a', 'code', EASY).n == 1

    def test_to_dict(self):
        profile = make_profile()
        update_outcome(profile, 'agent_b', 'code', EASY, 1)
        data = profile.to_dict()
        assert data['owner'] == 'agent_a'
        assert data['cells'] == [{'peer': 'agent_b', 'skill': 'code', 'bucket': EASY.to_dict(), 'alpha': 2.0,
                                  'beta': 1.0, 'n': 1, 'c_self': 0.5}]
        restored = CapabilityProfile.from_dict(data, registry)
        assert restored.cell('agent_b', 'code', EASY) == profile.cell('agent_b', 'code', EASY)


class TestColdStartTransfer:
    """Tests for the one-time neighbour transfer."""

    @pytest.mark.parametrize('bucket,expected', [
        (EASY, [MEDIUM, ContextBucket('easy', 'chained', 'no'), ContextBucket('easy', 'isolated', 'yes')]),
        (HARD, [ContextBucket('medium', 'chained', 'yes'), ContextBucket('hard', 'isolated', 'yes'),
                ContextBucket('hard', 'chained', 'no')]),
        (MEDIUM, [EASY, ContextBucket('hard', 'isolated', 'no'), ContextBucket('medium', 'chained', 'no'),
                  ContextBucket('medium', 'isolated', 'yes')]),
    ])
    def test_neighbor_buckets(self, bucket, expected):
        assert neighbor_buckets(bucket) == expected

    def test_lazy_transfer_from_neighbor(self):
        profile = make_profile()
        profile.observe_history('agent_b', 'code', EASY, 8, 2)
        cell = profile.cell('agent_b', 'code', MEDIUM)
        assert cell.transferred == 2.0
        assert cell.n == 0
        assert posterior_mean(cell) == pytest.approx(0.5 + transfer_shift(2.0, 0, 2.0, 0.75, 0.5), abs=1e-12)
        assert posterior_mean(cell) == pytest.approx(0.625, abs=1e-12)

    def test_no_transfer_without_neighbor(self):
        profile = make_profile()
        profile.observe_history('agent_b', 'code', EASY, 8, 2)
        cell = profile.cell('agent_b', 'code', HARD)
        assert cell.transferred == 0.0
        assert posterior_mean(cell) == pytest.approx(0.5)

    def test_transfer_happens_once(self):
        profile = make_profile()
        profile.observe_history('agent_b', 'code', EASY, 8, 2)
        cell = profile.cell('agent_b', 'code', MEDIUM)
        alpha = cell.alpha
        profile.observe_history('agent_b', 'code', EASY, 50, 0)
        assert profile.cell('agent_b', 'code', MEDIUM).alpha == alpha
        cell, result = cold_start_transfer(profile, 'agent_b', 'code', MEDIUM, EASY, 2.0)
        assert result == TransferResult.NO_NEIGHBOR
        assert cell.alpha == alpha

    def test_explicit_transfer(self):
        profile = make_profile()
        profile.observe_history('agent_b', 'code', EASY, 8, 2)
        cell, result = cold_start_transfer(profile, 'agent_b', 'code', HARD, EASY, 1.0)
        assert result == TransferResult.APPLIED
        assert (cell.alpha, cell.beta) == (pytest.approx(1.75), pytest.approx(1.25))

    def test_transfer_without_source(self):
        profile = make_profile()
        cell, result = cold_start_transfer(profile, 'agent_b', 'code', HARD, None, 2.0)
        assert result == TransferResult.NO_NEIGHBOR
        assert (cell.alpha, cell.beta) == (1.0, 1.0)

    def test_explicit_transfer_to_new_cell_uses_given_source(self):
        other = ContextBucket('hard', 'isolated', 'no')
        profile = make_profile()
        profile.observe_history('agent_b', 'code', EASY, 8, 2)
        profile.observe_history('agent_b', 'code', other, 2, 8)
        cell, result = cold_start_transfer(profile, 'agent_b', 'code', MEDIUM, other, 2.0)
        assert result == TransferResult.APPLIED
        assert (cell.alpha, cell.beta) == (pytest.approx(1.5), pytest.approx(2.5))
        assert cell.transferred == 2.0

    def test_explicit_transfer_to_new_cell_without_source(self):
        profile = make_profile()
        profile.observe_history('agent_b', 'code', EASY, 8, 2)
        cell, result = cold_start_transfer(profile, 'agent_b', 'code', MEDIUM, None, 2.0)
        assert result == TransferResult.NO_NEIGHBOR
        assert (cell.alpha, cell.beta, cell.transferred) == (1.0, 1.0, 0.0)

    def test_transfer_after_data(self):
        profile = make_profile()
        update_outcome(profile, 'agent_b', 'code', HARD, 1)
        profile.observe_history('agent_b', 'code', EASY, 8, 2)
        with pytest.raises(TransferAfterDataError):
            cold_start_transfer(profile, 'agent_b', 'code', HARD, EASY, 2.0)

    def test_transfer_mass_cap(self):
        profile = make_profile(transfer_mass=1.0)
        profile.observe_history('agent_b', 'code', EASY, 8, 2)
        with pytest.raises(InvalidParameterError):
            cold_start_transfer(profile, 'agent_b', 'code', HARD, EASY, 2.0)

    def test_transfer_shift_identity(self):
        grid = itertools.product([0.5, 1.0, 2.0, 4.0, 8.0], [0, 1, 5, 20, 100], [0.5, 1.0, 1.5, 2.0])
        for kappa, n, m in grid:
            q = (kappa + n + m) % 1.0
            successes = n // 3
            alpha0 = kappa * 0.3 + successes
            beta0 = kappa * 0.7 + (n - successes)
            mu0 = alpha0 / (alpha0 + beta0)
            after = (alpha0 + m * q) / (alpha0 + beta0 + m)
            assert after - mu0 == pytest.approx(transfer_shift(kappa, n, m, q, mu0), abs=1e-12)
            assert abs(after - mu0) <= transfer_bias_bound(m, n, q - mu0) + 1e-12


class TestDivergence:
    """Tests for belief divergence and the misreport bound."""

    def test_needs_two_profiles(self):
        with pytest.raises(InvalidInputError):
            belief_divergence([make_profile()])

    def test_identical_profiles(self):
        first, second = make_profile('agent_a'), make_profile('agent_b')
        first.cell('agent_a', 'code', EASY)
        second.cell('agent_a', 'code', EASY)
        assert belief_divergence([first, second]) == 0.0

    def test_divergence(self):
        first, second = make_profile('agent_a'), make_profile('agent_b')
        update_outcome(first, 'agent_a', 'code', EASY, 1)
        second.cell('agent_a', 'code', EASY)
        second.cell('agent_b', 'code', EASY)
        assert belief_divergence([first, second]) == pytest.approx(2.0 / 3.0 - 0.5, abs=1e-12)

    def test_unshared_cells_are_ignored(self):
        first, second = make_profile('agent_a'), make_profile('agent_b')
        update_outcome(first, 'agent_a', 'code', EASY, 1)
        update_outcome(second, 'agent_b', 'code', HARD, 0)
        assert belief_divergence([first, second]) == 0.0

    def test_misreport_gap(self):
        assert misreport_gap(2.0, 0.9, 0.5, 0) == pytest.approx(0.4, abs=1e-12)
        assert misreport_gap(2.0, 0.9, 0.5, 18) == pytest.approx(0.04, abs=1e-12)
        gaps = [misreport_gap(2.0, 0.9, 0.5, n) for n in range(0, 200, 10)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    def test_misreport_gap_matches_posteriors(self):
        inflated, honest = init_prior(0.9, 2.0), init_prior(0.5, 2.0)
        for cell in (inflated, honest):
            cell.alpha += 6
            cell.beta += 4
            cell.n += 10
        gap = posterior_mean(inflated) - posterior_mean(honest)
        assert gap == pytest.approx(misreport_gap(2.0, 0.9, 0.5, 10), abs=1e-12)

    def test_lcb_below_mean(self):
        cell = BetaParams(3.0, 5.0)
        assert trust.lcb(cell, 0.5) == pytest.approx(posterior_mean(cell) - 0.5 * math.sqrt(posterior_variance(cell)))


def feed(rate, n, seed, c_self=0.5):
    profile = make_profile()
    profile.declarations[('agent_b', 'code', EASY)] = c_self
    for outcome in np.random.default_rng(seed).random(n) < rate:
        update_outcome(profile, 'agent_b', 'code', EASY, outcome)
    return profile.cell('agent_b', 'code', EASY)


class TestPosteriorBehaviour:
    """Sampling behaviour of the posterior under repeated outcomes."""

    def test_error_shrinks_with_root_n(self):
        errors = {}
        for n in (10, 100, 1000):
            errors[n] = np.mean([abs(posterior_mean(feed(0.7, n, seed)) - 0.7) for seed in range(200)])
        assert errors[100] < errors[10] / 2.0
        assert errors[1000] < errors[100] / 2.0
        for n, error in errors.items():
            assert 0.2 <= error * math.sqrt(n) <= 0.6

    def test_variance_shrinks(self):
        for seed in range(20):
            assert posterior_variance(feed(0.7, 1000, seed)) < posterior_variance(feed(0.7, 10, seed))

    @pytest.mark.parametrize('rate,c_self', [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5), (0.9, 0.2)])
    def test_moments_stay_inside_bounds(self, rate, c_self):
        for n in (0, 1, 10, 500):
            cell = feed(rate, n, seed=n, c_self=c_self)
            assert 0.0 < posterior_mean(cell) < 1.0
            assert 0.0 < posterior_variance(cell) < 0.25

    def test_update_recovers_rate(self):
        close = sum(abs(posterior_mean(feed(0.7, 1000, seed)) - 0.7) <= 0.05 for seed in range(100))
        assert close >= 95

    @pytest.mark.parametrize('c_inflated', [0.7, 0.9, 1.0])
    def test_misreport_washes_out(self, c_inflated):
        inflated = feed(0.3, 100, seed=7, c_self=c_inflated)
        honest = feed(0.3, 100, seed=7, c_self=0.3)
        assert abs(posterior_mean(inflated) - posterior_mean(honest)) < 0.02
        assert misreport_gap(2.0, c_inflated, 0.3, 100) < 0.02
