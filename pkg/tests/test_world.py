#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for the simulated world of `calibroute`."""

import numpy as np
import pytest

from calibroute.models import ContextBucket, EASY, HARD
from calibroute.world import (WorldModel, DriftPattern, TaskSpec, Scenario, build_world, generate_tasks,
                              sample_outcome, corrupt_tag, effective_probability, project_bucket, RQ5_BUCKET,
                              RQ5_SKILL_WEIGHTS, SPARSE)
from calibroute.trust import neighbor_buckets
from calibroute.exceptions import ConfigError, InvalidParameterError

target = ('specialist_1', 'code', RQ5_BUCKET)


def drifting_world(kind, **kwargs):
    return WorldModel({target: 0.9}, drift=DriftPattern(kind, target, **kwargs))


class TestDrift:
    """Tests for DriftPattern Class."""

    @pytest.mark.parametrize('t,expected', [(0, 0.9), (249, 0.9), (250, 0.2), (499, 0.2)])
    def test_sudden(self, t, expected):
        assert effective_probability(drifting_world('sudden'), *target, t=t) == pytest.approx(expected)

    @pytest.mark.parametrize('t,expected', [(0, 0.9), (49, 0.9), (50, 0.8), (120, 0.7), (1000, 0.05)])
    def test_gradual(self, t, expected):
        assert effective_probability(drifting_world('gradual'), *target, t=t) == pytest.approx(expected)

    @pytest.mark.parametrize('t,expected', [(0, 0.9), (25, 0.95), (50, 0.9), (75, 0.6), (100, 0.9)])
    def test_oscillation(self, t, expected):
        assert effective_probability(drifting_world('oscillation'), *target, t=t) == pytest.approx(expected)

    @pytest.mark.parametrize('kind', ['sudden', 'gradual', 'oscillation'])
    def test_probabilities_stay_bounded(self, kind):
        world = drifting_world(kind)
        values = [world.effective_probability(*target, t=t) for t in range(1000)]
        assert all(0.0 <= value <= 1.0 for value in values)

    def test_no_drift_elsewhere(self):
        world = WorldModel({target: 0.9, ('generalist', 'code', RQ5_BUCKET): 0.55},
                           drift=DriftPattern('sudden', target))
        assert world.effective_probability('generalist', 'code', RQ5_BUCKET, 400) == 0.55

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            DriftPattern('exponential', target)
        with pytest.raises(InvalidParameterError):
            WorldModel({target: 1.2})
        with pytest.raises(InvalidParameterError):
            WorldModel({target: 0.5}, sigma=-0.1)

    def test_clock(self):
        world = WorldModel({target: 0.5})
        world.advance(3)
        assert world.clock == 3
        with pytest.raises(InvalidParameterError):
            world.advance(2)


class TestOutcomes:
    """Tests for the Bernoulli judge and the context tagger."""

    def test_certain_outcomes(self):
        rng = np.random.default_rng(0)
        world = WorldModel({('a', 'code', EASY): 1.0, ('b', 'code', EASY): 0.0})
        assert all(sample_outcome(world, 'a', 'code', EASY, t, rng) == 1 for t in range(200))
        assert all(sample_outcome(world, 'b', 'code', EASY, t, rng) == 0 for t in range(200))

    def test_plain_bernoulli(self):
        rng = np.random.default_rng(1)
        world = WorldModel({('a', 'code', EASY): 0.3})
        draws = [sample_outcome(world, 'a', 'code', EASY, 0, rng) for _ in range(20000)]
        assert np.mean(draws) == pytest.approx(0.3, abs=0.015)

    def test_clamped_noise(self):
        rng = np.random.default_rng(2)
        world = WorldModel({('a', 'code', EASY): 0.95}, sigma=0.1)
        draws = [sample_outcome(world, 'a', 'code', EASY, 0, rng) for _ in range(100000)]
        # E[min(0.95 + U(-0.1, 0.1), 1)]
        assert np.mean(draws) == pytest.approx(0.94375, abs=0.005)

    def test_corrupt_tag_identity(self):
        rng = np.random.default_rng(3)
        assert all(corrupt_tag(EASY, 1.0, [EASY, HARD], rng) == EASY for _ in range(100))
        assert all(corrupt_tag(EASY, 0.0, [EASY], rng) == EASY for _ in range(100))

    def test_corrupt_tag_forced_flip(self):
        rng = np.random.default_rng(4)
        assert all(corrupt_tag(EASY, 0.0, [EASY, HARD], rng) == HARD for _ in range(100))

    def test_corrupt_tag_frequency(self):
        rng = np.random.default_rng(5)
        tags = [corrupt_tag(HARD, 0.85, [EASY, HARD], rng) for _ in range(100000)]
        assert np.mean([tag == HARD for tag in tags]) == pytest.approx(0.85, abs=0.01)

    def test_corrupt_tag_spreads_over_others(self):
        rng = np.random.default_rng(6)
        medium = ContextBucket('medium', 'isolated', 'no')
        tags = [corrupt_tag(EASY, 0.0, [EASY, HARD, medium], rng) for _ in range(3000)]
        assert EASY not in tags
        assert np.mean([tag == HARD for tag in tags]) == pytest.approx(0.5, abs=0.05)

    @pytest.mark.parametrize('granularity,expected', [(None, HARD), (12, HARD),
                                                      (3, ContextBucket('hard', 'isolated', 'no')),
                                                      (1, ContextBucket('medium', 'isolated', 'no'))])
    def test_project_bucket(self, granularity, expected):
        assert project_bucket(HARD, granularity) == expected


class TestTaskStream:
    """Tests for task generation."""

    def test_point_mass(self):
        spec = TaskSpec({EASY: 1.0}, {EASY: ('code',)})
        tasks = generate_tasks(spec, 50, np.random.default_rng(0))
        assert len(tasks) == 50
        assert all(sub.bucket == sub.true_bucket == EASY for task in tasks for sub in task)
        assert [task.t for task in tasks] == list(range(50))

    def test_shift_protocol(self):
        spec = TaskSpec({HARD: 1.0}, {EASY: ('code',), HARD: ('code',)}, warmup={EASY: 1.0}, shift_at=100)
        tasks = generate_tasks(spec, 200, np.random.default_rng(1))
        assert all(task[0].true_bucket == EASY for task in tasks[:100])
        assert all(task[0].true_bucket == HARD for task in tasks[100:])

    def test_mixture_counts(self):
        spec = TaskSpec({EASY: 0.3, HARD: 0.7}, {EASY: ('code',), HARD: ('code',)})
        tasks = generate_tasks(spec, 4000, np.random.default_rng(2))
        assert np.mean([task[0].true_bucket == HARD for task in tasks]) == pytest.approx(0.7, abs=0.03)

    def test_subtasks_per_task(self):
        spec = TaskSpec({EASY: 1.0}, {EASY: ('code', 'search')}, subtasks_per_task=3)
        tasks = generate_tasks(spec, 10, np.random.default_rng(3))
        assert all(len(task) == 3 for task in tasks)
        assert tasks[4][2].id == 'task-0004.2'
        assert set(sub.skill for task in tasks for sub in task) == {'code', 'search'}

    def test_weighted_skills(self):
        spec = TaskSpec({RQ5_BUCKET: 1.0}, {RQ5_BUCKET: dict(RQ5_SKILL_WEIGHTS)})
        skills = [task[0].skill for task in generate_tasks(spec, 5000, np.random.default_rng(5))]
        for skill, weight in RQ5_SKILL_WEIGHTS.items():
            assert skills.count(skill) / 5000.0 == pytest.approx(weight, abs=0.025)

    def test_tag_noise_keeps_skill(self):
        spec = TaskSpec({EASY: 0.5, HARD: 0.5}, {EASY: ('code',), HARD: ('search',)}, tagger_accuracy=0.5)
        tasks = generate_tasks(spec, 500, np.random.default_rng(4))
        subs = [sub for task in tasks for sub in task]
        assert any(sub.bucket != sub.true_bucket for sub in subs)
        assert all(sub.skill == ('code' if sub.true_bucket == EASY else 'search') for sub in subs)

    def test_determinism(self):
        scenario = build_world('rq1_flip', tagger_accuracy=0.8)
        first = generate_tasks(scenario.spec, 200, np.random.default_rng(42))
        second = generate_tasks(scenario.spec, 200, np.random.default_rng(42))
        assert [(s.skill, s.bucket, s.true_bucket) for task in first for s in task] == \
            [(s.skill, s.bucket, s.true_bucket) for task in second for s in task]

    def test_invalid_spec(self):
        with pytest.raises(InvalidParameterError):
            TaskSpec({EASY: -1.0}, {EASY: ('code',)})
        with pytest.raises(InvalidParameterError):
            TaskSpec({EASY: 1.0}, {EASY: ('code',)}, subtasks_per_task=0)


class TestPresets:
    """Tests for the scenario presets."""

    def test_rq1_flip(self):
        scenario = build_world('rq1_flip')
        truth = scenario.world.truth
        assert truth[('agent_a', 'code', EASY)] == 0.90
        assert truth[('agent_a', 'code', HARD)] == 0.25
        assert truth[('agent_b', 'code', EASY)] == 0.25
        assert truth[('agent_b', 'code', HARD)] == 0.90
        assert scenario.event_at == 100
        assert isinstance(scenario, Scenario)

    def test_rq1_sparse_oracle_is_generalist(self):
        scenario = build_world('rq1_sparse')
        assert scenario.world.best_agent(scenario.agents, 'code', SPARSE, 0) == 'generalist'
        assert scenario.world.best_agent(scenario.agents, 'code', EASY, 0) == 'specialist_1'
        assert scenario.history == [('generalist', 'code', SPARSE, 800, 1200)]
        assert scenario.declarations[('specialist_2', 'code', SPARSE)] == 0.01
        assert SPARSE in neighbor_buckets(EASY)

    @pytest.mark.parametrize('k', [2, 5, 20])
    def test_rq1_scaling(self, k):
        scenario = build_world('rq1_scaling', k=k)
        assert len(scenario.agents) == k
        assert scenario.world.best_agent(scenario.agents, 'code', EASY, 0) == 'specialist_00'
        assert scenario.world.best_agent(scenario.agents, 'code', HARD, 0) == 'specialist_01'
        assert all(0.25 <= p <= 0.90 for p in scenario.world.truth.values())

    def test_rq1_scaling_needs_two_agents(self):
        with pytest.raises(InvalidParameterError):
            build_world('rq1_scaling', k=1)

    def test_rq5(self):
        scenario = build_world('rq5', drift='sudden')
        world = scenario.world
        assert len(scenario.agents) == 5
        assert scenario.tasks == 500
        assert scenario.event_at == 250
        assert world.best_agent(scenario.agents, 'code', RQ5_BUCKET, 249) == 'specialist_1'
        assert world.best_agent(scenario.agents, 'code', RQ5_BUCKET, 250) == 'specialist_2'
        assert world.best_agent(scenario.agents, 'math', RQ5_BUCKET, 250) == 'specialist_3'
        assert world.effective_probability('specialist_2', 'code', RQ5_BUCKET, 250) > \
            world.effective_probability('generalist', 'code', RQ5_BUCKET, 250)
        known = dict(((a, s), (wins, losses)) for a, s, _, wins, losses in scenario.history)
        assert known[('specialist_1', 'code')] == (90, 10)
        assert known[('generalist', 'code')] == (82, 18)
        assert ('generalist', 'math') not in known

    def test_regret_demo_precondition(self):
        scenario = build_world('regret_demo')
        truth, mixture = scenario.world.truth, scenario.spec.mixture
        assert truth[('agent_a', 'code', HARD)] > truth[('agent_b', 'code', HARD)]
        average = dict((agent, sum(w * truth[(agent, 'code', b)] for b, w in mixture.items()))
                       for agent in ('agent_a', 'agent_b'))
        assert average['agent_a'] < average['agent_b']
        assert scenario.world.sigma == 0.2

    def test_overrides(self):
        scenario = build_world('regret_demo', sigma=0.0, tagger_accuracy=0.7)
        assert scenario.world.sigma == 0.0
        assert scenario.spec.tagger_accuracy == 0.7

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            build_world('rq9')
        with pytest.raises(ConfigError):
            build_world('rq1_flip', k=3)

    def test_fine_granularity(self):
        scenario = build_world('rq1_flip', granularity=12)
        assert len(scenario.world.truth) == 16
        assert sum(scenario.spec.mixture.values()) == pytest.approx(1.0)
        assert len(scenario.spec.universe) == 8
        assert scenario.world.truth[('agent_b', 'code', ContextBucket('hard', 'isolated', 'no'))] == 0.90
        assert len(scenario.focus['hard'][1]) == 4

    @pytest.mark.parametrize('granularity', [1, 3])
    def test_coarse_granularity(self, granularity):
        scenario = build_world('rq1_flip', granularity=granularity)
        tasks = generate_tasks(scenario.spec, 300, np.random.default_rng(0))
        observed = set(sub.bucket for task in tasks for sub in task)
        assert observed == set(project_bucket(b, granularity) for b in (EASY, HARD))
        assert set(sub.true_bucket for task in tasks for sub in task) == {EASY, HARD}

    def test_coarsest_declarations_are_averaged(self):
        scenario = build_world('rq1_flip', granularity=1)
        medium = ContextBucket('medium', 'isolated', 'no')
        assert scenario.declarations[('agent_a', 'code', medium)] == pytest.approx(0.575)

    def test_granularity_needs_stationary_world(self):
        with pytest.raises(ConfigError):
            build_world('rq5', granularity=3)
