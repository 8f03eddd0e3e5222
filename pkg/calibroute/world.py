# -*- coding: utf-8 -*-

"""Simulated world: ground-truth success probabilities, drift, outcome noise, tagging noise,
task streams and the named scenario presets.

"""

import math

from .models import ContextBucket, Subtask, Task, EASY, HARD
from .delegation import SkillRegistry
from .exceptions import InvalidParameterError, ConfigError
from .utils import logger

P_FLOOR = 0.05
P_CEILING = 0.95
DRIFT_KINDS = ('sudden', 'gradual', 'oscillation')
GRANULARITIES = (1, 3, 12)


def _check_probability(value, name='probability'):
    if not 0.0 <= value <= 1.0:
        raise InvalidParameterError('{0} must be in [0, 1], got {1}'.format(name, value))
    return float(value)


class DriftPattern(object):
    """
    Time-varying success probability of one (agent, skill, bucket) target.

    :param kind: string.
        'sudden', 'gradual' or 'oscillation'.
    :param target: tuple.
        (agent, skill, bucket).
    :param shift_time: integer.
        sudden: first task index at the new probability.
    :param new_p: float.
        sudden: probability from shift_time on.
    :param decay_step: float.
        gradual: absolute decrement per interval.
    :param interval: integer.
        gradual: tasks per decrement.
    :param amplitude: float.
        oscillation: sine amplitude.
    :param period: integer.
        oscillation: tasks per cycle.
    """
    __slots__ = ('kind', 'target', 'shift_time', 'new_p', 'decay_step', 'interval', 'amplitude', 'period')

    def __init__(self, kind, target, shift_time=250, new_p=0.2, decay_step=0.10, interval=50, amplitude=0.3,
                 period=100):
        if kind not in DRIFT_KINDS:
            raise InvalidParameterError('Unknown drift kind {0}'.format(kind))
        if interval < 1 or period < 1:
            raise InvalidParameterError('Drift interval and period must be positive')
        self.kind = kind
        self.target = target
        self.shift_time = shift_time
        self.new_p = _check_probability(new_p, 'new_p')
        self.decay_step = decay_step
        self.interval = interval
        self.amplitude = amplitude
        self.period = period

    def __repr__(self):
        return '{0}.{1}({2}, {3})'.format(__name__, self.__class__.__name__, self.kind, self.target)

    @property
    def event_at(self):
        """First task index at which the target differs from its base probability."""
        if self.kind == 'sudden':
            return self.shift_time
        if self.kind == 'gradual':
            return self.interval
        return 1

    def apply(self, base, t):
        if self.kind == 'sudden':
            return self.new_p if t >= self.shift_time else base
        if self.kind == 'gradual':
            return max(base - self.decay_step * (t // self.interval), P_FLOOR)
        value = base + self.amplitude * math.sin(2.0 * math.pi * t / self.period)
        return min(max(value, P_FLOOR), P_CEILING)


class WorldModel(object):
    """
    Ground truth of the simulation.

    :param truth: dict.
        (agent, skill, bucket) -> base success probability.
    :param sigma: float.
        Half-width of the uniform outcome noise.
    :param drift: DriftPattern or None.
    """
    __slots__ = ('truth', 'sigma', 'drift', 'clock')

    def __init__(self, truth, sigma=0.0, drift=None):
        if sigma < 0:
            raise InvalidParameterError('sigma must be non-negative, got {0}'.format(sigma))
        self.truth = dict((key, _check_probability(p)) for key, p in truth.items())
        self.sigma = float(sigma)
        self.drift = drift
        self.clock = 0

    def __repr__(self):
        return '{0}.{1}(cells={2}, sigma={3})'.format(__name__, self.__class__.__name__, len(self.truth), self.sigma)

    @property
    def agents(self):
        return sorted(set(key[0] for key in self.truth))

    def advance(self, t):
        if t < self.clock:
            raise InvalidParameterError('World clock cannot go back from {0} to {1}'.format(self.clock, t))
        self.clock = t

    def base_probability(self, agent, skill, bucket):
        return self.truth.get((agent, skill, bucket), 0.0)

    def effective_probability(self, agent, skill, bucket, t):
        """
        Base probability transformed by the active drift at task index t.

        :return: float.
        """
        base = self.base_probability(agent, skill, bucket)
        if self.drift is not None and self.drift.target == (agent, skill, bucket):
            return self.drift.apply(base, t)
        return base

    def best_agent(self, agents, skill, bucket, t):
        """Agent with the highest effective probability, ties to the lowest id."""
        best = None
        for agent in sorted(agents):
            if best is None or self.effective_probability(agent, skill, bucket, t) > \
                    self.effective_probability(best, skill, bucket, t):
                best = agent
        return best


def effective_probability(world, agent, skill, bucket, t):
    return world.effective_probability(agent, skill, bucket, t)


def sample_outcome(world, agent, skill, true_bucket, t, rng):
    """
    Judges one execution: p' = clamp(p + eps, 0, 1) with eps ~ U(-sigma, sigma), then Bernoulli(p').
    The noise draw is taken even when sigma is 0 so streams stay aligned across noise levels.

    :param world: WorldModel.
    :param agent: agent id.
    :param skill: string.
    :param true_bucket: ContextBucket.
    :param t: integer.
    :param rng: numpy.random.Generator.
    :return: integer.
        1 on success, 0 on failure.
    """
    p = world.effective_probability(agent, skill, true_bucket, t)
    eps = rng.uniform(-world.sigma, world.sigma)
    p = min(max(p + eps, 0.0), 1.0)
    return int(rng.random() < p)


def corrupt_tag(true_bucket, tagger_accuracy, bucket_universe, rng):
    """
    Noisy context tagger: keeps the true bucket with probability tagger_accuracy, otherwise
    returns one of the other active buckets uniformly.

    :param true_bucket: ContextBucket.
    :param tagger_accuracy: float.
    :param bucket_universe: iterable of ContextBucket.
    :param rng: numpy.random.Generator.
    :return: ContextBucket.
    """
    _check_probability(tagger_accuracy, 'tagger_accuracy')
    others = sorted(bucket for bucket in set(bucket_universe) if bucket != true_bucket)
    if not others or tagger_accuracy >= 1.0:
        return true_bucket
    if rng.random() < tagger_accuracy:
        return true_bucket
    return others[int(rng.integers(len(others)))]


def project_bucket(bucket, granularity):
    """
    Observed bucket at a coarser tagging granularity: 3 keeps only difficulty, 1 keeps nothing.

    :return: ContextBucket.
    """
    if granularity == 3:
        return ContextBucket(bucket.difficulty, 'isolated', 'no')
    if granularity == 1:
        return ContextBucket('medium', 'isolated', 'no')
    return bucket


class TaskSpec(object):
    """
    Task stream description.

    :param mixture: dict.
        Bucket -> weight of the evaluation phase.
    :param skills: dict.
        Bucket -> tuple of skills drawn uniformly for subtasks in that bucket, or dict skill -> weight.
    :param subtasks_per_task: integer.
    :param tagger_accuracy: float.
    :param warmup: dict or None.
        Bucket -> weight used for the first shift_at tasks.
    :param shift_at: integer.
        Index of the first evaluation-phase task.
    :param granularity: integer or None.
        Tagging granularity (1, 3 or 12); None tags buckets as they are.
    """
    __slots__ = ('mixture', 'skills', 'subtasks_per_task', 'tagger_accuracy', 'warmup', 'shift_at', 'granularity')

    def __init__(self, mixture, skills, subtasks_per_task=1, tagger_accuracy=1.0, warmup=None, shift_at=0,
                 granularity=None):
        for weights in (mixture, warmup or {}):
            if any(w < 0 for w in weights.values()) or (weights and sum(weights.values()) <= 0):
                raise InvalidParameterError('Mixture weights must be non-negative and not all zero')
        if subtasks_per_task < 1:
            raise InvalidParameterError('subtasks_per_task must be at least 1')
        if granularity not in (None,) + GRANULARITIES:
            raise InvalidParameterError('granularity must be one of {0}'.format(GRANULARITIES))
        self.mixture = mixture
        self.skills = skills
        self.subtasks_per_task = subtasks_per_task
        self.tagger_accuracy = _check_probability(tagger_accuracy, 'tagger_accuracy')
        self.warmup = warmup
        self.shift_at = shift_at if warmup else 0
        self.granularity = granularity

    def __repr__(self):
        return '{0}.{1}({2})'.format(__name__, self.__class__.__name__, sorted(b.label for b in self.universe))

    @property
    def universe(self):
        buckets = set(b for b, w in self.mixture.items() if w > 0)
        if self.warmup:
            buckets.update(b for b, w in self.warmup.items() if w > 0)
        return sorted(buckets)

    def mixture_at(self, t):
        return self.warmup if self.warmup and t < self.shift_at else self.mixture

    def observe(self, true_bucket, rng):
        tagged = corrupt_tag(true_bucket, self.tagger_accuracy, self.universe, rng)
        return project_bucket(tagged, self.granularity)


def _draw_skill(choices, rng):
    if isinstance(choices, dict):
        names = sorted(choices)
        total = float(sum(choices.values()))
        return names[int(rng.choice(len(names), p=[choices[s] / total for s in names]))]
    return choices[int(rng.integers(len(choices)))] if len(choices) > 1 else choices[0]


def generate_tasks(spec, n, rng):
    """
    Draws the task stream shared by every policy of a seed.

    :param spec: TaskSpec.
    :param n: integer.
        Number of tasks.
    :param rng: numpy.random.Generator.
    :return: list of Task.
    """
    tasks = []
    for t in range(n):
        mixture = spec.mixture_at(t)
        buckets = sorted(mixture)
        total = float(sum(mixture.values()))
        weights = [mixture[b] / total for b in buckets]
        subtasks = []
        for k in range(spec.subtasks_per_task):
            true_bucket = buckets[int(rng.choice(len(buckets), p=weights))]
            skill = _draw_skill(spec.skills[true_bucket], rng)
            observed = spec.observe(true_bucket, rng)
            subtasks.append(Subtask('task-{0:04d}.{1}'.format(t, k), skill, observed, true_bucket))
        tasks.append(Task('task-{0:04d}'.format(t), t, subtasks))
    return tasks


class Scenario(object):
    """
    A ready-to-run world: ground truth, task stream description, registry, self-reports
    and the focus slices the metrics break out.

    :param name: string.
    :param world: WorldModel.
    :param spec: TaskSpec.
    :param registry: SkillRegistry.
    :param declarations: dict.
        (agent, skill, bucket) -> self-declared confidence.
    :param history: list.
        (agent, skill, bucket, successes, failures) track records pre-loaded into contextual profiles.
    :param focus: dict.
        Name -> (skill or None, frozenset of true buckets).
    :param generalist: agent id or None.
    :param tasks: integer.
        Default stream length.
    """
    __slots__ = ('name', 'world', 'spec', 'registry', 'declarations', 'history', 'focus', 'generalist', 'tasks')

    def __init__(self, name, world, spec, registry, declarations, history=None, focus=None, generalist=None,
                 tasks=200):
        self.name = name
        self.world = world
        self.spec = spec
        self.registry = registry
        self.declarations = declarations
        self.history = history if history is not None else []
        self.focus = focus if focus is not None else {}
        self.generalist = generalist
        self.tasks = tasks

    def __repr__(self):
        return '{0}.{1}({2})'.format(__name__, self.__class__.__name__, self.name)

    @property
    def agents(self):
        return self.registry.agents

    @property
    def event_at(self):
        """Task index of the drift or the mixture shift, None for stationary scenarios."""
        if self.world.drift is not None:
            return self.world.drift.event_at
        if self.spec.warmup:
            return self.spec.shift_at
        return None


def _honest(truth):
    return dict(truth)


def rq1_flip():
    """Two agents whose competence flips between an easy and a hard bucket."""
    truth = {('agent_a', 'code', EASY): 0.90, ('agent_a', 'code', HARD): 0.25,
             ('agent_b', 'code', EASY): 0.25, ('agent_b', 'code', HARD): 0.90}
    spec = TaskSpec({EASY: 0.5, HARD: 0.5}, {EASY: ('code',), HARD: ('code',)}, warmup={EASY: 1.0}, shift_at=100)
    registry = SkillRegistry({'agent_a': ['code'], 'agent_b': ['code']})
    return Scenario('rq1_flip', WorldModel(truth), spec, registry, _honest(truth),
                    focus={'hard': ('code', frozenset([HARD]))})


SPARSE = ContextBucket('medium', 'isolated', 'no')


def rq1_sparse():
    """
    Specialists meet an unseen bucket next to the easy one, where a generalist with a track record is best.

    The specialists hold no data there and self-report almost no confidence, so only their own
    profiles, through cold-start transfer from their easy record, see them as plausible there.
    """
    agents = ('generalist', 'specialist_1', 'specialist_2')
    truth = {('generalist', 'code', EASY): 0.60, ('generalist', 'code', SPARSE): 0.40}
    declarations = {('generalist', 'code', EASY): 0.30, ('generalist', 'code', SPARSE): 0.40}
    for agent in agents[1:]:
        truth[(agent, 'code', EASY)] = 0.90
        truth[(agent, 'code', SPARSE)] = 0.35
        declarations[(agent, 'code', EASY)] = 0.90
        declarations[(agent, 'code', SPARSE)] = 0.01
    spec = TaskSpec({EASY: 0.5, SPARSE: 0.5}, {EASY: ('code',), SPARSE: ('code',)}, warmup={EASY: 1.0},
                    shift_at=100)
    registry = SkillRegistry(dict((agent, ['code']) for agent in agents))
    return Scenario('rq1_sparse', WorldModel(truth), spec, registry, declarations,
                    history=[('generalist', 'code', SPARSE, 800, 1200)],
                    focus={'sparse': ('code', frozenset([SPARSE]))}, generalist='generalist')


def rq1_scaling(k=20):
    """
    k specialists: specialist_00 is best in the easy bucket, specialist_01 in the hard one,
    the others sit evenly in [0.30, 0.60] everywhere.

    :param k: integer.
        Number of agents, at least 2.
    """
    k = int(k)
    if k < 2:
        raise InvalidParameterError('rq1_scaling needs at least 2 agents, got {0}'.format(k))
    truth = {}
    for j in range(k):
        agent = 'specialist_{0:02d}'.format(j)
        if j == 0:
            easy, hard = 0.90, 0.25
        elif j == 1:
            easy, hard = 0.25, 0.90
        else:
            easy = hard = 0.30 + 0.30 * (j - 2) / max(k - 2, 1)
        truth[(agent, 'code', EASY)] = easy
        truth[(agent, 'code', HARD)] = hard
    spec = TaskSpec({EASY: 0.5, HARD: 0.5}, {EASY: ('code',), HARD: ('code',)})
    registry = SkillRegistry(dict((key[0], ['code']) for key in truth))
    return Scenario('rq1_scaling', WorldModel(truth), spec, registry, _honest(truth),
                    focus={'hard': ('code', frozenset([HARD])), 'easy': ('code', frozenset([EASY]))})


RQ5_SKILLS = ('code', 'search', 'math', 'planning')
RQ5_BUCKET = ContextBucket('medium', 'isolated', 'no')
RQ5_SKILL_WEIGHTS = {'code': 0.4, 'search': 0.2, 'math': 0.2, 'planning': 0.2}
TRACK_RECORD = 100


def rq5(drift='sudden'):
    """
    One generalist and four specialists while specialist_1 drifts on code.

    specialist_2 is the runner-up on code, just ahead of the generalist. The cells every agent
    is known for come with a track record of TRACK_RECORD outcomes at their base probability.

    :param drift: string.
        'sudden', 'gradual' or 'oscillation'.
    """
    truth = {}
    for skill in RQ5_SKILLS:
        truth[('generalist', skill, RQ5_BUCKET)] = 0.82
        for i, own in enumerate(RQ5_SKILLS):
            truth[('specialist_{0}'.format(i + 1), skill, RQ5_BUCKET)] = 0.90 if skill == own else 0.30
    truth[('specialist_2', 'code', RQ5_BUCKET)] = 0.85
    known = [('generalist', 'code'), ('specialist_2', 'code')]
    known += [('specialist_{0}'.format(i + 1), own) for i, own in enumerate(RQ5_SKILLS)]
    history = []
    for agent, skill in sorted(known):
        wins = int(round(truth[(agent, skill, RQ5_BUCKET)] * TRACK_RECORD))
        history.append((agent, skill, RQ5_BUCKET, wins, TRACK_RECORD - wins))
    target = ('specialist_1', 'code', RQ5_BUCKET)
    spec = TaskSpec({RQ5_BUCKET: 1.0}, {RQ5_BUCKET: dict(RQ5_SKILL_WEIGHTS)})
    registry = SkillRegistry(dict((key[0], RQ5_SKILLS) for key in truth), RQ5_SKILLS)
    return Scenario('rq5', WorldModel(truth, drift=DriftPattern(drift, target)), spec, registry, _honest(truth),
                    history=history, focus={'drift': ('code', frozenset([RQ5_BUCKET]))}, generalist='generalist',
                    tasks=500)


def regret_demo():
    """An agent that is best in a rare bucket but worse on average, under outcome noise."""
    truth = {('agent_a', 'code', HARD): 0.80, ('agent_a', 'code', EASY): 0.50,
             ('agent_b', 'code', HARD): 0.60, ('agent_b', 'code', EASY): 0.90}
    spec = TaskSpec({HARD: 0.3, EASY: 0.7}, {EASY: ('code',), HARD: ('code',)})
    registry = SkillRegistry({'agent_a': ['code'], 'agent_b': ['code']})
    return Scenario('regret_demo', WorldModel(truth, sigma=0.2), spec, registry, _honest(truth),
                    focus={'rare': ('code', frozenset([HARD]))})


PRESETS = {
    'rq1_flip': rq1_flip,
    'rq1_sparse': rq1_sparse,
    'rq1_scaling': rq1_scaling,
    'rq5': rq5,
    'regret_demo': regret_demo,
}


def _variants(bucket):
    return [ContextBucket(bucket.difficulty, dependency, tool_use)
            for dependency in ('isolated', 'chained') for tool_use in ('no', 'yes')]


def refine(scenario, granularity):
    """
    Re-buckets a scenario for a tagging granularity.

    12 spreads every true bucket over its four dependency and tool_use variants with the same
    probabilities. 3 and 1 keep the truth but tag coarser, averaging self-reports that collapse
    onto the same observed bucket.

    :param scenario: Scenario.
    :param granularity: integer.
    :return: Scenario.
    """
    if granularity is None:
        return scenario
    if granularity not in GRANULARITIES:
        raise InvalidParameterError('granularity must be one of {0}'.format(GRANULARITIES))
    if scenario.world.drift is not None:
        raise ConfigError('Bucket granularity needs a scenario without drift')
    spec = scenario.spec
    if granularity == 12:
        truth = dict(((a, s, v), p) for (a, s, b), p in scenario.world.truth.items() for v in _variants(b))
        declarations = dict(((a, s, v), c) for (a, s, b), c in scenario.declarations.items()
                            for v in (_variants(b) if b is not None else [None]))

        def spread(weights):
            return dict((v, w / 4.0) for b, w in weights.items() for v in _variants(b)) if weights else weights

        skills = dict((v, choices) for b, choices in spec.skills.items() for v in _variants(b))
        spec = TaskSpec(spread(spec.mixture), skills, spec.subtasks_per_task, spec.tagger_accuracy,
                        spread(spec.warmup), spec.shift_at, granularity)
        focus = dict((name, (skill, frozenset(v for b in buckets for v in _variants(b))))
                     for name, (skill, buckets) in scenario.focus.items())
        world = WorldModel(truth, scenario.world.sigma)
        history = scenario.history
    else:
        grouped = {}
        for (a, s, b), c in scenario.declarations.items():
            key = (a, s, project_bucket(b, granularity) if b is not None else None)
            grouped.setdefault(key, []).append(c)
        declarations = dict((key, sum(values) / len(values)) for key, values in grouped.items())
        spec = TaskSpec(spec.mixture, spec.skills, spec.subtasks_per_task, spec.tagger_accuracy, spec.warmup,
                        spec.shift_at, granularity)
        history = [(a, s, project_bucket(b, granularity), wins, losses) for a, s, b, wins, losses in scenario.history]
        world = scenario.world
        focus = scenario.focus
    logger.debug('{0} refined to granularity {1}'.format(scenario.name, granularity))
    return Scenario(scenario.name, world, spec, scenario.registry, declarations, history, focus,
                    scenario.generalist, scenario.tasks)


def build_world(preset, sigma=None, tagger_accuracy=1.0, granularity=None, **preset_args):
    """
    Builds a named scenario.

    :param preset: string.
        One of PRESETS.
    :param sigma: float or None.
        Outcome noise half-width; None keeps the preset's own level.
    :param tagger_accuracy: float.
    :param granularity: integer or None.
    :param preset_args: keyword arguments of the preset (k for rq1_scaling, drift for rq5).
    :return: Scenario.
    """
    if preset not in PRESETS:
        raise ConfigError('Unknown preset {0}, expected one of {1}'.format(preset, sorted(PRESETS)))
    try:
        scenario = PRESETS[preset](**preset_args)
    except TypeError as e:
        raise ConfigError('Invalid arguments for preset {0}: {1}'.format(preset, e))
    if sigma is not None:
        if sigma < 0:
            raise InvalidParameterError('sigma must be non-negative, got {0}'.format(sigma))
        scenario.world.sigma = float(sigma)
    scenario.spec.tagger_accuracy = _check_probability(tagger_accuracy, 'tagger_accuracy')
    return refine(scenario, granularity)
