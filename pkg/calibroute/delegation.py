# -*- coding: utf-8 -*-

"""Registry filtering, lower-confidence-bound scoring, entry selection and margin-guarded delegation.

Every function here is a pure decision over profile state; none of them mutates a profile
except through the lazy creation of prior cells.

"""

import math

from .trust import posterior_mean, lcb
from .models import DelegationDecision
from .exceptions import InvalidParameterError, NoEligibleAgentError, NotRegisteredError
from .utils import logger

GAMMA_SCHEDULES = ('fixed', 'sqrt_log')


class SkillRegistry(object):
    """
    Declared competences of the agent population.

    :param entries: dict.
        Agent id -> iterable of skills. An agent may declare nothing.
    :param skills: iterable.
        Skill vocabulary. Defaults to the union of the declarations.
    """
    __slots__ = ('entries', 'skills')

    def __init__(self, entries, skills=None):
        self.entries = dict((agent, frozenset(declared)) for agent, declared in entries.items())
        declared = set().union(*self.entries.values()) if self.entries else set()
        self.skills = frozenset(skills) if skills is not None else frozenset(declared)
        unknown = declared - self.skills
        if unknown:
            raise NotRegisteredError('Skills {0} are not in the skill vocabulary'.format(sorted(unknown)))

    def __repr__(self):
        return '{0}.{1}({2})'.format(__name__, self.__class__.__name__, self.agents)

    def __contains__(self, agent):
        return agent in self.entries

    def __len__(self):
        return len(self.entries)

    @property
    def agents(self):
        return sorted(self.entries)

    def declares(self, agent, skill):
        return skill in self.entries.get(agent, ())


class PolicyParams(object):
    """
    Penalty weight and delegation margin.

    :param gamma: float.
        Uncertainty penalty weight, >= 0.
    :param delta: float.
        Delegation margin, >= 0.
    :param schedule: string.
        'fixed' or 'sqrt_log'; the latter anneals gamma as gamma * sqrt(log(t + e)).
    """
    __slots__ = ('gamma', 'delta', 'schedule')

    def __init__(self, gamma=0.5, delta=0.05, schedule='fixed'):
        if gamma < 0:
            raise InvalidParameterError('gamma must be non-negative, got {0}'.format(gamma))
        if delta < 0:
            raise InvalidParameterError('delta must be non-negative, got {0}'.format(delta))
        if schedule not in GAMMA_SCHEDULES:
            raise InvalidParameterError('Unknown gamma schedule {0}'.format(schedule))
        self.gamma = float(gamma)
        self.delta = float(delta)
        self.schedule = schedule

    def __repr__(self):
        return '{0}.{1}(gamma={2}, delta={3})'.format(__name__, self.__class__.__name__, self.gamma, self.delta)

    def gamma_at(self, t=None):
        if self.schedule == 'fixed' or t is None:
            return self.gamma
        return self.gamma * math.sqrt(math.log(t + math.e))

    def with_gamma(self, gamma):
        return PolicyParams(gamma, self.delta, self.schedule)


def lcb_score(cell, params, t=None):
    """
    Contextual delegation score: posterior mean minus gamma posterior standard deviations.

    :param cell: BetaParams.
    :param params: PolicyParams.
    :param t: integer.
        Task index, only read by an annealing schedule.
    :return: float.
    """
    return lcb(cell, params.gamma_at(t))


def eligible_pool(registry, skill):
    """
    Agents whose registry entry contains the skill, sorted by agent id.

    :param registry: SkillRegistry.
    :param skill: string.
    :return: list.
    """
    return [agent for agent in registry.agents if registry.declares(agent, skill)]


def _argmax(scores):
    best = None
    for agent in sorted(scores):
        if best is None or scores[agent] > scores[best]:
            best = agent
    return best


def select_entry(profiles, registry, tag, params, t=None):
    """
    Picks the entry agent. Each eligible candidate bids with the score of its own self cell
    in its own profile; ties go to the lowest agent id.

    :param profiles: dict.
        Agent id -> CapabilityProfile.
    :param registry: SkillRegistry.
    :param tag: TaskAnnotation.
    :param params: PolicyParams.
    :return: agent id.
    """
    pool = eligible_pool(registry, tag.skill)
    if not pool:
        raise NoEligibleAgentError(tag.skill)
    scores = dict((agent, lcb_score(profiles[agent].cell(agent, tag.skill, tag.bucket), params, t))
                  for agent in pool)
    return _argmax(scores)


def select_executor(profile, entry, sub, registry, params, t=None):
    """
    Margin-guarded delegation from the entry agent's point of view.

    The best-scoring peer executes only when its score beats the entry agent's score by more
    than delta; otherwise the entry agent executes, registered for the skill or not.

    :param profile: CapabilityProfile.
        The entry agent's profile.
    :param entry: agent id.
    :param sub: Subtask.
    :param registry: SkillRegistry.
    :param params: PolicyParams.
    :return: DelegationDecision.
    """
    own = profile.cell(entry, sub.skill, sub.bucket)
    scores = {entry: lcb_score(own, params, t)}
    means = {}
    for peer in eligible_pool(registry, sub.skill):
        if peer == entry:
            continue
        cell = profile.cell(peer, sub.skill, sub.bucket)
        scores[peer] = lcb_score(cell, params, t)
        means[peer] = posterior_mean(cell)
    registered = registry.declares(entry, sub.skill)
    if not registered:
        logger.warning('{0} self-executes {1} without declaring it'.format(entry, sub.skill))
    if not means:
        return DelegationDecision(entry, entry, scores, registered=registered)
    peer_scores = dict((peer, scores[peer]) for peer in means)
    best_peer = _argmax(peer_scores)
    executor = best_peer if scores[best_peer] > scores[entry] + params.delta else entry
    top_mean = _argmax(means)
    penalty_flip = executor == entry and means[top_mean] > posterior_mean(own)
    logger.debug('{0} -> {1} for {2} ({3}), scores {4}'.format(entry, executor, sub.id, sub.bucket, scores))
    return DelegationDecision(executor, entry, scores, penalty_flip=penalty_flip, registered=registered)
