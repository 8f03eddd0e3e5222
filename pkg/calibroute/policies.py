# -*- coding: utf-8 -*-

"""Delegation policies.

All policies inherit from the base class DelegationPolicy, which owns the task loop: pick an entry
agent, route every subtask, let the world judge the execution and feed the outcome back into the
beliefs. Subclasses only decide who enters and who executes.

"""

# Abstract methods make every policy expose the same decision interface to the harness.
from abc import ABCMeta, abstractmethod

from .trust import CapabilityProfile, belief_divergence, update_outcome, posterior_mean
from .delegation import PolicyParams, select_entry, select_executor, eligible_pool
from .world import sample_outcome
from .models import DelegationDecision, RunRecord
from .exceptions import NoEligibleAgentError, InvalidParameterError, ConfigError
from .utils import logger

SNAPSHOT_EVERY = 20


class DelegationPolicy(metaclass=ABCMeta):
    """
    This is the base class for all delegation policies. A subclass must implement decide() and may
    override choose_entry(), observe() and end_task().

    :param scenario: world.Scenario.
    :param params: delegation.PolicyParams.
    :param kappa: float.
        Prior strength of every profile.
    :param transfer_mass: float.
        Cold-start transfer mass of every profile.
    :param update_executor_self: bool.
        Also update the executor's own self cell after a delegation.
    :param rng: numpy.random.Generator or None.
        Policy-internal randomness; only stochastic policies read it.
    """
    name = None
    contextual = True
    local_profiles = True

    def __init__(self, scenario, params=None, kappa=2.0, transfer_mass=2.0, update_executor_self=False, rng=None):
        self.scenario = scenario
        self.world = scenario.world
        self.registry = scenario.registry
        self.params = params if params is not None else PolicyParams()
        self.kappa = kappa
        self.transfer_mass = transfer_mass
        self.update_executor_self = update_executor_self
        self.rng = rng
        self.profiles = dict((agent, self.make_profile(agent)) for agent in self.profile_owners())

    def __repr__(self):
        return '{0}.{1}({2})'.format(__name__, self.__class__.__name__, self.scenario.name)

    def profile_owners(self):
        return self.registry.agents

    def make_profile(self, owner):
        profile = CapabilityProfile(owner, self.registry, self.scenario.declarations, self.kappa,
                                    self.transfer_mass if self.contextual else 0.0, self.contextual)
        if self.contextual:
            for peer, skill, bucket, successes, failures in self.scenario.history:
                profile.observe_history(peer, skill, bucket, successes, failures)
        return profile

    def candidates(self, entry, skill):
        """Legal executors: the eligible pool plus the entry agent."""
        return sorted(set(eligible_pool(self.registry, skill)) | {entry})

    def choose_entry(self, task):
        return select_entry(self.profiles, self.registry, task.annotation, self.params, task.t)

    @abstractmethod
    def decide(self, entry, sub, t):
        """
        Routes one subtask.

        :param entry: agent id.
        :param sub: models.Subtask.
        :param t: integer.
        :return: models.DelegationDecision.
        """
        pass

    def observe(self, entry, decision, sub, outcome, t):
        """Updates the entry agent's cell of the executor at the observed bucket."""
        update_outcome(self.profiles[entry], decision.executor, sub.skill, sub.bucket, outcome)
        if self.update_executor_self and decision.executor != entry and decision.executor in self.profiles:
            update_outcome(self.profiles[decision.executor], decision.executor, sub.skill, sub.bucket, outcome)

    def end_task(self, task):
        pass

    def run_task(self, task, rng):
        """
        Runs one task: entry selection, then select, execute, judge and update per subtask.

        :param task: models.Task.
        :param rng: numpy.random.Generator.
            Outcome stream.
        :return: list.
            (subtask, decision, outcome) tuples.
        """
        self.world.advance(task.t)
        entry = self.choose_entry(task)
        results = []
        for sub in task:
            decision = self.decide(entry, sub, task.t)
            outcome = sample_outcome(self.world, decision.executor, sub.skill, sub.true_bucket, task.t, rng)
            self.observe(entry, decision, sub, outcome, task.t)
            results.append((sub, decision, outcome))
        self.end_task(task)
        return results

    def run(self, tasks, rng, seed=0, meta=None):
        """
        Runs a task stream and traces every subtask.

        :param tasks: list of models.Task.
        :param rng: numpy.random.Generator.
            Outcome stream.
        :param seed: integer.
        :param meta: dict.
        :return: models.RunRecord.
        """
        record = RunRecord(self.name, seed, meta=meta)
        for i, task in enumerate(tasks):
            try:
                results = self.run_task(task, rng)
            except NoEligibleAgentError as e:
                logger.warning('{0} rejected: {1}'.format(task.id, e))
                record.rejected.append(task.id)
                continue
            for k, (sub, decision, outcome) in enumerate(results):
                pool = self.candidates(decision.entry, sub.skill)
                oracle = self.world.best_agent(pool, sub.skill, sub.true_bucket, task.t)
                decision.oracle_executor = oracle
                regret = self.world.effective_probability(oracle, sub.skill, sub.true_bucket, task.t) - \
                    self.world.effective_probability(decision.executor, sub.skill, sub.true_bucket, task.t)
                record.entries.append({
                    't': task.t, 'k': k, 'task': task.id, 'skill': sub.skill,
                    'true_bucket': sub.true_bucket.label, 'observed_bucket': sub.bucket.label,
                    'entry': decision.entry, 'executor': decision.executor, 'oracle_executor': oracle,
                    'outcome': outcome, 'regret_increment': regret, 'penalty_flip': decision.penalty_flip,
                    'registered': decision.registered})
            if self.local_profiles and len(self.profiles) >= 2 and (i + 1) % SNAPSHOT_EVERY == 0:
                record.divergence.append((task.t, belief_divergence(self.profiles.values())))
        record.profiles = [self.profiles[owner].to_dict() for owner in sorted(self.profiles)]
        logger.debug('{0} seed {1}: {2} subtasks, {3} rejected'.format(self.name, seed, len(record),
                                                                      len(record.rejected)))
        return record


class ContextualLCB(DelegationPolicy):
    """
    Agent-local contextual Beta profiles scored by their lower confidence bound, with a delegation margin.
    """
    name = 'cadmas_ctx'

    def decide(self, entry, sub, t):
        return select_executor(self.profiles[entry], entry, sub, self.registry, self.params, t)


class BucketMean(ContextualLCB):
    """Contextual profiles scored by their posterior mean only."""
    name = 'bucket_mean'

    def __init__(self, scenario, params=None, **kwargs):
        params = params if params is not None else PolicyParams()
        super(BucketMean, self).__init__(scenario, params.with_gamma(0.0), **kwargs)


class StaticSkill(ContextualLCB):
    """One posterior per (peer, skill); context is ignored."""
    name = 'static'
    contextual = False


class ThompsonSampling(DelegationPolicy):
    """
    Posterior sampling over the entry agent's contextual cells: every legal executor draws
    theta ~ Beta(alpha, beta) and the largest draw executes. No margin and no penalty.
    """
    name = 'thompson'

    def __init__(self, scenario, params=None, rng=None, **kwargs):
        if rng is None:
            raise InvalidParameterError('Thompson sampling needs a seeded generator')
        super(ThompsonSampling, self).__init__(scenario, params, rng=rng, **kwargs)

    def decide(self, entry, sub, t):
        profile = self.profiles[entry]
        draws = {}
        for agent in self.candidates(entry, sub.skill):
            cell = profile.cell(agent, sub.skill, sub.bucket)
            draws[agent] = float(self.rng.beta(cell.alpha, cell.beta))
        executor = None
        for agent in sorted(draws):
            if executor is None or draws[agent] > draws[executor]:
                executor = agent
        return DelegationDecision(executor, entry, draws, registered=self.registry.declares(entry, sub.skill))


class FixedOrchestrator(DelegationPolicy):
    """
    One agent routes every task from a single global profile. Outcomes wait in a staging buffer
    and reach the profile only every `batch` tasks.

    :param batch: integer.
        Tasks between two synchronisations, at least 1.
    :param orchestrator: agent id or None.
        Routing agent; defaults to the scenario's generalist, else the lowest agent id.
    """
    name = 'fixed_orchestrator'
    local_profiles = False

    def __init__(self, scenario, params=None, batch=20, orchestrator=None, **kwargs):
        if batch < 1:
            raise InvalidParameterError('batch must be at least 1, got {0}'.format(batch))
        self.batch = int(batch)
        self.orchestrator = orchestrator or scenario.generalist or scenario.registry.agents[0]
        if self.orchestrator not in scenario.registry:
            raise ConfigError('Orchestrator {0} is not a registered agent'.format(self.orchestrator))
        self.staging = []
        self.completed = 0
        super(FixedOrchestrator, self).__init__(scenario, params, **kwargs)

    @property
    def profile(self):
        return self.profiles[self.orchestrator]

    def profile_owners(self):
        return [self.orchestrator]

    def choose_entry(self, task):
        return self.orchestrator

    def decide(self, entry, sub, t):
        return select_executor(self.profile, entry, sub, self.registry, self.params, t)

    def observe(self, entry, decision, sub, outcome, t):
        self.staging.append((decision.executor, sub.skill, sub.bucket, outcome))

    def end_task(self, task):
        self.completed += 1
        if self.completed % self.batch == 0:
            self.sync()

    def sync(self):
        for executor, skill, bucket, outcome in self.staging:
            update_outcome(self.profile, executor, skill, bucket, outcome)
        logger.debug('{0} applied {1} staged outcomes'.format(self.orchestrator, len(self.staging)))
        self.staging = []


class ContextualOracle(DelegationPolicy):
    """Routes every subtask to the agent with the highest true success probability at its true bucket."""
    name = 'oracle'
    local_profiles = False

    def decide(self, entry, sub, t):
        pool = self.candidates(entry, sub.skill)
        executor = self.world.best_agent(pool, sub.skill, sub.true_bucket, t)
        scores = dict((agent, self.world.effective_probability(agent, sub.skill, sub.true_bucket, t))
                      for agent in pool)
        return DelegationDecision(executor, entry, scores, registered=self.registry.declares(entry, sub.skill))

    def observe(self, entry, decision, sub, outcome, t):
        pass


class Monolithic(DelegationPolicy):
    """
    A single generalist executes every subtask.

    :param generalist: agent id or None.
        Defaults to the scenario's generalist.
    """
    name = 'monolithic'
    local_profiles = False

    def __init__(self, scenario, params=None, generalist=None, **kwargs):
        self.generalist = generalist or scenario.generalist
        if self.generalist is None or self.generalist not in scenario.registry:
            raise ConfigError('The monolithic policy needs a registered generalist')
        super(Monolithic, self).__init__(scenario, params, **kwargs)

    def profile_owners(self):
        return [self.generalist]

    def choose_entry(self, task):
        return self.generalist

    def decide(self, entry, sub, t):
        cell = self.profiles[entry].cell(entry, sub.skill, sub.bucket)
        return DelegationDecision(entry, entry, {entry: posterior_mean(cell)},
                                  registered=self.registry.declares(entry, sub.skill))


POLICIES = dict((cls.name, cls) for cls in (ContextualLCB, BucketMean, StaticSkill, ThompsonSampling,
                                            FixedOrchestrator, ContextualOracle, Monolithic))


def make_policy(name, scenario, params=None, kappa=2.0, transfer_mass=2.0, update_executor_self=False, rng=None,
                batch=20, orchestrator=None, generalist=None):
    """
    Instantiates a policy by name with the options it understands.

    :return: DelegationPolicy.
    """
    if name not in POLICIES:
        raise ConfigError('Unknown policy {0}, expected one of {1}'.format(name, sorted(POLICIES)))
    kwargs = {'kappa': kappa, 'transfer_mass': transfer_mass, 'update_executor_self': update_executor_self}
    if name == 'thompson':
        kwargs['rng'] = rng
    elif name == 'fixed_orchestrator':
        kwargs.update(batch=batch, orchestrator=orchestrator)
    elif name == 'monolithic':
        kwargs['generalist'] = generalist
    return POLICIES[name](scenario, params, **kwargs)
