# -*- coding: utf-8 -*-

"""Models the domain objects.

Defines classes for ContextBucket, BetaParams, TaskAnnotation, Subtask, Task,
DelegationDecision, RunRecord and SummaryStats.

"""

import os
import json
from codecs import open

from .utils import normalize

DIFFICULTIES = ('easy', 'medium', 'hard')
DEPENDENCIES = ('isolated', 'chained')
TOOL_USE = ('no', 'yes')


class ContextBucket(object):
    """
    Coarse task context (difficulty, dependency, tool_use).

    Buckets are immutable, hashable and totally ordered, so they can key profile cells
    and be sorted for stable output.

    :param difficulty: string.
        One of 'easy', 'medium', 'hard'.
    :param dependency: string.
        One of 'isolated', 'chained'.
    :param tool_use: string.
        One of 'no', 'yes'.
    """
    __slots__ = ('difficulty', 'dependency', 'tool_use')

    def __init__(self, difficulty, dependency, tool_use):
        if difficulty not in DIFFICULTIES or dependency not in DEPENDENCIES or tool_use not in TOOL_USE:
            raise ValueError('Invalid context bucket ({0}, {1}, {2})'.format(difficulty, dependency, tool_use))
        object.__setattr__(self, 'difficulty', difficulty)
        object.__setattr__(self, 'dependency', dependency)
        object.__setattr__(self, 'tool_use', tool_use)

    def __setattr__(self, key, value):
        raise AttributeError('ContextBucket is immutable')

    def __repr__(self):
        return '{0}.{1}({2}, {3}, {4})'.format(__name__, self.__class__.__name__, self.difficulty,
                                               self.dependency, self.tool_use)

    def __str__(self):
        return self.label

    def _key(self):
        return (DIFFICULTIES.index(self.difficulty), DEPENDENCIES.index(self.dependency),
                TOOL_USE.index(self.tool_use))

    def __eq__(self, other):
        return isinstance(other, ContextBucket) and self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __lt__(self, other):
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __reduce__(self):
        return ContextBucket, (self.difficulty, self.dependency, self.tool_use)

    @property
    def label(self):
        return '{0}-{1}-{2}'.format(self.difficulty, self.dependency, self.tool_use)

    @classmethod
    def from_label(cls, label):
        """
        Parses 'easy-isolated-no' style labels.

        :param label: string.
        :return: ContextBucket.
        """
        parts = label.split('-')
        if len(parts) != 3:
            raise ValueError('Invalid bucket label {0}'.format(label))
        return cls(*parts)

    def to_dict(self):
        return {'difficulty': self.difficulty, 'dependency': self.dependency, 'tool_use': self.tool_use}

    @classmethod
    def from_dict(cls, data):
        return cls(data['difficulty'], data['dependency'], data['tool_use'])


EASY = ContextBucket('easy', 'isolated', 'no')
HARD = ContextBucket('hard', 'chained', 'yes')


class BetaParams(object):
    """
    Beta posterior of one (peer, skill, bucket) cell.

    :param alpha: float.
        Pseudo-success mass.
    :param beta: float.
        Pseudo-failure mass.
    :param n: integer.
        Number of observed outcomes.
    :param c_self: float.
        Clamped self-declared confidence the prior was built from.
    :param transferred: float.
        Pseudo-count mass borrowed from a neighbouring bucket.
    """
    __slots__ = ('alpha', 'beta', 'n', 'c_self', 'transferred')

    def __init__(self, alpha, beta, n=0, c_self=0.5, transferred=0.0):
        self.alpha = alpha
        self.beta = beta
        self.n = n
        self.c_self = c_self
        self.transferred = transferred

    def __repr__(self):
        return '{0}.{1}({2}, {3}, n={4})'.format(__name__, self.__class__.__name__, self.alpha, self.beta, self.n)

    def __eq__(self, other):
        return isinstance(other, BetaParams) and (self.alpha, self.beta, self.n) == (other.alpha, other.beta, other.n)

    def __ne__(self, other):
        return not self == other


class TaskAnnotation(object):
    """
    Top-level (skill, bucket) annotation of a task.

    :param skill: string.
    :param bucket: ContextBucket.
    """
    __slots__ = ('skill', 'bucket')

    def __init__(self, skill, bucket):
        self.skill = skill
        self.bucket = bucket

    def __repr__(self):
        return '{0}.{1}({2}, {3})'.format(__name__, self.__class__.__name__, self.skill, self.bucket)


class Subtask(object):
    """
    Subtask routed by a policy.

    Policies read only ``skill`` and ``bucket``; ``true_bucket`` belongs to the world and the metrics.

    :param id: string.
    :param skill: string.
    :param bucket: ContextBucket.
        Observed bucket, possibly corrupted by tagging noise.
    :param true_bucket: ContextBucket.
    """
    __slots__ = ('id', 'skill', 'bucket', 'true_bucket')

    def __init__(self, id, skill, bucket, true_bucket=None):
        self.id = id
        self.skill = skill
        self.bucket = bucket
        self.true_bucket = true_bucket if true_bucket is not None else bucket

    def __repr__(self):
        return '{0}.{1}({2}, {3}, {4})'.format(__name__, self.__class__.__name__, self.id, self.skill, self.bucket)


class Task(object):
    """
    Task Class.
    The Task class follows the Sequence protocol over its subtasks.

    :param id: string.
    :param t: integer.
        Task index in the stream; the world clock while the task runs.
    :param subtasks: list.
        List of Subtask objects. The first one provides the top-level annotation.
    """
    __slots__ = ('id', 't', 'subtasks')

    def __init__(self, id, t, subtasks):
        self.id = id
        self.t = t
        self.subtasks = subtasks

    def __repr__(self):
        return '{0}.{1}({2}, {3})'.format(__name__, self.__class__.__name__, self.id, self.t)

    def __len__(self):
        return len(self.subtasks)

    def __getitem__(self, key):
        return self.subtasks[key]

    def __iter__(self):
        return iter(self.subtasks)

    @property
    def annotation(self):
        return TaskAnnotation(self.subtasks[0].skill, self.subtasks[0].bucket)


class DelegationDecision(object):
    """
    Outcome of an executor selection.

    :param executor: agent id.
    :param entry: agent id.
    :param scores: dict.
        Score of every candidate that was scored.
    :param penalty_flip: bool.
        A peer had the best posterior mean, beat the entry agent's mean, yet the entry agent executes.
    :param oracle_executor: agent id or None.
        Filled by the harness for the metrics layer.
    :param registered: bool.
        False when the entry agent self-executes a skill it never declared.
    """
    __slots__ = ('executor', 'entry', 'scores', 'penalty_flip', 'oracle_executor', 'registered')

    def __init__(self, executor, entry, scores, penalty_flip=False, oracle_executor=None, registered=True):
        self.executor = executor
        self.entry = entry
        self.scores = scores
        self.penalty_flip = penalty_flip
        self.oracle_executor = oracle_executor
        self.registered = registered

    def __repr__(self):
        return '{0}.{1}({2}, {3})'.format(__name__, self.__class__.__name__, self.executor, self.entry)


class RunRecord(object):
    """
    RunRecord Class.
    Per-subtask trace of one (policy, seed) run. The RunRecord follows the Sequence protocol
    over its entries.

    Each entry is a dict with the keys t, k, task, skill, true_bucket, observed_bucket, entry,
    executor, oracle_executor, outcome, regret_increment, penalty_flip, registered.

    :param policy: string.
    :param seed: integer.
    :param entries: list.
    :param rejected: list.
        Ids of tasks rejected because no agent declared their skill.
    :param divergence: list.
        (t, belief divergence) snapshots.
    :param profiles: list.
        Final profile dicts (trust JSON shape).
    :param meta: dict.
        Free-form run metadata (preset, preset arguments, master seed).
    """
    __slots__ = ('policy', 'seed', 'entries', 'rejected', 'divergence', 'profiles', 'meta')

    def __init__(self, policy, seed, entries=None, rejected=None, divergence=None, profiles=None, meta=None):
        self.policy = policy
        self.seed = seed
        self.entries = entries if entries is not None else []
        self.rejected = rejected if rejected is not None else []
        self.divergence = divergence if divergence is not None else []
        self.profiles = profiles if profiles is not None else []
        self.meta = meta if meta is not None else {}

    def __repr__(self):
        return '{0}.{1}({2}, {3})'.format(__name__, self.__class__.__name__, self.policy, self.seed)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, key):
        return self.entries[key]

    def __iter__(self):
        return iter(self.entries)

    @property
    def file_name(self):
        return '{0}_seed{1:03d}.jsonl'.format(normalize(self.policy), self.seed)

    def save(self, folder):
        """
        Saves the record as JSON lines in folder/logs/.

        :param folder: string.
            Results folder.
        :return: string.
            Path of the written file.
        """
        save_path = os.path.join(folder, 'logs')
        if not os.path.exists(save_path):
            os.makedirs(save_path)
        path = os.path.join(save_path, self.file_name)
        with open(path, 'w', encoding='utf-8') as file:
            header = {'type': 'header', 'policy': self.policy, 'seed': self.seed, 'meta': self.meta}
            file.write(json.dumps(header, sort_keys=True) + '\n')
            for entry in self.entries:
                file.write(json.dumps(dict(entry, type='subtask'), sort_keys=True) + '\n')
            for task_id in self.rejected:
                file.write(json.dumps({'type': 'rejected', 'task': task_id}, sort_keys=True) + '\n')
            for t, value in self.divergence:
                file.write(json.dumps({'type': 'divergence', 't': t, 'value': value}, sort_keys=True) + '\n')
            for profile in self.profiles:
                file.write(json.dumps(dict(profile, type='profile'), sort_keys=True) + '\n')
        return path

    @classmethod
    def load(cls, path):
        """
        Reads a record written by save().

        :param path: string.
        :return: RunRecord.
        """
        record = None
        with open(path, 'r', encoding='utf-8') as file:
            for line in file:
                if not line.strip():
                    continue
                item = json.loads(line)
                kind = item.pop('type')
                if kind == 'header':
                    record = cls(item['policy'], item['seed'], meta=item.get('meta', {}))
                elif kind == 'subtask':
                    record.entries.append(item)
                elif kind == 'rejected':
                    record.rejected.append(item['task'])
                elif kind == 'divergence':
                    record.divergence.append((item['t'], item['value']))
                elif kind == 'profile':
                    record.profiles.append(item)
        return record


class SummaryStats(object):
    """
    Point estimate with a confidence interval.

    :param point: float.
    :param ci_low: float.
    :param ci_high: float.
    :param n_seeds: integer.
    :param std_dev: float.
    """
    __slots__ = ('point', 'ci_low', 'ci_high', 'n_seeds', 'std_dev')

    def __init__(self, point, ci_low, ci_high, n_seeds, std_dev):
        self.point = point
        self.ci_low = ci_low
        self.ci_high = ci_high
        self.n_seeds = n_seeds
        self.std_dev = std_dev

    def __repr__(self):
        return '{0}.{1}({2:.4f}, [{3:.4f}, {4:.4f}])'.format(__name__, self.__class__.__name__, self.point,
                                                           self.ci_low, self.ci_high)
