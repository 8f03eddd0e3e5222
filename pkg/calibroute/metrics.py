# -*- coding: utf-8 -*-

"""Evaluation metrics and bootstrap statistics.

Every function is a pure computation over RunRecords (or profiles), so stored run logs
reproduce the published numbers given the same stats seed.

"""

import numpy as np

from .models import ContextBucket, SummaryStats
from .trust import posterior_mean
from .exceptions import UndefinedMetricError, InvalidInputError
from .utils import substream

RECOVERY_WINDOW = 10
RECOVERY_MARGIN = 0.10


class NoRecovery(object):
    """
    Returned by recovery_speed when the windowed misroute never returns within the margin.

    :param windows: integer.
        Number of post-shift windows inspected.
    """
    __slots__ = ('windows',)

    def __init__(self, windows):
        self.windows = windows

    def __repr__(self):
        return '{0}.{1}({2})'.format(__name__, self.__class__.__name__, self.windows)

    def __eq__(self, other):
        return isinstance(other, NoRecovery) and other.windows == self.windows

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.windows)


def select(record, buckets=None, skill=None, since=None):
    """
    Entries of a record, optionally restricted to true buckets, a skill and t >= since.

    :param record: RunRecord.
    :param buckets: iterable of ContextBucket or labels.
    :param skill: string.
    :param since: integer.
    :return: list of dict.
    """
    labels = None
    if buckets is not None:
        labels = set(b.label if isinstance(b, ContextBucket) else b for b in buckets)
    return [e for e in record
            if (labels is None or e['true_bucket'] in labels)
            and (skill is None or e['skill'] == skill)
            and (since is None or e['t'] >= since)]


def delegation_accuracy(record, buckets=None, skill=None, since=None):
    """
    Fraction of subtasks whose executor matches the contextual oracle at the true bucket.

    :return: float.
    """
    entries = select(record, buckets, skill, since)
    if not entries:
        raise UndefinedMetricError('No subtasks to score in {0}'.format(record))
    return float(np.mean([e['executor'] == e['oracle_executor'] for e in entries]))


def misroute_rate(record, buckets=None, skill=None, since=None):
    return 1.0 - delegation_accuracy(record, buckets, skill, since)


def cumulative_regret(record, world=None):
    """
    Running sum of the oracle gap of every executed subtask.

    :param record: RunRecord.
    :param world: WorldModel or None.
        When given, gaps are recomputed from the drift-adjusted truth instead of the logged increments.
    :return: numpy.ndarray.
    """
    if world is None:
        gaps = [e['regret_increment'] for e in record]
    else:
        gaps = []
        for e in record:
            bucket = ContextBucket.from_label(e['true_bucket'])
            gaps.append(world.effective_probability(e['oracle_executor'], e['skill'], bucket, e['t']) -
                        world.effective_probability(e['executor'], e['skill'], bucket, e['t']))
    return np.cumsum(np.asarray(gaps, dtype=float))


def calibration_error(profile, world, t):
    """
    Mean absolute deviation between posterior means and true success probabilities over the
    observed contextual cells of a profile.

    :param profile: CapabilityProfile.
    :param world: WorldModel.
    :param t: integer.
    :return: float.
    """
    errors = [abs(posterior_mean(cell) - world.effective_probability(peer, skill, bucket, t))
              for (peer, skill, bucket), cell in profile.observed_cells() if bucket is not None]
    if not errors:
        raise UndefinedMetricError('{0} has no observed contextual cell'.format(profile))
    return float(np.mean(errors))


def windowed_misroute(record, window=RECOVERY_WINDOW, buckets=None, skill=None):
    """
    Misroute rate per window of `window` consecutive task indices, starting at t = 0.
    Windows without a matching subtask are NaN.

    :return: numpy.ndarray.
    """
    entries = select(record, buckets, skill)
    if not len(record):
        raise UndefinedMetricError('No subtasks in {0}'.format(record))
    last = max(e['t'] for e in record)
    misses = np.zeros(last // window + 1)
    counts = np.zeros(last // window + 1)
    for e in entries:
        misses[e['t'] // window] += e['executor'] != e['oracle_executor']
        counts[e['t'] // window] += 1
    with np.errstate(invalid='ignore', divide='ignore'):
        return np.where(counts > 0, misses / np.maximum(counts, 1), np.nan)


def recovery_speed(series, shift_time=0, margin=RECOVERY_MARGIN, window=RECOVERY_WINDOW):
    """
    Number of post-shift windows until the windowed misroute is back within the margin.

    :param series: sequence of float.
        Windowed misroute from t = 0.
    :param shift_time: integer.
        Task index of the shift.
    :param margin: float.
    :param window: integer.
    :return: integer or NoRecovery.
    """
    start = shift_time // window
    tail = list(series)[start:]
    for i, value in enumerate(tail):
        if value == value and value <= margin:
            return i
    return NoRecovery(len(tail))


def bootstrap_ci(samples, resamples=10000, level=0.95, seed=0):
    """
    Percentile bootstrap confidence interval of the mean.

    :param samples: sequence of float.
    :param resamples: integer.
    :param level: float.
    :param seed: integer.
        Stats seed; the interval is deterministic given it.
    :return: SummaryStats.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise UndefinedMetricError('Cannot bootstrap an empty sample')
    rng = substream(seed, 'bootstrap')
    point = float(samples.mean())
    means = samples[rng.integers(0, samples.size, size=(resamples, samples.size))].mean(axis=1)
    low, high = np.percentile(means, [50.0 * (1.0 - level), 50.0 * (1.0 + level)])
    std_dev = float(samples.std(ddof=1)) if samples.size > 1 else 0.0
    return SummaryStats(point, min(float(low), point), max(float(high), point), int(samples.size), std_dev)


def paired_bootstrap_test(a, b, resamples=10000, seed=0):
    """
    Two-sided paired bootstrap test of a zero mean difference. The paired differences are
    centred under the null and resampled; p = (#{|mean*| >= |observed|} + 1) / (resamples + 1).

    :param a: sequence of float.
        Per-seed metric of the first policy.
    :param b: sequence of float.
        Per-seed metric of the second policy, same seed order.
    :return: float.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidInputError('Paired samples differ in length: {0} and {1}'.format(a.size, b.size))
    if a.size == 0:
        raise UndefinedMetricError('Cannot test empty samples')
    diff = a - b
    observed = abs(diff.mean())
    centered = diff - diff.mean()
    rng = substream(seed, 'paired')
    means = centered[rng.integers(0, diff.size, size=(resamples, diff.size))].mean(axis=1)
    extreme = np.count_nonzero(np.abs(means) >= observed - 1e-12)
    return (extreme + 1.0) / (resamples + 1.0)


def subtask_success_rate(record):
    if not len(record):
        raise UndefinedMetricError('No subtasks in {0}'.format(record))
    return float(np.mean([e['outcome'] for e in record]))


def task_success_rate(record):
    """Fraction of tasks whose every subtask succeeded."""
    tasks = {}
    for e in record:
        tasks[e['task']] = tasks.get(e['task'], True) and bool(e['outcome'])
    if not tasks:
        raise UndefinedMetricError('No tasks in {0}'.format(record))
    return float(np.mean(list(tasks.values())))


def penalty_flip_rate(record):
    if not len(record):
        raise UndefinedMetricError('No subtasks in {0}'.format(record))
    return float(np.mean([bool(e['penalty_flip']) for e in record]))


def divergence_plateau(record):
    """Mean belief divergence over the second half of the snapshots."""
    values = [value for _, value in record.divergence]
    if not values:
        raise UndefinedMetricError('{0} has no divergence snapshots'.format(record))
    return float(np.mean(values[len(values) // 2:]))


def run_metrics(record, scenario, profiles=None, window=RECOVERY_WINDOW, margin=RECOVERY_MARGIN):
    """
    Every metric of one run, as the rows written to summary.csv.

    :param record: RunRecord.
    :param scenario: world.Scenario.
    :param profiles: list of CapabilityProfile or None.
        Final profiles, for the calibration error.
    :return: dict.
        Metric name -> value.
    """
    values = {
        'misroute': misroute_rate(record),
        'regret': float(cumulative_regret(record)[-1]),
        'subtask_success': subtask_success_rate(record),
        'task_success': task_success_rate(record),
        'penalty_flip_rate': penalty_flip_rate(record),
        'penalty_flips': float(sum(bool(e['penalty_flip']) for e in record)),
        'unregistered': float(sum(not e['registered'] for e in record)),
        'rejected': float(len(record.rejected)),
    }
    for name, (skill, buckets) in sorted(scenario.focus.items()):
        try:
            values['misroute[{0}]'.format(name)] = misroute_rate(record, buckets, skill)
        except UndefinedMetricError:
            pass
    event = scenario.event_at
    if event is not None:
        try:
            values['misroute_post_event'] = misroute_rate(record, since=event)
        except UndefinedMetricError:
            pass
    if scenario.world.drift is not None and 'drift' in scenario.focus:
        skill, buckets = scenario.focus['drift']
        recovery = recovery_speed(windowed_misroute(record, window, buckets, skill), event, margin, window)
        values['recovered'] = 0.0 if isinstance(recovery, NoRecovery) else 1.0
        values['recovery_windows'] = float(recovery.windows if isinstance(recovery, NoRecovery) else recovery)
    if record.divergence:
        values['divergence_plateau'] = divergence_plateau(record)
    errors = []
    for profile in profiles or []:
        try:
            errors.append(calibration_error(profile, scenario.world, record[-1]['t']))
        except UndefinedMetricError:
            pass
    if errors:
        values['calibration_error'] = float(np.mean(errors))
    return values
