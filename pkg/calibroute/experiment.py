# -*- coding: utf-8 -*-

"""Experiment orchestration.

Loads and validates JSON configurations, fans (policy, seed) runs out on a gevent pool, writes
run logs, summary.csv and manifest.json, and builds the report tables from stored results.

"""

import os
import re
import json
import hashlib
from codecs import open

import numpy as np
import pandas as pd
from gevent.pool import Pool

from . import __version__
from .models import RunRecord
from .world import build_world, generate_tasks, PRESETS, GRANULARITIES
from .delegation import PolicyParams, GAMMA_SCHEDULES
from .policies import make_policy, POLICIES
from .trust import MAX_TRANSFER_MASS
from .metrics import run_metrics, bootstrap_ci, cumulative_regret
from .exceptions import ConfigError, MissingInputError
from .utils import logger, set_output_folder, substream, normalize, RNG_VERSION

DEFAULTS = {
    'preset': 'rq1_flip',
    'preset_args': {},
    'policies': None,
    'seeds': 30,
    'master_seed': 0,
    'tasks': None,
    'gamma': 0.5,
    'delta': 0.05,
    'kappa': 2.0,
    'transfer_mass': 2.0,
    'sigma': None,
    'tagger_accuracy': 1.0,
    'granularity': None,
    'orchestrator': {'batch': 20, 'agent': None},
    'generalist': None,
    'update_executor_self': False,
    'gamma_schedule': 'fixed',
    'window': 10,
    'margin': 0.10,
    'resamples': 10000,
    'stats_seed': 0,
    'workers': 8,
    'out': None,
}


def _line_of(text, key):
    if not text:
        return None
    pattern = re.compile(r'"{0}"\s*:'.format(re.escape(key)))
    for number, line in enumerate(text.splitlines(), 1):
        if pattern.search(line):
            return number
    return None


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class ExperimentConfig(object):
    """
    Validated experiment configuration. Every key of DEFAULTS is an attribute.

    :param data: dict.
        Configuration keys; missing keys take their default.
    :param path: string.
        Source file, for error messages.
    :param text: string.
        Source text, used to anchor errors to a line.
    """
    __slots__ = tuple(sorted(DEFAULTS)) + ('path', 'text')

    def __init__(self, data=None, path=None, text=None):
        self.path = path
        self.text = text
        data = dict(data or {})
        for key in data:
            if key not in DEFAULTS:
                self.fail(key, 'unknown key "{0}"'.format(key))
        for key, default in DEFAULTS.items():
            value = data.get(key, default)
            if isinstance(default, dict):
                value = dict(default, **(value or {}))
            setattr(self, key, value)
        self.validate()

    def __repr__(self):
        return '{0}.{1}({2}, seeds={3})'.format(__name__, self.__class__.__name__, self.preset, self.seeds)

    def fail(self, key, message):
        raise ConfigError(message, self.path, _line_of(self.text, key))

    def check(self, key, condition, message):
        if not condition:
            self.fail(key, '{0}: {1}, got {2!r}'.format(key, message, getattr(self, key, None)))

    def validate(self):
        self.check('preset', self.preset in PRESETS, 'expected one of {0}'.format(sorted(PRESETS)))
        self.check('preset_args', isinstance(self.preset_args, dict), 'expected an object')
        self.check('policies', self.policies is None or (isinstance(self.policies, list) and self.policies and
                                                         all(p in POLICIES for p in self.policies)),
                   'expected a non-empty list of {0}'.format(sorted(POLICIES)))
        for key in ('seeds', 'window', 'resamples', 'workers'):
            self.check(key, isinstance(getattr(self, key), int) and getattr(self, key) >= 1, 'expected an integer >= 1')
        for key in ('master_seed', 'stats_seed'):
            self.check(key, isinstance(getattr(self, key), int) and getattr(self, key) >= 0, 'expected an integer >= 0')
        self.check('tasks', self.tasks is None or (isinstance(self.tasks, int) and self.tasks >= 1),
                   'expected an integer >= 1')
        for key in ('gamma', 'delta'):
            self.check(key, _is_number(getattr(self, key)) and getattr(self, key) >= 0, 'expected a number >= 0')
        self.check('kappa', _is_number(self.kappa) and self.kappa > 0, 'expected a number > 0')
        self.check('transfer_mass', _is_number(self.transfer_mass) and 0 <= self.transfer_mass <= MAX_TRANSFER_MASS,
                   'expected a number in [0, {0}]'.format(MAX_TRANSFER_MASS))
        self.check('sigma', self.sigma is None or (_is_number(self.sigma) and self.sigma >= 0),
                   'expected a number >= 0')
        self.check('tagger_accuracy', _is_number(self.tagger_accuracy) and 0 <= self.tagger_accuracy <= 1,
                   'expected a number in [0, 1]')
        self.check('margin', _is_number(self.margin) and 0 <= self.margin <= 1, 'expected a number in [0, 1]')
        self.check('granularity', self.granularity is None or self.granularity in GRANULARITIES,
                   'expected one of {0}'.format(GRANULARITIES))
        self.check('gamma_schedule', self.gamma_schedule in GAMMA_SCHEDULES,
                   'expected one of {0}'.format(GAMMA_SCHEDULES))
        self.check('update_executor_self', isinstance(self.update_executor_self, bool), 'expected true or false')
        batch = self.orchestrator.get('batch')
        self.check('orchestrator', isinstance(batch, int) and batch >= 1, 'batch must be an integer >= 1')
        self.check('orchestrator', set(self.orchestrator) <= {'batch', 'agent'}, 'expected keys batch and agent')

    @classmethod
    def from_file(cls, path):
        """
        Reads a JSON configuration file.

        :param path: string.
        :return: ExperimentConfig.
        """
        with open(path, 'r', encoding='utf-8') as file:
            text = file.read()
        try:
            data = json.loads(text)
        except ValueError as e:
            raise ConfigError('invalid JSON: {0}'.format(getattr(e, 'msg', e)), path, getattr(e, 'lineno', None))
        if not isinstance(data, dict):
            raise ConfigError('expected a JSON object at the top level', path, 1)
        return cls(data, path, text)

    def to_dict(self):
        return dict((key, getattr(self, key)) for key in sorted(DEFAULTS))

    def override(self, **values):
        """
        Copy with the given keys replaced; None values leave a key untouched.

        :return: ExperimentConfig.
        """
        data = self.to_dict()
        for key, value in values.items():
            if value is not None:
                data[key] = value
        return ExperimentConfig(data, self.path, self.text)

    def digest(self):
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode('utf-8')).hexdigest()

    def save(self, folder):
        path = os.path.join(folder, 'config.effective.json')
        with open(path, 'w', encoding='utf-8') as file:
            file.write(json.dumps(self.to_dict(), sort_keys=True, indent=2) + '\n')
        return path

    @property
    def params(self):
        return PolicyParams(self.gamma, self.delta, self.gamma_schedule)

    def scenario(self):
        """Fresh scenario for one run."""
        return build_world(self.preset, self.sigma, self.tagger_accuracy, self.granularity, **self.preset_args)

    def policy_names(self, scenario):
        """Configured policies, or every policy the scenario supports."""
        if self.policies is not None:
            return list(self.policies)
        names = sorted(POLICIES)
        if scenario.generalist is None and self.generalist is None:
            names.remove('monolithic')
        return names

    @property
    def condition(self):
        args = ','.join('{0}={1}'.format(k, self.preset_args[k]) for k in sorted(self.preset_args))
        return '{0}({1})'.format(self.preset, args) if args else self.preset


def run_one(config, policy_name, seed):
    """
    Runs one (policy, seed) pair on a fresh scenario.

    Tasks come from the (master_seed, seed, 'tasks') stream shared by every policy; outcomes and
    policy-internal draws come from per-policy streams.

    :return: tuple(RunRecord, dict).
        The record and its metrics.
    """
    scenario = config.scenario()
    tasks = generate_tasks(scenario.spec, config.tasks or scenario.tasks, substream(config.master_seed, seed, 'tasks'))
    policy = make_policy(policy_name, scenario, config.params, config.kappa, config.transfer_mass,
                         config.update_executor_self, substream(config.master_seed, seed, policy_name, 'policy'),
                         config.orchestrator['batch'], config.orchestrator['agent'], config.generalist)
    meta = {'preset': config.preset, 'preset_args': config.preset_args, 'master_seed': config.master_seed,
            'rng_version': RNG_VERSION}
    logger.info('Running {0} seed {1}'.format(policy_name, seed))
    record = policy.run(tasks, substream(config.master_seed, seed, policy_name, 'outcomes'), seed, meta)
    metrics = run_metrics(record, scenario, list(policy.profiles.values()), config.window, config.margin)
    return record, metrics


def run_experiment(config, folder=None):
    """
    Runs every (policy, seed) pair of a configuration and writes logs/, summary.csv,
    config.effective.json and manifest.json. Failed runs are listed in the manifest, whose
    status is then 'partial'.

    Runs are spawned on a gevent Pool of `workers` greenlets. run_one never yields, so the
    greenlets execute one after another; `workers` caps how many runs are in flight and does
    not give parallel speedup.

    :param config: ExperimentConfig or string.
        Configuration or path of a JSON configuration file.
    :param folder: string.
        Output folder; defaults to the config's `out`, then ./results.
    :return: dict.
        The manifest.
    """
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_file(config)
    folder = set_output_folder(folder or config.out)
    names = config.policy_names(config.scenario())
    pool = Pool(config.workers)
    jobs = [(name, seed) for name in names for seed in range(config.seeds)]
    greenlets = [pool.spawn(run_one, config, name, seed) for name, seed in jobs]
    pool.join()  # Gathers results from the pool
    rows, failed, records = [], [], []
    for (name, seed), greenlet in sorted(zip(jobs, greenlets), key=lambda item: item[0]):
        if not greenlet.successful():
            logger.error('{0} seed {1} failed: {2}'.format(name, seed, greenlet.exception))
            failed.append([name, seed])
            continue
        record, metrics = greenlet.value
        records.append(record)
        record.save(folder)
        rows.extend({'policy': name, 'seed': seed, 'metric': metric, 'value': metrics[metric]}
                    for metric in sorted(metrics))
    summary = pd.DataFrame(rows, columns=['policy', 'seed', 'metric', 'value'])
    summary.to_csv(os.path.join(folder, 'summary.csv'), index=False)
    config.save(folder)
    manifest = {
        'version': __version__,
        'rng_version': RNG_VERSION,
        'config_hash': config.digest(),
        'preset': config.preset,
        'condition': config.condition,
        'master_seed': config.master_seed,
        'seeds': list(range(config.seeds)),
        'policies': names,
        'status': 'partial' if failed else 'complete',
        'failed': failed,
    }
    with open(os.path.join(folder, 'manifest.json'), 'w', encoding='utf-8') as file:
        file.write(json.dumps(manifest, sort_keys=True, indent=2) + '\n')
    if failed:
        logger.warning('{0} of {1} runs failed, outputs in {2} are partial'.format(len(failed), len(jobs), folder))
    logger.info('{0} runs written to {1}'.format(len(records), folder))
    return manifest


def load_results(folder):
    """
    Reads the summary and manifest of a results folder and checks that every run log is present.

    :param folder: string.
    :return: tuple(pandas.DataFrame, dict).
    """
    manifest_path = os.path.join(folder, 'manifest.json')
    summary_path = os.path.join(folder, 'summary.csv')
    if not os.path.exists(manifest_path) or not os.path.exists(summary_path):
        raise MissingInputError([], folder)
    with open(manifest_path, 'r', encoding='utf-8') as file:
        manifest = json.loads(file.read())
    missing = []
    for name in manifest['policies']:
        for seed in manifest['seeds']:
            log = os.path.join(folder, 'logs', RunRecord(name, seed).file_name)
            if not os.path.exists(log):
                missing.append((name, seed))
    if missing:
        raise MissingInputError(missing, folder)
    return pd.read_csv(summary_path), manifest


def conditions(paths):
    """
    Expands result folders into (condition label, folder) pairs; a sweep folder contributes one
    pair per swept value.

    :param paths: list of string.
    :return: list of tuple.
    """
    expanded = []
    for path in paths:
        sweep_path = os.path.join(path, 'sweep.json')
        if os.path.exists(sweep_path):
            with open(sweep_path, 'r', encoding='utf-8') as file:
                sweep_manifest = json.loads(file.read())
            for value, sub in zip(sweep_manifest['values'], sweep_manifest['folders']):
                expanded.append(('{0}={1}'.format(sweep_manifest['axis'], value), os.path.join(path, sub)))
        else:
            _, manifest = load_results(path)
            expanded.append((manifest['condition'], path))
    return expanded


def aggregate(summary, metrics, resamples=10000, stats_seed=0):
    """
    Mean, standard deviation and percentile bootstrap interval per (policy, metric) across seeds.

    :param summary: pandas.DataFrame.
        Rows (policy, seed, metric, value).
    :param metrics: list of string.
    :return: pandas.DataFrame.
    """
    rows = []
    selected = summary[summary['metric'].isin(metrics)]
    for (policy, metric), group in selected.groupby(['policy', 'metric'], sort=True):
        values = group.sort_values('seed')['value'].to_numpy(dtype=float)
        stats = bootstrap_ci(values, resamples, seed=stats_seed)
        rows.append({'policy': policy, 'metric': metric, 'mean': stats.point, 'std': stats.std_dev,
                     'ci_low': stats.ci_low, 'ci_high': stats.ci_high, 'n_seeds': stats.n_seeds})
    return pd.DataFrame(rows, columns=['policy', 'metric', 'mean', 'std', 'ci_low', 'ci_high', 'n_seeds'])


TABLE_METRICS = {
    't1': ['misroute[hard]', 'misroute[sparse]', 'divergence_plateau'],
    't2': ['misroute[hard]', 'misroute[sparse]', 'misroute[rare]', 'subtask_success'],
    't5': ['misroute', 'misroute_post_event', 'misroute[drift]', 'recovery_windows', 'recovered'],
    'noise_sweep': ['misroute', 'misroute[hard]', 'misroute[sparse]', 'subtask_success', 'task_success'],
    'gamma_sweep': ['misroute', 'misroute[hard]', 'misroute[sparse]', 'penalty_flip_rate'],
    'scaling': ['misroute', 'misroute[hard]', 'misroute[easy]'],
}
TABLES = sorted(TABLE_METRICS) + ['regret']


def regret_curves(folder):
    """
    Seed-mean cumulative regret after every subtask, per policy.

    :return: pandas.DataFrame.
        Columns policy, T, cumulative_regret.
    """
    _, manifest = load_results(folder)
    frames = []
    for name in manifest['policies']:
        curves = [cumulative_regret(RunRecord.load(os.path.join(folder, 'logs', RunRecord(name, seed).file_name)))
                  for seed in manifest['seeds']]
        length = min(len(curve) for curve in curves)
        mean = np.mean([curve[:length] for curve in curves], axis=0)
        frames.append(pd.DataFrame({'policy': name, 'T': np.arange(1, length + 1), 'cumulative_regret': mean}))
    return pd.concat(frames, ignore_index=True)


def report(paths, table, out=None, resamples=10000, stats_seed=0):
    """
    Builds a report table from result folders and writes it to tables/<table>.csv.

    :param paths: string or list of string.
        Result folders (run or sweep folders).
    :param table: string.
        One of TABLES.
    :param out: string.
        Folder receiving tables/; defaults to the first path.
    :return: pandas.DataFrame.
    """
    if isinstance(paths, str):
        paths = [paths]
    if table not in TABLES:
        raise ConfigError('Unknown table {0}, expected one of {1}'.format(table, TABLES))
    out = set_output_folder(out or paths[0])
    if table == 'regret':
        frame = pd.concat([regret_curves(path).assign(condition=label) for label, path in conditions(paths)],
                          ignore_index=True)
        frame = frame[['condition', 'policy', 'T', 'cumulative_regret']]
    else:
        frames = []
        for label, path in conditions(paths):
            summary, _ = load_results(path)
            frames.append(aggregate(summary, TABLE_METRICS[table], resamples, stats_seed).assign(condition=label))
        frame = pd.concat(frames, ignore_index=True)
        frame = frame[['condition', 'policy', 'metric', 'mean', 'std', 'ci_low', 'ci_high', 'n_seeds']]
    path = os.path.join(out, 'tables', '{0}.csv'.format(table))
    frame.to_csv(path, index=False)
    logger.info('Table {0} written to {1}'.format(table, path))
    return frame


SWEEP_AXES = ('sigma', 'tagger_accuracy', 'gamma', 'agent_count', 'bucket_granularity')


def sweep(config, axis, values, folder=None):
    """
    Runs the experiment once per value of one axis, everything else fixed, and writes
    sensitivity.csv and sweep.json next to the per-value result folders.

    :param config: ExperimentConfig or string.
    :param axis: string.
        One of SWEEP_AXES.
    :param values: list.
    :param folder: string.
    :return: pandas.DataFrame.
        The sensitivity table.
    """
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_file(config)
    if axis not in SWEEP_AXES:
        raise ConfigError('Unknown sweep axis {0}, expected one of {1}'.format(axis, SWEEP_AXES))
    if axis == 'agent_count' and config.preset != 'rq1_scaling':
        raise ConfigError('The agent_count axis needs the rq1_scaling preset')
    folder = set_output_folder(folder or config.out)
    frames, subfolders, statuses = [], [], []
    for value in values:
        if axis == 'agent_count':
            variant = config.override(preset_args=dict(config.preset_args, k=int(value)))
        elif axis == 'bucket_granularity':
            variant = config.override(granularity=int(value))
        else:
            variant = config.override(**{axis: value})
        sub = normalize('{0}-{1}'.format(axis, value))
        manifest = run_experiment(variant, os.path.join(folder, sub))
        statuses.append(manifest['status'])
        subfolders.append(sub)
        summary = pd.read_csv(os.path.join(folder, sub, 'summary.csv'))
        grouped = summary.groupby(['policy', 'metric'], sort=True)['value'].agg(['mean', 'std']).reset_index()
        frames.append(grouped.assign(axis=axis, value=value))
    frame = pd.concat(frames, ignore_index=True)[['axis', 'value', 'policy', 'metric', 'mean', 'std']]
    frame.to_csv(os.path.join(folder, 'sensitivity.csv'), index=False)
    status = 'partial' if 'partial' in statuses else 'complete'
    with open(os.path.join(folder, 'sweep.json'), 'w', encoding='utf-8') as file:
        file.write(json.dumps({'axis': axis, 'values': list(values), 'folders': subfolders, 'status': status},
                              sort_keys=True, indent=2) + '\n')
    return frame
