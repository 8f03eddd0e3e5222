# -*- coding: utf-8 -*-

"""Console script for calibroute."""

import sys
import logging

import click

from .experiment import ExperimentConfig, run_experiment, report, sweep, TABLES, SWEEP_AXES
from .exceptions import CalibrouteError, ConfigError


def setup_logging(verbose=False):
    logger = logging.getLogger(__name__.split('.')[0])

    # create console handler and set level to info
    console_handler = logging.StreamHandler(sys.stdout)
    error_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
    error_handler.setLevel(logging.ERROR)
    logger.addHandler(console_handler)
    logger.addHandler(error_handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    return logger


def load_config(path, **overrides):
    config = ExperimentConfig.from_file(path) if path else ExperimentConfig()
    return config.override(**overrides)


def fail(error, code):
    click.echo('Error: {0}'.format(error), err=True)
    sys.exit(code)


@click.group()
@click.option('-v', '--verbose', is_flag=True, default=False, help='Log every delegation decision.')
def main(verbose):
    """Console script for calibroute."""
    setup_logging(verbose)


@main.command()
@click.option('-c', '--config', 'config_path', default=None, help='JSON configuration file.',
              type=click.Path(exists=True, dir_okay=False))
@click.option('--preset', default=None, help='Scenario preset.', type=click.STRING)
@click.option('-p', '--policy', 'policies', multiple=True, help='Policy to run (repeatable).', type=click.STRING)
@click.option('-s', '--seeds', default=None, help='Number of seeds.', type=click.INT)
@click.option('--master-seed', default=None, help='Master seed of every random stream.', type=click.INT)
@click.option('-t', '--tasks', default=None, help='Tasks per run.', type=click.INT)
@click.option('--gamma', default=None, help='Uncertainty penalty weight.', type=click.FLOAT)
@click.option('--delta', default=None, help='Delegation margin.', type=click.FLOAT)
@click.option('--sigma', default=None, help='Outcome noise half-width.', type=click.FLOAT)
@click.option('--tagger-accuracy', default=None, help='Context tagger accuracy.', type=click.FLOAT)
@click.option('--drift', default=None, help='Drift pattern of the rq5 preset.',
              type=click.Choice(['sudden', 'gradual', 'oscillation']))
@click.option('-k', '--agents', default=None, help='Number of agents of the rq1_scaling preset.',
              type=click.IntRange(min=2))
@click.option('--batch', default=None, help='Fixed orchestrator synchronisation interval.',
              type=click.IntRange(min=1))
@click.option('-w', '--workers', default=None, help='Concurrent runs.', type=click.INT)
@click.option('-o', '--out', default=None, help='Folder where the results will be saved.', type=click.STRING)
def run(config_path, preset, policies, seeds, master_seed, tasks, gamma, delta, sigma, tagger_accuracy, drift, agents,
        batch, workers, out):
    """Runs every (policy, seed) pair of an experiment."""
    try:
        config = load_config(config_path, preset=preset, policies=list(policies) or None, seeds=seeds,
                             master_seed=master_seed, tasks=tasks, gamma=gamma, delta=delta, sigma=sigma,
                             tagger_accuracy=tagger_accuracy, workers=workers, out=out)
        preset_args = dict(config.preset_args)
        if drift is not None:
            preset_args['drift'] = drift
        if agents is not None:
            preset_args['k'] = agents
        orchestrator = dict(config.orchestrator, batch=batch) if batch is not None else None
        config = config.override(preset_args=preset_args, orchestrator=orchestrator)
        manifest = run_experiment(config)
    except ConfigError as e:
        fail(e, 2)
    except CalibrouteError as e:
        fail(e, 1)
    if manifest['status'] != 'complete':
        fail('{0} runs failed: {1}'.format(len(manifest['failed']), manifest['failed']), 1)


@main.command(name='report')
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, file_okay=False))
@click.option('--table', required=True, help='Table to build.', type=click.Choice(TABLES))
@click.option('-o', '--out', default=None, help='Folder receiving tables/.', type=click.STRING)
@click.option('--resamples', default=10000, help='Bootstrap resamples.', type=click.INT)
@click.option('--stats-seed', default=0, help='Bootstrap seed.', type=click.INT)
def report_command(paths, table, out, resamples, stats_seed):
    """Builds a report table from result folders."""
    try:
        frame = report(list(paths), table, out, resamples, stats_seed)
    except CalibrouteError as e:
        fail(e, 1)
    click.echo(frame.to_string(index=False))


@main.command(name='sweep')
@click.option('-c', '--config', 'config_path', default=None, help='JSON configuration file.',
              type=click.Path(exists=True, dir_okay=False))
@click.option('--axis', required=True, help='Swept parameter.', type=click.Choice(SWEEP_AXES))
@click.option('--values', required=True, help='Comma-separated values.', type=click.STRING)
@click.option('--preset', default=None, help='Scenario preset.', type=click.STRING)
@click.option('-s', '--seeds', default=None, help='Number of seeds.', type=click.INT)
@click.option('-t', '--tasks', default=None, help='Tasks per run.', type=click.INT)
@click.option('-o', '--out', default=None, help='Folder where the results will be saved.', type=click.STRING)
def sweep_command(config_path, axis, values, preset, seeds, tasks, out):
    """Runs an experiment once per value of one axis."""
    cast = int if axis in ('agent_count', 'bucket_granularity') else float
    try:
        values = [cast(value) for value in values.split(',') if value.strip()]
    except ValueError:
        fail('invalid value list {0!r} for axis {1}'.format(values, axis), 2)
    try:
        config = load_config(config_path, preset=preset, seeds=seeds, tasks=tasks, out=out)
        frame = sweep(config, axis, values)
    except ConfigError as e:
        fail(e, 2)
    except CalibrouteError as e:
        fail(e, 1)
    click.echo(frame.to_string(index=False))


@main.command(name='validate-config')
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
def validate_config(path):
    """Checks a JSON configuration file."""
    try:
        config = ExperimentConfig.from_file(path)
    except ConfigError as e:
        fail(e, 2)
    click.echo('{0}: OK ({1})'.format(path, config.condition))


if __name__ == "__main__":
    main()
