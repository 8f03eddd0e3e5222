# -*- coding: utf-8 -*-

"""Top-level package for Calibroute."""

__author__ = """SekouD"""
__email__ = 'sekoud.python@gmail.com'
__version__ = '0.1.0'

from .models import ContextBucket, BetaParams, Subtask, Task, TaskAnnotation, DelegationDecision, RunRecord
from .trust import CapabilityProfile, TransferResult
from .delegation import SkillRegistry, PolicyParams
from .world import WorldModel, DriftPattern, TaskSpec, build_world, PRESETS
from .policies import (ContextualLCB, BucketMean, StaticSkill, ThompsonSampling, FixedOrchestrator,
                       ContextualOracle, Monolithic, POLICIES, make_policy)
from .experiment import ExperimentConfig, run_experiment, report, sweep
