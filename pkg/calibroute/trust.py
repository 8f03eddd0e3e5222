# -*- coding: utf-8 -*-

"""Beta-posterior bookkeeping.

Every agent keeps a private CapabilityProfile: one Beta posterior per (peer, skill, bucket)
cell, initialised from the peer's self-report and updated with judged outcomes. Profiles
are single-owner state; the module never mutates one profile from another.

"""

import math

from .models import BetaParams, ContextBucket, DIFFICULTIES
from .exceptions import InvalidParameterError, NotRegisteredError, TransferAfterDataError, InvalidInputError
from .utils import logger

C_MIN = 0.01
DEFAULT_C_SELF = 0.5
MAX_TRANSFER_MASS = 2.0


class TransferResult(object):
    """Outcome of a cold-start transfer attempt."""
    APPLIED = 'applied'
    NO_NEIGHBOR = 'no-neighbor'


def clamp_confidence(c_self):
    """
    Clamps a self-declared confidence to [C_MIN, 1 - C_MIN] so that both Beta parameters stay positive.

    :param c_self: float.
    :return: float.
    """
    return min(max(float(c_self), C_MIN), 1.0 - C_MIN)


def init_prior(c_self, kappa):
    """
    Builds the self-report prior alpha = kappa * c, beta = kappa * (1 - c).

    :param c_self: float.
        Self-declared confidence in [0, 1].
    :param kappa: float.
        Prior strength.
    :return: BetaParams.
    """
    if not kappa > 0:
        raise InvalidParameterError('kappa must be positive, got {0}'.format(kappa))
    c = clamp_confidence(c_self)
    return BetaParams(kappa * c, kappa * (1.0 - c), n=0, c_self=c)


def posterior_mean(p):
    return p.alpha / (p.alpha + p.beta)


def posterior_variance(p):
    total = p.alpha + p.beta
    return p.alpha * p.beta / (total * total * (total + 1.0))


def neighbor_buckets(z):
    """
    Buckets at Hamming distance 1, difficulty neighbours first (easy and hard are not adjacent),
    then the dependency flip, then the tool_use flip.

    :param z: ContextBucket.
    :return: list of ContextBucket.
    """
    neighbors = []
    i = DIFFICULTIES.index(z.difficulty)
    for j in (i - 1, i + 1):
        if 0 <= j < len(DIFFICULTIES):
            neighbors.append(ContextBucket(DIFFICULTIES[j], z.dependency, z.tool_use))
    dependency = 'chained' if z.dependency == 'isolated' else 'isolated'
    neighbors.append(ContextBucket(z.difficulty, dependency, z.tool_use))
    tool_use = 'no' if z.tool_use == 'yes' else 'yes'
    neighbors.append(ContextBucket(z.difficulty, z.dependency, tool_use))
    return neighbors


def transfer_shift(kappa, n, m, q, mu_before):
    """
    Signed change of the posterior mean caused by adding m pseudo-observations of mean q
    to a cell holding kappa + n mass with mean mu_before.

    :return: float.
    """
    return m / (kappa + n + m) * (q - mu_before)


def transfer_bias_bound(m, n, mismatch):
    """
    Upper bound m / (m + n) * |mismatch| on the transfer bias.

    :return: float.
    """
    if m + n == 0:
        return 0.0
    return m / float(m + n) * abs(mismatch)


def misreport_gap(kappa, c_inflated, c_honest, n):
    """
    Difference between the posterior means of an inflated and an honest self-report after
    the same n outcomes.

    :return: float.
    """
    return kappa * (clamp_confidence(c_inflated) - clamp_confidence(c_honest)) / (kappa + n)


class CapabilityProfile(object):
    """
    One agent's local beliefs about its peers (itself included).

    Cells are created lazily on first read from the declared self-report of the (peer, skill)
    pair; a fresh cell may borrow pseudo-count mass once from the first neighbouring bucket
    that already holds observations. A non-contextual profile collapses the bucket dimension:
    all buckets share one cell per (peer, skill).

    :param owner: agent id.
    :param registry: delegation.SkillRegistry or None.
        Used to reject unknown peers and skills.
    :param declarations: dict.
        Self-reports keyed (peer, skill, bucket); a None bucket declares every bucket.
    :param kappa: float.
        Prior strength.
    :param transfer_mass: float.
        Pseudo-count mass borrowed by a cold cell, at most 2.
    :param contextual: bool.
        False keys cells by (peer, skill) only.
    """
    __slots__ = ('owner', 'registry', 'declarations', 'kappa', 'transfer_mass', 'contextual', 'cells')

    def __init__(self, owner, registry=None, declarations=None, kappa=2.0, transfer_mass=2.0, contextual=True):
        if not kappa > 0:
            raise InvalidParameterError('kappa must be positive, got {0}'.format(kappa))
        if not 0 <= transfer_mass <= MAX_TRANSFER_MASS:
            raise InvalidParameterError('transfer_mass must be in [0, {0}], got {1}'.format(MAX_TRANSFER_MASS,
                                                                                         transfer_mass))
        self.owner = owner
        self.registry = registry
        self.declarations = declarations if declarations is not None else {}
        self.kappa = float(kappa)
        self.transfer_mass = float(transfer_mass)
        self.contextual = contextual
        self.cells = {}

    def __repr__(self):
        return '{0}.{1}({2}, cells={3})'.format(__name__, self.__class__.__name__, self.owner, len(self.cells))

    def __len__(self):
        return len(self.cells)

    def __contains__(self, key):
        return key in self.cells

    def __iter__(self):
        return iter(sorted(self.cells, key=_cell_sort_key))

    def key(self, peer, skill, bucket):
        return (peer, skill, bucket if self.contextual else None)

    def _check(self, peer, skill):
        if self.registry is None:
            return
        if peer not in self.registry.agents:
            raise NotRegisteredError('Agent {0} is not registered'.format(peer))
        if skill not in self.registry.skills:
            raise NotRegisteredError('Skill {0} is not in the skill vocabulary'.format(skill))

    def declared_confidence(self, peer, skill, bucket):
        """
        Self-report for a cell. Missing declarations default to 0.5. A non-contextual profile
        averages the peer's per-bucket declarations for the skill.

        :return: float.
        """
        if self.contextual:
            if (peer, skill, bucket) in self.declarations:
                return self.declarations[(peer, skill, bucket)]
            return self.declarations.get((peer, skill, None), DEFAULT_C_SELF)
        values = [c for (a, s, _), c in self.declarations.items() if a == peer and s == skill]
        if not values:
            return DEFAULT_C_SELF
        return sum(values) / len(values)

    def cell(self, peer, skill, bucket):
        """
        Returns the cell, creating it from the prior on first read.

        :param peer: agent id.
        :param skill: string.
        :param bucket: ContextBucket.
        :return: BetaParams.
        """
        found = self.cells.get(self.key(peer, skill, bucket))
        if found is not None:
            return found
        found = self.prior_cell(peer, skill, bucket)
        if self.contextual and self.transfer_mass > 0:
            source = self.transfer_source(peer, skill, bucket)
            if source is not None:
                cold_start_transfer(self, peer, skill, bucket, source, self.transfer_mass)
        return found

    def prior_cell(self, peer, skill, bucket):
        """Creates the cell from the self-report prior alone, without transfer."""
        key = self.key(peer, skill, bucket)
        self._check(peer, skill)
        cell = init_prior(self.declared_confidence(peer, skill, key[2]), self.kappa)
        self.cells[key] = cell
        return cell

    def transfer_source(self, peer, skill, bucket):
        """
        First neighbouring bucket, in neighbour order, whose cell holds observations.

        :return: ContextBucket or None.
        """
        for neighbor in neighbor_buckets(bucket):
            source = self.cells.get((peer, skill, neighbor))
            if source is not None and source.n > 0:
                return neighbor
        return None

    def update(self, peer, skill, bucket, outcome):
        cell = self.cell(peer, skill, bucket)
        outcome = 1 if outcome else 0
        cell.alpha += outcome
        cell.beta += 1 - outcome
        cell.n += 1
        return cell

    def observe_history(self, peer, skill, bucket, successes, failures):
        """
        Pre-loads a track record as ordinary observations.

        :return: BetaParams.
        """
        cell = self.cell(peer, skill, bucket)
        cell.alpha += successes
        cell.beta += failures
        cell.n += successes + failures
        return cell

    def observed_cells(self):
        return [(key, self.cells[key]) for key in self if self.cells[key].n > 0]

    def to_dict(self):
        """
        JSON shape {owner, kappa, cells: [{peer, skill, bucket, alpha, beta, n, c_self}]}.

        :return: dict.
        """
        cells = []
        for key in self:
            peer, skill, bucket = key
            cell = self.cells[key]
            cells.append({'peer': peer, 'skill': skill,
                          'bucket': bucket.to_dict() if bucket is not None else None,
                          'alpha': cell.alpha, 'beta': cell.beta, 'n': cell.n, 'c_self': cell.c_self})
        return {'owner': self.owner, 'kappa': self.kappa, 'cells': cells}

    @classmethod
    def from_dict(cls, data, registry=None):
        contextual = all(item['bucket'] is not None for item in data['cells'])
        profile = cls(data['owner'], registry=registry, kappa=data['kappa'], contextual=contextual)
        for item in data['cells']:
            bucket = ContextBucket.from_dict(item['bucket']) if item['bucket'] is not None else None
            profile.cells[(item['peer'], item['skill'], bucket)] = BetaParams(
                item['alpha'], item['beta'], item['n'], item['c_self'])
        return profile


def _cell_sort_key(key):
    peer, skill, bucket = key
    return (str(peer), str(skill), bucket._key() if bucket is not None else ())


def update_outcome(profile, peer, skill, bucket, outcome):
    """
    Conjugate update alpha += outcome, beta += 1 - outcome, n += 1 of one cell.

    :param profile: CapabilityProfile.
    :param peer: agent id.
    :param skill: string.
    :param bucket: ContextBucket.
    :param outcome: integer or bool.
    :return: BetaParams.
        The updated cell.
    """
    return profile.update(peer, skill, bucket, outcome)


def cold_start_transfer(profile, peer, skill, target, source, m):
    """
    Seeds a cold cell with m pseudo-observations split (m * q, m * (1 - q)), q being the
    posterior mean of the source bucket.

    :param profile: CapabilityProfile.
    :param peer: agent id.
    :param skill: string.
    :param target: ContextBucket.
    :param source: ContextBucket or None.
    :param m: float.
        Pseudo-count mass, at most the profile's transfer_mass.
    :return: tuple(BetaParams, string).
        The target cell and TransferResult.APPLIED or TransferResult.NO_NEIGHBOR.
    """
    if m < 0 or m > profile.transfer_mass:
        raise InvalidParameterError('Transfer mass {0} exceeds the cap {1}'.format(m, profile.transfer_mass))
    key = profile.key(peer, skill, target)
    cell = profile.cells.get(key)
    if cell is None:
        cell = profile.prior_cell(peer, skill, target)
    if cell.n > 0:
        raise TransferAfterDataError('Cell ({0}, {1}, {2}) already holds {3} observations'.format(
            peer, skill, target, cell.n))
    source_cell = profile.cells.get(profile.key(peer, skill, source)) if source is not None else None
    if source_cell is None or cell.transferred > 0:
        return cell, TransferResult.NO_NEIGHBOR
    q = posterior_mean(source_cell)
    cell.alpha += m * q
    cell.beta += m * (1.0 - q)
    cell.transferred = m
    logger.debug('{0}: transferred {1} pseudo-counts to ({2}, {3}, {4}) from {5}'.format(
        profile.owner, m, peer, skill, target, source))
    return cell, TransferResult.APPLIED


def belief_divergence(profiles):
    """
    Largest disagreement between two profiles' posterior means on a shared cell.

    :param profiles: list of CapabilityProfile.
    :return: float.
        0.0 when no cell is shared.
    """
    profiles = list(profiles)
    if len(profiles) < 2:
        raise InvalidInputError('belief divergence needs at least two profiles')
    means = {}
    for profile in profiles:
        for key, cell in profile.cells.items():
            means.setdefault(key, []).append(posterior_mean(cell))
    divergence = 0.0
    for values in means.values():
        if len(values) >= 2:
            divergence = max(divergence, max(values) - min(values))
    return divergence


def lcb(cell, gamma):
    """Posterior mean minus gamma posterior standard deviations."""
    return posterior_mean(cell) - gamma * math.sqrt(posterior_variance(cell))
