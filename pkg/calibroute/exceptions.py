# -*- coding: utf-8 -*-

"""Exceptions raised by calibroute."""


class CalibrouteError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameterError(CalibrouteError, ValueError):
    """A numeric parameter is outside its legal range."""


class NotRegisteredError(CalibrouteError, KeyError):
    """An agent or a skill is unknown to the registry."""

    def __str__(self):
        return Exception.__str__(self)


class TransferAfterDataError(CalibrouteError):
    """Cold-start transfer was requested on a cell that already holds observations."""


class NoEligibleAgentError(CalibrouteError):
    """No registered agent declares the requested skill."""

    def __init__(self, skill):
        super(NoEligibleAgentError, self).__init__('No agent declares the skill {0}'.format(skill))
        self.skill = skill


class InvalidInputError(CalibrouteError, ValueError):
    """Inputs have the wrong shape for the requested computation."""


class UndefinedMetricError(CalibrouteError, ValueError):
    """A metric has no data to be computed from."""


class ConfigError(CalibrouteError):
    """
    The experiment configuration is invalid.

    :param message: string.
    :param path: string.
        Config file the error was found in.
    :param line: integer.
        1-based line of the offending key, when known.
    """

    def __init__(self, message, path=None, line=None):
        self.message = message
        self.path = path
        self.line = line
        super(ConfigError, self).__init__(self.__str__())

    def __str__(self):
        if self.path and self.line:
            return '{0}:{1}: {2}'.format(self.path, self.line, self.message)
        if self.path:
            return '{0}: {1}'.format(self.path, self.message)
        return self.message


class MissingInputError(CalibrouteError):
    """
    Run logs needed by a report are absent.

    :param missing: list.
        (policy, seed) pairs without a log file.
    """

    def __init__(self, missing, folder=None):
        self.missing = sorted(missing)
        self.folder = folder
        where = ' in {0}'.format(folder) if folder else ''
        if not self.missing:
            message = 'No results{0}'.format(where)
        else:
            pairs = ', '.join('{0}/seed {1}'.format(policy, seed) for policy, seed in self.missing)
            message = 'Missing run logs{0}: {1}'.format(where, pairs)
        super(MissingInputError, self).__init__(message)
