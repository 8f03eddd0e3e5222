# -*- coding: utf-8 -*-

"""Utilities."""

import os
import re
import zlib
import logging

import numpy as np

logger = logging.getLogger(__name__.split('.')[0])

level = 'WARNING'
fmt = '\r%(asctime)s%(levelname)8s%(filename)15s %(lineno)4s: %(message)s'
logging.basicConfig(format=fmt, level=level)

# Bumped whenever the mapping from stream tags to generator states changes.
RNG_VERSION = 1


def normalize(value):
    """
    Normalizes a value for use in a file name: removes non-alphanumeric characters
    (dots and underscores are kept) and converts spaces to hyphens.

    :param value: object.
        Anything with a string representation.
    :return: string.
        Cleaned string.
    """
    value = re.sub(r'[^\w\s.-]', '', str(value)).strip()
    value = re.sub(r'[-\s]+', '-', value)
    return value


def set_output_folder(folder):
    """
    Sets the folder in which run logs, tables and manifests are written.

    :param folder: string.
        Folder path. Defaults to ./results when empty.
    :return: string.
        Folder path.
    """
    if not folder:
        folder = os.path.join(os.getcwd(), 'results')
    for sub in ('logs', 'tables'):
        path = os.path.join(folder, sub)
        if not os.path.exists(path):
            os.makedirs(path)
    return folder


def stream_key(tag):
    """
    Stable integer for a stream tag. Python's hash() is salted per process, CRC32 is not.

    :param tag: string or integer.
    :return: integer.
    """
    if isinstance(tag, (int, np.integer)):
        return int(tag)
    return zlib.crc32(str(tag).encode('utf-8')) & 0xFFFFFFFF


def substream(master_seed, *tags):
    """
    Creates an independent random generator for a named substream.

    Streams are PCG64 generators seeded from ``SeedSequence(master_seed, spawn_key=tags)``,
    so (master_seed, seed_index, policy, stream_tag) fully specifies every draw.

    :param master_seed: integer.
    :param tags: strings or integers naming the substream.
    :return: numpy.random.Generator.
    """
    keys = tuple(stream_key(tag) for tag in tags)
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=keys)
    return np.random.Generator(np.random.PCG64(sequence))
