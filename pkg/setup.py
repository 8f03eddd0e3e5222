#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""The setup script."""

from setuptools import setup, find_packages

with open('README.rst') as readme_file:
    readme = readme_file.read()

with open('HISTORY.rst') as history_file:
    history = history_file.read()

with open('docs/usage.rst') as usage_file:
    usage = usage_file.read()

requirements = [
    'Click>=6.0',
    'gevent',
    'numpy>=1.17',
    'pandas>=0.24',
]

setup_requirements = [
    'pytest'
]

test_requirements = [
    'Sphinx',
    'docutils',
    'pytest',
    'pytest-cov',
    'Click>=6.0',
    'gevent',
    'numpy>=1.17',
    'pandas>=0.24',
]

setup(
    name='calibroute',
    version='0.1.0',
    description="Calibroute is a simulation harness for context-aware, uncertainty-penalised delegation between LLM agents. "
                "Agents keep Beta beliefs about their peers per skill and context bucket, transfer evidence to unseen buckets "
                "and delegate by lower confidence bound",
    long_description=readme + '\n\n' + usage + '\n\n' + history,
    author="SekouD",
    author_email='sekoud.python@gmail.com',
    url='https://github.com/SekouD/calibroute',
    packages=find_packages(include=['calibroute']),
    entry_points={
        'console_scripts': [
            'calibroute=calibroute.cli:main'
        ]
    },
    include_package_data=True,
    install_requires=requirements,
    license="MIT license",
    zip_safe=False,
    keywords='calibroute multi-agent delegation trust beta-bernoulli lower-confidence-bound routing simulation',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'Topic :: Software Development :: Libraries :: Python Modules',
        'Intended Audience :: Developers',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.6',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
    ],
    test_suite='tests',
    tests_require=test_requirements,
    setup_requires=setup_requirements,
)
