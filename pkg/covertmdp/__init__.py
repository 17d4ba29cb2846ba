#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Core MDP evaluation
===================

Models and policies
-------------------
.. autosummary::
    :toctree: generated/

    Mdp
    uniform_policy
    deterministic_policy
    unreachable_states

Induced Markov chains
---------------------
.. autosummary::
    :toctree: generated/

    induced_transition_matrix
    stationary_distribution
    doublet_distribution
    state_action_frequencies
    sample_trajectory

Rewards
-------
.. autosummary::
    :toctree: generated/

    average_reward
    regret
    differential_values
    policy_iteration

Submodules
----------
- `covertmdp.statistics`: trajectories, empirical statistics, divergences
- `covertmdp.covert`: perfectly covert policies
- `covertmdp.detection`: detectors and their error rates
- `covertmdp.exponents`: asymptotic error exponents
- `covertmdp.adversary`: regret maximization under a covertness budget
- `covertmdp.harness`: reproducible experiments
- `covertmdp.util`: validation, projections and file IO
"""

from .version import version as __version__
from .version import show_versions

# And all the covertmdp sub-modules
from ._cache import cache
from . import util
from . import core
from . import statistics
from . import covert
from . import detection
from . import exponents
from . import adversary
from . import harness

# Exporting exception classes at the top level
from .util.exceptions import *  # pylint: disable=wildcard-import

# Exporting example loaders at the top level
from .util.files import example, ex

# Exporting all core functions is okay here: suppress the import warning
from .core import *  # pylint: disable=wildcard-import
