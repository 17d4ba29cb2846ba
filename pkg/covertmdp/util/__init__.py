#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Utilities
=========

Input validation
----------------
.. autosummary::
    :toctree: generated/

    valid_int
    valid_distribution
    valid_stochastic
    valid_doublet
    valid_policy

Projections
-----------
.. autosummary::
    :toctree: generated/

    simplex_project
    shift_invariant_system
    shift_invariant_projector
    shift_invariant_project

File operations
---------------
.. autosummary::
    :toctree: generated/

    load_json
    load_mdp
    save_mdp
    load_policy
    save_policy
    load_trajectory
    save_trajectory
    example
    example_info
    list_examples
"""

from .utils import *  # pylint: disable=wildcard-import
from .files import *  # pylint: disable=wildcard-import
from . import exceptions

__all__ = [_ for _ in dir() if not _.startswith("_")]
