#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Utility functions for dealing with files"""

import csv
import json
import os
from pathlib import Path

import numpy as np
from pkg_resources import resource_filename

from .exceptions import ParameterError
from .utils import valid_int, valid_policy


__all__ = [
    "load_json",
    "load_mdp",
    "save_mdp",
    "load_policy",
    "save_policy",
    "load_trajectory",
    "save_trajectory",
    "example",
    "ex",
    "list_examples",
    "example_info",
]


__DATA_DIR = Path(resource_filename(__name__, "example_data"))

with open(str(__DATA_DIR / "index.json"), "r") as fdesc:
    __EXAMPLES = json.load(fdesc)


def load_json(path):
    """Read a JSON document, reporting decoding failures by line and column.

    Parameters
    ----------
    path : str or pathlib.Path
        Path to the JSON file

    Returns
    -------
    data : object
        The decoded document

    Raises
    ------
    ParameterError
        If the file does not exist or is not valid JSON.
    """
    path = str(path)
    if not os.path.isfile(path):
        raise ParameterError("File not found: {}".format(path))

    with open(path, "r") as fdesc:
        try:
            return json.load(fdesc)
        except json.JSONDecodeError as exc:
            raise ParameterError(
                "{}:{}:{}: invalid JSON: {}".format(path, exc.lineno, exc.colno, exc.msg)
            )


def _field(doc, key, path):
    try:
        return doc[key]
    except (KeyError, TypeError):
        raise ParameterError("{}: missing field '{}'".format(path, key))


def load_mdp(path):
    """Load an MDP from its JSON description.

    The document holds the fields ``num_states``, ``num_actions``,
    ``transition`` (nested ``[s][a][s']``), ``reward`` (``[s][a]``)
    and ``initial`` (``[s]``).

    Parameters
    ----------
    path : str or pathlib.Path
        Path to the JSON file

    Returns
    -------
    mdp : covertmdp.Mdp
        The validated model

    Raises
    ------
    ParameterError
        If a field is missing, has the wrong shape, or the model fails
        validation (including the recurrence check).

    See Also
    --------
    save_mdp
    covertmdp.Mdp
    """
    from ..core.mdp import Mdp

    doc = load_json(path)
    num_states = valid_int(_field(doc, "num_states", path), cast=int)
    num_actions = valid_int(_field(doc, "num_actions", path), cast=int)

    try:
        transition = np.asarray(_field(doc, "transition", path), dtype=np.float64)
        reward = np.asarray(_field(doc, "reward", path), dtype=np.float64)
        initial = np.asarray(_field(doc, "initial", path), dtype=np.float64)
    except ValueError as exc:
        raise ParameterError("{}: ragged or non-numeric array: {}".format(path, exc))

    if transition.shape != (num_states, num_actions, num_states):
        raise ParameterError(
            "{}: transition has shape={}, expected {}".format(
                path, transition.shape, (num_states, num_actions, num_states)
            )
        )

    try:
        return Mdp(transition=transition, reward=reward, initial=initial)
    except ParameterError as exc:
        raise ParameterError("{}: {}".format(path, exc))


def save_mdp(mdp, path):
    """Write an MDP to a JSON file readable by `load_mdp`.

    Parameters
    ----------
    mdp : covertmdp.Mdp
        The model to store

    path : str or pathlib.Path
        Destination file
    """
    doc = dict(
        num_states=mdp.num_states,
        num_actions=mdp.num_actions,
        transition=mdp.transition.tolist(),
        reward=mdp.reward.tolist(),
        initial=mdp.initial.tolist(),
    )
    with open(str(path), "w") as fdesc:
        json.dump(doc, fdesc, indent=2)


def load_policy(path, mdp=None):
    """Load a stationary policy from ``{"probs": [[...], ...]}``.

    Parameters
    ----------
    path : str or pathlib.Path
        Path to the JSON file

    mdp : covertmdp.Mdp or None
        If provided, the policy dimensions are checked against it

    Returns
    -------
    policy : np.ndarray [shape=(num_states, num_actions)]
        The validated policy
    """
    doc = load_json(path)
    try:
        policy = np.asarray(_field(doc, "probs", path), dtype=np.float64)
    except ValueError as exc:
        raise ParameterError("{}: ragged or non-numeric array: {}".format(path, exc))

    try:
        if mdp is None:
            valid_policy(policy)
        else:
            valid_policy(policy, mdp.num_states, mdp.num_actions)
    except ParameterError as exc:
        raise ParameterError("{}: {}".format(path, exc))

    return policy


def save_policy(policy, path):
    """Write a policy to a JSON file readable by `load_policy`."""
    with open(str(path), "w") as fdesc:
        json.dump(dict(probs=np.asarray(policy).tolist()), fdesc)


def load_trajectory(path, num_states=None, seed=0, policy_label=""):
    """Load a state sequence.

    Two formats are supported: a CSV file with the header ``step,state``,
    or a flat binary ``.npy`` array of state indices.

    Parameters
    ----------
    path : str or pathlib.Path
        Path to the trajectory file

    num_states : int or None
        If provided, every state index must lie in ``[0, num_states)``

    seed : int
    policy_label : str
        Generation metadata attached to the result

    Returns
    -------
    traj : covertmdp.statistics.Trajectory

    Raises
    ------
    ParameterError
        On a malformed row (reported with its line number)
        or an out-of-range state index.
    """
    from ..statistics import Trajectory

    path = str(path)
    if not os.path.isfile(path):
        raise ParameterError("File not found: {}".format(path))

    if path.endswith(".npy"):
        states = np.load(path)
    else:
        states = []
        with open(path, "r", newline="") as fdesc:
            reader = csv.reader(fdesc)
            header = next(reader, None)
            if header != ["step", "state"]:
                raise ParameterError(
                    "{}:1: expected header 'step,state', got {}".format(path, header)
                )
            for lineno, row in enumerate(reader, start=2):
                try:
                    step, state = (int(v) for v in row)
                except ValueError:
                    raise ParameterError("{}:{}: malformed row {}".format(path, lineno, row))
                if step != len(states):
                    raise ParameterError(
                        "{}:{}: expected step {}, got {}".format(
                            path, lineno, len(states), step
                        )
                    )
                states.append(state)

    states = np.asarray(states, dtype=np.int64)
    if num_states is not None:
        bad = np.flatnonzero((states < 0) | (states >= num_states))
        if bad.size:
            raise ParameterError(
                "{}: step {} has state {} outside [0, {})".format(
                    path, bad[0], states[bad[0]], num_states
                )
            )

    return Trajectory(states=states, seed=seed, policy_label=policy_label)


def save_trajectory(traj, path):
    """Write a trajectory as CSV (``step,state``) or ``.npy`` by file extension."""
    path = str(path)
    if path.endswith(".npy"):
        np.save(path, np.asarray(traj.states, dtype=np.int64))
        return

    with open(path, "w", newline="") as fdesc:
        writer = csv.writer(fdesc)
        writer.writerow(["step", "state"])
        for step, state in enumerate(traj.states):
            writer.writerow([step, int(state)])


def example(key, kind="mdp"):
    """Retrieve the path of a bundled example model or policy.

    Parameters
    ----------
    key : str
        The identifier of the example, see `list_examples`

    kind : str
        ``'mdp'`` for the model, ``'policy'`` for the controller's policy,
        or ``'adversary'`` for a bundled adversarial policy (where available)

    Returns
    -------
    path : str
        Path to the requested JSON file

    Examples
    --------
    >>> mdp = covertmdp.util.load_mdp(covertmdp.ex('duplicate-rows'))
    >>> pi_star = covertmdp.util.load_policy(covertmdp.ex('duplicate-rows', kind='policy'))

    See Also
    --------
    list_examples
    example_info
    """
    if key not in __EXAMPLES:
        raise ParameterError("Unknown example key: {}".format(key))

    if kind not in ("mdp", "policy", "adversary"):
        raise ParameterError("Unknown example kind: {}".format(kind))

    if kind == "adversary" and not __EXAMPLES[key]["adversary"]:
        raise ParameterError("Example {} has no adversarial policy".format(key))

    return str(__DATA_DIR / "{}.{}.json".format(key, kind))


ex = example
"""Alias for example"""


def list_examples():
    """List the bundled example models with a brief description."""
    print("AVAILABLE EXAMPLES")
    print("-" * 68)
    for key in sorted(__EXAMPLES.keys()):
        print("{:16}\t{}".format(key, __EXAMPLES[key]["desc"]))


def example_info(key):
    """Display a summary of a bundled example model.

    Parameters
    ----------
    key : str
        The identifier of the example
    """
    mdp = load_mdp(example(key))
    print("{:16}\t{}".format(key, __EXAMPLES[key]["desc"]))
    print("-" * 68)
    print("states={}, actions={}".format(mdp.num_states, mdp.num_actions))
