"""Finite discounted MDPs: validation, serialization, sampling, evaluation.

States and actions are ordered tuples of string identifiers; transition
kernels are dense (S, A, S) arrays and rewards are (S, A) arrays.  All
container types are immutable after construction and safe to share across
threads.  Random streams (``numpy.random.Generator``, PCG64) are single-owner:
one stream per running experiment.
"""

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

ROW_SUM_TOL = 1e-9
SWEEP_TOL = 1e-12
DIRECT_SOLVE_MAX_STATES = 512

_TOP_KEYS = ("states", "actions", "gamma", "transitions", "rewards")


class ValidationError(ValueError):
    """Base class for document and input validation failures."""


class SchemaError(ValidationError):
    """Document structure is wrong: unknown keys, wrong types, bad names."""


class RowSumError(ValidationError):
    """A transition row has entries outside [0, 1] or does not sum to 1."""


class GammaRangeError(ValidationError):
    """Discount factor outside [0, 1)."""


class MissingEntryError(ValidationError):
    """A (state, action) pair lacks a transition row or a reward entry."""


class NonFiniteRewardError(ValidationError):
    """A reward entry is NaN or infinite."""


class UnknownStateError(ValidationError):
    pass


class UnknownActionError(ValidationError):
    pass


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Mdp:
    """A validated finite discounted MDP.

    ``transitions[s, a]`` is the probability row over successor states and
    sums to 1 within 1e-9; ``rewards[s, a]`` is the scalar reward for taking
    action ``a`` in state ``s``; ``reward_bound`` is max |R|.
    """

    states: tuple
    actions: tuple
    gamma: float
    transitions: np.ndarray
    rewards: np.ndarray
    reward_bound: float

    @property
    def n_states(self):
        return len(self.states)

    @property
    def n_actions(self):
        return len(self.actions)

    def state_index(self, state):
        try:
            return self.states.index(state)
        except ValueError:
            raise UnknownStateError(f"unknown state: {state!r}") from None

    def action_index(self, action):
        try:
            return self.actions.index(action)
        except ValueError:
            raise UnknownActionError(f"unknown action: {action!r}") from None


class TransitionSample(NamedTuple):
    """One observed transition (s, a, r, s')."""

    state: str
    action: str
    reward: float
    next_state: str


@dataclass(frozen=True, eq=False)
class Policy:
    """Deterministic (state -> action) or stochastic (state -> simplex row).

    ``actions`` holds action indices for deterministic policies; ``probs`` is
    an (S, A) row-stochastic matrix for stochastic ones.
    """

    kind: str
    actions: np.ndarray = None
    probs: np.ndarray = None

    @classmethod
    def deterministic(cls, action_indices):
        arr = np.asarray(action_indices)
        if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
            raise ValidationError("deterministic policy needs a 1-D integer array")
        if arr.size and arr.min() < 0:
            raise ValidationError("action indices must be nonnegative")
        arr = arr.astype(np.int64)
        arr.setflags(write=False)
        return cls("deterministic", actions=arr)

    @classmethod
    def stochastic(cls, probs):
        arr = np.asarray(probs, dtype=float)
        if arr.ndim != 2:
            raise ValidationError("stochastic policy needs an (S, A) matrix")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("policy probabilities must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValidationError("policy probabilities must lie in [0, 1]")
        if np.abs(arr.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
            raise ValidationError("policy rows must sum to 1 within 1e-9")
        arr = _frozen(arr)
        return cls("stochastic", probs=arr)

    def matrix(self, n_actions):
        """Action-probability matrix (S, A); one-hot rows when deterministic."""
        if self.kind == "deterministic":
            if self.actions.size and self.actions.max() >= n_actions:
                raise ValidationError("policy refers to an out-of-range action")
            return np.eye(n_actions)[self.actions]
        if self.probs.shape[1] != n_actions:
            raise ValidationError("policy has the wrong number of actions")
        return self.probs

    def as_dict(self, mdp):
        if self.kind == "deterministic":
            return {s: mdp.actions[a] for s, a in zip(mdp.states, self.actions)}
        return {
            s: {a: float(p) for a, p in zip(mdp.actions, row)}
            for s, row in zip(mdp.states, self.probs)
        }


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """State values; every entry is bounded by reward_bound / (1 - gamma)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    def as_dict(self, mdp):
        return {s: float(v) for s, v in zip(mdp.states, self.values)}


@dataclass(frozen=True, eq=False)
class QTable:
    """Action values indexed (state, action)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    def as_dict(self, mdp):
        return {
            s: {a: float(q) for a, q in zip(mdp.actions, row)}
            for s, row in zip(mdp.states, self.values)
        }


def _check_names(names, what):
    if not isinstance(names, (list, tuple)) or len(names) == 0:
        raise SchemaError(f"{what} must be a nonempty list of identifiers")
    for name in names:
        if not isinstance(name, str) or not name:
            raise SchemaError(f"{what} must be nonempty strings, got {name!r}")
    if len(set(names)) != len(names):
        raise SchemaError(f"duplicate {what}")
    return tuple(names)


def _as_number(value, where, err=SchemaError):
    # bool is an int subclass; JSON true/false is not a number here
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise err(f"{where} must be a number, got {value!r}")
    return float(value)


def make_mdp(states, actions, gamma, transitions, rewards):
    """Build a validated Mdp from arrays, computing the reward bound."""
    states = _check_names(states, "states")
    actions = _check_names(actions, "actions")
    gamma = _as_number(gamma, "gamma", err=GammaRangeError)
    if not (0.0 <= gamma < 1.0):
        raise GammaRangeError(f"gamma must satisfy 0 <= gamma < 1, got {gamma}")
    n_s, n_a = len(states), len(actions)
    t = np.asarray(transitions, dtype=float)
    r = np.asarray(rewards, dtype=float)
    if t.shape != (n_s, n_a, n_s):
        raise MissingEntryError(
            f"transitions must have shape {(n_s, n_a, n_s)}, got {t.shape}"
        )
    if r.shape != (n_s, n_a):
        raise MissingEntryError(f"rewards must have shape {(n_s, n_a)}, got {r.shape}")
    if not np.all(np.isfinite(t)):
        raise RowSumError("transition probabilities must be finite")
    if t.min() < 0.0 or t.max() > 1.0:
        raise RowSumError("transition probabilities must lie in [0, 1]")
    row_err = np.abs(t.sum(axis=2) - 1.0)
    if row_err.max() > ROW_SUM_TOL:
        s, a = np.unravel_index(row_err.argmax(), row_err.shape)
        raise RowSumError(
            f"transition row ({states[s]!r}, {actions[a]!r}) sums to "
            f"{t[s, a].sum()!r}, not 1 within {ROW_SUM_TOL}"
        )
    if not np.all(np.isfinite(r)):
        raise NonFiniteRewardError("rewards must be finite")
    return Mdp(states, actions, gamma, _frozen(t), _frozen(r), float(np.abs(r).max()))


def with_rewards(mdp, rewards):
    """Copy of an Mdp with its reward table replaced (bound recomputed)."""
    return make_mdp(mdp.states, mdp.actions, mdp.gamma, mdp.transitions, rewards)


def validate_mdp(doc, require_rewards=True):
    """Validate a parsed MDP document and return an Mdp.

    The document is a JSON object with exactly the keys states, actions,
    gamma, transitions, rewards.  Omitted transition targets mean probability
    zero; unknown keys are rejected.  Rewards are one number per (state,
    action); per-successor reward maps are rejected.
    """
    if not isinstance(doc, dict):
        raise SchemaError("MDP document must be a JSON object")
    known = _TOP_KEYS if require_rewards else _TOP_KEYS[:-1]
    unknown = sorted(set(doc) - set(_TOP_KEYS))
    if unknown:
        raise SchemaError(f"unknown top-level keys: {unknown}")
    missing = sorted(set(known) - set(doc))
    if missing:
        raise SchemaError(f"missing top-level keys: {missing}")
    states = _check_names(doc["states"], "states")
    actions = _check_names(doc["actions"], "actions")
    n_s, n_a = len(states), len(actions)

    tdoc = doc["transitions"]
    if not isinstance(tdoc, dict):
        raise SchemaError("transitions must be an object keyed by state")
    for key in tdoc:
        if key not in states:
            raise SchemaError(f"transitions mention unknown state {key!r}")
    transitions = np.zeros((n_s, n_a, n_s))
    for i, s in enumerate(states):
        row_doc = tdoc.get(s)
        if row_doc is None:
            raise MissingEntryError(f"no transitions for state {s!r}")
        if not isinstance(row_doc, dict):
            raise SchemaError(f"transitions[{s!r}] must be an object keyed by action")
        for key in row_doc:
            if key not in actions:
                raise SchemaError(f"transitions[{s!r}] mentions unknown action {key!r}")
        for j, a in enumerate(actions):
            entry = row_doc.get(a)
            if entry is None:
                raise MissingEntryError(f"no transition row for ({s!r}, {a!r})")
            if not isinstance(entry, dict):
                raise SchemaError(
                    f"transitions[{s!r}][{a!r}] must map successor states to probabilities"
                )
            for key in entry:
                if key not in states:
                    raise SchemaError(
                        f"transitions[{s!r}][{a!r}] mentions unknown state {key!r}"
                    )
            for k, nxt in enumerate(states):
                if nxt in entry:
                    transitions[i, j, k] = _as_number(
                        entry[nxt], f"transitions[{s!r}][{a!r}][{nxt!r}]", err=RowSumError
                    )

    rewards = np.zeros((n_s, n_a))
    if require_rewards or "rewards" in doc:
        rdoc = doc["rewards"]
        if not isinstance(rdoc, dict):
            raise SchemaError("rewards must be an object keyed by state")
        for key in rdoc:
            if key not in states:
                raise SchemaError(f"rewards mention unknown state {key!r}")
        for i, s in enumerate(states):
            row_doc = rdoc.get(s)
            if row_doc is None:
                raise MissingEntryError(f"no rewards for state {s!r}")
            if not isinstance(row_doc, dict):
                raise SchemaError(f"rewards[{s!r}] must be an object keyed by action")
            for key in row_doc:
                if key not in actions:
                    raise SchemaError(f"rewards[{s!r}] mentions unknown action {key!r}")
            for j, a in enumerate(actions):
                if a not in row_doc:
                    raise MissingEntryError(f"no reward entry for ({s!r}, {a!r})")
                entry = row_doc[a]
                if isinstance(entry, dict):
                    raise SchemaError(
                        f"rewards[{s!r}][{a!r}] maps successors to rewards; "
                        "rewards must be a single number per (state, action)"
                    )
                rewards[i, j] = _as_number(
                    entry, f"rewards[{s!r}][{a!r}]", err=NonFiniteRewardError
                )

    return make_mdp(states, actions, doc["gamma"], transitions, rewards)


def validate_dynamics(doc):
    """Like validate_mdp but the rewards key may be omitted (defaults to 0)."""
    return validate_mdp(doc, require_rewards=False)


def mdp_to_dict(mdp):
    """Serializable document for an Mdp; zero-probability targets are omitted."""
    transitions = {}
    for i, s in enumerate(mdp.states):
        transitions[s] = {}
        for j, a in enumerate(mdp.actions):
            row = mdp.transitions[i, j]
            transitions[s][a] = {
                nxt: float(p) for nxt, p in zip(mdp.states, row) if p != 0.0
            }
    rewards = {
        s: {a: float(r) for a, r in zip(mdp.actions, row)}
        for s, row in zip(mdp.states, mdp.rewards)
    }
    return {
        "states": list(mdp.states),
        "actions": list(mdp.actions),
        "gamma": mdp.gamma,
        "transitions": transitions,
        "rewards": rewards,
    }


def _load_doc(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


def load_mdp(path):
    """Read and validate an MDP JSON file."""
    return validate_mdp(_load_doc(path))


def load_dynamics(path):
    """Read an MDP JSON file whose rewards key is optional."""
    return validate_dynamics(_load_doc(path))


def step(mdp, state, action, rng):
    """Sample one transition; returns (reward, next_state).

    The successor is drawn by inverse CDF over the declared state order,
    consuming exactly one uniform from ``rng``.
    """
    s = mdp.state_index(state)
    a = mdp.action_index(action)
    cum = np.cumsum(mdp.transitions[s, a])
    nxt = int(np.searchsorted(cum, rng.random(), side="right"))
    if nxt >= mdp.n_states:
        nxt = mdp.n_states - 1
    return float(mdp.rewards[s, a]), mdp.states[nxt]


def policy_expectations(mdp, policy):
    """Per-state expected reward and the policy-induced state chain (R_pi, P_pi)."""
    if policy.kind == "deterministic":
        if len(policy.actions) != mdp.n_states:
            raise ValidationError("policy does not cover every state exactly once")
        if policy.actions.size and policy.actions.max() >= mdp.n_actions:
            raise ValidationError("policy refers to an out-of-range action")
        idx = np.arange(mdp.n_states)
        return mdp.rewards[idx, policy.actions], mdp.transitions[idx, policy.actions]
    probs = policy.matrix(mdp.n_actions)
    if probs.shape[0] != mdp.n_states:
        raise ValidationError("policy does not cover every state exactly once")
    r_pi = (probs * mdp.rewards).sum(axis=1)
    p_pi = np.einsum("sa,saz->sz", probs, mdp.transitions)
    return r_pi, p_pi


def policy_evaluate(mdp, policy):
    """Unique fixed point of V = R_pi + gamma P_pi V.

    Direct linear solve for |S| <= 512; larger problems iterate the Bellman
    expectation operator until the sup-norm change drops below 1e-12.  Either
    way the residual of the returned V is below 1e-9.
    """
    r_pi, p_pi = policy_expectations(mdp, policy)
    n = mdp.n_states
    if n <= DIRECT_SOLVE_MAX_STATES:
        v = np.linalg.solve(np.eye(n) - mdp.gamma * p_pi, r_pi)
    else:
        v = np.zeros(n)
        while True:
            nxt = r_pi + mdp.gamma * (p_pi @ v)
            done = np.abs(nxt - v).max() < SWEEP_TOL
            v = nxt
            if done:
                break
    return ValueFunction(v)
