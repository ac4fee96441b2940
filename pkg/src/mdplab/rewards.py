"""Weighted, utility-filtered reward stacks and optimal-policy divergence.

A hierarchy is an ordered list of reward levels (say individual, group,
humanity), each a full (state, action) table with a nonnegative weight and an
optional monotone utility filter.  Composition is the weighted sum of the
filtered tables.  Divergence between two reward definitions is measured at
the argmax level: the fraction of states where the two induced optimal action
sets are disjoint, which is invariant to positive affine reward changes.
"""

from dataclasses import dataclass, replace

import numpy as np

from .mdp import NonFiniteRewardError, SchemaError, ValidationError, with_rewards
from .solve import value_iteration

ARGMAX_TOL = 1e-7
SOLVE_EPSILON = 1e-8


class GridMismatchError(ValidationError):
    """A reward table does not cover the (state, action) grid."""


class NonMonotoneFilterError(ValidationError):
    """Utility filter knots are not a monotone piecewise-linear map."""


@dataclass(frozen=True)
class UtilityFilter:
    """Piecewise-linear monotone map given by (input, output) knots.

    Inputs must be strictly increasing and outputs nondecreasing; beyond the
    first and last knots the end segments continue linearly.
    """

    knots: tuple

    def __post_init__(self):
        knots = tuple((float(x), float(y)) for x, y in self.knots)
        if len(knots) < 2:
            raise NonMonotoneFilterError("a filter needs at least 2 knots")
        xs = [x for x, _ in knots]
        ys = [y for _, y in knots]
        if not all(np.isfinite(xs)) or not all(np.isfinite(ys)):
            raise NonMonotoneFilterError("filter knots must be finite")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise NonMonotoneFilterError("knot inputs must be strictly increasing")
        if any(b < a for a, b in zip(ys, ys[1:])):
            raise NonMonotoneFilterError("knot outputs must be nondecreasing")
        object.__setattr__(self, "knots", knots)

    def apply(self, values):
        """Evaluate the map at an array (or scalar) of inputs."""
        xs = np.array([x for x, _ in self.knots])
        ys = np.array([y for _, y in self.knots])
        values = np.asarray(values, dtype=float)
        scalar = values.ndim == 0
        flat = np.atleast_1d(values).astype(float)
        out = np.interp(flat, xs, ys)
        lo = flat < xs[0]
        if lo.any():
            slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
            out[lo] = ys[0] + slope * (flat[lo] - xs[0])
        hi = flat > xs[-1]
        if hi.any():
            slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            out[hi] = ys[-1] + slope * (flat[hi] - xs[-1])
        return float(out[0]) if scalar else out.reshape(values.shape)


@dataclass(frozen=True, eq=False)
class RewardLevel:
    """One layer of the reward stack: a named table with a weight."""

    name: str
    table: np.ndarray
    weight: float
    filter: UtilityFilter = None

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2:
            raise GridMismatchError(f"level {self.name!r} table must be (S, A)")
        if not np.all(np.isfinite(table)):
            raise NonFiniteRewardError(f"level {self.name!r} has non-finite rewards")
        weight = float(self.weight)
        if not np.isfinite(weight) or weight < 0.0:
            raise ValidationError(f"level {self.name!r} weight must be >= 0")
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "weight", weight)


@dataclass(frozen=True, eq=False)
class RewardHierarchy:
    levels: tuple

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise ValidationError("hierarchy needs at least one level")
        shape = levels[0].table.shape
        for level in levels:
            if level.table.shape != shape:
                raise GridMismatchError(
                    f"level {level.name!r} grid {level.table.shape} does not "
                    f"match {shape}"
                )
        if sum(level.weight for level in levels) <= 0.0:
            raise ValidationError("hierarchy weights must sum to a positive value")
        object.__setattr__(self, "levels", levels)


def _composed(levels, override=None):
    total = np.zeros(levels[0].table.shape)
    for i, level in enumerate(levels):
        weight = level.weight if override is None or i not in override else override[i]
        filtered = level.filter.apply(level.table) if level.filter else level.table
        total = total + weight * filtered
    return total


def compose_reward(hierarchy):
    """Weighted sum of the filtered level tables: R = sum_l w_l f_l(T_l)."""
    return _composed(hierarchy.levels)


def table_from_dict(states, actions, doc):
    """Reward table from a {state: {action: number}} document."""
    if not isinstance(doc, dict):
        raise GridMismatchError("reward table must be an object keyed by state")
    for key in doc:
        if key not in states:
            raise GridMismatchError(f"reward table mentions unknown state {key!r}")
    table = np.zeros((len(states), len(actions)))
    for i, s in enumerate(states):
        if s not in doc:
            raise GridMismatchError(f"reward table misses state {s!r}")
        row = doc[s]
        if not isinstance(row, dict):
            raise GridMismatchError(f"reward table [{s!r}] must be an object")
        for key in row:
            if key not in actions:
                raise GridMismatchError(
                    f"reward table [{s!r}] mentions unknown action {key!r}"
                )
        for j, a in enumerate(actions):
            if a not in row:
                raise GridMismatchError(f"reward table misses ({s!r}, {a!r})")
            value = row[a]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise GridMismatchError(f"reward [{s!r}][{a!r}] must be a number")
            if not np.isfinite(value):
                raise NonFiniteRewardError(f"reward [{s!r}][{a!r}] is not finite")
            table[i, j] = float(value)
    return table


def hierarchy_from_dict(doc, states, actions):
    """Hierarchy from {"levels": [{"name", "weight", "rewards", "filter"?}]}."""
    if not isinstance(doc, dict) or set(doc) != {"levels"}:
        raise SchemaError('hierarchy document must have exactly the key "levels"')
    if not isinstance(doc["levels"], list):
        raise SchemaError("levels must be a list")
    levels = []
    for entry in doc["levels"]:
        if not isinstance(entry, dict):
            raise SchemaError("each level must be an object")
        unknown = sorted(set(entry) - {"name", "weight", "rewards", "filter"})
        if unknown:
            raise SchemaError(f"unknown level keys: {unknown}")
        for key in ("name", "weight", "rewards"):
            if key not in entry:
                raise SchemaError(f"level is missing {key!r}")
        filt = None
        if "filter" in entry:
            knots = entry["filter"]
            if not isinstance(knots, list) or not all(
                isinstance(k, list) and len(k) == 2 for k in knots
            ):
                raise SchemaError("a filter is a list of [input, output] pairs")
            filt = UtilityFilter(tuple((k[0], k[1]) for k in knots))
        levels.append(
            RewardLevel(
                name=str(entry["name"]),
                table=table_from_dict(states, actions, entry["rewards"]),
                weight=entry["weight"],
                filter=filt,
            )
        )
    return RewardHierarchy(tuple(levels))


@dataclass(frozen=True, eq=False)
class DivergenceReport:
    """Per-state optimal-action sets for two reward definitions.

    ``divergence`` is the fraction of states whose argmax sets are disjoint.
    ``value_gap`` compares the two optimal value vectors after each is
    rescaled to [0, 1] (informational; values are not affine-invariant, the
    argmax sets are).
    """

    per_state: dict
    divergence: float
    value_gap: float

    def as_dict(self):
        return {
            "per_state": {
                s: {
                    "argmax_a": list(entry["argmax_a"]),
                    "argmax_b": list(entry["argmax_b"]),
                    "disjoint": entry["disjoint"],
                }
                for s, entry in self.per_state.items()
            },
            "divergence": self.divergence,
            "value_gap": self.value_gap,
        }


def _argmax_sets(q):
    top = q.max(axis=1, keepdims=True)
    return q >= top - ARGMAX_TOL


def _unit_scale(v):
    span = v.max() - v.min()
    if span <= 0.0:
        return np.zeros_like(v)
    return (v - v.min()) / span


def compare_policies(dynamics, reward_a, reward_b):
    """Solve the dynamics under both reward tables and compare optimal actions.

    Each induced MDP is solved to epsilon 1e-8; actions within 1e-7 of a
    state's best action value belong to its argmax set.
    """
    reward_a = np.asarray(reward_a, dtype=float)
    reward_b = np.asarray(reward_b, dtype=float)
    shape = (dynamics.n_states, dynamics.n_actions)
    for name, table in (("A", reward_a), ("B", reward_b)):
        if table.shape != shape:
            raise GridMismatchError(
                f"reward table {name} has shape {table.shape}, expected {shape}"
            )
    sol_a = value_iteration(with_rewards(dynamics, reward_a), SOLVE_EPSILON)
    sol_b = value_iteration(with_rewards(dynamics, reward_b), SOLVE_EPSILON)
    sets_a = _argmax_sets(sol_a.q_star.values)
    sets_b = _argmax_sets(sol_b.q_star.values)
    per_state = {}
    disjoint_count = 0
    for i, s in enumerate(dynamics.states):
        names_a = tuple(a for a, top in zip(dynamics.actions, sets_a[i]) if top)
        names_b = tuple(a for a, top in zip(dynamics.actions, sets_b[i]) if top)
        disjoint = not (set(names_a) & set(names_b))
        disjoint_count += disjoint
        per_state[s] = {"argmax_a": names_a, "argmax_b": names_b, "disjoint": disjoint}
    gap = float(
        np.abs(
            _unit_scale(sol_a.v_star.values) - _unit_scale(sol_b.v_star.values)
        ).max()
    )
    return DivergenceReport(
        per_state=per_state,
        divergence=disjoint_count / dynamics.n_states,
        value_gap=gap,
    )


def sweep_weights(dynamics, hierarchy, level_index, grid):
    """Divergence of the composed objective as one level's weight varies.

    For each weight in the grid the hierarchy is recomposed with that weight
    on the chosen level and compared (argmax divergence) against the baseline
    composition where the same level has weight zero.  Returns a list of
    (weight, divergence) pairs.
    """
    if not 0 <= level_index < len(hierarchy.levels):
        raise ValidationError(f"no level at index {level_index}")
    grid = [float(w) for w in grid]
    if not grid:
        raise ValidationError("weight grid must be nonempty")
    if any(not np.isfinite(w) or w < 0.0 for w in grid):
        raise ValidationError("weights must be finite and >= 0")
    baseline = _composed(hierarchy.levels, override={level_index: 0.0})
    out = []
    for w in grid:
        table = _composed(hierarchy.levels, override={level_index: w})
        report = compare_policies(dynamics, baseline, table)
        out.append((w, report.divergence))
    return out


def level_with_weight(hierarchy, level_index, weight):
    """Copy of the hierarchy with one level's weight replaced."""
    levels = list(hierarchy.levels)
    levels[level_index] = replace(levels[level_index], weight=weight)
    return RewardHierarchy(tuple(levels))
