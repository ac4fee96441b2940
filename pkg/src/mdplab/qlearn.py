"""Tabular Q-learning with visit-indexed learning rates.

The learning rate applied to an update is schedule(i) where i counts how many
times that particular (state, action) pair has been updated, including the
current step.  A schedule satisfies the stochastic-approximation conditions
(Robbins-Monro) when the per-pair rates sum to infinity while their squares
sum to a finite value; ``classify_schedule`` decides this analytically for
the harmonic-power and constant families.
"""

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .mdp import QTable, ValidationError

_CHUNK = 1 << 18


class NegativeRateError(ValidationError):
    """A schedule produces a rate below 0."""


class RateAtLeastOneError(ValidationError):
    """A schedule produces rates above 1 (or a constant rate of 1 or more)."""


class TooFewCheckpointsError(ValidationError):
    """Convergence summaries need at least 10 checkpoints."""


@dataclass(frozen=True)
class LearningRateSchedule:
    """Rule mapping the i-th visit of a (state, action) pair to a step size.

    Families:
      harmonic(p): rate at visit i is i**(-p) with p > 0 (first visit rate 1).
      constant(c): rate c at every visit, 0 <= c < 1.
      from_table(values): rate at visit i is values[i - 1]; past the end of
        the table the final entry repeats.
    """

    family: str
    p: float = None
    c: float = None
    table: tuple = None

    @classmethod
    def harmonic(cls, p):
        p = float(p)
        if not np.isfinite(p):
            raise ValidationError("p must be finite")
        if p <= 0.0:
            raise RateAtLeastOneError(
                f"harmonic power must be > 0 (p={p} gives rates >= 1 forever)"
            )
        return cls("harmonic", p=p)

    @classmethod
    def constant(cls, c):
        c = float(c)
        if not np.isfinite(c) or c < 0.0:
            raise NegativeRateError(f"constant rate must be >= 0, got {c}")
        if c >= 1.0:
            raise RateAtLeastOneError(f"constant rate must be < 1, got {c}")
        return cls("constant", c=c)

    @classmethod
    def from_table(cls, values):
        values = tuple(float(v) for v in values)
        if not values:
            raise ValidationError("rate table must be nonempty")
        if any(not np.isfinite(v) or v < 0.0 for v in values):
            raise NegativeRateError("table rates must be finite and >= 0")
        if any(v > 1.0 for v in values):
            raise RateAtLeastOneError("table rates must be <= 1")
        return cls("table", table=values)

    def rate(self, i):
        """Step size for the i-th visit of a pair (i >= 1)."""
        if self.family == "harmonic":
            return i ** -self.p
        if self.family == "constant":
            return self.c
        return self.table[i - 1] if i <= len(self.table) else self.table[-1]


@dataclass(frozen=True)
class ScheduleVerdict:
    """Divergent-sum / finite-square-sum verdict for a schedule.

    ``condition_i`` is "pass" when the per-pair rates sum to infinity,
    ``condition_ii`` when the squared rates sum to a finite value; values are
    "pass", "fail", or "unknown".  ``rm_valid`` is None when indeterminate.
    For finite tables only the partial sums over the declared horizon are
    knowable, so both conditions come back unknown with the partial sums
    attached as diagnostics.
    """

    condition_i: str
    condition_ii: str
    rm_valid: bool = None
    partial_sum: float = None
    partial_sum_sq: float = None

    def as_dict(self):
        out = {
            "condition_i": self.condition_i,
            "condition_ii": self.condition_ii,
            "rm_valid": self.rm_valid,
        }
        if self.partial_sum is not None:
            out["partial_sum"] = self.partial_sum
            out["partial_sum_sq"] = self.partial_sum_sq
        return out


def classify_schedule(schedule):
    """Classify a schedule against the stochastic-approximation conditions.

    harmonic(p): sum i**-p diverges iff p <= 1; sum i**-2p is finite iff
    p > 1/2, so the schedule is valid exactly for 1/2 < p <= 1.  constant(c):
    the plain sum diverges for any c > 0 but the squared sum does too.
    """
    if schedule.family == "harmonic":
        cond_i = schedule.p <= 1.0
        cond_ii = schedule.p > 0.5
        return ScheduleVerdict(
            "pass" if cond_i else "fail",
            "pass" if cond_ii else "fail",
            rm_valid=cond_i and cond_ii,
        )
    if schedule.family == "constant":
        if schedule.c == 0.0:
            return ScheduleVerdict("fail", "pass", rm_valid=False)
        return ScheduleVerdict("pass", "fail", rm_valid=False)
    total = float(sum(schedule.table))
    total_sq = float(sum(v * v for v in schedule.table))
    return ScheduleVerdict(
        "unknown", "unknown", rm_valid=None, partial_sum=total, partial_sum_sq=total_sq
    )


@dataclass(frozen=True, eq=False)
class VisitCounter:
    """Per-pair update counts; the total equals the number of learning steps."""

    counts: np.ndarray

    def total(self):
        return int(self.counts.sum())


@dataclass(frozen=True)
class QLearnConfig:
    """Run parameters for a Q-learning experiment.

    ``start`` is "uniform" for per-step uniform restarts (the acting state is
    redrawn uniformly before every step, which keeps every pair visited), or
    a state name to follow a single continuing trajectory from that state.
    """

    schedule: LearningRateSchedule
    steps: int
    seed: int = 0
    epsilon: float = 0.1
    checkpoint_every: int = 1000
    q_init: float = 0.0
    start: str = "uniform"

    def __post_init__(self):
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        if self.checkpoint_every < 1:
            raise ValidationError("checkpoint_every must be >= 1")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValidationError("epsilon must lie in [0, 1]")
        if not np.isfinite(self.q_init):
            raise ValidationError("q_init must be finite")


@dataclass(frozen=True, eq=False)
class Checkpoint:
    """Snapshot of learning progress at a step count.

    ``greedy_match[s]`` is True when the learned greedy action set at state s
    intersects the oracle's optimal action set.
    """

    step: int
    supnorm_error: float
    greedy_match: np.ndarray


@dataclass(frozen=True, eq=False)
class ConvergenceTrace:
    checkpoints: tuple
    q_final: QTable
    visits: VisitCounter
    max_abs_q: float


def q_learning_run(mdp, config, oracle):
    """Run seeded tabular Q-learning against a solved oracle.

    Every step consumes four uniforms from a PCG64 stream seeded with
    config.seed: restart draw, exploration coin, exploration action, and
    transition draw (inverse CDF over the declared state order).  Behavior is
    epsilon-greedy over the current table with ties to the lowest action
    index; the update bootstraps on the sampled successor either way.  The
    trace records the sup-norm distance to the oracle's action values every
    ``checkpoint_every`` steps.
    """
    n_s, n_a = mdp.n_states, mdp.n_actions
    q_star = oracle.q_star.values
    if q_star.shape != (n_s, n_a):
        raise ValidationError("oracle was not computed on this MDP")
    star_sets = [
        frozenset(np.nonzero(row >= row.max() - 1e-9)[0].tolist()) for row in q_star
    ]
    cum = [
        [np.cumsum(mdp.transitions[s, a]).tolist() for a in range(n_a)]
        for s in range(n_s)
    ]
    rewards = mdp.rewards.tolist()
    gamma = mdp.gamma
    eps = config.epsilon
    rate = config.schedule.rate
    every = config.checkpoint_every

    q = [[float(config.q_init)] * n_a for _ in range(n_s)]
    visits = [[0] * n_a for _ in range(n_s)]
    uniform_mode = config.start == "uniform"
    s = 0 if uniform_mode else mdp.state_index(config.start)
    max_abs = abs(float(config.q_init))

    rng = np.random.default_rng(config.seed)
    checkpoints = []
    t = 0
    remaining = config.steps
    while remaining > 0:
        block = rng.random((min(remaining, _CHUNK), 4)).tolist()
        remaining -= len(block)
        for u0, u1, u2, u3 in block:
            t += 1
            if uniform_mode:
                s = int(u0 * n_s)
            row = q[s]
            if u1 < eps:
                a = int(u2 * n_a)
            else:
                a = 0
                best = row[0]
                for j in range(1, n_a):
                    if row[j] > best:
                        best = row[j]
                        a = j
            nxt = bisect_right(cum[s][a], u3)
            if nxt >= n_s:
                nxt = n_s - 1
            visits[s][a] += 1
            beta = rate(visits[s][a])
            value = row[a] + beta * (rewards[s][a] + gamma * max(q[nxt]) - row[a])
            row[a] = value
            if value > max_abs:
                max_abs = value
            elif -value > max_abs:
                max_abs = -value
            s = nxt
            if t % every == 0:
                err = 0.0
                match = []
                for i in range(n_s):
                    qi = q[i]
                    top = max(qi)
                    hit = False
                    for j in range(n_a):
                        d = qi[j] - q_star[i, j]
                        if d < 0.0:
                            d = -d
                        if d > err:
                            err = d
                        if qi[j] == top and j in star_sets[i]:
                            hit = True
                    match.append(hit)
                checkpoints.append(Checkpoint(t, err, np.array(match)))

    return ConvergenceTrace(
        checkpoints=tuple(checkpoints),
        q_final=QTable(np.array(q)),
        visits=VisitCounter(np.array(visits, dtype=np.int64)),
        max_abs_q=max_abs,
    )


@dataclass(frozen=True)
class ConvergenceSummary:
    first_decile_median_err: float
    last_decile_median_err: float
    final_err: float
    greedy_policy_matched: bool


def convergence_report(trace):
    """Summarize a trace: early/late decile medians and the final state.

    ``greedy_policy_matched`` is True when, at the final checkpoint, every
    state's learned greedy action set intersects the oracle's optimal set.
    """
    errs = [cp.supnorm_error for cp in trace.checkpoints]
    n = len(errs)
    if n < 10:
        raise TooFewCheckpointsError(f"need >= 10 checkpoints, got {n}")
    k = n // 10
    return ConvergenceSummary(
        first_decile_median_err=float(np.median(errs[:k])),
        last_decile_median_err=float(np.median(errs[-k:])),
        final_err=float(errs[-1]),
        greedy_policy_matched=bool(trace.checkpoints[-1].greedy_match.all()),
    )
