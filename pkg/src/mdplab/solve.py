"""Dynamic-programming solvers and the random-policy dominance check.

Everything here is a pure function of immutable inputs; argmax ties are
always broken toward the lowest action index.
"""

from dataclasses import dataclass

import numpy as np

from .mdp import Policy, QTable, ValidationError, ValueFunction, policy_evaluate

DOMINANCE_SLACK = 1e-7


def q_from_v(mdp, v):
    """One-step lookahead: Q(s, a) = R(s, a) + gamma sum_s' P(s'|s, a) V(s')."""
    return mdp.rewards + mdp.gamma * (mdp.transitions @ np.asarray(v, dtype=float))


def bellman_backup(mdp, v):
    """Optimality backup (T V)(s) = max_a [R + gamma P V], a gamma-contraction."""
    return q_from_v(mdp, v).max(axis=1)


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Optimal values, action values, and a greedy deterministic policy."""

    v_star: ValueFunction
    q_star: QTable
    pi_star: Policy
    iterations: int
    residual: float

    def as_dict(self, mdp):
        return {
            "v_star": self.v_star.as_dict(mdp),
            "q_star": self.q_star.as_dict(mdp),
            "pi_star": self.pi_star.as_dict(mdp),
            "iterations": self.iterations,
            "residual": self.residual,
        }


def _result_from_v(mdp, v, iterations):
    # One extra lookahead makes v_star = max_a q_star hold exactly.
    q = q_from_v(mdp, v)
    v_star = q.max(axis=1)
    residual = float(np.abs(bellman_backup(mdp, v_star) - v_star).max())
    return SolveResult(
        v_star=ValueFunction(v_star),
        q_star=QTable(q),
        pi_star=Policy.deterministic(q.argmax(axis=1)),
        iterations=iterations,
        residual=residual,
    )


def value_iteration(mdp, epsilon):
    """Iterate V <- T V from V = 0 until V is within epsilon of optimal.

    Stops once the sup-norm sweep change falls below epsilon (1 - gamma) /
    (2 gamma), the classical guarantee for an epsilon-accurate value; a
    gamma of 0 stops after the first sweep, which is already exact.
    """
    epsilon = float(epsilon)
    if not epsilon > 0.0:
        raise ValidationError(f"epsilon must be > 0, got {epsilon}")
    gamma = mdp.gamma
    threshold = epsilon * (1.0 - gamma) / (2.0 * gamma) if gamma > 0.0 else np.inf
    v = np.zeros(mdp.n_states)
    iterations = 0
    while True:
        nxt = bellman_backup(mdp, v)
        iterations += 1
        change = np.abs(nxt - v).max()
        v = nxt
        if gamma == 0.0 or change < threshold:
            break
    return _result_from_v(mdp, v, iterations)


def policy_iteration(mdp, max_iterations=10_000):
    """Alternate exact evaluation and greedy improvement until the policy is stable.

    Returns an exactly optimal deterministic stationary policy: at
    termination its evaluation is a fixed point of greedy improvement.
    """
    acts = np.zeros(mdp.n_states, dtype=np.int64)
    v_prev = None
    for iterations in range(1, max_iterations + 1):
        v = policy_evaluate(mdp, Policy.deterministic(acts)).values
        greedy = q_from_v(mdp, v).argmax(axis=1)
        if np.array_equal(greedy, acts):
            break
        # Guard against float ping-pong between equally good policies.
        if v_prev is not None and np.abs(v - v_prev).max() < 1e-14:
            acts = greedy
            v = policy_evaluate(mdp, Policy.deterministic(acts)).values
            break
        acts = greedy
        v_prev = v
    else:
        raise RuntimeError("policy iteration failed to stabilize")
    result = _result_from_v(mdp, v, iterations)
    return SolveResult(
        v_star=result.v_star,
        q_star=result.q_star,
        pi_star=Policy.deterministic(acts),
        iterations=iterations,
        residual=result.residual,
    )


@dataclass(frozen=True, eq=False)
class DominanceReport:
    """Outcome of checking sampled stochastic policies against the optimum.

    A violation entry is (trial, state, policy value, optimal value); any
    violation falsifies the solver, not the existence result, so it is
    reported rather than raised.
    """

    passed: bool
    deterministic: bool
    trials: int
    max_excess: float
    violations: tuple


def verify_deterministic_optimality(mdp, trials, rng, slack=DOMINANCE_SLACK):
    """Solve for the optimal deterministic policy, then try to beat it.

    Samples ``trials`` stochastic policies with rows drawn from a flat
    Dirichlet (full support on the simplex), evaluates each exactly, and
    records every state where a sampled policy exceeds V* + slack.
    """
    trials = int(trials)
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    solution = policy_iteration(mdp)
    v_star = solution.v_star.values
    n_s, n_a = mdp.n_states, mdp.n_actions

    probs = rng.dirichlet(np.ones(n_a), size=(trials, n_s))
    p_pis = np.einsum("nsa,saz->nsz", probs, mdp.transitions)
    r_pis = np.einsum("nsa,sa->ns", probs, mdp.rewards)
    systems = np.eye(n_s) - mdp.gamma * p_pis
    values = np.linalg.solve(systems, r_pis[..., None])[..., 0]

    excess = values - v_star
    bad = np.argwhere(excess > slack)
    violations = tuple(
        (int(n), mdp.states[s], float(values[n, s]), float(v_star[s]))
        for n, s in bad
    )
    return DominanceReport(
        passed=not violations,
        deterministic=solution.pi_star.kind == "deterministic",
        trials=trials,
        max_excess=float(excess.max()),
        violations=violations,
    )
