"""Softmax policies, stationary distributions, and average-reward gradients.

The objective here is the long-run average reward
J(theta) = sum_s mu(s) sum_a pi(a|s) R(s, a) under the stationary
distribution mu of the policy-induced chain, which exists and is unique when
that chain is irreducible.  Action values are differential (Poisson) values:
the solution of Q = R - J + P V with V the policy average of Q, pinned down
by the normalization mu . V = 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .mdp import Policy, QTable, ValidationError, policy_expectations

FD_STEP = 1e-5
REL_FLOOR = 1e-8
POWER_TOL = 1e-12


class NonFiniteThetaError(ValidationError):
    """Policy logits must be finite."""


class ReducibleChainError(RuntimeError):
    """The policy-induced chain is not irreducible, so no unique stationary
    distribution exists.  When raised mid-ascent the partial objective trace
    and last parameters are attached as ``j_trace`` and ``theta``."""


class SingularSystemError(RuntimeError):
    """The differential-value linear system could not be solved."""


def softmax_policy(theta):
    """Row-wise softmax policy over logits theta with shape (S, A).

    The row maximum is subtracted before exponentiation, so extreme logits
    saturate instead of overflowing.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2:
        raise ValidationError("theta must be an (S, A) array")
    if not np.all(np.isfinite(theta)):
        raise NonFiniteThetaError("theta must be finite")
    z = theta - theta.max(axis=1, keepdims=True)
    e = np.exp(z)
    return Policy.stochastic(e / e.sum(axis=1, keepdims=True))


def _require_irreducible(p_pi):
    n, _ = connected_components(
        csr_matrix(p_pi > 0.0), directed=True, connection="strong"
    )
    if n != 1:
        raise ReducibleChainError(
            f"induced chain has {n} strongly connected components; "
            "the stationary distribution is not unique"
        )


def stationary_distribution(mdp, policy):
    """Left fixed point of the policy-induced chain, as a probability vector.

    Power iteration runs on the half-damped chain (P + I) / 2, which has the
    same stationary vector but no periodicity, until the l1 change drops
    below 1e-12.  Raises ReducibleChainError when the positive-probability
    graph is not strongly connected.
    """
    _, p_pi = policy_expectations(mdp, policy)
    _require_irreducible(p_pi)
    n = p_pi.shape[0]
    damped = 0.5 * (p_pi + np.eye(n))
    mu = np.full(n, 1.0 / n)
    for _ in range(1_000_000):
        nxt = mu @ damped
        done = np.abs(nxt - mu).sum() < POWER_TOL
        mu = nxt
        if done:
            return mu / mu.sum()
    raise RuntimeError("power iteration did not converge")


def differential_q(mdp, policy, mu):
    """Average reward J and the differential action values under the policy.

    Solves (I - P_pi + 1 mu^T) V = R_pi - J, which embeds the normalization
    mu . V = 0 into the otherwise rank-deficient Poisson system, then
    Q(s, a) = R(s, a) - J + P(.|s, a) . V.
    """
    r_pi, p_pi = policy_expectations(mdp, policy)
    mu = np.asarray(mu, dtype=float)
    j = float(mu @ r_pi)
    n = p_pi.shape[0]
    system = np.eye(n) - p_pi + np.outer(np.ones(n), mu)
    try:
        v = np.linalg.solve(system, r_pi - j)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"differential-value system is singular: {exc}") from exc
    v -= mu @ v
    q = mdp.rewards - j + mdp.transitions @ v
    return QTable(q), j


def _objective_pieces(mdp, theta):
    policy = softmax_policy(theta)
    mu = stationary_distribution(mdp, policy)
    q, j = differential_q(mdp, policy, mu)
    return policy, mu, q, j


def average_reward(mdp, theta):
    """J(theta): stationary-average one-step reward of the softmax policy."""
    policy = softmax_policy(theta)
    mu = stationary_distribution(mdp, policy)
    r_pi, _ = policy_expectations(mdp, policy)
    return float(mu @ r_pi)


def policy_gradient_analytic(mdp, theta):
    """Exact gradient of J for the row-softmax parameterization.

    grad[s, a] = mu(s) pi(a|s) (Q(s, a) - V(s)) with V the policy average of
    Q; this is the closed form of the score-function expectation
    E[grad log pi * Q] taken under mu and pi, no sampling involved.
    """
    policy, mu, q, _ = _objective_pieces(mdp, theta)
    v = (policy.probs * q.values).sum(axis=1)
    return mu[:, None] * policy.probs * (q.values - v[:, None])


@dataclass(frozen=True, eq=False)
class GradientReport:
    """Analytic gradient next to its central-difference estimate."""

    analytic: np.ndarray
    numeric: np.ndarray
    max_abs_diff: float
    max_rel_diff: float


def gradient_check(mdp, theta, h=FD_STEP):
    """Compare the analytic gradient with central differences of J.

    numeric[s, a] = (J(theta + h e) - J(theta - h e)) / 2h per coordinate;
    the relative difference uses max(1e-8, |numeric|) as denominator.
    """
    h = float(h)
    if not h > 0.0:
        raise ValidationError("h must be > 0")
    theta = np.asarray(theta, dtype=float)
    analytic = policy_gradient_analytic(mdp, theta)
    numeric = np.zeros_like(analytic)
    for s in range(theta.shape[0]):
        for a in range(theta.shape[1]):
            bump = np.zeros_like(theta)
            bump[s, a] = h
            numeric[s, a] = (
                average_reward(mdp, theta + bump) - average_reward(mdp, theta - bump)
            ) / (2.0 * h)
    diff = np.abs(analytic - numeric)
    rel = diff / np.maximum(REL_FLOOR, np.abs(numeric))
    return GradientReport(
        analytic=analytic,
        numeric=numeric,
        max_abs_diff=float(diff.max()),
        max_rel_diff=float(rel.max()),
    )


def _ascent(mdp, theta0, step_size, iters):
    step_size = float(step_size)
    if not step_size > 0.0:
        raise ValidationError("step_size must be > 0")
    if int(iters) < 1:
        raise ValidationError("iters must be >= 1")
    theta = np.array(theta0, dtype=float)
    js = []
    grad_norms = []
    for _ in range(int(iters)):
        try:
            policy, mu, q, j = _objective_pieces(mdp, theta)
        except ReducibleChainError as exc:
            exc.j_trace = np.array(js)
            exc.theta = theta
            raise
        v = (policy.probs * q.values).sum(axis=1)
        grad = mu[:, None] * policy.probs * (q.values - v[:, None])
        js.append(j)
        grad_norms.append(float(np.sqrt((grad * grad).sum())))
        theta = theta + step_size * grad
    try:
        js.append(average_reward(mdp, theta))
    except ReducibleChainError as exc:
        exc.j_trace = np.array(js)
        exc.theta = theta
        raise
    return theta, np.array(js), grad_norms


def gradient_ascent(mdp, theta0, step_size, iters):
    """Plain gradient ascent on J; returns (theta_final, J trace).

    The trace holds J(theta_k) for k = 0..iters, so its last entry is the
    objective at the returned parameters.  If the induced chain becomes
    reducible mid-run (softmax rows can underflow to exact zeros), the raised
    ReducibleChainError carries the partial trace.
    """
    theta, js, _ = _ascent(mdp, theta0, step_size, iters)
    return theta, js
