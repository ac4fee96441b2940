#!/usr/bin/env python3
"""Layered objectives, utility filters, and when optima start to disagree.

The same dynamics under two reward definitions can demand entirely different
behavior.  Divergence is measured where it matters: the fraction of states
whose optimal action sets are disjoint, a quantity immune to rescaling or
shifting either reward.
"""

import json
from pathlib import Path

import numpy as np

from mdplab import (
    UtilityFilter,
    compare_policies,
    compose_reward,
    hierarchy_from_dict,
    level_with_weight,
    load_dynamics,
    sweep_weights,
    table_from_dict,
)

data = Path(__file__).parent / "data"
dynamics = load_dynamics(data / "stay_go_dynamics.json")

# Divergence of two fixed reward tables: each pays for "home" in a different
# state, so the optimal policies disagree everywhere.
reward_a = table_from_dict(dynamics.states, dynamics.actions,
                           json.loads((data / "reward_home_s1.json").read_text()))
reward_b = table_from_dict(dynamics.states, dynamics.actions,
                           json.loads((data / "reward_home_s0.json").read_text()))
report = compare_policies(dynamics, reward_a, reward_b)
print("opposed home-state rewards:")
for state, entry in report.per_state.items():
    print(f"  {state}: best under A {entry['argmax_a']}, "
          f"best under B {entry['argmax_b']}, disjoint: {entry['disjoint']}")
print("divergence:", report.divergence)

# Rescaling a reward changes values but never the recommended actions.
affine = compare_policies(dynamics, reward_a, 2.0 * reward_a + 5.0)
print("\nA versus 2A + 5 divergence:", affine.divergence)

# A weighted stack of objectives: an individual level that pays for staying
# put against a humanity level that pays for moving.
hierarchy = hierarchy_from_dict(json.loads((data / "hierarchy.json").read_text()),
                                dynamics.states, dynamics.actions)
print("\nlevels:", [(lvl.name, lvl.weight) for lvl in hierarchy.levels])
print("composed table at humanity weight 0:", compose_reward(hierarchy).tolist())
boosted = level_with_weight(hierarchy, 1, 3.0)
print("composed table at humanity weight 3:", compose_reward(boosted).tolist())

# Diminishing returns via a monotone piecewise-linear utility filter.
saturating = UtilityFilter(((0.0, 0.0), (1.0, 0.5), (2.0, 0.6)))
print("\nfilter through knots (0,0), (1,0.5), (2,0.6):")
for x in (0.5, 1.0, 1.5, 3.0):
    print(f"  utility({x}) = {saturating.apply(x):.3f}")

# Sweep the humanity weight: the optimum flips in every state at once when
# the weighted "go" payoff overtakes the individual "stay" payoff.
print("\nhumanity-weight sweep (divergence against the weight-0 baseline):")
for weight, divergence in sweep_weights(dynamics, hierarchy, 1,
                                        np.linspace(0.0, 4.0, 9)):
    marker = "<-- optimum flips" if divergence > 0 and weight == 3.0 else ""
    print(f"  weight {weight:.1f}  divergence {divergence:.1f}  {marker}")
