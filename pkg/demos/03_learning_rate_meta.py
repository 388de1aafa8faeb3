"""Meta-learning the learning rate with exponentially weighted optimization.

The per-task regret upper bound has the shape gamma * (eta + B^2/eta), so
the right eta depends on the unknown task similarity B. EWOO maintains a
posterior over a bracket of learning rates and plays its mean; this script
shows the posterior mean homing in on the grid-search optimum as tasks
accumulate, then wires the same machinery into a full experiment.
"""

import numpy as np

from metagames.harness import run_experiment
from metagames.meta import EwooState, ewoo_next_eta

rng = np.random.default_rng(5)
state = EwooState(lo=0.05, hi=1.5, beta=1.0, epsilon=0.05)

# Tasks with a common hidden similarity level B^2 = 0.09.
b_sq, gamma = 0.09, 1.0
grid = np.linspace(state.lo, state.hi, 100001)
argmin = grid[np.argmin(gamma * (grid + (b_sq + state.epsilon**2) / grid))]
print(f"hidden per-task loss: eta + {b_sq + state.epsilon ** 2:.4f}/eta, argmin {argmin:.4f}")
print("tasks seen -> chosen eta")
for t in range(1, 101):
    eta_t = ewoo_next_eta(state)
    if t in (1, 2, 5, 10, 25, 50, 100):
        print(f"  {t:4d} -> {eta_t:.4f}")
    state.record(b_sq, gamma)
print(f"relative gap to argmin after 100 tasks: "
      f"{abs(ewoo_next_eta(state) - argmin) / argmin:.2%}")

print("\nsame mechanism inside the harness (meta.ewoo block):")
res = run_experiment(
    {
        "T": 30,
        "m": 200,
        "seed": 11,
        "game": {"family": "perturbed-base", "base": [[0.2, -0.6], [-0.6, 1.0]], "delta": 0.02},
        "learner": {"algo": "ogd"},
        "meta": {"initializer": "ftl-average", "ewoo": {"enabled": True, "D": 0.25}},
    }
)
etas = res.task_column("eta")
gaps = res.task_column("dualgap_avg")
print(f"  eta drifts {etas[0]:.4f} -> {etas[-1]:.4f}; "
      f"task-avg gap {float(np.mean(gaps)):.5f}")
