"""Meta-learned optimistic no-regret learning across sequences of related games.

The package is organised around a small numerical core:

- :mod:`metagames.geometry` -- strategy sets, Bregman divergences, prox steps
- :mod:`metagames.games` -- game representations and generators
- :mod:`metagames.learners` -- per-task online learners and regret accounting
- :mod:`metagames.swapregret` -- the no-swap-regret reduction
- :mod:`metagames.meta` -- cross-task initializers, EWOO learning rates,
  task-similarity statistics
- :mod:`metagames.stackelberg` -- repeated Stackelberg security games
- :mod:`metagames.metrics` -- equilibrium-quality measurements
- :mod:`metagames.holder_vi` -- Holder-continuous and weak-MVI operators
- :mod:`metagames.harness` -- experiment orchestration and logging
"""

from metagames import (
    games,
    geometry,
    harness,
    holder_vi,
    learners,
    meta,
    metrics,
    stackelberg,
    swapregret,
)

__all__ = [
    "geometry",
    "games",
    "learners",
    "swapregret",
    "meta",
    "stackelberg",
    "metrics",
    "holder_vi",
    "harness",
]

__version__ = "0.1.0"
