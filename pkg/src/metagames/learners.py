"""Per-task online learners with exact regret accounting.

The main class is :class:`OMDLearner`, the two-sequence optimistic mirror
descent update

    x^(i)    = prox(xhat^(i-1), m^(i), eta)      (played iterate)
    xhat^(i) = prox(xhat^(i-1), u^(i), eta)      (secondary iterate)

with a configurable prediction rule for m^(i). Plain mirror descent, MWU,
extra-gradient, projected gradient ascent, and the preconditioned variant
are thin relatives of the same prox kernel.
"""

from __future__ import annotations

import math

import numpy as np

from metagames.errors import ConfigError, InvalidInputError
from metagames.geometry import (
    EUCLIDEAN,
    Box,
    Regularizer,
    Simplex,
    project_l2,
    project_simplex,
    prox_step,
)

RECENCY = "recency"
SECONDARY_ANCHOR = "secondary-anchor"
ZERO = "zero"
ALTERNATING = "alternating"

_MODES = (RECENCY, SECONDARY_ANCHOR, ZERO, ALTERNATING)

# Modes whose predictions come from the driver, not the learner's own memory.
EXTERNAL_MODES = (SECONDARY_ANCHOR, ALTERNATING)


def cold_start(strategy_set, regularizer=None):
    """Minimizer of the regularizer over the set (uniform on a simplex)."""
    if isinstance(strategy_set, Simplex):
        return strategy_set.center()
    if isinstance(strategy_set, Box):
        return np.clip(np.zeros(strategy_set.dim), strategy_set.lower, strategy_set.upper)
    return strategy_set.center()


class OMDLearner:
    """Optimistic mirror descent over one strategy set.

    Drive it as: ``play()`` to obtain x^(i), then ``update(u)`` with the
    observed utility. Prediction modes 'recency' and 'zero' are internal;
    'secondary-anchor' and 'alternating' expect the driver to call
    ``set_prediction`` before each ``play``. History keeps the full primary
    path (including x^(0)), the secondary path, utilities, and predictions.
    """

    def __init__(
        self,
        strategy_set,
        eta,
        regularizer=None,
        init=None,
        prediction_mode=RECENCY,
    ):
        if eta <= 0:
            raise InvalidInputError(f"learning rate must be positive, got {eta}")
        if prediction_mode not in _MODES:
            raise ConfigError(f"unknown prediction mode {prediction_mode!r}")
        self.set = strategy_set
        self.eta = float(eta)
        self.reg = regularizer if regularizer is not None else Regularizer(EUCLIDEAN)
        self.mode = prediction_mode
        x0 = cold_start(strategy_set) if init is None else np.asarray(init, dtype=float)
        if not strategy_set.contains(x0, tol=1e-9):
            raise InvalidInputError("initialization is infeasible")
        self.x_hat = x0.copy()
        self.prediction = np.zeros_like(x0)
        self.path = [x0.copy()]  # primary iterates x^(0..i)
        self.hat_path = [x0.copy()]  # secondary iterates xhat^(0..i)
        self.utilities = []
        self.predictions = []
        self._current = None
        if self.reg.kind == EUCLIDEAN and isinstance(strategy_set, Simplex):
            # Hot path: anchors are feasible by induction and utilities are
            # validated in update(), so skip the kernel's argument checks.
            eta_ = self.eta
            self._prox = lambda anchor, g: project_simplex(anchor + eta_ * g)
        else:
            self._prox = lambda anchor, g: prox_step(
                self.reg, self.set, anchor, g, self.eta
            )

    @property
    def init(self):
        return self.path[0]

    def set_prediction(self, m):
        self.prediction = np.asarray(m, dtype=float)
        self._current = None  # any cached primary was built on the old prediction

    def play(self):
        """Primary iterate for the current round (cached until update)."""
        if self._current is None:
            self._current = self._prox(self.x_hat, self.prediction)
        return self._current

    def update(self, utility):
        """Consume the observed utility: advance the secondary iterate and
        form the next prediction."""
        utility = np.asarray(utility, dtype=float)
        if not math.isfinite(float(np.sum(utility))):
            raise InvalidInputError("non-finite utility")
        x = self.play()
        self.path.append(x)
        self.predictions.append(self.prediction)
        u = utility.copy()
        self.utilities.append(u)
        self.x_hat = self._prox(self.x_hat, u)
        self.hat_path.append(self.x_hat)
        if self.mode == RECENCY:
            self.prediction = u
        elif self.mode == ZERO:
            self.prediction = np.zeros_like(u)
        self._current = None

    def primary_array(self):
        return np.asarray(self.path)

    def secondary_array(self):
        return np.asarray(self.hat_path)

    def utility_array(self):
        return np.asarray(self.utilities)

    def prediction_array(self):
        return np.asarray(self.predictions)


class GDLearner:
    """Vanilla projected gradient ascent x^(i) = proj(x^(i-1) + eta*u)."""

    def __init__(self, strategy_set, eta, init=None):
        if eta <= 0:
            raise InvalidInputError(f"learning rate must be positive, got {eta}")
        self.set = strategy_set
        self.eta = float(eta)
        x0 = cold_start(strategy_set) if init is None else np.asarray(init, dtype=float)
        self.x = x0.copy()
        self.path = [x0.copy()]
        self.utilities = []

    @property
    def init(self):
        return self.path[0]

    def play(self):
        return self.x

    def update(self, utility):
        utility = np.asarray(utility, dtype=float)
        self.utilities.append(utility.copy())
        self.x = project_l2(self.set, self.x + self.eta * utility)
        self.path.append(self.x.copy())

    def primary_array(self):
        return np.asarray(self.path)

    def utility_array(self):
        return np.asarray(self.utilities)


def mwu_step(dist, losses, eta):
    """Multiplicative-weights update of a distribution against a loss vector."""
    dist = np.asarray(dist, dtype=float)
    losses = np.asarray(losses, dtype=float)
    logits = np.log(np.maximum(dist, 1e-300)) - eta * losses
    logits -= np.max(logits)
    w = np.exp(logits)
    return w / np.sum(w)


class PreconditionerSchedule:
    """Sequence of diagonal positive-definite preconditioners Q^(i)."""

    def __init__(self, diagonals):
        self.diagonals = [np.asarray(q, dtype=float) for q in diagonals]
        for q in self.diagonals:
            if np.min(q) <= 0:
                raise ConfigError("preconditioner diagonals must be positive")

    def __len__(self):
        return len(self.diagonals)

    def __getitem__(self, i):
        return self.diagonals[min(i, len(self.diagonals) - 1)]

    def drift(self, m=None):
        """sum_i ||Q^(i+1) - Q^(i)||_2 (spectral norm = max abs diagonal gap)."""
        qs = self.diagonals if m is None else self.diagonals[:m]
        return float(
            sum(np.max(np.abs(b - a)) for a, b in zip(qs[:-1], qs[1:]))
        )

    @staticmethod
    def constant(diag, m):
        return PreconditionerSchedule([np.asarray(diag, dtype=float)] * m)


def project_simplex_weighted(y, q):
    """argmin_x sum_a q_a (x_a - y_a)^2 over the simplex; q > 0 diagonal.

    Bisection on the simplex multiplier, then an exact recompute on the
    detected support.
    """
    y = np.asarray(y, dtype=float)
    q = np.asarray(q, dtype=float)

    def x_of(nu):
        return np.maximum(0.0, y - nu / (2.0 * q))

    lo = float(np.min(2.0 * q * (y - 1.0)))
    hi = float(np.max(2.0 * q * y))
    for _ in range(100):
        nu = 0.5 * (lo + hi)
        if np.sum(x_of(nu)) > 1.0:
            lo = nu
        else:
            hi = nu
    support = x_of(0.5 * (lo + hi)) > 0
    if not np.any(support):
        support = y >= np.max(y) - 1e-15
    inv = 1.0 / (2.0 * q[support])
    nu = (np.sum(y[support]) - 1.0) / np.sum(inv)
    x = np.zeros_like(y)
    x[support] = y[support] - nu * inv
    return np.maximum(x, 0.0)


class OptAdaGradLearner:
    """Optimistic gradient steps under a drifting diagonal preconditioner.

    With Q = (1/eta) I this reproduces the Euclidean OMDLearner trajectory.
    """

    def __init__(self, strategy_set, preconditioners: PreconditionerSchedule, init=None):
        self.set = strategy_set
        self.pre = preconditioners
        x0 = cold_start(strategy_set) if init is None else np.asarray(init, dtype=float)
        self.x_hat = x0.copy()
        self.prediction = np.zeros_like(x0)
        self.path = [x0.copy()]
        self.hat_path = [x0.copy()]
        self.utilities = []
        self.predictions = []
        self.step_index = 0
        self._current = None

    def _project(self, y, q):
        if isinstance(self.set, Simplex):
            return project_simplex_weighted(y, q)
        if isinstance(self.set, Box):
            return np.clip(y, self.set.lower, self.set.upper)
        raise InvalidInputError(f"unsupported set {type(self.set).__name__}")

    def set_prediction(self, m):
        self.prediction = np.asarray(m, dtype=float)

    def play(self):
        if self._current is None:
            q = self.pre[self.step_index]
            self._current = self._project(self.x_hat + self.prediction / q, q)
        return self._current

    def update(self, utility):
        utility = np.asarray(utility, dtype=float)
        q = self.pre[self.step_index]
        x = self.play()
        self.path.append(x)
        self.predictions.append(self.prediction.copy())
        self.utilities.append(utility.copy())
        self.x_hat = self._project(self.x_hat + utility / q, q)
        self.hat_path.append(self.x_hat.copy())
        self.prediction = utility.copy()
        self.step_index += 1
        self._current = None

    def primary_array(self):
        return np.asarray(self.path)

    def secondary_array(self):
        return np.asarray(self.hat_path)


class EGLearner:
    """Extra-gradient iterations against a VI operator (two oracle calls/step).

    Records the proxy-regret ingredients: the secondary sequence and the
    auxiliary utilities evaluated at it.
    """

    def __init__(self, operator, eta, regularizer=None, init=None):
        self.op = operator
        self.set = operator.set
        self.eta = float(eta)
        self.reg = regularizer if regularizer is not None else Regularizer(EUCLIDEAN)
        z0 = self.set.center() if init is None else np.asarray(init, dtype=float)
        self.z = z0.copy()
        self.path = [z0.copy()]  # primary z^(0..i)
        self.hat_path = []  # secondary zhat^(1..i)
        self.utilities = []  # u^(i) = -F(z^(i)), with u^(0) at the init
        self.hat_utilities = []  # uhat^(i) = -F(zhat^(i))
        self.utilities.append(-self.op(z0))

    def step(self):
        u_prev = self.utilities[-1]
        z_hat = prox_step(self.reg, self.set, self.z, u_prev, self.eta)
        u_hat = -self.op(z_hat)
        z_next = prox_step(self.reg, self.set, self.z, u_hat, self.eta)
        self.hat_path.append(z_hat)
        self.hat_utilities.append(u_hat)
        self.z = z_next
        self.path.append(z_next.copy())
        self.utilities.append(-self.op(z_next))

    def run(self, m):
        for _ in range(m):
            self.step()
        return self

    def proxy_regret(self, comparator=None):
        """Regret of the secondary sequence under the auxiliary utilities."""
        hats = np.asarray(self.hat_path)
        us = np.asarray(self.hat_utilities)
        played = float(np.sum(hats * us))
        cum = np.sum(us, axis=0)
        if comparator is None:
            comparator = _best_point(self.set, cum)
        return float(cum @ np.asarray(comparator) - played), comparator


def _best_point(strategy_set, cum_utility):
    """argmax over the set of <x, cum_utility> with lexicographic ties."""
    if isinstance(strategy_set, Simplex):
        best = np.zeros(strategy_set.dim)
        best[int(np.argmax(cum_utility))] = 1.0  # argmax takes the lowest index
        return best
    if isinstance(strategy_set, Box):
        return np.where(cum_utility > 0, strategy_set.upper, strategy_set.lower)
    # product set: blockwise
    parts = [
        _best_point(b, c)
        for b, c in zip(strategy_set.blocks, strategy_set.split(cum_utility))
    ]
    return strategy_set.join(parts)


def optimum_in_hindsight(utilities, strategy_set):
    """Best fixed strategy against the summed utilities (fixed tie rule)."""
    cum = np.sum(np.asarray(utilities, dtype=float), axis=0)
    return _best_point(strategy_set, cum)


def external_regret(strategies, utilities, strategy_set=None, comparator=None):
    """External regret of a play sequence; returns (regret, comparator).

    ``strategies`` are the played iterates x^(1..m) aligned with the observed
    ``utilities``. Without an explicit comparator the optimum-in-hindsight
    over ``strategy_set`` is used (ties broken lexicographically).
    """
    strategies = np.asarray(strategies, dtype=float)
    utilities = np.asarray(utilities, dtype=float)
    if strategies.shape != utilities.shape:
        raise InvalidInputError("strategy/utility histories must align")
    if comparator is None:
        if strategy_set is None:
            raise InvalidInputError("need a strategy set or an explicit comparator")
        comparator = optimum_in_hindsight(utilities, strategy_set)
    comparator = np.asarray(comparator, dtype=float)
    cum = np.sum(utilities, axis=0)
    realized = float(np.sum(strategies * utilities))
    return float(cum @ comparator) - realized, comparator


class AlphaWeights:
    """Nondecreasing per-iteration weights normalized to sum to the horizon."""

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if np.any(np.diff(values) < -1e-12):
            raise InvalidInputError("alpha weights must be nondecreasing")
        if np.any(values <= 0):
            raise InvalidInputError("alpha weights must be positive")
        m = values.shape[0]
        if abs(float(np.sum(values)) - m) > 1e-9:
            raise InvalidInputError("alpha weights must sum to the horizon")
        self.values = values

    @staticmethod
    def uniform(m):
        return AlphaWeights(np.ones(m))

    @staticmethod
    def linear(m):
        i = np.arange(1, m + 1, dtype=float)
        return AlphaWeights(2.0 * i / (m + 1))

    @staticmethod
    def quadratic(m):
        i = np.arange(1, m + 1, dtype=float)
        return AlphaWeights(6.0 * i**2 / ((m + 1) * (2 * m + 1)))

    @staticmethod
    def from_schedule(schedule, m):
        if schedule == "uniform":
            return AlphaWeights.uniform(m)
        if schedule == "linear":
            return AlphaWeights.linear(m)
        if schedule == "quadratic":
            return AlphaWeights.quadratic(m)
        raise ConfigError(f"unknown alpha schedule {schedule!r}")


def alpha_regret(strategies, utilities, weights: AlphaWeights, strategy_set=None, comparator=None):
    """Weighted regret with the same comparator convention as external_regret."""
    strategies = np.asarray(strategies, dtype=float)
    utilities = np.asarray(utilities, dtype=float)
    if weights.values.shape[0] != utilities.shape[0]:
        raise InvalidInputError("weights length must match the history length")
    weighted = utilities * weights.values[:, None]
    if comparator is None:
        if strategy_set is None:
            raise InvalidInputError("need a strategy set or an explicit comparator")
        comparator = _best_point(strategy_set, np.sum(weighted, axis=0))
    comparator = np.asarray(comparator, dtype=float)
    cum = np.sum(weighted, axis=0)
    realized = float(np.sum(strategies * weighted))
    return float(cum @ comparator) - realized, comparator


def rvu_terms(learner, comparator, constant="eighth"):
    """Evaluate the three RVU ingredients for a finished OMD run.

    Returns (bregman_term, prediction_term, path_term) so that
    regret <= bregman/eta + eta*prediction - c/eta * path with c = 1/8 for
    the primary-path form and c = 1/2 for the refined two-sequence form
    (both appear in the analysis; choose via ``constant``).
    """
    from metagames.geometry import bregman as _bregman

    us = learner.utility_array()
    ms = learner.prediction_array()
    pred = float(np.sum((us - ms) ** 2))
    breg = _bregman(learner.reg, np.asarray(comparator, dtype=float), learner.init)
    prim = learner.primary_array()
    if constant == "eighth":
        diffs = np.diff(prim, axis=0)
        path = float(np.sum(diffs * diffs))
        return breg, pred, path
    if constant == "half":
        hats = learner.secondary_array()
        a = prim[1:] - hats[1:]
        b = prim[1:] - hats[:-1]
        return breg, pred, float(np.sum(a * a) + np.sum(b * b))
    raise ConfigError(f"unknown RVU constant form {constant!r}")


def doubling_trick_eta(learner, comparator=None):
    """Halve the learning rate when the local RVU residual turns positive.

    Inspect a finished run: returns the halved eta if the measured
    prediction-error term exceeds the path-length credit, else the current
    eta.
    """
    _, pred, path = rvu_terms(learner, learner.init)
    residual = learner.eta * pred - path / (8.0 * learner.eta)
    return learner.eta / 2.0 if residual > 0 else learner.eta
