"""Cross-task layer: initializer strategies, the EWOO learning-rate
meta-learner, and task-similarity statistics.

Meta state is mutated only between tasks; within a task all reads are
snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from metagames.errors import ConfigError, InvalidInputError, NumericError
from metagames.geometry import Simplex, project_l2, project_simplex
from metagames.learners import cold_start

COLD = "cold"
FTL_AVERAGE = "ftl-average"
LAST_ITERATE = "last-iterate"
PREV_OPTIMUM = "prev-optimum"
NE_AVERAGE = "ne-average"
CUSTOM_ANCHOR = "custom-anchor"

INITIALIZER_MODES = (COLD, FTL_AVERAGE, LAST_ITERATE, PREV_OPTIMUM, NE_AVERAGE, CUSTOM_ANCHOR)


@dataclass
class TaskOutcome:
    """Anchors produced by one finished task, per player."""

    optima: Optional[list] = None
    last_iterates: Optional[list] = None
    nash: Optional[list] = None


class Initializer:
    """Produces per-player initializations across the task sequence.

    ftl-average keeps the exact arithmetic mean of all anchors seen, which
    is follow-the-leader over the induced Bregman losses.
    """

    def __init__(self, mode, strategy_sets, anchor=None):
        if mode not in INITIALIZER_MODES:
            raise ConfigError(f"unknown initializer mode {mode!r}")
        if mode == CUSTOM_ANCHOR and anchor is None:
            raise ConfigError("custom-anchor mode needs an anchor")
        self.mode = mode
        self.sets = tuple(strategy_sets)
        self.anchor = anchor
        self.count = 0
        self.means = [cold_start(s) for s in self.sets]
        self.prev = None

    def initialization(self):
        """Per-player starting points for the upcoming task."""
        cold = [cold_start(s) for s in self.sets]
        if self.mode == COLD:
            return cold
        if self.mode == CUSTOM_ANCHOR:
            return [np.asarray(a, dtype=float).copy() for a in self.anchor]
        if self.count == 0:
            return cold
        if self.mode in (FTL_AVERAGE, NE_AVERAGE):
            return [m.copy() for m in self.means]
        return [p.copy() for p in self.prev]

    def observe(self, outcome: TaskOutcome):
        """Fold one task's anchors into the accumulator."""
        anchors = self._select(outcome)
        if self.mode in (COLD, CUSTOM_ANCHOR):
            return
        anchors = [np.asarray(a, dtype=float) for a in anchors]
        self.count += 1
        if self.count == 1:
            self.means = [a.copy() for a in anchors]
        else:
            self.means = [m + (a - m) / self.count for m, a in zip(self.means, anchors)]
        self.prev = [a.copy() for a in anchors]

    def _select(self, outcome):
        if self.mode in (COLD, CUSTOM_ANCHOR):
            return None
        if self.mode in (FTL_AVERAGE, PREV_OPTIMUM):
            if outcome.optima is None:
                raise ConfigError(f"{self.mode} needs optima-in-hindsight anchors")
            return outcome.optima
        if self.mode == LAST_ITERATE:
            if outcome.last_iterates is None:
                raise ConfigError("last-iterate mode needs last iterates")
            return outcome.last_iterates
        if outcome.nash is None:
            raise ConfigError("ne-average mode needs a Nash-equilibrium oracle")
        return outcome.nash


def next_initialization(initializer: Initializer, task_outcome: Optional[TaskOutcome]):
    """Fold a finished task (if any) and return the next per-player points."""
    if task_outcome is not None:
        initializer.observe(task_outcome)
    return initializer.initialization()


def _adaptive_simpson(f, a, b, tol=1e-8, max_depth=40):
    """Adaptive Simpson quadrature with interval splitting."""

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        fl = f(lmid)
        fr = f(rmid)
        left = simpson(lo, mid, flo, fl, fmid)
        right = simpson(mid, hi, fmid, fr, fhi)
        if depth >= max_depth:
            raise NumericError("adaptive Simpson hit the recursion cap")
        if abs(left + right - whole) <= 15.0 * tol * max(abs(left + right), 1e-300):
            return left + right + (left + right - whole) / 15.0
        half = tol / 2.0
        return recurse(lo, mid, flo, fl, fmid, left, depth + 1) + recurse(
            mid, hi, fmid, fr, fhi, right, depth + 1
        )

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, 0)


@dataclass
class EwooState:
    """Posterior-mean selection of a scalar learning rate.

    Losses have the regularized form U_t(eta) = gamma_t * (eta +
    (B_t^2 + eps^2) / eta) and the posterior weight at eta is
    exp(-beta * sum_t U_t(eta)) over [lo, hi].
    """

    lo: float
    hi: float
    beta: float
    epsilon: float
    b_squares: list = field(default_factory=list)
    gammas: list = field(default_factory=list)

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ConfigError(f"need 0 < lo < hi, got [{self.lo}, {self.hi}]")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")

    @staticmethod
    def from_radius(D, rho):
        """Standard parameterization: domain [rho*D, sqrt(D^2 + rho^2 D^2)]
        and beta = (2/D) * min(1, rho^2/D^2)."""
        eps = rho * D
        return EwooState(
            lo=eps,
            hi=math.sqrt(D * D + eps * eps),
            beta=(2.0 / D) * min(1.0, rho**2 / D**2),
            epsilon=eps,
        )

    def record(self, b_square, gamma):
        if b_square < 0 or gamma <= 0:
            raise InvalidInputError("need B^2 >= 0 and gamma > 0")
        self.b_squares.append(float(b_square))
        self.gammas.append(float(gamma))

    def regularized_loss(self, eta):
        """sum_t gamma_t * (eta + (B_t^2 + eps^2)/eta) over recorded tasks."""
        a = sum(self.gammas)
        b = sum(g * (bs + self.epsilon**2) for g, bs in zip(self.gammas, self.b_squares))
        return a * eta + b / eta


def ewoo_next_eta(state: EwooState, tol=1e-8):
    """Posterior-mean learning rate for the next task.

    With no recorded tasks the posterior is flat and the interval mean is
    returned. The sum of recorded losses is a*eta + b/eta, so the exponent
    is shifted by its minimum over the domain before quadrature.
    """
    if not state.gammas:
        return 0.5 * (state.lo + state.hi)
    a = sum(state.gammas)
    b = sum(g * (bs + state.epsilon**2) for g, bs in zip(state.gammas, state.b_squares))

    def loss(eta):
        return a * eta + b / eta

    eta_min = math.sqrt(b / a) if b > 0 else state.lo
    eta_min = min(max(eta_min, state.lo), state.hi)
    shift = state.beta * loss(eta_min)

    def weight(eta):
        return math.exp(-(state.beta * loss(eta) - shift))

    # Concentrated posteriors become narrower than the initial Simpson
    # samples; split the domain around the mode at a few curvature widths.
    knots = {state.lo, state.hi, eta_min}
    if b > 0:
        sigma = 1.0 / math.sqrt(state.beta * 2.0 * b / eta_min**3)
        for k in (-8.0, -1.0, 1.0, 8.0):
            knots.add(min(max(eta_min + k * sigma, state.lo), state.hi))
    pieces = sorted(knots)
    numer = 0.0
    denom = 0.0
    for left, right in zip(pieces[:-1], pieces[1:]):
        if right - left <= 0:
            continue
        numer += _adaptive_simpson(lambda e: e * weight(e), left, right, tol)
        denom += _adaptive_simpson(weight, left, right, tol)
    if denom <= 0 or not math.isfinite(denom):
        raise NumericError("EWOO posterior normalization failed")
    return float(numer / denom)


def cce_ewoo_state(dim, boundary_offset, m, T, cprime=1.0):
    """EWOO state for the optimistic-hedge pipeline.

    D^2 = log(dim / boundary_offset) / (cprime * log^5 m) and rho = T^(-1/4);
    cprime stands in for the universal constant the regret bound leaves
    unspecified (default 1).
    """
    if m < 2:
        raise ConfigError("the CCE pipeline needs m >= 2")
    D = math.sqrt(math.log(dim / boundary_offset) / (cprime * math.log(m) ** 5))
    return EwooState.from_radius(D, T ** (-0.25))


def smallest_cprime(regrets, etas, kls, m):
    """Smallest C' making eta*C'*log^5(m) + KL/eta dominate each regret.

    Reported rather than asserted because the underlying constants are left
    open; returns 0 when the KL term alone already covers every task.
    """
    needed = 0.0
    for reg, eta, kl in zip(regrets, etas, kls):
        residual = reg - kl / eta
        if residual > 0:
            needed = max(needed, residual / (eta * math.log(m) ** 5))
    return needed


@dataclass
class SimilarityStats:
    """Variance-like statistics of per-task anchors used by the meta bounds."""

    v_opt2: Optional[np.ndarray] = None
    v_ne2_worst: Optional[float] = None
    v_ne2_best: Optional[float] = None
    v_diff: Optional[float] = None
    v_kl: Optional[np.ndarray] = None
    entropy: Optional[float] = None


def anchor_variance(anchors):
    """(1/T) * min_x sum_t ||a_t - x||^2, attained at the mean."""
    anchors = np.asarray(anchors, dtype=float)
    mean = np.mean(anchors, axis=0)
    return float(np.mean(np.sum((anchors - mean) ** 2, axis=1)))


def kl_anchor_variance(anchors):
    """(1/T) sum_t KL(a_t || mean) for simplex anchors."""
    anchors = np.asarray(anchors, dtype=float)
    mean = np.mean(anchors, axis=0)
    total = 0.0
    for a in anchors:
        mask = a > 0
        total += float(np.sum(a[mask] * np.log(a[mask] / np.maximum(mean[mask], 1e-300))))
    return total / anchors.shape[0]


def shannon_entropy(p):
    """Natural-log entropy with the 0 log 0 = 0 convention."""
    p = np.asarray(p, dtype=float)
    mask = p > 0
    return float(-np.sum(p[mask] * np.log(p[mask])))


def ftl_regret(anchors, initializations):
    """Measured FTL regret over Euclidean Bregman losses.

    sum_t (1/2)||a_t - init_t||^2 minus the same sum at the fixed
    minimizer (the mean of the anchors).
    """
    anchors = np.asarray(anchors, dtype=float)
    inits = np.asarray(initializations, dtype=float)
    mean = np.mean(anchors, axis=0)
    played = 0.5 * float(np.sum((anchors - inits) ** 2))
    best = 0.5 * float(np.sum((anchors - mean) ** 2))
    return played - best


def _project_polytope_dykstra(point, A_ub, b_ub, n_passes=2000, tol=1e-11):
    """Projection onto {x in simplex : A_ub x <= b_ub} by Dykstra's algorithm."""
    x = np.asarray(point, dtype=float).copy()
    sets = [("simplex", None)] + [("half", i) for i in range(A_ub.shape[0])]
    increments = [np.zeros_like(x) for _ in sets]
    for _ in range(n_passes):
        x_prev = x.copy()
        for idx, (kind, i) in enumerate(sets):
            y = x + increments[idx]
            if kind == "simplex":
                proj = project_simplex(y)
            else:
                a, bb = A_ub[i], b_ub[i]
                viol = float(a @ y) - bb
                proj = y - max(viol, 0.0) * a / float(a @ a) if viol > 0 else y
            increments[idx] = y - proj
            x = proj
        if np.linalg.norm(x - x_prev) <= tol:
            break
    return x


def nash_set_projection(game_matrix, value, point, player, slack=1e-9):
    """Project a point onto one player's optimal-strategy face of a zero-sum game.

    For the min-max reading (x minimizes x^T A y): x is optimal iff
    A^T x <= value componentwise on the simplex; y is optimal iff
    A y >= value.
    """
    A = np.asarray(game_matrix, dtype=float)
    if player == 0:
        return _project_polytope_dykstra(point, A.T, np.full(A.shape[1], value + slack))
    return _project_polytope_dykstra(point, -A, np.full(A.shape[0], -(value - slack)))


def ne_similarity_worst(ne_points):
    """(1/T) min_z sum_t ||z_t - z||^2 for one supplied NE per task."""
    return anchor_variance(ne_points)


def ne_similarity_best(games, saddle_values, n_iter=300):
    """Best-case NE similarity via distance-to-NE-set minimization.

    Minimizes x -> (1/T) sum_t dist^2(x, Z*_t) by exact-gradient projected
    descent; the per-task gradients use polytope projections onto each
    player's optimal face.
    """
    from metagames.metrics import saddle_point  # local import to avoid a cycle

    mats = [g.A for g in games]
    if saddle_values is None:
        saddle_values = [saddle_point(g)[2] for g in games]
    T = len(mats)
    d_x, d_y = mats[0].shape
    sets = (Simplex(d_x), Simplex(d_y))
    centers = [s.center() for s in sets]
    z = np.concatenate(centers)

    def project_all(zz):
        x, y = zz[:d_x], zz[d_x:]
        projs = []
        for A, v in zip(mats, saddle_values):
            px = nash_set_projection(A, v, x, player=0)
            py = nash_set_projection(A, v, y, player=1)
            projs.append(np.concatenate([px, py]))
        return projs

    step = 1.0
    for _ in range(n_iter):
        projs = project_all(z)
        grad = sum(z - p for p in projs) / T
        z_new = np.concatenate(
            [
                project_l2(sets[0], (z - step * grad)[:d_x]),
                project_l2(sets[1], (z - step * grad)[d_x:]),
            ]
        )
        if np.linalg.norm(z_new - z) <= 1e-12:
            z = z_new
            break
        z = z_new
    projs = project_all(z)
    return float(np.mean([np.sum((z - p) ** 2) for p in projs]))


def potential_deviation(phi_a, phi_b, grid):
    """max over sampled profiles of phi_a - phi_b (the Delta functional)."""
    return float(max(phi_a(pt) - phi_b(pt) for pt in grid))


def potential_similarity(potentials, grid):
    """(1/T) sum_t Delta(Phi_t, Phi_{t+1}) over a shared sampled grid."""
    T = len(potentials)
    if T < 2:
        return 0.0
    total = sum(
        potential_deviation(potentials[t], potentials[t + 1], grid) for t in range(T - 1)
    )
    return total / T


def similarity(
    opt_anchors=None,
    ne_points=None,
    games=None,
    potentials=None,
    potential_grid=None,
    commitment_mean=None,
):
    """Assemble the similarity statistics the meta bounds are stated in."""
    stats = SimilarityStats()
    if opt_anchors is not None:
        stats.v_opt2 = np.asarray([anchor_variance(a) for a in opt_anchors])
        on_simplex = all(
            np.allclose(np.sum(np.asarray(a), axis=1), 1.0) and np.min(np.asarray(a)) >= -1e-12
            for a in opt_anchors
        )
        if on_simplex:
            stats.v_kl = np.asarray([kl_anchor_variance(a) for a in opt_anchors])
    if ne_points is not None:
        stats.v_ne2_worst = ne_similarity_worst(ne_points)
        if games is not None:
            stats.v_ne2_best = ne_similarity_best(games, None)
    if potentials is not None:
        if potential_grid is None:
            raise ConfigError("potential similarity needs a sampled grid")
        stats.v_diff = potential_similarity(potentials, potential_grid)
    if commitment_mean is not None:
        stats.entropy = shannon_entropy(commitment_mean)
    return stats
