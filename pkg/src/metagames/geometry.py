"""Convex strategy sets, Bregman divergences, and prox (argmax) steps.

Every learner in the package is built from the regularized argmax

    prox(anchor, g, eta) = argmax_{x in set} { <x, g> - (1/eta) D(x || anchor) },

where D is the Bregman divergence of the configured regularizer. Gradients
are utilities, so the step is an ascent step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from metagames.errors import DomainError, InvalidInputError, NumericError

# Anchor coordinates below this are lifted before entropic/log-barrier steps;
# keeps logs finite while staying below every experiment tolerance.
INTERIOR_FLOOR = 1e-15

EUCLIDEAN = "euclidean"
ENTROPIC = "entropic"
LOG_BARRIER = "log-barrier"

_KINDS = (EUCLIDEAN, ENTROPIC, LOG_BARRIER)


@dataclass(frozen=True)
class Simplex:
    """Probability simplex over ``dim`` actions."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError(f"simplex dimension must be >= 1, got {self.dim}")

    @property
    def diameter(self):
        """l2-diameter: distance between two vertices, sqrt(2) for dim >= 2."""
        return float(np.sqrt(2.0)) if self.dim > 1 else 0.0

    def center(self):
        return np.full(self.dim, 1.0 / self.dim)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        return (
            x.shape == (self.dim,)
            and np.all(x >= -tol)
            and abs(float(np.sum(x)) - 1.0) <= tol
        )

    def vertices(self):
        return np.eye(self.dim)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with componentwise bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or np.any(lower > upper):
            raise InvalidInputError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self):
        return self.lower.shape[0]

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def center(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        return (
            x.shape == self.lower.shape
            and np.all(x >= self.lower - tol)
            and np.all(x <= self.upper + tol)
        )


class ProductSet:
    """Cartesian product of simplices/boxes over a concatenated vector."""

    def __init__(self, *blocks):
        if not blocks:
            raise InvalidInputError("product of zero sets")
        self.blocks = tuple(blocks)
        dims = [b.dim for b in blocks]
        self.dim = int(sum(dims))
        self._offsets = np.concatenate(([0], np.cumsum(dims))).astype(int)

    def split(self, z):
        z = np.asarray(z, dtype=float)
        return [z[self._offsets[i] : self._offsets[i + 1]] for i in range(len(self.blocks))]

    def join(self, parts):
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    @property
    def diameter(self):
        return float(np.sqrt(sum(b.diameter**2 for b in self.blocks)))

    def center(self):
        return self.join([b.center() for b in self.blocks])

    def contains(self, z, tol=1e-12):
        return all(b.contains(p, tol) for b, p in zip(self.blocks, self.split(z)))


@dataclass(frozen=True)
class Regularizer:
    """1-strongly convex regularizer inducing the Bregman divergence of the prox."""

    kind: str = EUCLIDEAN

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidInputError(f"unknown regularizer kind {self.kind!r}")


def _check_finite(y):
    y = np.asarray(y, dtype=float)
    # A NaN or a mixed-sign infinity both poison the sum; a same-sign
    # infinity survives it. Far cheaper than isfinite over the array.
    if not math.isfinite(float(np.sum(y))):
        raise InvalidInputError("non-finite input")
    return y


_RANGE_CACHE = {}


def _one_to(d):
    ks = _RANGE_CACHE.get(d)
    if ks is None:
        ks = np.arange(1, d + 1, dtype=float)
        _RANGE_CACHE[d] = ks
    return ks


def project_simplex(y):
    """Euclidean projection of ``y`` onto the probability simplex.

    Sort-based thresholding; exact up to floating point.
    """
    d = y.shape[0]
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    rho = int(np.count_nonzero(u * _one_to(d) > css))
    theta = css[rho - 1] / rho
    return np.maximum(y - theta, 0.0)


def project_l2(strategy_set, y):
    """argmin over the set of ||x - y||_2; exact fixed point on feasible input."""
    y = _check_finite(y)
    if isinstance(strategy_set, Simplex):
        if y.min() >= 0.0 and abs(y.sum() - 1.0) <= 1e-12:
            return y
        return project_simplex(y)
    if isinstance(strategy_set, Box):
        return np.clip(y, strategy_set.lower, strategy_set.upper)
    if isinstance(strategy_set, ProductSet):
        return strategy_set.join(
            [project_l2(b, p) for b, p in zip(strategy_set.blocks, strategy_set.split(y))]
        )
    raise InvalidInputError(f"unsupported set {type(strategy_set).__name__}")


def lift_interior(xp):
    """Lift coordinates below INTERIOR_FLOOR and renormalize onto the simplex."""
    xp = np.asarray(xp, dtype=float)
    lifted = np.maximum(xp, INTERIOR_FLOOR)
    return lifted / np.sum(lifted)


def bregman(reg, x, xp):
    """Bregman divergence D(x || xp) of the regularizer.

    euclidean: squared-distance halves; entropic: KL divergence;
    log-barrier: Itakura-Saito-type sum. xp must be in the relative
    interior for the entropic and log-barrier kinds.
    """
    x = _check_finite(x)
    xp = _check_finite(xp)
    if reg.kind == EUCLIDEAN:
        diff = x - xp
        return 0.5 * float(diff @ diff)
    if np.any(xp <= 0):
        raise DomainError(f"{reg.kind} divergence needs an interior second argument")
    if reg.kind == ENTROPIC:
        mask = x > 0
        return float(np.sum(x[mask] * np.log(x[mask] / xp[mask])))
    # log-barrier
    if np.any(x <= 0):
        return float("inf")
    return float(np.sum(np.log(xp / x) + x / xp - 1.0))


def _prox_log_barrier_simplex(anchor, g, eta, tol=1e-10, max_iter=200):
    """Log-barrier prox on the simplex via bisection on the dual multiplier.

    First-order conditions give x_a = 1 / (eta * (nu - g_a) + 1 / anchor_a);
    the simplex multiplier nu is found by bisecting sum(x(nu)) = 1.
    """
    inv_anchor = 1.0 / anchor

    def coords(nu):
        denom = eta * (nu - g) + inv_anchor
        return 1.0 / denom

    # sum(x(nu)) is strictly decreasing on (nu_lo, inf) and blows up at
    # nu_lo, so the root is bracketed once the upper end gives sum < 1.
    nu_lo = float(np.max(g - inv_anchor / eta))
    nu_hi = max(nu_lo + 1.0, float(np.max(g)) + (len(g) + 1.0) / eta)
    for _ in range(200):
        if np.sum(coords(nu_hi)) < 1.0:
            break
        nu_hi = nu_lo + 2.0 * (nu_hi - nu_lo)
    for _ in range(max_iter):
        nu = 0.5 * (nu_lo + nu_hi)
        s = float(np.sum(coords(nu)))
        if abs(s - 1.0) <= tol:
            x = coords(nu)
            return x / np.sum(x)
        if s > 1.0:
            nu_lo = nu
        else:
            nu_hi = nu
    residual = abs(float(np.sum(coords(0.5 * (nu_lo + nu_hi)))) - 1.0)
    raise NumericError(
        f"log-barrier prox bisection did not converge: residual={residual:.3e}, "
        f"eta={eta}, bracket=({nu_lo}, {nu_hi})"
    )


def prox_step(reg, strategy_set, anchor, g, eta):
    """One regularized argmax step from ``anchor`` along utility gradient ``g``.

    Solves argmax_{x in set} { <x, g> - (1/eta) D(x || anchor) } exactly:
    euclidean by l2 projection of anchor + eta*g, entropic by the closed-form
    multiplicative update, log-barrier by one-dimensional dual bisection.
    """
    if eta <= 0:
        raise InvalidInputError(f"eta must be positive, got {eta}")
    anchor = _check_finite(anchor)
    g = _check_finite(g)
    if reg.kind == EUCLIDEAN:
        if isinstance(strategy_set, Simplex):
            return project_simplex(anchor + eta * g)
        return project_l2(strategy_set, anchor + eta * g)
    if not isinstance(strategy_set, Simplex):
        raise DomainError(f"{reg.kind} prox is defined on the simplex only")
    anchor = lift_interior(anchor)
    if reg.kind == ENTROPIC:
        logits = np.log(anchor) + eta * g
        logits -= np.max(logits)
        w = np.exp(logits)
        return w / np.sum(w)
    return _prox_log_barrier_simplex(anchor, g, eta)
