"""Repeated Stackelberg security games with a meta-learned MWU defender.

The defender commits to coverage vectors drawn from a finite set of extreme
points; attackers best respond per revealed type. Initialization and
learning rate of the MWU distribution over extreme points are meta-learned
across tasks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from metagames.errors import ConfigError, InvalidInputError
from metagames.games import SecurityGame
from metagames.meta import EwooState, ewoo_next_eta, shannon_entropy
from metagames.swapregret import boundary_offset_comparator


def best_response(game: SecurityGame, type_id, coverage):
    """Attacked target: argmax attacker utility, ties defender-favorable then
    lowest index."""
    coverage = np.asarray(coverage, dtype=float)
    att = game.attacker_utilities(type_id, coverage)
    best = np.max(att)
    tied = np.flatnonzero(att >= best - 1e-12)
    if len(tied) == 1:
        return int(tied[0])
    defender = game.defender_utilities(coverage)[tied]
    return int(tied[int(np.argmax(defender))])  # argmax keeps the lowest index


def defender_payoff(game: SecurityGame, type_id, coverage):
    """Defender utility when the given attacker type best responds."""
    return game.defender_utility(coverage, best_response(game, type_id, coverage))


class AttackerSequence:
    """Per-task, per-round attacker type indices; adversarially scriptable."""

    def __init__(self, type_ids, n_types):
        self.rounds = [list(map(int, task)) for task in type_ids]
        self.n_types = int(n_types)
        for task in self.rounds:
            if any(not 0 <= f < self.n_types for f in task):
                raise InvalidInputError("attacker type index out of range")

    def __len__(self):
        return len(self.rounds)

    def __getitem__(self, t):
        return self.rounds[t]

    @staticmethod
    def from_json(obj, n_types, T=None, m=None, seed=0):
        """Round lists verbatim, or a generator spec.

        Specs: {"kind": "fixed", "type": f} or
        {"kind": "uniform", "types": [...]} drawing i.i.d. per round.
        """
        if isinstance(obj, str):
            import json as _json

            obj = _json.loads(obj)
        if isinstance(obj, list):
            return AttackerSequence(obj, n_types)
        kind = obj.get("kind")
        if T is None or m is None:
            raise ConfigError("generator specs need T and m")
        if kind == "fixed":
            f = int(obj["type"])
            return AttackerSequence([[f] * m for _ in range(T)], n_types)
        if kind == "uniform":
            pool = [int(f) for f in obj.get("types", range(n_types))]
            rng = np.random.default_rng(seed)
            rounds = [[pool[int(i)] for i in rng.integers(0, len(pool), size=m)] for _ in range(T)]
            return AttackerSequence(rounds, n_types)
        raise ConfigError(f"unknown attacker script kind {kind!r}")


@dataclass
class ExtremePointSet:
    """Finite set of coverage vectors the defender mixes over."""

    points: np.ndarray
    provenance: str = "user-supplied"
    gamma: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InvalidInputError("extreme-point set must be a nonempty 2-d array")
        if np.min(pts) < -1e-9 or np.max(np.abs(np.sum(pts, axis=1) - 1.0)) > 1e-9:
            raise InvalidInputError("extreme points must lie on the simplex")
        self.points = pts

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


def _region_constraints(game: SecurityGame, type_id, target):
    """Halfspace rows (a, b) with a.x >= b describing the best-response region."""
    c = game.attacker_covered[type_id]
    u = game.attacker_uncovered[type_id]
    rows = []
    for other in range(game.d):
        if other == target:
            continue
        a = np.zeros(game.d)
        a[target] = c[target] - u[target]
        a[other] = -(c[other] - u[other])
        rows.append((a, u[other] - u[target]))
    return rows


def _region_vertices(game: SecurityGame, type_id, target, tol=1e-9):
    """Vertices of one best-response region via facet-combination solves."""
    d = game.d
    br_rows = _region_constraints(game, type_id, target)
    # Candidate active facets: coordinate zeros and best-response equalities.
    facets = [("zero", a) for a in range(d)] + [("br", i) for i in range(len(br_rows))]
    vertices = []
    for combo in itertools.combinations(facets, d - 1):
        M = np.ones((d, d))
        rhs = np.zeros(d)
        rhs[-1] = 1.0
        for row_idx, (kind, idx) in enumerate(combo):
            if kind == "zero":
                row = np.zeros(d)
                row[idx] = 1.0
                M[row_idx] = row
                rhs[row_idx] = 0.0
            else:
                a, b = br_rows[idx]
                M[row_idx] = a
                rhs[row_idx] = b
        M[d - 1] = np.ones(d)
        rhs[d - 1] = 1.0
        try:
            x = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            continue
        if np.min(x) < -tol:
            continue
        if any(float(a @ x) < b - tol for a, b in br_rows):
            continue
        vertices.append(np.maximum(x, 0.0) / np.sum(np.maximum(x, 0.0)))
    return vertices


def _dedupe(points, decimals=9):
    seen = {}
    for p in points:
        key = tuple(np.round(p, decimals))
        if key not in seen:
            seen[key] = p
    return list(seen.values())


def build_extreme_points(games, gamma=1e-3, grid_threshold=5):
    """Extreme points covering every attacker-type/target region.

    For d <= grid_threshold the vertices of each best-response region are
    enumerated exhaustively and a gamma-interior shift of each vertex toward
    its region's centroid is added; larger d falls back to a uniform simplex
    grid with spacing gamma.
    """
    if isinstance(games, SecurityGame):
        games = [games]
    d = games[0].d
    if any(g.d != d for g in games):
        raise ConfigError("extreme-point construction needs a shared target count")
    if d > grid_threshold:
        n = max(1, round(1.0 / gamma))
        pts = [
            np.asarray(c, dtype=float) / n
            for c in itertools.product(range(n + 1), repeat=d)
            if sum(c) == n
        ]
        return ExtremePointSet(np.asarray(pts), provenance="grid", gamma=gamma)
    collected = []
    for game in games:
        for type_id in range(game.k):
            for target in range(d):
                verts = _region_vertices(game, type_id, target)
                if not verts:
                    continue
                centroid = np.mean(np.asarray(verts), axis=0)
                for v in verts:
                    collected.append(v)
                    gap = centroid - v
                    dist = float(np.linalg.norm(gap))
                    if dist > 0:
                        collected.append(v + min(1.0, gamma / dist) * gap)
    if not collected:
        raise ConfigError("no feasible best-response region vertices found")
    return ExtremePointSet(
        np.asarray(_dedupe(collected)), provenance="brute-force-regions", gamma=gamma
    )


def stackelberg_regret(game: SecurityGame, coverages, attacker_types, extreme_points):
    """Regret against the best fixed commitment from the comparator set.

    The comparator's best responses are recomputed against the comparator
    itself, not against the played strategies.
    """
    pts = extreme_points.points if isinstance(extreme_points, ExtremePointSet) else np.asarray(extreme_points)
    if pts.shape[0] == 0:
        raise InvalidInputError("empty comparator set")
    coverages = np.asarray(coverages, dtype=float)
    attacker_types = list(attacker_types)
    realized = sum(
        defender_payoff(game, f, x) for f, x in zip(attacker_types, coverages)
    )
    best = -np.inf
    for x in pts:
        total = sum(defender_payoff(game, f, x) for f in attacker_types)
        best = max(best, total)
    return float(best - realized)


@dataclass
class StackelbergConfig:
    m: int = 100
    initializer: str = "ftl-average"  # or "uniform"
    eta: object = "ewoo"  # "ewoo" or a fixed float
    gamma: float = 1e-3
    alpha: float = None  # boundary offset; default 1/sqrt(mT)
    seed: int = 0
    extras: dict = field(default_factory=dict)


def run_meta_stackelberg(games, attacker_script, config: StackelbergConfig, extreme_points=None):
    """MWU over extreme points with meta-learned initialization and rate.

    ``attacker_script`` is a per-task list of per-round type indices. The
    defender observes the full utility vector over the extreme-point set
    every round (the revealed type makes it computable), samples its
    commitment from the MWU distribution, and logs expected and realized
    Stackelberg regret.
    """
    T = len(games)
    d = games[0].d
    if any(g.d != d for g in games):
        raise ConfigError("tasks must share the target count d")
    if len(attacker_script) != T:
        raise ConfigError("attacker script must cover every task")
    m = config.m
    alpha = config.alpha if config.alpha is not None else 1.0 / math.sqrt(m * T)
    E = extreme_points if extreme_points is not None else build_extreme_points(games, config.gamma)
    n_points = len(E)
    rng = np.random.default_rng(config.seed)

    # EWOO setup per the CCE-style parameterization with gamma_t = m.
    D = math.sqrt(math.log(n_points / alpha) / m)
    rho = T ** (-0.25)
    ewoo = EwooState.from_radius(D, rho)

    init_mean = np.full(n_points, 1.0 / n_points)
    seen = 0
    records = []
    opt_hindsight_dists = []
    for t in range(T):
        game = games[t]
        script = list(attacker_script[t])
        if len(script) != m:
            raise ConfigError(f"task {t} script has {len(script)} rounds, expected {m}")
        if any(not 0 <= f < game.k for f in script):
            raise ConfigError("attacker type index out of range")
        # Defender utility of each extreme point against each type's response.
        payoff_table = np.asarray(
            [[defender_payoff(game, f, x) for x in E.points] for f in range(game.k)]
        )
        if config.initializer == "ftl-average":
            y0 = init_mean.copy() if seen > 0 else np.full(n_points, 1.0 / n_points)
        elif config.initializer == "uniform":
            y0 = np.full(n_points, 1.0 / n_points)
        else:
            raise ConfigError(f"unknown initializer {config.initializer!r}")
        if config.eta == "ewoo":
            eta_t = ewoo_next_eta(ewoo)
        else:
            eta_t = float(config.eta)

        y = y0.copy()
        cum_utility = np.zeros(n_points)
        expected_value = 0.0
        realized_value = 0.0
        sampled = rng.random(m)
        for i in range(m):
            u_vec = payoff_table[script[i]]
            expected_value += float(y @ u_vec)
            choice = int(np.searchsorted(np.cumsum(y), sampled[i] * np.sum(y)))
            choice = min(choice, n_points - 1)
            realized_value += float(u_vec[choice])
            cum_utility += u_vec
            logits = np.log(np.maximum(y, 1e-300)) + eta_t * u_vec
            logits -= np.max(logits)
            y = np.exp(logits)
            y /= np.sum(y)

        best_idx = int(np.argmax(cum_utility))
        best_value = float(cum_utility[best_idx])
        y_opt = np.zeros(n_points)
        y_opt[best_idx] = 1.0
        y_tilde = boundary_offset_comparator(y_opt, alpha)
        kl = float(
            np.sum(y_tilde[y_tilde > 0] * np.log(y_tilde[y_tilde > 0] / y0[y_tilde > 0]))
        )
        regret_expected = best_value - expected_value
        regret_realized = best_value - realized_value
        mwu_bound = eta_t * m + kl / eta_t + 2.0 * alpha * m
        records.append(
            {
                "task": t,
                "eta": eta_t,
                "regret_expected": regret_expected,
                "regret_realized": regret_realized,
                "init_kl": kl,
                "mwu_bound": mwu_bound,
                "best_point_index": best_idx,
            }
        )
        opt_hindsight_dists.append(y_tilde)
        # Meta updates: FTL mean over offset optima, EWOO over bound losses.
        seen += 1
        init_mean = init_mean + (y_tilde - init_mean) / seen if seen > 1 else y_tilde.copy()
        ewoo.record(kl / m, float(m))

    mean_dist = np.mean(np.asarray(opt_hindsight_dists), axis=0)
    task_avg = float(np.mean([r["regret_expected"] for r in records]))
    summary = {
        "extreme_points": E,
        "alpha": alpha,
        "entropy_mean_optimum": shannon_entropy(mean_dist),
        "task_avg_expected_regret": task_avg,
        # measured constant of the sqrt(m log|E|) worst-case scaling
        "worst_case_constant": task_avg / math.sqrt(m * math.log(max(n_points, 2))),
    }
    return records, summary
