"""Experiment orchestration: task sequences, learner/meta wiring, logging.

A run is deterministic under its seed: identical configs produce
byte-identical CSV/JSON/SVG outputs.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from metagames.errors import ConfigError
from metagames.games import (
    MatrixGame,
    NormalFormGame,
    PotentialGame,
    SequenceConfig,
    lipschitz_constant,
    sample_game_sequence,
    utility_gradient,
)
from metagames.geometry import ENTROPIC, EUCLIDEAN, LOG_BARRIER, Regularizer
from metagames.learners import (
    GDLearner,
    OMDLearner,
    external_regret,
    rvu_terms,
)
from metagames.meta import (
    EwooState,
    Initializer,
    SimilarityStats,
    TaskOutcome,
    anchor_variance,
    ewoo_next_eta,
)
from metagames.metrics import duality_gap, ne_gap, path_lengths, saddle_point

SCHEMA_VERSION = 1

CSV_HEADER = "schema_version,task,iter,player,regret_cum,dualgap,negap,pathlen2,eta,init_mode"


@dataclass
class RunRecord:
    """One logged (task, iteration, player) row."""

    task: int
    iter: int
    player: int
    regret_cum: float
    dualgap: float
    negap: float
    pathlen2: float
    eta: float
    init_mode: str
    strategy: Optional[np.ndarray] = None

    def csv_row(self):
        return (
            f"{SCHEMA_VERSION},{self.task},{self.iter},{self.player},"
            f"{self.regret_cum!r},{self.dualgap!r},{self.negap!r},{self.pathlen2!r},"
            f"{self.eta!r},{self.init_mode}"
        )


def free_first_predictions(game, learners):
    """The one free oracle call at task start: predict with u_k at the
    initial profile. Learners without predictions (plain GD) are skipped."""
    profile = [lrn.init for lrn in learners]
    for k, lrn in enumerate(learners):
        if hasattr(lrn, "set_prediction"):
            lrn.set_prediction(utility_gradient(game, k, profile))


def play_matrix_task(game: MatrixGame, x_learner, y_learner, m, free_first=True, alternating=False):
    """Self-play on a two-player zero-sum matrix game for m iterations."""
    A = game.A
    if free_first:
        x_learner.set_prediction(-A @ y_learner.init)
        y_learner.set_prediction(A.T @ x_learner.init)
    for _ in range(m):
        x = x_learner.play()
        if alternating:
            # The second mover predicts with the first mover's current move.
            y_learner.set_prediction(A.T @ x)
        y = y_learner.play()
        x_learner.update(-A @ y)
        y_learner.update(A.T @ x)
    return x_learner, y_learner


def play_normal_form_task(game, learners, m, free_first=True):
    """Simultaneous self-play on an n-player game for m iterations."""
    if free_first:
        free_first_predictions(game, learners)
    n = len(learners)
    for _ in range(m):
        profile = [lrn.play() for lrn in learners]
        utilities = [utility_gradient(game, k, profile) for k in range(n)]
        for lrn, u in zip(learners, utilities):
            lrn.update(u)
    return learners


def play_secondary_anchor_task(game: MatrixGame, x_learner, y_learner, m):
    """OMD with predictions evaluated at the previous secondary iterates."""
    A = game.A
    for _ in range(m):
        x_learner.set_prediction(-A @ y_learner.x_hat)
        y_learner.set_prediction(A.T @ x_learner.x_hat)
        x = x_learner.play()
        y = y_learner.play()
        x_learner.update(-A @ y)
        y_learner.update(A.T @ x)
    return x_learner, y_learner


def _default_eta(game, n_players):
    L = max(lipschitz_constant(game), 1e-12)
    return 1.0 / (4.0 * L * np.sqrt(max(n_players - 1, 1)))


_REGS = {
    "ogd": EUCLIDEAN,
    "opthedge": ENTROPIC,
    "omd-logbar": LOG_BARRIER,
}


def make_learner(algo, strategy_set, eta, init=None, prediction="recency"):
    if algo == "gd":
        return GDLearner(strategy_set, eta, init=init)
    if algo in _REGS:
        return OMDLearner(
            strategy_set,
            eta,
            regularizer=Regularizer(_REGS[algo]),
            init=init,
            prediction_mode=prediction,
        )
    raise ConfigError(f"learner.algo: unknown algorithm {algo!r}")


@dataclass
class ExperimentConfig:
    """Validated experiment description; see ``from_dict`` for the schema."""

    T: int
    m: int
    seed: int
    game: SequenceConfig
    algo: str = "ogd"
    eta: object = "auto"  # "auto" | float
    eta_mode: str = "fixed"  # fixed | doubling | ewoo
    init_mode: str = "cold"
    prediction: str = "recency"
    first_prediction: str = "oracle"  # oracle | zero
    alternating_updates: bool = False
    metrics_every: int = 0  # 0 = end of task only
    log_every: int = 0  # 0 = task summaries only
    dump_strategies: bool = False
    out: Optional[str] = None
    arms: list = field(default_factory=list)
    ewoo_D: Optional[float] = None
    ewoo_rho: Optional[float] = None
    ewoo_cprime: float = 1.0
    similarity_report: bool = False

    @staticmethod
    def from_dict(obj):
        def need(key, typ, where="config"):
            if key not in obj:
                raise ConfigError(f"{where}.{key}: missing")
            val = obj[key]
            if typ is int and not isinstance(val, int):
                raise ConfigError(f"{where}.{key}: expected integer, got {val!r}")
            return val

        T = need("T", int)
        m = need("m", int)
        if T < 1 or m < 1:
            raise ConfigError("config.T and config.m must be >= 1")
        game_obj = need("game", dict)
        if not isinstance(game_obj, dict) or "family" not in game_obj:
            raise ConfigError("config.game.family: missing")
        seq = SequenceConfig(
            family=game_obj["family"],
            T=T,
            seed=int(obj.get("seed", 0)),
            sequencing=game_obj.get("sequencing", "random"),
            base=np.asarray(game_obj["base"], dtype=float) if "base" in game_obj else None,
            delta=float(game_obj.get("delta", 0.0)),
            prior=np.asarray(game_obj["prior"], dtype=float) if "prior" in game_obj else None,
            dim=int(game_obj.get("dim", 3)),
            alpha=float(game_obj.get("alpha", 0.0)),
        )
        # The meta block groups the cross-task knobs; flat keys still win so
        # arm overrides stay terse.
        meta_block = obj.get("meta", {})
        if not isinstance(meta_block, dict):
            raise ConfigError("config.meta: expected an object")
        ewoo_block = meta_block.get("ewoo", {})
        eta_mode = obj.get("learner", {}).get("eta_mode")
        if eta_mode is None:
            eta_mode = "ewoo" if ewoo_block.get("enabled", False) else "fixed"
        init_mode = obj.get("init", meta_block.get("initializer", "cold"))
        cfg = ExperimentConfig(
            T=T,
            m=m,
            seed=int(obj.get("seed", 0)),
            game=seq,
            algo=obj.get("learner", {}).get("algo", "ogd"),
            eta=obj.get("learner", {}).get("eta", "auto"),
            eta_mode=eta_mode,
            init_mode=init_mode,
            prediction=obj.get("learner", {}).get("prediction", "recency"),
            first_prediction=obj.get("learner", {}).get("first_prediction", "oracle"),
            alternating_updates=bool(obj.get("learner", {}).get("alternating", False)),
            metrics_every=int(obj.get("metrics_every", 0)),
            log_every=int(obj.get("log_every", 0)),
            dump_strategies=bool(obj.get("dump_strategies", False)),
            out=obj.get("out"),
            arms=obj.get("arms", []),
            ewoo_D=ewoo_block.get("D"),
            ewoo_rho=ewoo_block.get("rho"),
            ewoo_cprime=float(ewoo_block.get("Cprime", 1.0)),
            similarity_report=bool(meta_block.get("similarity_report", False)),
        )
        if cfg.eta_mode not in ("fixed", "doubling", "ewoo"):
            raise ConfigError(f"learner.eta_mode: unknown mode {cfg.eta_mode!r}")
        if cfg.first_prediction not in ("oracle", "zero"):
            raise ConfigError(f"learner.first_prediction: {cfg.first_prediction!r}")
        return cfg


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    task_summaries: list
    similarity: SimilarityStats
    games: list

    def task_column(self, key):
        return np.asarray([row[key] for row in self.task_summaries])


def _task_eta(cfg, game, n_players, current_eta, ewoo_state):
    if cfg.eta_mode == "ewoo" and ewoo_state is not None:
        return ewoo_next_eta(ewoo_state)
    if current_eta is not None:
        return current_eta
    if cfg.eta == "auto":
        return _default_eta(game, n_players)
    return float(cfg.eta)


def run_experiment(config) -> ExperimentResult:
    """Run one arm of a meta-learning experiment.

    Per task: draw the game, initialize per the configured mode, self-play
    m iterations, log regrets/gaps, and fold the task outcome into the
    meta state. Deterministic under the config seed.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    games = sample_game_sequence(cfg.game)
    first = games[0]
    if isinstance(first, PotentialGame):
        return _run_potential_experiment(cfg, games)
    if isinstance(first, NormalFormGame):
        return _run_normal_form_experiment(cfg, games)
    return _run_matrix_experiment(cfg, games)


def _run_matrix_experiment(cfg, games):
    sets = games[0].sets
    initializer = Initializer(cfg.init_mode, sets)
    eta = None if cfg.eta == "auto" else float(cfg.eta)
    if cfg.eta_mode == "ewoo":
        D = cfg.ewoo_D if cfg.ewoo_D is not None else np.sqrt(sum(s.diameter**2 for s in sets))
        rho = cfg.ewoo_rho if cfg.ewoo_rho is not None else cfg.T ** (-0.25)
        ewoo_state = EwooState.from_radius(float(D), float(rho))
    else:
        ewoo_state = None
    records = []
    summaries = []
    optima = [[], []]
    max_restarts = 60

    for t, game in enumerate(games):
        inits = initializer.initialization()
        task_eta = _task_eta(cfg, game, 2, eta, ewoo_state)
        restarts = 0
        while True:
            # Doubling trick: rerun the task at half the rate whenever the
            # local RVU residual turns positive; only the final attempt is
            # logged.
            attempt_records = []
            xl = make_learner(cfg.algo, sets[0], task_eta, init=inits[0], prediction=cfg.prediction)
            yl = make_learner(cfg.algo, sets[1], task_eta, init=inits[1], prediction=cfg.prediction)
            _play_matrix_logged(cfg, game, xl, yl, t, attempt_records)
            if cfg.eta_mode != "doubling" or restarts >= max_restarts:
                break
            _, pred_x, path_x = rvu_terms(xl, xl.init)
            _, pred_y, path_y = rvu_terms(yl, yl.init)
            residual = task_eta * (pred_x + pred_y) - (path_x + path_y) / (8.0 * task_eta)
            if residual <= 0:
                break
            task_eta /= 2.0
            restarts += 1
        records.extend(attempt_records)
        if cfg.eta_mode == "doubling":
            eta = task_eta  # keep the calibrated rate for later tasks

        x_hist, y_hist = np.asarray(xl.path[1:]), np.asarray(yl.path[1:])
        u_x, u_y = xl.utility_array(), yl.utility_array()
        reg_x, opt_x = external_regret(x_hist, u_x, sets[0])
        reg_y, opt_y = external_regret(y_hist, u_y, sets[1])
        x_bar, y_bar = np.mean(x_hist, axis=0), np.mean(y_hist, axis=0)
        gap = duality_gap(game, x_bar, y_bar)
        gaps_at_avg = ne_gap(game, [x_bar, y_bar])
        p1, _ = path_lengths(xl.primary_array())
        p2, _ = path_lengths(yl.primary_array())
        summaries.append(
            {
                "task": t,
                "eta": task_eta,
                "regret_x": reg_x,
                "regret_y": reg_y,
                "dualgap_avg": gap,
                "negap_avg": float(np.max(gaps_at_avg)),
                "pathlen2": p1 + p2,
                "init_dist2": float(
                    np.sum((opt_x - xl.init) ** 2) + np.sum((opt_y - yl.init) ** 2)
                ),
                "inits": [xl.init.tolist(), yl.init.tolist()],
                "optima": [opt_x.tolist(), opt_y.tolist()],
            }
        )
        optima[0].append(opt_x)
        optima[1].append(opt_y)
        nash = None
        if cfg.init_mode == "ne-average":
            ne_x, ne_y, _ = saddle_point(game)
            nash = [ne_x, ne_y]
        initializer.observe(
            TaskOutcome(
                optima=[opt_x, opt_y],
                last_iterates=[x_hist[-1], y_hist[-1]],
                nash=nash,
            )
        )
        if ewoo_state is not None:
            breg = 0.5 * summaries[-1]["init_dist2"]
            ewoo_state.record(breg, 1.0)

    sim = SimilarityStats(v_opt2=np.asarray([anchor_variance(a) for a in optima]))
    if cfg.similarity_report:
        from metagames.meta import kl_anchor_variance, ne_similarity_worst

        sim.v_kl = np.asarray([kl_anchor_variance(np.asarray(a)) for a in optima])
        if cfg.init_mode == "ne-average" and initializer.count:
            nes = [
                np.concatenate([saddle_point(g)[0], saddle_point(g)[1]]) for g in games
            ]
            sim.v_ne2_worst = ne_similarity_worst(nes)
    return ExperimentResult(cfg, records, summaries, sim, games)


def default_experiment_config():
    """The default experiment: a three-arm initializer comparison on matrix
    games at full scale (T = 200, m = 1000) with the usual rate grid."""
    return {
        "T": 200,
        "m": 1000,
        "seed": 0,
        "game": {
            "family": "perturbed-base",
            "base": [[0.2, -0.6], [-0.6, 1.0]],
            "delta": 0.02,
            "sequencing": "random",
        },
        "learner": {"algo": "ogd", "eta": 0.01},
        "init": "ftl-average",
        "arms": [
            {"name": "meta-avg", "init": "ftl-average"},
            {"name": "last-iterate", "init": "last-iterate"},
            {"name": "cold", "init": "cold"},
        ],
        "eta_grid": [0.1, 0.01, 0.001],
    }


def _play_matrix_logged(cfg, game, xl, yl, t, records):
    A = game.A
    m = cfg.m
    if cfg.first_prediction == "oracle":
        xl.set_prediction(-A @ yl.init)
        yl.set_prediction(A.T @ xl.init)
    cum_u = [np.zeros(game.d_x), np.zeros(game.d_y)]
    realized = [0.0, 0.0]
    path2 = [0.0, 0.0]
    x_sum = np.zeros(game.d_x)
    y_sum = np.zeros(game.d_y)
    prev = [xl.init.copy(), yl.init.copy()]
    for i in range(1, m + 1):
        x = xl.play()
        if cfg.alternating_updates:
            yl.set_prediction(A.T @ x)
        y = yl.play()
        u_x, u_y = -A @ y, A.T @ x
        x_sum += x
        y_sum += y
        for k, (lrn, u, s) in enumerate(((xl, u_x, x), (yl, u_y, y))):
            cum_u[k] += u
            realized[k] += float(s @ u)
            path2[k] += float(np.sum((s - prev[k]) ** 2))
        prev = [x, y]
        xl.update(u_x)
        yl.update(u_y)
        if cfg.log_every and (i % cfg.log_every == 0 or i == m):
            want_metrics = cfg.metrics_every and (i % cfg.metrics_every == 0 or i == m)
            if want_metrics:
                gap = duality_gap(game, x_sum / i, y_sum / i)
                gaps = ne_gap(game, [x, y])
            else:
                gap, gaps = float("nan"), (float("nan"), float("nan"))
            for k, (s, lrn) in enumerate(((x, xl), (y, yl))):
                records.append(
                    RunRecord(
                        task=t,
                        iter=i,
                        player=k,
                        regret_cum=float(np.max(cum_u[k]) - realized[k]),
                        dualgap=float(gap),
                        negap=float(gaps[k]),
                        pathlen2=path2[k],
                        eta=lrn.eta,
                        init_mode=cfg.init_mode,
                        strategy=s.copy() if cfg.dump_strategies else None,
                    )
                )


def _run_normal_form_experiment(cfg, games):
    sets = games[0].sets
    n = games[0].n
    initializer = Initializer(cfg.init_mode, sets)
    eta = None if cfg.eta == "auto" else float(cfg.eta)
    if cfg.eta_mode == "ewoo":
        D = cfg.ewoo_D if cfg.ewoo_D is not None else np.sqrt(sum(s.diameter**2 for s in sets))
        rho = cfg.ewoo_rho if cfg.ewoo_rho is not None else cfg.T ** (-0.25)
        ewoo_state = EwooState.from_radius(float(D), float(rho))
    else:
        ewoo_state = None
    records = []
    summaries = []
    optima = [[] for _ in range(n)]
    max_restarts = 60
    for t, game in enumerate(games):
        inits = initializer.initialization()
        task_eta = _task_eta(cfg, game, n, eta, ewoo_state)
        restarts = 0
        while True:
            learners = [
                make_learner(cfg.algo, sets[k], task_eta, init=inits[k], prediction=cfg.prediction)
                for k in range(n)
            ]
            play_normal_form_task(
                game, learners, cfg.m, free_first=cfg.first_prediction == "oracle"
            )
            if cfg.eta_mode != "doubling" or restarts >= max_restarts:
                break
            residual = 0.0
            for lrn in learners:
                _, pred, path = rvu_terms(lrn, lrn.init)
                residual += task_eta * pred - path / (8.0 * task_eta)
            if residual <= 0:
                break
            task_eta /= 2.0
            restarts += 1
        if cfg.eta_mode == "doubling":
            eta = task_eta
        regs, opts = [], []
        for k, lrn in enumerate(learners):
            r, o = external_regret(np.asarray(lrn.path[1:]), lrn.utility_array(), sets[k])
            regs.append(r)
            opts.append(o)
            optima[k].append(o)
        profile_avg = [np.mean(np.asarray(lrn.path[1:]), axis=0) for lrn in learners]
        summaries.append(
            {
                "task": t,
                "eta": task_eta,
                "regret_sum": float(np.sum(regs)),
                "regrets": regs,
                "negap_avg": float(np.max(ne_gap(game, profile_avg))),
                "social_welfare_avg": _mean_welfare(game, learners),
            }
        )
        initializer.observe(
            TaskOutcome(optima=opts, last_iterates=[lrn.path[-1] for lrn in learners])
        )
        if ewoo_state is not None:
            breg = 0.5 * float(
                sum(np.sum((o - lrn.init) ** 2) for o, lrn in zip(opts, learners))
            )
            ewoo_state.record(breg, 1.0)
    sim = SimilarityStats(v_opt2=np.asarray([anchor_variance(a) for a in optima]))
    return ExperimentResult(cfg, records, summaries, sim, games)


def _mean_welfare(game, learners):
    profiles = list(zip(*[lrn.path[1:] for lrn in learners]))
    total = 0.0
    for profile in profiles:
        for k in range(game.n):
            total += float(utility_gradient(game, k, list(profile)) @ profile[k])
    return total / len(profiles)


def _run_potential_experiment(cfg, games):
    sets = games[0].sets
    n = games[0].n
    if cfg.eta_mode != "fixed":
        raise ConfigError(
            f"learner.eta_mode: {cfg.eta_mode!r} needs an RVU learner; "
            "potential-game runs use plain gradient ascent (fixed rate only)"
        )
    initializer = Initializer(cfg.init_mode, sets)
    summaries = []
    for t, game in enumerate(games):
        inits = initializer.initialization()
        task_eta = (
            _default_eta(game.base, n) if cfg.eta == "auto" else float(cfg.eta)
        )
        learners = [GDLearner(sets[k], task_eta, init=inits[k]) for k in range(n)]
        for _ in range(cfg.m):
            profile = [lrn.play() for lrn in learners]
            utilities = [utility_gradient(game, k, profile) for k in range(n)]
            for lrn, u in zip(learners, utilities):
                lrn.update(u)
        paths = [np.asarray(lrn.path) for lrn in learners]
        joint_path2 = float(sum(np.sum(np.diff(p, axis=0) ** 2) for p in paths))
        phi_start = game.potential([p[0] for p in paths])
        phi_end = game.potential([p[-1] for p in paths])
        summaries.append(
            {
                "task": t,
                "eta": task_eta,
                "pathlen2": joint_path2,
                "phi_gain": phi_end - phi_start,
                "negap_last": float(np.max(ne_gap(game.base, [p[-1] for p in paths]))),
            }
        )
        initializer.observe(
            TaskOutcome(
                optima=[p[-1] for p in paths], last_iterates=[p[-1] for p in paths]
            )
        )
    return ExperimentResult(cfg, [], summaries, SimilarityStats(), games)


def write_records_csv(path, records, dump_strategies=False):
    """Write per-iteration records with the stable versioned header."""
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    Path(path).write_text("\n".join(lines) + "\n")
    if dump_strategies:
        sidecar = {
            f"{r.task}:{r.iter}:{r.player}": list(map(float, r.strategy))
            for r in records
            if r.strategy is not None
        }
        Path(str(path) + ".strategies.json").write_text(json.dumps(sidecar, sort_keys=True))


def write_task_summaries(path, summaries):
    keys = sorted({k for row in summaries for k in row})
    lines = [",".join(keys)]
    for row in summaries:
        lines.append(",".join(_fmt(row.get(k)) for k in keys))
    Path(path).write_text("\n".join(lines) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, (list, tuple)):
        return '"' + json.dumps(v, separators=(";", ":")) + '"'
    return str(v)


def thread_cap():
    """Parallelism cap from METAGAMES_THREADS (default: cpu count, min 1)."""
    raw = os.environ.get("METAGAMES_THREADS")
    if raw is None:
        return max(os.cpu_count() or 1, 1)
    try:
        return max(int(raw), 1)
    except ValueError as exc:
        raise ConfigError(f"METAGAMES_THREADS: not an integer: {raw!r}") from exc


def compare_arms(config):
    """Run >= 2 arms sharing the game sequence and seed; tabulate ratios.

    Each arm is a dict of config overrides with a 'name'. Returns (results
    by arm, table) where the table holds task-averaged duality gaps at the
    checkpoints plus ratios against the first arm.
    """
    base = dict(config)
    arms = base.pop("arms", None)
    if not arms or len(arms) < 2:
        raise ConfigError("config.arms: need at least two arms")
    checkpoints = base.pop("checkpoints", None)
    names = []
    configs = []
    for i, arm in enumerate(arms):
        arm = dict(arm)
        name = arm.pop("name", f"arm{i}")
        merged = json.loads(json.dumps({k: v for k, v in base.items() if k != "arms"}, default=_json_default))
        _deep_update(merged, arm)
        names.append(name)
        configs.append(merged)

    with ThreadPoolExecutor(max_workers=min(thread_cap(), len(configs))) as pool:
        results = list(pool.map(run_experiment, configs))

    T = results[0].config.T
    if checkpoints is None:
        checkpoints = [T]
    gap_key = "dualgap_avg" if "dualgap_avg" in results[0].task_summaries[0] else "negap_avg"
    table = {"arms": names, "checkpoints": checkpoints, "metric": gap_key, "rows": []}
    for cp in checkpoints:
        gaps = [float(np.mean(res.task_column(gap_key)[:cp])) for res in results]
        ratios = [g / gaps[0] if gaps[0] != 0 else float("inf") for g in gaps]
        table["rows"].append({"checkpoint": cp, "gaps": gaps, "ratios": ratios})
    return dict(zip(names, results)), table


def _json_default(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serializable: {type(v)}")


def _deep_update(dst, src):
    for k, v in src.items():
        if isinstance(v, dict) and isinstance(dst.get(k), dict):
            _deep_update(dst[k], v)
        else:
            dst[k] = v


def emit_plot(series, spec=None, out=None):
    """Render line series to a deterministic standalone SVG.

    ``series`` is a list of {'label', 'xs', 'ys'} dicts; ``spec`` may set
    title/xlabel/ylabel/logy. Returns the SVG text (and writes it when
    ``out`` is given).
    """
    spec = dict(spec or {})
    if not series:
        raise ConfigError("emit_plot: empty series list")
    width, height = 640, 420
    ml, mr, mt, mb = 60, 150, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    logy = bool(spec.get("logy", False))

    xs_all = np.concatenate([np.asarray(s["xs"], dtype=float) for s in series])
    ys_all = np.concatenate([np.asarray(s["ys"], dtype=float) for s in series])
    if logy:
        ys_all = np.log10(np.maximum(ys_all, 1e-300))
    x_lo, x_hi = float(np.min(xs_all)), float(np.max(xs_all))
    y_lo, y_hi = float(np.min(ys_all)), float(np.max(ys_all))
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        pad = 0.05 * max(abs(y_lo), 1.0)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = 0.05 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

    def to_px(x, y):
        if logy:
            y = np.log10(max(y, 1e-300))
        px = ml + (x - x_lo) / (x_hi - x_lo) * pw
        py = mt + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph
        return px, py

    colors = ["#1f77b4", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    if "title" in spec:
        parts.append(
            f'<text x="{ml + pw / 2:.1f}" y="{mt - 10}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{spec["title"]}</text>'
        )
    for label, x_ax in ((spec.get("xlabel"), True), (spec.get("ylabel"), False)):
        if not label:
            continue
        if x_ax:
            parts.append(
                f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="12">{label}</text>'
            )
        else:
            parts.append(
                f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="12" '
                f'transform="rotate(-90 15 {mt + ph / 2:.1f})">{label}</text>'
            )
    # Axis ticks: 5 per axis.
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        px = ml + frac * pw
        py = mt + (1.0 - frac) * ph
        y_label = f"1e{yv:.2f}" if logy else f"{yv:.3g}"
        parts.append(
            f'<text x="{px:.1f}" y="{height - mb + 15}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{xv:.3g}</text>'
        )
        parts.append(
            f'<text x="{ml - 5}" y="{py + 3:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{y_label}</text>'
        )
    for idx, s in enumerate(series):
        color = colors[idx % len(colors)]
        pts = " ".join(
            f"{to_px(float(x), float(y))[0]:.2f},{to_px(float(x), float(y))[1]:.2f}"
            for x, y in zip(s["xs"], s["ys"])
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = mt + 16 * idx + 10
        parts.append(
            f'<line x1="{ml + pw + 8}" y1="{ly}" x2="{ml + pw + 28}" y2="{ly}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{ml + pw + 33}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="11">{s.get("label", f"series{idx}")}</text>'
        )
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if out is not None:
        Path(out).write_text(text)
    return text
