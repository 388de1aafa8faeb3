"""Command-line interface.

Subcommands: ``run`` (one experiment or arm comparison), ``sweep`` (grid of
config overrides), ``plot`` (records CSV to SVG), ``report`` (similarity
stats and bound-slack audit). Exit codes: 0 ok, 2 config error, 3 numeric
error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from metagames import harness
from metagames.errors import ConfigError, NumericError
from metagames.learners import rvu_terms

DEFAULT_REPORT_CONFIG = {
    "T": 20,
    "m": 100,
    "seed": 0,
    "game": {"family": "perturbed-base", "base": [[0.2, -0.6], [-0.6, 1.0]], "delta": 0.02},
    "init": "ftl-average",
    "learner": {"algo": "ogd", "eta": "auto"},
}


def _load_config(path, overrides):
    if path is None:
        raise ConfigError("missing --config")
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        node = obj
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = val
    return obj


def _cmd_run(args):
    obj = _load_config(args.config, {"seed": args.seed, "T": args.T, "m": args.m})
    if args.dump_strategies:
        obj["dump_strategies"] = True
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if obj.get("arms"):
        results, table = harness.compare_arms(obj)
        (out / "comparison.json").write_text(json.dumps(table, indent=2, sort_keys=True) + "\n")
        for name, res in results.items():
            harness.write_task_summaries(out / f"tasks_{name}.csv", res.task_summaries)
            if res.records:
                harness.write_records_csv(
                    out / f"records_{name}.csv", res.records, res.config.dump_strategies
                )
        for row in table["rows"]:
            gaps = ", ".join(f"{n}={g:.6g}" for n, g in zip(table["arms"], row["gaps"]))
            print(f"checkpoint {row['checkpoint']}: {gaps}")
        return 0
    res = harness.run_experiment(obj)
    harness.write_task_summaries(out / "tasks.csv", res.task_summaries)
    if res.records:
        harness.write_records_csv(out / "records.csv", res.records, res.config.dump_strategies)
    summary_keys = [k for k in ("dualgap_avg", "negap_avg", "regret_sum") if k in res.task_summaries[0]]
    means = {k: float(np.mean(res.task_column(k))) for k in summary_keys}
    (out / "summary.json").write_text(json.dumps(means, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}/tasks.csv ({len(res.task_summaries)} tasks); task means: {means}")
    return 0


def _cmd_sweep(args):
    obj = _load_config(args.config, {})
    try:
        grid = json.loads(Path(args.grid).read_text())
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad grid file: {exc}") from exc
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("grid file must map dotted config keys to value lists")
    keys = sorted(grid)
    combos = list(itertools.product(*[grid[k] for k in keys]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def one(combo):
        cfg = json.loads(json.dumps(obj))
        for k, v in zip(keys, combo):
            node = cfg
            parts = k.split(".")
            for p in parts[:-1]:
                node = node.setdefault(p, {})
            node[parts[-1]] = v
        return harness.run_experiment(cfg)

    with ThreadPoolExecutor(max_workers=min(harness.thread_cap(), len(combos))) as pool:
        results = list(pool.map(one, combos))
    rows = []
    for combo, res in zip(combos, results):
        key = "dualgap_avg" if "dualgap_avg" in res.task_summaries[0] else "negap_avg"
        rows.append(
            {
                "params": dict(zip(keys, combo)),
                "metric": key,
                "task_mean": float(np.mean(res.task_column(key))),
            }
        )
    (out / "sweep.json").write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    for row in rows:
        print(f"{row['params']} -> {row['metric']}={row['task_mean']:.6g}")
    return 0


def _cmd_plot(args):
    path = Path(args.records)
    if not path.exists():
        raise ConfigError(f"records file not found: {path}")
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    cols = {name: idx for idx, name in enumerate(header)}
    for needed in ("task", "player", "regret_cum"):
        if needed not in cols:
            raise ConfigError(f"records file lacks a {needed!r} column")
    series_map = {}
    for line in lines[1:]:
        f = line.split(",")
        player = f[cols["player"]]
        entry = series_map.setdefault(player, {"xs": [], "ys": []})
        entry["xs"].append(len(entry["xs"]))  # logged-step index per player
        entry["ys"].append(float(f[cols[args.column]]))
    series = [
        {"label": f"player {p}", "xs": s["xs"], "ys": s["ys"]}
        for p, s in sorted(series_map.items())
    ]
    harness.emit_plot(
        series,
        {"title": path.name, "xlabel": "logged step", "ylabel": args.column, "logy": args.logy},
        out=args.out,
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_report(args):
    obj = _load_config(args.config, {}) if args.config else json.loads(json.dumps(DEFAULT_REPORT_CONFIG))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = harness.run_experiment(obj)
    report = {
        "config": obj,
        "similarity": {
            "v_opt2": None
            if res.similarity.v_opt2 is None
            else [float(v) for v in res.similarity.v_opt2],
        },
        "tasks": len(res.task_summaries),
    }
    # Bound-slack audit on a fresh single task of the same family.
    from metagames.games import MatrixGame, lipschitz_constant
    from metagames.harness import make_learner, play_matrix_task
    from metagames.learners import external_regret

    games = res.games
    if isinstance(games[0], MatrixGame):
        game = games[0]
        L = lipschitz_constant(game)
        eta = 1.0 / (4.0 * L)
        xl = make_learner("ogd", game.sets[0], eta)
        yl = make_learner("ogd", game.sets[1], eta)
        play_matrix_task(game, xl, yl, obj.get("m", 100))
        audit = {}
        for name, lrn, sset in (("x", xl, game.sets[0]), ("y", yl, game.sets[1])):
            reg, opt = external_regret(np.asarray(lrn.path[1:]), lrn.utility_array(), sset)
            breg, pred, path = rvu_terms(lrn, opt)
            rhs = breg / eta + eta * pred - path / (8.0 * eta)
            audit[name] = {"regret": reg, "rvu_rhs": rhs, "rvu_slack": rhs - reg}
        report["rvu_audit"] = audit
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}/report.json")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="metagames")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment or an arm comparison")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--T", type=int, default=None)
    p_run.add_argument("--m", type=int, default=None)
    p_run.add_argument("--dump-strategies", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a config grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--grid", required=True)
    p_sweep.add_argument("--out", default="sweep_out")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_plot = sub.add_parser("plot", help="plot a records CSV")
    p_plot.add_argument("records")
    p_plot.add_argument("-o", "--out", required=True)
    p_plot.add_argument("--column", default="regret_cum")
    p_plot.add_argument("--logy", action="store_true")
    p_plot.set_defaults(func=_cmd_plot)

    p_report = sub.add_parser("report", help="similarity stats and bound-slack audit")
    p_report.add_argument("--out", required=True)
    p_report.add_argument("--config", default=None)
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
