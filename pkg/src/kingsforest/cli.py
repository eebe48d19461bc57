"""Command-line interface: run, simulate, bench, and report subcommands."""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import json

from . import __version__, reports
from .bench import DCSIS, IKF, Scenario, run_experiment
from .data import CLASSIFICATION, REGRESSION, DataError, load_csv, save_csv, SeedContext
from .forest import TreeParams
from .ikf import IkfParams, run_ikf
from .kings import KingParams, rank_variables
from .parallel import Workers
from .pvim import PvimParams
from .bench import generate


class ConfigError(Exception):
    """Invalid configuration key, value, or combination."""


# Canonical configuration keys. Each key has exactly one name, used both in
# config files (key = value lines) and as a --flag. Flag values override
# file values, which override defaults.
CONFIG_KEYS = {
    "seed": (0, int, "master seed for all random streams"),
    "threads": (1, int, "worker processes (affects speed only, never results)"),
    "task": (REGRESSION, ("choice", (REGRESSION, CLASSIFICATION)), "prediction task"),
    "response": ("y", str, "response column name or index in the input CSV"),
    "trees": (100, int, "forest size N"),
    "depth": ("auto", ("autoint", 1), "maximum tree depth D (auto: 4, or 5 for b-scenarios)"),
    "iterations": (7, int, "weight-update iterations per King"),
    "candidates": ("auto", ("autoint", 1), "candidate pool size (auto: n/(2 ln n); halfp: p/2)"),
    "shortlist": (20, int, "length of each ranked path list"),
    "mtry": ("auto", ("autoint", 1), "candidate draws per node (auto: ceil(sqrt(pool)))"),
    "min-leaf": (5, int, "minimum samples per leaf"),
    "bootstrap": (True, bool, "draw a bootstrap sample per tree"),
    "permutations": (1, int, "permutations averaged per importance evaluation"),
    "alpha": (0.5, float, "fraction of variables dropped per iteration"),
    "survivors": ("auto", ("autoint", 1), "stop when this many variables survive (auto: max(10, 2% of p))"),
    "max-kings": ("none", ("autoint", 1), "hard cap on the number of Kings (none: no cap)"),
    "first-king": ("auto", str, "auto, random, or a variable name/index"),
    "tau-main": ("auto", ("autofloat", 0.0), "main-effect threshold (auto: relative)"),
    "tau-dir": (1e-6, float, "direction-importance threshold"),
    "order-tau": ("auto", ("autofloat", 0.0), "order-inference threshold (auto: relative)"),
    "once-per-tree": (False, bool, "count a tree's PVIM once per path instead of per occurrence"),
    "restrict-survivors": (False, bool, "rank survivor cuts within the surviving set only"),
    "scenario": ("a1", ("choice", ("a1", "a2", "a3", "a4", "a5", "b1", "b2", "b3", "b4", "b5")), "simulated scenario id"),
    "n": (200, int, "simulated sample size"),
    "p": (500, int, "simulated variable count"),
    "scale": (2.0, float, "signal scale of the simulated response"),
    "replications": (100, int, "benchmark replications"),
    "method": (IKF, ("choice", (IKF, DCSIS)), "benchmark method"),
}

BIO_PROFILE = {
    "trees": 200,
    "depth": "5",
    "iterations": 6,
    "alpha": 0.2,
    "candidates": "halfp",
    "shortlist": 30,
}

# Execution details, excluded from report/manifest echoes so output files
# are byte-identical across worker counts and directories.
_UNECHOED = ("threads",)


def _coerce(key, raw):
    default, kind, _ = CONFIG_KEYS[key]
    if isinstance(raw, str):
        raw = raw.strip()
    if kind is int:
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if kind is float:
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if kind is bool:
        if isinstance(raw, bool):
            return raw
        if str(raw).lower() in ("1", "true", "yes", "on"):
            return True
        if str(raw).lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {raw!r}")
    if isinstance(kind, tuple) and kind[0] == "choice":
        value = str(raw).lower()
        if value not in kind[1]:
            raise ConfigError(f"{key}: must be one of {', '.join(kind[1])}")
        return value
    if isinstance(kind, tuple) and kind[0] in ("autoint", "autofloat"):
        value = str(raw).lower()
        if value in ("auto", "none", "halfp"):
            return value
        try:
            num = int(value) if kind[0] == "autoint" else float(value)
        except ValueError:
            raise ConfigError(f"{key}: expected auto or a number, got {raw!r}") from None
        if num < kind[1]:
            raise ConfigError(f"{key}: must be >= {kind[1]}")
        return str(num)
    return str(raw)


def parse_config_file(path) -> dict:
    """Flat `key = value` file; '#' starts a comment, unknown keys error."""
    if not os.path.exists(path):
        raise ConfigError(f"no such config file: {path}")
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(key, raw)
    return values


def resolve_config(args) -> dict:
    """Merge defaults, config file, profile preset, and flags (flags win)."""
    cfg = {key: default for key, (default, _, _) in CONFIG_KEYS.items()}
    if getattr(args, "bio_profile", False):
        cfg.update(BIO_PROFILE)
    if getattr(args, "config", None):
        cfg.update(parse_config_file(args.config))
    for key in CONFIG_KEYS:
        flag = key.replace("-", "_")
        value = getattr(args, flag, None)
        if value is not None:
            cfg[key] = _coerce(key, value)
    return cfg


def _auto(cfg, key):
    value = cfg[key]
    return value if isinstance(value, str) else str(value)


def resolve_depth(cfg, scenario_id=None) -> int:
    raw = _auto(cfg, "depth")
    if raw == "auto":
        if scenario_id is not None and scenario_id.startswith("b"):
            return 5
        return 4
    return int(raw)


def build_params(cfg, n, p, scenario_id=None) -> IkfParams:
    raw_cand = _auto(cfg, "candidates")
    if raw_cand == "auto":
        n_candidates = None
    elif raw_cand == "halfp":
        n_candidates = max(1, p // 2)
    else:
        n_candidates = int(raw_cand)
    raw_mtry = _auto(cfg, "mtry")
    raw_surv = _auto(cfg, "survivors")
    raw_kings = _auto(cfg, "max-kings")
    raw_tau_main = _auto(cfg, "tau-main")
    raw_order = _auto(cfg, "order-tau")
    tree = TreeParams(
        mtry=None if raw_mtry == "auto" else int(raw_mtry),
        min_leaf=cfg["min-leaf"],
        bootstrap=cfg["bootstrap"],
    )
    king = KingParams(
        n_trees=cfg["trees"],
        max_depth=resolve_depth(cfg, scenario_id),
        n_iter=cfg["iterations"],
        n_candidates=n_candidates,
        n_top=cfg["shortlist"],
        tree=tree,
        pvim=PvimParams(n_permutations=cfg["permutations"]),
        path_pvim_once_per_tree=cfg["once-per-tree"],
    )
    first = cfg["first-king"]
    if first not in ("auto", "random"):
        try:
            first = int(first)
        except ValueError:
            pass
    try:
        return IkfParams(
            alpha=cfg["alpha"],
            survivor_threshold=None if raw_surv == "auto" else int(raw_surv),
            max_kings=None if raw_kings == "none" else int(raw_kings),
            first_king=first,
            king=king,
            tau_main=None if raw_tau_main == "auto" else float(raw_tau_main),
            tau_dir=cfg["tau-dir"],
            order_tau=None if raw_order == "auto" else float(raw_order),
            restrict_survivors=cfg["restrict-survivors"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_echo(cfg) -> dict:
    return {k: cfg[k] for k in sorted(cfg) if k not in _UNECHOED}


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    data = load_csv(args.data, response=cfg["response"], task=cfg["task"])
    params = build_params(cfg, data.n_samples, data.n_vars)
    seeds = SeedContext(cfg["seed"])
    with Workers(cfg["threads"], payload=data) as workers:
        report = run_ikf(data, params, seeds, workers)
    doc = reports.ikf_report_dict(
        report, data.names, seed=cfg["seed"], params=config_echo(cfg)
    )
    written = reports.write_run_outputs(doc, args.out)
    ranking = rank_variables(report.W)
    print("kings:", ", ".join(data.names[r.king] for r in report.kings))
    print("top 10 by weight:", ", ".join(data.names[int(v)] for v in ranking[:10]))
    if report.typed_interactions:
        print("typed interactions:")
        for t in report.typed_interactions[:10]:
            label = "*".join(data.names[v] for v in t.vars)
            extra = ""
            if t.dominant:
                extra = " dominant=" + ">".join(data.names[v] for v in t.dominant)
            if t.low_confidence:
                extra += " (low confidence)"
            print(f"  {label}: {t.kind}{extra}")
    for path in written:
        print("wrote", path)
    return 0


def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    scenario = Scenario(cfg["scenario"], n=cfg["n"], p=cfg["p"], s=cfg["scale"])
    data = generate(scenario, cfg["seed"])
    out = args.out
    directory = os.path.dirname(os.path.abspath(out))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    os.close(fd)
    try:
        save_csv(data, tmp, response_name="y")
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    print(f"wrote {out} ({scenario.n} rows, {scenario.p + 1} columns)")
    return 0


def cmd_bench(args) -> int:
    cfg = resolve_config(args)
    scenario = Scenario(cfg["scenario"], n=cfg["n"], p=cfg["p"], s=cfg["scale"])
    params = build_params(cfg, scenario.n, scenario.p, scenario_id=scenario.id)
    result = run_experiment(
        scenario,
        cfg["method"],
        params,
        replications=cfg["replications"],
        seed=cfg["seed"],
        workers=cfg["threads"],
    )
    written = reports.write_bench_outputs(result, config_echo(cfg), args.out)
    q = result.mrs_quantiles
    print(
        f"{scenario.id} {cfg['method']} MRS quantiles "
        f"5%={q[5]} 25%={q[25]} 50%={q[50]} 75%={q[75]} 95%={q[95]}"
    )
    if result.orr_rate is not None:
        print(f"ORR = {result.orr_rate}")
    for path in written:
        print("wrote", path)
    return 0


def cmd_report(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        doc = json.load(fh)
    os.makedirs(args.out, exist_ok=True)
    for fname, render in reports.REPORT_TABLES.items():
        path = os.path.join(args.out, fname)
        reports.write_atomic(path, render(doc))
        print("wrote", path)
    return 0


def _add_config_flags(parser, keys=None):
    for key, (default, kind, help_text) in CONFIG_KEYS.items():
        if keys is not None and key not in keys:
            continue
        parser.add_argument(
            f"--{key}",
            dest=key.replace("-", "_"),
            default=None,
            metavar="V",
            help=f"{help_text} (default: {default})",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kingsforest",
        description="Variable selection and interaction discovery with King-rooted forests.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline on a CSV dataset")
    run.add_argument("data", help="input CSV with a header row")
    run.add_argument("--out", default=os.environ.get("KINGSFOREST_OUT", "kingsforest_out"),
                     help="output directory (env KINGSFOREST_OUT)")
    run.add_argument("--config", help="flat key = value configuration file")
    run.add_argument("--bio-profile", action="store_true",
                     help="preset for wide binary screens: 200 trees, depth 5, 6 iterations, alpha 0.2, pool p/2, shortlists of 30")
    _add_config_flags(run)
    run.set_defaults(func=cmd_run)

    sim = sub.add_parser("simulate", help="write a simulated scenario dataset as CSV")
    sim.add_argument("--out", required=True, help="output CSV path")
    _add_config_flags(sim, keys=("scenario", "n", "p", "scale", "seed"))
    sim.set_defaults(func=cmd_simulate)

    bench = sub.add_parser("bench", help="replicate a scenario and report recovery metrics")
    bench.add_argument("--out", default=os.environ.get("KINGSFOREST_OUT", "kingsforest_bench"),
                       help="output directory (env KINGSFOREST_OUT)")
    bench.add_argument("--config", help="flat key = value configuration file")
    _add_config_flags(bench)
    bench.set_defaults(func=cmd_bench)

    rep = sub.add_parser("report", help="re-render the CSV tables from a report.json")
    rep.add_argument("report", help="path to a report.json")
    rep.add_argument("--out", default=".", help="output directory")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
