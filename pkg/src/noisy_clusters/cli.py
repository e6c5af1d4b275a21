"""Command line: ``noisy-clusters {recover,features,cv,bias}``.

Exit codes: 0 success, 1 I/O failure (missing or unreadable input), 2 bad
configuration or usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .datasets import resolve_dataset
from .features import default_jobs, feature_matrix, write_feature_csv
from .graph import ParseError, load_snap_edgelist, random_truth
from .learn import SCHEMA_VERSION, FeatureCache, FeatureMask, cross_validate
from .oracle import NoisyOracle, OracleConfig
from .paths import PathConfig, exact_majority_bias, majority_bias_curve, recover_paths
from .pythia import PythiaConfig, recover_pythia

EXIT_OK, EXIT_IO, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def parse_seeds(text: str) -> list[int]:
    """``"1,2,5..8"`` -> ``[1, 2, 5, 6, 7, 8]`` (ranges inclusive)."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = (int(x) for x in part.split("..", 1))
                if hi < lo:
                    raise ConfigError(f"empty seed range {part!r}")
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise ConfigError(f"bad seed {part!r}") from None
    if not seeds:
        raise ConfigError("no seeds given")
    return seeds


def parse_counts(text: str) -> list[int]:
    try:
        counts = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad count list {text!r}") from None
    if not counts:
        raise ConfigError("no counts given")
    for m in counts:
        if m < 1 or m % 2 == 0:
            raise ConfigError(f"counts must be odd positive integers, got {m}")
    return counts


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", newline="")


def _emit_json(obj, path) -> None:
    fh = _open_out(path)
    try:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


# --- recover -----------------------------------------------------------------

def _path_config(n, delta, args) -> PathConfig:
    cfg = PathConfig.desk_scale(n, delta, p=args.p if args.p is not None else 0.9,
                                tree_depth=args.tree_depth if args.tree_depth is not None else 1,
                                deep_depth=args.deep_depth if args.deep_depth is not None else 1,
                                deep_branching=args.deep_branching or 2)
    if args.branching is not None:
        cfg = PathConfig.from_formula(n, delta, p=cfg.p, branching=args.branching,
                                      tree_depth=cfg.tree_depth, deep_depth=cfg.deep_depth,
                                      deep_branching=cfg.deep_branching)
    return cfg


def run_trial(algo: str, n: int, q: float, seed: int, options: dict) -> dict:
    """One recovery trial on a fresh random coloring; returns its report."""
    truth = random_truth(n, seed)
    oracle = NoisyOracle(truth, OracleConfig(q, seed, strict=False))
    if algo == "pythia":
        res = recover_pythia(oracle, n, options["pythia_config"])
        out = res.report(truth)
    else:
        res = recover_paths(oracle, n, options["path_config"])
        out = res.report(truth)
    out["seed"] = seed
    out["success"] = out["agreement"] == 1.0
    return out


def _run_trial_args(args):
    return run_trial(*args)


def cmd_recover(args) -> int:
    if not 0.0 <= args.q < 0.5:
        raise ConfigError(f"--q must satisfy 0 <= q < 1/2, got {args.q}")
    if args.n < 3:
        raise ConfigError("--n must be at least 3")
    seeds = parse_seeds(args.seeds)
    delta = 1.0 - 2.0 * args.q
    options: dict = {}
    config_out: dict = {"algo": args.algo, "n": args.n, "q": args.q, "seeds": seeds}
    if args.algo == "pythia":
        cfg = PythiaConfig.from_formula(args.n, delta)
        if args.size_a is not None or args.size_b is not None:
            cfg = PythiaConfig(args.size_a or cfg.size_a, args.size_b or cfg.size_b, flagged=True)
        try:
            cfg.validate(args.n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        options["pythia_config"] = cfg
        config_out.update(size_a=cfg.size_a, size_b=cfg.size_b, flagged=cfg.flagged)
    else:
        try:
            cfg = _path_config(args.n, delta, args)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        options["path_config"] = cfg
        config_out.update(p=cfg.p, branching=cfg.branching, tree_depth=cfg.tree_depth,
                          deep_depth=cfg.deep_depth, deep_branching=cfg.deep_branching,
                          notes=cfg.notes)

    jobs = args.jobs or default_jobs()
    work = [(args.algo, args.n, args.q, s, options) for s in seeds]
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            trials = list(pool.map(_run_trial_args, work))
    else:
        trials = [run_trial(*w) for w in work]
    trials.sort(key=lambda t: t["seed"])
    aggregate = {
        "trials": len(trials),
        "success_rate": float(np.mean([t["success"] for t in trials])),
        "mean_queries": float(np.mean([t["queries"] for t in trials])),
        "mean_agreement": float(np.mean([t["agreement"] for t in trials])),
    }
    if args.algo == "pythia":
        aggregate["bound_respected"] = all(t["queries"] <= t["query_bound"] for t in trials)
    else:
        aggregate["gadget_failures"] = int(sum(t["gadget_failures"] for t in trials))
    _emit_json({"schema_version": SCHEMA_VERSION, "command": "recover", "config": config_out,
                "trials": trials, "aggregate": aggregate}, args.out)
    return EXIT_OK


# --- features / cv -----------------------------------------------------------

def _load(dataset):
    path = resolve_dataset(dataset)
    graph, report = load_snap_edgelist(path)
    print(f"loaded {path}: {report.nodes} nodes, {report.edges} edges "
          f"({report.duplicates_dropped} duplicates, {report.self_loops_dropped} self-loops dropped)",
          file=sys.stderr)
    return graph, report


def cmd_features(args) -> int:
    graph, _ = _load(args.dataset)
    matrix = feature_matrix(graph, jobs=args.jobs or default_jobs(), progress=True)
    fh = _open_out(args.out)
    try:
        write_feature_csv(graph, matrix, graph.edges, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_cv(args) -> int:
    try:
        masks = [FeatureMask.parse(m) for m in args.mask.split(",")]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.emb_threshold < 0:
        raise ConfigError("--emb-threshold must be >= 0")
    if args.emb_max is not None and args.emb_max < args.emb_threshold:
        raise ConfigError("--emb-max must be >= --emb-threshold")
    seeds = parse_seeds(args.seed)
    graph, report = _load(args.dataset)
    cache = FeatureCache(graph, jobs=args.jobs or default_jobs())
    results = []
    for mask in masks:
        for seed in seeds:
            try:
                cv = cross_validate(graph, mask, args.emb_threshold, seed, emb_max=args.emb_max,
                                    folds=args.folds, cache=cache)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            results.append(cv)
            print(f"{mask.name} seed={seed}: mean accuracy {cv.mean_accuracy:.4f}",
                  file=sys.stderr)
    if args.coef_out:
        with open(args.coef_out, "w", newline="") as fh:
            for cv in results:
                fh.write(f"# mask={cv.mask} seed={cv.seed}\n")
                cv.write_coefficients_csv(fh)
    body = [cv.to_dict() for cv in results]
    _emit_json({"schema_version": SCHEMA_VERSION, "command": "cv", "dataset": str(args.dataset),
                "ingest": report.to_dict(), "reports": body if len(body) > 1 else body[0]},
               args.out)
    return EXIT_OK


# --- bias --------------------------------------------------------------------

def cmd_bias(args) -> int:
    if not 0.0 < args.delta <= 1.0:
        raise ConfigError(f"--delta must lie in (0, 1], got {args.delta}")
    if args.trials < 1:
        raise ConfigError("--trials must be positive")
    counts = parse_counts(args.counts)
    rows = majority_bias_curve(args.delta, counts, args.trials, args.seed)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "empirical_bias", "exact_bias"])
        for m, emp in rows:
            w.writerow([m, f"{emp:.6f}", f"{exact_majority_bias(args.delta, m):.6f}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# --- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noisy-clusters", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("recover", help="recover two planted clusters from noisy queries")
    rec.add_argument("--algo", choices=["pythia", "paths"], required=True)
    rec.add_argument("--n", type=int, required=True)
    rec.add_argument("--q", type=float, required=True, help="corruption probability, 0 <= q < 1/2")
    rec.add_argument("--seeds", default="0", help="comma list, ranges as a..b (inclusive)")
    rec.add_argument("--size-a", type=int)
    rec.add_argument("--size-b", type=int)
    rec.add_argument("--branching", type=int)
    rec.add_argument("--tree-depth", type=int)
    rec.add_argument("--deep-depth", type=int)
    rec.add_argument("--deep-branching", type=int)
    rec.add_argument("--p", type=float, help="query graph edge probability")
    rec.add_argument("--jobs", type=int)
    rec.add_argument("--out")
    rec.set_defaults(func=cmd_recover)

    feat = sub.add_parser("features", help="write the 27 per-edge features as CSV")
    feat.add_argument("--dataset", required=True, help="edge list path or known dataset name")
    feat.add_argument("--out")
    feat.add_argument("--jobs", type=int)
    feat.set_defaults(func=cmd_features)

    cv = sub.add_parser("cv", help="10-fold cross-validated sign prediction accuracy")
    cv.add_argument("--dataset", required=True)
    cv.add_argument("--mask", default="All", help="feature mask(s), comma separated")
    cv.add_argument("--emb-threshold", type=int, default=0)
    cv.add_argument("--emb-max", type=int, help="upper embeddedness bound (inclusive)")
    cv.add_argument("--seed", default="0")
    cv.add_argument("--folds", type=int, default=10)
    cv.add_argument("--coef-out", help="CSV file for per-fold coefficients")
    cv.add_argument("--jobs", type=int)
    cv.add_argument("--out")
    cv.set_defaults(func=cmd_cv)

    bias = sub.add_parser("bias", help="majority-vote bias curve")
    bias.add_argument("--delta", type=float, required=True)
    bias.add_argument("--counts", default="1,11,101,1001")
    bias.add_argument("--trials", type=int, default=100_000)
    bias.add_argument("--seed", type=int, default=0)
    bias.add_argument("--out")
    bias.set_defaults(func=cmd_bias)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
