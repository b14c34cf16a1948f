"""Command line: ``timedelay run <config>`` and ``timedelay validate <config>``.

Exit codes: 0 success, 1 the run completed but a check failed, 2 invalid
configuration (the message names the field), 3 numerical non-convergence
(the message names the stage).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from . import config as C
from .exceptions import (BoxOverflowError, ConfigError, ContractError, ConvergenceError,
                         NearEigenvalueError, SingularSymbolError)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3
CSV_VERSION = 1
SUMMARY_VERSION = 1


def _clean(v):
    """JSON-safe plain Python value; non-finite floats become ``None``."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if math.isfinite(v) else "nan"
    return str(v)


def write_csv(path, result, cfg_hash):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# timedelay-csv v{CSV_VERSION} experiment={result.experiment} "
                 f"config={cfg_hash[:16]}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(result.columns)
        for row in result.rows:
            w.writerow([_cell(v) for v in row])


def write_svg(path, plot):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, x, y, style in plot.series:
        ax.plot(x, y, style, label=label, ms=4)
    for label, y in plot.hlines:
        ax.axhline(y, color="k", lw=0.8, ls="--", label=label)
    if plot.logx:
        ax.set_xscale("log")
    if plot.logy:
        ax.set_yscale("log")
    ax.set_xlabel(plot.xlabel)
    ax.set_ylabel(plot.ylabel)
    ax.set_title(plot.title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def build_summary(cfg, result, artifacts, status, stage=None, message=""):
    return _clean({
        "schema_version": SUMMARY_VERSION,
        "package_version": __version__,
        "experiment": cfg["experiment"],
        "config_hash": C.config_hash(cfg),
        "seed": cfg["seed"],
        "status": status,
        "stage": stage,
        "message": message,
        "passed": bool(result.passed) if result is not None else False,
        "checks": [] if result is None else [
            {"name": c.name, "measured": c.measured, "tolerance": c.tolerance,
             "relation": c.relation, "passed": c.passed} for c in result.checks],
        "results": {} if result is None else result.results,
        "artifacts": artifacts,
    })


def _prepare(path, seed, out_dir=None):
    cfg = C.normalize(C.load(path), seed=seed)
    if out_dir is not None:
        cfg["output"]["dir"] = out_dir
    notes = C.cross_check(cfg)
    return cfg, notes


def cmd_validate(args):
    try:
        cfg, notes = _prepare(args.config, args.seed, args.out_dir)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(C.dump(cfg))
    for n in notes:
        print(f"# {n}")
    print("ok")
    return EXIT_OK


def cmd_run(args):
    from .experiments import run_experiment

    try:
        cfg, _ = _prepare(args.config, args.seed, args.out_dir)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = cfg["output"]
    os.makedirs(out["dir"], exist_ok=True)
    stem = os.path.join(out["dir"], out["prefix"])
    threads = max(1, args.threads)
    result, stage, message = None, None, ""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            result = run_experiment(cfg, threads=threads)
        stage, message = result.failure_stage, result.failure_message
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as e:
        stage, message = e.stage, str(e)
    except BoxOverflowError as e:
        stage, message = "box", str(e)
    except NearEigenvalueError as e:
        stage, message = "eigenvalue", str(e)
    except SingularSymbolError as e:
        stage, message = "symbol", str(e)
    except ContractError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    artifacts = []
    if result is not None:
        write_csv(stem + ".csv", result, C.config_hash(cfg))
        artifacts.append(out["prefix"] + ".csv")
        if result.plot is not None:
            write_svg(stem + ".svg", result.plot)
            artifacts.append(out["prefix"] + ".svg")
    artifacts.append(out["prefix"] + ".json")
    status = "not_converged" if stage else ("passed" if result.passed else "failed")
    summary = build_summary(cfg, result, artifacts, status, stage, message)
    with open(stem + ".json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if result is not None:
        for c in result.checks:
            tag = "PASS" if c.passed else "FAIL"
            print(f"{tag}  {c.name}: {_cell(c.measured)} {c.relation} {_cell(c.tolerance)}")
    if stage:
        print(f"error: non-convergence in stage '{stage}': {message}", file=sys.stderr)
        return EXIT_CONVERGENCE
    print(f"{status}; wrote {', '.join(artifacts)} to {out['dir']}")
    return EXIT_OK if result.passed else EXIT_FAILED


def build_parser():
    p = argparse.ArgumentParser(prog="timedelay", description="Sojourn time and time delay experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None, help="directory for CSV, JSON and SVG output")
    common.add_argument("--threads", type=int, default=1, help="worker threads for independent evaluations")
    common.add_argument("--seed", type=int, default=None, help="override the configured seed")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run an experiment")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("validate", parents=[common], help="check a configuration and print it normalized")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
