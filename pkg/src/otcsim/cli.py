"""Batch front-end: run experiment manifests, emit CSV tables and plots.

A manifest is a JSON document:

    {
      "schema_version": 1,
      "seed": 123,
      "engine": "gaussian",            // gaussian | fock | both
      "experiments": [
        {"id": "single_pass", "params": {"alpha": [1.0, 0.0], "r": 1.0}},
        {"id": "iterated_violation", "params": {"r": 2.0, "iterations": 8}}
      ]
    }

Each run writes ``NNN_<id>_<engine>.csv`` plus a ``summary.json`` recording
parameters, tolerances and the pass/fail of every built-in check.  Results
are reproducible byte for byte for a fixed manifest and seed: every run gets
its own seed derived from the global seed, the experiment id and its
position.  Exit codes: 0 ok, 1 a built-in check failed, 2 usage/parse error,
3 engine error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys

from .experiments import EXPERIMENTS
from .fock import TruncationError

MANIFEST_SCHEMA_VERSION = 1
WORKERS_ENV_VAR = "OTCSIM_WORKERS"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_ENGINE = 3


class ManifestError(ValueError):
    pass


def derive_seed(global_seed: int, experiment_id: str, index: int) -> int:
    """Stable per-run seed from the global seed, experiment id and position."""
    digest = hashlib.sha256(("%d:%s:%d" % (global_seed, experiment_id, index)).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _coerce_params(experiment_id: str, params: dict) -> dict:
    if experiment_id not in EXPERIMENTS:
        raise ManifestError("unknown experiment %r" % (experiment_id,))
    out = {}
    for key, value in (params or {}).items():
        if key in ("alpha", "candidate_b") and isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ManifestError("%s must be a number or [re, im]" % key)
            out[key] = complex(value[0], value[1])
        elif key in ("iterations", "shots", "cutoff"):
            out[key] = int(value)
        elif key in ("xis", "delta_ts"):
            out[key] = [float(v) for v in value]
        elif key in ("r", "sigma"):
            out[key] = float(value)
        elif key == "alpha":
            out[key] = complex(value)
        else:
            raise ManifestError("unknown parameter %r for %s" % (key, experiment_id))
    return out


def load_manifest(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ManifestError("cannot read manifest: %s" % err)
    except json.JSONDecodeError as err:
        raise ManifestError("manifest is not valid JSON: %s" % err)
    if not isinstance(doc, dict) or doc.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise ManifestError("manifest schema_version must be %d" % MANIFEST_SCHEMA_VERSION)
    entries = doc.get("experiments", [])
    if not isinstance(entries, list):
        raise ManifestError("experiments must be a list")
    for entry in entries:
        if not isinstance(entry, dict) or "id" not in entry:
            raise ManifestError("each experiment entry needs an id")
        _coerce_params(entry["id"], entry.get("params", {}))
        if entry.get("engine") not in (None, "gaussian", "fock", "both"):
            raise ManifestError("engine must be gaussian, fock or both")
    return doc


def _expand_runs(doc: dict, engine_override=None):
    """One (index, id, engine, params) tuple per engine per entry."""
    default_engine = engine_override or doc.get("engine", "gaussian")
    runs = []
    for index, entry in enumerate(doc.get("experiments", [])):
        engine = engine_override or entry.get("engine") or default_engine
        engines = ("gaussian", "fock") if engine == "both" else (engine,)
        for eng in engines:
            runs.append((index, entry["id"], eng, entry.get("params", {})))
    return runs


def _execute_run(index, experiment_id, engine, raw_params, global_seed):
    params = _coerce_params(experiment_id, raw_params)
    entry = EXPERIMENTS[experiment_id]
    seed = derive_seed(global_seed, experiment_id, index)
    if entry["uses_seed"]:
        params.setdefault("seed", seed)
    return entry["fn"](engine=engine, **params)


def _plot(table, path):
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "otcsim"
    import matplotlib.pyplot as plt

    axes_by_name = {
        "iterated_violation": ("iterations", ["var_x_a", "closed_form"], "variance"),
        "xi_sweep": ("xi", ["var_x"], "variance"),
        "overlap_experiment": ("delta_t", ["xi", "var_x"], "value"),
    }
    if table.name not in axes_by_name:
        return None
    x_col, y_cols, y_label = axes_by_name[table.name]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for y in y_cols:
        ax.plot(table.column(x_col), table.column(y), marker="o", label=y)
    ax.set_xlabel(x_col)
    ax.set_ylabel(y_label)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def run_manifest(manifest_path, out_dir=None, engine=None, seed=None, workers=None, plots=False):
    """Execute every run in a manifest; returns (exit_code, summary dict)."""
    doc = load_manifest(manifest_path)
    out_dir = out_dir or doc.get("out_dir") or "otcsim-results"
    global_seed = int(seed if seed is not None else doc.get("seed", 0))
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    runs = _expand_runs(doc, engine_override=engine)
    os.makedirs(out_dir, exist_ok=True)

    tables = [None] * len(runs)
    if workers > 1 and len(runs) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_execute_run, idx, exp_id, eng, params, global_seed): pos
                for pos, (idx, exp_id, eng, params) in enumerate(runs)
            }
            for future in concurrent.futures.as_completed(futures):
                tables[futures[future]] = future.result()
    else:
        for pos, (idx, exp_id, eng, params) in enumerate(runs):
            tables[pos] = _execute_run(idx, exp_id, eng, params, global_seed)

    summary_runs = []
    all_passed = True
    for pos, ((index, exp_id, eng, _), table) in enumerate(zip(runs, tables)):
        stem = "%03d_%s_%s" % (index, exp_id, eng)
        csv_path = os.path.join(out_dir, stem + ".csv")
        table.write_csv(csv_path)
        record = {
            "index": index,
            "id": exp_id,
            "engine": eng,
            "seed": derive_seed(global_seed, exp_id, index) if EXPERIMENTS[exp_id]["uses_seed"] else None,
            "params": table.metadata.get("params", {}),
            "checks": table.metadata.get("checks", {}),
            "passed": table.all_passed(),
            "csv": stem + ".csv",
        }
        if plots:
            svg = _plot(table, os.path.join(out_dir, stem + ".svg"))
            if svg:
                record["plot"] = stem + ".svg"
        all_passed = all_passed and table.all_passed()
        summary_runs.append(record)

    summary = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "seed": global_seed,
        "engine": engine or doc.get("engine", "gaussian"),
        "num_runs": len(summary_runs),
        "all_passed": all_passed,
        "runs": summary_runs,
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return (EXIT_OK if all_passed else EXIT_CHECK_FAILED), summary


def list_experiments(as_json=False) -> str:
    """Human- or machine-readable catalogue of runnable experiments."""
    if as_json:
        doc = {
            name: {"params": entry["params"], "claim": entry["claim"], "uses_seed": entry["uses_seed"]}
            for name, entry in EXPERIMENTS.items()
        }
        return json.dumps(doc, indent=2, sort_keys=True)
    lines = []
    for name, entry in EXPERIMENTS.items():
        lines.append(name)
        lines.append("  reproduces: %s" % entry["claim"])
        for pname, desc in entry["params"].items():
            lines.append("  param %-12s %s" % (pname, desc))
    return "\n".join(lines)


def _error_record(kind, message):
    return json.dumps({"error": kind, "message": str(message)}, sort_keys=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="otcsim", description="run timelike-curve circuit experiments")
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="execute a JSON manifest")
    run_p.add_argument("manifest")
    run_p.add_argument("--engine", choices=["gaussian", "fock", "both"], default=None)
    run_p.add_argument("--out-dir", default=None)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--workers", type=int, default=None,
                       help="parallel runs (default: $%s or 1)" % WORKERS_ENV_VAR)
    run_p.add_argument("--plots", action="store_true", help="also write SVG line plots")

    list_p = sub.add_parser("list", help="list available experiments")
    list_p.add_argument("--json", action="store_true", dest="as_json")

    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else EXIT_OK

    if args.command == "list":
        print(list_experiments(as_json=args.as_json))
        return EXIT_OK
    if args.command != "run":
        parser.print_help()
        return EXIT_USAGE

    try:
        code, summary = run_manifest(
            args.manifest,
            out_dir=args.out_dir,
            engine=args.engine,
            seed=args.seed,
            workers=args.workers,
            plots=args.plots,
        )
    except ManifestError as err:
        print(_error_record("manifest", err), file=sys.stderr)
        return EXIT_USAGE
    except (TruncationError, RuntimeError, FloatingPointError) as err:
        print(_error_record("engine", err), file=sys.stderr)
        return EXIT_ENGINE
    except ValueError as err:
        print(_error_record("parameters", err), file=sys.stderr)
        return EXIT_USAGE
    print("ran %d experiment(s); checks %s" % (summary["num_runs"], "passed" if summary["all_passed"] else "FAILED"))
    return code


if __name__ == "__main__":
    sys.exit(main())
