"""Pilot calibration runs behind the Monte Carlo acceptance gates.

Each suite config in ``configs/`` is rerun with seed 0 and 1000 trials per
cell; the variance trend is repeated over independent seeds to estimate how
often a strictly decreasing ratio is seen.  Results land in
``tests/data/pilot_ranges.json`` and the acceptance tests check their gates
against them.

    python scripts/pilot.py [--threads N] [--only name ...]
"""

from __future__ import annotations

import argparse
import json
import math
import os
import time

from flagbetti.experiments import ExperimentConfig, run

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
OUT = os.path.join(ROOT, "tests", "data", "pilot_ranges.json")
PILOT_SEED = 0
PILOT_TRIALS = 1000
VARIANCE_REPEATS = 20


def load(name, **override):
    with open(os.path.join(ROOT, "configs", f"{name}.json")) as fh:
        data = json.load(fh)
    data.update(seed=PILOT_SEED, trials=PILOT_TRIALS, expect=[])
    data.update(override)
    return ExperimentConfig.from_dict(data)


def cells(summary, keys):
    return [{k: c[k] for k in ["n", "param", "p", "trials"] + keys} for c in summary.cells]


def pilot_threshold(threads):
    s = run(load("threshold"), threads)
    return {"cells": cells(s, ["phat", "wilson_lo", "wilson_hi"]), "checks": s.checks}


def pilot_variance(threads):
    decreasing = 0
    within = 0
    first = None
    for rep in range(VARIANCE_REPEATS):
        s = run(load("variance", seed=PILOT_SEED + rep), threads)
        decreasing += bool(s.checks["ratio_decreasing"])
        within += bool(s.checks["all_within_4se"])
        if first is None:
            first = cells(s, ["mean", "se", "expected", "z", "ratio", "ratio_se"])
    return {
        "cells_seed0": first,
        "repeats": VARIANCE_REPEATS,
        "ratio_decreasing_frac": decreasing / VARIANCE_REPEATS,
        "all_within_4se_frac": within / VARIANCE_REPEATS,
    }


def pilot_rows(threads):
    s = run(load("rows"), threads)
    return {"cells": cells(s, ["mean_rho_1", "se_rho_1", "mean_rho_2", "se_rho_2"]), "checks": s.checks}


def pilot_normal(threads):
    s = run(load("normal"), threads)
    curve = run(load("normal_curve"), threads)
    c = curve.cells[0]
    points = []
    for k, off in enumerate(c_offsets(curve)):
        points.append({
            "a": off,
            "mean_normalized": c[f"mean_normalized_{k}"],
            "target": math.exp(-off * off / 2),
            "mean_ratio_adjusted": c[f"mean_ratio_adjusted_{k}"],
        })
    return {
        "cells": cells(s, ["mean_ratio", "se_ratio", "mean_ratio_adjusted", "excluded_frac"]),
        "curve": points,
        "curve_max_deviation": max(abs(p["mean_normalized"] - p["target"]) for p in points),
    }


def c_offsets(summary):
    return summary.config["offsets"]


def pilot_figure(threads):
    s = run(load("figure"), threads)
    return {"cells": cells(s, ["unimodal_frac", "peak_centre_frac"])}


def pilot_regularity_cm(threads):
    s = run(load("regularity_cm"), threads)
    r = run(load("regularity"), threads)
    f = run(load("forest_cm"), threads)
    return {
        "cm": cells(s, ["cm_frac", "cm_lo", "cm_hi", "mean_codim_over_pdim", "se_codim_over_pdim"]),
        "reg": cells(r, ["reg_in_bounds_frac", "reg_lo", "reg_hi"]),
        "forest": cells(f, ["forest_trials", "forest_cm", "cm_frac"]),
    }


PILOTS = {
    "threshold": pilot_threshold,
    "variance": pilot_variance,
    "rows": pilot_rows,
    "normal": pilot_normal,
    "figure": pilot_figure,
    "regularity_cm": pilot_regularity_cm,
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--only", nargs="*")
    args = ap.parse_args()
    results = {}
    if os.path.exists(OUT):
        with open(OUT) as fh:
            results = json.load(fh)
    for name, fn in PILOTS.items():
        if args.only and name not in args.only:
            continue
        t = time.perf_counter()
        results[name] = fn(args.threads)
        results[name]["seed"] = PILOT_SEED
        results[name]["trials_per_cell"] = PILOT_TRIALS
        results[name]["wall_time"] = round(time.perf_counter() - t, 1)
        print(name, json.dumps(results[name], default=str)[:400], flush=True)
        with open(OUT, "w") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
            fh.write("\n")


if __name__ == "__main__":
    main()
