"""Monte Carlo suites over ``G(n, p)`` with reproducible, coupled sampling.

Every trial is keyed by ``(cell, stream)``.  A stream draws one uniform per
vertex pair (see ``edge_uniforms``) and every probability in a suite
thresholds the same draws, so for a fixed stream the graphs are nested in
``p`` and in ``n``.  Records are merged in sorted key order, which makes the
output independent of the worker count.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from statistics import NormalDist
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._validation import CapacityError, ConfigError, ParameterError, check_prime
from .betti import BETTI_MAX_N, betti_table, first_row, first_row_profile, rho_k, ring_invariants
from .counts import DENSE_SUBGRAPH_MAX_V, connected_subsets, count_diamonds, expected_diamond_count
from .graph import Graph, bits, connected_components, cycle_census, edge_uniforms, graph_from_uniforms, induced_subgraph, popcount, two_core
from .homology import graph_homology

log = logging.getLogger(__name__)

KINDS = ("threshold", "rows", "normal", "variance", "regularity_cm")
P_FORMS = ("values", "power", "linear", "quadratic")
SUPERSET_SEARCH_LIMIT = 200_000
FALLBACK_LIMIT = 0.01


# --- configuration ----------------------------------------------------------


@dataclass
class ExperimentConfig:
    kind: str
    n_list: List[int]
    p_spec: Dict[str, List[float]]
    trials: int
    seed: int = 0
    field_char: int = 2
    s: Optional[int] = None
    i: Optional[int] = None
    v: Optional[int] = None
    k_max: int = 2
    r: int = 1
    c: Optional[float] = None
    i_policy: str = "half"
    offsets: List[float] = field(default_factory=lambda: [-2.0, -1.0, 0.0, 1.0, 2.0])
    profile: bool = False
    row: int = 1
    allow_large_p: bool = False
    expect: List[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not isinstance(self.n_list, list) or not self.n_list:
            raise ConfigError("n_list must be a nonempty list")
        for n in self.n_list:
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise ConfigError(f"n_list entries must be positive integers, got {n!r}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be an integer >= 1")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2**64)")
        try:
            check_prime(self.field_char)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
        if not isinstance(self.p_spec, dict) or len(self.p_spec) != 1:
            raise ConfigError(f"p_spec must have exactly one of the keys {P_FORMS}")
        form, params = next(iter(self.p_spec.items()))
        if form not in P_FORMS:
            raise ConfigError(f"unknown p_spec form {form!r}")
        if not isinstance(params, list) or not params:
            raise ConfigError("p_spec needs a nonempty list of parameters")
        for n in self.n_list:
            for a in params:
                p = derive_p(form, a, n)
                if not 0 <= p <= 1:
                    raise ConfigError(f"p={p} for n={n} lies outside [0, 1]")
                if p > 0.5 and not self.allow_large_p:
                    raise ConfigError(f"p={p:.4g} for n={n} exceeds 1/2; set allow_large_p to override")
        if self.i_policy not in ("half", "offset"):
            raise ConfigError("i_policy must be 'half' or 'offset'")
        if self.row not in (1, 2):
            raise ConfigError("row must be 1 or 2")
        if not isinstance(self.expect, list):
            raise ConfigError("expect must be a list of gates")
        self._check_kind()

    def _check_kind(self):
        form = self.form
        if self.kind == "threshold":
            if self.i is None or self.v is None:
                raise ConfigError("threshold needs i and v")
            s = self.v - self.i - 1
            if s < 1 or self.v > 2 * self.i:
                raise ConfigError("threshold needs v - i - 1 >= 1 and v <= 2i")
            if self.v > DENSE_SUBGRAPH_MAX_V:
                raise CapacityError(f"threshold detection needs v <= {DENSE_SUBGRAPH_MAX_V}")
        elif self.kind in ("rows", "regularity_cm"):
            if max(self.n_list) > BETTI_MAX_N:
                raise CapacityError(f"full Betti tables need n <= {BETTI_MAX_N}")
            if self.k_max < 1:
                raise ConfigError("k_max must be at least 1")
        elif self.kind == "normal":
            if form != "linear":
                raise ConfigError("normal needs p_spec of the form {'linear': [c, ...]}")
            if any(not 0 < c < 1 for c in self.params):
                raise ConfigError("normal needs 0 < c < 1")
            if self.row == 2 and max(self.n_list) > 20:
                raise CapacityError("second-row profiles need n <= 20")
        elif self.kind == "variance":
            if self.s is None or self.s < 1:
                raise ConfigError("variance needs s >= 1")

    @property
    def form(self) -> str:
        return next(iter(self.p_spec))

    @property
    def params(self) -> List[float]:
        return list(next(iter(self.p_spec.values())))

    def cells(self) -> List[Tuple[int, float, float]]:
        """``(n, parameter, p)`` for every cell, in config order."""
        return [(n, a, derive_p(self.form, a, n)) for n in self.n_list for a in self.params]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {unknown}")
        data = dict(data)
        if "c" in data and data["c"] is not None and "p_spec" not in data:
            data["p_spec"] = {"linear": [data["c"]]}
        missing = [k for k in ("kind", "n_list", "p_spec", "trials") if k not in data]
        if missing:
            raise ConfigError(f"missing config fields: {missing}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())


def derive_p(form: str, a: float, n: int) -> float:
    if isinstance(a, bool) or not isinstance(a, (int, float)) or not math.isfinite(a):
        raise ConfigError(f"p_spec parameters must be finite numbers, got {a!r}")
    if form == "values":
        return float(a)
    if form == "power":
        return float(n) ** (-a)
    if form == "linear":
        return a / n
    if form == "quadratic":
        return a / n**2
    raise ConfigError(f"unknown p_spec form {form!r}")


# --- statistics ------------------------------------------------------------


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    if trials <= 0:
        return (0.0, 1.0)
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return (lo, hi)


def _mean_se(values: Sequence[float]) -> Tuple[float, float]:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return (float("nan"), float("nan"))
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")
    return (float(x.mean()), se)


# --- threshold detection ---------------------------------------------------


def betti_nonzero(g: Graph, i: int, v: int, field_char: int = 2) -> bool:
    """Whether ``beta_{i,v}(S/I_Delta) != 0`` for ``s = v - i - 1 >= 1``.

    A subset ``K`` that is inclusion-minimal with ``H~_s(Delta|_K) != 0`` is
    connected and every vertex has at least ``2s`` neighbours in it, so the
    candidates are connected subsets of the ``2s``-core with ``2s+2 <= |K| <= v``.
    A candidate extends to a witness of size ``v`` when some ``u`` in ``K``
    has ``H~_s(Delta|_{K-u}) = 0`` and at least ``v - |K|`` non-neighbours
    outside ``K``: adding non-neighbours of ``u`` keeps the link of ``u`` and
    the class survives.  Anything left is settled by searching supersets.
    """
    s = v - i - 1
    if s < 1:
        raise ParameterError("detection needs v - i - 1 >= 1")
    if v > DENSE_SUBGRAPH_MAX_V:
        raise CapacityError(f"detection is limited to v <= {DENSE_SUBGRAPH_MAX_V}")
    if v > g.n:
        return False
    core = two_core(g, k=2 * s)
    if popcount(core) < 2 * s + 2:
        return False
    adj = g.adj
    full = g.vertex_mask

    def nonzero(mask):
        return graph_homology(induced_subgraph(g, mask), field_char)[s] != 0

    pending = []
    for k in connected_subsets(g, v, within=core):
        size = popcount(k)
        if size < 2 * s + 2:
            continue
        if any(popcount(adj[u] & k) < 2 * s for u in bits(k)):
            continue
        if not nonzero(k):
            continue
        if size == v:
            return True
        need = v - size
        for u in bits(k):
            if popcount(full & ~adj[u] & ~k & ~(1 << u)) >= need and not nonzero(k & ~(1 << u)):
                return True
        pending.append(k)
    for k in pending:
        outside = list(bits(full & ~k))
        need = v - popcount(k)
        if math.comb(len(outside), need) > SUPERSET_SEARCH_LIMIT:
            raise CapacityError("superset search for a size-v witness is too large")
        for extra in itertools.combinations(outside, need):
            if nonzero(k | sum(1 << x for x in extra)):
                return True
    return False


# --- per-trial work ----------------------------------------------------------


def _trial_records(cfg: ExperimentConfig, n: int, stream: int) -> List[dict]:
    """Records for every cell with this ``n`` on one shared uniform draw."""
    u = edge_uniforms(cfg.seed, stream, n)
    out = []
    for idx, (cn, a, p) in enumerate(cfg.cells()):
        if cn != n:
            continue
        g = graph_from_uniforms(u, n, p)
        rec = {"cell": idx, "n": n, "param": a, "p": p, "stream": stream}
        rec.update(_measure(cfg, g, n, a, p))
        out.append(rec)
    return out


def _measure(cfg: ExperimentConfig, g: Graph, n: int, a: float, p: float) -> dict:
    kind = cfg.kind
    if kind == "threshold":
        return {"nonzero": int(betti_nonzero(g, cfg.i, cfg.v, cfg.field_char))}
    if kind == "rows":
        t = betti_table(g, cfg.field_char)
        rec = {"pdim": t.pdim, "reg": t.reg}
        for k in range(1, cfg.k_max + 1):
            rec[f"rho_{k}"] = float(rho_k(t, k))
        return rec
    if kind == "variance":
        return {"x": count_diamonds(g, cfg.s)}
    if kind == "regularity_cm":
        t = betti_table(g, cfg.field_char)
        inv = ring_invariants(g, t)
        forest = g.edge_count == n - connected_components(g)[0]
        return {
            "pdim": inv.pdim,
            "reg": inv.reg,
            "codim": inv.codim,
            "krull_dim": inv.krull_dim,
            "is_cm": int(inv.is_cm),
            "is_forest": int(forest),
            "codim_over_pdim": inv.codim / inv.pdim if inv.pdim else 1.0,
            "reg_in_bounds": int(cfg.r + 1 <= inv.reg <= 2 * cfg.r),
        }
    if kind == "normal":
        return _measure_normal(cfg, g, n, a)
    raise ConfigError(f"unknown kind {kind!r}")


def normal_index(n: int, policy: str, offset: float = 0.0) -> int:
    if policy == "half":
        return n // 2
    return int(math.floor(n / 2 + offset * math.sqrt(n) / 2))


def _measure_normal(cfg: ExperimentConfig, g: Graph, n: int, c: float) -> dict:
    clean = cycle_census(g)[1]
    rec: dict = {"clean": int(clean), "edges": g.edge_count}
    offsets = cfg.offsets if cfg.i_policy == "offset" else [0.0]
    cf = Fraction(c)
    for k, off in enumerate(offsets):
        i = normal_index(n, cfg.i_policy, off)
        suffix = "" if cfg.i_policy == "half" else f"_{k}"
        try:
            beta = first_row(g, i)
        except CapacityError:
            rec[f"i{suffix}"] = i
            rec[f"beta{suffix}"] = ""
            rec[f"ratio{suffix}"] = ""
            rec[f"normalized{suffix}"] = ""
            rec["fallback_failed"] = 1
            continue
        rec[f"i{suffix}"] = i
        rec[f"beta{suffix}"] = beta
        rec[f"ratio{suffix}"] = float(Fraction(beta) / ((1 - cf) / 2 * n * math.comb(n, i)))
        rec[f"normalized{suffix}"] = float(Fraction(beta, 2**n)) * math.sqrt(2 * math.pi) / (float(1 - cf) * math.sqrt(n))
        rec[f"ratio_adjusted{suffix}"] = float(Fraction(beta) / ((1 - cf / 4) / 2 * n * math.comb(n, i)))
    rec.setdefault("fallback_failed", 0)
    if cfg.profile and not rec["fallback_failed"]:
        if cfg.row == 1:
            prof = first_row_profile(g) if n >= 2 else []
            start = 1
        else:
            t = betti_table(g, cfg.field_char)
            prof = [t[(i, i + 2)] for i in range(1, n)]
            start = 1
        rec["profile"] = " ".join(str(x) for x in prof)
        peak, unimodal = profile_shape(prof)
        rec["peak"] = peak + start if peak is not None else ""
        rec["unimodal"] = int(unimodal)
    return rec


def profile_shape(values: Sequence[int]) -> Tuple[Optional[int], bool]:
    """Index of the maximum and whether the sequence rises then falls (ties allowed)."""
    if not values:
        return None, True
    peak = max(range(len(values)), key=lambda k: (values[k], -k))
    up = all(values[k] <= values[k + 1] for k in range(peak))
    down = all(values[k] >= values[k + 1] for k in range(peak, len(values) - 1))
    return peak, up and down


def _run_block(args) -> List[dict]:
    cfg_dict, n, streams = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    out = []
    for stream in streams:
        out.extend(_trial_records(cfg, n, stream))
    return out


def collect_records(cfg: ExperimentConfig, threads: int = 1) -> List[dict]:
    """All trial records, sorted by ``(cell, stream)``."""
    blocks = []
    per = max(1, cfg.trials // (4 * max(threads, 1)))
    for n in cfg.n_list:
        for lo in range(0, cfg.trials, per):
            blocks.append((cfg.to_dict(), n, list(range(lo, min(lo + per, cfg.trials)))))
    records: List[dict] = []
    if threads <= 1:
        for b in blocks:
            records.extend(_run_block(b))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(_run_block, blocks):
                records.extend(part)
    # n_list may repeat a size; key uniqueness keeps at-most-once evaluation
    unique = {(r["cell"], r["stream"]): r for r in records}
    return [unique[k] for k in sorted(unique)]


# --- aggregation -----------------------------------------------------------


@dataclass
class ExperimentSummary:
    kind: str
    config: dict
    cells: List[dict]
    records: List[dict]
    checks: Dict[str, object]
    wall_time: float = 0.0
    gates: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(g["passed"] for g in self.gates)

    def records_csv(self) -> str:
        return _to_csv(self.records)

    def summary_csv(self) -> str:
        return _to_csv(self.cells)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "seed": self.config["seed"],
            "git_describe": git_describe(),
            "wall_time": self.wall_time,
            "cells": self.cells,
            "checks": self.checks,
            "gates": self.gates,
            "passed": self.passed,
        }


def _to_csv(rows: List[dict]) -> str:
    if not rows:
        return ""
    columns: List[str] = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k, "")) for k in columns})
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return x


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=5, cwd=os.path.dirname(__file__),
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _group(records: List[dict]) -> Dict[int, List[dict]]:
    cells: Dict[int, List[dict]] = {}
    for r in records:
        cells.setdefault(r["cell"], []).append(r)
    return cells


def aggregate(cfg: ExperimentConfig, records: List[dict]) -> Tuple[List[dict], Dict[str, object]]:
    """Per-cell aggregates and suite-level checks; invariant under record order."""
    records = sorted(records, key=lambda r: (r["cell"], r["stream"]))
    groups = _group(records)
    cells = []
    for idx, (n, a, p) in enumerate(cfg.cells()):
        rows = groups.get(idx, [])
        base = {"n": n, "param": a, "p": p, "trials": len(rows)}
        base.update(_AGG[cfg.kind](cfg, rows, n, a))
        cells.append(base)
    checks = _CHECKS[cfg.kind](cfg, cells, records)
    return cells, checks


def _agg_threshold(cfg, rows, n, a):
    k = sum(r["nonzero"] for r in rows)
    lo, hi = wilson_interval(k, len(rows))
    return {"nonzero_count": k, "phat": k / len(rows) if rows else float("nan"), "wilson_lo": lo, "wilson_hi": hi}


def _agg_rows(cfg, rows, n, a):
    out = {}
    for k in range(1, cfg.k_max + 1):
        m, se = _mean_se([r[f"rho_{k}"] for r in rows])
        out[f"mean_rho_{k}"] = m
        out[f"se_rho_{k}"] = se
    return out


def _agg_variance(cfg, rows, n, a):
    from .counts import variance_ratio_estimate

    xs = [r["x"] for r in rows]
    mean, se = _mean_se(xs)
    expected = float(expected_diamond_count(n, derive_p(cfg.form, a, n), cfg.s))
    out = {"s": cfg.s, "mean": mean, "se": se, "expected": expected}
    out["z"] = (mean - expected) / se if se and se > 0 else (0.0 if mean == expected else float("inf"))
    out["within_4se"] = int(abs(out["z"]) <= 4)
    if len(xs) >= 2 and mean > 0:
        est = variance_ratio_estimate(xs)
        out.update({"variance": est.variance, "ratio": est.ratio, "ratio_se": est.ratio_se, "flag": ""})
    else:
        out.update({"variance": float("nan"), "ratio": float("nan"), "ratio_se": float("nan"), "flag": "zero_mean"})
    return out


def _agg_regularity(cfg, rows, n, a):
    t = len(rows)
    cm = sum(r["is_cm"] for r in rows)
    reg_ok = sum(r["reg_in_bounds"] for r in rows)
    forests = [r for r in rows if r["is_forest"]]
    m, se = _mean_se([r["codim_over_pdim"] for r in rows])
    cm_lo, cm_hi = wilson_interval(cm, t)
    reg_lo, reg_hi = wilson_interval(reg_ok, t)
    return {
        "mean_codim_over_pdim": m,
        "se_codim_over_pdim": se,
        "cm_count": cm,
        "cm_frac": cm / t if t else float("nan"),
        "cm_lo": cm_lo,
        "cm_hi": cm_hi,
        "reg_in_bounds_frac": reg_ok / t if t else float("nan"),
        "reg_lo": reg_lo,
        "reg_hi": reg_hi,
        "forest_trials": len(forests),
        "forest_cm": sum(r["is_cm"] for r in forests),
    }


def _agg_normal(cfg, rows, n, c):
    out: Dict[str, object] = {}
    failed = sum(r["fallback_failed"] for r in rows)
    out["excluded"] = failed
    out["excluded_frac"] = failed / len(rows) if rows else 0.0
    ok = [r for r in rows if not r["fallback_failed"]]
    offsets = cfg.offsets if cfg.i_policy == "offset" else [0.0]
    for k, off in enumerate(offsets):
        suffix = "" if cfg.i_policy == "half" else f"_{k}"
        out[f"i{suffix}"] = normal_index(n, cfg.i_policy, off)
        m, se = _mean_se([r[f"ratio{suffix}"] for r in ok])
        out[f"mean_ratio{suffix}"] = m
        out[f"se_ratio{suffix}"] = se
        out[f"mean_ratio_adjusted{suffix}"] = _mean_se([r[f"ratio_adjusted{suffix}"] for r in ok])[0]
        nm, nse = _mean_se([r[f"normalized{suffix}"] for r in ok])
        out[f"mean_normalized{suffix}"] = nm
        out[f"se_normalized{suffix}"] = nse
        if cfg.i_policy == "offset":
            out[f"offset{suffix}"] = off
            out[f"target{suffix}"] = math.exp(-off * off / 2)
    if cfg.profile:
        shaped = [r for r in ok if r.get("unimodal") != ""]
        out["unimodal_frac"] = sum(r["unimodal"] for r in shaped) / len(shaped) if shaped else float("nan")
        centre = {n // 2, (n + 1) // 2}
        out["peak_centre_frac"] = (
            sum(1 for r in shaped if r["unimodal"] and r["peak"] in centre) / len(shaped) if shaped else float("nan")
        )
    return out


def _checks_threshold(cfg, cells, records):
    # coupled monotonicity: for each (n, stream) the indicator is nondecreasing in p
    by_key: Dict[Tuple[int, int], List[Tuple[float, int]]] = {}
    for r in records:
        by_key.setdefault((r["n"], r["stream"]), []).append((r["p"], r["nonzero"]))
    violations = 0
    for pts in by_key.values():
        pts.sort()
        if any(pts[k][1] > pts[k + 1][1] for k in range(len(pts) - 1)):
            violations += 1
    return {"coupled_trials": len(by_key), "coupled_violations": violations, "coupled_monotone": violations == 0}


def _checks_rows(cfg, cells, records):
    means = {}
    for c in cells:
        means.setdefault(c["param"], []).append((c["n"], c["mean_rho_1"]))
    trend = all(
        all(v[k][1] <= v[k + 1][1] + 1e-12 for k in range(len(v) - 1)) for v in (sorted(x) for x in means.values())
    )
    return {"rho_1_nondecreasing_in_n": trend}


def _checks_variance(cfg, cells, records):
    by_param: Dict[float, List[Tuple[int, float]]] = {}
    for c in cells:
        if c["flag"] != "zero_mean":
            by_param.setdefault(c["param"], []).append((c["n"], c["ratio"]))
    decreasing = all(
        all(v[k][1] > v[k + 1][1] for k in range(len(v) - 1)) for v in (sorted(x) for x in by_param.values())
    )
    return {
        "all_within_4se": all(c["within_4se"] for c in cells),
        "ratio_decreasing": decreasing,
        "zero_mean_cells": sum(1 for c in cells if c["flag"] == "zero_mean"),
    }


def _checks_regularity(cfg, cells, records):
    forests = sum(c["forest_trials"] for c in cells)
    forest_cm = sum(c["forest_cm"] for c in cells)
    return {"forest_trials": forests, "forest_all_cm": forest_cm == forests}


def _checks_normal(cfg, cells, records):
    worst = max((c["excluded_frac"] for c in cells), default=0.0)
    return {"max_excluded_frac": worst, "excluded_below_limit": worst < FALLBACK_LIMIT}


_AGG = {
    "threshold": _agg_threshold,
    "rows": _agg_rows,
    "variance": _agg_variance,
    "regularity_cm": _agg_regularity,
    "normal": _agg_normal,
}
_CHECKS = {
    "threshold": _checks_threshold,
    "rows": _checks_rows,
    "variance": _checks_variance,
    "regularity_cm": _checks_regularity,
    "normal": _checks_normal,
}


# --- gates -----------------------------------------------------------------


def evaluate_gates(summary: ExperimentSummary, gates: Sequence[dict]) -> List[dict]:
    """Check ``expect`` gates against a summary.

    A gate is either ``{"check": name}`` (the suite-level check must be
    true) or ``{"field": column, "where": {...}, "min": x, "max": y}``
    (every matching cell must satisfy the bounds).
    """
    results = []
    for gate in gates:
        if "check" in gate:
            value = summary.checks.get(gate["check"])
            if value is None:
                raise ConfigError(f"unknown check {gate['check']!r}")
            results.append({"gate": gate, "value": value, "passed": bool(value)})
            continue
        if "field" not in gate:
            raise ConfigError(f"gate needs 'check' or 'field': {gate}")
        where = gate.get("where", {})
        matched = [c for c in summary.cells if all(_close(c.get(k), v) for k, v in where.items())]
        if not matched:
            raise ConfigError(f"gate matches no cell: {gate}")
        ok = True
        values = []
        for c in matched:
            if gate["field"] not in c:
                raise ConfigError(f"unknown summary field {gate['field']!r}")
            x = c[gate["field"]]
            values.append(x)
            if "min" in gate and not x >= gate["min"]:
                ok = False
            if "max" in gate and not x <= gate["max"]:
                ok = False
        results.append({"gate": gate, "value": values, "passed": ok})
    return results


def _close(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return a is not None and math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)
    return a == b


# --- runners ---------------------------------------------------------------


def run(cfg: ExperimentConfig, threads: int = 1) -> ExperimentSummary:
    start = time.perf_counter()
    records = collect_records(cfg, threads)
    cells, checks = aggregate(cfg, records)
    if cfg.kind == "normal" and not checks["excluded_below_limit"]:
        raise CapacityError(f"fallback failures reached {checks['max_excluded_frac']:.3f} of trials")
    summary = ExperimentSummary(cfg.kind, cfg.to_dict(), cells, records, checks, time.perf_counter() - start)
    summary.gates = evaluate_gates(summary, cfg.expect)
    log.info("%s: %d records in %.2fs", cfg.kind, len(records), summary.wall_time)
    return summary


def _runner(kind):
    def go(cfg: ExperimentConfig, threads: int = 1) -> ExperimentSummary:
        if cfg.kind != kind:
            raise ConfigError(f"expected a {kind} config, got {cfg.kind}")
        return run(cfg, threads)

    go.__name__ = f"run_{kind}"
    return go


run_threshold = _runner("threshold")
run_rows = _runner("rows")
run_normal = _runner("normal")
run_variance = _runner("variance")
run_regularity_cm = _runner("regularity_cm")


def write_outputs(summary: ExperimentSummary, out_dir) -> Dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "records": os.path.join(out_dir, "records.csv"),
        "summary": os.path.join(out_dir, "summary.csv"),
        "json": os.path.join(out_dir, "summary.json"),
    }
    with open(paths["records"], "w") as fh:
        fh.write(summary.records_csv())
    with open(paths["summary"], "w") as fh:
        fh.write(summary.summary_csv())
    with open(paths["json"], "w") as fh:
        json.dump(_finite(summary.to_json_dict()), fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return paths


def _finite(x):
    # strict JSON has no NaN or infinity
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(f"not serializable: {type(x)}")
