import json
import math
import random

import pytest

from flagbetti._validation import CapacityError, ConfigError
from flagbetti.experiments import (
    ExperimentConfig,
    aggregate,
    betti_nonzero,
    collect_records,
    evaluate_gates,
    profile_shape,
    run,
    run_threshold,
    wilson_interval,
    write_outputs,
)
from flagbetti.betti import betti_table
from flagbetti.graph import SampleParams, sample_graph


def cfg(**kw):
    base = dict(kind="threshold", n_list=[20], p_spec={"power": [0.7, 1.4]}, trials=10, seed=3, i=2, v=4)
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def test_config_validation():
    with pytest.raises(ConfigError, match="unknown"):
        cfg(bogus=1)
    with pytest.raises(ConfigError):
        cfg(trials=0)
    with pytest.raises(ConfigError, match="1/2"):
        cfg(p_spec={"values": [0.8]})
    assert cfg(p_spec={"values": [0.8]}, allow_large_p=True).cells()[0][2] == 0.8
    with pytest.raises(ConfigError):
        cfg(p_spec={"weird": [1]})
    with pytest.raises(ConfigError):
        cfg(v=3)
    with pytest.raises(CapacityError):
        cfg(i=7, v=13)
    with pytest.raises(CapacityError):
        cfg(kind="rows", n_list=[23], p_spec={"values": [0.1]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("{not json")
    with pytest.raises(ConfigError):
        cfg(kind="variance", s=None)


def test_p_forms():
    c = cfg(n_list=[100], p_spec={"linear": [0.5]})
    assert c.cells() == [(100, 0.5, 0.005)]
    c = cfg(n_list=[10], p_spec={"quadratic": [2.0]})
    assert c.cells()[0][2] == pytest.approx(0.02)
    c = cfg(n_list=[16], p_spec={"power": [0.5]})
    assert c.cells()[0][2] == pytest.approx(0.25)


def test_wilson():
    lo, hi = wilson_interval(0, 200)
    assert lo == 0 and 0 < hi < 0.02
    lo, hi = wilson_interval(200, 200)
    assert hi == 1 and lo > 0.98
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and math.isclose(0.5 - lo, hi - 0.5)


def test_betti_nonzero_matches_tables():
    for t in range(150):
        n = 5 + t % 5
        g = sample_graph(SampleParams(n, (0.3, 0.5, 0.7)[t % 3], 8, t))
        tb = betti_table(g)
        for i in range(1, n):
            for v in range(i + 2, min(2 * i, n) + 1):
                assert betti_nonzero(g, i, v) == (tb[(i, v)] != 0)


def test_threshold_p_zero_cells():
    c = cfg(p_spec={"values": [0.0]}, expect=[{"check": "coupled_monotone"}, {"field": "phat", "max": 0}])
    s = run_threshold(c)
    assert all(cell["phat"] == 0 for cell in s.cells)
    assert s.passed


def test_threshold_coupled_monotone():
    c = cfg(n_list=[40], p_spec={"power": [0.6, 0.8, 1.0]}, trials=30)
    s = run(c)
    assert s.checks["coupled_monotone"]
    phats = [cell["phat"] for cell in s.cells]
    assert phats[0] >= phats[2]


def test_records_reproducible_and_thread_independent():
    c = cfg(kind="variance", n_list=[15, 25], p_spec={"power": [0.55]}, trials=12, s=1, i=None, v=None)
    a = run(c, threads=1)
    b = run(c, threads=3)
    assert a.records_csv() == b.records_csv()
    assert a.summary_csv() == b.summary_csv()


def test_aggregation_order_invariant():
    c = cfg(kind="rows", n_list=[8, 10], p_spec={"power": [0.6]}, trials=8, i=None, v=None)
    recs = collect_records(c)
    shuffled = recs[:]
    random.Random(0).shuffle(shuffled)
    assert aggregate(c, recs) == aggregate(c, shuffled)


def test_rows_p_zero():
    c = cfg(kind="rows", n_list=[6], p_spec={"values": [0.0]}, trials=3, i=None, v=None)
    s = run(c)
    # an empty graph has a linear resolution: row 1 is full, row 2 empty
    assert s.cells[0]["mean_rho_1"] == 5 / 6


def test_variance_against_expectation():
    c = cfg(kind="variance", n_list=[30], p_spec={"power": [0.55]}, trials=300, s=1, i=None, v=None)
    s = run(c)
    assert s.checks["all_within_4se"]


def test_normal_empty_graph_limit():
    c = cfg(kind="normal", n_list=[60], p_spec={"linear": [0.001]}, trials=2, i=None, v=None, profile=True)
    s = run(c)
    assert s.checks["excluded_below_limit"]
    assert 0.9 < s.cells[0]["mean_ratio"] < 1.1


def test_normal_offsets_and_profile():
    c = cfg(kind="normal", n_list=[15], p_spec={"linear": [0.5]}, trials=5, i=None, v=None,
            i_policy="offset", offsets=[-1.0, 0.0, 1.0], profile=True)
    s = run(c)
    cell = s.cells[0]
    assert [cell[f"i_{k}"] for k in range(3)] == [5, 7, 9]
    assert cell["target_1"] == 1.0
    assert all(r["profile"] for r in s.records)


def test_second_row_profile_mode():
    c = cfg(kind="normal", n_list=[10], p_spec={"linear": [0.5]}, trials=2, i=None, v=None, profile=True, row=2)
    s = run(c)
    assert len(s.records) == 2


def test_regularity_cm_runner():
    c = cfg(kind="regularity_cm", n_list=[9], p_spec={"power": [0.6]}, trials=6, i=None, v=None)
    s = run(c)
    cell = s.cells[0]
    assert 0 <= cell["cm_frac"] <= 1 and cell["mean_codim_over_pdim"] <= 1


def test_profile_shape():
    assert profile_shape([1, 3, 5, 4, 1]) == (2, True)
    assert profile_shape([1, 3, 2, 4, 1]) == (3, False)
    assert profile_shape([2, 2, 1]) == (0, True)


def test_gates():
    s = run(cfg(p_spec={"values": [0.0]}))
    res = evaluate_gates(s, [{"field": "phat", "min": 0.5}])
    assert not res[0]["passed"]
    with pytest.raises(ConfigError):
        evaluate_gates(s, [{"field": "phat", "where": {"n": 999}}])
    with pytest.raises(ConfigError):
        evaluate_gates(s, [{"check": "nope"}])


def test_write_outputs(tmp_path):
    s = run(cfg(trials=4))
    paths = write_outputs(s, tmp_path)
    rec = open(paths["records"]).read().splitlines()
    assert rec[0] == "cell,n,param,p,stream,nonzero" and len(rec) == 1 + 8
    summ = open(paths["summary"]).read().splitlines()
    assert summ[0] == "n,param,p,trials,nonzero_count,phat,wilson_lo,wilson_hi"
    data = json.load(open(paths["json"]))
    assert data["seed"] == 3 and data["config"]["kind"] == "threshold"
    assert "git_describe" in data and data["wall_time"] >= 0
