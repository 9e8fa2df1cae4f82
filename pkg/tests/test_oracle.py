import json

import pytest

from plumb import invariants as inv
from plumb import oracle
from plumb.oracle import CHECKS, run_battery


def test_rational_graph_all_pass(graphs):
    rep = run_battery(graphs["a1"], seed=1, count=50)
    assert rep["ok"], rep
    assert set(rep["checks"]) == set(CHECKS)
    assert all(c["failed"] == 0 for c in rep["checks"].values())


@pytest.mark.parametrize("name", ["a5", "d4", "g237", "g245", "g237t", "s44451"])
def test_battery_passes(graphs, name):
    rep = run_battery(graphs[name], seed=3, count=6)
    assert rep["ok"], {k: v["failures"] for k, v in rep["checks"].items() if v["failed"]}
    assert rep["checks"]["euler"]["passed"] == 6


def test_battery_is_deterministic(graphs):
    a = run_battery(graphs["g237"], seed=5, count=4)
    b = run_battery(graphs["g237"], seed=5, count=4)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_subset_of_checks(graphs):
    rep = run_battery(graphs["a2"], seed=0, count=3, checks=("chi_additivity",))
    assert rep["checks"]["chi_additivity"]["passed"] == 3
    assert rep["checks"]["euler"]["passed"] == 0


def test_broken_identity_is_reported_with_witness(graphs, monkeypatch):
    real = inv.h1_gen_bundle
    monkeypatch.setattr(inv, "h1_gen_bundle", lambda *a, **k: real(*a, **k) + 1)
    rep = run_battery(graphs["g237"], seed=7, count=5)
    assert not rep["ok"]
    neg = rep["checks"]["negative_on_support"]
    assert neg["failed"] == 5 and neg["passed"] == 0
    assert {"Z", "Zp"} <= set(neg["failures"][0])
    assert rep["checks"]["chi_additivity"]["failed"] == 0


def test_crash_is_recorded_not_raised(graphs, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(inv, "dim_im", boom)
    rep = run_battery(graphs["a2"], seed=0, count=2)
    fails = rep["checks"]["dim_im_bounds"]["failures"]
    assert fails and fails[0]["error"]["message"] == "boom"


def test_random_chern_is_in_lprime(graphs):
    import random

    from plumb.lattice import in_lprime

    rng = random.Random(0)
    for g in graphs.values():
        for _ in range(10):
            assert in_lprime(g, oracle.random_chern(g, rng))
