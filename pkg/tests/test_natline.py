import random

import pytest

from plumb import invariants as inv
from plumb import natline
from plumb.cycles import Cycle, ZERO, parse_cycle
from plumb.errors import AssumptionViolated, BlowupBudgetExceeded, NotEffective, TvSearchExceeded
from plumb.graph import blowup_edge, blowup_free
from plumb.lattice import chi_bundle, dual_basis, pullback
from plumb.natline import Solver, boundary_profile, compute, prune, replay

# (graph, Z, Zp, top-level branch)
BRANCHES = [
    ("a1", "1:2", "0", "base"),
    ("g237", "3:3,4:1", "1:1", "split"),
    ("g237", "1:2,2:1,3:1,4:1", "0", "trivial-twist"),
    ("g237t", "1:2,2:1,3:1,4:1", "5:1", "S1-closed"),
    ("g237t", "1:2,2:1,3:1,4:1", "5:-1", "S1-rec"),
    ("g237t", "1:2,2:1,3:1,4:2", "5:1", "S2"),
    ("s44451", "1:2,2:1,3:1,4:1,5:1", "6:1", "S3-blowup"),
    ("g237", "1:2,2:1,3:1,4:1", "4:-1", "S4"),
    ("g237t", "1:2,2:1,3:1,4:1,5:2", "0", "S5"),
]


def _run(graphs, name, Z, Zp, **kw):
    g = graphs[name]
    s = Solver(**kw)
    return g, s, s.compute(g, parse_cycle(Z), parse_cycle(Zp))


def test_small_examples(graphs):
    r = compute(graphs["a1"], {1: 2}, ZERO)
    assert (r.h0, r.h1) == (4, 0)
    r = compute(graphs["a2"], {1: 1}, {2: 1})
    assert (r.h0, r.h1) == (2, 0)
    r = compute(graphs["g237"], ZERO, {1: 3})
    assert (r.h0, r.h1) == (0, 0)
    assert r.trace[-1]["step"] == "zero"


@pytest.mark.parametrize("name,Z,Zp,tag", BRANCHES)
def test_branch_reached(graphs, name, Z, Zp, tag):
    g, s, r = _run(graphs, name, Z, Zp)
    assert r.trace[-1]["step"] == tag
    assert r.h0 - r.h1 == chi_bundle(g, parse_cycle(Z), parse_cycle(Zp))
    replay(r.trace)


@pytest.mark.parametrize("name,Z,Zp,tag", BRANCHES)
def test_branch_agrees_in_debug_mode(graphs, name, Z, Zp, tag):
    _, _, plain = _run(graphs, name, Z, Zp)
    _, s, dbg = _run(graphs, name, Z, Zp, debug=True)
    assert (dbg.h0, dbg.h1) == (plain.h0, plain.h1)
    assert s.stats["nodes"] > 0


@pytest.mark.parametrize("name,Z,Zp,tag", BRANCHES)
def test_branch_is_blowup_invariant(graphs, name, Z, Zp, tag):
    g = graphs[name]
    Z, Zp = parse_cycle(Z), parse_cycle(Zp)
    r = compute(g, Z, Zp)
    for v in sorted(Z.support)[:2]:
        g2, bd = blowup_free(g, v)
        r2 = compute(g2, pullback(bd, Z), pullback(bd, Zp))
        assert (r2.h0, r2.h1) == (r.h0, r.h1)


def test_zero_twist_equals_h1_struct(graphs):
    rng = random.Random(8)
    for g in graphs.values():
        for _ in range(6):
            Z = Cycle({v: rng.randint(0, 3) for v in g.ids})
            assert compute(g, Z, ZERO).h1 == inv.h1_struct(g, Z)


def test_known_values_on_non_rational_graphs(graphs):
    assert (compute(graphs["g237t"], {1: 2, 2: 1, 3: 1, 4: 1}, {5: 1}).h1) == 0
    assert (compute(graphs["g237t"], {1: 2, 2: 1, 3: 1, 4: 1}, {5: -1}).h1) == 1
    r = compute(graphs["s44451"], {1: 2, 2: 1, 3: 1, 4: 1, 5: 1}, {6: 1})
    assert (r.h0, r.h1) == (2, 0)


def test_step1_closed_form_equals_r_minus_dim_im(graphs):
    g = graphs["g237t"]
    Z, Zp = Cycle({1: 2, 2: 1, 3: 1, 4: 1}), Cycle({5: 1})
    r = compute(g, Z, Zp)
    rec = r.trace[-1]
    assert rec["step"] == "S1-closed"
    assert r.h1 == inv.h1_struct(g, Z) - inv.dim_im(g, Z, Zp) == rec["r"] - rec["dim_im"]


def test_step3_rewrite_matches_edge_blowup(graphs):
    # h1 is unchanged by the edge blowup and total-transform pullback used in Step 3
    g = graphs["s44451"]
    Z, Zp = Cycle({1: 2, 2: 1, 3: 1, 4: 1, 5: 1}), Cycle({6: 1})
    r = compute(g, Z, Zp)
    t = [rec for rec in r.trace if rec["step"] == "S3-t"][-1]
    v, w = t["edge"]
    g2, bd = blowup_edge(g, v, w)
    r2 = compute(g2, pullback(bd, Z), pullback(bd, Zp))
    assert (r2.h0, r2.h1) == (r.h0, r.h1)


def test_t_values(graphs):
    s = Solver()
    g = graphs["g237"]
    Z = Cycle({1: 2, 2: 1, 3: 1, 4: 1})
    assert {v: s.t_value(g, Z, v) for v in Z.support} == {1: 2, 2: 1, 3: 1, 4: 1}
    with pytest.raises(TvSearchExceeded):
        s.t_value(g, Z, 1, cap=1)
    with pytest.raises(AssumptionViolated):
        s.t_value(graphs["a2"], {1: 1}, 1)


def test_blowup_budget(graphs):
    with pytest.raises(BlowupBudgetExceeded):
        _run(graphs, "s44451", "1:2,2:1,3:1,4:1,5:1", "6:1", blowup_budget=0)


def test_pruning_drops_far_coefficients(graphs):
    g = graphs["g237t"]
    Z = Cycle({5: 2})
    assert prune(g, Z, Cycle({1: 3, 4: 1})) == Cycle({4: 1})
    a = compute(g, Z, Cycle({1: 3, 4: 1}))
    b = compute(g, Z, Cycle({4: 1}), prune_far=False)
    assert (a.h0, a.h1) == (b.h0, b.h1)


def test_boundary_profile(graphs):
    g = graphs["g237t"]
    Z = Cycle({1: 2, 2: 1, 3: 1, 4: 1})
    bp = boundary_profile(g, Z, Cycle({5: 1}))
    assert bp.I == frozenset({4})
    assert bp.neighbours == {4: [1]}
    assert bp.I_prime == frozenset({4})
    assert boundary_profile(g, Z, ZERO).I == frozenset()


def test_rejects_bad_cycles(graphs):
    with pytest.raises(NotEffective):
        compute(graphs["a2"], {1: -1}, ZERO)


def test_replay_detects_tampering(graphs):
    _, _, r = _run(graphs, "g237t", "1:2,2:1,3:1,4:2", "5:1")
    replay(r.trace)
    bad = [dict(rec) for rec in r.trace]
    bad[-1]["h0"] += 1
    with pytest.raises(AssumptionViolated):
        replay(bad)


def test_memo_is_shared_across_calls(graphs):
    g = graphs["g237t"]
    s = Solver()
    s.compute(g, {1: 2, 2: 1, 3: 1, 4: 2}, {5: 1})
    n = s.stats["nodes"]
    s.compute(g, {1: 2, 2: 1, 3: 1, 4: 2}, {5: 1})
    assert s.stats["nodes"] == n


def test_monotone_in_z(graphs):
    g = graphs["g237t"]
    Zp = Cycle({5: -1})
    Z = Cycle({1: 3, 2: 1, 3: 2, 4: 2})
    big = compute(g, Z, Zp).h1
    for Z1 in natline._box(Z):
        assert compute(g, Z1, Zp).h1 <= big


def test_negative_on_support_identity(graphs):
    rng = random.Random(12)
    for name in ["g237", "g245", "g237t"]:
        g = graphs[name]
        for _ in range(5):
            Z = Cycle({v: rng.randint(1, 2) for v in g.ids})
            Zp = -dual_basis(g, rng.choice(g.ids))
            while any(Zp[v] >= 0 for v in Z.support):
                Zp = Zp - dual_basis(g, 1)
            assert compute(g, Z, Zp).h1 == inv.h1_gen_bundle(g, Z, Zp)


def test_result_json(graphs):
    _, _, r = _run(graphs, "a2", "1:1", "2:1")
    assert r.to_json() == {"h0": 2, "h1": 0, "chi_bundle": 2}
    assert "steps" in r.to_json(with_trace=True)
