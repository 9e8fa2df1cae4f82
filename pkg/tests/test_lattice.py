import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from plumb.cli import load_corpus_graph
from plumb.cycles import Cycle, ZERO
from plumb.errors import IndexMismatch, NotInLprime, UnknownVertex
from plumb.lattice import (canonical_cycle, chi, chi_bundle, degree, dual_basis, in_lprime,
                           neg_lipman_member, pairing, pullback, require_lprime)
from plumb.graph import blowup_edge, blowup_free


def test_pairing_examples(a1, a2):
    assert pairing(a1, {1: 1}, {1: 1}) == -2
    assert pairing(a2, {1: 1}, {2: 1}) == 1
    assert pairing(a2, dual_basis(a2, 1), {1: 1}) == -1


def test_pairing_rejects_foreign_vertices(a1):
    with pytest.raises((UnknownVertex, IndexMismatch)):
        pairing(a1, {1: 1}, {2: 1})


def test_dual_basis_examples(a1, a2):
    assert dual_basis(a1, 1) == Cycle({1: Fraction(1, 2)})
    assert dual_basis(a2, 1) == Cycle({1: Fraction(2, 3), 2: Fraction(1, 3)})


def test_dual_basis_is_dual(graphs):
    for g in graphs.values():
        for u in g.ids:
            d = dual_basis(g, u)
            for w in g.ids:
                assert pairing(g, d, {w: 1}) == (-1 if u == w else 0)


def test_canonical_cycle(graphs):
    assert canonical_cycle(graphs["a1"]) == ZERO
    assert canonical_cycle(graphs["a2"]) == ZERO
    for g in graphs.values():
        zk = canonical_cycle(g)
        for v in g.ids:
            e = Cycle({v: 1})
            assert pairing(g, e - zk, e) + 2 == 0
    assert canonical_cycle(graphs["g237"]) == Cycle({1: 2, 2: 1, 3: 1, 4: 1})


def test_chi_examples(a1, a2):
    assert chi(a1, {1: 1}) == 1
    assert chi(a1, {1: 2}) == 4
    assert chi(a2, {1: 1, 2: 1}) == 1
    assert chi(a1, ZERO) == 0


def test_chi_bundle_examples(a1, a2):
    assert chi_bundle(a1, {1: 2}, ZERO) == 4
    assert chi_bundle(a2, {1: 1}, {2: 1}) == 2
    assert chi_bundle(a1, ZERO, {1: 5}) == 0


def test_neg_lipman_member(a2, g237):
    assert neg_lipman_member(a2, {1}, {2: 1})
    assert not neg_lipman_member(a2, {1}, {2: -1})
    assert neg_lipman_member(g237, set(), {4: -9})


def test_lprime_membership(a1):
    assert in_lprime(a1, {1: Fraction(1, 2)})
    assert not in_lprime(a1, {1: Fraction(1, 3)})
    with pytest.raises(NotInLprime):
        require_lprime(a1, {1: Fraction(1, 3)})


def test_pullback_examples(a2):
    g, bd = blowup_edge(a2, 1, 2)
    assert pullback(bd, {1: 1}) == Cycle({1: 1, 3: 1})
    g, bd = blowup_free(a2, 2)
    assert pullback(bd, {1: 1, 2: 3})[bd.new_vertex] == 3


def test_degree_is_pairing(g237):
    zp = dual_basis(g237, 4) * 2 + Cycle({1: 1})
    for v in g237.ids:
        assert degree(g237, zp, v) == pairing(g237, zp, {v: 1})


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["a2", "d4", "g237", "s44451"]), st.data())
def test_chi_additivity_property(name, data):
    g = load_corpus_graph(name)
    a = Cycle({v: data.draw(rationals) for v in g.ids})
    b = Cycle({v: data.draw(rationals) for v in g.ids})
    assert chi(g, a + b) == chi(g, a) + chi(g, b) - pairing(g, a, b)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["a5", "e8", "g245"]), st.data())
def test_pairing_symmetric_bilinear(name, data):
    g = load_corpus_graph(name)
    ints = st.integers(-4, 4)
    a, b, c = (Cycle({v: data.draw(ints) for v in g.ids}) for _ in range(3))
    assert pairing(g, a, b) == pairing(g, b, a)
    assert pairing(g, a + c, b) == pairing(g, a, b) + pairing(g, c, b)


def test_chi_bundle_is_chi_plus_pairing(graphs):
    rng = random.Random(5)
    for g in graphs.values():
        Z = Cycle({v: rng.randint(0, 3) for v in g.ids})
        Zp = dual_basis(g, rng.choice(g.ids)) * rng.randint(-3, 3)
        assert chi_bundle(g, Z, Zp) == chi(g, Z) + pairing(g, Zp, Z)
