from fractions import Fraction

import pytest

from plumb.cycles import Cycle, ZERO, basis, format_cycle, parse_cycle, reduced
from plumb.errors import InputError


def test_zero_entries_are_dropped():
    assert Cycle({1: 0, 2: 3}) == Cycle({2: 3})
    assert len(Cycle({1: 0})) == 0


def test_lowest_terms_and_integral_storage():
    c = Cycle({1: Fraction(2, 4), 2: Fraction(4, 2)})
    assert c[1] == Fraction(1, 2)
    assert isinstance(c[2], int)


def test_arithmetic():
    a, b = Cycle({1: 1, 2: 2}), Cycle({2: -2, 3: 1})
    assert a + b == Cycle({1: 1, 3: 1})
    assert a - a == ZERO
    assert 2 * a == Cycle({1: 2, 2: 4})
    assert -a == Cycle({1: -1, 2: -2})


def test_order_and_support():
    a = Cycle({1: 1, 2: 2})
    assert Cycle({2: 1}) <= a
    assert not a <= Cycle({2: 5})
    assert a.support == frozenset({1, 2})
    assert reduced([1, 2]) == Cycle({1: 1, 2: 1})
    assert basis(3, 2) == Cycle({3: 2})


def test_parse_and_format_round_trip():
    c = parse_cycle("1:2,3:-1/2")
    assert c == Cycle({1: 2, 3: Fraction(-1, 2)})
    assert format_cycle(c) == "1:2,3:-1/2"
    assert parse_cycle("") == ZERO
    assert parse_cycle("0") == ZERO
    assert format_cycle(ZERO) == "0"


@pytest.mark.parametrize("bad", ["1", "1:", "a:1", "1:2,1:3", "1:1/0"])
def test_parse_rejects(bad):
    with pytest.raises(InputError):
        parse_cycle(bad)


def test_hash_consistent_with_equality():
    assert hash(Cycle({1: Fraction(2, 2)})) == hash(Cycle({1: 1}))
