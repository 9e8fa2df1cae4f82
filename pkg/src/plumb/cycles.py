"""Immutable sparse cycles on the vertex set of a plumbing graph.

A :class:`Cycle` maps vertex ids to exact coefficients (``int`` or
``fractions.Fraction``).  Missing ids have coefficient 0 and zero entries are
never stored, so two cycles compare equal iff they have the same coefficients.
Integral rationals are stored as ``int``; everything stays exact.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from fractions import Fraction
from numbers import Rational

from .errors import InputError


def _normalize(x):
    if isinstance(x, bool):
        raise TypeError("bool is not a cycle coefficient")
    if isinstance(x, int):
        return x
    if isinstance(x, Rational):
        x = Fraction(x)
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        return _normalize(Fraction(x))
    raise TypeError(f"cycle coefficients must be exact rationals, got {type(x).__name__}")


class Cycle(Mapping):
    __slots__ = ("_data", "_hash")

    def __init__(self, data: Mapping | Iterable = ()):
        if isinstance(data, Cycle):
            self._data = data._data
        else:
            items = data.items() if isinstance(data, Mapping) else data
            d = {}
            for k, v in items:
                v = _normalize(v)
                if v:
                    d[int(k)] = v
            self._data = dict(sorted(d.items()))
        self._hash = None

    # Mapping protocol -------------------------------------------------
    def __getitem__(self, v):
        return self._data.get(v, 0)

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __contains__(self, v):
        return v in self._data

    def get(self, v, default=0):
        return self._data.get(v, default)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._data.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Cycle):
            return self._data == other._data
        if isinstance(other, Mapping):
            return self == Cycle(other)
        return NotImplemented

    def __repr__(self):
        return f"Cycle({format_cycle(self) or '0'})"

    # arithmetic -------------------------------------------------------
    @classmethod
    def _raw(cls, d: dict) -> "Cycle":
        c = cls.__new__(cls)
        c._data = dict(sorted((k, v) for k, v in d.items() if v))
        c._hash = None
        return c

    def __add__(self, other):
        d = dict(self._data)
        for k, v in other.items():
            d[k] = _normalize(d.get(k, 0) + v)
        return Cycle._raw(d)

    def __sub__(self, other):
        d = dict(self._data)
        for k, v in other.items():
            d[k] = _normalize(d.get(k, 0) - v)
        return Cycle._raw(d)

    def __neg__(self):
        return Cycle._raw({k: -v for k, v in self._data.items()})

    def __mul__(self, s):
        s = _normalize(s)
        return Cycle._raw({k: _normalize(v * s) for k, v in self._data.items()})

    __rmul__ = __mul__

    def __le__(self, other):
        keys = set(self._data) | set(other)
        return all(self[k] <= other.get(k, 0) for k in keys)

    def __ge__(self, other):
        return Cycle(other) <= self

    # helpers ----------------------------------------------------------
    @property
    def support(self) -> frozenset:
        return frozenset(self._data)

    def is_integral(self) -> bool:
        return all(isinstance(v, int) for v in self._data.values())

    def is_effective(self) -> bool:
        return all(v > 0 for v in self._data.values())

    def restrict(self, vertices) -> "Cycle":
        vs = set(vertices)
        return Cycle._raw({k: v for k, v in self._data.items() if k in vs})

    def drop(self, vertices) -> "Cycle":
        vs = set(vertices)
        return Cycle._raw({k: v for k, v in self._data.items() if k not in vs})


ZERO = Cycle()


def basis(v: int, coeff=1) -> Cycle:
    """The cycle ``coeff * E_v``."""
    return Cycle({v: coeff})


def reduced(vertices) -> Cycle:
    """``E_S``, the reduced cycle on a vertex set."""
    return Cycle({v: 1 for v in vertices})


_TERM = re.compile(r"\s*(-?\d+)\s*:\s*(-?\d+(?:\s*/\s*\d+)?)\s*$")


def parse_cycle(text: str) -> Cycle:
    """Parse the literal syntax ``id:coeff,id:coeff`` (``coeff`` is ``int`` or ``p/q``).

    The empty string and ``0`` denote the zero cycle.
    """
    text = text.strip()
    if text in ("", "0"):
        return ZERO
    d: dict[int, Fraction] = {}
    for part in text.split(","):
        m = _TERM.match(part)
        if not m:
            raise InputError(f"bad cycle term {part!r}; expected id:coeff")
        v = int(m.group(1))
        num = m.group(2).replace(" ", "")
        try:
            c = Fraction(num)
        except ZeroDivisionError:
            raise InputError(f"zero denominator in {part!r}") from None
        if v in d:
            raise InputError(f"vertex {v} repeated in cycle literal")
        d[v] = c
    return Cycle(d)


def format_coeff(x) -> str:
    return str(x) if isinstance(x, int) else f"{x.numerator}/{x.denominator}"


def format_cycle(c: Mapping) -> str:
    return ",".join(f"{k}:{format_coeff(v)}" for k, v in sorted(c.items()) if v) or "0"
