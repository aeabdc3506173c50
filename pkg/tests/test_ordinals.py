import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sacksterms.ordinals import (
    OMEGA,
    Ordinal,
    addressable,
    decompose,
    limits_up_to,
    parse_ordinal,
)

W = OMEGA


def O(s):
    return parse_ordinal(s)


# An independent model of ordinals below w^4: a word of blocks, each block being
# one copy of w^e.  Concatenation is ordinal addition; a block is swallowed by
# a later block of larger degree.  Counting blocks per degree gives the CNF.


def word(a):
    return [e for e, c in a.monomials for _ in range(c)]


def collapse(w):
    out = []
    for e in w:
        while out and out[-1] < e:
            out.pop()
        out.append(e)
    return out


def from_word(w):
    return Ordinal(tuple((e, sum(1 for b in w if b == e)) for e in sorted(set(w), reverse=True)))


ords = st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=4).map(
    lambda ms: Ordinal(tuple((e, c) for e, c in sorted(dict(ms).items(), reverse=True) if c))
)


def test_add_examples():
    assert O("w+3") + O("w*2+5") == O("w*3+5")
    assert O("w^2") + O("w+1") == O("w^2+w+1")
    assert O("w*2+7") + 0 == O("w*2+7")
    assert 3 + W == W


def test_decompose_examples():
    assert decompose(O("w^2+w+4")) == (O("w^2+w"), 4)
    assert decompose(7) == (Ordinal(), 7)
    assert decompose(W) == (W, 0)


def test_addressable_examples():
    assert addressable(W, 3) == [Ordinal.of(k) for k in range(4)]
    assert addressable(W + W, 1) == [Ordinal.of(0), Ordinal.of(1), W, W + 1]
    assert addressable(O("w^2"), 1) == [Ordinal.of(0), Ordinal.of(1), W, W + 1]


def test_addressable_against_enumeration():
    # filter every small CNF list by comparison with the bound
    bound = O("w^2*2+w")
    cands = {Ordinal(tuple((e, c) for e, c in zip((2, 1, 0), cs) if c)) for cs in itertools.product(range(3), repeat=3)}
    assert addressable(bound, 2) == sorted(a for a in cands if a < bound)


def test_limits_up_to():
    assert limits_up_to(O("w^2"), 2) == [W, O("w*2"), O("w^2")]
    assert limits_up_to(O("w^2"), 2, inclusive=False) == [W, O("w*2")]


def test_parse_and_print_round_trip():
    for s in ["0", "5", "w", "w*3+2", "w^2+w+4", "w^3*2+w^2"]:
        assert str(O(s)) == s
    assert O("ω·2+1") == O("w*2+1")
    with pytest.raises(ValueError):
        O("w^^2")


def test_json_round_trip():
    a = O("w^2*3+w+4")
    assert Ordinal.from_json(a.to_json()) == a


@settings(max_examples=300, deadline=None)
@given(ords, ords)
def test_addition_matches_block_model(a, b):
    assert a + b == from_word(collapse(word(a) + word(b)))


@settings(max_examples=300, deadline=None)
@given(ords, ords, ords)
def test_addition_associative(a, b, c):
    assert (a + b) + c == a + (b + c)


@settings(max_examples=300, deadline=None)
@given(ords, ords)
def test_order_is_lexicographic_and_left_subtraction_inverts(a, b):
    vec = lambda o: [dict(o.monomials).get(e, 0) for e in (3, 2, 1, 0)]  # noqa: E731
    assert (a < b) == (vec(a) < vec(b))
    lo, hi = sorted([a, b])
    assert lo + (hi - lo) == hi


@settings(max_examples=200, deadline=None)
@given(ords, ords)
def test_addition_is_monotone_in_right_argument(a, b):
    assert a + b >= b
    if not b.is_zero:
        assert a + b > a
