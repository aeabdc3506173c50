import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sacksterms.pairing import tau, tau_inv, triangle_leq
from sacksterms.terms import (
    ONE,
    ZERO,
    Term,
    compose,
    determines,
    equiv,
    evaluate,
    function_of,
    normalize,
    restrict,
    substitute,
    x,
)
from sacksterms.trees import ClippedTree, canonical_terms

FIG1 = ClippedTree.from_leaves(3, ["000", "001", "011", "110", "111"])
X0, X1, X2 = (Term.var(k) for k in range(3))


def brute_table(support, fn):
    """Truth table built the slow way: one assignment at a time, most significant first."""
    return [fn(dict(zip(support, bits))) for bits in itertools.product((0, 1), repeat=len(support))]


@st.composite
def terms(draw, max_vars=4, pool=6):
    support = sorted(draw(st.sets(st.integers(0, pool - 1), max_size=max_vars)))
    table = draw(st.lists(st.integers(0, 1), min_size=1 << len(support), max_size=1 << len(support)))
    return Term.make(support, table)


@st.composite
def substitutions(draw, pool=6):
    keys = draw(st.sets(st.integers(0, pool - 1), max_size=3))
    return {k: draw(terms(max_vars=3, pool=pool)) for k in keys}


# -- pairing ----------------------------------------------------------------


def test_tau_known_values():
    assert tau(0, 0) == 0
    assert tau(1, 2) == 7
    assert tau(1, 0) == 2


def test_tau_matches_diagonal_enumeration():
    # enumerate pairs diagonal by diagonal, first coordinate increasing
    order = [(n, s - n) for s in range(40) for n in range(s + 1)]
    for k, pair in enumerate(order):
        assert tau(*pair) == k
        assert tau_inv(k) == pair


def test_tau_bijective_on_square():
    vals = {tau(n, m) for n in range(100) for m in range(100)}
    assert len(vals) == 100 * 100
    assert all(tau_inv(tau(n, m)) == (n, m) for n in range(100) for m in range(100))


def test_triangle_order_respects_diagonals():
    pairs = list(itertools.product(range(20), repeat=2))
    assert all(triangle_leq((0, 0), p) for p in pairs)
    assert triangle_leq((1, 2), (1, 2))
    for (i, j), (a, b) in itertools.product(pairs, repeat=2):
        if triangle_leq((a, b), (i, j)):
            assert a + b <= i + j


def test_tau_rejects_negative():
    with pytest.raises(ValueError):
        tau(-1, 0)
    with pytest.raises(ValueError):
        tau_inv(-3)


# -- terms ------------------------------------------------------------------


def test_pair_variables_share_the_namespace():
    assert x(1, 2) == Term.var(7)
    assert x(0, 0).variable == 0


def test_normalization_drops_dummies():
    t = Term.make([0, 5], [0, 0, 1, 1])  # ignores x5
    assert t.support == (0,)
    assert t == X0
    assert normalize(t) == t
    assert (X0 & ~X0) == ZERO
    assert (X0 ^ X0) == ZERO
    assert Term.make([], [1]) == ONE


def test_every_support_variable_is_essential():
    rng = np.random.default_rng(3)
    for _ in range(200):
        support = sorted(rng.choice(8, size=rng.integers(0, 5), replace=False).tolist())
        t = Term.make(support, rng.integers(0, 2, 1 << len(support)).tolist())
        for v in t.support:
            flipped = [a for a in itertools.product((0, 1), repeat=len(t.support))
                       if evaluate(t, dict(zip(t.support, a)))
                       != evaluate(t, {**dict(zip(t.support, a)), v: 1 - a[t.support.index(v)]})]
            assert flipped


def test_figure1_evaluation():
    t0, t1, t2 = canonical_terms(FIG1)
    assert evaluate(t2, {0: 0, 1: 1, 2: 0}) == 1
    assert evaluate(X0, {0: 1}) == 1
    assert evaluate(ZERO, {}) == 0


def test_figure1_t2_against_hand_table():
    want = Term.make([0, 1, 2], brute_table([0, 1, 2], lambda a: (a[2] if a[1] == 0 else 1) if a[0] == 0 else a[1]))
    assert equiv(canonical_terms(FIG1)[2], want)


def test_substitute_examples():
    _, _, t2 = canonical_terms(FIG1)
    xp0 = Term.var(1)  # primed x'_0 is id 1
    assert substitute(t2, {0: ONE, 1: xp0}) == xp0
    assert substitute(t2, {}) == t2
    xor = X0 ^ X1
    got = substitute(xor, {0: ONE, 1: X2})
    assert all(evaluate(got, {2: b}) == 1 - b for b in (0, 1))
    assert got == ~X2


def test_compose_examples():
    psi = {1: X2 & X0}
    assert compose({}, psi) == {1: X2 & X0}
    assert compose({0: X1}, {1: ZERO}) == {0: ZERO, 1: ZERO}


def test_determination_examples():
    t0, t1, t2 = canonical_terms(FIG1)
    assert determines([t0], X0)
    assert not determines([t0, t1], X1)
    assert determines([t0, t1, t2], X1)
    assert function_of([t0, t1], X1) is None
    assert function_of([t0], X0) == {(0,): 0, (1,): 1}


def test_restrict_partially_evaluates():
    t = (X0 & X1) | X2
    assert restrict(t, {0: 1}) == (X1 | X2)
    assert restrict(t, {2: 1}) == ONE


@settings(max_examples=200, deadline=None)
@given(terms(), st.dictionaries(st.integers(0, 5), st.integers(0, 1), min_size=6, max_size=6))
def test_eval_substitute_consistency(t, a):
    phi = {0: X1 ^ X2, 3: ~Term.var(4)}
    lhs = evaluate(substitute(t, phi), a)
    pulled = {v: evaluate(phi[v], a) if v in phi else a[v] for v in range(6)}
    assert lhs == evaluate(t, pulled)


@settings(max_examples=150, deadline=None)
@given(terms(), substitutions(), substitutions(), substitutions())
def test_compose_is_associative(t, r, s, u):
    left = compose(r, compose(s, u))
    right = compose(compose(r, s), u)
    for v in range(6):
        assert substitute(Term.var(v), left) == substitute(Term.var(v), right)
    assert substitute(t, left) == substitute(substitute(substitute(t, r), s), u)


@settings(max_examples=100, deadline=None)
@given(terms(), substitutions())
def test_identity_laws(t, s):
    assert substitute(t, {}) == t
    for v in range(6):
        assert substitute(Term.var(v), compose({}, s)) == substitute(Term.var(v), s)
        assert substitute(Term.var(v), compose(s, {})) == substitute(Term.var(v), s)


@settings(max_examples=100, deadline=None)
@given(terms())
def test_normalize_idempotent_and_equiv_reflexive(t):
    assert normalize(normalize(t)) == normalize(t)
    assert equiv(t, t)


@settings(max_examples=100, deadline=None)
@given(st.lists(terms(max_vars=3, pool=4), min_size=0, max_size=3), terms(max_vars=3, pool=4))
def test_determines_matches_brute_force(ts, s):
    support = sorted(set().union(*(t.support for t in ts), s.support))
    seen = {}
    ok = True
    for bits in itertools.product((0, 1), repeat=len(support)):
        a = dict(zip(support, bits))
        key = tuple(evaluate(t, a) for t in ts)
        if seen.setdefault(key, evaluate(s, a)) != evaluate(s, a):
            ok = False
    assert determines(ts, s) == ok
