import itertools

import numpy as np
import pytest

from sacksterms import constructions as C
from sacksterms.conditions import Trivial, stack, term_stronger, validate_R
from sacksterms.ordinals import OMEGA, Ordinal
from sacksterms.pairing import tau_inv
from sacksterms.prep import check_cohere
from sacksterms.qstar import Mode, PresentedSubstitution, Window, validate_condition, verify_order_witness
from sacksterms.suites import random_presented, representable, schedule_cell
from sacksterms.terms import ZERO, substitute, x

SMALL = Window(rows=5, cols=12, coef_cap=3)


def pair(a, b):
    return (a + b) * (a + b + 1) // 2 + a


def code(seq):
    e = seq[0]
    for a in seq[1:]:
        e = pair(e, a)
    return 2 * pair(len(seq) - 1, e) + 1


def sequences_below(bound, max_len=60):
    """Every sequence of length >= 2 whose code is below ``bound``, by pruned search."""
    out = []

    def grow(seq, e):
        if len(seq) >= 2:
            if 2 * pair(len(seq) - 1, e) + 1 >= bound:
                return
            out.append(tuple(seq))
        if len(seq) >= max_len:
            return
        for a in itertools.count():
            nxt = pair(e, a) if seq else a
            if seq and 2 * pair(len(seq), nxt) + 1 >= bound:
                break
            if not seq and a >= bound:
                break
            grow(seq + [a], nxt)

    grow([], 0)
    return out


def forward_r_delta(rows, ks, bound):
    """Place every variable as the construction does, one variable at a time.

    x_{n0,m0} goes to row n0+1 at w*k + <n0,m0> for k > m0, and from a site
    (n0+l, <n0,m0,a2..al>) with k > m0 - l to row n0+l+1 at w*k + <..,j>.
    Everything else is 0.
    """
    cells = {}
    for seq in sequences_below(bound):
        n0, m0 = seq[0], seq[1]
        l = len(seq) - 2  # seq = <a_0..a_l, j> for l >= 1, or the base pair when l = 0
        row = n0 + l + 1
        if row >= rows:
            continue
        for k in range(ks):
            if (l == 0 and k > m0) or (l >= 1 and k > m0 - l):
                cells[(row, k, code(seq))] = x(n0, m0)
    return cells


def test_coding_examples():
    assert C.coding((0, 0)) == 5
    assert C.coding((1, 2)) == 75
    assert C.coding((0, 0, 0)) == 11
    assert C.decode(75) == (1, 2)
    with pytest.raises(C.NotACode):
        C.decode(4)
    with pytest.raises(ValueError):
        C.coding((3,))


def test_coding_injective_and_odd():
    seqs = sequences_below(5000)
    codes = [C.coding(s) for s in seqs]
    assert len(set(codes)) == len(codes)
    assert all(c % 2 == 1 for c in codes)
    assert all(C.decode(C.coding(s)) == s for s in seqs)
    assert codes == [code(s) for s in seqs]


def test_decode_partial_inverse():
    hits = [c for c in range(1, 400) if C.try_decode(c) is not None]
    assert all(C.coding(C.decode(c)) == c for c in hits)
    assert 1 not in hits  # length-1 sequences are not coded


def test_rdelta_examples():
    rd = C.build_r_delta()
    assert rd.entry(1, Ordinal.omega_times(1, 5)) == x(0, 0)
    assert rd.cell(2, 11) == x(0, 0)
    assert rd.sigma().cell(2, 11) == x(0, 0)
    assert rd.height == Ordinal.omega_power(2) + OMEGA


def test_rdelta_matches_forward_construction():
    rd = C.build_r_delta()
    rows, ks, bound = 8, 6, 700
    want = forward_r_delta(rows, ks, bound)
    for n in range(rows):
        for k in range(ks):
            for c in range(bound):
                got = rd.entry(n, Ordinal.omega_times(k, c))
                assert got == want.get((n, k, c), ZERO), (n, k, c)


def test_rdelta_sigma_sweep():
    rd = C.build_r_delta()
    for n in range(12):
        zeros = 0
        for m in range(200):
            t = rd.cell(n, m)
            if t == ZERO:
                zeros += 1
            else:
                i, j = tau_inv(t.variable)
                assert i + j < n
        assert zeros >= 10


def test_rdelta_nu_disjoint_per_level():
    rd = C.build_r_delta()
    for lam in [OMEGA, Ordinal.omega_times(2), Ordinal.omega_times(3), Ordinal.omega_power(2)]:
        for n in range(3):
            seen = {}
            for m in range(12):
                for z in rd.site(lam, n, m).nu.first(6):
                    assert seen.setdefault(z, m) == m


def test_rdelta_validates_and_perturbation_is_caught():
    rd = C.build_r_delta()
    assert validate_R(rd, SMALL)
    cell = (3, Ordinal.omega_power(2) + 2)
    rep = validate_R(rd.perturb({cell: ZERO}), SMALL)
    assert not rep
    assert rep.first.clause == "top-row"
    assert rep.first.cell == (cell[0], str(cell[1]))


def test_forward_reference_below_top_is_a_dependence_violation():
    rd = C.build_r_delta()
    cell = (1, Ordinal.omega_times(1, 3))
    rep = validate_R(rd.perturb({cell: x(1, 0)}), SMALL)
    assert any(v.clause == "dependence" and v.cell == (1, "w+3") for v in rep.violations)


def test_rmult_schedule():
    rm = C.build_r_mult()
    assert [rm.cell(1, m) for m in range(4)] == [ZERO, x(0, 0), ZERO, x(0, 0)]
    assert all(rm.cell(0, m) == ZERO for m in range(10))
    for n in range(7):
        for m in range(40):
            t = rm.cell(n, m)
            assert all(sum(tau_inv(v)) < n for v in t.support)
            assert t == schedule_cell(lambda k: x(*tau_inv(k)), n, m)


def test_rmult_is_valid_and_lists_each_variable_often():
    rm = C.build_r_mult()
    assert validate_R(rm, SMALL)
    for n in range(2, 6):
        counts = {}
        for m in range(200):
            t = rm.cell(n, m)
            if t != ZERO:
                counts[t.variable] = counts.get(t.variable, 0) + 1
        assert len(counts) == n * (n + 1) // 2
        assert min(counts.values()) >= 5


def test_builder_round_trips_the_schedule():
    q = C.matrix_to_condition(C.schedule_matrix(), SMALL)
    rm = C.build_r_mult()
    assert all(q.cell(n, m) == rm.cell(n, m) for n in range(6) for m in range(20))


def test_builder_on_negated_variable():
    phi = PresentedSubstitution(1, {0: ~x(0, 0)})
    q = C.matrix_to_condition(C.schedule_matrix(phi), SMALL)
    assert all(q.cell(n, m) == schedule_cell(phi, n, m) for n in range(SMALL.rows) for m in range(SMALL.cols))
    assert validate_R(q, SMALL)


def test_builder_rejects_input_that_loses_a_variable():
    # x00 -> not x01 makes x01 recoverable twice and x00 never: hypothesis (3)
    phi = PresentedSubstitution(2, {0: ~x(0, 1)})
    with pytest.raises(C.HypothesisViolation) as err:
        C.matrix_to_condition(C.schedule_matrix(phi), SMALL)
    assert err.value.clause == "3"
    assert not validate_condition(phi, Mode.QSTAR, SMALL)


class Rotated:
    """A generic matrix meeting the three hypotheses, presented only by cells and periods."""

    def __init__(self, zero_free_row=None):
        self.zero_free_row = zero_free_row

    def period(self, n):
        return n * (n + 1) // 2 + 1

    def offset(self, n):
        return 0

    def cell(self, n, m):
        size = self.period(n) - 1
        if n == self.zero_free_row:
            return x(*tau_inv(m % size))
        r = m % (size + 1)
        return ZERO if r == 0 else x(*tau_inv((r - 1 + n) % size))


def test_builder_on_generic_matrix():
    q = C.matrix_to_condition(Rotated(), SMALL)
    assert all(q.cell(n, m) == Rotated().cell(n, m) for n in range(SMALL.rows) for m in range(SMALL.cols))
    assert validate_R(q, SMALL)


def test_builder_rejects_zero_free_row():
    with pytest.raises(C.HypothesisViolation) as err:
        C.matrix_to_condition(Rotated(zero_free_row=3), SMALL)
    assert err.value.clause == "2"
    assert err.value.cell[0] == 3


def test_bookkeeping_blocks_compute_their_entries():
    rng = np.random.default_rng(8)
    phi = random_presented(rng, 6)
    q = C.matrix_to_condition(C.schedule_matrix(phi), SMALL)
    for n in range(4):
        for m in range(8):
            target = q.entry(n, OMEGA + m)
            k0 = check_cohere(q, target, lambda a, n=n: q.entry(n + 1, a), 6, (OMEGA, n, m))
            assert k0 is not None and k0 <= 3


def test_pipeline_with_identity():
    w = Window(rows=6, cols=12, coef_cap=3)
    res = C.gurke_pipeline(Trivial(), PresentedSubstitution.identity(), w)
    rd = C.build_r_delta().sigma()
    sq = res.q.sigma()
    assert all(sq.cell(n, m) == substitute(res.s_bar.cell(n, m), rd) for n in range(6) for m in range(12))
    assert C.certify_pipeline(res, w)


def test_pipeline_with_one_cell_change():
    w = Window(rows=6, cols=12, coef_cap=3)
    phi = PresentedSubstitution(3, {2: x(1, 0) ^ x(0, 0)})
    res = C.gurke_pipeline(C.build_r_copy(), phi, w)
    assert C.certify_pipeline(res, w)
    assert term_stronger(res.q, res.p, w)
    assert verify_order_witness(res.t_bar, res.q.sigma(), C.build_r_delta().sigma(), w)


def test_pipeline_over_rdelta_ends_in_rdelta():
    w = Window(rows=5, cols=10, coef_cap=3)
    phi = PresentedSubstitution(2, {1: ~x(0, 1)})
    res = C.gurke_pipeline(C.build_r_delta(), phi, w)
    assert res.q.q is C.build_r_delta()
    assert validate_R(res.q, w)


def test_stacking_rdelta_on_top_gives_qstar():
    rng = np.random.default_rng(21)
    rd = C.build_r_delta()
    for _ in range(8):
        s = stack(representable(rng), rd).sigma()
        assert validate_condition(s, Mode.QSTAR, Window(rows=8, cols=8))


def test_json_generators():
    from sacksterms.conditions import from_json

    phi = PresentedSubstitution(2, {0: ~x(0, 0)})
    built = C.matrix_to_condition(C.schedule_matrix(phi), SMALL)
    for cond in [C.build_r_delta(), C.build_r_mult(), C.build_r_copy(), built]:
        back = from_json(cond.to_json())
        assert all(back.cell(n, m) == cond.cell(n, m) for n in range(5) for m in range(12))
