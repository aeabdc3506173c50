"""Seeded verification suites, one per acceptance criterion.

Every suite takes a ``numpy.random.Generator`` plus size parameters and
returns a :class:`~sacksterms.report.Report`.  Sizes default to the full
acceptance sizes; a non-full :class:`Profile` scales them down.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import constructions as C
from .conditions import (
    Trivial,
    split,
    stack,
    term_stronger,
    validate_R,
    window_ordinals,
)
from .ordinals import Ordinal
from .pairing import tau, tau_inv, triangle_leq
from .prep import BitSequence, PrepData, extend_condition, read_positions, reconstruct
from .qstar import (
    Mode,
    PresentedSubstitution,
    Window,
    validate_condition,
    verify_order_witness,
)
from .report import Report
from .terms import ONE, ZERO, Term, compose, equiv, evaluate, substitute, x
from .trees import (
    ClippedTree,
    all_trees,
    canonical_terms,
    primed,
    random_subtree,
    random_tree,
    refinement_substitution,
    search_common_refinement,
    tree_of_terms,
    validate_tree,
)

FIGURE1_LEAVES = ["000", "001", "011", "110", "111"]
FIGURE1_SUB_LEAVES = ["110", "111"]


def figure1():
    """Canonical terms, refinement and substitution of the three-level example tree."""
    rep = Report()
    tree = ClippedTree.from_leaves(3, FIGURE1_LEAVES)
    if not validate_tree(tree).valid:
        rep.add("tree", None, "example tree invalid")
    t0, t1, t2 = canonical_terms(tree)
    expect = [
        Term.var(0),
        Term.from_function((0, 1), lambda b: b[1] if b[0] == 0 else 1),
        Term.from_function((0, 1, 2), lambda b: (b[2] if b[1] == 0 else 1) if b[0] == 0 else b[1]),
    ]
    for i, (got, want) in enumerate(zip((t0, t1, t2), expect)):
        if not equiv(got, want):
            rep.add("canonical", i, f"{got} != {want}")
    sub = ClippedTree.from_leaves(3, FIGURE1_SUB_LEAVES)
    wit = refinement_substitution(tree, sub)
    if wit.phi.get(0) != ONE:
        rep.add("phi", 0, f"phi_0 = {wit.phi.get(0)}")
    if wit.phi.get(1) != Term.var(primed(0)):
        rep.add("phi", 1, f"phi_1 = {wit.phi.get(1)}")
    if substitute(t2, wit.phi) != Term.var(primed(0)):
        rep.add("t2∘phi", 2, f"{substitute(t2, wit.phi)}")
    rep.info["phi"] = {k: str(v) for k, v in wit.phi.items()}
    return rep


def tau_suite(bound=100):
    rep = Report()
    if tau(1, 2) != 7:
        rep.add("tau", (1, 2), f"tau(1,2) = {tau(1, 2)}")
    n, m = np.meshgrid(np.arange(bound), np.arange(bound), indexing="ij")
    s = n + m
    grid = n + s * (s + 1) // 2
    flat = grid.ravel()
    if len(np.unique(flat)) != flat.size:
        rep.add("injective", None, "repeated value")
    # a bijection onto omega restricts to a bijection of the full diagonals onto an initial segment
    diag = grid[s < bound]
    if not np.array_equal(np.sort(diag), np.arange(diag.size)):
        rep.add("onto", None, "full diagonals do not fill an initial segment")
    for k in range(bound * bound):
        if tau(*tau_inv(k)) != k:
            rep.add("inverse", k, "tau o tau_inv != id")
            break
    # i+j < n and (i',j') below (i,j) imply i'+j' < n: diagonal sums never decrease along tau
    order = np.argsort(flat, kind="stable")
    if np.any(np.diff(s.ravel()[order]) < 0):
        rep.add("implication", None, "diagonal sum decreases along tau")
    box = 30
    a, b = np.meshgrid(np.arange(box), np.arange(box), indexing="ij")
    ta, sa = (a + (a + b) * (a + b + 1) // 2).ravel(), (a + b).ravel()
    below = ta[:, None] <= ta[None, :]
    bad = below & (sa[:, None] > sa[None, :])
    if bad.any():
        rep.add("implication", None, "brute-force counterexample")
    if not triangle_leq((0, 0), (5, 7)):
        rep.add("order", None, "(0,0) is not least")
    return rep


def roundtrip(rng, depth=4, samples=10_000, depths=(5, 6, 7, 8)):
    rep = Report()
    count = 0
    for tree in all_trees(depth):
        count += 1
        if tree_of_terms(canonical_terms(tree), depth) != tree:
            rep.add("roundtrip", tree.leaves, "exhaustive case")
            break
    rep.info["exhaustive"] = count
    for i in range(samples):
        d = depths[i % len(depths)]
        tree = random_tree(d, rng, split_prob=rng.uniform(0.2, 0.9))
        if tree_of_terms(canonical_terms(tree), d) != tree:
            rep.add("roundtrip", tree.leaves, "sampled case")
            break
    rep.info["sampled"] = samples
    return rep


def _random_term(rng, pool, max_vars):
    k = int(rng.integers(0, max_vars + 1))
    support = sorted(rng.choice(pool, size=k, replace=False).tolist()) if k else []
    return Term.make(support, rng.integers(0, 2, size=1 << len(support)))


def _random_sub(rng, pool, max_vars):
    return {int(v): _random_term(rng, pool, max_vars) for v in pool if rng.random() < 0.6}


def substitution_algebra(rng, triples=10_000, support=6):
    rep = Report()
    pool = np.arange(support)
    for i in range(triples):
        t = _random_term(rng, pool, support)
        phi, psi = _random_sub(rng, pool, 3), _random_sub(rng, pool, 3)
        lhs = substitute(substitute(t, phi), psi)
        if lhs != substitute(t, compose(phi, psi)):
            rep.add("associativity", i, str(t))
            break
        chi = _random_sub(rng, pool, 2)
        if compose(compose(phi, psi), chi) != compose(phi, compose(psi, chi)):
            rep.add("compose-associativity", i, "")
            break
        if substitute(t, {}) != t or compose({}, psi) != psi or compose(psi, {}) != psi:
            rep.add("identity", i, str(t))
            break
        a = {int(v): int(rng.integers(0, 2)) for v in pool}
        lifted = {v: evaluate(phi.get(v, Term.var(v)), a) for v in t.support}
        if evaluate(substitute(t, phi), a) != evaluate(t, lifted):
            rep.add("eval-substitute", i, str(t))
            break
    rep.info["triples"] = triples
    return rep


def _deep_tree(rng, depth):
    """A random clipped tree in which every branch meets at least two splitting nodes."""
    leaves = []

    def grow(s, splits):
        if len(s) == depth:
            leaves.append(s)
            return
        left = depth - len(s)
        if splits < 2 and left <= 2 - splits or rng.random() < 0.5:
            grow(s + "0", splits + 1)
            grow(s + "1", splits + 1)
        else:
            grow(s + str(int(rng.integers(0, 2))), splits)

    grow("", 0)
    return ClippedTree.from_leaves(depth, leaves)


def psi_shadow(rng, samples=1000, depths=(4, 5, 6)):
    rep = Report()
    for i in range(samples):
        d = depths[i % len(depths)]
        tree = random_tree(d, rng, split_prob=0.6)
        sub = random_subtree(tree, rng, keep_prob=0.6)
        wit = refinement_substitution(tree, sub)
        if not wit.agrees:
            rep.add("witness", (tree.leaves, sub.leaves), "t' != t o phi")
            break
        common = _deep_tree(rng, d)
        t1 = ClippedTree(d, common.nodes | random_tree(d, rng).nodes)
        t2 = ClippedTree(d, common.nodes | random_tree(d, rng).nodes)
        if search_common_refinement(t1, t2, 2) is None:
            rep.add("common-refinement", (t1.leaves, t2.leaves), "search failed")
            break
    rep.info["samples"] = samples
    return rep


def r_delta_suite(rows=10, coef_cap=50, qrows=30, horizon=200, cols=30):
    rep = Report()
    rd = C.build_r_delta()
    rep.merge(validate_R(rd, Window(rows=rows, cols=cols, coef_cap=coef_cap)), "validate:")
    rep.merge(validate_condition(rd.sigma(), Mode.QSTAR, Window(rows=qrows, cols=qrows)), "qstar:")
    for n in range(qrows):
        zeros = 0
        for m in range(horizon):
            t = rd.cell(n, m)
            if t == ZERO:
                zeros += 1
                continue
            i, j = tau_inv(t.variable)
            if i + j >= n:
                rep.add("diagonal", (n, m), f"{t} at row {n}")
        if zeros < 10:
            rep.add("zeros", n, f"{zeros} zeros below column {horizon}")
    return rep


def random_presented(rng, bound=12):
    """A random presented substitution valid as a Q_* condition: x_k o phi = x_k XOR f(earlier)."""
    table = {}
    for k in range(bound):
        lower = [v for v in range(k) if rng.random() < 0.3][:3]
        f = Term.make(lower, rng.integers(0, 2, size=1 << len(lower)))
        t = Term.var(k) ^ f
        if rng.random() < 0.5:
            t = ~t
        if t != Term.var(k):
            table[k] = t
    return PresentedSubstitution(bound, table)


def representable(rng, phi_bound=12):
    """A random member of the representable class (possibly stacked once)."""
    kind = int(rng.integers(0, 6))
    if kind == 0:
        return Trivial()
    if kind == 1:
        return C.build_r_delta()
    if kind == 2:
        return C.build_r_mult()
    if kind == 3:
        return C.build_r_copy()
    if kind == 4:
        return C.matrix_to_condition(C.schedule_matrix(random_presented(rng, phi_bound)), check=False)
    return stack(representable(rng, phi_bound), C.build_r_copy())


def _assignment_oracle(sp, sq, s, rng, w, trials=4):
    """sigma(p)∘sigma(q') against sigma(p + q') by evaluation under random assignments."""
    for n in range(w.rows):
        for m in range(w.cols):
            lhs = s.cell(n, m)
            pt = sp.cell(n, m)
            for _ in range(trials):
                inner = {v: sq(v) for v in pt.support}
                universe = sorted({u for t in inner.values() for u in t.support} | set(lhs.support))
                a = {u: int(rng.integers(0, 2)) for u in universe}
                lifted = {v: evaluate(t, a) for v, t in inner.items()}
                if evaluate(pt, lifted) != evaluate(lhs, a):
                    return (n, m)
    return None


def condition_algebra(rng, pairs=100, w=Window(rows=6, cols=12, coef_cap=3)):
    rep = Report()
    for i in range(pairs):
        p, q = representable(rng), representable(rng)
        s = stack(p, q)
        bad = _assignment_oracle(p.sigma(), q.sigma(), s.sigma(), rng, w)
        if bad is not None:
            rep.add("homomorphism", (i, bad), f"{p!r} / {q!r}")
            break
        a, b = split(s, p.delta, w)
        ordinals = window_ordinals(s.height, w)
        if any(stack(a, b).entry(n, al) != s.entry(n, al) for n in range(w.rows) for al in ordinals):
            rep.add("split-stack", i, f"{p!r} / {q!r}")
            break
        if any(a.entry(n, al) != p.entry(n, al) for n in range(w.rows) for al in window_ordinals(p.height, w)):
            rep.add("split-left", i, f"{p!r}")
            break
        if any(b.entry(n, al) != q.entry(n, al) for n in range(w.rows) for al in window_ordinals(q.height, w)):
            rep.add("split-right", i, f"{q!r}")
            break
    rep.info["pairs"] = pairs
    return rep


def schedule_cell(phi, n, m):
    """Independent recomputation of (schedule o phi)(n, m)."""
    r = m % (n * (n + 1) // 2 + 1)
    return ZERO if r == 0 else phi(r - 1)


def builder_suite(rng, samples=100, bound=12, w=Window()):
    rep = Report()
    for i in range(samples):
        phi = random_presented(rng, int(rng.integers(1, bound + 1)))
        if not validate_condition(phi, Mode.QSTAR, w):
            rep.add("sample", i, "generated phi is not a valid Q_* condition")
            break
        q = C.matrix_to_condition(C.schedule_matrix(phi), w)
        bad = [(n, m) for n in range(w.rows) for m in range(w.cols) if q.cell(n, m) != schedule_cell(phi, n, m)]
        if bad:
            rep.add("sigma", (i, bad[0]), repr(phi))
            break
        v = validate_R(q, w)
        if not v:
            rep.merge(v, f"validate[{i}]:")
            break
    rep.info["samples"] = samples
    return rep


def pipeline_suite(rng, samples=100, bound=12, w=Window(rows=8, cols=16, coef_cap=4)):
    rep = Report()
    bases = [Trivial(), C.build_r_delta(), C.build_r_copy(), C.build_r_mult()]
    rd = C.build_r_delta().sigma()
    for i in range(samples):
        phi = random_presented(rng, int(rng.integers(1, bound + 1)))
        p = bases[i % len(bases)]
        res = C.gurke_pipeline(p, phi, w)
        ts = term_stronger(res.q, res.p, w)
        ow = verify_order_witness(res.t_bar, res.q.sigma(), rd, w)
        if not ts or not ow:
            rep.merge(ts, f"stronger[{i}]:")
            rep.merge(ow, f"witness[{i}]:")
            break
    rep.info["samples"] = samples
    return rep


def reconstruction_suite(rng, rows=6, levels=5, cols=10, horizon=6, perturbations=10):
    rep = Report()
    prep = PrepData()
    beta = Ordinal.omega_times(levels + 1)
    sites = [(Ordinal.omega_times(k), m) for k in range(1, levels + 1) for m in range(cols)]
    addressable = [Ordinal.omega_times(k, c) for k in range(levels + 1) for c in range(40)]
    eta = {0: BitSequence(beta, {a: int(rng.integers(0, 2)) for a in addressable})}
    for n in range(1, rows):
        eta[n] = extend_condition(prep, BitSequence(0), beta, horizon, n, eta[n - 1], sites).sequence
    rec = reconstruct(prep, eta, sites, horizon)
    if rec.unstable:
        rep.add("stability", rec.unstable[0], "did not stabilize")
    for (n, alpha), bit in rec.values.items():
        if eta[n](alpha) != bit:
            rep.add("recovery", (n, str(alpha)), f"recovered {bit}, actual {eta[n](alpha)}")
            break
    rep.info["recovered"] = len(rec.values)
    for trial in range(perturbations):
        n = int(rng.integers(1, rows))
        read = read_positions(prep, sites, n, horizon)
        early = sorted(
            {prep.site(d, n - 1, m).nu.element(i) for d, m in sites for i in range(horizon - 3)} - read
        )
        picks = rng.choice(len(early), size=min(3, len(early)), replace=False)
        changed = dict(eta)
        changed[n] = eta[n].modified({early[i]: 1 - eta[n](early[i]) for i in picks})
        again = reconstruct(prep, changed, sites, horizon)
        if again.values != rec.values:
            rep.add("perturbation", trial, "recovery changed")
            break
    return rep


@dataclass
class Profile:
    """Seed, sizes and suite selection for a verification run."""

    seed: int = 0
    full: bool = False
    suites: list = field(default_factory=lambda: list(SUITES))
    rows: int = 10
    cols: int = 30
    coef_cap: int = 8
    depth: int = 4
    inject: str = ""


def _sizes(profile):
    full = profile.full
    return {
        "figure1": {},
        "tau": {},
        "roundtrip": {"depth": profile.depth, "samples": 10_000 if full else 500},
        "algebra": {"triples": 10_000 if full else 500},
        "psi": {"samples": 1000 if full else 100},
        "rdelta": {"coef_cap": 50 if full else 8},
        "stack": {"pairs": 100 if full else 10},
        "builder": {"samples": 100 if full else 5, "w": Window(profile.rows, profile.cols, profile.coef_cap)},
        "pipeline": {"samples": 100 if full else 5},
        "reconstruct": {},
    }


SUITES = {
    "figure1": lambda rng, **kw: figure1(),
    "tau": lambda rng, **kw: tau_suite(),
    "roundtrip": roundtrip,
    "algebra": substitution_algebra,
    "psi": psi_shadow,
    "rdelta": lambda rng, **kw: r_delta_suite(**kw),
    "stack": condition_algebra,
    "builder": builder_suite,
    "pipeline": pipeline_suite,
    "reconstruct": reconstruction_suite,
}


def _injected(name, profile):
    """Deliberately broken fixtures, to exercise failure reporting."""
    if profile.inject == "rdelta-top" and name == "rdelta":
        bad = C.build_r_delta().perturb({(3, Ordinal.omega_power(2) + 2): ZERO})
        return validate_R(bad, Window(rows=5, cols=5, coef_cap=2))
    return None


def run_suite(profile=Profile()):
    """Run the selected suites; returns (report dict, exit code)."""
    sizes = _sizes(profile)
    results = {}
    code = 0
    for name in sorted(profile.suites):
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
        # the pipeline replays the builder's stream so both see the same phi sample
        stream = "builder" if name == "pipeline" else name
        rng = np.random.default_rng([profile.seed, sorted(SUITES).index(stream)])
        start = time.perf_counter()
        rep = _injected(name, profile)
        if rep is None:
            rep = SUITES[name](rng, **sizes[name])
        rep.info["seconds"] = round(time.perf_counter() - start, 3)
        results[name] = rep
        if not rep.ok:
            code = 1
    out = {
        "seed": profile.seed,
        "full": profile.full,
        "ok": code == 0,
        "suites": {k: _stable(v.to_json()) for k, v in sorted(results.items())},
    }
    return out, code


def _stable(d):
    d = dict(d)
    d["info"] = {k: v for k, v in d["info"].items() if k != "seconds"}
    return d


__all__ = ["Profile", "run_suite", "SUITES", "figure1", "random_presented", "representable", "x"]
