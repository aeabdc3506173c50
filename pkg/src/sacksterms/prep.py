"""Coding data (nu, j, f), the block functions g, coherence, extension and reconstruction.

At a limit delta, row n and column m the coding reads the bits of the next
row at the positions zeta_0 < zeta_1 < ... of ``nu``; block k consists of the
indices j(k) <= i < j(k+1) and ``f`` turns the block's bits into one bit.
The identity coding (j(k) = k, f the identity on one bit) is the default.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .ordinals import Ordinal, addressable, limits_up_to
from .pairing import tau
from .terms import Term, union_support


class PrepHorizonError(LookupError):
    """A coding or sequence is not presented far enough."""


class ConflictError(ValueError):
    """Two nu families overlap more than a valid coding allows."""


class Nu:
    """A strictly increasing enumeration i -> zeta_i of a cofinal subset of a limit."""

    def __init__(self, element, name="nu", spec=None):
        self._element = element
        self.name = name
        self.spec = spec
        self._cache = {}

    def element(self, i):
        try:
            return self._cache[i]
        except KeyError:
            z = Ordinal.of(self._element(i))
            self._cache[i] = z
            return z

    def first(self, k):
        return [self.element(i) for i in range(k)]

    def index_of(self, alpha, horizon):
        """Index of ``alpha`` among the first ``horizon`` elements, else None."""
        lo, hi = 0, horizon
        while lo < hi:
            mid = (lo + hi) // 2
            z = self.element(mid)
            if z == alpha:
                return mid
            if z < alpha:
                lo = mid + 1
            else:
                hi = mid
        return None

    def to_json(self):
        if self.spec is None:
            return {"rule": self.name}
        return self.spec

    def __repr__(self):
        return f"Nu({self.name}: {self.first(4)}...)"


def affine_nu(base, exp, a, b, offset=0):
    """zeta_i = base + omega^exp * (a*i + b) + offset."""
    base, offset = Ordinal.of(base), Ordinal.of(offset)
    spec = {"base": base.to_json(), "formula": {"exp": exp, "a": a, "b": b}, "offset": offset.to_json()}
    return Nu(lambda i: base + Ordinal.omega_power(exp, a * i + b) + offset, f"affine{spec['formula']}", spec)


def identity_j(k):
    return k


def identity_f(k, bits):
    return bits[0]


@dataclass
class Coding:
    nu: Nu
    j: object = identity_j
    f: object = identity_f
    identity: bool = True

    def block(self, k):
        return range(self.j(k), self.j(k + 1))

    def apply(self, k, bits):
        return int(self.f(k, tuple(int(b) for b in bits))) & 1

    def apply_terms(self, k, terms):
        """g_k as a term: the block function applied to the block's terms."""
        if self.identity and len(terms) == 1:
            return terms[0]
        universe = union_support(terms)
        if not universe:
            return Term.const(self.apply(k, [t.bits for t in terms]))
        vals = np.stack([t.values_on(universe) for t in terms], axis=1)
        out = [self.apply(k, row) for row in vals]
        return Term.make(universe, out)


def default_nu(delta, n, m):
    """A disjoint-in-m, order type omega, cofinal subset of the limit ``delta``."""
    delta = Ordinal.of(delta)
    if not delta.is_limit:
        raise ValueError(f"{delta} is not a limit ordinal")
    e, c = delta.monomials[-1]
    head = Ordinal(delta.monomials[:-1]) + Ordinal.omega_power(e, c - 1)
    if e == 1:
        return Nu(lambda i: head + tau(m, i), f"default[{delta},{m}]")
    step = e - 1
    return Nu(lambda i: head + Ordinal.omega_power(step, i + 1) + tau(m, i), f"default[{delta},{m}]")


class PrepData:
    """Codings for every site (delta, n, m), from a rule plus explicit overrides."""

    def __init__(self, rule=None, overrides=None, height=None):
        self.rule = rule or (lambda delta, n, m: Coding(default_nu(delta, n, m)))
        self.overrides = dict(overrides or {})
        self.height = height
        self._cache = {}

    def site(self, delta, n, m):
        key = (Ordinal.of(delta), n, m)
        if key in self.overrides:
            return self.overrides[key]
        try:
            return self._cache[key]
        except KeyError:
            if self.height is not None and key[0] > self.height:
                raise PrepHorizonError(f"no coding at {key[0]} above height {self.height}")
            c = self.rule(*key)
            self._cache[key] = c
            return c

    def to_json(self):
        return {
            "rule": getattr(self.rule, "__name__", "default"),
            "overrides": [
                {"delta": d.to_json(), "n": n, "m": m, "nu": c.nu.to_json(), "identity": c.identity}
                for (d, n, m), c in sorted(self.overrides.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2]))
            ],
        }


def block_prep(size, f, nu_rule=default_nu):
    """Codings with blocks of ``size`` consecutive nu elements and block function ``f(bits)``."""
    return PrepData(lambda d, n, m: Coding(nu_rule(d, n, m), lambda k: size * k, lambda k, bits: f(bits), False))


class BitSequence:
    """A 0/1 sequence on the ordinals below ``height``: exceptions plus a default rule."""

    def __init__(self, height, exceptions=None, default=0):
        self.height = Ordinal.of(height)
        self.exceptions = {Ordinal.of(a): int(b) for a, b in (exceptions or {}).items()}
        self.default = default

    def __call__(self, alpha):
        alpha = Ordinal.of(alpha)
        if alpha >= self.height:
            raise PrepHorizonError(f"{alpha} is outside the domain below {self.height}")
        if alpha in self.exceptions:
            return self.exceptions[alpha]
        return self.default(alpha) if callable(self.default) else int(self.default)

    def modified(self, changes):
        """Finite modification: the same sequence with a few values replaced."""
        out = BitSequence(self.height, self.exceptions, self.default)
        out.exceptions.update({Ordinal.of(a): int(b) for a, b in changes.items()})
        return out

    def to_json(self):
        if callable(self.default):
            raise ValueError("rule-based defaults are not serializable")
        return {
            "height": self.height.to_json(),
            "exceptions": [[a.to_json(), b] for a, b in sorted(self.exceptions.items())],
            "default": self.default,
        }


def g_eval(prep, delta, n, m, k, eta):
    """The bit that block k of the coding at (delta, n, m) reads off ``eta``."""
    coding = prep.site(delta, n, m)
    bits = []
    for i in coding.block(k):
        z = coding.nu.element(i)
        if z >= delta:
            raise PrepHorizonError(f"nu element {z} is not below {delta}")
        bits.append(eta(z))
    return coding.apply(k, bits)


def g_term(coding, k, source):
    """Block k of ``coding`` applied to a row of terms ``source(alpha)``."""
    return coding.apply_terms(k, [source(coding.nu.element(i)) for i in coding.block(k)])


def check_cohere(prep, target, source, horizon, site):
    """Least k0 <= horizon such that every block in [k0, horizon] yields ``target``.

    ``target`` is a bit or a Term; ``source`` maps ordinals below delta to bits
    (or Terms).  Term form compares as functions, i.e. for all assignments.
    Returns None if block ``horizon`` itself disagrees.
    """
    delta, n, m = site
    coding = prep.site(delta, n, m)
    term_form = isinstance(target, Term)
    k0 = None
    for k in range(horizon, -1, -1):
        if term_form:
            ok = g_term(coding, k, source) == target
        else:
            ok = g_eval(prep, delta, n, m, k, source) == int(target)
        if not ok:
            break
        k0 = k
    return k0


@dataclass
class Extension:
    sequence: BitSequence
    sites: list
    collisions: dict = field(default_factory=dict)


def extension_sites(low, beta, horizon, target_height=None):
    """Coherence sites (delta', m) with low < delta' <= beta inside the horizon."""
    sites = []
    for d in limits_up_to(beta, horizon):
        if d <= low:
            continue
        for m in range(horizon):
            if target_height is not None and d + m >= target_height:
                continue
            sites.append((d, m))
    return sites


def extend_condition(prep, q, beta, horizon, row, targets, sites=None):
    """Extend row ``row`` (given below ``q.height``) to height ``beta``, cohering with ``targets``.

    ``targets(alpha)`` is the previous row's bit at alpha; the coding at
    (delta', row - 1, m) must reproduce ``targets(delta' + m)``.  Sites are
    filled one at a time; positions already taken are skipped (finitely many
    per site for a valid coding) and everything else defaults to 0.
    """
    beta = Ordinal.of(beta)
    if not beta > q.height:
        raise ValueError(f"{beta} does not exceed the height {q.height}")
    if sites is None:
        sites = extension_sites(q.height, beta, horizon, getattr(targets, "height", None))
    assigned = {}
    owner = {}
    collisions = {}
    for d, m in sites:
        coding = prep.site(d, row - 1, m)
        want = int(targets(d + m))
        for k in range(horizon):
            idxs = list(coding.block(k))
            zetas = [coding.nu.element(i) for i in idxs]
            fixed = {}
            for z in zetas:
                if z >= d:
                    raise PrepHorizonError(f"nu element {z} is not below {d}")
                if z < q.height:
                    fixed[z] = q(z)
                elif z in assigned:
                    if owner[z][0] == d and owner[z][1] != m:
                        raise ConflictError(f"codings at {d} for columns {owner[z][1]} and {m} share {z}")
                    fixed[z] = assigned[z]
            if fixed:
                collisions.setdefault((d, m), []).append(k)
                if k == horizon - 1:
                    raise ConflictError(f"site ({d}, {m}) still collides in its last block {k}")
            free = [z for z in zetas if z not in fixed]
            for bits in itertools.product((0, 1), repeat=len(free)):
                trial = dict(fixed)
                trial.update(zip(free, bits))
                if coding.apply(k, [trial[z] for z in zetas]) == want:
                    break
            else:
                trial = dict(fixed)
                trial.update((z, 0) for z in free)
            for z in free:
                assigned[z] = trial[z]
                owner[z] = (d, m)
    base = q

    def fill(alpha):
        return base(alpha) if alpha < base.height else 0

    return Extension(BitSequence(beta, assigned, fill), sites, collisions)


@dataclass
class Reconstruction:
    values: dict
    unstable: list


def reconstruct(prep, rows, sites, horizon, stable=3):
    """Recover each earlier row's value at delta' + m from the row above it.

    ``rows`` maps n -> the sequence eta_n.  For every n >= 1 present and every
    site, the blocks horizon - stable .. horizon - 1 are evaluated on eta_n;
    if they agree that value is eta_{n-1}(delta' + m), otherwise the site is
    reported unstable.
    """
    values = {}
    unstable = []
    for n in sorted(rows):
        if n < 1:
            continue
        for d, m in sites:
            got = {g_eval(prep, d, n - 1, m, k, rows[n]) for k in range(horizon - stable, horizon)}
            if len(got) == 1:
                values[(n - 1, d + m)] = got.pop()
            else:
                unstable.append((n - 1, d, m))
    return Reconstruction(values, unstable)


def read_positions(prep, sites, row, horizon, stable=3):
    """Every position reconstruction reads in row ``row``."""
    out = set()
    for d, m in sites:
        coding = prep.site(d, row - 1, m)
        for k in range(horizon - stable, horizon):
            out.update(coding.nu.element(i) for i in coding.block(k))
    return out


__all__ = [
    "Nu",
    "affine_nu",
    "Coding",
    "PrepData",
    "block_prep",
    "BitSequence",
    "g_eval",
    "g_term",
    "check_cohere",
    "extend_condition",
    "extension_sites",
    "reconstruct",
    "read_positions",
    "addressable",
]
