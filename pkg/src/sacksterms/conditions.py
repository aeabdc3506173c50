"""Presented conditions: matrices of terms indexed by (n, alpha) with coding data.

A condition of height delta + omega assigns a term to every row n and every
ordinal alpha < delta + omega, and a coding (nu, j, f) to every site
(lambda, n, m) with lambda <= delta limit.  Entries are produced by rules on
demand and cached; nothing infinite is ever materialized, so every predicate
here is a verdict on a :class:`~sacksterms.qstar.Window`.
"""

from dataclasses import dataclass, field

from .ordinals import OMEGA, Ordinal, limits_up_to
from .ordinals import ZERO as ORD_ZERO
from .pairing import tau, tau_inv
from .prep import Coding, Nu, PrepHorizonError, check_cohere
from .qstar import MatrixView, Window
from .report import Report
from .terms import (
    ZERO,
    Composed,
    HorizonExceeded,
    Term,
    determines,
    evaluate,
    function_of,
    restrict,
    substitute,
)


class NotSplittable(ValueError):
    """The condition is not of the form p stacked with q' at the requested level."""


class OutOfHeight(LookupError):
    pass


def x(n, m):
    return Term.var(tau(n, m))


def window_ordinals(bound, w, include_limits=True):
    """Ordinals lambda + c below ``bound`` with lambda 0 or an addressable limit and c < w.cols."""
    bound = Ordinal.of(bound)
    bases = [ORD_ZERO] + (limits_up_to(bound, w.coef_cap, inclusive=False) if include_limits else [])
    out = []
    for lam in bases:
        for c in range(w.cols):
            a = lam + c
            if a < bound:
                out.append(a)
    return out


class RCondition:
    """Base class.  Subclasses implement ``_rule(n, alpha)`` and ``_coding(delta, n, m)``."""

    tag = "abstract"

    def __init__(self, delta):
        self.delta = Ordinal.of(delta)
        if not (self.delta.is_zero or self.delta.is_limit):
            raise ValueError(f"{self.delta} is neither 0 nor a limit")
        self._entries = {}
        self._sites = {}
        self._sigma = None

    @property
    def height(self):
        return self.delta + OMEGA

    def entry(self, n, alpha):
        alpha = Ordinal.of(alpha)
        key = (n, alpha)
        try:
            return self._entries[key]
        except KeyError:
            pass
        if alpha >= self.height:
            raise OutOfHeight(f"{alpha} is not below the height {self.height}")
        t = self._rule(n, alpha)
        self._entries[key] = t
        return t

    def cell(self, n, m):
        return self.entry(n, Ordinal.of(m))

    def top(self, n, alpha):
        """The top-row law: x_{n,m} at delta + m."""
        return x(n, int(alpha - self.delta))

    def site(self, delta, n, m):
        """Coding at the site (delta, n, m), for limits delta <= self.delta."""
        key = (Ordinal.of(delta), n, m)
        try:
            return self._sites[key]
        except KeyError:
            pass
        if not key[0].is_limit or key[0] > self.delta:
            raise PrepHorizonError(f"no coding at {key[0]} in a condition of height {self.height}")
        c = self._coding(*key)
        self._sites[key] = c
        return c

    # sigma hooks: subclasses override when they know where variables sit
    def sigma_preimage(self, w):
        return None

    def sigma_determining(self, v):
        return None

    def sigma_cells(self, v):
        return None

    def sigma(self):
        if self._sigma is None:
            self._sigma = MatrixView(
                self.cell,
                name=f"sigma({self.tag})",
                preimage=self.sigma_preimage,
                determining=self.sigma_determining,
                determining_cells=self.sigma_cells,
            )
        return self._sigma

    def perturb(self, changes):
        """The same condition with finitely many entries replaced."""
        return Perturbed(self, changes)

    def to_json(self):
        return {"height": self.height.to_json(), "generator": self.tag, **self._args_json()}

    def _args_json(self):
        return {}

    def __repr__(self):
        return f"{type(self).__name__}(height={self.height})"


class Trivial(RCondition):
    """The condition of height omega: its matrix is the identity square."""

    tag = "trivial"

    def __init__(self):
        super().__init__(0)

    def _rule(self, n, alpha):
        return self.top(n, alpha)

    def _coding(self, delta, n, m):  # pragma: no cover - no limits below omega
        raise PrepHorizonError("the trivial condition has no coding sites")

    def sigma_preimage(self, w):
        return w

    def sigma_determining(self, v):
        return [v]


def shifted_nu(nu, base):
    return Nu(lambda i: base + nu.element(i), f"{base}+{nu.name}")


def rebased_nu(nu, base):
    return Nu(lambda i: nu.element(i) - base, f"{nu.name}-{base}")


class Stacked(RCondition):
    """p stacked with q' on top: height delta_p + delta_q' + omega."""

    tag = "stackOf"

    def __init__(self, p, q):
        super().__init__(p.delta + q.delta)
        self.p = p
        self.q = q
        self.phi = q.sigma()

    def _rule(self, n, alpha):
        if alpha >= self.p.delta:
            return self.q.entry(n, alpha - self.p.delta)
        return substitute(self.p.entry(n, alpha), self.phi)

    def _coding(self, delta, n, m):
        if delta <= self.p.delta:
            return self.p.site(delta, n, m)
        c = self.q.site(delta - self.p.delta, n, m)
        return Coding(shifted_nu(c.nu, self.p.delta), c.j, c.f, c.identity)

    def _composed(self):
        return Composed(self.p.sigma(), self.q.sigma())

    def sigma_preimage(self, w):
        return self._composed().preimage(w)

    def sigma_determining(self, v):
        return self._composed().determining_indices(v)

    def _args_json(self):
        return {"children": [self.p.to_json(), self.q.to_json()]}


def stack(p, q):
    """The condition p stacked with q on top."""
    if isinstance(q, Trivial):
        return p
    if isinstance(p, Trivial):
        return q
    return Stacked(p, q)


class Perturbed(RCondition):
    """A base condition with a finite table of replaced entries."""

    tag = "perturbed"

    def __init__(self, base, changes):
        super().__init__(base.delta)
        self.base = base
        self.changes = {(n, Ordinal.of(a)): t for (n, a), t in changes.items()}

    def _rule(self, n, alpha):
        t = self.changes.get((n, alpha))
        return t if t is not None else self.base.entry(n, alpha)

    def _coding(self, delta, n, m):
        return self.base.site(delta, n, m)

    def _untouched(self, ids):
        cells = {(n, Ordinal.of(m)) for n, m in map(tau_inv, ids)}
        return ids if not cells & set(self.changes) else None

    def sigma_preimage(self, w):
        k = self.base.sigma_preimage(w)
        return k if k is not None and self._untouched([k]) else None

    def sigma_determining(self, v):
        ids = self.base.sigma_determining(v)
        return self._untouched(ids) if ids is not None else None

    def _args_json(self):
        return {
            "base": self.base.to_json(),
            "exceptions": [
                {"n": n, "alpha": a.to_json(), "term": t.to_json()}
                for (n, a), t in sorted(self.changes.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            ],
        }


class Restricted(RCondition):
    """The part of q at and above the limit ``base``, with ordinals re-based to start at 0."""

    tag = "restricted"

    def __init__(self, q, base):
        super().__init__(q.delta - base)
        self.source = q
        self.base = Ordinal.of(base)

    def _rule(self, n, alpha):
        return self.source.entry(n, self.base + alpha)

    def _coding(self, delta, n, m):
        c = self.source.site(self.base + delta, n, m)
        return Coding(rebased_nu(c.nu, self.base), c.j, c.f, c.identity)

    def _args_json(self):
        return {"base": self.base.to_json(), "source": self.source.to_json()}


class Lowered(RCondition):
    """The part of q below ``delta`` expressed through q's delta-row (split fallback)."""

    tag = "lowered"

    def __init__(self, q, delta, entries):
        super().__init__(delta)
        self.source = q
        self.known = entries

    def _rule(self, n, alpha):
        if alpha >= self.delta:
            return self.top(n, alpha)
        try:
            return self.known[(n, alpha)]
        except KeyError:
            raise HorizonExceeded(f"cell ({n}, {alpha}) lies outside the window the split was computed on") from None

    def _coding(self, delta, n, m):
        return self.source.site(delta, n, m)


def _invert(target, n, q, delta, w):
    """A term p with p o phi == target, phi_{l,k} = q(l, delta + k), using rows l < n only."""
    if target.is_constant:
        return target
    cands = {}
    for l in range(n):
        for k in range(w.cols):
            t = q.entry(l, delta + k)
            if t == target:
                return x(l, k)
            if not t.is_constant and set(t.support) & set(target.support):
                cands[(l, k)] = t
    chosen, terms, seen = [], [], set(target.support)
    changed = True
    while changed:
        changed = False
        for cell, t in cands.items():
            if cell in chosen or not set(t.support) & seen or len(seen | set(t.support)) > w.support_cap:
                continue
            chosen.append(cell)
            terms.append(t)
            seen |= set(t.support)
            changed = True
            if determines(terms, target):
                table = function_of(terms, target)
                ids = [tau(*c) for c in chosen]
                return Term.from_function(ids, lambda bits: table.get(bits, 0))
    return None


def split(q, delta, w=Window()):
    """Return (p, q') with stack(p, q') == q, cutting q at the limit ``delta``."""
    delta = Ordinal.of(delta)
    if delta > q.delta or not (delta.is_zero or delta.is_limit):
        raise ValueError(f"cannot cut a condition of height {q.height} at {delta}")
    if delta == q.delta:
        return q, Trivial()
    if delta.is_zero:
        return Trivial(), q
    if isinstance(q, Stacked):
        dp = q.p.delta
        if delta == dp:
            return q.p, q.q
        if delta < dp:
            a, b = split(q.p, delta, w)
            return a, stack(b, q.q)
        b, c = split(q.q, delta - dp, w)
        return stack(q.p, b), c
    top = Restricted(q, delta)
    entries = {}
    for n in range(w.rows):
        for alpha in window_ordinals(delta, w):
            p_entry = _invert(q.entry(n, alpha), n, q, delta, w)
            if p_entry is None:
                raise NotSplittable(f"entry ({n}, {alpha}) is not a function of the {delta}-row on the window")
            entries[(n, alpha)] = p_entry
    low = Lowered(q, delta, entries)
    phi = top.sigma()
    for (n, alpha), t in entries.items():
        if substitute(t, phi) != q.entry(n, alpha):  # pragma: no cover - guarded by construction
            raise NotSplittable(f"re-stacking fails at ({n}, {alpha})")
    return low, top


def validate_R(p, w=Window(), stable=3):
    """Window verdict on the clauses of a condition: top row, row dependence, coherence."""
    report = Report()
    for n in range(w.rows):
        for m in range(w.cols):
            t = p.entry(n, p.delta + m)
            if t != x(n, m):
                report.add("top-row", (n, str(p.delta + m)), f"{t} is not x({n},{m})")
    for alpha in window_ordinals(p.delta, w):
        for n in range(w.rows):
            try:
                t = p.entry(n, alpha)
            except HorizonExceeded as exc:
                report.soft("dependence", (n, str(alpha)), str(exc))
                continue
            bad = [tau_inv(v) for v in t.support if tau_inv(v)[0] >= n]
            if bad:
                report.add("dependence", (n, str(alpha)), f"{t} uses x{bad[0]}")
    levels = limits_up_to(p.delta, w.coef_cap) if not p.delta.is_zero else []
    certified = 0
    last = w.blocks - 1
    for lam in levels:
        for n in range(w.rows):
            for m in range(w.cols):
                try:
                    target = p.entry(n, lam + m)
                    k0 = check_cohere(p, target, lambda z, n=n: p.entry(n + 1, z), last, (lam, n, m))
                except (PrepHorizonError, HorizonExceeded) as exc:
                    report.soft("coherence", (n, str(lam), m), f"beyond the window: {exc}")
                    continue
                if k0 is None or last - k0 + 1 < stable:
                    report.add("coherence", (n, str(lam), m), f"blocks settle at {k0} of {last}")
                else:
                    certified += 1
    report.info["coherent_sites"] = certified
    report.info["levels"] = [str(a) for a in levels]
    return report


def _same_coding(a, b, blocks):
    if [a.block(k) for k in range(blocks)] != [b.block(k) for k in range(blocks)]:
        return False
    upto = a.j(blocks)
    if a.nu.first(upto) != b.nu.first(upto):
        return False
    if a.identity and b.identity:
        return True
    for k in range(blocks):
        size = len(a.block(k))
        if size > 12:
            continue
        for r in range(1 << size):
            bits = tuple((r >> (size - 1 - i)) & 1 for i in range(size))
            if a.apply(k, bits) != b.apply(k, bits):
                return False
    return True


def term_stronger(q, p, w=Window()):
    """Window verdict: q extends p's codings and p(n, alpha) o phi == q(n, alpha) below delta_p."""
    report = Report()
    if q is p:
        report.info["identical"] = True
        return report
    if q.delta < p.delta:
        report.add("height", None, f"{q.height} is below {p.height}")
        return report
    if not p.delta.is_zero:
        for lam in limits_up_to(p.delta, w.coef_cap):
            for n in range(w.rows):
                for m in range(w.cols):
                    try:
                        same = _same_coding(q.site(lam, n, m), p.site(lam, n, m), w.blocks)
                    except (PrepHorizonError, HorizonExceeded):
                        continue
                    if not same:
                        report.add("prep", (n, str(lam), m), "codings differ")
                        return report
    phi = MatrixView(lambda n, m: q.entry(n, p.delta + m), "phi")
    for alpha in window_ordinals(p.delta, w):
        for n in range(w.rows):
            lhs = substitute(p.entry(n, alpha), phi)
            rhs = q.entry(n, alpha)
            if lhs != rhs:
                report.add("term", (n, str(alpha)), f"{lhs} != {rhs}")
                return report
    return report


@dataclass
class Evaluation:
    values: dict = field(default_factory=dict)
    symbolic: dict = field(default_factory=dict)


def evaluate_under(p, b, w=Window()):
    """Evaluate every window cell under the finite assignment ``b`` (pairs or raw ids -> bit)."""
    assignment = {(tau(*k) if isinstance(k, tuple) else int(k)): int(v) for k, v in b.items()}
    out = Evaluation()
    for alpha in window_ordinals(p.height, w):
        for n in range(w.rows):
            t = restrict(p.entry(n, alpha), assignment)
            if t.is_constant:
                out.values[(n, alpha)] = t.value
            else:
                out.symbolic[(n, alpha)] = t
    return out


def determining_cells(p, n, m, w=Window()):
    """Cells of row n+1 at p's top level whose terms determine x_{n,m}, or None."""
    if p.delta.is_zero:
        return [(n, ORD_ZERO + m)]
    coding = p.site(p.delta, n, m)
    target = x(n, m)
    for k in range(w.blocks):
        cells = [(n + 1, coding.nu.element(i)) for i in coding.block(k)]
        try:
            if determines([p.entry(*c) for c in cells], target, w.support_cap):
                return cells
        except HorizonExceeded:
            return None
    return None


def dependence_ok(p, w=Window()):
    """Every window entry below delta depends only on earlier rows."""
    for alpha in window_ordinals(p.delta, w):
        for n in range(w.rows):
            if any(tau_inv(v)[0] >= n for v in p.entry(n, alpha).support):
                return False
    return True


def evaluate_window(p, assignment, w=Window()):
    """Total evaluation of the sigma window under a total assignment of its support."""
    return [[evaluate(p.cell(n, m), assignment) for m in range(w.cols)] for n in range(w.rows)]


_GENERATORS = {}


def register(tag):
    def deco(fn):
        _GENERATORS[tag] = fn
        return fn

    return deco


def from_json(data):
    """Rebuild a condition from its serialized form."""
    from . import constructions  # noqa: F401  (registers the built-in generators)

    tag = data["generator"]
    if tag == "trivial":
        return Trivial()
    if tag == "stackOf":
        p, q = (from_json(c) for c in data["children"])
        return stack(p, q)
    if tag == "perturbed":
        base = from_json(data["base"])
        changes = {(e["n"], Ordinal.from_json(e["alpha"])): Term.from_json(e["term"]) for e in data["exceptions"]}
        return Perturbed(base, changes)
    if tag == "restricted":
        return Restricted(from_json(data["source"]), Ordinal.from_json(data["base"]))
    try:
        return _GENERATORS[tag](data)
    except KeyError:
        raise ValueError(f"unknown generator {tag!r}") from None


__all__ = [
    "RCondition",
    "Trivial",
    "Stacked",
    "Perturbed",
    "Restricted",
    "NotSplittable",
    "OutOfHeight",
    "stack",
    "split",
    "validate_R",
    "term_stronger",
    "evaluate_under",
    "determining_cells",
    "window_ordinals",
    "from_json",
    "ZERO",
]
