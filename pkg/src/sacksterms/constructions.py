"""Explicit conditions: r^Delta, r^mult, the matrix-to-condition builder and the refinement pipeline.

Columns that code sequences use the iterated pairing fold
``<a0,...,al> = 2*tau(l, e) + 1`` with ``e = a0`` then ``e <- tau(e, a_i)``.
Codes are odd, so even columns are never codes; that leaves room for the
zero-pointing coding families.
"""

from dataclasses import dataclass
from math import isqrt

from .conditions import OMEGA, RCondition, register, stack, term_stronger, x
from .ordinals import Ordinal
from .pairing import tau, tau_inv
from .prep import Coding, Nu, PrepHorizonError
from .qstar import (
    PresentedSubstitution,
    Window,
    search_determining,
    verify_order_witness,
)
from .report import Report
from .terms import ZERO, Composed, HorizonExceeded, Term, function_of, image, substitute

OMEGA2 = Ordinal.omega_power(2)

# beyond this many bits a code is only known through a lower bound
CODE_BITS = 1024


class NotACode(ValueError):
    pass


class CodeTooLarge(HorizonExceeded):
    """A code (and everything indexed by it) exceeds the arithmetic horizon."""

    def __init__(self, lower, msg=""):
        super().__init__(msg or f"code exceeds 2^{lower.bit_length() - 1}")
        self.lower = lower


class HypothesisViolation(ValueError):
    """The input matrix fails a hypothesis of the builder."""

    def __init__(self, clause, cell, detail=""):
        super().__init__(f"hypothesis ({clause}) fails at {cell}: {detail}")
        self.clause = clause
        self.cell = cell


def coding(seq, max_bits=None):
    """The code of a finite sequence of length >= 2."""
    seq = tuple(int(a) for a in seq)
    if len(seq) < 2:
        raise ValueError(f"only sequences of length >= 2 are coded, got {seq}")
    e = seq[0]
    for a in seq[1:]:
        e = tau(e, a)
        if max_bits is not None and e.bit_length() > max_bits:
            raise CodeTooLarge(1 << max_bits)
    return 2 * tau(len(seq) - 1, e) + 1


def try_decode(c):
    if c < 0 or c % 2 == 0:
        return None
    l, e = tau_inv((c - 1) // 2)
    if l < 1:
        return None
    tail = []
    for _ in range(l):
        e, a = tau_inv(e)
        tail.append(a)
    return (e, *reversed(tail))


def decode(c):
    s = try_decode(c)
    if s is None:
        raise NotACode(f"{c} is not in the range of the coding")
    return s


@dataclass(frozen=True)
class CodedColumn:
    """A finite column kept as the sequence it codes (its integer value may be enormous)."""

    seq: tuple

    def value(self, max_bits=CODE_BITS):
        return coding(self.seq, max_bits)

    def __str__(self):
        return "<" + ",".join(map(str, self.seq)) + ">"


def column_sequence(col):
    if isinstance(col, CodedColumn):
        return col.seq
    return try_decode(int(col))


def omega_parts(alpha):
    """(k, c) with alpha = omega*k + c, for alpha < omega^2."""
    alpha = Ordinal.of(alpha)
    k = c = 0
    for e, coef in alpha.monomials:
        if e == 1:
            k = coef
        elif e == 0:
            c = coef
        else:
            raise ValueError(f"{alpha} is not below omega^2")
    return k, c


def rows_needed(k):
    """Least n with n(n+1)/2 > k: the first schedule row listing the variable with id k."""
    n = (isqrt(8 * k + 8) - 1) // 2
    while n * (n + 1) // 2 <= k:
        n += 1
    while n > 0 and (n - 1) * n // 2 > k:
        n -= 1
    return n


class _CodeGrid(RCondition):
    """Shared machinery for conditions of height omega^2 + omega built on the coding."""

    def __init__(self):
        super().__init__(OMEGA2)

    def _rule(self, n, alpha):
        if alpha >= self.delta:
            return self.top(n, alpha)
        k, c = omega_parts(alpha)
        return self._below(n, k, c)

    def cell(self, n, m):
        if isinstance(m, CodedColumn):
            key = (n, m)
            if key not in self._entries:
                self._entries[key] = self._below(n, 0, m)
            return self._entries[key]
        return super().cell(n, m)

    def _diagonal(self, n, k, col):
        """The pair (s0, s1) if omega*k + col on row n lies on a diagonal, else None."""
        s = column_sequence(col)
        if s is None:
            return None
        L = len(s) - 1
        if n == s[0] + L and self._reaches(s[0], s[1], n, k, L):
            return s
        return None

    def _level_coding(self, lam, n, m):
        k1, _ = omega_parts(lam)
        k = k1 - 1
        s = self._diagonal(n, k1, m)
        base = Ordinal.omega_times(k)
        if s is not None:
            nu = Nu(lambda j: base + coding(s + (j,)), f"diag[{lam},{n},{m}]")
        else:
            nu = Nu(lambda i: base + 2 * tau(m, i), f"zero[{lam},{n},{m}]")
        return Coding(nu)


class RDelta(_CodeGrid):
    """r^Delta: every entry is a variable x_{i,j} with i + j < n, or 0."""

    tag = "rDelta"

    def _reaches(self, s0, s1, n, k, L):
        return k + L - 1 > s1

    def _below(self, n, k, col):
        s = self._diagonal(n, k, col)
        return x(s[0], s[1]) if s is not None else ZERO

    def _coding(self, lam, n, m):
        if lam == self.delta:
            c = coding((n, m))
            return Coding(Nu(lambda i: Ordinal.omega_times(m + 1 + i, c), f"top[{n},{m}]"))
        return self._level_coding(lam, n, m)

    @staticmethod
    def carrier(w):
        """The cell of sigma(r^Delta) holding x_w, in symbolic form."""
        w0, w1 = tau_inv(w)
        if w1 >= CODE_BITS:
            # the column code has more than 2^w1 bits
            raise CodeTooLarge(1 << CODE_BITS, f"carrier of x_{w} is beyond any window")
        return w0 + w1 + 2, CodedColumn((w0, w1) + (0,) * (w1 + 1))

    def sigma_cells(self, v):
        return [self.carrier(v)]

    def sigma_preimage(self, w):
        n, col = self.carrier(w)
        return tau(n, col.value())

    def sigma_determining(self, v):
        return [self.sigma_preimage(v)]


class RCopy(RCondition):
    """A condition of height omega*2: row n+1 repeats x_{n,m} at the odd columns 2*tau(m,i)+1."""

    tag = "rCopy"

    def __init__(self):
        super().__init__(OMEGA)

    def _rule(self, n, alpha):
        if alpha >= self.delta:
            return self.top(n, alpha)
        c = int(alpha)
        if n == 0 or c % 2 == 0:
            return ZERO
        m, _ = tau_inv((c - 1) // 2)
        return x(n - 1, m)

    def _coding(self, lam, n, m):
        return Coding(Nu(lambda i: 2 * tau(m, i) + 1, f"copy[{n},{m}]"))

    def sigma_preimage(self, w):
        w0, w1 = tau_inv(w)
        return tau(w0 + 1, 2 * tau(w1, 0) + 1)

    def sigma_determining(self, v):
        return [self.sigma_preimage(v)]


class ScheduleComposite:
    """The cyclic schedule composed with a substitution psi.

    Row n of the schedule repeats the list [0, x_0, x_1, ..., x_{T-1}] of the
    variables with raw id below T = n(n+1)/2 (those x_{i,j} with i + j < n);
    the composite replaces x_k by psi(k).
    """

    def __init__(self, psi=None, name=None):
        self.psi = psi
        self.name = name or ("schedule" if psi is None else f"schedule∘{getattr(psi, 'name', 'φ')}")
        self._cache = {}

    def _psi(self, k):
        return Term.var(k) if self.psi is None else image(self.psi, k)

    @staticmethod
    def period(n):
        return n * (n + 1) // 2 + 1

    @staticmethod
    def offset(n):
        return 0

    def cell(self, n, m):
        r = int(m) % self.period(n)
        return ZERO if r == 0 else self._psi(r - 1)

    def __call__(self, k):
        return self.cell(*tau_inv(k))

    def zero_residues(self, n):
        return [0]

    def _inner_determining(self, v):
        if self.psi is None:
            return [v]
        hook = getattr(self.psi, "determining_indices", None)
        return hook(v) if hook is not None else None

    def preimage(self, w):
        if self.psi is None:
            k = w
        else:
            hook = getattr(self.psi, "preimage", None)
            k = hook(w) if hook is not None else None
        return None if k is None else tau(rows_needed(k), 1 + k)

    def determining_indices(self, v):
        ids = self._inner_determining(v)
        return None if ids is None else [tau(rows_needed(k), 1 + k) for k in ids]

    def threshold(self, v):
        """Least row n' >= v0 + 2 from which every row determines x_v."""
        v0, _ = tau_inv(v)
        try:
            ids = self._inner_determining(v)
        except CodeTooLarge as exc:
            return Beyond(rows_needed(exc.lower))
        if ids is None:
            return None
        return max(v0 + 2, rows_needed(max(ids)))

    def row_determining(self, n, v):
        ids = self._inner_determining(v)
        if ids is None or max(ids) >= self.period(n) - 1:
            return None
        ids = sorted(set(ids))
        table = function_of([self._psi(k) for k in ids], Term.var(v))
        return [1 + k for k in ids], table

    def to_json(self):
        if self.psi is None:
            return {"kind": "schedule"}
        if isinstance(self.psi, PresentedSubstitution):
            return {"kind": "schedule", "phi": self.psi.to_json()}
        raise ValueError("only schedule∘(presented substitution) inputs are serializable")


@dataclass(frozen=True)
class Beyond:
    """A threshold known only to be at least ``lower``."""

    lower: int


class GenericRows:
    """Builder access to an eventually periodic matrix given only by its cells."""

    def __init__(self, matrix, row_horizon=48, support_cap=16):
        if getattr(matrix, "period", None) is None or matrix.period(0) is None:
            raise HypothesisViolation("2", None, "rows must be presented as eventually periodic")
        self.matrix = matrix
        self.row_horizon = row_horizon
        self.support_cap = support_cap

    def cell(self, n, m):
        return self.matrix.cell(n, m)

    def period(self, n):
        return self.matrix.period(n)

    def offset(self, n):
        return self.matrix.offset(n)

    def zero_residues(self, n):
        o = self.offset(n)
        return [r for r in range(self.period(n)) if self.cell(n, o + r) == ZERO]

    def row_determining(self, n, v):
        o = self.offset(n)
        alphabet = {r: self.cell(n, o + r) for r in range(self.period(n))}
        found = search_determining(v, alphabet, self.support_cap)
        if found is None:
            return None
        found = sorted(found)
        return found, function_of([alphabet[r] for r in found], Term.var(v))

    def threshold(self, v):
        v0, _ = tau_inv(v)
        for n in range(v0 + 2, v0 + 2 + self.row_horizon):
            if self.row_determining(n, v) is not None:
                return n
        return None


def _rows_of(matrix):
    return matrix if hasattr(matrix, "row_determining") else GenericRows(matrix)


class _Book:
    """Level-omega book-keeping for the sites (n, m), reading row n + 1 of the input.

    Stage tau(m, k) gives site m its k-th block, always on columns beyond
    every column used so far in this row.
    """

    def __init__(self, cond, n):
        self.cond = cond
        self.n = n
        self.blocks = {}
        self.stage = 0
        self.used = -1

    def _step(self):
        m, k = tau_inv(self.stage)
        self.stage += 1
        rows, n1 = self.cond.rows, self.n + 1
        period, off = rows.period(n1), rows.offset(n1)
        target = self.cond.entry(self.n, OMEGA + m)
        if target == ZERO:
            zs = rows.zero_residues(n1)
            if not zs:
                raise HypothesisViolation("2", (n1, None), "row has no zero entries")
            base = max(self.used + 1, off)
            t = (base - off) // period
            cols = None
            while cols is None:
                cands = [off + r + period * t for r in zs if off + r + period * t >= base]
                cols = (min(cands),) if cands else None
                t += 1
            table = None
        else:
            v = target.variable
            found = rows.row_determining(n1, v)
            if found is None:
                raise HypothesisViolation("3", tau_inv(v), f"row {n1} does not determine it")
            residues, table = found
            t = max(0, (self.used - off - residues[0]) // period + 1)
            cols = tuple(off + r + period * t for r in residues)
        self.used = max(cols)
        self.blocks.setdefault(m, []).append((cols, table))

    def block(self, m, k):
        while len(self.blocks.get(m, ())) <= k:
            self._step()
        return self.blocks[m][k]

    def j(self, m, k):
        if k > 0:
            self.block(m, k - 1)
        return sum(len(b[0]) for b in self.blocks.get(m, [])[:k])

    def element(self, m, i):
        k = 0
        while True:
            cols, _ = self.block(m, k)
            if i < len(cols):
                return cols[i]
            i -= len(cols)
            k += 1

    def f(self, m, k, bits):
        _, table = self.block(m, k)
        return bits[0] if table is None else table.get(bits, 0)


class Built(_CodeGrid):
    """The condition of height omega^2 + omega whose finite columns are a given matrix."""

    tag = "builderOutput"

    def __init__(self, matrix):
        super().__init__()
        self.input = matrix
        self.rows = _rows_of(matrix)
        self._thresholds = {}
        self._books = {}

    def threshold(self, v):
        if v not in self._thresholds:
            self._thresholds[v] = self.rows.threshold(v)
        return self._thresholds[v]

    def in_I(self, s0, s1, row):
        t = self.threshold(tau(s0, s1))
        if t is None:
            raise HypothesisViolation("3", (s0, s1), "no row determines this variable")
        if isinstance(t, Beyond):
            if row < t.lower:
                return False
            raise CodeTooLarge(t.lower, f"row {row} may or may not determine x({s0},{s1})")
        return row >= t

    def _reaches(self, s0, s1, n, k, L):
        return self.in_I(s0, s1, n + k)

    def _below(self, n, k, col):
        if k == 0:
            return self.input.cell(n, col)
        s = self._diagonal(n, k, col)
        return x(s[0], s[1]) if s is not None else ZERO

    def _coding(self, lam, n, m):
        if lam == self.delta:
            t = self.threshold(tau(n, m))
            if t is None:
                raise HypothesisViolation("3", (n, m), "no row determines this variable")
            if isinstance(t, Beyond):
                raise PrepHorizonError(f"the coding of x({n},{m}) starts beyond omega*{t.lower - n - 1}")
            c = coding((n, m))
            start = max(1, t - n - 1)
            return Coding(Nu(lambda i: Ordinal.omega_times(start + i, c), f"top[{n},{m}]"))
        k1, _ = omega_parts(lam)
        if k1 > 1:
            return self._level_coding(lam, n, m)
        book = self._books.setdefault(n, _Book(self, n))
        return Coding(
            Nu(lambda i: book.element(m, i), f"book[{n},{m}]"),
            j=lambda k: book.j(m, k),
            f=lambda k, bits: book.f(m, k, bits),
            identity=False,
        )

    def sigma_preimage(self, w):
        hook = getattr(self.input, "preimage", None)
        return hook(w) if hook is not None else None

    def sigma_determining(self, v):
        hook = getattr(self.input, "determining_indices", None)
        return hook(v) if hook is not None else None

    def _args_json(self):
        return {"input": self.input.to_json()}


class RMult(Built):
    tag = "rMult"

    def __init__(self):
        super().__init__(ScheduleComposite())

    def _args_json(self):
        return {}


def schedule_matrix(psi=None):
    """The schedule, or the schedule composed with ``psi``."""
    return ScheduleComposite(psi)


def check_hypotheses(matrix, w=Window()):
    """Raise HypothesisViolation for the first failing builder hypothesis on the window."""
    rows = _rows_of(matrix)
    for n in range(w.rows):
        for m in range(w.cols):
            t = matrix.cell(n, m)
            for v in t.support:
                if tau_inv(v)[0] >= n:
                    raise HypothesisViolation("1", (n, m), f"{t} uses a variable of row {tau_inv(v)[0]}")
    for n in range(w.rows + 1):
        if not rows.zero_residues(n):
            raise HypothesisViolation("2", (n, None), "no zero entry in the row's period")
    for n in range(w.rows):
        for m in range(w.cols):
            try:
                t = rows.threshold(tau(n, m))
            except HorizonExceeded:
                continue
            if t is None:
                raise HypothesisViolation("3", (n, m), "no row determines this variable")
    return rows


def matrix_to_condition(matrix, w=Window(), check=True):
    """A condition q of height omega^2 + omega whose finite columns are ``matrix``."""
    if check:
        check_hypotheses(matrix, w)
    return Built(matrix)


_CACHE = {}


def build_r_delta():
    if "rDelta" not in _CACHE:
        _CACHE["rDelta"] = RDelta()
    return _CACHE["rDelta"]


def build_r_mult():
    if "rMult" not in _CACHE:
        _CACHE["rMult"] = RMult()
    return _CACHE["rMult"]


def build_r_copy():
    return RCopy()


@dataclass
class Pipeline:
    p: RCondition
    phi: object
    s_bar: object
    t_bar: object
    r: RCondition
    q: RCondition


def gurke_pipeline(p, phi, w=Window(), check=True):
    """From p and a substitution phi, the refinement t = s o phi and a condition q realizing it.

    s = sigma(p + r^mult + r^Delta), r is built from sigma(r^mult) o
    sigma(r^Delta) o phi, and q = p + r + r^Delta (``+`` meaning stacking).
    """
    rd, rm = build_r_delta(), build_r_mult()
    s_bar = stack(stack(p, rm), rd).sigma()
    t_bar = s_bar.compose(phi, name="t")
    psi = Composed(rd.sigma(), phi)
    psi.name = "σ(rΔ)∘φ"
    r = matrix_to_condition(schedule_matrix(psi), w, check)
    q = stack(stack(p, r), rd)
    return Pipeline(p, phi, s_bar, t_bar, r, q)


def certify_pipeline(res, w=Window()):
    """The three window certificates: q term-stronger than p, sigma(q) = t o sigma(r^Delta), order witness."""
    report = Report()
    report.merge(term_stronger(res.q, res.p, w), "stronger:")
    rd = build_r_delta().sigma()
    sq = res.q.sigma()
    for n in range(w.rows):
        for m in range(w.cols):
            lhs, rhs = sq.cell(n, m), substitute(res.t_bar.cell(n, m), rd)
            if lhs != rhs:
                report.add("sigma", (n, m), f"{lhs} != {rhs}")
                break
    report.merge(verify_order_witness(res.t_bar, sq, rd, w), "witness:")
    return report


@register("rDelta")
def _rdelta_from_json(data):
    return build_r_delta()


@register("rMult")
def _rmult_from_json(data):
    return build_r_mult()


@register("rCopy")
def _rcopy_from_json(data):
    return build_r_copy()


@register("builderOutput")
def _built_from_json(data):
    spec = data["input"]
    if spec.get("kind") != "schedule":
        raise ValueError(f"unsupported builder input {spec.get('kind')!r}")
    psi = PresentedSubstitution.from_json(spec["phi"]) if "phi" in spec else None
    return Built(ScheduleComposite(psi))


__all__ = [
    "coding",
    "decode",
    "try_decode",
    "CodedColumn",
    "NotACode",
    "CodeTooLarge",
    "HypothesisViolation",
    "RDelta",
    "RCopy",
    "Built",
    "RMult",
    "ScheduleComposite",
    "schedule_matrix",
    "check_hypotheses",
    "matrix_to_condition",
    "build_r_delta",
    "build_r_mult",
    "build_r_copy",
    "gurke_pipeline",
    "certify_pipeline",
    "Pipeline",
]
