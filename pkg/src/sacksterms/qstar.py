"""Squares of terms: presented substitutions, windows, and Q_*-style validation.

A square of terms (t_{n,m}) doubles as a substitution sending the variable
x_{n,m} (id ``tau(n, m)``) to t_{n,m}.  Two presentations are used:

* :class:`PresentedSubstitution` -- a finite table below a bound N and the
  identity everywhere else.  Validation of this class is exact.
* :class:`MatrixView` -- any rule ``(n, m) -> Term``.  Claims about such a
  matrix are checked on a :class:`Window`; "determined by finitely many
  entries" is confirmed by search or by a structural hint the rule provides.
"""

from dataclasses import dataclass
from enum import Enum

from .pairing import tau, tau_inv, triangle_leq
from .report import Report
from .terms import (
    MAX_SUPPORT,
    ZERO,
    Composed,
    HorizonExceeded,
    Term,
    determines,
    substitute,
)

__all__ = [
    "tau",
    "tau_inv",
    "triangle_leq",
    "Window",
    "Mode",
    "PresentedSubstitution",
    "MatrixView",
    "validate_condition",
    "verify_order_witness",
]


@dataclass(frozen=True)
class Window:
    """Finite scope of a verdict about an infinite object."""

    rows: int = 10
    cols: int = 30
    coef_cap: int = 8
    support_cap: int = MAX_SUPPORT
    blocks: int = 6

    def __post_init__(self):
        for name in ("rows", "cols", "coef_cap", "support_cap", "blocks"):
            if getattr(self, name) <= 0:
                raise ValueError(f"window {name} must be positive")

    def cells(self):
        return [(n, m) for n in range(self.rows) for m in range(self.cols)]


class Mode(Enum):
    SSTAR = "sstar"
    QSTAR = "qstar"
    QSTARSTAR = "qstarstar"


def cell_of(matrix, n, m):
    cell = getattr(matrix, "cell", None)
    return cell(n, m) if cell is not None else matrix(tau(n, m))


class PresentedSubstitution:
    """Finite table below ``bound`` plus the identity tail."""

    tail = "identity"

    def __init__(self, bound, table=None):
        self.bound = int(bound)
        self.table = dict(table or {})
        for k in self.table:
            if not 0 <= k < self.bound:
                raise ValueError(f"table key {k} outside [0, {self.bound})")

    @classmethod
    def identity(cls):
        return cls(0)

    def __call__(self, k):
        return self.table.get(k) or Term.var(k)

    def cell(self, n, m):
        return self(tau(n, m))

    def preimage(self, w):
        if w >= self.bound:
            return w
        target = Term.var(w)
        for k in range(self.bound):
            if self(k) == target:
                return k
        return None

    def _entries_for(self, v):
        ids = list(range(self.bound))
        extra = {u for k in ids for u in self(k).support if u >= self.bound}
        return ids + sorted(extra)

    def determining_indices(self, v, cap=None):
        """Smallest-found list of ids whose entries determine x_v; None if none exists.

        Exact: the identity tail hands every variable >= N to itself, and
        entries below N only involve variables they share with the table.
        """
        target = Term.var(v)
        if v >= self.bound and not any(v in self(k).support for k in range(self.bound)):
            return [v]
        ids = self._entries_for(v)
        if v not in ids:
            ids.append(v)
        if not determines([self(k) for k in ids], target, cap):
            return None
        # drop entries one at a time while the rest still determine x_v
        for k in list(reversed(ids)):
            trial = [i for i in ids if i != k]
            if determines([self(i) for i in trial], target, cap):
                ids = trial
        return ids

    def compose(self, other):
        """The presented substitution ``self o other`` (other also presented)."""
        bound = max(self.bound, other.bound)
        table = {}
        for k in range(bound):
            t = substitute(self(k), other)
            if t != Term.var(k):
                table[k] = t
        return PresentedSubstitution(bound, table)

    def to_json(self):
        return {
            "N": self.bound,
            "table": {str(k): t.to_json() for k, t in sorted(self.table.items())},
            "tail": self.tail,
        }

    @classmethod
    def from_json(cls, data):
        if data.get("tail", "identity") != "identity":
            raise ValueError(f"unsupported tail {data['tail']!r}")
        table = {int(k): Term.from_json(v) for k, v in data.get("table", {}).items()}
        return cls(int(data["N"]), table)

    def __repr__(self):
        body = ", ".join(f"{k}: {t}" for k, t in sorted(self.table.items()))
        return f"PresentedSubstitution(N={self.bound}, {{{body}}})"


class MatrixView:
    """A square of terms given by a rule, usable as a substitution.

    ``preimage(w)`` (optional) returns some id k whose entry is exactly x_w;
    ``determining(v)`` (optional) returns ids whose entries determine x_v;
    ``determining_cells(v)`` (optional) returns cells (n, col) instead; a
    column may be any object the rule accepts, which lets astronomically large
    columns stay symbolic;
    ``period(n)`` (optional) is the period of row n from column ``offset(n)`` on.
    """

    def __init__(
        self, rule, name="matrix", preimage=None, determining=None, period=None, offset=None, determining_cells=None
    ):
        self.rule = rule
        self.name = name
        self._preimage = preimage
        self._determining = determining
        self._cells = determining_cells
        self._period = period
        self._offset = offset
        self._cache = {}

    def cell(self, n, m):
        key = (n, m)
        try:
            return self._cache[key]
        except KeyError:
            pass
        t = self.rule(n, m)
        self._cache[key] = t
        return t

    def __call__(self, k):
        return self.cell(*tau_inv(k))

    def preimage(self, w):
        return self._preimage(w) if self._preimage else None

    def determining_indices(self, v):
        return self._determining(v) if self._determining else None

    def determining_cells(self, v):
        return self._cells(v) if self._cells else None

    def period(self, n):
        return self._period(n) if self._period else None

    def offset(self, n):
        return self._offset(n) if self._offset else 0

    def compose(self, psi, name=None):
        """The square ``self o psi``: every entry gets ``psi`` substituted in."""
        comp = Composed(self, psi)
        return MatrixView(
            lambda n, m: substitute(self.cell(n, m), psi),
            name=name or f"{self.name}∘{getattr(psi, 'name', 'φ')}",
            preimage=comp.preimage if getattr(psi, "preimage", None) else None,
            determining=comp.determining_indices,
            period=self._period,
            offset=self._offset,
        )

    def window(self, rows, cols):
        return [[self.cell(n, m) for m in range(cols)] for n in range(rows)]

    def __repr__(self):
        return f"MatrixView({self.name})"


IDENTITY = MatrixView(lambda n, m: Term.var(tau(n, m)), "identity", preimage=lambda w: w, determining=lambda v: [v])


def depends_on_predecessors(term, k):
    """Clause (i) of Q_*: only variables with id <= k (tau order)."""
    return all(v <= k for v in term.support)


def depends_on_lower_rows(term, n, strict=True):
    rows = [tau_inv(v)[0] for v in term.support]
    return all(i < n for i in rows) if strict else all(i <= n for i in rows)


def search_determining(v, candidates, cap=MAX_SUPPORT):
    """Greedy search for cells among ``candidates`` (cell -> Term) determining x_v.

    Grows a set of cells connected to x_v through shared variables and stops
    as soon as they determine it.  Returns a list of cells or None.
    """
    target = Term.var(v)
    chosen, terms, seen_vars = [], [], {v}
    pool = list(candidates.items())
    changed = True
    while changed:
        changed = False
        for cell, t in pool:
            if cell in chosen or t.is_constant or not (seen_vars & set(t.support)):
                continue
            if len(seen_vars | set(t.support)) > cap:
                continue
            chosen.append(cell)
            terms.append(t)
            seen_vars |= set(t.support)
            changed = True
            if determines(terms, target):
                return chosen
    return None


def _matrix_cells(phi, w, mode):
    if mode is Mode.SSTAR:
        ks = range(max(w.cols, getattr(phi, "bound", 0)))
        return [(k, tau_inv(k)) for k in ks]
    cells = set(w.cells())
    bound = getattr(phi, "bound", 0)
    cells.update(tau_inv(k) for k in range(bound))
    return sorted(((tau(*c), c) for c in cells))


def validate_condition(phi, mode, w=Window(), search=None):
    """Window verdict on ``phi`` as an S*, Q_* or Q_** condition.

    ``search`` is the (rows, cols) region scanned for determining entries when
    the presentation offers no structural hint; default is the window itself.
    """
    mode = Mode(mode)
    report = Report()
    cells = _matrix_cells(phi, w, mode)
    report.info["cells"] = len(cells)
    if mode is Mode.QSTARSTAR:
        return _validate_qstarstar(phi, w, report)
    exact = isinstance(phi, PresentedSubstitution)
    for k, cell in cells:
        t = phi(k)
        if not depends_on_predecessors(t, k):
            report.add("dependence", cell, f"{t} uses a variable after {cell}")
    rows, cols = search or (w.rows, w.cols)
    index = None
    confirmed = 0
    for k, cell in cells:
        terms = _claimed_terms(phi, k)
        if terms is not None:
            try:
                good = determines(terms, Term.var(k), w.support_cap)
            except HorizonExceeded:
                good = False
            if good:
                confirmed += 1
                continue
            report.add("determination", cell, "the claimed entries do not determine it")
            continue
        if exact:
            report.add("determination", cell, "no set of entries determines this variable")
            continue
        if index is None:
            index = {(n, m): cell_of(phi, n, m) for n in range(rows) for m in range(cols)}
        if search_determining(k, index, w.support_cap) is not None:
            confirmed += 1
        else:
            report.soft("determination", cell, "not determined inside the search region")
    report.info["determined"] = confirmed
    return report


def _claimed_terms(phi, k):
    """Entries the presentation names as determining x_k, or None."""
    try:
        hook = getattr(phi, "determining_cells", None)
        cells = hook(k) if hook is not None else None
        if cells is not None:
            return [cell_of(phi, n, m) for n, m in cells]
        hook = getattr(phi, "determining_indices", None)
        ids = hook(k) if hook is not None else None
        if ids is not None:
            return [phi(i) for i in ids]
    except HorizonExceeded:
        pass
    return None


def _validate_qstarstar(phi, w, report):
    cells = w.cells()
    occurrences = {}
    zeros = {}
    for n, m in cells:
        t = cell_of(phi, n, m)
        if not depends_on_lower_rows(t, n):
            report.add("row-dependence", (n, m), f"{t} uses a variable of row >= {n}")
        if t == ZERO:
            zeros[n] = zeros.get(n, 0) + 1
        elif t.variable is not None:
            occurrences.setdefault(t.variable, {}).setdefault(n, 0)
            occurrences[t.variable][n] += 1
    for n, m in cells:
        rows = occurrences.get(tau(n, m), {})
        if sum(1 for c in rows.values() if c >= 2) < 2:
            report.soft("infinitely-often", (n, m), f"occurrence rows in window: {rows}")
    report.info["zeros_per_row"] = zeros
    return report


def verify_order_witness(s, t, phi, w=Window()):
    """Check t_{n,m} == s_{n,m} o phi on every window cell; the report names the first failure."""
    report = Report()
    for n, m in w.cells():
        lhs = cell_of(t, n, m)
        rhs = substitute(cell_of(s, n, m), phi)
        if lhs != rhs:
            report.add("order-witness", (n, m), f"{lhs} != {rhs}")
            break
    return report
