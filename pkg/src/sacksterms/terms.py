"""Boolean terms over the variables x_k, stored as truth tables.

A variable is a natural number ``k``.  The pair-indexed variable x_{i,j} is
the variable ``tau(i, j)``, so single-index and pair-index notation share one
namespace and the support order of a term is just the numeric order.

Truth tables are indexed by the assignment of the (sorted) support read as a
binary number whose least significant bit is the *last* support variable.
Every term produced here is normalized: its support contains exactly the
essential variables, so ``==`` on terms is extensional equality.
"""

from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from .pairing import tau, tau_inv

MAX_SUPPORT = 20


class HorizonExceeded(RuntimeError):
    """An operation would need a truth table over too many variables."""


class MissingVariable(KeyError):
    pass


class UndefinedVariable(KeyError):
    pass


def _check_size(n, cap=None):
    cap = MAX_SUPPORT if cap is None else cap
    if n > cap:
        raise HorizonExceeded(f"support of size {n} exceeds the cap of {cap} variables")


def _to_array(bits, n):
    nbytes = max(1, (1 << n) // 8 + 1)
    raw = np.frombuffer(bits.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[: 1 << n]


def _from_array(arr):
    return int.from_bytes(np.packbits(arr.astype(np.uint8), bitorder="little").tobytes(), "little")


def _index_bits(size):
    """Matrix of shape (2**size, size); row r is the assignment with index r."""
    idx = np.arange(1 << size, dtype=np.int64)
    shifts = np.arange(size - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def _reduce(support, arr):
    """Drop inessential variables from a table given as an array."""
    n = len(support)
    if n == 0:
        return (), arr
    cube = arr.reshape((2,) * n)
    keep = []
    # walk axes from the back so earlier axis numbers stay valid
    for axis in reversed(range(n)):
        lo = np.take(cube, 0, axis=axis)
        if np.array_equal(lo, np.take(cube, 1, axis=axis)):
            cube = lo
        else:
            keep.append(axis)
    keep.reverse()
    return tuple(support[a] for a in keep), np.ascontiguousarray(cube).reshape(-1)


@dataclass(frozen=True)
class Term:
    """A normalized boolean function of finitely many variables."""

    support: tuple
    bits: int

    @classmethod
    def make(cls, support, table):
        """Build and normalize a term.

        ``table`` may be a string of '0'/'1', a sequence of bits or a numpy
        array, laid out for ``support`` in the given (possibly unsorted) order.
        """
        support = tuple(int(v) for v in support)
        if len(set(support)) != len(support):
            raise ValueError(f"repeated variable in support {support}")
        _check_size(len(support))
        if isinstance(table, str):
            arr = np.frombuffer(table.encode(), dtype=np.uint8) - ord("0")
        else:
            arr = np.asarray(table, dtype=np.uint8)
        if arr.shape != (1 << len(support),):
            raise ValueError(f"table of length {arr.size} does not fit {len(support)} variables")
        if np.any(arr > 1):
            raise ValueError("table entries must be 0 or 1")
        order = sorted(range(len(support)), key=lambda p: support[p])
        if order != list(range(len(support))):
            cube = arr.reshape((2,) * len(support)).transpose(order)
            arr = cube.reshape(-1)
            support = tuple(support[p] for p in order)
        support, arr = _reduce(support, arr)
        return cls(support, _from_array(arr))

    @classmethod
    def from_function(cls, support, fn):
        """Tabulate ``fn(bits)`` where ``bits`` follow the order of ``support``."""
        rows = _index_bits(len(support))
        return cls.make(support, [fn(tuple(int(b) for b in row)) & 1 for row in rows])

    @classmethod
    def const(cls, value):
        return cls((), int(bool(value)))

    @classmethod
    def var(cls, k):
        return cls((int(k),), 0b10)

    @cached_property
    def array(self):
        arr = _to_array(self.bits, len(self.support))
        arr.setflags(write=False)
        return arr

    @property
    def table(self):
        return "".join("1" if b else "0" for b in self.array)

    @property
    def is_constant(self):
        return not self.support

    @property
    def value(self):
        """The constant value, or None for a non-constant term."""
        return self.bits if not self.support else None

    @property
    def variable(self):
        """The variable id if this is an identity term x_k, else None."""
        if len(self.support) == 1 and self.bits == 0b10:
            return self.support[0]
        return None

    def values_on(self, universe):
        """Values of this term for every assignment of the sorted ``universe``."""
        universe = tuple(universe)
        if universe == self.support:
            return self.array
        pos = {v: p for p, v in enumerate(universe)}
        u = len(universe)
        _check_size(u)
        idx = np.arange(1 << u, dtype=np.int64)
        sub = np.zeros(1 << u, dtype=np.int64)
        n = len(self.support)
        for q, v in enumerate(self.support):
            try:
                p = pos[v]
            except KeyError:
                raise MissingVariable(v) from None
            sub |= ((idx >> (u - 1 - p)) & 1) << (n - 1 - q)
        return self.array[sub]

    def __call__(self, assignment):
        return evaluate(self, assignment)

    def __invert__(self):
        return Term(self.support, _from_array(1 - self.array)) if self.support else Term.const(1 - self.bits)

    def __and__(self, other):
        return combine(np.bitwise_and, self, other)

    def __or__(self, other):
        return combine(np.bitwise_or, self, other)

    def __xor__(self, other):
        return combine(np.bitwise_xor, self, other)

    def __str__(self):
        if not self.support:
            return str(self.bits)
        if self.variable is not None:
            return "x(%d,%d)" % tau_inv(self.variable)
        if len(self.support) == 1:
            return "~x(%d,%d)" % tau_inv(self.support[0])
        names = ",".join("x(%d,%d)" % tau_inv(v) for v in self.support)
        return f"f[{names}]:{self.table}"

    def to_json(self):
        return {"support": list(self.support), "table": self.table}

    @classmethod
    def from_json(cls, data):
        return cls.make(data["support"], data["table"])


ZERO = Term.const(0)
ONE = Term.const(1)


def x(i, j):
    """The pair-indexed variable x_{i,j}."""
    return Term.var(tau(i, j))


def var(k):
    return Term.var(k)


def union_support(terms):
    out = set()
    for t in terms:
        out.update(t.support)
    return tuple(sorted(out))


def combine(fn, *terms):
    """Pointwise combination of terms by a vectorized bit function."""
    universe = union_support(terms)
    _check_size(len(universe))
    vals = [t.values_on(universe) for t in terms]
    out = np.asarray(fn(*vals), dtype=np.uint8) & 1
    if universe:
        support, arr = _reduce(universe, out)
        return Term(support, _from_array(arr))
    return Term.const(int(out.reshape(-1)[0]))


def normalize(t):
    support, arr = _reduce(tuple(t.support), _to_array(t.bits, len(t.support)))
    return Term(support, _from_array(arr))


def evaluate(t, assignment):
    """Value of ``t`` under ``assignment`` (a mapping variable id -> bit)."""
    idx = 0
    n = len(t.support)
    for p, v in enumerate(t.support):
        try:
            bit = assignment[v]
        except KeyError:
            raise MissingVariable(v) from None
        idx |= (int(bit) & 1) << (n - 1 - p)
    return (t.bits >> idx) & 1


def restrict(t, assignment):
    """Partially evaluate ``t``: fix the variables that ``assignment`` covers."""
    fixed = {v: assignment[v] for v in t.support if v in assignment}
    if not fixed:
        return t
    return substitute(t, {v: Term.const(b) for v, b in fixed.items()})


def image(phi, v, identity_tail=True):
    """The term a substitution assigns to variable ``v``."""
    if isinstance(phi, Mapping):
        out = phi.get(v)
    else:
        out = phi(v)
    if out is None:
        if identity_tail:
            return Term.var(v)
        raise UndefinedVariable(v)
    return out


def substitute(t, phi, identity_tail=True):
    """The term ``t o phi``: every variable v of t replaced by phi(v)."""
    if not t.support:
        return t
    images = [image(phi, v, identity_tail) for v in t.support]
    if all(s.variable == v for s, v in zip(images, t.support)):
        return t
    universe = union_support(images)
    _check_size(len(universe))
    n = len(images)
    if not universe:
        idx = sum(s.bits << (n - 1 - q) for q, s in enumerate(images))
        return Term.const((t.bits >> idx) & 1)
    idx = np.zeros(1 << len(universe), dtype=np.int64)
    for q, s in enumerate(images):
        idx |= s.values_on(universe).astype(np.int64) << (n - 1 - q)
    support, arr = _reduce(universe, t.array[idx])
    return Term(support, _from_array(arr))


class Composed:
    """The substitution ``v -> phi(v) o psi`` for rule-based phi or psi."""

    def __init__(self, phi, psi, identity_tail=True):
        self.phi = phi
        self.psi = psi
        self.identity_tail = identity_tail
        self._cache = {}

    def __call__(self, v):
        try:
            return self._cache[v]
        except KeyError:
            pass
        out = substitute(image(self.phi, v, self.identity_tail), self.psi, self.identity_tail)
        self._cache[v] = out
        return out

    def preimage(self, w):
        """Some k with self(k) == x_w, when both parts can tell."""
        inner = getattr(self.psi, "preimage", None)
        if inner is None:
            return None
        k = inner(w)
        pre = getattr(self.phi, "preimage", None)
        if k is None or pre is None:
            return None
        return pre(k)

    def determining_indices(self, v):
        """Ids k such that the terms self(k) determine x_v, if derivable.

        If psi's entries at some ids determine x_v, and phi maps some ids
        onto exactly those variables, the phi-preimages do the job.
        """
        inner = getattr(self.psi, "determining_indices", None)
        ids = inner(v) if inner is not None else [v]
        if ids is None:
            return None
        pre = getattr(self.phi, "preimage", None)
        if pre is None:
            return ids if isinstance(self.phi, Mapping) and not self.phi else None
        out = []
        for w in ids:
            k = pre(w)
            if k is None:
                return None
            out.append(k)
        return out


def compose(phi, psi, identity_tail=True):
    """Substitution with ``substitute(t, compose(phi, psi)) == substitute(substitute(t, phi), psi)``."""
    if isinstance(phi, Mapping) and isinstance(psi, Mapping):
        keys = set(phi) | set(psi)
        return {v: substitute(image(phi, v, identity_tail), psi, identity_tail) for v in sorted(keys)}
    return Composed(phi, psi, identity_tail)


def equiv(t, s):
    """Extensional equality, checked over the union of the two supports."""
    universe = union_support((t, s))
    return bool(np.array_equal(t.values_on(universe), s.values_on(universe)))


def determines(ts, s, cap=None):
    """Whether the joint values of ``ts`` always fix the value of ``s``."""
    ts = list(ts)
    universe = union_support(ts + [s])
    _check_size(len(universe), cap)
    target = s.values_on(universe)
    if not ts:
        return bool(np.all(target == target[0]))
    keys = np.stack([t.values_on(universe) for t in ts], axis=1)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    groups = inverse.max() + 1
    lo = np.full(groups, 2, dtype=np.int64)
    hi = np.full(groups, -1, dtype=np.int64)
    np.minimum.at(lo, inverse, target)
    np.maximum.at(hi, inverse, target)
    return bool(np.all(lo == hi))


def function_of(ts, s, cap=None):
    """The table pattern -> value of s, for ``ts`` that determine ``s``.

    Patterns are tuples of bits of ``ts`` in order; patterns that never occur
    are absent.  Returns None when ``ts`` do not determine ``s``.
    """
    ts = list(ts)
    universe = union_support(ts + [s])
    _check_size(len(universe), cap)
    target = s.values_on(universe)
    cols = [t.values_on(universe) for t in ts]
    table = {}
    for row in range(1 << len(universe)):
        key = tuple(int(c[row]) for c in cols)
        val = int(target[row])
        if table.setdefault(key, val) != val:
            return None
    return table


def conjunction(terms):
    return reduce(lambda a, b: a & b, terms, ONE)
