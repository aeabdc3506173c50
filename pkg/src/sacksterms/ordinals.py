"""Ordinals below omega^omega in Cantor normal form."""

import itertools
import re
from dataclasses import dataclass
from functools import total_ordering


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    """omega^e1*c1 + ... + omega^ek*ck with e1 > ... > ek and all ci > 0."""

    monomials: tuple = ()

    def __post_init__(self):
        prev = None
        for e, c in self.monomials:
            if e < 0 or c <= 0:
                raise ValueError(f"bad monomial ({e}, {c})")
            if prev is not None and e >= prev:
                raise ValueError(f"exponents must strictly decrease: {self.monomials}")
            prev = e

    @classmethod
    def of(cls, value):
        if isinstance(value, Ordinal):
            return value
        if isinstance(value, int):
            if value < 0:
                raise ValueError("negative ordinal")
            return cls(((0, value),)) if value else cls()
        raise TypeError(f"cannot make an ordinal from {value!r}")

    @classmethod
    def omega_times(cls, k, plus=0):
        """omega*k + plus."""
        return cls.of(plus) if k == 0 else cls(((1, k),)) + cls.of(plus)

    @classmethod
    def omega_power(cls, e, coef=1):
        if coef == 0:
            return cls()
        return cls(((e, coef),))

    # comparisons are lexicographic on the monomial list
    def _key(self):
        return [(e, c) for e, c in self.monomials]

    def __lt__(self, other):
        other = Ordinal.of(other)
        for (e1, c1), (e2, c2) in zip(self.monomials, other.monomials):
            if e1 != e2:
                return e1 < e2
            if c1 != c2:
                return c1 < c2
        return len(self.monomials) < len(other.monomials)

    def __eq__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other) if other >= 0 else None
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.monomials == other.monomials

    def __hash__(self):
        return hash(self.monomials)

    def __add__(self, other):
        other = Ordinal.of(other)
        if not other.monomials:
            return self
        lead = other.monomials[0][0]
        head = [(e, c) for e, c in self.monomials if e > lead]
        same = [c for e, c in self.monomials if e == lead]
        first = (lead, other.monomials[0][1] + (same[0] if same else 0))
        return Ordinal(tuple(head) + (first,) + other.monomials[1:])

    def __radd__(self, other):
        return Ordinal.of(other) + self

    def __sub__(self, other):
        """Left subtraction: the unique c with ``other + c == self``."""
        other = Ordinal.of(other)
        if other > self:
            raise ValueError(f"{other} exceeds {self}")
        mons = list(self.monomials)
        for i, ((e1, c1), (e2, c2)) in enumerate(zip(mons, other.monomials)):
            if (e1, c1) == (e2, c2):
                continue
            # first difference: other is smaller here, so other's rest is absorbed
            if e1 == e2:
                return Ordinal(((e1, c1 - c2),) + tuple(mons[i + 1 :]))
            return Ordinal(tuple(mons[i:]))
        return Ordinal(tuple(mons[len(other.monomials) :]))

    @property
    def is_zero(self):
        return not self.monomials

    @property
    def is_limit(self):
        return bool(self.monomials) and self.monomials[-1][0] > 0

    @property
    def finite_part(self):
        if self.monomials and self.monomials[-1][0] == 0:
            return self.monomials[-1][1]
        return 0

    @property
    def is_finite(self):
        return not self.monomials or (len(self.monomials) == 1 and self.monomials[0][0] == 0)

    @property
    def degree(self):
        """Leading exponent (0 for finite ordinals)."""
        return self.monomials[0][0] if self.monomials else 0

    def __int__(self):
        if not self.is_finite:
            raise ValueError(f"{self} is infinite")
        return self.finite_part

    def __str__(self):
        if not self.monomials:
            return "0"
        parts = []
        for e, c in self.monomials:
            if e == 0:
                parts.append(str(c))
                continue
            base = "w" if e == 1 else f"w^{e}"
            parts.append(base if c == 1 else f"{base}*{c}")
        return "+".join(parts)

    __repr__ = __str__

    def to_json(self):
        return [[e, c] for e, c in self.monomials]

    @classmethod
    def from_json(cls, data):
        if isinstance(data, int):
            return cls.of(data)
        if isinstance(data, str):
            return parse_ordinal(data)
        return cls(tuple((int(e), int(c)) for e, c in data))


ZERO = Ordinal()
OMEGA = Ordinal(((1, 1),))
OMEGA2 = Ordinal(((2, 1),))

_MONO = re.compile(r"^(?:(\d+)|w(?:\^(\d+))?(?:\*(\d+))?)$")


def parse_ordinal(text):
    """Parse ``w^2*3+w+4`` style notation (``ω`` is accepted for ``w``)."""
    text = text.replace("ω", "w").replace(" ", "").replace("·", "*")
    if not text:
        raise ValueError("empty ordinal")
    out = ZERO
    for part in text.split("+"):
        m = _MONO.match(part)
        if not m:
            raise ValueError(f"cannot parse ordinal term {part!r}")
        if m.group(1) is not None:
            out = out + int(m.group(1))
        else:
            e = int(m.group(2)) if m.group(2) else 1
            c = int(m.group(3)) if m.group(3) else 1
            out = out + Ordinal.omega_power(e, c)
    return out


def add(a, b):
    return Ordinal.of(a) + Ordinal.of(b)


def decompose(a):
    """Split ``a`` into (limit-or-zero part, finite part)."""
    a = Ordinal.of(a)
    n = a.finite_part
    if n:
        return Ordinal(a.monomials[:-1]), n
    return a, 0


def addressable(bound, coef_cap):
    """All ordinals below ``bound`` whose CNF coefficients are at most ``coef_cap``, ascending."""
    bound = Ordinal.of(bound)
    if bound.is_zero:
        return []
    top = bound.degree
    out = []
    # coefficient vectors for exponents top..0, most significant first
    for coefs in itertools.product(range(coef_cap + 1), repeat=top + 1):
        mons = tuple((top - i, c) for i, c in enumerate(coefs) if c)
        a = Ordinal(mons)
        if a < bound:
            out.append(a)
    out.sort()
    return out


def limits_up_to(bound, coef_cap, inclusive=True):
    """Addressable nonzero limit ordinals up to ``bound``."""
    bound = Ordinal.of(bound)
    cands = addressable(bound + 1 if inclusive else bound, coef_cap)
    return [a for a in cands if a.is_limit]
