"""The Cantor pairing of omega x omega and the linear order it induces."""

from math import isqrt


def tau(n, m):
    """Index of the pair (n, m) in the diagonal enumeration."""
    if n < 0 or m < 0:
        raise ValueError(f"pair components must be natural numbers, got ({n}, {m})")
    s = n + m
    return n + s * (s + 1) // 2


def tau_inv(k):
    if k < 0:
        raise ValueError(f"index must be a natural number, got {k}")
    # largest s with s(s+1)/2 <= k
    s = (isqrt(8 * k + 1) - 1) // 2
    n = k - s * (s + 1) // 2
    return n, s - n


def triangle_leq(a, b):
    """(i, j) precedes-or-equals (n, m) in the order pulled back along tau."""
    return tau(*a) <= tau(*b)
