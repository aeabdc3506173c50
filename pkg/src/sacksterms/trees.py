"""Depth-d observations of perfect binary trees and their term sequences.

A :class:`ClippedTree` is the set of nodes of length <= d of a perfect tree.
Choice variables are numbered along each branch: x_l is the direction taken
at the l-th splitting node met on the way up.  Splitting nodes of length
d - 1 count, since both children are visible at depth d.
"""

from dataclasses import dataclass, field

import numpy as np

from .terms import Term, equiv, substitute, union_support


@dataclass(frozen=True)
class ClippedTree:
    depth: int
    nodes: frozenset

    @classmethod
    def from_leaves(cls, depth, leaves):
        nodes = {""}
        for leaf in leaves:
            if len(leaf) != depth or set(leaf) - {"0", "1"}:
                raise ValueError(f"leaf {leaf!r} is not a 0/1 string of length {depth}")
            nodes.update(leaf[:i] for i in range(depth + 1))
        return cls(depth, frozenset(nodes))

    @classmethod
    def full(cls, depth):
        return cls.from_leaves(depth, [format(i, f"0{depth}b") if depth else "" for i in range(1 << depth)])

    @property
    def leaves(self):
        return sorted(s for s in self.nodes if len(s) == self.depth)

    def children(self, s):
        return [s + b for b in "01" if s + b in self.nodes]

    def is_splitting(self, s):
        return s + "0" in self.nodes and s + "1" in self.nodes

    def to_json(self):
        return {"depth": self.depth, "leaves": self.leaves}

    @classmethod
    def from_json(cls, data):
        return cls.from_leaves(int(data["depth"]), data["leaves"])

    def __le__(self, other):
        return self.depth == other.depth and self.nodes <= other.nodes


@dataclass(frozen=True)
class Front:
    index: int
    members: frozenset


@dataclass
class TreeReport:
    valid: bool
    full_fronts: int = 0
    errors: list = field(default_factory=list)


def validate_tree(tree):
    """Check that ``tree`` is a genuine depth-d truncation of a perfect tree."""
    errors = []
    d = tree.depth
    if "" not in tree.nodes:
        errors.append(("missing-root", ""))
    for s in sorted(tree.nodes, key=lambda s: (len(s), s)):
        if len(s) > d or set(s) - {"0", "1"}:
            errors.append(("bad-node", s))
            continue
        if s and s[:-1] not in tree.nodes:
            errors.append(("not-prefix-closed", s))
        if len(s) < d and not tree.children(s):
            errors.append(("childless-internal-node", s))
    if errors:
        return TreeReport(False, 0, errors)
    return TreeReport(True, len(splitting_fronts(tree)))


def _split_counts(tree):
    """Number of splitting proper prefixes, for every node."""
    counts = {"": 0}
    for s in sorted(tree.nodes, key=len):
        if s:
            parent = s[:-1]
            counts[s] = counts[parent] + tree.is_splitting(parent)
    return counts


def splitting_fronts(tree):
    """F_0, F_1, ... for every front that every leaf passes through."""
    counts = _split_counts(tree)
    fronts = []
    leaves = tree.leaves
    n = 0
    while True:
        members = frozenset(
            s for s in tree.nodes if len(s) < tree.depth and counts[s] == n and tree.is_splitting(s)
        )
        if not members or not all(any(leaf.startswith(s) for s in members) for leaf in leaves):
            return fronts
        fronts.append(Front(n, members))
        n += 1


def _leaf_ranges(tree):
    """Leaves in choice order, each with the number of splits it passes."""
    out = []

    def walk(s, k):
        if len(s) == tree.depth:
            out.append((s, k))
            return
        kids = tree.children(s)
        for c in kids:
            walk(c, k + (len(kids) == 2))

    walk("", 0)
    return out


def canonical_terms(tree, variables=None):
    """The terms t_0..t_{d-1} giving the i-th bit of the branch chosen by the x_l.

    ``variables`` maps a choice index l to the variable id used for x_l
    (default: l itself).
    """
    d = tree.depth
    ids = [variables(l) if variables else l for l in range(d)]
    tables = np.zeros((d, 1 << d), dtype=np.uint8)
    pos = 0
    for leaf, k in _leaf_ranges(tree):
        width = 1 << (d - k)
        bits = np.frombuffer(leaf.encode(), dtype=np.uint8) - ord("0")
        tables[:, pos : pos + width] = bits[:, None]
        pos += width
    return [Term.make(ids, tables[i]) for i in range(d)]


def tree_of_terms(ts, depth):
    """Prefix closure of the depth-d evaluations of ``ts`` under all assignments."""
    ts = list(ts)[:depth]
    if len(ts) < depth:
        raise ValueError(f"need {depth} terms, got {len(ts)}")
    if depth == 0:
        return ClippedTree(0, frozenset({""}))
    universe = union_support(ts)
    rows = np.stack([t.values_on(universe) for t in ts], axis=1)
    leaves = {"".join(map(str, r)) for r in np.unique(rows, axis=0)}
    return ClippedTree.from_leaves(depth, leaves)


def primed(j):
    """Default id of the primed variable x'_j: the odd numbers."""
    return 2 * j + 1


@dataclass
class RefinementWitness:
    """Partial substitution expressing x_n of T through the primed variables of T'."""

    phi: dict
    certified: int
    checked: list
    agrees: bool


class NotASubtree(ValueError):
    pass


def refinement_substitution(tree, sub, variables=primed):
    """Read off phi_n for each split index n that every branch of ``sub`` reaches in ``tree``."""
    if tree.depth != sub.depth:
        raise ValueError(f"depth mismatch: {tree.depth} vs {sub.depth}")
    if not sub.nodes <= tree.nodes:
        raise NotASubtree(f"nodes {sorted(sub.nodes - tree.nodes)} are not in the tree")
    d = tree.depth
    per_leaf = []
    for leaf, k in _leaf_ranges(sub):
        choices = []
        for length in range(d):
            if tree.is_splitting(leaf[:length]):
                choices.append(int(leaf[length]))
        per_leaf.append((k, choices))
    certified = min((len(c) for _, c in per_leaf), default=0)
    ids = [variables(j) for j in range(d)]
    phi = {}
    for n in range(certified):
        table = np.concatenate([np.full(1 << (d - k), c[n], dtype=np.uint8) for k, c in per_leaf])
        phi[n] = Term.make(ids, table)
    # certify t'_i == t_i o phi wherever t_i only uses certified variables
    ts = canonical_terms(tree)
    tps = canonical_terms(sub, variables)
    checked = [i for i, t in enumerate(ts) if all(v < certified for v in t.support)]
    agrees = all(equiv(tps[i], substitute(ts[i], phi, identity_tail=False)) for i in checked)
    return RefinementWitness(phi, certified, checked, agrees)


def search_common_refinement(t1, t2, splits):
    """The largest common clipped subtree whose leaves each pass ``splits`` splitting nodes.

    Returns None when no such subtree exists at this depth.  That is a
    search outcome, not a proof of incompatibility.
    """
    if t1.depth != t2.depth:
        raise ValueError("depth mismatch")
    d = t1.depth
    common = t1.nodes & t2.nodes
    best = {}
    for s in sorted(common, key=len, reverse=True):
        if len(s) == d:
            best[s] = 0
            continue
        alive = [best[s + b] for b in "01" if best.get(s + b) is not None]
        if not alive:
            best[s] = None
        elif len(alive) == 2:
            best[s] = max(1 + min(alive), max(alive))
        else:
            best[s] = alive[0]
    if best.get("") is None or best[""] < splits:
        return None
    keep = set()

    def build(s, need):
        keep.add(s)
        if len(s) == d:
            return
        kids = [s + b for b in "01" if best.get(s + b) is not None]
        both = [c for c in kids if best[c] >= need - 1]
        if len(both) == 2:
            for c in both:
                build(c, max(need - 1, 0))
        else:
            c = next(c for c in kids if best[c] >= need)
            build(c, need)

    build("", splits)
    return ClippedTree(d, frozenset(keep))


def all_trees(depth):
    """Every valid clipped tree of the given depth, as leaf lists."""

    def grow(r):
        if r == 0:
            yield [""]
            return
        subs = list(grow(r - 1))
        for a in subs:
            yield ["0" + s for s in a]
        for a in subs:
            yield ["1" + s for s in a]
        for a in subs:
            for b in subs:
                yield ["0" + s for s in a] + ["1" + s for s in b]

    for leaves in grow(depth):
        yield ClippedTree.from_leaves(depth, leaves)


def random_tree(depth, rng, split_prob=0.5):
    leaves = []

    def grow(s):
        if len(s) == depth:
            leaves.append(s)
            return
        if rng.random() < split_prob:
            grow(s + "0")
            grow(s + "1")
        else:
            grow(s + ("1" if rng.random() < 0.5 else "0"))

    grow("")
    return ClippedTree.from_leaves(depth, leaves)


def random_subtree(tree, rng, keep_prob=0.5):
    """A random clipped subtree of ``tree`` (a perfect-subtree observation)."""
    leaves = []

    def grow(s):
        if len(s) == tree.depth:
            leaves.append(s)
            return
        kids = tree.children(s)
        if len(kids) == 2 and rng.random() >= keep_prob:
            kids = [kids[rng.random() < 0.5]]
        for c in kids:
            grow(c)

    grow("")
    return ClippedTree.from_leaves(tree.depth, leaves)
