"""Walk through a small Sacks tree: fronts, canonical terms, and a refinement.

The tree has depth 3 and five leaves. Each branch is decided by one bit per
splitting front, so the n-th bit of a branch is a boolean term in those
choice bits. Pruning the tree to a subtree turns into a substitution on the
choice bits.
"""

from sacksterms.dot import export_dot
from sacksterms.suites import FIGURE1_LEAVES
from sacksterms.terms import substitute
from sacksterms.trees import ClippedTree, canonical_terms, refinement_substitution, splitting_fronts, tree_of_terms

tree = ClippedTree.from_leaves(3, FIGURE1_LEAVES)
print("leaves:", ", ".join(FIGURE1_LEAVES))

for level, front in enumerate(splitting_fronts(tree)):
    print(f"front F{level}:", ", ".join(m or "(root)" for m in sorted(front.members)))

terms = canonical_terms(tree)
for n, t in enumerate(terms):
    print(f"bit {n} of a branch = {t}")

# the terms carry the whole tree
assert tree_of_terms(terms, 3) == tree
print("terms rebuild the tree: yes")

sub = ClippedTree.from_leaves(3, ["110", "111"])
wit = refinement_substitution(tree, sub)
print("pruning to", sorted(sub.leaves), "is the substitution", {k: str(v) for k, v in wit.phi.items()})
print("last bit after pruning:", substitute(terms[2], wit.phi))

print()
print(export_dot(tree))
