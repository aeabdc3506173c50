"""Graphviz DOT text for trees, front families and matrix windows."""

from .terms import Term
from .trees import ClippedTree, Front, splitting_fronts

PALETTE = ["red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan"]


class UnsupportedObject(TypeError):
    pass


def _quote(s):
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def tree_dot(tree, fronts=None):
    fronts = splitting_fronts(tree) if fronts is None else fronts
    colour = {}
    for f in fronts:
        for s in f.members:
            colour[s] = PALETTE[f.index % len(PALETTE)]
    lines = ["digraph tree {", "  rankdir=BT;"]
    for s in sorted(tree.nodes, key=lambda s: (len(s), s)):
        attrs = [f"label={_quote(s or 'ε')}"]
        if s in colour:
            attrs.append(f"color={colour[s]}, style=filled, fillcolor={colour[s]}, fontcolor=white")
        lines.append(f"  {_quote('n' + s)} [{', '.join(attrs)}];")
    for s in sorted(tree.nodes, key=lambda s: (len(s), s)):
        if s:
            lines.append(f"  {_quote('n' + s[:-1])} -> {_quote('n' + s)};")
    for f in fronts:
        lines.append(f"  // F{f.index} = {{{', '.join((s or 'ε' for s in sorted(f.members)))}}}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def fronts_dot(fronts):
    lines = ["digraph fronts {"]
    for f in sorted(fronts, key=lambda f: f.index):
        lines.append(f"  subgraph cluster_F{f.index} {{")
        lines.append(f"    label={_quote('F' + str(f.index))};")
        for s in sorted(f.members):
            lines.append(f"    {_quote(f'F{f.index}:' + s)} [label={_quote(s or 'ε')}];")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def window_dot(rows):
    """A grid graph for a window given as a list of rows of terms."""
    lines = ["digraph window {", "  node [shape=box];"]
    for n, row in enumerate(rows):
        for m, t in enumerate(row):
            style = "" if t.is_constant else ", style=bold"
            lines.append(f"  c{n}_{m} [label={_quote(t)}, pos={_quote(f'{m},{-n}!')}{style}];")
        for m in range(len(row) - 1):
            lines.append(f"  c{n}_{m} -> c{n}_{m + 1} [style=invis];")
    for n in range(len(rows) - 1):
        if rows[n] and rows[n + 1]:
            lines.append(f"  c{n}_0 -> c{n + 1}_0 [style=invis];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(obj, rows=None, cols=None):
    """DOT text for a clipped tree, a list of fronts, a window (rows of terms) or a matrix with a cell method."""
    if isinstance(obj, ClippedTree):
        return tree_dot(obj)
    if isinstance(obj, (list, tuple)):
        if all(isinstance(f, Front) for f in obj) and obj:
            return fronts_dot(obj)
        if all(isinstance(r, (list, tuple)) and all(isinstance(t, Term) for t in r) for r in obj):
            return window_dot(obj)
    if hasattr(obj, "cell") and rows is not None and cols is not None:
        return window_dot([[obj.cell(n, m) for m in range(cols)] for n in range(rows)])
    raise UnsupportedObject(f"cannot export {type(obj).__name__} as DOT")
