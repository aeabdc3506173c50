"""A tour of the r-Delta condition.

Row n, column w*k + c holds the variable x_{s0,s1} exactly when c codes a
sequence starting at (s0, s1) that lands on row n. Its finite part is a
square of terms in which row n only mentions variables of rank below n.
"""

from sacksterms import constructions as C
from sacksterms.conditions import validate_R
from sacksterms.ordinals import Ordinal
from sacksterms.qstar import Mode, Window, validate_condition
from sacksterms.terms import ZERO

rd = C.build_r_delta()
print("height:", rd.height)
print("code of (0,0):", C.coding((0, 0)), " code of (1,2):", C.coding((1, 2)))

print("\nfinite part, rows 0-5, columns 0-24 ('.' is 0):")
sigma = rd.sigma()
for n in range(6):
    cells = [sigma.cell(n, m) for m in range(25)]
    print(f"  row {n}: " + " ".join("." if t == ZERO else str(t) for t in cells))

alpha = Ordinal.omega_times(1, 5)
print(f"\nentry at row 1, column {alpha}:", rd.entry(1, alpha))

w = Window(rows=6, cols=20, coef_cap=4)
print("row/top/coherence clauses on a 6x20 window:", "ok" if validate_R(rd, w) else "broken")
print("finite part is a Q_* condition:", "ok" if validate_condition(sigma, Mode.QSTAR, w) else "broken")

broken = rd.perturb({(3, Ordinal.omega_power(2) + 2): ZERO})
rep = validate_R(broken, w)
print("after zeroing one top-row cell:", rep.first.clause, "at", rep.first.cell)
