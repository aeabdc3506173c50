"""Strengthen a condition along a presented substitution and check the result.

Given a starting condition p and a substitution phi on finitely many
variables, the pipeline builds q below p whose finite part is phi applied to
the finite part of r-Delta, together with a witness for the order.
"""

import numpy as np

from sacksterms import constructions as C
from sacksterms.conditions import term_stronger
from sacksterms.qstar import PresentedSubstitution, Window, verify_order_witness
from sacksterms.suites import random_presented
from sacksterms.terms import x

w = Window(rows=6, cols=12, coef_cap=3)
rd_sigma = C.build_r_delta().sigma()

phi = PresentedSubstitution(3, {2: x(1, 0) ^ x(0, 0)})
print("phi:", phi)
res = C.gurke_pipeline(C.build_r_copy(), phi, w)
print("q is stronger than p:", bool(term_stronger(res.q, res.p, w)))
print("order witness checks out:", bool(verify_order_witness(res.t_bar, res.q.sigma(), rd_sigma, w)))

rng = np.random.default_rng(5)
passed = 0
for _ in range(10):
    res = C.gurke_pipeline(C.build_r_copy(), random_presented(rng, 6), w)
    passed += bool(C.certify_pipeline(res, w))
print(f"random substitutions certified: {passed}/10")
