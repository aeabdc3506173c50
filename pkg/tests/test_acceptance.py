"""Acceptance gate: ten criteria at full size, each with its time budget.

Run with ``pytest tests/test_acceptance.py -v`` (a PASS/FAIL line per
criterion is printed in the terminal summary) or directly as
``python tests/test_acceptance.py``.
"""

import sys
import time

import numpy as np
import pytest

from sacksterms import suites as S

SEED = 20240601
RESULTS = {}

# number -> (label, runner, seconds allowed, strict bound)
CRITERIA = {
    1: ("figure-1 worked example", lambda rng: S.figure1(), 1.0, True),
    2: ("pairing suite on [0,100)^2", lambda rng: S.tau_suite(100), 1.0, True),
    3: ("tree/term round trip: all depth-4 trees + 10^4 samples", lambda rng: S.roundtrip(rng, 4, 10_000), 180.0,
        False),
    4: ("substitution algebra, 10^4 triples", lambda rng: S.substitution_algebra(rng, 10_000, 6), 30.0, False),
    5: ("refinement shadow, 10^3 samples", lambda rng: S.psi_shadow(rng, 1000), 120.0, False),
    6: ("r-Delta suite", lambda rng: S.r_delta_suite(rows=10, coef_cap=50, qrows=30, horizon=200), 60.0, False),
    7: ("stack/split algebra, 100 pairs", lambda rng: S.condition_algebra(rng, 100), 120.0, False),
    8: ("builder on 100 presented substitutions", lambda rng: S.builder_suite(rng, 100, 12), 180.0, False),
    9: ("pipeline on the same 100 substitutions", lambda rng: S.pipeline_suite(rng, 100, 12), 180.0, False),
    10: ("reconstruction on 6 rows x 50 sites", lambda rng: S.reconstruction_suite(rng, rows=6, levels=5, cols=10),
         60.0, False),
}


def _rng(number):
    # criteria 8 and 9 share a stream, so the pipeline sees the builder's sample
    return np.random.default_rng([SEED, 8 if number == 9 else number])


def evaluate(number):
    label, fn, budget, strict = CRITERIA[number]
    start = time.perf_counter()
    rep = fn(_rng(number))
    elapsed = time.perf_counter() - start
    in_time = elapsed < budget if strict else elapsed <= budget
    ok = rep.ok and in_time
    bound = f"{'<' if strict else '<='} {budget:g} s"
    reason = ""
    if not rep.ok:
        v = rep.first
        reason = f"  [{v.clause}] at {v.cell}: {v.detail}"
    elif not in_time:
        reason = "  over time budget"
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {label}  ({elapsed:.2f} s, {bound}){reason}"
    RESULTS[number] = line
    print(line)
    return ok, rep, elapsed


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, rep, elapsed = evaluate(number)
    assert rep.ok, rep.violations[:3]
    assert ok, f"took {elapsed:.2f} s"


def main():
    print(f"seed {SEED}")
    results = [evaluate(n)[0] for n in sorted(CRITERIA)]
    print(f"{sum(results)}/{len(results)} criteria pass")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
