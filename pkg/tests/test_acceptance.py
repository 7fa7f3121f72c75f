"""Acceptance criteria at full size and stated tolerances.

Each test prints one PASS/FAIL line (collected into the terminal summary).
Run directly with ``python tests/test_acceptance.py`` for the lines alone.
"""

import time

import pytest

from sketchtest import validation

# criterion number -> (title, suite, runtime budget in seconds or None)
CRITERIA = {
    1: ("known-design completeness", "completeness", 120),
    2: ("known-design soundness", "soundness", 300),
    3: ("oracle agreement", "oracle-agreement", None),
    4: ("approximate Caratheodory", "caratheodory", 30),
    5: ("width estimator", "width", None),
    6: ("unknown-design completeness and substituted soundness", "unknown", None),
    7: ("dimensionality tester", "dimension", 180),
    8: ("approximate rank", "rank", None),
    9: ("RIP and incoherence", "rip-incoherence", None),
    10: ("cover property (calibrated brackets)", "cover", None),
    11: ("tolerant variants", "tolerant", None),
    12: ("query accounting", "queries", None),
}


def evaluate(number):
    title, suite, budget = CRITERIA[number]
    t0 = time.perf_counter()
    results = validation.SUITES[suite]()
    elapsed = time.perf_counter() - t0
    in_time = budget is None or elapsed < budget
    passed = all(r.passed for r in results) and in_time
    parts = "; ".join(f"{r.name} {'ok' if r.passed else 'FAILED'} measured={r.measured:.6g} bound={r.threshold:.6g}"
                      for r in results)
    timing = f"{elapsed:.1f}s" + (f" (target < {budget}s)" if budget else "")
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {title} [{parts}] {timing}"
    return passed, line, results


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance_log):
    passed, line, results = evaluate(number)
    print(line)
    acceptance_log.append(line)
    assert passed, line + "\n" + "\n".join(str(r.detail) for r in results if not r.passed)


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        print(evaluate(n)[1], flush=True)
