"""Exit criteria. One test per criterion; each check's PASS/FAIL line is
printed in the terminal summary."""
import pytest

from ctxlab.acceptance import CRITERIA

RESULTS = []


@pytest.mark.parametrize("criterion", list(CRITERIA))
def test_criterion(criterion):
    checks = CRITERIA[criterion]()
    RESULTS.extend(checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}")
    failed = [c for c in checks if not c.passed]
    assert not failed, "; ".join(f"{c.name}: {c.detail}" for c in failed)
