"""Acceptance run: one pass/fail line per criterion, printed and asserted.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines.
"""

import pytest

from sicprop.verify import CRITERIA, run_criterion

SEED = 7


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number):
    result = run_criterion(number, SEED)
    print(result.line())
    assert result.passed, result.line()
