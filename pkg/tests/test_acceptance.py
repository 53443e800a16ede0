"""Acceptance suite: one pass/fail line per criterion.

The lines are echoed in the terminal summary (see ``conftest.py``) and
inline with ``-s``.
"""

import pytest

from mbep.acceptance import CRITERIA, run


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, record_property):
    (result,) = run([number], jobs=2)
    line = result.line()
    record_property("acceptance", line)
    print(line)
    assert result.passed, line
