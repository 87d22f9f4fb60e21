"""Acceptance battery: one line per criterion, printed even under output capture.

Criteria 9 and 10 currently fail; the decisions log records why.
"""

import pytest

from kdesk import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, capsys):
    v = acceptance.CRITERIA[number]()
    with capsys.disabled():
        print("\n" + v.line())
    assert v.ok, v.line()
