"""Runs every acceptance criterion at its stated tolerance; one line per criterion."""

import pytest

from cbnorm import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA,
                         ids=[f"criterion_{i + 1:02d}" for i in range(len(acceptance.CRITERIA))])
def test_criterion(criterion, capsys):
    res = criterion(seed=0)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
