"""Reference reproduction criteria; each prints one [PASS]/[FAIL] line and its sub-checks."""

import pytest

from kscompete.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n}")
def test_criterion(number, capsys):
    result = CRITERIA[number]()
    with capsys.disabled():
        print("\n" + result.report())
    assert result.passed, result.line()
