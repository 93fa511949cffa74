"""Acceptance suite: one test per criterion, each printed as a pass/fail line.

The same registry backs the CLI ``verify`` subcommand.
"""

import pytest

from kepler_balance import acceptance


@pytest.mark.parametrize("name,fn", acceptance.CRITERIA, ids=[n for n, _ in acceptance.CRITERIA])
def test_criterion(name, fn, capsys):
    passed, detail = fn()
    with capsys.disabled():
        print(f"\n[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, f"{name}: {detail}"
