"""The twelve acceptance criteria at full scale, one test and one printed line each."""

import pytest

from beurling.acceptance import CRITERIA, Context


@pytest.fixture(scope="module")
def ctx():
    return Context(quick=False)


@pytest.mark.slow
@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number, ctx, capsys):
    res = CRITERIA[number - 1](ctx)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
