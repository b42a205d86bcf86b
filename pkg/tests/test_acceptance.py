"""Acceptance gate: every cross-engine claim the package makes, one test per
criterion.  Each test prints its pass/fail line with the measured margin;
the same suite backs the `qdlab check` subcommand."""

import pytest

from qdlab.checks import CHECKS


@pytest.mark.parametrize(
    "check", CHECKS, ids=[fn.__name__.removeprefix("check_") for fn in CHECKS]
)
def test_criterion(check):
    result = check()
    status = "PASS" if result.passed else "FAIL"
    print(f"[{status}] {result.index:2d} {result.name}: {result.detail}")
    assert result.passed, f"criterion {result.index} ({result.name}): {result.detail}"
