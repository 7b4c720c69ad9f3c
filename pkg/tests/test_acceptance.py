"""End-to-end acceptance checks at their stated tolerances and runtime budgets."""
import pytest

from qising.acceptance import CHECKS, format_table, run


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_acceptance_check(number, capsys):
    (result,) = run([number])
    with capsys.disabled():
        print("\n" + format_table([result]))
    assert result.passed, result.detail
