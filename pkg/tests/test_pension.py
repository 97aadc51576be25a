import pytest

from pensionsim.pension import PensionFund, PolicyParams, collect_contribution, pay_pension, welfare_top_up


def fund(balance):
    f = PensionFund()
    f.ledger[0] = balance
    f.ledger[1] = balance  # book as contributions so the identity holds
    return f


def test_contribution_examples():
    f = PensionFund()
    assert collect_contribution(4, 10, PolicyParams(pension_tax_pct=25, fixed_fee=0.5), f) == pytest.approx(1.5)
    assert f.balance == pytest.approx(1.5) and f.contributions_total == pytest.approx(1.5)
    assert collect_contribution(4, 10, PolicyParams(), f) == 0
    assert collect_contribution(0, 1.2, PolicyParams(fixed_fee=2.0), f) == pytest.approx(1.2)
    f.check()


def test_proportional_fee():
    f = PensionFund()
    paid = collect_contribution(3, 10, PolicyParams(fixed_fee=0.5, fixed_fee_mode="proportional"), f)
    assert paid == pytest.approx(1.5)


def test_pension_examples():
    f = fund(10)
    assert pay_pension(3, f) == (3, 0)
    assert f.balance == 7
    assert pay_pension(3, fund(0)) == (0, 3)
    f = fund(1)
    assert pay_pension(3, f) == (1, 2)
    assert f.balance == 0
    f.check()


def test_welfare_examples():
    f = fund(100)
    assert welfare_top_up(-1, 2, f) == 3
    assert f.balance == 97 and f.welfare_paid_total == 3
    assert welfare_top_up(-1, 2, fund(0)) == 0
    f = fund(1)
    assert welfare_top_up(-1, 2, f) == 1
    f.check()


def test_policy_validation():
    with pytest.raises(ValueError):
        PolicyParams(pension_tax_pct=101)
    with pytest.raises(ValueError):
        PolicyParams(fixed_fee=-1)
    with pytest.raises(ValueError):
        PolicyParams(fixed_fee_mode="weekly")


def test_ledger_check_detects_gap():
    f = PensionFund()
    f.ledger[0] = 1.0
    with pytest.raises(AssertionError):
        f.check()
