"""Pension fund ledger: worker contributions, pensions and welfare draws.

The fund is a float array ``[balance, contributions, pensions, welfare]``
followed by one compensation term per entry (Neumaier summation), so the
identity balance == contributions - pensions - welfare holds to a few ulps
however long the run. The compiled helpers below are shared by the engine
kernel and the Python-level wrappers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

LEDGER_TOL = 1e-9

BALANCE, CONTRIBUTIONS, PENSIONS, WELFARE = range(4)
N_ENTRIES = 4


@dataclass
class PolicyParams:
    retirement_age: int = 65
    pension_tax_pct: int = 0
    fixed_fee: float = 0.0
    social_services: bool = False
    productivity_decay: bool = False
    fixed_fee_mode: str = "flat"  # "flat" | "proportional"

    def __post_init__(self):
        if isinstance(self.pension_tax_pct, bool) or int(self.pension_tax_pct) != self.pension_tax_pct:
            raise ValueError(f"pension_tax_pct must be an integer percent, got {self.pension_tax_pct!r}")
        if not 0 <= self.pension_tax_pct <= 100:
            raise ValueError(f"pension_tax_pct must be in 0..100, got {self.pension_tax_pct}")
        if self.fixed_fee < 0:
            raise ValueError(f"fixed_fee must be non-negative, got {self.fixed_fee}")
        if self.retirement_age < 1:
            raise ValueError(f"retirement_age must be at least 1, got {self.retirement_age}")
        if self.fixed_fee_mode not in ("flat", "proportional"):
            raise ValueError(f"fixed_fee_mode must be 'flat' or 'proportional', got {self.fixed_fee_mode!r}")


class PensionFund:
    __slots__ = ("ledger",)

    def __init__(self, balance: float = 0.0):
        self.ledger = np.zeros(2 * N_ENTRIES)
        self.ledger[BALANCE] = balance
        self.ledger[CONTRIBUTIONS] = balance

    def _value(self, i: int) -> float:
        return float(self.ledger[i] + self.ledger[N_ENTRIES + i])

    balance = property(lambda self: self._value(BALANCE))
    contributions_total = property(lambda self: self._value(CONTRIBUTIONS))
    pensions_paid_total = property(lambda self: self._value(PENSIONS))
    welfare_paid_total = property(lambda self: self._value(WELFARE))

    def ledger_gap(self) -> float:
        return self.balance - (self.contributions_total - self.pensions_paid_total - self.welfare_paid_total)

    def check(self, tol: float = LEDGER_TOL) -> None:
        if abs(self.ledger_gap()) > tol:
            raise AssertionError(f"fund ledger broken: gap {self.ledger_gap()!r}")
        if self.balance < 0:
            raise AssertionError(f"negative fund balance {self.balance!r}")

    def totals(self) -> dict:
        return {"balance": self.balance, "contributions_total": self.contributions_total,
                "pensions_paid_total": self.pensions_paid_total,
                "welfare_paid_total": self.welfare_paid_total}

    def __repr__(self):
        return "PensionFund(" + ", ".join(f"{k}={v!r}" for k, v in self.totals().items()) + ")"


@njit(cache=True)
def _add(fund, i, x):
    s = fund[i]
    t = s + x
    if abs(s) >= abs(x):
        fund[4 + i] += (s - t) + x
    else:
        fund[4 + i] += (x - t) + s
    fund[i] = t


@njit(cache=True)
def k_balance(fund):
    return fund[0] + fund[4]


@njit(cache=True)
def _withdraw(fund, amount, bal):
    if amount >= bal:
        # empty the fund exactly so it can never read negative
        fund[0] = 0.0
        fund[4] = 0.0
    else:
        _add(fund, 0, -amount)


@njit(cache=True)
def k_contribution(income, wealth_after_income, tax_pct, fee, proportional_fee, fund):
    due = income * tax_pct / 100.0
    if proportional_fee:
        due += income * fee
    else:
        due += fee
    avail = wealth_after_income if wealth_after_income > 0.0 else 0.0
    paid = due if due < avail else avail
    if paid > 0.0:
        _add(fund, 0, paid)
        _add(fund, 1, paid)
        return paid
    return 0.0


@njit(cache=True)
def k_pension(metabolism, fund):
    bal = k_balance(fund)
    from_fund = bal if bal < metabolism else metabolism
    if from_fund > 0.0:
        _withdraw(fund, from_fund, bal)
        _add(fund, 2, from_fund)
    else:
        from_fund = 0.0
    return from_fund, metabolism - from_fund


@njit(cache=True)
def k_welfare(wealth_after_metabolism, metabolism, fund):
    if wealth_after_metabolism > 0.0:
        return 0.0
    need = metabolism - wealth_after_metabolism
    bal = k_balance(fund)
    granted = bal if bal < need else need
    if granted > 0.0:
        _withdraw(fund, granted, bal)
        _add(fund, 3, granted)
        return granted
    return 0.0


def collect_contribution(income: float, wealth_after_income: float, policy: PolicyParams,
                         fund: PensionFund) -> float:
    """Levy tax and fee on a worker's income; the caller deducts the result.

    Payment is capped at the worker's wealth; any shortfall is forgiven.
    """
    return k_contribution(float(income), float(wealth_after_income), float(policy.pension_tax_pct),
                          float(policy.fixed_fee), policy.fixed_fee_mode == "proportional", fund.ledger)


def pay_pension(retiree_metabolism: float, fund: PensionFund) -> tuple[float, float]:
    """Split one retiree's consumption into ``(from_fund, from_savings)``."""
    return k_pension(float(retiree_metabolism), fund.ledger)


def welfare_top_up(worker_wealth_after_metabolism: float, worker_metabolism: float,
                   fund: PensionFund) -> float:
    """Grant a starving worker enough for one metabolism of runway, if the fund allows."""
    return k_welfare(float(worker_wealth_after_metabolism), float(worker_metabolism), fund.ledger)
