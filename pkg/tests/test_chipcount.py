# tests/test_chipcount.py

"""
Tests for the packet-forwarding economy.
"""

import pytest
from hypothesis import given, settings, strategies as st

from app.core.chipcount import ChipLedger
from app.core.errors import ContractViolation
from app.core.oracles import deadlock_delivered, expected_balance
from app.models.packet import SECOND


# ============================================
# Test Data
# ============================================

def make_ledger(**kwargs) -> ChipLedger:
    return ChipLedger(owner=0, **kwargs)


# ============================================
# Admission Tests
# ============================================

class TestAdmission:
    """Forwarding is paid for with the requester's chips."""

    def test_empty_balance_denied(self):
        assert make_ledger().admit_forward(1, now=0) == "deny"

    def test_balance_above_threshold_allows_and_debits(self):
        ledger = make_ledger(initial_balance=2.0)

        verdicts = [ledger.admit_forward(1, now=0) for _ in range(3)]

        assert verdicts == ["allow", "allow", "deny"]
        assert ledger.balance(1, now=0) == 0.0
        assert ledger.debited[1] == 2

    def test_spend_threshold_is_strict(self):
        ledger = make_ledger(initial_balance=3.0, spend_threshold=2.0)

        assert ledger.admit_forward(1, now=0) == "allow"
        assert ledger.admit_forward(1, now=0) == "deny"


# ============================================
# Credit Tests
# ============================================

class TestCredit:
    """Each scheme has exactly one way to earn chips."""

    def test_optimistic_credit_on_accept(self):
        ledger = make_ledger(scheme="optimistic")

        ledger.credit_on_accept(4, now=0)

        assert ledger.balance(4, now=0) == 1.0
        assert ledger.admit_forward(4, now=0) == "allow"

    def test_pessimistic_credit_on_observed_forward(self):
        ledger = make_ledger(scheme="pessimistic")

        ledger.credit_on_observed_forward(4, now=0)

        assert ledger.credited[4] == 1

    def test_wrong_scheme_is_a_contract_violation(self):
        with pytest.raises(ContractViolation):
            make_ledger(scheme="pessimistic").credit_on_accept(4, now=0)
        with pytest.raises(ContractViolation):
            make_ledger(scheme="optimistic").credit_on_observed_forward(4, now=0)

    def test_credit_capped_at_ceiling(self):
        ledger = make_ledger(initial_balance=5.0, ceiling=5.0)

        ledger.credit_on_accept(4, now=0)

        assert ledger.balance(4, now=0) == 5.0


# ============================================
# Accrual Tests
# ============================================

class TestAccrual:
    """Balances grow at the chip accumulation rate."""

    def test_first_contact_includes_accrual_since_start(self):
        ledger = make_ledger(car=0.5)

        assert ledger.balance(3, now=4 * SECOND) == pytest.approx(2.0)

    def test_accrual_capped(self):
        ledger = make_ledger(car=10.0, ceiling=20.0)

        assert ledger.balance(3, now=100 * SECOND) == 20.0

    def test_accrual_after_debit(self):
        ledger = make_ledger(car=1.0)
        ledger.admit_forward(3, now=2 * SECOND)

        assert ledger.balance(3, now=5 * SECOND) == pytest.approx(4.0)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(0.0, 5.0),
        st.floats(0.0, 10.0),
        st.lists(st.integers(0, 50 * SECOND), max_size=10),
        st.integers(0, 50 * SECOND),
    )
    def test_accrual_is_path_independent(self, car, initial, query_times, end):
        queried = make_ledger(car=car, initial_balance=initial)
        for t in sorted(p for p in query_times if p <= end):
            queried.balance(7, now=t)

        direct = make_ledger(car=car, initial_balance=initial)

        expected = expected_balance(initial, car, end / SECOND, 100.0)
        assert queried.balance(7, now=end) == pytest.approx(expected, rel=1e-9, abs=1e-9)
        assert direct.balance(7, now=end) == pytest.approx(expected, rel=1e-9, abs=1e-9)


# ============================================
# Deadlock Tests
# ============================================

class TestDeadlock:
    """Two relays that need each other's service."""

    def test_pessimistic_without_accrual_deadlocks(self):
        assert deadlock_delivered("pessimistic", car=0.0) == 0

    def test_optimistic_breaks_deadlock(self):
        assert deadlock_delivered("optimistic", car=0.0) > 0

    def test_accrual_breaks_deadlock(self):
        assert deadlock_delivered("pessimistic", car=1.0) > 0


# ============================================
# Run Tests
# ============================================

if __name__ == "__main__":
    pytest.main([__file__, "-v"])
