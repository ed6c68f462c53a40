# app/core/chipcount.py

"""
Packet-forwarding economy.

A node keeps a chip balance per neighbor. Forwarding a packet on a
neighbor's behalf costs that neighbor one chip; the neighbor earns chips
back by accepting (optimistic) or visibly forwarding (pessimistic) the
node's own packets. Every balance also grows at the uniform chip
accumulation rate, applied lazily so the result depends only on elapsed
time.
"""

import logging
from typing import Literal

from app.core.errors import ContractViolation
from app.models.packet import SECOND, NodeId, SimTime
from app.models.scenario import ChipScheme

logger = logging.getLogger(__name__)

AdmissionVerdict = Literal["allow", "deny"]


class ChipLedger:
    """Chip balances one node holds against its neighbors."""

    def __init__(
        self,
        owner: NodeId,
        scheme: ChipScheme = "optimistic",
        car: float = 0.0,
        spend_threshold: float = 0.0,
        initial_balance: float = 0.0,
        ceiling: float = 100.0,
    ):
        self.owner = owner
        self.scheme = scheme
        self.car = car
        self.spend_threshold = spend_threshold
        self.initial_balance = initial_balance
        self.ceiling = ceiling

        self._balances: dict[NodeId, float] = {}
        self._as_of: dict[NodeId, SimTime] = {}

        self.debited: dict[NodeId, int] = {}
        self.credited: dict[NodeId, int] = {}

    def _accrue(self, neighbor: NodeId, now: SimTime) -> float:
        if neighbor not in self._balances:
            # A neighbor first met at `now` has accrued since time zero
            start = self.initial_balance + self.car * now / SECOND
            self._balances[neighbor] = min(self.ceiling, start)
            self._as_of[neighbor] = now
            return self._balances[neighbor]

        elapsed = now - self._as_of[neighbor]
        if elapsed > 0 and self.car > 0:
            grown = self._balances[neighbor] + self.car * elapsed / SECOND
            self._balances[neighbor] = min(self.ceiling, max(self._balances[neighbor], grown))
        if elapsed > 0:
            self._as_of[neighbor] = now
        return self._balances[neighbor]

    def balance(self, neighbor: NodeId, now: SimTime) -> float:
        return self._accrue(neighbor, now)

    # ============================================
    # Operations
    # ============================================

    def admit_forward(self, requester: NodeId, now: SimTime) -> AdmissionVerdict:
        """Allow iff the requester's balance is above the spend threshold; debit one chip."""
        current = self._accrue(requester, now)
        if current > self.spend_threshold:
            self._balances[requester] = current - 1
            self.debited[requester] = self.debited.get(requester, 0) + 1
            return "allow"
        return "deny"

    def credit_on_accept(self, neighbor: NodeId, now: SimTime) -> None:
        if self.scheme != "optimistic":
            raise ContractViolation("credit_on_accept called under the pessimistic scheme")
        self._credit(neighbor, now)

    def credit_on_observed_forward(self, neighbor: NodeId, now: SimTime) -> None:
        if self.scheme != "pessimistic":
            raise ContractViolation("credit_on_observed_forward called under the optimistic scheme")
        self._credit(neighbor, now)

    def _credit(self, neighbor: NodeId, now: SimTime) -> None:
        current = self._accrue(neighbor, now)
        self._balances[neighbor] = min(self.ceiling, current + 1)
        self.credited[neighbor] = self.credited.get(neighbor, 0) + 1
