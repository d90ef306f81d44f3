"""Core domain types for variable-population single-item mechanisms.

A mechanism maps a bid profile (one nonnegative bid per agent) to an
allocation of at most one divisible unit and a payment per agent.  Agent
utility is linear: value * share - payment.  Every type here is an
immutable value; the agent population varies between profiles, which is
why profiles carry their own agent-id sets instead of assuming a fixed
index range.
"""

import math
from dataclasses import dataclass


class MechanismLabError(Exception):
    """Base class for every error raised by this package."""


class DuplicateAgentError(MechanismLabError):
    """An agent id was added to a profile that already contains it."""


class ProfileError(MechanismLabError):
    """A bid profile failed structural validation."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Numeric tolerances shared across the package.

    tol_alloc: slack allowed on allocation sums (shares may total 1 + tol_alloc).
    tol_num:   absolute tolerance for scalar comparisons.
    tol_quad:  error budget for numerical integration of allocation curves.
    eps_tie:   gap below which two bids count as tied.
    """

    tol_alloc: float = 1e-9
    tol_num: float = 1e-9
    tol_quad: float = 1e-6
    eps_tie: float = 1e-12

    def __post_init__(self):
        for name in ("tol_alloc", "tol_num", "tol_quad", "eps_tie"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0):
                raise ValueError(f"{name} must be a strictly positive number, got {value!r}")

    def to_dict(self) -> dict:
        return {
            "tol_alloc": self.tol_alloc,
            "tol_num": self.tol_num,
            "tol_quad": self.tol_quad,
            "eps_tie": self.eps_tie,
        }


DEFAULT_TOLERANCES = ToleranceConfig()


def _check_bid(bid: float) -> float:
    bid = float(bid)
    if not math.isfinite(bid) or bid < 0.0:
        raise ProfileError(f"bids must be finite and nonnegative, got {bid!r}")
    return bid


def _check_agent(agent) -> int:
    if isinstance(agent, bool) or not isinstance(agent, int) or agent < 1:
        raise ProfileError(f"agent ids must be positive integers, got {agent!r}")
    return agent


@dataclass(frozen=True)
class BidProfile:
    """An immutable map from agent id to bid, kept in ascending id order."""

    agents: tuple
    bids: tuple

    def __post_init__(self):
        if len(self.agents) == 0:
            raise ProfileError("a profile needs at least one agent")
        if len(self.agents) != len(self.bids):
            raise ProfileError("agents and bids must have equal length")
        checked = sorted(zip(self.agents, self.bids))
        agents = tuple(_check_agent(a) for a, _ in checked)
        bids = tuple(_check_bid(b) for _, b in checked)
        if len(set(agents)) != len(agents):
            raise DuplicateAgentError(f"duplicate agent ids in {agents}")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "bids", bids)

    @classmethod
    def from_map(cls, mapping: dict) -> "BidProfile":
        return cls(tuple(mapping.keys()), tuple(mapping.values()))

    @classmethod
    def from_bids(cls, bids) -> "BidProfile":
        """Profile with agents 1..n bidding the given values in order."""
        bids = tuple(bids)
        return cls(tuple(range(1, len(bids) + 1)), bids)

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def items(self):
        return zip(self.agents, self.bids)

    def has_agent(self, agent: int) -> bool:
        return agent in self.agents

    def index_of(self, agent: int) -> int:
        try:
            return self.agents.index(agent)
        except ValueError:
            raise ProfileError(f"agent {agent} not in profile {self}") from None

    def bid_of(self, agent: int) -> float:
        return self.bids[self.index_of(agent)]

    def with_bid(self, agent: int, bid: float) -> "BidProfile":
        """Copy of this profile with one agent's bid replaced."""
        k = self.index_of(agent)
        return BidProfile(self.agents, self.bids[:k] + (float(bid),) + self.bids[k + 1:])

    def extend(self, agent: int, bid: float) -> "BidProfile":
        """Copy of this profile with a new agent added."""
        if agent in self.agents:
            raise DuplicateAgentError(f"agent {agent} already present in {self}")
        return BidProfile(self.agents + (agent,), self.bids + (float(bid),))

    def others_max(self, agent: int, default: float = 0.0) -> float:
        k = self.index_of(agent)
        best = default
        for j, b in enumerate(self.bids):
            if j != k and b > best:
                best = b
        return best

    def others_total(self, agent: int) -> float:
        k = self.index_of(agent)
        return sum(b for j, b in enumerate(self.bids) if j != k)

    def total(self) -> float:
        return sum(self.bids)

    def max_agent_id(self) -> int:
        return self.agents[-1]

    def to_dict(self) -> dict:
        return {"agents": list(self.agents), "bids": list(self.bids)}

    def __repr__(self) -> str:
        inner = ", ".join(f"{a}: {b:g}" for a, b in self.items())
        return "{" + inner + "}"


@dataclass(frozen=True)
class Allocation:
    """Shares of the single unit, keyed by agent id.

    Shares are probabilities (or fractional quantities); an allocation may
    deliberately hand out less than the full unit, so wasteful rules are
    representable and it is the checkers' job to flag them.
    """

    shares: dict

    def share_of(self, agent: int) -> float:
        return self.shares[agent]

    def total(self) -> float:
        return sum(self.shares.values())

    def to_dict(self) -> dict:
        return {str(a): self.shares[a] for a in sorted(self.shares)}


@dataclass(frozen=True)
class PaymentVector:
    """Payments charged to each agent, keyed by agent id."""

    payments: dict

    def payment_of(self, agent: int) -> float:
        return self.payments[agent]

    def total(self) -> float:
        return sum(self.payments.values())

    def to_dict(self) -> dict:
        return {str(a): self.payments[a] for a in sorted(self.payments)}


@dataclass(frozen=True)
class Outcome:
    """Allocation, payments, and the implied linear utilities."""

    allocation: Allocation
    payments: PaymentVector
    utilities: dict

    @classmethod
    def from_parts(cls, profile: BidProfile, allocation, payments) -> "Outcome":
        """Build an outcome from wrappers or plain agent-keyed mappings."""
        if not isinstance(allocation, Allocation):
            allocation = Allocation(dict(allocation))
        if not isinstance(payments, PaymentVector):
            payments = PaymentVector(dict(payments))
        utilities = {
            a: utility(profile.bid_of(a), allocation.share_of(a), payments.payment_of(a))
            for a in profile.agents
        }
        return cls(allocation, payments, utilities)

    def to_dict(self) -> dict:
        return {
            "allocation": self.allocation.to_dict(),
            "payments": self.payments.to_dict(),
            "utilities": {str(a): self.utilities[a] for a in sorted(self.utilities)},
        }


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of a structural allocation check."""

    ok: bool
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def utility(value: float, share: float, payment: float) -> float:
    """Linear utility value * share - payment.  Total function, no checks."""
    return value * share - payment


def validate_allocation(allocation: Allocation, profile: BidProfile,
                        tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> ValidationResult:
    """Check that shares cover exactly the profile's agents, are nonnegative,
    and total at most 1 + tol_alloc."""
    keys = set(allocation.shares)
    expected = set(profile.agents)
    if keys != expected:
        return ValidationResult(False, f"share keys {sorted(keys)} != agents {sorted(expected)}")
    for agent, share in allocation.shares.items():
        if not math.isfinite(share) or share < -tolerances.tol_alloc:
            return ValidationResult(False, f"agent {agent} has invalid share {share!r}")
    total = allocation.total()
    if total > 1.0 + tolerances.tol_alloc:
        return ValidationResult(False, f"shares total {total!r} > 1 + tol_alloc")
    return ValidationResult(True)


def extend_profile(profile: BidProfile, agent: int, bid: float) -> BidProfile:
    """Add one agent to a profile; raises DuplicateAgentError on id reuse."""
    return profile.extend(agent, bid)


def replicate_profile(u: float, v: float, n: int) -> BidProfile:
    """Profile with agent 1 bidding u and agents 2..n all bidding v.

    This is the rival-replication family used throughout the theorem
    harness; n counts the total population and must be at least 2.
    """
    if n < 2:
        raise ProfileError(f"replicated profiles need n >= 2 agents, got {n}")
    return BidProfile.from_bids((u,) + (v,) * (n - 1))
