"""Built-in allocation rules and the Myerson payment engine.

A Mechanism couples an allocation rule with a payment rule.  Payments are
either explicit (a user-supplied function of the whole profile) or derived
from the allocation curve by the Myerson formula

    p_i(v) = v_i * x_i(v) - integral_0^{v_i} x_i(z, v_-i) dz,

which pins down the unique incentive-compatible payments for a monotone
rule, normalized so a zero bid pays zero.  The integral term doubles as
the truthful utility of a bidder whose value equals their bid.

Each built-in rule ships a closed-form allocation integral; the bracketing
quadrature is the fallback for rules that do not (and is what the tests
exercise by deliberately hiding the closed forms).
"""

import math
from dataclasses import dataclass
from functools import partial

from .core import (
    Allocation,
    BidProfile,
    DEFAULT_TOLERANCES,
    MechanismLabError,
    Outcome,
    PaymentVector,
    ToleranceConfig,
)
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, bracket_monotone_integral

PAYMENT_MODES = ("myerson", "explicit")


@dataclass(frozen=True)
class ProportionalParams:
    """Per-bid price coefficient for the proportional rule: p_i = c * bid_i."""

    c: float

    def __post_init__(self):
        if not (self.c > 0):
            raise ValueError(f"proportional price coefficient c must be > 0, got {self.c!r}")


@dataclass(frozen=True)
class ReserveParams:
    """Reserve price below which bids are excluded from the auction."""

    r: float

    def __post_init__(self):
        if not (self.r >= 0):
            raise ValueError(f"reserve price r must be >= 0, got {self.r!r}")


@dataclass(frozen=True)
class Mechanism:
    """An allocation rule plus a payment rule.

    allocate:       BidProfile -> Allocation over exactly the profile's agents.
    payment_mode:   "myerson" (derived from the allocation curve) or
                    "explicit" (explicit_pay supplies the whole vector).
    explicit_pay:   BidProfile -> PaymentVector, required in explicit mode.
    exact_integral: optional closed form (profile, agent, upper) ->
                    integral_0^upper x_agent(z, others) dz; when present the
                    payment engine uses it instead of quadrature.
    """

    name: str
    allocate: object
    payment_mode: str = "myerson"
    explicit_pay: object = None
    exact_integral: object = None

    def __post_init__(self):
        if self.payment_mode not in PAYMENT_MODES:
            raise ValueError(f"payment_mode must be one of {PAYMENT_MODES}, got {self.payment_mode!r}")
        if self.payment_mode == "explicit" and self.explicit_pay is None:
            raise ValueError("explicit payment_mode requires explicit_pay")

    def share_of(self, profile: BidProfile, agent: int) -> float:
        return self.allocate(profile).share_of(agent)

    def payment(self, profile: BidProfile, agent: int,
                quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
        if self.payment_mode == "explicit":
            return self.explicit_pay(profile).payment_of(agent)
        return myerson_payment(self, profile, agent, quadrature, tolerances)

    def payments(self, profile: BidProfile,
                 quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                 tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> PaymentVector:
        if self.payment_mode == "explicit":
            return self.explicit_pay(profile)
        return PaymentVector({
            a: myerson_payment(self, profile, a, quadrature, tolerances)
            for a in profile.agents
        })

    def outcome(self, profile: BidProfile,
                quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Outcome:
        return Outcome.from_parts(profile, self.allocate(profile),
                                  self.payments(profile, quadrature, tolerances))


# --- allocation rules ------------------------------------------------------

def spa_allocate(profile: BidProfile, eps_tie: float = 1e-12) -> Allocation:
    """Second-price auction allocation: top bid wins, ties split evenly."""
    top = max(profile.bids)
    winners = [a for a, b in profile.items() if b >= top - eps_tie]
    share = 1.0 / len(winners)
    return Allocation({a: (share if a in winners else 0.0) for a in profile.agents})


def lottery_allocate(profile: BidProfile) -> Allocation:
    """Equal-share lottery: 1/n each, independent of the bids."""
    share = 1.0 / profile.n_agents
    return Allocation({a: share for a in profile.agents})


def proportional_allocate(profile: BidProfile) -> Allocation:
    """Shares proportional to bids; the all-zero profile splits evenly."""
    total = profile.total()
    if total <= 0.0:
        return lottery_allocate(profile)
    return Allocation({a: b / total for a, b in profile.items()})


def spa_reserve_allocate(profile: BidProfile, params: ReserveParams,
                         eps_tie: float = 1e-12) -> Allocation:
    """Second-price auction among bids >= r; below-reserve profiles allocate nothing."""
    eligible = [(a, b) for a, b in profile.items() if b >= params.r]
    if not eligible:
        return Allocation({a: 0.0 for a in profile.agents})
    top = max(b for _, b in eligible)
    winners = [a for a, b in eligible if b >= top - eps_tie]
    share = 1.0 / len(winners)
    return Allocation({a: (share if a in winners else 0.0) for a in profile.agents})


def asymmetric_spa_allocate(profile: BidProfile, eps_tie: float = 1e-12) -> Allocation:
    """Second-price auction that resolves ties to the lowest agent id."""
    top = max(profile.bids)
    winner = min(a for a, b in profile.items() if b >= top - eps_tie)
    return Allocation({a: (1.0 if a == winner else 0.0) for a in profile.agents})


def proportional_payments(profile: BidProfile, params: ProportionalParams) -> PaymentVector:
    """Explicit linear prices p_i = c * bid_i."""
    return PaymentVector({a: params.c * b for a, b in profile.items()})


# --- closed-form allocation integrals --------------------------------------
#
# Each returns integral_0^upper x_i(z, v_-i) dz with the rest of the profile
# held fixed.  Tie points have measure zero, so tie handling never shows up.

def _spa_integral(profile: BidProfile, agent: int, upper: float) -> float:
    return max(0.0, upper - profile.others_max(agent))


def _reserve_integral(profile: BidProfile, agent: int, upper: float, r: float) -> float:
    return max(0.0, upper - max(profile.others_max(agent), r))


def _lottery_integral(profile: BidProfile, agent: int, upper: float) -> float:
    return upper / profile.n_agents


def _proportional_integral(profile: BidProfile, agent: int, upper: float) -> float:
    others = profile.others_total(agent)
    if others <= 0.0:
        # Sole positive bidder takes everything for any z > 0.
        return upper
    return upper - others * math.log1p(upper / others)


# --- payment engine ---------------------------------------------------------

def share_curve(mech: Mechanism, profile: BidProfile, agent: int):
    """Agent's allocation share as a function of their own bid, rest fixed."""
    def x_of_own_bid(z: float) -> float:
        return mech.allocate(profile.with_bid(agent, z)).share_of(agent)
    return x_of_own_bid


def allocation_integral(mech: Mechanism, profile: BidProfile, agent: int, upper: float,
                        quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                        tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """integral_0^upper x_agent(z, v_-agent) dz, closed form when available.

    The quadrature path requires the share curve to be non-decreasing and
    raises MonotonicityViolation (naming the offending pair) when a probe
    says otherwise; the result is accurate to quadrature.tol_quad.
    """
    if upper <= 0.0:
        return 0.0
    if mech.exact_integral is not None:
        return mech.exact_integral(profile, agent, upper)
    result = bracket_monotone_integral(share_curve(mech, profile, agent), upper,
                                       quadrature, tolerances.tol_num)
    return result.value


def myerson_payment(mech: Mechanism, profile: BidProfile, agent: int,
                    quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                    tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """Payment pinned down by the allocation curve: b*x(b) minus its integral.

    A zero bid pays exactly 0.0 by construction.  Accuracy matches the
    integral path: exact with a closed form, else within tol_quad.
    """
    bid = profile.bid_of(agent)
    if bid <= 0.0:
        return 0.0
    share = mech.allocate(profile).share_of(agent)
    return bid * share - allocation_integral(mech, profile, agent, bid, quadrature, tolerances)


def truthful_utility(mech: Mechanism, profile: BidProfile, agent: int,
                     quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                     tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """Utility of a truthful bidder under Myerson payments.

    Equals the allocation-curve integral, hence also equals
    bid * share - myerson_payment(...) up to quadrature error.
    """
    return allocation_integral(mech, profile, agent, profile.bid_of(agent),
                               quadrature, tolerances)


# --- factories and registry -------------------------------------------------

def second_price_auction(tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Mechanism:
    return Mechanism(
        name="spa",
        allocate=partial(spa_allocate, eps_tie=tolerances.eps_tie),
        exact_integral=_spa_integral,
    )


def uniform_lottery(tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Mechanism:
    return Mechanism(
        name="lottery",
        allocate=lottery_allocate,
        exact_integral=_lottery_integral,
    )


def proportional_rule(c: float = 0.5, payment_mode: str = "explicit",
                      tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Mechanism:
    """Bid-proportional shares; explicit mode charges p_i = c * bid_i,
    myerson mode derives payments from the share curve instead."""
    params = ProportionalParams(c)
    explicit = partial(proportional_payments, params=params) if payment_mode == "explicit" else None
    return Mechanism(
        name="proportional",
        allocate=proportional_allocate,
        payment_mode=payment_mode,
        explicit_pay=explicit,
        exact_integral=_proportional_integral,
    )


def reserve_price_spa(r: float = 4.0,
                      tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Mechanism:
    params = ReserveParams(r)
    return Mechanism(
        name="reserve_spa",
        allocate=partial(spa_reserve_allocate, params=params, eps_tie=tolerances.eps_tie),
        exact_integral=partial(_reserve_integral, r=params.r),
    )


def asymmetric_tiebreak_spa(tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Mechanism:
    return Mechanism(
        name="asymmetric_spa",
        allocate=partial(asymmetric_spa_allocate, eps_tie=tolerances.eps_tie),
        exact_integral=_spa_integral,
    )


def _make_spa(*, c, r, payment_mode, tolerances):
    if payment_mode == "explicit":
        raise ValueError("spa only supports myerson payments")
    return second_price_auction(tolerances)


def _make_lottery(*, c, r, payment_mode, tolerances):
    if payment_mode == "explicit":
        raise ValueError("lottery only supports myerson payments")
    return uniform_lottery(tolerances)


def _make_proportional(*, c, r, payment_mode, tolerances):
    return proportional_rule(c=c, payment_mode=payment_mode or "explicit", tolerances=tolerances)


def _make_reserve(*, c, r, payment_mode, tolerances):
    if payment_mode == "explicit":
        raise ValueError("reserve_spa only supports myerson payments")
    return reserve_price_spa(r=r, tolerances=tolerances)


def _make_asymmetric(*, c, r, payment_mode, tolerances):
    if payment_mode == "explicit":
        raise ValueError("asymmetric_spa only supports myerson payments")
    return asymmetric_tiebreak_spa(tolerances)


BUILTIN_NAMES = ("spa", "reserve_spa", "lottery", "asymmetric_spa", "proportional")

_REGISTRY = {
    "spa": _make_spa,
    "reserve_spa": _make_reserve,
    "lottery": _make_lottery,
    "asymmetric_spa": _make_asymmetric,
    "proportional": _make_proportional,
}


def register_mechanism(name: str, factory) -> None:
    """Register a custom mechanism factory under a new name.

    The factory is called as factory(c=..., r=..., payment_mode=...,
    tolerances=...) and must return a Mechanism.  Registration is a
    compile-time extension point: there is no runtime plugin discovery.
    """
    if name in _REGISTRY:
        raise ValueError(f"mechanism name {name!r} is already registered")
    _REGISTRY[name] = factory


def registered_names() -> tuple:
    return tuple(_REGISTRY)


def make_mechanism(name: str, c: float = 0.5, r: float = 4.0,
                   payment_mode: str = None,
                   tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Mechanism:
    """Instantiate a registered mechanism by name.

    payment_mode None picks each rule's default (explicit for proportional,
    myerson for everything else).
    """
    if payment_mode is not None and payment_mode not in PAYMENT_MODES:
        raise ValueError(f"payment_mode must be one of {PAYMENT_MODES}, got {payment_mode!r}")
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise MechanismLabError(
            f"unknown mechanism {name!r}; registered: {sorted(_REGISTRY)}"
        ) from None
    if name != "proportional" and payment_mode is None:
        payment_mode = "myerson"
    return factory(c=c, r=r, payment_mode=payment_mode, tolerances=tolerances)


def builtin_suite(c: float = 0.5, r: float = 4.0,
                  tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> list:
    """The five built-in mechanisms in canonical order."""
    return [make_mechanism(name, c=c, r=r, tolerances=tolerances) for name in BUILTIN_NAMES]
