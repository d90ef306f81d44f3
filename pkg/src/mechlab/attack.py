"""Adversarial deviation searches: misreports, sybils, and bulk scans.

Each search runs in two stages.  A grid stage evaluates the deviator's
utility at every grid bid (augmented with 0, the grid top, and all rival
bids); a refinement stage then runs a derivative-free golden-section
maximization on the interval bracketing the best grid point.  The grid
best is always kept as a candidate, so refinement can only improve the
reported gain.  All tie-breaking is deterministic: equal gains resolve to
the smallest deviating bid, then the smallest agent id, then the earliest
profile scanned.
"""

import math
from dataclasses import dataclass

from .core import BidProfile, DEFAULT_TOLERANCES, MechanismLabError, ToleranceConfig
from .mechanisms import Mechanism
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig
from .search import ProfileSampler, SearchGrid

KIND_MISREPORT = "misreport"
KIND_SYBIL = "sybil"
KIND_MULTI_SYBIL = "multi_sybil"  # scan kind only; the deviations it yields are sybil kind
SCAN_KINDS = (KIND_MISREPORT, KIND_SYBIL, KIND_MULTI_SYBIL)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


class CombinatorialBudgetError(MechanismLabError):
    """A sybil search asked for more evaluations than its configured cap."""


@dataclass(frozen=True)
class Deviation:
    """One evaluated deviation from truthful bidding.

    The starting profile is carried along so the deviation can be replayed
    standalone: truthful_utility, deviant_utility, and gain are all
    recomputable from (profile, deviator, misreport_bid | sybil_bids).
    """

    kind: str
    profile: BidProfile
    deviator: int
    misreport_bid: float = None
    sybil_bids: tuple = ()
    truthful_utility: float = 0.0
    deviant_utility: float = 0.0
    gain: float = 0.0

    def __post_init__(self):
        if self.kind not in SCAN_KINDS:
            raise ValueError(f"unknown deviation kind {self.kind!r}")
        if self.kind == KIND_MISREPORT:
            if self.misreport_bid is None or self.sybil_bids:
                raise ValueError("misreport deviations carry exactly one misreport bid")
        else:
            if self.misreport_bid is not None or not self.sybil_bids:
                raise ValueError("sybil deviations carry sybil bids and no misreport")
        if self.kind == KIND_MULTI_SYBIL and len(self.sybil_bids) < 2:
            raise ValueError("multi_sybil deviations carry at least two sybil bids")

    @property
    def chosen_bid(self) -> float:
        return self.misreport_bid if self.kind == KIND_MISREPORT else self.sybil_bids[0]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "profile": self.profile.to_dict(),
            "deviator": self.deviator,
            "misreport_bid": self.misreport_bid,
            "sybil_bids": list(self.sybil_bids),
            "truthful_utility": self.truthful_utility,
            "deviant_utility": self.deviant_utility,
            "gain": self.gain,
        }


def truthful_side_utility(mech: Mechanism, profile: BidProfile, agent: int,
                          quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                          tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """value * share - payment for a truthful agent (value = profile bid)."""
    share = mech.allocate(profile).share_of(agent)
    return profile.bid_of(agent) * share - mech.payment(profile, agent, quadrature, tolerances)


def misreport_utility(mech: Mechanism, profile: BidProfile, agent: int, report: float,
                      quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                      tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """Deviator's utility when reporting `report` while valuing their profile bid."""
    value = profile.bid_of(agent)
    deviated = profile.with_bid(agent, report)
    share = mech.allocate(deviated).share_of(agent)
    return value * share - mech.payment(deviated, agent, quadrature, tolerances)


def sybil_utility(mech: Mechanism, profile: BidProfile, agent: int, sybil_bids,
                  quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                  tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """Deviator's combined utility after adding sybil identities.

    The deviator still bids truthfully; each sybil gets the next free
    agent id.  Shares aggregate at full value and both sides' payments
    are owed (value * sum(shares) - sum(payments)).
    """
    value = profile.bid_of(agent)
    extended = profile
    sybil_ids = []
    next_id = profile.max_agent_id()
    for bid in sybil_bids:
        next_id += 1
        extended = extended.extend(next_id, bid)
        sybil_ids.append(next_id)
    allocation = mech.allocate(extended)
    share = allocation.share_of(agent) + sum(allocation.share_of(s) for s in sybil_ids)
    paid = mech.payment(extended, agent, quadrature, tolerances)
    paid += sum(mech.payment(extended, s, quadrature, tolerances) for s in sybil_ids)
    return value * share - paid


def _golden_section_max(f, lo: float, hi: float, iterations: int) -> list:
    """Probe points of a golden-section maximization of f on [lo, hi]."""
    if hi - lo <= 0.0 or iterations <= 0:
        return []
    a, b = lo, hi
    h = b - a
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    probes = [(c, yc), (d, yd)]
    for _ in range(max(0, iterations - 2)):
        if yc > yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + _INV_PHI_SQ * h
            yc = f(c)
            probes.append((c, yc))
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + _INV_PHI * h
            yd = f(d)
            probes.append((d, yd))
    return probes


def _best_candidate(candidates) -> tuple:
    """(bid, utility) with max utility; ties resolve to the smallest bid."""
    best_bid, best_val = None, None
    for bid, val in candidates:
        if best_val is None or val > best_val or (val == best_val and bid < best_bid):
            best_bid, best_val = bid, val
    return best_bid, best_val


def _search_deviation(mech, profile, agent, grid, refine_iters, quadrature, tolerances,
                      evaluate, kind, k=1) -> Deviation:
    truthful = truthful_side_utility(mech, profile, agent, quadrature, tolerances)
    points = grid.points(extra=profile.bids)
    values = [evaluate(b) for b in points]

    best_idx = 0
    for i in range(1, len(points)):
        if values[i] > values[best_idx]:
            best_idx = i
    candidates = [(points[best_idx], values[best_idx])]

    if refine_iters > 0 and len(points) > 1:
        lo = points[best_idx - 1] if best_idx > 0 else points[best_idx]
        hi = points[best_idx + 1] if best_idx + 1 < len(points) else points[best_idx]
        candidates += _golden_section_max(evaluate, lo, hi, refine_iters)

    bid, deviant = _best_candidate(candidates)
    if kind == KIND_MISREPORT:
        return Deviation(KIND_MISREPORT, profile, agent, misreport_bid=bid,
                         truthful_utility=truthful, deviant_utility=deviant,
                         gain=deviant - truthful)
    return Deviation(KIND_SYBIL if k == 1 else KIND_MULTI_SYBIL, profile, agent,
                     sybil_bids=(bid,) * k, truthful_utility=truthful,
                     deviant_utility=deviant, gain=deviant - truthful)


def best_misreport(mech: Mechanism, profile: BidProfile, agent: int,
                   grid: SearchGrid, refine_iters: int = 40,
                   quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                   tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Deviation:
    """Most profitable single-agent misreport found on grid + refinement."""
    def evaluate(b):
        return misreport_utility(mech, profile, agent, b, quadrature, tolerances)
    return _search_deviation(mech, profile, agent, grid, refine_iters,
                             quadrature, tolerances, evaluate, KIND_MISREPORT)


def best_sybil_response(mech: Mechanism, profile: BidProfile, agent: int,
                        grid: SearchGrid, refine_iters: int = 40,
                        quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                        tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> Deviation:
    """Most profitable single-sybil deviation found on grid + refinement."""
    return multi_sybil_response(mech, profile, agent, 1, grid, quadrature,
                                tolerances, refine_iters=refine_iters)


def multi_sybil_response(mech: Mechanism, profile: BidProfile, agent: int, k: int,
                         grid: SearchGrid,
                         quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                         tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
                         refine_iters: int = 0, eval_cap: int = 20000) -> Deviation:
    """Most profitable deviation with k sybils all bidding one common value.

    With k=1 and equal refine_iters this is exactly best_sybil_response
    (both run the same search).  Raises CombinatorialBudgetError when
    k * |grid| would exceed eval_cap.
    """
    if k < 1:
        raise ValueError(f"need at least one sybil, got k={k}")
    points = len(grid.points(extra=profile.bids))
    if k * points > eval_cap:
        raise CombinatorialBudgetError(
            f"k * |grid| = {k * points} exceeds the evaluation cap {eval_cap}")

    def evaluate(b):
        return sybil_utility(mech, profile, agent, (b,) * k, quadrature, tolerances)
    return _search_deviation(mech, profile, agent, grid, refine_iters,
                             quadrature, tolerances, evaluate, KIND_SYBIL, k=k)


@dataclass(frozen=True)
class ScanResult:
    """Outcome of a bulk deviation scan over sampled profiles."""

    worst: Deviation
    gains: tuple               # every (profile, agent, kind) best gain, scan order
    records: tuple             # (profile_index, kind, deviator, chosen_bid, gain)
    profiles_scanned: int
    kinds: tuple
    gain_floor: float = 0.0    # gains above this count as material, not noise

    @property
    def max_gain(self) -> float:
        return max(self.gains)

    @property
    def positive_gains(self) -> int:
        return sum(1 for g in self.gains if g > self.gain_floor)

    def summary(self) -> dict:
        return {
            "profiles_scanned": self.profiles_scanned,
            "kinds": list(self.kinds),
            "searches": len(self.gains),
            "max_gain": self.max_gain,
            "mean_gain": sum(self.gains) / len(self.gains),
            "positive_gains": self.positive_gains,
            "gain_floor": self.gain_floor,
        }

    def to_dict(self) -> dict:
        return {"worst": self.worst.to_dict(), "summary": self.summary()}


def exploit_scan(mech: Mechanism, sampler: ProfileSampler, budget: int,
                 grid: SearchGrid, refine_iters: int = 20,
                 quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                 tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
                 kinds: tuple = (KIND_MISREPORT, KIND_SYBIL), k: int = 1) -> ScanResult:
    """Run deviation searches for every agent of `budget` sampled profiles.

    kinds selects the searches per (profile, agent); multi_sybil uses k
    identical sybils.  Deterministic for fixed inputs: the sampler is
    seeded and the worst deviation is reduced with the documented
    tie-breaking.
    """
    for kind in kinds:
        if kind not in SCAN_KINDS:
            raise ValueError(f"unknown scan kind {kind!r}; expected one of {SCAN_KINDS}")
    profiles = sampler.sample(budget)
    worst = None
    gains = []
    records = []
    for index, profile in enumerate(profiles):
        for agent in profile.agents:
            for kind in kinds:
                if kind == KIND_MISREPORT:
                    dev = best_misreport(mech, profile, agent, grid, refine_iters,
                                         quadrature, tolerances)
                elif kind == KIND_MULTI_SYBIL:
                    dev = multi_sybil_response(mech, profile, agent, k, grid,
                                               quadrature, tolerances,
                                               refine_iters=refine_iters)
                else:
                    dev = best_sybil_response(mech, profile, agent, grid, refine_iters,
                                              quadrature, tolerances)
                gains.append(dev.gain)
                records.append((index, kind, agent, dev.chosen_bid, dev.gain))
                if worst is None or dev.gain > worst.gain or (
                        dev.gain == worst.gain
                        and (dev.chosen_bid, dev.deviator) < (worst.chosen_bid, worst.deviator)):
                    worst = dev
    floor = tolerances.tol_num + 4.0 * tolerances.tol_quad
    return ScanResult(worst, tuple(gains), tuple(records), len(profiles),
                      tuple(kinds), gain_floor=floor)


def replay_deviation(mech: Mechanism, deviation: Deviation,
                     quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                     tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """Recompute a deviation's gain from its stored profile and bids."""
    truthful = truthful_side_utility(mech, deviation.profile, deviation.deviator,
                                     quadrature, tolerances)
    if deviation.kind == KIND_MISREPORT:
        deviant = misreport_utility(mech, deviation.profile, deviation.deviator,
                                    deviation.misreport_bid, quadrature, tolerances)
    else:
        deviant = sybil_utility(mech, deviation.profile, deviation.deviator,
                                deviation.sybil_bids, quadrature, tolerances)
    return deviant - truthful
