"""Numerical retracing of the second-price uniqueness argument.

The characterization says a non-wasteful, symmetric, incentive-compatible,
sybil-proof mechanism must behave like a second-price auction.  Its proof
walks through a small set of numerical facts, each of which this module
turns into an executable check against a concrete mechanism:

  replication_limit   the top bidder's share against n-1 identical rivals
                      must approach 1 as the rivals are replicated;
  replication_chain   the inequality chaining the truthful payoff at n
                      rivals to the payoff at n+1, with the symmetry
                      identity x_2 = (1 - x_1) / n it relies on;
  payoff_floor        the two-bidder truthful payoff must reach u - v;
  rival_monotonicity  the truthful payoff cannot increase in a rival bid;
  uniform_average     averaging the payoff over rival bids in [0, u]
                      equals u/2 for any non-wasteful symmetric rule;
  induction_step      the explicit sybil deviation that exploits any
                      mechanism awarding a positive share to a dominated
                      low bid.

Every trace is finite evidence on sampled populations, never a proof;
each one says so in its note.
"""

from dataclasses import dataclass, field

from .attack import Deviation, KIND_SYBIL, sybil_utility, truthful_side_utility
from .core import (
    BidProfile,
    DEFAULT_TOLERANCES,
    MechanismLabError,
    ToleranceConfig,
    replicate_profile,
)
from .mechanisms import Mechanism, truthful_utility
from .quadrature import ConvergenceError, DEFAULT_QUADRATURE, QuadratureConfig
from .search import SearchGrid

TRACE_REPLICATION_LIMIT = "replication_limit"
TRACE_REPLICATION_CHAIN = "replication_chain"
TRACE_PAYOFF_FLOOR = "payoff_floor"
TRACE_RIVAL_MONOTONICITY = "rival_monotonicity"
TRACE_UNIFORM_AVERAGE = "uniform_average"
TRACE_INDUCTION_STEP = "induction_step"

ALL_TRACES = (
    TRACE_REPLICATION_LIMIT,
    TRACE_REPLICATION_CHAIN,
    TRACE_PAYOFF_FLOOR,
    TRACE_RIVAL_MONOTONICITY,
    TRACE_UNIFORM_AVERAGE,
    TRACE_INDUCTION_STEP,
)

FINITE_EVIDENCE_NOTE = ("finite evidence on sampled populations within the stated "
                        "ranges; consistency here is not a proof of the limit claim")


class PreconditionError(MechanismLabError):
    """A trace was invoked on inputs outside its stated precondition."""


class IdentityPreconditionError(MechanismLabError):
    """The averaging identity needs a non-wasteful symmetric mechanism."""


@dataclass(frozen=True)
class TraceSample:
    """One probed point of a trace: parameter, computed and reference values."""

    param: float
    computed: float
    reference: float
    slack: float

    def to_dict(self) -> dict:
        return {"param": self.param, "computed": self.computed,
                "reference": self.reference, "slack": self.slack}


@dataclass(frozen=True)
class LemmaTrace:
    """A proof step replayed numerically against one mechanism."""

    name: str
    inputs: dict
    samples: tuple
    verdict: str               # "consistent" | "violated"
    worst_slack: float
    note: str
    extra: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return self.verdict == "consistent"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": dict(self.inputs),
            "samples": [s.to_dict() for s in self.samples],
            "verdict": self.verdict,
            "worst_slack": self.worst_slack,
            "note": self.note,
            "extra": dict(self.extra),
        }

    def csv_rows(self) -> list:
        return [(s.param, s.computed, s.reference, s.slack) for s in self.samples]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise PreconditionError(message)


def replication_limit_trace(mech: Mechanism, u: float = 7.0, v: float = 3.0,
                            n_max: int = 50,
                            tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> LemmaTrace:
    """Track agent 1's share of u against n-1 rivals all bidding v < u.

    A sybil-proof mechanism must let that share approach 1; the trace
    reports the running max over n <= n_max and flags mechanisms whose
    running max stays short of 1 by more than tol_num.  The verdict only
    speaks about the sampled range, never the limit.
    """
    _require(u > v >= 0.0, f"replication trace needs u > v >= 0, got u={u!r}, v={v!r}")
    _require(n_max >= 2, f"n_max must be >= 2, got {n_max}")
    samples = []
    running_max = 0.0
    for n in range(2, n_max + 1):
        share = mech.allocate(replicate_profile(u, v, n)).share_of(1)
        running_max = max(running_max, share)
        samples.append(TraceSample(n, share, 1.0, 1.0 - running_max))
    worst = 1.0 - running_max
    verdict = "consistent" if worst <= tolerances.tol_num else "violated"
    return LemmaTrace(
        TRACE_REPLICATION_LIMIT,
        {"u": u, "v": v, "n_max": n_max},
        tuple(samples), verdict, worst,
        f"running max of agent 1's share over n <= {n_max}; {FINITE_EVIDENCE_NOTE}",
        extra={"running_max": running_max},
    )


def replication_chain_check(mech: Mechanism, u: float = 7.0, v: float = 3.0,
                            n_max: int = 20,
                            quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                            tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> LemmaTrace:
    """Check the payoff recursion that drives the replication argument.

    For each n, the truthful payoff of the u-bidder against n-1 rivals
    must be at least the payoff against n rivals plus
    (u - v) * (1 - x_1) / n, where x_1 is their share in the larger
    population.  The symmetry identity x_2 = (1 - x_1) / n used to derive
    that bound is verified on the same profiles.
    """
    _require(u > v >= 0.0, f"chain check needs u > v >= 0, got u={u!r}, v={v!r}")
    _require(n_max >= 2, f"n_max must be >= 2, got {n_max}")
    threshold = tolerances.tol_num + 2.0 * tolerances.tol_quad
    samples = []
    worst_slack = float("inf")
    worst_identity_gap = 0.0
    for n in range(2, n_max + 1):
        payoff_n = truthful_utility(mech, replicate_profile(u, v, n), 1,
                                    quadrature, tolerances)
        grown = replicate_profile(u, v, n + 1)
        allocation = mech.allocate(grown)
        x1 = allocation.share_of(1)
        x2 = allocation.share_of(2)
        payoff_grown = truthful_utility(mech, grown, 1, quadrature, tolerances)
        bound = payoff_grown + (u - v) * (1.0 - x1) / n
        slack = payoff_n - bound
        worst_slack = min(worst_slack, slack)
        worst_identity_gap = max(worst_identity_gap, abs(x2 - (1.0 - x1) / n))
        samples.append(TraceSample(n, payoff_n, bound, slack))
    violated = worst_slack < -threshold or worst_identity_gap > tolerances.tol_num
    return LemmaTrace(
        TRACE_REPLICATION_CHAIN,
        {"u": u, "v": v, "n_max": n_max},
        tuple(samples),
        "violated" if violated else "consistent",
        worst_slack,
        f"payoff recursion and symmetry identity over n <= {n_max}; "
        f"max identity gap {worst_identity_gap:.3g}; {FINITE_EVIDENCE_NOTE}",
        extra={"worst_identity_gap": worst_identity_gap},
    )


def payoff_floor_gap(mech: Mechanism, u: float, v: float,
                     quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                     tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """Two-bidder truthful payoff minus the second-price floor u - v.

    Zero for a second-price auction; negative for mechanisms that fail
    the floor (the equal-share lottery gives u/2 - (u - v)).
    """
    _require(u >= v >= 0.0, f"payoff floor needs u >= v >= 0, got u={u!r}, v={v!r}")
    payoff = truthful_utility(mech, BidProfile.from_bids((u, v)), 1,
                              quadrature, tolerances)
    return payoff - (u - v)


def payoff_floor_trace(mech: Mechanism, u: float = 7.0, v_values=None,
                       quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                       tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> LemmaTrace:
    """payoff_floor_gap swept across rival bids v <= u."""
    if v_values is None:
        v_values = [u * k / 10.0 for k in range(11)]
    v_values = [float(v) for v in v_values]
    _require(all(0.0 <= v <= u for v in v_values),
             f"rival bids must lie in [0, u], got {v_values}")
    threshold = tolerances.tol_num + 2.0 * tolerances.tol_quad
    samples = []
    worst = float("inf")
    for v in v_values:
        gap = payoff_floor_gap(mech, u, v, quadrature, tolerances)
        worst = min(worst, gap)
        samples.append(TraceSample(v, gap + (u - v), u - v, gap))
    verdict = "violated" if worst < -threshold else "consistent"
    return LemmaTrace(
        TRACE_PAYOFF_FLOOR,
        {"u": u, "v_values": list(v_values)},
        tuple(samples), verdict, worst,
        f"two-bidder payoff against the u - v floor at {len(v_values)} rival bids; "
        f"{FINITE_EVIDENCE_NOTE}",
    )


def rival_monotonicity_trace(mech: Mechanism, u: float = 7.0, grid: SearchGrid = None,
                             quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                             tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> LemmaTrace:
    """Truthful two-bidder payoff must be non-increasing in the rival bid."""
    _require(u > 0.0, f"monotonicity trace needs u > 0, got {u!r}")
    grid = grid or SearchGrid(0.0, u, u / 20.0)
    points = [z for z in grid.points(extra=(u,)) if z <= u + 1e-12]
    threshold = tolerances.tol_num + 2.0 * tolerances.tol_quad
    samples = []
    worst = float("inf")
    previous = None
    for v in points:
        payoff = truthful_utility(mech, BidProfile.from_bids((u, v)), 1,
                                  quadrature, tolerances)
        reference = payoff if previous is None else previous
        slack = reference - payoff
        worst = min(worst, slack)
        samples.append(TraceSample(v, payoff, reference, slack))
        previous = payoff
    verdict = "violated" if worst < -threshold else "consistent"
    return LemmaTrace(
        TRACE_RIVAL_MONOTONICITY,
        {"u": u, "v_points": len(points)},
        tuple(samples), verdict, worst,
        f"payoff vs rival bid on {len(points)} grid points in [0, {u:g}]; "
        f"{FINITE_EVIDENCE_NOTE}",
    )


@dataclass(frozen=True)
class AveragingResult:
    """Averaged truthful payoff over rival bids, with its target u/2."""

    value: float
    reference: float
    richardson_gap: float
    n_samples: int

    @property
    def gap(self) -> float:
        return self.value - self.reference

    def to_dict(self) -> dict:
        return {"value": self.value, "reference": self.reference, "gap": self.gap,
                "richardson_gap": self.richardson_gap, "n_samples": self.n_samples}


def _check_identity_preconditions(mech: Mechanism, u: float,
                                  tolerances: ToleranceConfig) -> None:
    # Probe a handful of two-bidder profiles, including the tie and the
    # all-zero profile, for full allocation and label-independence.
    probes = [BidProfile.from_bids((u, u * k / 4.0)) for k in range(5)]
    probes.append(BidProfile.from_bids((0.0, 0.0)))
    for profile in probes:
        allocation = mech.allocate(profile)
        if abs(allocation.total() - 1.0) > tolerances.tol_alloc:
            raise IdentityPreconditionError(
                f"mechanism {mech.name!r} is wasteful on {profile}: "
                f"shares total {allocation.total()!r}")
        swapped = mech.allocate(BidProfile.from_bids((profile.bids[1], profile.bids[0])))
        gap = max(abs(allocation.share_of(1) - swapped.share_of(2)),
                  abs(allocation.share_of(2) - swapped.share_of(1)))
        if gap > tolerances.tol_num:
            raise IdentityPreconditionError(
                f"mechanism {mech.name!r} is asymmetric on {profile}: swap gap {gap!r}")


def uniform_average_identity(mech: Mechanism, u: float,
                             quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                             tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
                             n_samples: int = 16000) -> AveragingResult:
    """Average the truthful two-bidder payoff over rival bids in [0, u].

    For a non-wasteful symmetric mechanism the average is exactly u/2,
    whatever else the rule does; the preconditions are probed first and
    raise IdentityPreconditionError when they fail.  The outer integral
    is a uniform trapezoid rule; a half-resolution Richardson check must
    agree within tol_quad or ConvergenceError is raised.
    """
    _require(u > 0.0, f"averaging identity needs u > 0, got {u!r}")
    if n_samples < 4 or n_samples % 2 != 0:
        raise ValueError(f"n_samples must be an even number >= 4, got {n_samples}")
    _check_identity_preconditions(mech, u, tolerances)

    h = u / n_samples
    values = [truthful_utility(mech, BidProfile.from_bids((u, k * h)), 1,
                               quadrature, tolerances)
              for k in range(n_samples + 1)]

    def trapezoid(vals, width):
        return width * (sum(vals) - 0.5 * (vals[0] + vals[-1]))

    average = trapezoid(values, h) / u
    average_half = trapezoid(values[::2], 2.0 * h) / u
    richardson_gap = abs(average - average_half)
    if richardson_gap > quadrature.tol_quad:
        raise ConvergenceError(
            f"trapezoid halves disagree by {richardson_gap!r} > tol_quad "
            f"{quadrature.tol_quad!r} at {n_samples} samples")
    return AveragingResult(average, 0.5 * u, richardson_gap, n_samples)


def uniform_average_trace(mech: Mechanism, u_values=(1.0, 2.0, 5.0),
                          quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                          tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
                          n_samples: int = 16000) -> LemmaTrace:
    """uniform_average_identity across several integration tops u."""
    threshold = 10.0 * tolerances.tol_quad
    samples = []
    worst = 0.0
    for u in u_values:
        result = uniform_average_identity(mech, float(u), quadrature, tolerances, n_samples)
        worst = max(worst, abs(result.gap))
        samples.append(TraceSample(float(u), result.value, result.reference, result.gap))
    verdict = "violated" if worst > threshold else "consistent"
    return LemmaTrace(
        TRACE_UNIFORM_AVERAGE,
        {"u_values": [float(u) for u in u_values], "n_samples": n_samples},
        tuple(samples), verdict, worst,
        f"trapezoid average of the two-bidder payoff with Richardson self-check; "
        f"threshold {threshold:g}; {FINITE_EVIDENCE_NOTE}",
    )


def induction_step_witness(mech: Mechanism, profile: BidProfile,
                           quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                           tolerances: ToleranceConfig = DEFAULT_TOLERANCES):
    """Build the proof's sybil deviation from a dominated positive share.

    Preconditions: the profile has at least 3 agents and its first agent
    bids strictly less than the max of the others.  If that dominated
    agent still receives more than tol_num of the unit, the uniqueness
    argument manufactures a profitable deviation in a smaller market: a
    bidder valuing u = max(others) bids truthfully against the others
    minus the last one, and adds a single sybil bidding that last bid.
    The deviation is evaluated in that relabeled scenario (deviator id 1,
    sybil id k+1) and returned when its gain is positive; None means the
    share was already zero and the step has nothing to exploit.
    """
    _require(profile.n_agents >= 3,
             f"induction step needs >= 3 agents, got {profile.n_agents}")
    first = profile.agents[0]
    low_bid = profile.bid_of(first)
    rival_bids = [profile.bid_of(a) for a in profile.agents[1:]]
    u = max(rival_bids)
    _require(low_bid < u,
             f"induction step needs the first bid below the rival max, "
             f"got {low_bid!r} >= {u!r}")

    dominated_share = mech.allocate(profile).share_of(first)
    if dominated_share <= tolerances.tol_num:
        return None

    base = BidProfile.from_bids([u] + rival_bids[:-1])
    sybil_bid = rival_bids[-1]
    truthful = truthful_side_utility(mech, base, 1, quadrature, tolerances)
    deviant = sybil_utility(mech, base, 1, (sybil_bid,), quadrature, tolerances)
    gain = deviant - truthful
    if gain <= tolerances.tol_num:
        return None
    return Deviation(KIND_SYBIL, base, 1, sybil_bids=(sybil_bid,),
                     truthful_utility=truthful, deviant_utility=deviant, gain=gain)


def induction_step_trace(mech: Mechanism, profile: BidProfile,
                         quadrature: QuadratureConfig = DEFAULT_QUADRATURE,
                         tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> LemmaTrace:
    """induction_step_witness wrapped as a trace for reporting."""
    deviation = induction_step_witness(mech, profile, quadrature, tolerances)
    gain = 0.0 if deviation is None else deviation.gain
    sample = TraceSample(profile.n_agents, gain, 0.0, -gain)
    return LemmaTrace(
        TRACE_INDUCTION_STEP,
        {"profile": profile.to_dict()},
        (sample,),
        "violated" if deviation is not None else "consistent",
        -gain,
        f"explicit sybil deviation from a dominated positive share; "
        f"{FINITE_EVIDENCE_NOTE}",
        extra={"deviation": None if deviation is None else deviation.to_dict()},
    )
