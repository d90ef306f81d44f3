import pytest

from mechlab import (
    BidProfile,
    IdentityPreconditionError,
    PreconditionError,
    SearchGrid,
    induction_step_trace,
    induction_step_witness,
    make_mechanism,
    payoff_floor_gap,
    payoff_floor_trace,
    replication_chain_check,
    replication_limit_trace,
    rival_monotonicity_trace,
    uniform_average_identity,
    uniform_average_trace,
)


def profile(*bids):
    return BidProfile.from_bids([float(b) for b in bids])


class TestReplicationLimit:
    def test_spa_constant_at_one(self, spa):
        trace = replication_limit_trace(spa, 7.0, 3.0, n_max=50)
        assert trace.consistent
        assert all(s.computed == 1.0 for s in trace.samples)
        assert trace.extra["running_max"] == 1.0

    def test_lottery_equals_one_over_n(self, lottery):
        trace = replication_limit_trace(lottery, 7.0, 3.0, n_max=50)
        assert not trace.consistent
        for s in trace.samples:
            assert s.computed == 1.0 / s.param
        assert trace.extra["running_max"] == 0.5

    def test_proportional_closed_form(self, proportional):
        trace = replication_limit_trace(proportional, 7.0, 3.0, n_max=50)
        assert not trace.consistent
        for s in trace.samples:
            n = s.param
            assert s.computed == pytest.approx(7.0 / (7.0 + 3.0 * (n - 1)), abs=1e-12)

    def test_doubling_never_decreases_running_max(self, proportional):
        short = replication_limit_trace(proportional, 7.0, 3.0, n_max=20)
        long = replication_limit_trace(proportional, 7.0, 3.0, n_max=40)
        assert long.extra["running_max"] >= short.extra["running_max"]

    def test_requires_lead_above_rival(self, spa):
        with pytest.raises(PreconditionError):
            replication_limit_trace(spa, 3.0, 3.0)


class TestReplicationChain:
    def test_spa_chain_tight(self, spa):
        trace = replication_chain_check(spa, 7.0, 3.0, n_max=20)
        assert trace.consistent
        assert trace.worst_slack == pytest.approx(0.0, abs=1e-9)

    def test_lottery_chain_violated_from_two_bidders(self, lottery):
        trace = replication_chain_check(lottery, 7.0, 3.0, n_max=20)
        assert not trace.consistent
        first = trace.samples[0]
        assert first.param == 2
        # 7/2 against 7/3 + 4/3: short by exactly 1/6
        assert first.slack == pytest.approx(-1 / 6, abs=1e-9)
        assert trace.worst_slack == pytest.approx(7 / 4 - 11 / 5, abs=1e-9)

    def test_sybil_share_identity_for_symmetric_rules(self, lottery, spa):
        for mech in (lottery, spa):
            trace = replication_chain_check(mech, 7.0, 3.0, n_max=10)
            assert trace.extra["worst_identity_gap"] <= 1e-9

    def test_spa_tie_split_behind_the_identity(self, spa):
        # x2 = (1/n)(1 - x1) at an (n+1)-fold tie means every share is 1/(n+1)
        for n in (2, 3, 4):
            tie = profile(*([4.0] * (n + 1)))
            shares = spa.allocate(tie)
            x1, x2 = shares.share_of(1), shares.share_of(2)
            assert x2 == pytest.approx((1.0 - x1) / n, abs=1e-12)


class TestPayoffFloor:
    def test_spa_floor_tight(self, spa):
        assert payoff_floor_gap(spa, 7.0, 3.0) == pytest.approx(0.0, abs=1e-9)
        assert payoff_floor_gap(spa, 5.0, 5.0) == pytest.approx(0.0, abs=1e-9)

    def test_lottery_floor_breach(self, lottery):
        assert payoff_floor_gap(lottery, 7.0, 3.0) == pytest.approx(-0.5, abs=1e-9)

    def test_floor_requires_ordered_pair(self, spa):
        with pytest.raises(PreconditionError):
            payoff_floor_gap(spa, 3.0, 7.0)

    def test_spa_trace_consistent(self, spa):
        trace = payoff_floor_trace(spa, 7.0)
        assert trace.consistent

    def test_lottery_trace_flags_breach(self, lottery):
        trace = payoff_floor_trace(lottery, 7.0)
        assert not trace.consistent
        assert trace.worst_slack == pytest.approx(-3.5, abs=1e-9)  # at v = 0


class TestRivalMonotonicity:
    def test_spa_slope_minus_one(self, spa):
        grid = SearchGrid(0.0, 7.0, 0.35)
        trace = rival_monotonicity_trace(spa, 7.0, grid)
        assert trace.consistent
        payoffs = [s.computed for s in trace.samples]
        assert payoffs[0] == pytest.approx(7.0, abs=1e-9)
        drops = [a - b for a, b in zip(payoffs, payoffs[1:])]
        assert all(d == pytest.approx(0.35, abs=1e-6) for d in drops)

    def test_all_builtins_weakly_decreasing(self, suite):
        for mech in suite:
            if mech.payment_mode != "myerson":
                mech = make_mechanism(mech.name, payment_mode="myerson")
            assert rival_monotonicity_trace(mech, 7.0).consistent

    def test_lottery_constant(self, lottery):
        trace = rival_monotonicity_trace(lottery, 7.0)
        assert trace.consistent
        assert all(s.computed == pytest.approx(3.5, abs=1e-9) for s in trace.samples)


class TestUniformAverage:
    def test_identity_for_symmetric_non_wasteful_builtins(
            self, spa, lottery, proportional_myerson):
        for mech in (spa, lottery, proportional_myerson):
            for u in (1.0, 2.0, 5.0):
                result = uniform_average_identity(mech, u)
                assert result.reference == u / 2.0
                assert result.gap <= 1e-4, (mech.name, u)
                assert result.richardson_gap <= 1e-6

    def test_trace_over_default_levels(self, spa):
        trace = uniform_average_trace(spa)
        assert trace.consistent
        assert [s.param for s in trace.samples] == [1.0, 2.0, 5.0]

    def test_reserve_rejected_as_wasteful(self, reserve):
        with pytest.raises(IdentityPreconditionError):
            uniform_average_identity(reserve, 5.0)

    def test_asymmetric_rejected_on_symmetry(self, asymmetric):
        with pytest.raises(IdentityPreconditionError):
            uniform_average_identity(asymmetric, 5.0)

    def test_requires_positive_level(self, spa):
        with pytest.raises(PreconditionError):
            uniform_average_identity(spa, 0.0)


class TestInductionStep:
    def test_spa_yields_no_witness(self, spa):
        assert induction_step_witness(spa, profile(2, 7, 5)) is None

    def test_lottery_witness_gain(self, lottery):
        dev = induction_step_witness(lottery, profile(2, 7, 5))
        assert dev is not None
        assert dev.gain == pytest.approx(7 / 6, abs=1e-9)
        assert dev.sybil_bids == (5.0,)
        # the deviation plays out in the population with the last rival dropped
        assert dev.profile.bids == (7.0, 7.0)

    def test_proportional_myerson_witness_exists(self, proportional_myerson):
        dev = induction_step_witness(proportional_myerson, profile(2, 7, 5))
        assert dev is not None and dev.gain > 1e-3

    def test_requires_dominated_first_agent(self, lottery):
        with pytest.raises(PreconditionError):
            induction_step_witness(lottery, profile(9, 7, 5))

    def test_requires_three_agents(self, lottery):
        with pytest.raises(PreconditionError):
            induction_step_witness(lottery, profile(2, 7))

    def test_trace_wraps_witness(self, lottery):
        trace = induction_step_trace(lottery, profile(2, 7, 5))
        assert not trace.consistent
        assert trace.extra["deviation"]["gain"] == pytest.approx(7 / 6, abs=1e-9)

    def test_trace_consistent_without_witness(self, spa):
        trace = induction_step_trace(spa, profile(2, 7, 5))
        assert trace.consistent


class TestProofLocalization:
    def test_sybil_failures_trip_at_least_one_step(self, lottery, proportional_myerson):
        # any mechanism the axiom module catches on sybil-proofness must be
        # localized by some step of the argument
        for mech in (lottery, proportional_myerson):
            limit = replication_limit_trace(mech, 7.0, 3.0, n_max=50)
            chain = replication_chain_check(mech, 7.0, 3.0, n_max=20)
            floor = payoff_floor_gap(mech, 7.0, 3.0)
            witness = induction_step_witness(mech, profile(2, 7, 5))
            tripped = (not limit.consistent or not chain.consistent
                       or floor < -(1e-9 + 2e-6) or witness is not None)
            assert tripped, mech.name
