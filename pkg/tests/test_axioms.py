import pytest
from hypothesis import given
from hypothesis import strategies as st

from mechlab import (
    ALL_AXIOMS,
    BidProfile,
    NAMED_AXIOMS,
    Permutation,
    SearchGrid,
    check_incentive_compatibility,
    check_individual_rationality,
    check_monotonicity,
    check_non_wastefulness,
    check_symmetry,
    check_sybil_proofness,
    check_zero_bid_payment,
    independence_matrix,
    make_mechanism,
    replay_witness,
    run_all_checks,
)
from conftest import sample_profiles


def profile(*bids):
    return BidProfile.from_bids([float(b) for b in bids])


class TestPermutation:
    def test_apply_moves_bid_to_image(self):
        perm = Permutation.from_map({1: 2, 2: 3, 3: 1})
        w = perm.apply(profile(5, 3, 1))
        # agent 2 now holds agent 1's bid, and so on around the cycle
        assert w.bid_of(2) == 5.0 and w.bid_of(3) == 3.0 and w.bid_of(1) == 1.0

    def test_identity(self):
        perm = Permutation.from_map({1: 1, 2: 2})
        p = profile(5, 3)
        assert perm.apply(p).bids == p.bids

    def test_rejects_non_bijection(self):
        with pytest.raises(Exception):
            Permutation.from_map({1: 2, 2: 2})


class TestIndividualCheckers:
    def test_spa_non_wasteful(self, spa, tolerances):
        report = check_non_wastefulness(spa, [profile(5, 3), profile(0, 0)], tolerances)
        assert report.passed and report.violations_found == 0

    def test_reserve_wastes_below_reserve(self, reserve, tolerances):
        report = check_non_wastefulness(reserve, [profile(2, 3)], tolerances)
        assert not report.passed
        assert report.witnesses[0].violation == pytest.approx(1.0)

    def test_spa_symmetric_under_all_permutations(self, spa, tolerances):
        report = check_symmetry(spa, [profile(4, 4), profile(5, 3, 1)],
                                tolerances=tolerances)
        assert report.passed

    def test_proportional_symmetric_under_three_cycles(self, proportional, tolerances):
        # the all-permutations sweep includes non-involutions; a labeling
        # convention mistake in the checker shows up exactly here
        report = check_symmetry(proportional, [profile(1, 2, 4), profile(5, 3, 1, 2)],
                                tolerances=tolerances)
        assert report.passed

    def test_asymmetric_tiebreak_caught_by_swap(self, asymmetric, tolerances):
        report = check_symmetry(asymmetric, [profile(4, 4)], tolerances=tolerances)
        assert not report.passed
        assert report.witnesses[0].violation == pytest.approx(1.0)

    def test_all_builtins_monotone(self, suite, grid, tolerances):
        profiles = [profile(5, 3), profile(4, 4, 1)]
        for mech in suite:
            assert check_monotonicity(mech, profiles, grid, tolerances).passed

    def test_zero_bid_payment_pass(self, suite, quadrature, tolerances):
        profiles = [profile(0, 4), profile(0, 0)]
        for mech in suite:
            assert check_zero_bid_payment(mech, profiles, quadrature, tolerances).passed

    def test_spa_incentive_compatible(self, spa, grid, quadrature, tolerances):
        report = check_incentive_compatibility(spa, [profile(5, 3), profile(4, 4)],
                                               grid, quadrature, tolerances)
        assert report.passed

    def test_proportional_explicit_not_ic(self, proportional, grid, quadrature, tolerances):
        report = check_incentive_compatibility(proportional, [profile(4, 4)],
                                               grid, quadrature, tolerances)
        assert not report.passed
        # best misreport on the grid beats truth by at least the refined oracle
        assert report.witnesses[0].violation > 0.3

    def test_lottery_not_sybil_proof(self, lottery, grid, quadrature, tolerances):
        report = check_sybil_proofness(lottery, [profile(5, 1)], grid,
                                       quadrature, tolerances)
        assert not report.passed
        assert report.witnesses[0].violation == pytest.approx(5 / 6, abs=1e-9)

    def test_spa_sybil_proof(self, spa, grid, quadrature, tolerances):
        report = check_sybil_proofness(spa, [profile(5, 1), profile(4, 4)],
                                       grid, quadrature, tolerances)
        assert report.passed

    def test_proportional_explicit_violates_ir(self, proportional, quadrature, tolerances):
        report = check_individual_rationality(proportional, [profile(1, 5)],
                                              quadrature, tolerances)
        assert not report.passed
        # low bidder: share 1/6 of value 1, pays 0.5
        assert report.witnesses[0].violation == pytest.approx(1 / 3, abs=1e-9)

    def test_myerson_payments_are_ir(self, suite, quadrature, tolerances):
        profiles = [profile(1, 5), profile(4, 4, 2)]
        for mech in suite:
            if mech.payment_mode != "myerson":
                mech = make_mechanism(mech.name, payment_mode="myerson")
            assert check_individual_rationality(mech, profiles, quadrature,
                                                tolerances).passed


class TestReports:
    def test_verdict_matches_witnesses(self, lottery, grid, quadrature, tolerances):
        report = check_sybil_proofness(lottery, [profile(5, 1)], grid,
                                       quadrature, tolerances)
        assert report.verdict == "fail" and len(report.witnesses) >= 1

    def test_scope_note_present(self, spa, tolerances):
        report = check_non_wastefulness(spa, [profile(5, 3)], tolerances)
        assert "scope" in report.scope_note

    def test_witness_cap(self, reserve, tolerances):
        profiles = [profile(a * 0.1, b * 0.1)
                    for a in range(1, 8) for b in range(1, 8)]
        report = check_non_wastefulness(reserve, profiles, tolerances)
        assert report.violations_found == len(profiles)
        assert len(report.witnesses) <= 25

    def test_to_dict_round_trips_core_fields(self, spa, tolerances):
        report = check_non_wastefulness(spa, [profile(5, 3)], tolerances)
        d = report.to_dict()
        assert d["axiom"] == "non_wastefulness"
        assert d["verdict"] == "pass"
        assert d["profiles_tested"] == 1


class TestRunAllChecks:
    def test_covers_every_axiom(self, spa, grid, quadrature, tolerances):
        reports = run_all_checks(spa, sample_profiles(20), grid, quadrature, tolerances)
        assert set(reports) == set(ALL_AXIOMS)

    def test_parallel_equals_serial(self, lottery, grid, quadrature, tolerances):
        profiles = sample_profiles(30)
        serial = run_all_checks(lottery, profiles, grid, quadrature, tolerances, jobs=1)
        parallel = run_all_checks(lottery, profiles, grid, quadrature, tolerances, jobs=4)
        for axiom in ALL_AXIOMS:
            assert serial[axiom].to_dict() == parallel[axiom].to_dict()

    def test_repeat_runs_identical(self, asymmetric, grid, quadrature, tolerances):
        profiles = sample_profiles(25)
        first = run_all_checks(asymmetric, profiles, grid, quadrature, tolerances)
        second = run_all_checks(asymmetric, profiles, grid, quadrature, tolerances)
        for axiom in ALL_AXIOMS:
            assert first[axiom].to_dict() == second[axiom].to_dict()


class TestIndependencePattern:
    def test_reduced_budget_pattern(self):
        matrix = independence_matrix(profile_budget=120)
        assert matrix.pattern_ok, matrix.mismatches
        verdicts = matrix.verdicts()
        assert all(v == "pass" for v in verdicts["spa"].values())
        assert verdicts["reserve_spa"]["non_wastefulness"] == "fail"
        assert verdicts["lottery"]["sybil_proofness"] == "fail"
        assert verdicts["asymmetric_spa"]["symmetry"] == "fail"
        assert verdicts["proportional"]["incentive_compatibility"] == "fail"

    def test_named_axiom_single_failures(self):
        matrix = independence_matrix(profile_budget=120)
        verdicts = matrix.verdicts()
        for name, axiom in (("reserve_spa", "non_wastefulness"),
                            ("lottery", "sybil_proofness"),
                            ("asymmetric_spa", "symmetry"),
                            ("proportional", "incentive_compatibility")):
            failed = [a for a in NAMED_AXIOMS if verdicts[name][a] == "fail"]
            assert failed == [axiom]

    def test_effort_monotonicity(self):
        small = independence_matrix(profile_budget=40)
        large = independence_matrix(profile_budget=120)
        # the sampler yields a prefix sequence, so more budget can only
        # uncover more violating profiles, never fewer
        for name, row in small.rows.items():
            for axiom, report in row.items():
                assert large.rows[name][axiom].violations_found >= report.violations_found


class TestWitnessReplay:
    def test_all_matrix_witnesses_replay(self, tolerances):
        matrix = independence_matrix(profile_budget=120)
        replayed = 0
        for name, row in matrix.rows.items():
            mech = make_mechanism(name)
            for axiom, report in row.items():
                for witness in report.witnesses:
                    magnitude = replay_witness(mech, witness)
                    assert magnitude == pytest.approx(witness.violation, abs=1e-9), (
                        f"{name}/{axiom} witness drifted on replay")
                    replayed += 1
        assert replayed > 0


class TestAxiomProperties:
    @given(st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=2, max_size=5),
           st.randoms(use_true_random=False))
    def test_spa_share_follows_relabeling(self, bids, rng):
        p = BidProfile.from_bids(bids)
        images = list(p.agents)
        rng.shuffle(images)
        perm = Permutation(tuple(zip(p.agents, images)))
        spa = make_mechanism("spa")
        base, relabeled = spa.allocate(p), spa.allocate(perm.apply(p))
        for agent in p.agents:
            assert base.share_of(agent) == pytest.approx(
                relabeled.share_of(perm.image(agent)), abs=1e-12)

    @given(st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=2, max_size=4),
           st.integers(min_value=0, max_value=20))
    def test_spa_misreports_never_profit(self, bids, step):
        from mechlab import misreport_utility, truthful_side_utility
        spa = make_mechanism("spa")
        p = BidProfile.from_bids(bids)
        agent = p.agents[0]
        bid = step * 0.5
        gain = (misreport_utility(spa, p, agent, bid)
                - truthful_side_utility(spa, p, agent))
        assert gain <= 1e-9 + 2e-6
