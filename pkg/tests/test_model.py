"""Probability algebra: signals in both representations, Bayes updating,
sincere votes under both tie rules, populations and the continuum A-share.

The illustrative numbers (a 55% voter, a designer who always says "A" in
state A and says "A" 70% of the time in state B) are pinned exactly.
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from juryrig.model import (
    UNINFORMATIVE, Belief, ContradictoryEvidence, Exogenous, Message,
    ModelDomainError, PopulationProfile, Signal, State, TieRule, Vote,
    VoterCell, bias, conditionals_to_posteriors, election_outcome,
    exact_vote_share, parse_state, parse_tie, posteriors_to_conditionals,
    sincere_vote, update_belief,
)

FIRST_SCHEME = (1.0, 0.7)
SECOND_SCHEME = (0.53, 0.43)


# =============================================================================
# Signals
# =============================================================================

class TestSignal:

    def test_default_is_uninformative(self):
        s = Signal()
        assert not s.informative
        assert s == UNINFORMATIVE
        assert posteriors_to_conditionals(s) == (1.0, 1.0)

    def test_symmetric_signal_conditionals(self):
        pa, pb = Signal(0.7, 0.3).conditionals
        assert pa == pytest.approx(0.7)
        assert pb == pytest.approx(0.3)

    def test_conditionals_of_a_one_sided_signal(self):
        pa, pb = Signal(0.7, 0.0).conditionals
        assert pa == pytest.approx(1.0)
        assert pb == pytest.approx(0.3 / 0.7)

    def test_from_conditionals_first_scheme(self):
        s = Signal.from_conditionals(*FIRST_SCHEME)
        assert s.alpha == pytest.approx(1.0 / 1.7)
        assert s.beta == 0.0

    def test_from_conditionals_relabels_reversed_messages(self):
        s = conditionals_to_posteriors(0.3, 0.7)
        assert (s.alpha, s.beta) == pytest.approx((0.7, 0.3))

    def test_equal_conditionals_are_uninformative(self):
        assert conditionals_to_posteriors(0.4, 0.4) is UNINFORMATIVE

    def test_non_uniform_prior_refused(self):
        with pytest.raises(ModelDomainError, match="uniform prior"):
            conditionals_to_posteriors(0.6, 0.4, prior=0.3)

    def test_malformed_pair_refused(self):
        with pytest.raises(ModelDomainError, match="malformed"):
            Signal(0.3, 0.7)

    def test_implausible_pair_refused(self):
        with pytest.raises(ModelDomainError, match="Bayes-plausible"):
            Signal(0.45, 0.3)

    def test_probability_range_refused(self):
        with pytest.raises(ModelDomainError, match="not a probability"):
            Signal(1.2, 0.0)

    def test_bias(self):
        assert bias(Signal(0.7, 0.3)) == pytest.approx(0.0, abs=1e-15)
        assert Signal(0.7, 0.31).bias == pytest.approx(-0.01 / 0.39)
        assert Signal(0.6, 0.0).bias == pytest.approx(0.4 / 0.6)
        assert bias(UNINFORMATIVE) is None

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_conditionals_survive_a_round_trip(self, pa, pb):
        assume(abs(pa - pb) > 1e-6)
        back = conditionals_to_posteriors(pa, pb).conditionals
        if pa < pb:
            pa, pb = 1.0 - pa, 1.0 - pb
        assert back == pytest.approx((pa, pb), abs=1e-6)

    @given(st.floats(0.51, 1.0), st.floats(0.0, 0.49))
    def test_posteriors_survive_a_round_trip(self, alpha, beta):
        back = conditionals_to_posteriors(*posteriors_to_conditionals(Signal(alpha, beta)))
        assert back.alpha == pytest.approx(alpha, abs=1e-12)
        assert back.beta == pytest.approx(beta, abs=1e-12)

    @given(st.floats(0.51, 1.0), st.floats(0.0, 0.49))
    def test_bias_two_routes_agree(self, alpha, beta):
        pa, pb = posteriors_to_conditionals(Signal(alpha, beta))
        assert bias(Signal(alpha, beta)) == pytest.approx(pb - (1.0 - pa), abs=1e-12)

    @given(st.floats(0.51, 0.99), st.floats(0.0, 0.48), st.floats(1e-3, 0.01))
    def test_false_pro_a_falls_with_both_posteriors(self, alpha, beta, d):
        pb = Signal(alpha, beta).conditionals[1]
        assert Signal(alpha + d, beta).conditionals[1] < pb
        assert Signal(alpha, beta + d).conditionals[1] < pb


# =============================================================================
# Beliefs and votes
# =============================================================================

class TestBeliefUpdate:
    """The posteriors of the illustrative example."""

    def test_a_voter_first_scheme(self):
        post = update_belief(Belief(0.55), FIRST_SCHEME[0] / FIRST_SCHEME[1])
        assert post.p_theta_a == pytest.approx(0.6358, abs=5e-3)
        assert post.p_theta_a == pytest.approx(0.55 / (0.55 + 0.45 * 0.7))

    def test_b_voter_first_scheme(self):
        post = update_belief(Belief(0.45), FIRST_SCHEME[0] / FIRST_SCHEME[1])
        assert post.p_theta_a == pytest.approx(0.5389, abs=5e-3)

    def test_a_voter_second_scheme_pro_b(self):
        ratio = (1 - SECOND_SCHEME[0]) / (1 - SECOND_SCHEME[1])
        post = update_belief(Belief(0.55), ratio)
        assert post.p_theta_a == pytest.approx(0.5024, abs=5e-3)
        assert post.p_theta_a > 0.5

    def test_b_voter_second_scheme_pro_a(self):
        post = update_belief(Belief(0.45), SECOND_SCHEME[0] / SECOND_SCHEME[1])
        assert post.p_theta_a == pytest.approx(0.5024, abs=5e-3)
        assert post.p_theta_a > 0.5

    def test_certain_belief_absorbs_finite_evidence(self):
        assert update_belief(Belief(1.0), 0.01).p_theta_a == 1.0
        assert update_belief(Belief(0.0), 50.0).p_theta_a == 0.0

    def test_infinite_ratio_reveals_a(self):
        assert update_belief(Belief(0.3), math.inf).p_theta_a == 1.0

    def test_contradictory_evidence_refused(self):
        with pytest.raises(ContradictoryEvidence):
            update_belief(Belief(1.0), 0.0)
        with pytest.raises(ContradictoryEvidence):
            update_belief(Belief(0.0), math.inf)

    def test_negative_ratio_refused(self):
        with pytest.raises(ModelDomainError, match="likelihood ratio"):
            update_belief(Belief(0.5), -1.0)

    @given(st.floats(0.01, 0.99), st.floats(0.01, 100.0))
    def test_inverse_evidence_restores_the_prior(self, p, r):
        back = update_belief(update_belief(Belief(p), r), 1.0 / r)
        assert back.p_theta_a == pytest.approx(p, rel=1e-9, abs=1e-12)


class TestVotes:

    def test_indifferent_voter_follows_tie_rule(self):
        assert sincere_vote(Belief(0.5)) is Vote.A
        assert sincere_vote(Belief(0.5), TieRule.FAVOR_B) is Vote.B

    def test_strict_beliefs(self):
        assert sincere_vote(Belief(0.51), TieRule.FAVOR_B) is Vote.A
        assert sincere_vote(Belief(0.49)) is Vote.B

    def test_election_outcome(self):
        assert election_outcome(0.5) is Vote.A
        assert election_outcome(0.5, TieRule.FAVOR_B) is Vote.B
        assert election_outcome(0.2) is Vote.B

    def test_share_outside_unit_interval_refused(self):
        with pytest.raises(ModelDomainError, match="outside"):
            election_outcome(1.5)

    def test_parsers(self):
        assert parse_state("b") is State.THETA_B
        assert parse_state("theta_A") is State.THETA_A
        assert parse_tie("Favor-B") is TieRule.FAVOR_B
        with pytest.raises(ModelDomainError, match="unknown state"):
            parse_state("C")
        with pytest.raises(ModelDomainError, match="unknown tie rule"):
            parse_tie("coin")


# =============================================================================
# Populations and continuum shares
# =============================================================================

class TestPopulationProfile:

    def test_q_low_below_half_refused(self):
        with pytest.raises(ModelDomainError, match="q_low below 0.5"):
            PopulationProfile(0.0, 0.45, 0.7)

    def test_q_high_below_q_low_refused(self):
        with pytest.raises(ModelDomainError, match="below q_low"):
            PopulationProfile(0.2, 0.8, 0.7)

    def test_lambda_range(self):
        with pytest.raises(ModelDomainError, match="lambda"):
            PopulationProfile(1.2, 0.6, 0.7)

    def test_normalized_drops_irrelevant_lambda(self):
        assert PopulationProfile(0.4, 0.7, 0.7).normalized() == \
            PopulationProfile.homogeneous(0.7)

    def test_classes_skip_empty_classes(self):
        assert PopulationProfile(0.0, 0.6, 0.7).classes == ((1.0, 0.7),)
        assert PopulationProfile(0.25, 0.6, 0.7).classes == ((0.25, 0.6), (0.75, 0.7))


class TestVoterCell:

    def test_impossible_cell_has_no_posterior(self):
        cell = VoterCell(1.0, Exogenous.A, Message.PRO_B)
        assert cell.posterior(Signal(1.0, 0.0)) is None

    def test_first_scheme_cells(self):
        signal = Signal.from_conditionals(*FIRST_SCHEME)
        b_pro_a = VoterCell(0.55, Exogenous.B, Message.PRO_A).posterior(signal)
        b_pro_b = VoterCell(0.55, Exogenous.B, Message.PRO_B).posterior(signal)
        assert b_pro_a.p_theta_a == pytest.approx(0.45 / (0.45 + 0.55 * 0.7))
        assert b_pro_b.p_theta_a == 0.0


class TestExactVoteShare:

    def test_first_scheme_state_b(self):
        signal = Signal.from_conditionals(*FIRST_SCHEME)
        share = exact_vote_share(PopulationProfile.homogeneous(0.55), signal, State.THETA_B)
        assert share == pytest.approx(0.7)

    def test_first_scheme_state_a(self):
        signal = Signal.from_conditionals(*FIRST_SCHEME)
        share = exact_vote_share(PopulationProfile.homogeneous(0.55), signal, State.THETA_A)
        assert share == pytest.approx(1.0)

    def test_second_scheme_only_b_pro_b_votes_b(self):
        signal = Signal.from_conditionals(*SECOND_SCHEME)
        profile = PopulationProfile.homogeneous(0.55)
        assert 1 - exact_vote_share(profile, signal, State.THETA_B) == pytest.approx(0.55 * 0.57)
        assert 1 - exact_vote_share(profile, signal, State.THETA_A) == pytest.approx(0.45 * 0.47)

    def test_unbiased_signal_gives_one_minus_q_squared(self):
        share = exact_vote_share(PopulationProfile.homogeneous(0.7), Signal(0.7, 0.3),
                                 State.THETA_B)
        assert share == pytest.approx(0.51)

    def test_tie_rule_matters_on_knife_edges(self):
        profile = PopulationProfile.homogeneous(0.7)
        favor_b = exact_vote_share(profile, Signal(0.7, 0.3), State.THETA_B, TieRule.FAVOR_B)
        assert favor_b == pytest.approx(0.3 * 0.3)

    def test_uninformed_voters_all_vote_a(self):
        profile = PopulationProfile(1.0, 0.5, 0.7)
        assert exact_vote_share(profile, UNINFORMATIVE, State.THETA_B) == 1.0

    @given(st.floats(0.0, 1.0), st.floats(0.5, 1.0), st.floats(0.5, 1.0),
           st.floats(0.51, 1.0), st.floats(0.0, 0.49))
    def test_share_is_a_fraction(self, lam, q1, q2, alpha, beta):
        profile = PopulationProfile(lam, min(q1, q2), max(q1, q2))
        for state in State:
            share = exact_vote_share(profile, Signal(alpha, beta), state)
            assert -1e-12 <= share <= 1.0 + 1e-12

    def test_state_a_share_never_below_state_b_share(self):
        profile = PopulationProfile(0.3, 0.6, 0.8)
        for alpha in np.linspace(0.55, 1.0, 7):
            for beta in np.linspace(0.0, 0.45, 7):
                s = Signal(float(alpha), float(beta))
                assert exact_vote_share(profile, s, State.THETA_A) >= \
                    exact_vote_share(profile, s, State.THETA_B) - 1e-12
