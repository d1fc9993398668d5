"""Signals with more than two realizations: validation, the binary-split
decomposition and the reduction to a binary signal.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from juryrig.model import ModelDomainError, PopulationProfile, Signal, State
from juryrig.splitting import (
    MultiSignal, decompose, decomposition_tree, leaf_mixture,
    multisignal_share, reduce_to_binary, split_problems,
)

PROFILES = [
    PopulationProfile.homogeneous(0.7),
    PopulationProfile(0.4, 0.69, 0.7),
    PopulationProfile(0.32, 0.51, 0.7),
    PopulationProfile(0.3, 0.6, 0.7),
]


@st.composite
def multisignals(draw):
    """Posteriors on a 1/100 grid with integer weights, balanced by one
    realization at 0 or 1 so the posteriors average to 1/2."""
    n = draw(st.integers(2, 5))
    ks = draw(st.lists(st.integers(1, 99), min_size=n, max_size=n))
    ws = draw(st.lists(st.integers(1, 20), min_size=n, max_size=n))
    posteriors = [Fraction(k, 100) for k in ks]
    weights = [Fraction(w) for w in ws]
    total = sum(weights)
    mass = sum(x * w for x, w in zip(posteriors, weights))
    if 2 * mass < total:
        posteriors.append(Fraction(1))
        weights.append(total - 2 * mass)
    elif 2 * mass > total:
        posteriors.append(Fraction(0))
        weights.append(2 * mass - total)
    total = sum(weights)
    return MultiSignal(tuple(float(x) for x in posteriors),
                       tuple(float(w / total) for w in weights))


# =============================================================================
# Validation
# =============================================================================

class TestMultiSignal:

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ModelDomainError, match="sum to"):
            MultiSignal((0.9, 0.1), (0.5, 0.4))

    def test_bayes_plausibility(self):
        with pytest.raises(ModelDomainError, match="Bayes plausibility"):
            MultiSignal((0.9, 0.3), (0.5, 0.5))

    def test_lengths_must_match(self):
        with pytest.raises(ModelDomainError, match="posteriors but"):
            MultiSignal((0.9, 0.5, 0.1), (0.5, 0.5))

    def test_from_binary(self):
        m = MultiSignal.from_binary(Signal(0.7, 0.0))
        assert m.posteriors == (0.7, 0.0)
        assert m.probs == pytest.approx((5 / 7, 2 / 7))
        assert m.to_binary() == Signal(0.7, 0.0)

    def test_canonical_merges_equal_posteriors(self):
        m = MultiSignal((0.2, 0.8, 0.2, 0.5), (0.25, 0.5, 0.25, 0.0)).canonical()
        assert m.posteriors == (0.8, 0.2)
        assert m.probs == pytest.approx((0.5, 0.5))

    def test_to_binary_needs_two_realizations(self):
        with pytest.raises(ModelDomainError, match="3 distinct"):
            MultiSignal((0.9, 0.5, 0.2), (0.3, 0.3, 0.4)).to_binary()


# =============================================================================
# Decomposition
# =============================================================================

class TestDecompose:

    def test_balanced_extremes_leave_the_middle(self):
        signal = MultiSignal((0.9, 0.5, 0.2), (0.3, 0.3, 0.4))
        split = decompose(signal)
        assert split.eta == pytest.approx(0.7)
        assert split.s1.posteriors == (0.9, 0.2)
        assert split.s2.posteriors == (0.5,)
        assert split_problems(signal, split) == []

    def test_unbalanced_extremes_keep_one_end(self):
        signal = MultiSignal((0.8, 0.6, 0.2), (0.3, 0.3, 0.4))
        split = decompose(signal)
        assert split.eta == pytest.approx(0.6)
        assert split.s2.posteriors == (0.6, 0.2)
        assert split.s2.probs == pytest.approx((0.75, 0.25))
        assert split_problems(signal, split) == []

    def test_binary_signal_refused(self):
        with pytest.raises(ModelDomainError, match="more than two"):
            decompose(MultiSignal((0.7, 0.3), (0.5, 0.5)))

    @given(multisignals())
    @settings(max_examples=200)
    def test_split_is_a_valid_mixture(self, signal):
        if len(signal.canonical()) <= 2:
            return
        assert split_problems(signal, decompose(signal), tol=1e-9) == []

    @given(multisignals())
    @settings(max_examples=100)
    def test_leaves_reproduce_the_signal(self, signal):
        leaves = leaf_mixture(decomposition_tree(signal))
        assert sum(w for w, _ in leaves) == pytest.approx(1.0, abs=1e-9)
        assert all(len(leaf) <= 2 for _, leaf in leaves)
        canonical = signal.canonical()
        original = dict(zip(canonical.posteriors, canonical.probs))
        rebuilt: dict[float, float] = {}
        for w, leaf in leaves:
            for x, p in zip(leaf.posteriors, leaf.probs):
                rebuilt[x] = rebuilt.get(x, 0.0) + w * p
        for x, p in original.items():
            assert rebuilt.get(x, 0.0) == pytest.approx(p, abs=1e-9)

    @pytest.mark.parametrize("profile", PROFILES,
                             ids=lambda p: f"{p.lam}-{p.q_low}-{p.q_high}")
    @given(signal=multisignals())
    @settings(max_examples=60, deadline=None)
    def test_share_is_linear_in_the_split(self, profile, signal):
        if len(signal.canonical()) <= 2:
            return
        split = decompose(signal)
        for state in State:
            mixed = (split.eta * multisignal_share(split.s1, profile, state)
                     + (1.0 - split.eta) * multisignal_share(split.s2, profile, state))
            assert multisignal_share(signal, profile, state) == \
                pytest.approx(mixed, abs=1e-9)


# =============================================================================
# Reduction to binary
# =============================================================================

class TestReduceToBinary:

    @pytest.mark.parametrize("profile", PROFILES,
                             ids=lambda p: f"{p.lam}-{p.q_low}-{p.q_high}")
    @given(signal=multisignals())
    @settings(max_examples=60)
    def test_binary_does_at_least_as_well(self, profile, signal):
        binary = reduce_to_binary(signal, profile)
        before = multisignal_share(signal, profile, State.THETA_B)
        after = multisignal_share(MultiSignal.from_binary(binary), profile,
                                  State.THETA_B)
        assert after >= before - 1e-9

    def test_three_realizations_against_unbiased(self):
        profile = PopulationProfile.homogeneous(0.7)
        signal = MultiSignal((0.9, 0.7, 0.3), (0.2, 0.2, 0.6))
        binary = reduce_to_binary(signal, profile)
        assert binary.informative
        assert multisignal_share(MultiSignal.from_binary(binary), profile,
                                 State.THETA_B) >= \
            multisignal_share(signal, profile, State.THETA_B) - 1e-12
