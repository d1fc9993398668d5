"""Finite electorates: Monte Carlo elections and the exact single-voter and
no-designer baselines.

Each trial draws its own generator from ``SeedSequence([seed, trial])``, so
a trial's outcome depends only on the seed and its index and trials can be
run in any order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.stats import binom

from juryrig.model import (
    ModelDomainError, PopulationProfile, Signal, State, TieRule, Vote,
    votes_a, election_outcome, exact_vote_share, posteriors_to_conditionals,
    warn,
)


@dataclass(frozen=True)
class SimConfig:
    n_voters: int = 10001
    trials: int = 500
    seed: int = 0
    tie: TieRule = TieRule.FAVOR_A
    fixed_split: bool = False

    def __post_init__(self):
        if isinstance(self.n_voters, bool) or not isinstance(self.n_voters, int) \
                or self.n_voters < 1:
            raise ModelDomainError(f"n_voters = {self.n_voters!r} must be a positive integer")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) \
                or self.trials < 1:
            raise ModelDomainError(f"trials = {self.trials!r} must be a positive integer")
        if not 0 <= self.seed < 2 ** 64:
            raise ModelDomainError(f"seed = {self.seed} is not a 64-bit unsigned integer")

    def as_dict(self) -> dict:
        return {"n_voters": self.n_voters, "trials": self.trials,
                "seed": self.seed, "tie": self.tie.value,
                "fixed_split": self.fixed_split}


@dataclass(frozen=True)
class ElectionResult:
    state: State
    a_win_frequency: float
    share_mean: float
    share_variance: float
    exact_share: float
    tallies: Optional[tuple[int, ...]] = None

    @property
    def b_win_frequency(self) -> float:
        return 1.0 - self.a_win_frequency

    @property
    def correct_frequency(self) -> float:
        return (self.a_win_frequency if self.state is State.THETA_A
                else self.b_win_frequency)

    def as_dict(self) -> dict:
        out = {"state": self.state.value,
               "a_win_frequency": self.a_win_frequency,
               "b_win_frequency": self.b_win_frequency,
               "a_share_mean": self.share_mean,
               "a_share_variance": self.share_variance,
               "exact_a_share": self.exact_share}
        if self.tallies is not None:
            out["a_tallies"] = list(self.tallies)
        return out


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def _accuracies(profile: PopulationProfile, n: int, rng: np.random.Generator,
                fixed_split: bool) -> np.ndarray:
    if fixed_split:
        n_low = int(round(profile.lam * n))
        return np.where(np.arange(n) < n_low, profile.q_low, profile.q_high)
    return np.where(rng.random(n) < profile.lam, profile.q_low, profile.q_high)


def _tally(profile: PopulationProfile, pa: float, pb: float, state: State,
           config: SimConfig, trial: int) -> int:
    rng = trial_rng(config.seed, trial)
    n = config.n_voters
    q = _accuracies(profile, n, rng, config.fixed_split)
    correct = rng.random(n) < q
    exo_a = correct if state is State.THETA_A else ~correct
    pro_a = rng.random(n) < (pa if state is State.THETA_A else pb)
    like_a = np.where(exo_a, q, 1.0 - q) * np.where(pro_a, pa, 1.0 - pa)
    like_b = np.where(exo_a, 1.0 - q, q) * np.where(pro_a, pb, 1.0 - pb)
    # a sampled cell has positive probability in the true state
    posterior = like_a / (like_a + like_b)
    return int(np.count_nonzero(votes_a(posterior, config.tie)))


def simulate(profile: PopulationProfile, signal: Signal, state: State,
             config: SimConfig = SimConfig(),
             keep_tallies: bool = False) -> ElectionResult:
    """Run ``config.trials`` elections of ``config.n_voters`` sincere voters."""
    if config.n_voters % 2 == 0:
        warn(f"n_voters = {config.n_voters} is even; exact ties go to "
             f"{'A' if config.tie is TieRule.FAVOR_A else 'B'}")
    pa, pb = posteriors_to_conditionals(signal)
    n = config.n_voters
    tallies = np.array([_tally(profile, pa, pb, state, config, t)
                        for t in range(config.trials)])
    if config.tie is TieRule.FAVOR_A:
        a_wins = 2 * tallies >= n
    else:
        a_wins = 2 * tallies > n
    shares = tallies / n
    return ElectionResult(
        state=state,
        a_win_frequency=float(a_wins.mean()),
        share_mean=float(shares.mean()),
        share_variance=float(shares.var()),
        exact_share=exact_vote_share(profile, signal, state, config.tie),
        tallies=tuple(int(t) for t in tallies) if keep_tallies else None,
    )


def _as_profile(population: Union[PopulationProfile, float]) -> PopulationProfile:
    if isinstance(population, PopulationProfile):
        return population
    return PopulationProfile.homogeneous(float(population))


def single_voter(population: Union[PopulationProfile, float], signal: Signal,
                 state: State, tie: TieRule = TieRule.FAVOR_A) -> float:
    """Probability that one voter drawn from ``population`` chooses the
    alternative matching ``state``."""
    share_a = exact_vote_share(_as_profile(population), signal, state, tie)
    return share_a if state is State.THETA_A else 1.0 - share_a


def condorcet_exact(accuracy: float, n_voters: int) -> float:
    """Probability that an honest majority of ``n_voters`` independent voters
    of the given accuracy is right, averaged over the two states."""
    k_win = n_voters // 2 + 1
    strict = float(binom.sf(k_win - 1, n_voters, accuracy))
    if n_voters % 2:
        return strict
    # a tie is right in exactly one of the two states
    return strict + 0.5 * float(binom.pmf(n_voters // 2, n_voters, accuracy))


def condorcet_baseline(accuracy: float, n_voters: int, trials: int = 2000,
                       seed: int = 0, tie: TieRule = TieRule.FAVOR_A) -> float:
    """Empirical frequency with which the majority picks the right
    alternative when no designer speaks."""
    if not 0.5 <= accuracy <= 1.0:
        raise ModelDomainError(f"accuracy {accuracy} outside [1/2, 1]")
    if n_voters < 1 or trials < 1:
        raise ModelDomainError("n_voters and trials must be positive")
    if n_voters % 2 == 0:
        warn(f"n_voters = {n_voters} is even; exact ties go to the tie rule")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    in_a = rng.random(trials) < 0.5
    right = rng.binomial(n_voters, accuracy, size=trials)
    a_votes = np.where(in_a, right, n_voters - right)
    if tie is TieRule.FAVOR_A:
        a_wins = 2 * a_votes >= n_voters
    else:
        a_wins = 2 * a_votes > n_voters
    return float(np.mean(a_wins == in_a))


@dataclass(frozen=True)
class JuryComparison:
    """Lone voter vs continuum majority, per state."""
    state: State
    single_voter_correct: float
    a_share: float
    majority: Vote

    @property
    def majority_correct(self) -> bool:
        return (self.majority is Vote.A) == (self.state is State.THETA_A)

    def as_dict(self) -> dict:
        return {"state": self.state.value,
                "single_voter_correct": self.single_voter_correct,
                "a_share": self.a_share,
                "majority": self.majority.value,
                "majority_correct": self.majority_correct}


def single_voter_majority_gap(population: Union[PopulationProfile, float],
                              signal: Signal,
                              tie: TieRule = TieRule.FAVOR_A) -> tuple[JuryComparison, ...]:
    profile = _as_profile(population)
    out = []
    for state in State:
        share = exact_vote_share(profile, signal, state, tie)
        out.append(JuryComparison(state, single_voter(profile, signal, state, tie),
                                  share, election_outcome(share, tie)))
    return tuple(out)
