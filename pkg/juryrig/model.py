"""The probability algebra every other module builds on.

Two equally likely states, binary exogenous signals of accuracy ``q``, and a
binary designer signal described by its pair of posteriors ``(alpha, beta)``
(the belief in state A after realization ``pro-a`` / ``pro-b``, starting from
the uniform prior). A voter combines both realizations by Bayes' rule and
votes sincerely; a continuum population makes the A-vote share a
deterministic sum over the four (exogenous, designer) cells of each accuracy
class.

The cell summation is written once, over numpy arrays, so the same code
serves a single signal (:func:`exact_vote_share`), the oracle's whole grid,
n-realization signals and the continuous-accuracy integrals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

PRIOR = 0.5

# Posterior comparisons against 1/2 are resolved by the tie rule inside this
# band; the knife edges sit exactly on the candidate signals.
POSTERIOR_TOL = 1e-12

# Share comparisons against 1/2 (candidate and grid classification).
SHARE_TOL = 1e-9


class ModelDomainError(ValueError):
    """A value outside the model's domain (probability, accuracy, step ...)."""


class ContradictoryEvidence(ModelDomainError):
    """Evidence that rules out a state the belief is certain of."""


class ThresholdUndefined(ModelDomainError):
    """A closed-form threshold evaluated outside the range where it exists."""


class NotManipulableError(ModelDomainError):
    """A bias diagnosis requested for a profile no signal can manipulate."""


class InvariantViolation(AssertionError):
    """Two independent computations of the same quantity disagree."""


class JuryrigWarning(UserWarning):
    """Soft diagnostics (even electorates, oracle disagreements)."""


# --------------------------------------------------------------------------- #
# Enumerations
# --------------------------------------------------------------------------- #

class State(Enum):
    THETA_A = "A"
    THETA_B = "B"


class TieRule(Enum):
    FAVOR_A = "favor-a"
    FAVOR_B = "favor-b"


class Vote(Enum):
    A = "A"
    B = "B"


class Exogenous(Enum):
    A = "a"
    B = "b"


class Message(Enum):
    """The designer's two realizations."""
    PRO_A = "pro-a"
    PRO_B = "pro-b"


def parse_state(text: str) -> State:
    key = text.strip().upper().removeprefix("THETA_").removeprefix("THETA")
    for s in State:
        if s.value == key:
            return s
    raise ModelDomainError(f"unknown state '{text}' (expected A or B)")


def parse_tie(text: str) -> TieRule:
    try:
        return TieRule(text.strip().lower())
    except ValueError:
        raise ModelDomainError(
            f"unknown tie rule '{text}' (expected favor-a or favor-b)") from None


def _check_probability(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
        raise ModelDomainError(f"{name} = {value!r} is not a probability in [0, 1]")


# --------------------------------------------------------------------------- #
# Signals
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Signal:
    """A binary designer signal as its posterior pair.

    ``Signal()`` is the uninformative signal (both posteriors 1/2); it always
    sends ``pro-a``. Any other pair must satisfy ``0 <= beta < 1/2 < alpha <= 1``.
    """
    alpha: float = PRIOR
    beta: float = PRIOR

    def __post_init__(self):
        _check_probability(self.alpha, "alpha")
        _check_probability(self.beta, "beta")
        if self.alpha == PRIOR and self.beta == PRIOR:
            return
        if self.alpha <= self.beta:
            raise ModelDomainError(
                f"malformed signal: alpha = {self.alpha} must exceed "
                f"beta = {self.beta}")
        if not (self.beta < PRIOR < self.alpha):
            raise ModelDomainError(
                f"signal ({self.alpha}, {self.beta}) is not Bayes-plausible "
                f"at the uniform prior: need beta < 1/2 < alpha")

    @property
    def informative(self) -> bool:
        return not (self.alpha == PRIOR and self.beta == PRIOR)

    @classmethod
    def uninformative(cls) -> "Signal":
        return cls()

    @classmethod
    def from_conditionals(cls, p_a_given_theta_a: float,
                          p_a_given_theta_b: float) -> "Signal":
        return conditionals_to_posteriors(p_a_given_theta_a, p_a_given_theta_b)

    @property
    def conditionals(self) -> tuple[float, float]:
        return posteriors_to_conditionals(self)

    @property
    def bias(self) -> Optional[float]:
        return bias(self)

    def as_dict(self) -> dict:
        out = {"alpha": self.alpha, "beta": self.beta,
               "informative": self.informative}
        pa, pb = self.conditionals
        out["p_pro_a_given_theta_a"] = pa
        out["p_pro_a_given_theta_b"] = pb
        out["bias"] = self.bias
        return out


UNINFORMATIVE = Signal()


def posteriors_to_conditionals(signal: Signal) -> tuple[float, float]:
    """``(P(pro-a | theta_A), P(pro-a | theta_B))`` of ``signal``."""
    if not signal.informative:
        return 1.0, 1.0
    a, b = signal.alpha, signal.beta
    span = a - b
    pa = (a - 2 * a * b) / span
    pb = (1 - a) * (1 - 2 * b) / span
    # rounding can leave 1 + 1e-16 at alpha = 1
    return min(max(pa, 0.0), 1.0), min(max(pb, 0.0), 1.0)


def conditionals_to_posteriors(p_a_given_theta_a: float,
                               p_a_given_theta_b: float,
                               prior: float = PRIOR) -> Signal:
    """Invert :func:`posteriors_to_conditionals` at the uniform prior.

    Equal conditionals give the uninformative signal. When ``pro-a`` is the
    more likely message in state B the two realizations are relabelled, so
    the result always has ``alpha > beta``.
    """
    if prior != PRIOR:
        raise ModelDomainError(
            f"prior = {prior}: only the uniform prior 1/2 is supported")
    _check_probability(p_a_given_theta_a, "P(pro-a | theta_A)")
    _check_probability(p_a_given_theta_b, "P(pro-a | theta_B)")
    pa, pb = float(p_a_given_theta_a), float(p_a_given_theta_b)
    if pa == pb:
        return UNINFORMATIVE
    if pa < pb:
        pa, pb = 1.0 - pa, 1.0 - pb
    alpha = pa / (pa + pb)
    beta = (1.0 - pa) / ((1.0 - pa) + (1.0 - pb))
    return Signal(alpha, beta)


def bias(signal: Signal) -> Optional[float]:
    """Probability of a false ``pro-a`` in state B minus that of a false
    ``pro-b`` in state A; ``None`` for the uninformative signal."""
    if not signal.informative:
        return None
    return (1.0 - signal.beta - signal.alpha) / (signal.alpha - signal.beta)


# --------------------------------------------------------------------------- #
# Beliefs and votes
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Belief:
    p_theta_a: float = PRIOR

    def __post_init__(self):
        _check_probability(self.p_theta_a, "belief")


def update_belief(prior: Belief, likelihood_ratio: float) -> Belief:
    """Bayes' rule in odds form: posterior odds = prior odds * ratio.

    ``likelihood_ratio`` is P(observation | theta_A) / P(observation | theta_B)
    and may be 0 or ``math.inf``. Certain beliefs absorb finite evidence.
    """
    r = float(likelihood_ratio)
    if math.isnan(r) or r < 0:
        raise ModelDomainError(f"likelihood ratio {likelihood_ratio!r} must lie in [0, inf]")
    p = prior.p_theta_a
    if p == 1.0:
        if r == 0.0:
            raise ContradictoryEvidence(
                "evidence impossible in state A observed by a voter certain of A")
        return prior
    if p == 0.0:
        if math.isinf(r):
            raise ContradictoryEvidence(
                "evidence impossible in state B observed by a voter certain of B")
        return prior
    if math.isinf(r):
        return Belief(1.0)
    return Belief(p * r / (p * r + (1.0 - p)))


def votes_a(posterior, tie: TieRule):
    """Elementwise sincere vote for A (bool array)."""
    if tie is TieRule.FAVOR_A:
        return posterior >= PRIOR - POSTERIOR_TOL
    return posterior > PRIOR + POSTERIOR_TOL


def sincere_vote(posterior: Belief, tie: TieRule = TieRule.FAVOR_A) -> Vote:
    return Vote.A if bool(votes_a(posterior.p_theta_a, tie)) else Vote.B


def election_outcome(share_a: float, tie: TieRule = TieRule.FAVOR_A,
                     tol: float = POSTERIOR_TOL) -> Vote:
    if not (-tol <= share_a <= 1.0 + tol):
        raise ModelDomainError(f"A-vote share {share_a!r} outside [0, 1]")
    if tie is TieRule.FAVOR_A:
        return Vote.A if share_a >= PRIOR - tol else Vote.B
    return Vote.A if share_a > PRIOR + tol else Vote.B


# --------------------------------------------------------------------------- #
# Populations
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class PopulationProfile:
    """Share ``lam`` of voters with accuracy ``q_low``, the rest ``q_high``."""
    lam: float
    q_low: float
    q_high: float

    def __post_init__(self):
        _check_probability(self.lam, "lambda")
        _check_probability(self.q_low, "q_low")
        _check_probability(self.q_high, "q_high")
        if self.q_low < 0.5:
            raise ModelDomainError(f"q_low below 0.5 (q_low = {self.q_low})")
        if self.q_high < self.q_low:
            raise ModelDomainError(
                f"q_high = {self.q_high} below q_low = {self.q_low}")

    @classmethod
    def homogeneous(cls, q: float) -> "PopulationProfile":
        return cls(0.0, q, q)

    @property
    def is_homogeneous(self) -> bool:
        return self.q_low == self.q_high or self.lam in (0.0, 1.0)

    def normalized(self) -> "PopulationProfile":
        """Equal accuracies make ``lam`` irrelevant; it is reset to 0."""
        if self.q_low == self.q_high and self.lam != 0.0:
            return PopulationProfile(0.0, self.q_low, self.q_high)
        return self

    @property
    def classes(self) -> tuple[tuple[float, float], ...]:
        """``(weight, accuracy)`` pairs with positive weight."""
        pairs = ((self.lam, self.q_low), (1.0 - self.lam, self.q_high))
        return tuple((w, q) for w, q in pairs if w > 0.0)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "q_low": self.q_low, "q_high": self.q_high}


@dataclass(frozen=True)
class VoterCell:
    """One (exogenous, designer) contingency of an accuracy class."""
    accuracy: float
    exo: Exogenous
    message: Message

    def likelihood(self, state: State, signal: Signal) -> float:
        q = self.accuracy
        correct = (self.exo is Exogenous.A) == (state is State.THETA_A)
        p_exo = q if correct else 1.0 - q
        pa, pb = posteriors_to_conditionals(signal)
        p_pro_a = pa if state is State.THETA_A else pb
        p_msg = p_pro_a if self.message is Message.PRO_A else 1.0 - p_pro_a
        return p_exo * p_msg

    def posterior(self, signal: Signal) -> Optional[Belief]:
        """Belief in A after both realizations; ``None`` if the cell never occurs."""
        la = self.likelihood(State.THETA_A, signal)
        lb = self.likelihood(State.THETA_B, signal)
        if la + lb == 0.0:
            return None
        return Belief(la / (la + lb))


def cells(accuracy: float) -> tuple[VoterCell, ...]:
    return tuple(VoterCell(accuracy, x, m) for x in Exogenous for m in Message)


# --------------------------------------------------------------------------- #
# Vote shares
# --------------------------------------------------------------------------- #

ArrayLike = Union[float, np.ndarray]


def class_a_share(accuracy: ArrayLike, like_a, like_b, state: State,
                  tie: TieRule = TieRule.FAVOR_A) -> np.ndarray:
    """A-vote share of one accuracy class under a signal with realization
    likelihoods ``like_a`` (state A) and ``like_b`` (state B).

    The last axis of the likelihood arrays runs over realizations; leading
    axes broadcast (a grid of signals). ``accuracy`` may be an array of
    accuracies, broadcast against the leading axes.
    """
    q = np.asarray(accuracy, dtype=float)[..., np.newaxis]
    like_a = np.asarray(like_a, dtype=float)
    like_b = np.asarray(like_b, dtype=float)
    share = 0.0
    for exo_a, exo_b in ((q, 1.0 - q), (1.0 - q, q)):
        joint_a = exo_a * like_a
        joint_b = exo_b * like_b
        total = joint_a + joint_b
        with np.errstate(invalid="ignore", divide="ignore"):
            posterior = np.where(total > 0.0, joint_a / total, PRIOR)
        weight = joint_a if state is State.THETA_A else joint_b
        share = share + np.sum(weight * votes_a(posterior, tie), axis=-1)
    return share


def binary_likelihoods(pa, pb) -> tuple[np.ndarray, np.ndarray]:
    """Realization likelihood arrays ``[pro-a, pro-b]`` for conditionals."""
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    return (np.stack([pa, 1.0 - pa], axis=-1),
            np.stack([pb, 1.0 - pb], axis=-1))


def exact_vote_share(profile: PopulationProfile, signal: Signal, state: State,
                     tie: TieRule = TieRule.FAVOR_A) -> float:
    """A-vote share of the continuum population in ``state``."""
    like_a, like_b = binary_likelihoods(*posteriors_to_conditionals(signal))
    return float(sum(w * class_a_share(q, like_a, like_b, state, tie)
                     for w, q in profile.classes))


def warn(message: str) -> None:
    warnings.warn(message, JuryrigWarning, stacklevel=3)
