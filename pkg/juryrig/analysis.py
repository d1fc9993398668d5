"""Closed-form manipulability analysis of a two-accuracy population.

A profile is manipulable when some private signal makes a majority vote for
A in both states. Raising alpha or beta of an optimal signal to the nearest
accuracy-related value never changes anyone's vote and only sends
``pro-a`` more often, so six candidate signals decide the question:

    id   signal                     id   signal
    L0   (q_low,  0)                H0   (q_high, 0)
    LL   (q_low,  1 - q_low)        LH   (q_low,  1 - q_high)
    HL   (q_high, 1 - q_low)        HH   (q_high, 1 - q_high)

Each candidate's B-vote share in state B has a closed form
(:func:`table_b_share`); :func:`classify` enumerates the candidates with the
exact cell summation and cross-checks the closed-form thresholds wherever
they apply. A disagreement raises :class:`~juryrig.model.InvariantViolation`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from scipy.optimize import brentq

from juryrig.model import (
    PRIOR, SHARE_TOL, InvariantViolation, ModelDomainError, NotManipulableError,
    PopulationProfile, Signal, State, ThresholdUndefined, TieRule, UNINFORMATIVE,
    Vote, cells, election_outcome, exact_vote_share, sincere_vote,
)

TWO_THIRDS = 2.0 / 3.0
SQRT2_2 = math.sqrt(2.0) / 2.0

# closed forms and classification boundaries are compared at this distance
_BOUNDARY_TOL = 1e-9


class CandidateId(Enum):
    L0 = "L0"
    H0 = "H0"
    LL = "LL"
    LH = "LH"
    HL = "HL"
    HH = "HH"


class Classification(Enum):
    ALWAYS_A = "AlwaysA"
    MANIPULABLE = "Manipulable"
    NOT_MANIPULABLE = "NotManipulable"


class BiasSigns(Enum):
    ALL_POSITIVE = "all-positive"
    ALL_NEGATIVE = "all-negative"
    ALL_NONPOSITIVE = "all-nonpositive"
    CONTAINS_UNBIASED = "contains-unbiased"
    MIXED = "mixed"


class RegimeTag(Enum):
    """Analytic regimes where the sign of every optimal signal's bias is known."""
    UNINFORMED_NONPOSITIVE = "uninformed-share:all-nonpositive"
    LOW_ACCURACY_POSITIVE = "low-accuracy-witness:all-positive"
    CLOSE_ACCURACIES_NEGATIVE = "close-accuracies:all-negative"


# --------------------------------------------------------------------------- #
# Thresholds
# --------------------------------------------------------------------------- #

def q_ni(lam: float) -> float:
    """Highest q_high at which the uninformative signal already elects A in
    state B when a share ``lam`` of voters is uninformed; ``inf`` at lam = 1."""
    if not 0.0 <= lam <= 1.0:
        raise ThresholdUndefined(f"q_ni: lambda = {lam} outside [0, 1]")
    if lam == 1.0:
        return math.inf
    return 1.0 / (2.0 * (1.0 - lam))


def q_bar(lam: float) -> float:
    """Highest q_high still manipulable when a share ``lam`` is uninformed."""
    if not 0.0 <= lam < 1.0:
        raise ThresholdUndefined(f"q_bar: lambda = {lam} outside [0, 1)")
    return (-lam + math.sqrt(lam * lam + 2.0 - 2.0 * lam)) / (2.0 - 2.0 * lam)


def lambda_under(q_high: float) -> float:
    """Largest low-accuracy share at which the unbiased signal (q_h, 1 - q_h)
    still manipulates, for q_h in (1/2, sqrt(2)/2]."""
    if not PRIOR < q_high <= SQRT2_2 + 1e-15:
        raise ThresholdUndefined(
            f"lambda_under: q_high = {q_high} outside (1/2, sqrt(2)/2]")
    return max((0.5 - q_high * q_high) / (q_high * (1.0 - q_high)), 0.0)


# --------------------------------------------------------------------------- #
# Candidates
# --------------------------------------------------------------------------- #

def table_b_share(cid: CandidateId, profile: PopulationProfile) -> float:
    """Closed-form B-vote share in state B for a two-accuracy profile with
    1/2 < q_low < q_high (or the homogeneous rows H0 / HH at any q)."""
    lam, ql, qh = profile.lam, profile.q_low, profile.q_high
    if cid is CandidateId.L0:
        return 1.0 - (1.0 - ql) * (1.0 - qh + lam * qh) / ql
    if cid is CandidateId.H0:
        return (2.0 * qh - 1.0) / qh
    if cid is CandidateId.LL:
        return qh - lam * (qh - ql * ql)
    if cid is CandidateId.LH:
        return lam * qh * (2.0 * ql - 1.0) / (qh + ql - 1.0) + (1.0 - lam) * qh
    if cid is CandidateId.HL:
        return ((lam * ql + (1.0 - lam) * qh) * ql * (2.0 * qh - 1.0)
                / (qh + ql - 1.0))
    return qh * qh + lam * qh * (1.0 - qh)


def _candidate_pair(cid: CandidateId, ql: float, qh: float) -> tuple[float, float]:
    alpha = ql if cid.value[0] == "L" else qh
    beta = {"0": 0.0, "L": 1.0 - ql, "H": 1.0 - qh}[cid.value[1]]
    return alpha, beta


@dataclass(frozen=True)
class Candidate:
    id: CandidateId
    signal: Signal
    b_share_theta_b: float

    @property
    def a_share_theta_b(self) -> float:
        return 1.0 - self.b_share_theta_b

    def as_dict(self) -> dict:
        return {"id": self.id.value, "signal": self.signal.as_dict(),
                "b_share_theta_b": self.b_share_theta_b}


def candidate_signals(profile: PopulationProfile) -> tuple[Candidate, ...]:
    """The six-candidate set, deduplicated by signal.

    Equal accuracies collapse to ``{(q, 0), (q, 1 - q)}``; a half-accuracy
    low class drops every row whose alpha is q_low or whose beta is 1 - q_low.
    """
    p = profile.normalized()
    ql, qh = p.q_low, p.q_high
    if ql == qh:
        ids = (CandidateId.H0, CandidateId.HH)
    elif ql == PRIOR:
        ids = (CandidateId.H0, CandidateId.HH)
    else:
        ids = tuple(CandidateId)
    out: list[Candidate] = []
    seen: set[tuple[float, float]] = set()
    for cid in ids:
        pair = _candidate_pair(cid, ql, qh)
        if pair in seen or not (pair[1] < PRIOR < pair[0]):
            continue
        seen.add(pair)
        out.append(Candidate(cid, Signal(*pair), table_b_share(cid, p)))
    return tuple(out)


def check_table_shares(profile: PopulationProfile,
                       tol: float = _BOUNDARY_TOL) -> list[str]:
    """Closed form vs cell summation for every candidate; returns the
    mismatches (empty when they agree)."""
    problems = []
    for c in candidate_signals(profile):
        cellwise = 1.0 - exact_vote_share(profile, c.signal, State.THETA_B)
        if abs(cellwise - c.b_share_theta_b) > tol:
            problems.append(
                f"{c.id.value}: closed form {c.b_share_theta_b!r} vs cells "
                f"{cellwise!r} for {profile.as_dict()}")
    return problems


@dataclass(frozen=True)
class TableRow:
    """Every column of the candidate table for one profile."""
    id: CandidateId
    signal: Signal
    p_pro_b_theta_b: float
    bias: Optional[float]
    low_votes_a: tuple[str, ...]
    high_votes_a: tuple[str, ...]
    b_share_theta_b: float
    lambda_direction: str

    def as_dict(self) -> dict:
        return {"id": self.id.value, "alpha": self.signal.alpha,
                "beta": self.signal.beta,
                "p_pro_b_theta_b": self.p_pro_b_theta_b, "bias": self.bias,
                "low_votes_a": list(self.low_votes_a),
                "high_votes_a": list(self.high_votes_a),
                "b_share_theta_b": self.b_share_theta_b,
                "lambda_direction": self.lambda_direction}


def _a_cells(accuracy: float, signal: Signal) -> tuple[str, ...]:
    out = []
    for cell in cells(accuracy):
        post = cell.posterior(signal)
        if post is not None and sincere_vote(post) is Vote.A:
            out.append(f"({cell.exo.value},{cell.message.value})")
    return tuple(out)


def table_row(candidate: Candidate, profile: PopulationProfile) -> TableRow:
    p = profile.normalized()
    _, pb = candidate.signal.conditionals
    at0 = table_b_share(candidate.id, PopulationProfile(0.0, p.q_low, p.q_high))
    at1 = table_b_share(candidate.id, PopulationProfile(1.0, p.q_low, p.q_high))
    slope = at1 - at0
    # equal accuracies make lambda irrelevant
    direction = ("flat" if p.q_low == p.q_high or abs(slope) <= _BOUNDARY_TOL
                 else "decreasing" if slope < 0 else "increasing")
    return TableRow(candidate.id, candidate.signal, 1.0 - pb,
                    candidate.signal.bias,
                    _a_cells(p.q_low, candidate.signal),
                    _a_cells(p.q_high, candidate.signal),
                    candidate.b_share_theta_b, direction)


# --------------------------------------------------------------------------- #
# Classification
# --------------------------------------------------------------------------- #

def summarize_bias_signs(biases: list[float],
                         zero_tol: float = 1e-12) -> Optional[BiasSigns]:
    if not biases:
        return None
    pos = sum(b > zero_tol for b in biases)
    neg = sum(b < -zero_tol for b in biases)
    zero = len(biases) - pos - neg
    if pos == len(biases):
        return BiasSigns.ALL_POSITIVE
    if neg == len(biases):
        return BiasSigns.ALL_NEGATIVE
    if pos == 0:
        return BiasSigns.ALL_NONPOSITIVE
    if neg == 0 and zero:
        return BiasSigns.CONTAINS_UNBIASED
    return BiasSigns.MIXED


@dataclass(frozen=True)
class ManipulabilityReport:
    profile: PopulationProfile
    classification: Classification
    uninformed_a_share: float
    candidates: tuple[Candidate, ...]
    witnesses: tuple[Candidate, ...] = ()
    bias_signs: Optional[BiasSigns] = None

    @property
    def witness_ids(self) -> frozenset[CandidateId]:
        return frozenset(c.id for c in self.witnesses)

    def as_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "uninformed_a_share_theta_b": self.uninformed_a_share,
            "witnesses": [c.as_dict() for c in self.witnesses],
            "bias_signs": self.bias_signs.value if self.bias_signs else None,
            "table": [table_row(c, self.profile).as_dict()
                      for c in self.candidates],
        }


def _check_closed_forms(report: ManipulabilityReport) -> None:
    """Claim that the threshold statements agree with enumeration wherever
    they apply; boundary cases within 1e-9 are skipped."""
    p = report.profile.normalized()
    cls = report.classification

    def near(x: float, y: float) -> bool:
        return abs(x - y) <= _BOUNDARY_TOL

    def fail(rule: str) -> None:
        raise InvariantViolation(
            f"{rule} contradicted by enumeration ({cls.value}) at "
            f"{report.profile.as_dict()}")

    if p.q_low == PRIOR and p.lam < 1.0:
        qni = q_ni(p.lam)
        if not near(p.q_high, qni):
            if (cls is Classification.ALWAYS_A) != (p.q_high < qni):
                fail("uninformative-signal threshold q_ni")
        if p.q_high > qni + _BOUNDARY_TOL and not near(p.q_high, q_bar(p.lam)):
            expected = p.q_high < q_bar(p.lam)
            if (cls is Classification.MANIPULABLE) != expected:
                fail("half-accuracy threshold q_bar")
            if expected and CandidateId.HH not in report.witness_ids:
                fail("unbiased witness (q_h, 1 - q_h)")
    if p.q_low > SQRT2_2 + _BOUNDARY_TOL and cls is not Classification.NOT_MANIPULABLE:
        fail("high-accuracy bound q_low > sqrt(2)/2")
    if p.q_high < TWO_THIRDS - _BOUNDARY_TOL and cls is Classification.NOT_MANIPULABLE:
        fail("low-accuracy bound q_high <= 2/3")


def classify(profile: PopulationProfile,
             tol: float = SHARE_TOL) -> ManipulabilityReport:
    """Classify ``profile`` under the A-favourable tie rule."""
    uninformed = exact_vote_share(profile, UNINFORMATIVE, State.THETA_B)
    candidates = candidate_signals(profile)
    if election_outcome(uninformed, TieRule.FAVOR_A, tol) is Vote.A:
        report = ManipulabilityReport(profile, Classification.ALWAYS_A,
                                      uninformed, candidates)
    else:
        witnesses = tuple(
            c for c in candidates
            if election_outcome(
                exact_vote_share(profile, c.signal, State.THETA_B),
                TieRule.FAVOR_A, tol) is Vote.A)
        cls = (Classification.MANIPULABLE if witnesses
               else Classification.NOT_MANIPULABLE)
        signs = summarize_bias_signs([c.signal.bias for c in witnesses])
        report = ManipulabilityReport(profile, cls, uninformed, candidates,
                                      witnesses, signs)
    _check_closed_forms(report)
    return report


# --------------------------------------------------------------------------- #
# Bias direction
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class BiasReport:
    signs: BiasSigns
    biases: tuple[tuple[str, float], ...]
    tags: tuple[RegimeTag, ...] = field(default=())

    def as_dict(self) -> dict:
        return {"bias_signs": self.signs.value,
                "witness_biases": {cid: b for cid, b in self.biases},
                "regime_tags": [t.value for t in self.tags]}


def _uninformed_view(p: PopulationProfile) -> Optional[tuple[float, float]]:
    """``(share of uninformed voters, informed accuracy)`` when the profile
    is a partially uninformed one, else ``None``."""
    if p.q_low == PRIOR and p.lam < 1.0:
        return p.lam, p.q_high
    if p.lam == 0.0 or p.q_low == p.q_high:
        return 0.0, p.q_high
    if p.lam == 1.0:
        return 0.0, p.q_low
    return None


def bias_direction(profile: PopulationProfile) -> BiasReport:
    """Sign summary of the optimal signals' biases plus the analytic regimes
    the profile falls in. A regime whose sign the witnesses contradict raises
    :class:`InvariantViolation`."""
    report = classify(profile)
    if report.classification is not Classification.MANIPULABLE:
        raise NotManipulableError(
            f"bias direction needs a Manipulable profile; "
            f"{profile.as_dict()} is {report.classification.value}")
    p = profile.normalized()
    biases = [c.signal.bias for c in report.witnesses]
    tags = []
    view = _uninformed_view(p)
    if view is not None:
        lam, q = view
        if TWO_THIRDS < q <= q_bar(lam) + _BOUNDARY_TOL and q > q_ni(lam):
            tags.append(RegimeTag.UNINFORMED_NONPOSITIVE)
            if any(b > 1e-12 for b in biases):
                raise InvariantViolation(
                    f"positive bias among witnesses in the non-positive "
                    f"regime at {profile.as_dict()}")
    ids = report.witness_ids
    if PRIOR < p.q_low < p.q_high and p.q_high > TWO_THIRDS:
        if ids and ids <= {CandidateId.L0, CandidateId.LH} \
                and p.q_high * (1.0 - p.lam) + p.lam / 2.0 > PRIOR:
            tags.append(RegimeTag.LOW_ACCURACY_POSITIVE)
            if report.bias_signs is not BiasSigns.ALL_POSITIVE:
                raise InvariantViolation(
                    f"non-positive witness bias in the positive regime at "
                    f"{profile.as_dict()}")
        if ids == {CandidateId.HL} and p.q_high < SQRT2_2:
            tags.append(RegimeTag.CLOSE_ACCURACIES_NEGATIVE)
            if report.bias_signs is not BiasSigns.ALL_NEGATIVE:
                raise InvariantViolation(
                    f"non-negative witness bias in the negative regime at "
                    f"{profile.as_dict()}")
    return BiasReport(report.bias_signs,
                      tuple((c.id.value, c.signal.bias) for c in report.witnesses),
                      tuple(tags))


# --------------------------------------------------------------------------- #
# Scans over lambda
# --------------------------------------------------------------------------- #

_LAMBDA_RISING = (CandidateId.L0, CandidateId.LL, CandidateId.LH, CandidateId.HL)


def min_manipulable_lambda(q_low: float, q_high: float,
                           xtol: float = 1e-9) -> Optional[float]:
    """Smallest lambda from which on the profile stays manipulable through
    the candidates whose A-share grows with lambda; ``None`` if none does
    by lambda = 1. Needs 1/2 < q_low < q_high."""
    if not PRIOR < q_low < q_high:
        raise ThresholdUndefined(
            f"min_manipulable_lambda needs 1/2 < q_low < q_high "
            f"(got {q_low}, {q_high})")
    best: Optional[float] = None
    for cid in _LAMBDA_RISING:
        def excess(lam: float, cid=cid) -> float:
            return table_b_share(cid, PopulationProfile(lam, q_low, q_high)) - PRIOR
        lo, hi = excess(0.0), excess(1.0)
        if hi > 0.0:
            continue
        root = 0.0 if lo <= 0.0 else brentq(excess, 0.0, 1.0, xtol=xtol)
        best = root if best is None else min(best, root)
    return best


def _bisect_boundary(pred: Callable[[float], bool], outside: float,
                     inside: float, tol: float = 1e-9) -> float:
    """Locate where ``pred`` flips between two points (pred(inside) holds)."""
    while abs(inside - outside) > tol:
        mid = 0.5 * (inside + outside)
        if pred(mid):
            inside = mid
        else:
            outside = mid
    return inside


def _has_regime(q_low: float, q_high: float, tag: RegimeTag) -> Callable[[float], bool]:
    def pred(lam: float) -> bool:
        try:
            return tag in bias_direction(PopulationProfile(lam, q_low, q_high)).tags
        except NotManipulableError:
            return False
    return pred


def bias_intervals(q_low: float, q_high: float, sign: str,
                   step: float = 1e-3) -> list[tuple[float, float]]:
    """Open lambda-intervals on which every optimal signal is biased towards
    ``sign`` ("positive" or "negative"), found by scanning at ``step`` and
    refining each endpoint by bisection."""
    tag = {"positive": RegimeTag.LOW_ACCURACY_POSITIVE,
           "negative": RegimeTag.CLOSE_ACCURACIES_NEGATIVE}.get(sign)
    if tag is None:
        raise ModelDomainError(f"sign must be 'positive' or 'negative', got {sign!r}")
    if not 0.0 < step < 1.0:
        raise ThresholdUndefined(f"scan step {step} outside (0, 1)")
    pred = _has_regime(q_low, q_high, tag)
    n = int(round(1.0 / step))
    grid = [k / n for k in range(1, n)]
    hits = [pred(lam) for lam in grid]
    out = []
    k = 0
    while k < len(grid):
        if not hits[k]:
            k += 1
            continue
        start = k
        while k + 1 < len(grid) and hits[k + 1]:
            k += 1
        lo = (_bisect_boundary(pred, grid[start - 1], grid[start])
              if start > 0 else 0.0)
        hi = (_bisect_boundary(pred, grid[k + 1], grid[k])
              if k + 1 < len(grid) else 1.0)
        out.append((lo, hi))
        k += 1
    return out


def nonmanipulable_measure(q_low: float, q_high: float,
                           step: float = 0.05) -> float:
    """Grid measure (count * step) of lambda values in [0, 1] at which
    ``(lambda, q_low, q_high)`` is NotManipulable."""
    n = int(round(1.0 / step))
    count = sum(
        classify(PopulationProfile(k / n, q_low, q_high)).classification
        is Classification.NOT_MANIPULABLE
        for k in range(n + 1))
    return count * step
