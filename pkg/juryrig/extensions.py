"""Variants of the persuasion problem.

* continuous accuracies: a piecewise-constant density on [1/2, 1], plus
  optional point masses (a two-accuracy profile is two point masses);
* targeted signals: one binary signal per accuracy class;
* strongly targeted signals: the signal may also depend on the voter's own
  exogenous realization;
* public signals: one realization seen by everybody.

For a binary signal, the state-B A-share of a continuum of accuracies is
linear in the moments of the accuracy distribution over at most three
intervals, so continuous shares are computed from exact piecewise moments
rather than sampled.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from juryrig.analysis import SQRT2_2, TWO_THIRDS, Classification, classify
from juryrig.model import (
    PRIOR, SHARE_TOL, InvariantViolation, ModelDomainError, PopulationProfile,
    Signal, State, TieRule, UNINFORMATIVE, Vote, exact_vote_share, votes_a,
)
from juryrig.oracle import (
    DEFAULT_STEP, check_step, conditionals_grid, grid_axes, signal_axes,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

_MASS_TOL = 1e-9
_EDGE_TOL = 1e-12
_GAUSS_NODES = 16


class Decision(Enum):
    MANIPULABLE = "Manipulable"
    NOT_MANIPULABLE = "NotManipulable"
    UNDETERMINED = "Undetermined"


def _decide(share: float, tol: float = SHARE_TOL) -> Decision:
    return (Decision.MANIPULABLE if share >= PRIOR - tol
            else Decision.NOT_MANIPULABLE)


# --------------------------------------------------------------------------- #
# Continuous profiles
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ContinuousProfile:
    """Accuracy distribution: density ``values[i]`` on
    ``[breakpoints[i], breakpoints[i + 1])`` plus ``(accuracy, mass)`` atoms."""
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        bp = self.breakpoints
        if bp and len(self.values) != len(bp) - 1:
            raise ModelDomainError(
                f"{len(bp)} breakpoints need {len(bp) - 1} density values, "
                f"got {len(self.values)}")
        if not bp and self.values:
            raise ModelDomainError("density values without breakpoints")
        if any(not PRIOR <= b <= 1.0 for b in bp):
            raise ModelDomainError(f"breakpoints {bp} leave [0.5, 1]")
        if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            raise ModelDomainError(f"breakpoints {bp} are not increasing")
        if any(v < 0.0 for v in self.values):
            raise ModelDomainError(f"negative density value in {self.values}")
        for q, m in self.atoms:
            if not PRIOR <= q <= 1.0 or m < 0.0:
                raise ModelDomainError(f"atom ({q}, {m}) outside [0.5, 1] x [0, inf)")
        total = self.total_mass()
        if abs(total - 1.0) > _MASS_TOL:
            raise ModelDomainError(
                f"accuracy density integrates to {total!r}, not 1")

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "ContinuousProfile":
        return cls((lo, hi), (1.0 / (hi - lo),))

    @classmethod
    def point_mass(cls, q: float) -> "ContinuousProfile":
        return cls(atoms=((q, 1.0),))

    @classmethod
    def from_binary(cls, profile: PopulationProfile) -> "ContinuousProfile":
        masses: dict[float, float] = {}
        for w, q in profile.classes:
            masses[q] = masses.get(q, 0.0) + w
        return cls(atoms=tuple(sorted(masses.items())))

    def total_mass(self) -> float:
        pieces = sum(v * (b1 - b0) for v, b0, b1
                     in zip(self.values, self.breakpoints, self.breakpoints[1:]))
        return pieces + sum(m for _, m in self.atoms)

    def pieces(self):
        """``(lo, hi, density)`` for every piece of positive density."""
        return [(b0, b1, v) for v, b0, b1
                in zip(self.values, self.breakpoints, self.breakpoints[1:])
                if v > 0.0]

    def support(self) -> tuple[float, float]:
        ends = [x for lo, hi, _ in self.pieces() for x in (lo, hi)]
        ends += [q for q, m in self.atoms if m > 0.0]
        return min(ends), max(ends)

    def moment(self, k: int, lo, hi, closed_lo: bool = True,
               closed_hi: bool = True) -> np.ndarray:
        """E[q**k ; lo <= q <= hi], vectorized over the bounds. Closedness
        only matters for atoms."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        out = np.zeros(np.broadcast(lo, hi).shape)
        for b0, b1, v in self.pieces():
            a = np.maximum(lo, b0)
            b = np.minimum(hi, b1)
            part = v * (b ** (k + 1) - a ** (k + 1)) / (k + 1)
            out = out + np.where(b > a, part, 0.0)
        for q, m in self.atoms:
            above = q >= lo - _EDGE_TOL if closed_lo else q > lo + _EDGE_TOL
            below = q <= hi + _EDGE_TOL if closed_hi else q < hi - _EDGE_TOL
            out = out + np.where(above & below, m * q ** k, 0.0)
        return out

    def integrate(self, fn: Callable[[np.ndarray], np.ndarray],
                  splits: tuple[float, ...] = ()) -> float:
        """Gauss-Legendre quadrature of ``fn`` against the density, each piece
        cut at ``splits``; atoms contribute ``mass * fn(q)``."""
        nodes, weights = np.polynomial.legendre.leggauss(_GAUSS_NODES)
        total = 0.0
        for b0, b1, v in self.pieces():
            cuts = [b0] + [s for s in sorted(splits) if b0 < s < b1] + [b1]
            for a, b in zip(cuts, cuts[1:]):
                x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
                total += v * 0.5 * (b - a) * float(np.dot(weights, fn(x)))
        for q, m in self.atoms:
            total += m * float(fn(np.asarray([q]))[0])
        return total

    def as_dict(self) -> dict:
        return {"breakpoints": list(self.breakpoints),
                "values": list(self.values),
                "atoms": [list(a) for a in self.atoms]}


_ROW_RE = re.compile(r"^\s*(atom\s+)?(\S+)\s+(\S+)\s*$")


def parse_continuous_profile(text: str, source: str = "<profile>") -> ContinuousProfile:
    """Read the breakpoint/value table.

    The first line is the header ``breakpoint value``; each following row is
    ``<breakpoint> <density>``, the density holding up to the next row's
    breakpoint (the last row's density holds up to 1.0). Rows of the form
    ``atom <accuracy> <mass>`` add point masses. ``#`` starts a comment.
    """
    lines = [ln.split("#", 1)[0] for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip()]
    if not lines or lines[0].split() != ["breakpoint", "value"]:
        raise ModelDomainError(f"{source}: first line must be 'breakpoint value'")
    rows: list[tuple[float, float]] = []
    atoms: list[tuple[float, float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        m = _ROW_RE.match(line)
        if m is None:
            raise ModelDomainError(f"{source}: row {lineno}: expected two numbers: {line!r}")
        try:
            x, y = float(m.group(2)), float(m.group(3))
        except ValueError:
            raise ModelDomainError(
                f"{source}: row {lineno}: not a decimal number: {line!r}") from None
        (atoms if m.group(1) else rows).append((x, y))
    if rows and rows[-1][0] > 1.0:
        raise ModelDomainError(f"{source}: last breakpoint {rows[-1][0]} exceeds 1.0")
    breakpoints = [b for b, _ in rows]
    values = [v for _, v in rows]
    if rows:
        if breakpoints[-1] < 1.0:
            breakpoints.append(1.0)
        elif values[-1] != 0.0:
            raise ModelDomainError(
                f"{source}: density {values[-1]} at breakpoint 1.0 covers no interval")
        else:
            values.pop()
    try:
        return ContinuousProfile(tuple(breakpoints), tuple(values), tuple(atoms))
    except ModelDomainError as e:
        raise ModelDomainError(f"{source}: {e}") from None


def read_continuous_profile(path: Union[str, Path]) -> ContinuousProfile:
    path = Path(path)
    return parse_continuous_profile(path.read_text(), str(path))


# --------------------------------------------------------------------------- #
# Uniform signal, continuous accuracies
# --------------------------------------------------------------------------- #

def continuous_share(profile: ContinuousProfile, alpha, beta, pb,
                     tie: TieRule = TieRule.FAVOR_A) -> np.ndarray:
    """State-B A-share for signals with posteriors ``(alpha, beta)`` and
    ``P(pro-a | theta_B) = pb``.

    ``(a, pro-a)`` voters always vote A; ``(a, pro-b)`` voters vote A iff
    ``q >= 1 - beta``; ``(b, pro-a)`` voters iff ``q <= alpha``; ``(b, pro-b)``
    voters never do.
    """
    closed = tie is TieRule.FAVOR_A
    pb = np.asarray(pb, dtype=float)
    lo, hi = PRIOR, 1.0
    mass_not_q = profile.moment(0, lo, hi) - profile.moment(1, lo, hi)
    upper = 1.0 - np.asarray(beta, dtype=float)
    a_pro_b = (profile.moment(0, upper, hi, closed_lo=closed)
               - profile.moment(1, upper, hi, closed_lo=closed))
    b_pro_a = profile.moment(1, lo, alpha, closed_hi=closed)
    return pb * mass_not_q + (1.0 - pb) * a_pro_b + pb * b_pro_a


def continuous_uninformed_share(profile: ContinuousProfile,
                                tie: TieRule = TieRule.FAVOR_A) -> float:
    return float(continuous_share(profile, PRIOR, PRIOR, 1.0, tie))


@dataclass(frozen=True)
class ContinuousReport:
    analytic: Decision
    decision: Decision
    basis: str
    max_share: Optional[float] = None
    best_signal: Optional[Signal] = None

    def as_dict(self) -> dict:
        return {"analytic": self.analytic.value,
                "decision": self.decision.value, "basis": self.basis,
                "max_a_share_theta_b": self.max_share,
                "best_signal": (None if self.best_signal is None else
                                {"alpha": self.best_signal.alpha,
                                 "beta": self.best_signal.beta})}


def _analytic(profile: ContinuousProfile) -> tuple[Decision, Optional[Signal]]:
    lo, hi = profile.support()
    atoms = [q for q, m in profile.atoms if m > 0.0]
    densities = [b0 for b0, _, _ in profile.pieces()]
    if all(q > SQRT2_2 + _EDGE_TOL for q in atoms) and \
            all(b >= SQRT2_2 - _EDGE_TOL for b in densities):
        return Decision.NOT_MANIPULABLE, None
    if hi <= TWO_THIRDS + _EDGE_TOL:
        witness = Signal(hi, 0.0) if hi > PRIOR else UNINFORMATIVE
        return Decision.MANIPULABLE, witness
    return Decision.UNDETERMINED, None


def continuous_classify(profile: ContinuousProfile,
                        step: float = DEFAULT_STEP) -> ContinuousReport:
    """Analytic decision when the support lies in [sqrt(2)/2, 1] or in
    [1/2, 2/3]; otherwise the best binary signal on a grid decides."""
    analytic, witness = _analytic(profile)
    if analytic is not Decision.UNDETERMINED:
        share = None
        if witness is not None:
            share = (continuous_uninformed_share(profile) if not witness.informative
                     else float(continuous_share(profile, witness.alpha, witness.beta,
                                                 witness.conditionals[1])))
        return ContinuousReport(analytic, analytic, "analytic", share, witness)
    check_step(step)
    # atoms are where the candidate coordinates of a discrete profile sit
    alphas, betas = grid_axes(step)
    atoms = [q for q, m in profile.atoms if m > 0.0]
    alphas = np.union1d(alphas, [q for q in atoms if q > PRIOR])
    betas = np.union1d(betas, [1.0 - q for q in atoms if q > PRIOR])
    a, b = np.meshgrid(alphas, betas, indexing="ij")
    _, pb = conditionals_grid(a, b)
    shares = continuous_share(profile, a, b, pb)
    idx = np.unravel_index(int(np.argmax(shares)), shares.shape)
    best, best_signal = float(shares[idx]), Signal(float(a[idx]), float(b[idx]))
    uninformed = continuous_uninformed_share(profile)
    if uninformed > best:
        best, best_signal = uninformed, UNINFORMATIVE
    return ContinuousReport(analytic, _decide(best), "numeric", best, best_signal)


# --------------------------------------------------------------------------- #
# Targeted signals
# --------------------------------------------------------------------------- #

def class_best_share(q: float) -> tuple[Signal, float]:
    """Best single-class signal and its state-B A-share."""
    if q <= PRIOR:
        return UNINFORMATIVE, 1.0
    if q < GOLDEN:
        return Signal(q, 0.0), (1.0 - q) / q
    return Signal(q, 1.0 - q), 1.0 - q * q


@dataclass(frozen=True)
class TargetedPlan:
    """Signal per accuracy class, and for strongly targeted plans per
    exogenous realization (``None``: that group gets no signal)."""
    assignments: tuple[tuple[float, str, Optional[Signal]], ...]

    def as_dict(self) -> list:
        return [{"accuracy": q, "group": group,
                 "signal": None if s is None else {"alpha": s.alpha, "beta": s.beta}}
                for q, group, s in self.assignments]


@dataclass(frozen=True)
class TargetedReport:
    decision: Decision
    share: float
    plan: TargetedPlan = field(default_factory=lambda: TargetedPlan(()))

    def as_dict(self) -> dict:
        return {"decision": self.decision.value, "a_share_theta_b": self.share,
                "plan": self.plan.as_dict()}


def targeted_lhs(profile: PopulationProfile) -> float:
    return sum(w * class_best_share(q)[1] for w, q in profile.classes)


def targeted_classify(profile: PopulationProfile) -> TargetedReport:
    """Best per-class signals; manipulable iff their combined state-B
    A-share reaches 1/2."""
    lhs = 0.0
    plan = []
    for w, q in profile.classes:
        signal, closed_form = class_best_share(q)
        exact = exact_vote_share(PopulationProfile.homogeneous(q), signal, State.THETA_B)
        if abs(exact - closed_form) > SHARE_TOL:
            raise InvariantViolation(
                f"class {q}: targeted share {closed_form!r} vs cells {exact!r}")
        lhs += w * closed_form
        plan.append((q, "all", signal))
    return TargetedReport(_decide(lhs), lhs, TargetedPlan(tuple(plan)))


def targeted_classify_continuous(profile: ContinuousProfile) -> TargetedReport:
    def best(q: np.ndarray) -> np.ndarray:
        return np.maximum((1.0 - q) / q, 1.0 - q * q)
    total = profile.integrate(best, splits=(GOLDEN,))
    return TargetedReport(_decide(total), total)


def strongly_targeted_classify(profile: Union[PopulationProfile, ContinuousProfile]
                               ) -> TargetedReport:
    """b-voters receive ``(q, 0)``, a-voters no signal; the state-B A-share
    is twice the expected error rate."""
    if isinstance(profile, ContinuousProfile):
        share = 2.0 * float(profile.moment(0, PRIOR, 1.0) - profile.moment(1, PRIOR, 1.0))
        return TargetedReport(_decide(share), share)
    share = 0.0
    plan = []
    for w, q in profile.classes:
        closed_form = 2.0 * (1.0 - q)
        share += w * closed_form
        plan.append((q, "a", None))
        plan.append((q, "b", Signal(q, 0.0) if q > PRIOR else None))
    return TargetedReport(_decide(share), share, TargetedPlan(tuple(plan)))


# --------------------------------------------------------------------------- #
# Public signals
# --------------------------------------------------------------------------- #

def public_share(profile: PopulationProfile, posterior, state: State,
                 tie: TieRule = TieRule.FAVOR_A) -> np.ndarray:
    """A-vote share when everybody sees one public realization that moves
    the common belief to ``posterior``."""
    x = np.asarray(posterior, dtype=float)
    share = 0.0
    for w, q in profile.classes:
        for p_given_a, p_given_b in ((q, 1.0 - q), (1.0 - q, q)):
            ja = p_given_a * x
            jb = p_given_b * (1.0 - x)
            with np.errstate(invalid="ignore", divide="ignore"):
                post = np.where(ja + jb > 0.0, ja / (ja + jb), PRIOR)
            weight = p_given_a if state is State.THETA_A else p_given_b
            share = share + w * weight * votes_a(post, tie)
    return share


def _public_wins(profile, posterior, state, tie) -> np.ndarray:
    share = public_share(profile, posterior, state, tie)
    if tie is TieRule.FAVOR_A:
        return share >= PRIOR - SHARE_TOL
    return share > PRIOR + SHARE_TOL


@dataclass(frozen=True)
class PublicReport:
    private: Classification
    best_public: Signal
    p_a_theta_a: float
    p_a_theta_b: float
    baseline_theta_a: Vote
    baseline_theta_b: Vote
    preferred_medium: str
    max_p_a_theta_b: float

    def as_dict(self) -> dict:
        return {"private_decision": self.private.value,
                "best_public_signal": {"alpha": self.best_public.alpha,
                                       "beta": self.best_public.beta},
                "public_p_a_theta_a": self.p_a_theta_a,
                "public_p_a_theta_b": self.p_a_theta_b,
                "no_designer_winner": {"A": self.baseline_theta_a.value,
                                       "B": self.baseline_theta_b.value},
                "max_public_p_a_theta_b": self.max_p_a_theta_b,
                "preferred_medium": self.preferred_medium}


def public_persuasion_compare(profile: PopulationProfile,
                              step: float = DEFAULT_STEP,
                              tie: TieRule = TieRule.FAVOR_A) -> PublicReport:
    """Best binary public signal against what private signals achieve.

    The reported signal maximizes the average over both states of the
    probability that A wins. Whether a public signal helps the designer at
    all is read from the largest P(A wins | theta_B) over the whole grid."""
    check_step(step)
    alphas, betas = signal_axes(profile, step)
    a, b = np.meshgrid(alphas, betas, indexing="ij")
    pa, pb = conditionals_grid(a, b)
    win = {}
    for state in State:
        win[state, "a"] = _public_wins(profile, alphas, state, tie)[:, np.newaxis]
        win[state, "b"] = _public_wins(profile, betas, state, tie)[np.newaxis, :]
    p_theta_a = pa * win[State.THETA_A, "a"] + (1.0 - pa) * win[State.THETA_A, "b"]
    p_theta_b = pb * win[State.THETA_B, "a"] + (1.0 - pb) * win[State.THETA_B, "b"]
    objective = 0.5 * (p_theta_a + p_theta_b)
    idx = np.unravel_index(int(np.argmax(objective)), objective.shape)
    best = Signal(float(a[idx]), float(b[idx]))
    best_a, best_b = float(p_theta_a[idx]), float(p_theta_b[idx])
    base_a = bool(_public_wins(profile, PRIOR, State.THETA_A, tie))
    base_b = bool(_public_wins(profile, PRIOR, State.THETA_B, tie))
    if 0.5 * (base_a + base_b) >= 0.5 * (best_a + best_b):
        best, best_a, best_b = UNINFORMATIVE, float(base_a), float(base_b)
    top_b = max(float(p_theta_b.max()), float(base_b))
    private = classify(profile).classification
    if private in (Classification.MANIPULABLE, Classification.ALWAYS_A):
        medium = "private"
    elif top_b > 0.0:
        medium = "public"
    else:
        medium = "none"
    return PublicReport(private, best, best_a, best_b,
                        Vote.A if base_a else Vote.B,
                        Vote.A if base_b else Vote.B, medium, top_b)
