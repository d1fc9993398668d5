"""Brute-force verification of the candidate reduction.

:func:`grid_search` evaluates the state-B A-share of every binary signal on
a regular ``(alpha, beta)`` grid in one vectorized pass; the candidate
coordinates of the profile are merged into the grid axes so the reduced
candidates are always among the evaluated points. :func:`verify_closure`
compares the grid against :func:`juryrig.analysis.classify` and checks that
rounding each grid optimum down onto the candidate set keeps it optimal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from juryrig.analysis import Classification, candidate_signals, classify
from juryrig.model import (
    PRIOR, SHARE_TOL, ModelDomainError, PopulationProfile, Signal, State,
    TieRule, UNINFORMATIVE, Vote, binary_likelihoods, class_a_share,
    election_outcome, exact_vote_share,
)

DEFAULT_STEP = 0.005
MAX_STEP = 0.01

# grid coordinates are rounded so nested grids share their common points
_DECIMALS = 12


def check_step(step: float) -> None:
    if not 0.0 < step <= MAX_STEP:
        raise ModelDomainError(f"grid step {step} outside (0, {MAX_STEP}]")


def grid_axes(step: float) -> tuple[np.ndarray, np.ndarray]:
    """Regular alpha axis on (1/2, 1] and beta axis on [0, 1/2)."""
    alphas = np.round(PRIOR + step * np.arange(1, int(np.floor(PRIOR / step + 1e-9)) + 1),
                      _DECIMALS)
    alphas = alphas[alphas <= 1.0]
    betas = np.round(step * np.arange(0, int(np.ceil(PRIOR / step - 1e-9))), _DECIMALS)
    betas = betas[betas < PRIOR]
    return alphas, betas


def signal_axes(profile: PopulationProfile, step: float) -> tuple[np.ndarray, np.ndarray]:
    alphas, betas = grid_axes(step)
    extra = candidate_signals(profile)
    alphas = np.union1d(alphas, [c.signal.alpha for c in extra])
    betas = np.union1d(betas, [c.signal.beta for c in extra])
    return alphas, betas


def conditionals_grid(alpha, beta) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``posteriors_to_conditionals`` (informative signals only)."""
    span = alpha - beta
    pa = np.clip((alpha - 2.0 * alpha * beta) / span, 0.0, 1.0)
    pb = np.clip((1.0 - alpha) * (1.0 - 2.0 * beta) / span, 0.0, 1.0)
    return pa, pb


def share_grid(profile: PopulationProfile, alpha, beta, state: State,
               tie: TieRule = TieRule.FAVOR_A) -> np.ndarray:
    """A-vote share in ``state`` for arrays of informative signals."""
    like_a, like_b = binary_likelihoods(*conditionals_grid(alpha, beta))
    return sum(w * class_a_share(q, like_a, like_b, state, tie)
               for w, q in profile.classes)


def _wins(share, tie: TieRule, tol: float) -> np.ndarray:
    if tie is TieRule.FAVOR_A:
        return share >= PRIOR - tol
    return share > PRIOR + tol


@dataclass(frozen=True)
class GridReport:
    resolution: float
    tie: TieRule
    optimal_set: tuple[Signal, ...]
    max_share: float
    argmax: Signal
    bias_range: Optional[tuple[float, float]]
    evaluated: int

    def as_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "tie": self.tie.value,
            "evaluated": self.evaluated,
            "max_share_theta_b": self.max_share,
            "argmax": {"alpha": self.argmax.alpha, "beta": self.argmax.beta},
            "optimal_count": len(self.optimal_set),
            "bias_range": list(self.bias_range) if self.bias_range else None,
            "optimal_set": [[s.alpha, s.beta] for s in self.optimal_set],
        }


def grid_search(profile: PopulationProfile, step: float = DEFAULT_STEP,
                tie: TieRule = TieRule.FAVOR_A,
                tol: float = SHARE_TOL) -> GridReport:
    """Every grid signal whose state-B A-share wins under ``tie``."""
    check_step(step)
    alphas, betas = signal_axes(profile, step)
    a, b = np.meshgrid(alphas, betas, indexing="ij")
    share = share_grid(profile, a, b, State.THETA_B, tie)
    wins = _wins(share, tie, tol)
    idx = np.unravel_index(int(np.argmax(share)), share.shape)
    optimal = tuple(Signal(float(x), float(y))
                    for x, y in zip(a[wins], b[wins]))
    if optimal:
        biases = (1.0 - a[wins] - b[wins]) / (a[wins] - b[wins])
        bias_range = (float(biases.min()), float(biases.max()))
    else:
        bias_range = None
    return GridReport(step, tie, optimal, float(share[idx]),
                      Signal(float(a[idx]), float(b[idx])), bias_range,
                      int(share.size))


def oracle_classification(profile: PopulationProfile,
                          step: float = DEFAULT_STEP) -> Classification:
    """Classification from the grid alone (no candidate reasoning)."""
    uninformed = exact_vote_share(profile, UNINFORMATIVE, State.THETA_B)
    if election_outcome(uninformed, TieRule.FAVOR_A, SHARE_TOL) is Vote.A:
        return Classification.ALWAYS_A
    if grid_search(profile, step).optimal_set:
        return Classification.MANIPULABLE
    return Classification.NOT_MANIPULABLE


# --------------------------------------------------------------------------- #
# Closure check
# --------------------------------------------------------------------------- #

def round_down(alpha, beta, profile: PopulationProfile):
    """Snap signals onto the candidate coordinates: alpha to the largest
    accuracy not above it, beta to the largest of {0, 1 - q_high, 1 - q_low}
    not above it. Alphas below q_low map to ``nan``."""
    p = profile.normalized()
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    eps = 1e-12
    ra = np.where(alpha >= p.q_high - eps, p.q_high,
                  np.where(alpha >= p.q_low - eps, p.q_low, np.nan))
    rb = np.where(beta >= 1.0 - p.q_low - eps, 1.0 - p.q_low,
                  np.where(beta >= 1.0 - p.q_high - eps, 1.0 - p.q_high, 0.0))
    return ra, rb


@dataclass(frozen=True)
class ClosureVerdict:
    ok: bool
    discrepancies: tuple[str, ...]
    grid: GridReport
    classification: Classification

    def as_dict(self) -> dict:
        return {"verified": self.ok, "discrepancies": list(self.discrepancies),
                "classification": self.classification.value}


def verify_closure(profile: PopulationProfile,
                   step: float = DEFAULT_STEP) -> ClosureVerdict:
    """Grid optimum exists iff a candidate is optimal, and every grid optimum
    rounds down to an optimal candidate. When the uninformative signal
    already wins, only the rounding half is checked."""
    grid = grid_search(profile, step)
    report = classify(profile)
    problems: list[str] = []
    if report.classification is not Classification.ALWAYS_A:
        if bool(grid.optimal_set) != bool(report.witnesses):
            problems.append(
                f"grid has {len(grid.optimal_set)} optimal signal(s) but "
                f"{len(report.witnesses)} candidate witness(es)")
    if grid.optimal_set:
        a = np.array([s.alpha for s in grid.optimal_set])
        b = np.array([s.beta for s in grid.optimal_set])
        ra, rb = round_down(a, b, profile)
        below = np.isnan(ra)
        for k in np.flatnonzero(below):
            problems.append(f"optimal ({a[k]}, {b[k]}) has alpha below q_low")
        keep = ~below
        # alpha rounded to 1/2 is the uninformative signal
        flat = keep & (ra <= PRIOR)
        informative = keep & ~flat
        if flat.any():
            share = exact_vote_share(profile, UNINFORMATIVE, State.THETA_B)
            if share < PRIOR - SHARE_TOL:
                problems.append("grid optimum rounds to the uninformative "
                                "signal, which is not optimal")
        if informative.any():
            shares = share_grid(profile, ra[informative], rb[informative],
                                State.THETA_B)
            bad = np.flatnonzero(shares < PRIOR - SHARE_TOL)
            ai, bi = a[informative], b[informative]
            for k in bad:
                problems.append(
                    f"optimal ({ai[k]}, {bi[k]}) rounds to "
                    f"({ra[informative][k]}, {rb[informative][k]}) with "
                    f"A-share {shares[k]:.12f}")
    return ClosureVerdict(not problems, tuple(problems), grid,
                         report.classification)


# --------------------------------------------------------------------------- #
# The B-favourable tie rule
# --------------------------------------------------------------------------- #

def favor_b_witness(profile: PopulationProfile, eps: float = DEFAULT_STEP,
                    min_eps: float = 1e-9) -> Optional[Signal]:
    """A signal electing A in both states when ties go to B.

    Tries each candidate coordinate pair shifted up by ``eps`` in both
    coordinates, then with alpha at 1/2 + eps (beta kept or shifted); ``eps``
    is halved until a witness appears or it drops below ``min_eps``.
    """
    p = profile.normalized()
    alphas = sorted({p.q_low, p.q_high, PRIOR}, reverse=True)
    betas = sorted({0.0, 1.0 - p.q_high, 1.0 - p.q_low})
    e = eps
    while e >= min_eps:
        trials = [(a + e, b + e) for a in alphas for b in betas]
        trials += [(PRIOR + e, b) for b in betas]
        for a, b in trials:
            if not (b < PRIOR < a <= 1.0):
                continue
            s = Signal(a, b)
            in_b = exact_vote_share(profile, s, State.THETA_B, TieRule.FAVOR_B)
            in_a = exact_vote_share(profile, s, State.THETA_A, TieRule.FAVOR_B)
            if in_b > PRIOR and in_a > PRIOR:
                return s
        e /= 2.0
    return None
