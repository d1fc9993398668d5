"""Parameter sweeps over ``(q_low, lambda)`` at a fixed ``q_high``.

One row per cell, in lexicographic ``(q_low, lambda)`` order, rendered as CSV
with fixed-precision numbers so identical sweeps produce identical bytes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from juryrig.analysis import Classification, classify
from juryrig.model import PRIOR, ModelDomainError, PopulationProfile, warn
from juryrig.oracle import check_step, oracle_classification

COLUMNS = ("q_low", "q_high", "lambda", "classification", "n_witnesses",
           "bias_min", "bias_max", "best_candidate_id")

_DECIMALS = 12


def _axis(start: float, stop: float, step: float, name: str) -> tuple[float, ...]:
    if step <= 0.0:
        raise ModelDomainError(f"{name} step {step} must be positive")
    if stop < start:
        raise ModelDomainError(f"{name} range [{start}, {stop}] is empty")
    n = int(np.floor((stop - start) / step + 1e-9))
    return tuple(float(x) for x in np.round(start + step * np.arange(n + 1), _DECIMALS))


def fit_q_low(q_low: tuple[float, float, float],
              q_high: float) -> tuple[float, float, float]:
    """Cut a q_low range so it stops at q_high."""
    start, stop, step = q_low
    return start, min(stop, q_high), step


@dataclass(frozen=True)
class SweepSpec:
    q_high: float = 0.7
    q_low: tuple[float, float, float] = (0.5, 0.7, 0.01)
    lam: tuple[float, float, float] = (0.0, 1.0, 0.05)
    oracle_step: Optional[float] = None

    def __post_init__(self):
        for name, rng in (("q_low", self.q_low), ("lambda", self.lam)):
            if len(rng) != 3:
                raise ModelDomainError(f"{name} range needs (start, stop, step), got {rng}")
        lo, hi, _ = self.q_low
        if lo < PRIOR or hi > self.q_high:
            raise ModelDomainError(
                f"q_low range [{lo}, {hi}] leaves [0.5, q_high = {self.q_high}]")
        if self.lam[0] < 0.0 or self.lam[1] > 1.0:
            raise ModelDomainError(f"lambda range [{self.lam[0]}, {self.lam[1]}] leaves [0, 1]")
        if self.oracle_step is not None:
            check_step(self.oracle_step)
        # validates the axes eagerly
        self.q_low_values()
        self.lambda_values()

    def q_low_values(self) -> tuple[float, ...]:
        return _axis(*self.q_low, "q_low")

    def lambda_values(self) -> tuple[float, ...]:
        return _axis(*self.lam, "lambda")

    def profiles(self) -> Iterable[PopulationProfile]:
        for ql in self.q_low_values():
            for lam in self.lambda_values():
                yield PopulationProfile(lam, ql, self.q_high)

    def as_dict(self) -> dict:
        return {"q_high": self.q_high, "q_low": list(self.q_low),
                "lambda": list(self.lam), "oracle_step": self.oracle_step}


@dataclass(frozen=True)
class SweepRow:
    q_low: float
    q_high: float
    lam: float
    classification: Classification
    n_witnesses: int
    bias_min: Optional[float]
    bias_max: Optional[float]
    best_candidate_id: Optional[str]
    oracle_agrees: Optional[bool] = None

    def cells(self) -> list[str]:
        def num(x: Optional[float], digits: int) -> str:
            return "" if x is None else f"{x:.{digits}f}"
        out = [num(self.q_low, 4), num(self.q_high, 4), num(self.lam, 4),
               self.classification.value, str(self.n_witnesses),
               num(self.bias_min, 9), num(self.bias_max, 9),
               self.best_candidate_id or ""]
        if self.oracle_agrees is not None:
            out.append("true" if self.oracle_agrees else "false")
        return out


def sweep_row(profile: PopulationProfile,
              oracle_step: Optional[float] = None) -> SweepRow:
    report = classify(profile)
    biases = [c.signal.bias for c in report.witnesses if c.signal.bias is not None]
    best = (min(report.candidates, key=lambda c: c.b_share_theta_b)
            if report.candidates else None)
    agrees = None
    if oracle_step is not None:
        agrees = oracle_classification(profile, oracle_step) is report.classification
    return SweepRow(
        q_low=profile.q_low, q_high=profile.q_high, lam=profile.lam,
        classification=report.classification,
        n_witnesses=len(report.witnesses),
        bias_min=min(biases) if biases else None,
        bias_max=max(biases) if biases else None,
        best_candidate_id=best.id.value if best else None,
        oracle_agrees=agrees)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    rows = [sweep_row(p, spec.oracle_step) for p in spec.profiles()]
    disagreements = [r for r in rows if r.oracle_agrees is False]
    if disagreements:
        warn(f"{len(disagreements)} sweep cell(s) where the grid oracle "
             f"disagrees, first at q_low = {disagreements[0].q_low}, "
             f"lambda = {disagreements[0].lam}")
    return rows


def render_csv(rows: list[SweepRow], with_oracle: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS + (("oracle_agrees",) if with_oracle else ()))
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


# --------------------------------------------------------------------------- #
# Shape of the sweep
# --------------------------------------------------------------------------- #

def _by_q_low(rows: list[SweepRow]) -> dict[float, list[SweepRow]]:
    out: dict[float, list[SweepRow]] = {}
    for r in rows:
        out.setdefault(r.q_low, []).append(r)
    return out


def nonmonotone_in_lambda(rows: list[SweepRow]) -> list[float]:
    """q_low values whose manipulability flips more than once along lambda."""
    out = []
    for ql, column in _by_q_low(rows).items():
        flags = [r.classification is not Classification.NOT_MANIPULABLE
                 for r in sorted(column, key=lambda r: r.lam)]
        flips = sum(a != b for a, b in zip(flags, flags[1:]))
        if flips > 1:
            out.append(ql)
    return out


def nonmanipulable_counts(rows: list[SweepRow]) -> dict[float, int]:
    """Number of NotManipulable lambda cells per q_low."""
    return {ql: sum(r.classification is Classification.NOT_MANIPULABLE for r in column)
            for ql, column in _by_q_low(rows).items()}


def is_monotone(values: list[int]) -> bool:
    up = all(a <= b for a, b in zip(values, values[1:]))
    down = all(a >= b for a, b in zip(values, values[1:]))
    return up or down
