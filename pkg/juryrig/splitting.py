"""Signals with more than two realizations, and how to do without them.

A :class:`MultiSignal` lists the posterior each realization induces and the
realization's unconditional probability. :func:`decompose` writes it as a
mixture of the binary signal on its two extreme posteriors and a signal with
fewer realizations; :func:`reduce_to_binary` follows the better branch of
each split, so a binary signal always does at least as well as any
finite one. :func:`decomposition_tree` keeps every branch instead.

Realizations are identified by their posterior: two realizations with the
same posterior are indistinguishable to every voter, and are merged.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from juryrig.model import (
    PRIOR, ModelDomainError, PopulationProfile, Signal, State, TieRule,
    class_a_share,
)

_PLAUSIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class MultiSignal:
    posteriors: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.posteriors) != len(self.probs):
            raise ModelDomainError(
                f"{len(self.posteriors)} posteriors but {len(self.probs)} probabilities")
        if not self.posteriors:
            raise ModelDomainError("a signal needs at least one realization")
        for x in itertools.chain(self.posteriors, self.probs):
            if not 0.0 <= x <= 1.0:
                raise ModelDomainError(f"{x!r} is not a probability")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > _PLAUSIBILITY_TOL:
            raise ModelDomainError(f"realization probabilities sum to {total}")
        mean = math.fsum(a * p for a, p in zip(self.posteriors, self.probs))
        if abs(mean - PRIOR) > _PLAUSIBILITY_TOL:
            raise ModelDomainError(
                f"posteriors average to {mean}, not the prior 1/2 "
                f"(Bayes plausibility)")

    def __len__(self) -> int:
        return len(self.posteriors)

    @classmethod
    def from_binary(cls, signal: Signal) -> "MultiSignal":
        if not signal.informative:
            return cls((PRIOR,), (1.0,))
        a, b = signal.alpha, signal.beta
        p_a = (PRIOR - b) / (a - b)
        return cls((a, b), (p_a, 1.0 - p_a))

    @property
    def informative(self) -> bool:
        return any(a != PRIOR and p > 0.0
                   for a, p in zip(self.posteriors, self.probs))

    def canonical(self) -> "MultiSignal":
        """Drop null realizations, merge equal posteriors, sort descending."""
        merged: dict[float, float] = {}
        for a, p in zip(self.posteriors, self.probs):
            if p > 0.0:
                merged[a] = merged.get(a, 0.0) + p
        order = sorted(merged, reverse=True)
        return MultiSignal(tuple(order), tuple(merged[a] for a in order))

    def conditionals(self) -> tuple[np.ndarray, np.ndarray]:
        """Realization likelihoods in state A and in state B."""
        a = np.asarray(self.posteriors)
        p = np.asarray(self.probs)
        return 2.0 * a * p, 2.0 * (1.0 - a) * p

    def to_binary(self) -> Signal:
        s = self.canonical()
        if not s.informative:
            return Signal()
        if len(s) != 2:
            raise ModelDomainError(
                f"signal has {len(s)} distinct realizations, not 2")
        return Signal(s.posteriors[0], s.posteriors[1])

    def as_dict(self) -> dict:
        return {"posteriors": list(self.posteriors), "probs": list(self.probs)}


@dataclass(frozen=True)
class Split:
    eta: float
    s1: MultiSignal
    s2: MultiSignal


def _subsignal(posteriors, probs) -> MultiSignal:
    # renormalized pieces carry rounding of order 1e-16
    total = math.fsum(probs)
    return MultiSignal(tuple(posteriors), tuple(p / total for p in probs))


def decompose(signal: MultiSignal) -> Split:
    """Mixture ``eta * s1 + (1 - eta) * s2`` of the extreme binary signal
    ``s1`` and a signal ``s2`` sharing at most one realization with it."""
    s = signal.canonical()
    if not s.informative:
        return Split(0.5, s, s)
    n = len(s)
    if n <= 2:
        raise ModelDomainError(
            f"decompose needs more than two distinct realizations (got {n})")
    a1, an = s.posteriors[0], s.posteriors[-1]
    p1, pn = s.probs[0], s.probs[-1]
    p_a = (PRIOR - an) / (a1 - an)
    p_b = 1.0 - p_a
    s1 = MultiSignal((a1, an), (p_a, p_b))
    middle_a = s.posteriors[1:-1]
    middle_p = s.probs[1:-1]
    lhs, rhs = p_a * pn, p_b * p1
    if math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-15):
        eta = p1 + pn
        s2 = _subsignal(middle_a, [p / (1.0 - eta) for p in middle_p])
    elif lhs < rhs:
        eta = pn / p_b
        keep = (p1 - eta * p_a) / (1.0 - eta)
        s2 = _subsignal((a1,) + middle_a,
                        [keep] + [p / (1.0 - eta) for p in middle_p])
    else:
        eta = p1 / p_a
        keep = (pn - eta * p_b) / (1.0 - eta)
        s2 = _subsignal(middle_a + (an,),
                        [p / (1.0 - eta) for p in middle_p] + [keep])
    return Split(eta, s1, s2)


def split_problems(signal: MultiSignal, split: Split,
                   tol: float = 1e-12) -> list[str]:
    """Check a split: mixture identity per realization and state, smaller
    supports, at most one shared realization, Bayes plausibility."""
    s = signal.canonical()
    problems = []
    d, d1, d2 = (dict(zip(m.posteriors, m.probs))
                 for m in (s, split.s1, split.s2))
    for x in set(d) | set(d1) | set(d2):
        for weight in (x, 1.0 - x):   # state A / state B likelihood factor
            mixed = split.eta * d1.get(x, 0.0) + (1.0 - split.eta) * d2.get(x, 0.0)
            if abs(2 * weight * (d.get(x, 0.0) - mixed)) > tol:
                problems.append(f"mixture differs at posterior {x}")
                break
    if len(s) > 2 and not (len(split.s1) < len(s) and len(split.s2) < len(s)):
        problems.append("a part is as large as the signal")
    shared = set(d1) & set(d2)
    if len(shared) > 1:
        problems.append(f"parts share {len(shared)} realizations")
    for part in (split.s1, split.s2):
        mean = math.fsum(a * p for a, p in zip(part.posteriors, part.probs))
        if abs(mean - PRIOR) > tol:
            problems.append(f"part averages to {mean}")
    return problems


def multisignal_share(signal: MultiSignal, profile: PopulationProfile,
                      state: State, tie: TieRule = TieRule.FAVOR_A) -> float:
    """A-vote share under an n-realization signal."""
    like_a, like_b = signal.conditionals()
    return float(sum(w * class_a_share(q, like_a, like_b, state, tie)
                     for w, q in profile.classes))


def reduce_to_binary(signal: MultiSignal, profile: PopulationProfile,
                     tie: TieRule = TieRule.FAVOR_A) -> Signal:
    s = signal.canonical()
    while s.informative and len(s) > 2:
        split = decompose(s)
        first = multisignal_share(split.s1, profile, State.THETA_B, tie)
        second = multisignal_share(split.s2, profile, State.THETA_B, tie)
        s = split.s1 if first >= second - 1e-12 else split.s2.canonical()
    return s.to_binary()


def decomposition_tree(signal: MultiSignal) -> nx.DiGraph:
    """Split recursively down to binary (or single-realization) leaves.

    Node 0 is the signal; every node carries ``signal`` and ``weight`` (the
    product of edge weights from the root); edges carry ``weight`` =
    ``eta`` or ``1 - eta``.
    """
    tree = nx.DiGraph()
    root = signal.canonical()
    tree.add_node(0, signal=root, weight=1.0)
    pending = [0]
    counter = itertools.count(1)
    while pending:
        node = pending.pop()
        s = tree.nodes[node]["signal"]
        if len(s) <= 2 or not s.informative:
            continue
        split = decompose(s)
        for part, w in ((split.s1, split.eta), (split.s2.canonical(), 1.0 - split.eta)):
            child = next(counter)
            tree.add_node(child, signal=part,
                          weight=tree.nodes[node]["weight"] * w)
            tree.add_edge(node, child, weight=w)
            pending.append(child)
    return tree


def leaf_mixture(tree: nx.DiGraph) -> list[tuple[float, MultiSignal]]:
    return [(tree.nodes[n]["weight"], tree.nodes[n]["signal"])
            for n in sorted(tree.nodes) if tree.out_degree(n) == 0]
