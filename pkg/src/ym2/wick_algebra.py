"""Truncated formal series in interval generators and their Wick-rule expectation.

The generators M[alpha, a](I) are indexed by a curve index alpha, a Lie-algebra
index a (implicit: every differential slot carries one), and an x-interval I.
Expectations are defined purely combinatorially: a two-slot expectation is the
kernel integral over the interval overlap, and higher monomials reduce to sums
over perfect matchings.  No measure is assumed anywhere; the kernel may be
indefinite.

Slots are stored in product order (leftmost factor = latest loop position).
Riemann slots carry a precomputed scalar weight and stand for a central Casimir
insertion; they count one power of the coupling each, a contracted pair of
differential slots counts one as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import ResourceBudgetError, TruncationError, Ym2Error
from .lie_core import Representation, trace_contracted_word

__all__ = [
    "K_MAX",
    "Slot",
    "Monomial",
    "FormalSeries",
    "pair_covariance",
    "enumerate_pairings",
    "expectation_trace",
    "gauge_conjugate",
]

K_MAX = 6  # hard cap on the lambda-truncation order


@dataclass(frozen=True)
class Slot:
    """One generator occurrence.

    kind "diff": a differential M[alpha](interval) carrying a Lie index.
    kind "riemann": a scalar weight times the central insertion sum_a e_a e_a.
    """

    alpha: int
    interval: tuple
    kind: str = "diff"
    weight: float = 0.0

    def __post_init__(self):
        lo, hi = self.interval
        if hi < lo:
            raise Ym2Error(f"slot interval reversed: {self.interval}")
        if self.kind not in ("diff", "riemann"):
            raise Ym2Error(f"unknown slot kind {self.kind!r}")


@dataclass(frozen=True)
class Monomial:
    coefficient: float
    slots: tuple = ()

    @property
    def n_diff(self) -> int:
        return sum(1 for s in self.slots if s.kind == "diff")

    @property
    def n_riemann(self) -> int:
        return sum(1 for s in self.slots if s.kind == "riemann")

    def lambda_degree(self) -> float:
        """n_diff/2 + n_riemann; the only order this monomial can contribute at."""
        return self.n_diff / 2.0 + self.n_riemann


@dataclass(frozen=True)
class FormalSeries:
    """Finite linear combination of monomials, truncated at lambda-order K."""

    monomials: tuple
    truncation: int

    def __post_init__(self):
        if self.truncation > K_MAX:
            raise TruncationError(
                f"truncation exceeded: K={self.truncation} > K_MAX={K_MAX}"
            )
        for m in self.monomials:
            if m.lambda_degree() > self.truncation:
                raise Ym2Error("monomial exceeds the series truncation")

    @staticmethod
    def one(truncation: int) -> "FormalSeries":
        return FormalSeries((Monomial(1.0, ()),), truncation)

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        k = min(self.truncation, other.truncation)
        monos = [m for m in self.monomials + other.monomials if m.lambda_degree() <= k]
        return FormalSeries(tuple(monos), k)

    def scaled(self, c: float) -> "FormalSeries":
        return FormalSeries(
            tuple(Monomial(c * m.coefficient, m.slots) for m in self.monomials),
            self.truncation,
        )

    def __mul__(self, other: "FormalSeries") -> "FormalSeries":
        """Product with self's slots leftmost (i.e. self comes later in loop order)."""
        k = min(self.truncation, other.truncation)
        out = []
        for a in self.monomials:
            for b in other.monomials:
                m = Monomial(a.coefficient * b.coefficient, a.slots + b.slots)
                if m.lambda_degree() <= k:
                    out.append(m)
        return FormalSeries(tuple(out), k)

    def simplified(self) -> "FormalSeries":
        """Merge monomials with identical slot tuples; drop zero coefficients."""
        acc = {}
        order = []
        for m in self.monomials:
            if m.slots not in acc:
                acc[m.slots] = 0.0
                order.append(m.slots)
            acc[m.slots] += m.coefficient
        monos = tuple(
            Monomial(acc[s], s) for s in order if acc[s] != 0.0
        )
        return FormalSeries(monos, self.truncation)


def pair_covariance(cov, slot1: Slot, slot2: Slot) -> float:
    """Kernel integral over the slots' interval overlap (0 when disjoint)."""
    if slot1.kind != "diff" or slot2.kind != "diff":
        raise Ym2Error("pair_covariance requires differential slots")
    lo = max(slot1.interval[0], slot2.interval[0])
    hi = min(slot1.interval[1], slot2.interval[1])
    if hi <= lo:
        return 0.0
    return cov.integral(slot1.alpha, slot2.alpha, lo, hi)


def enumerate_pairings(n_slots: int):
    """All fixed-point-free involutions on {0..n_slots-1}, deterministic order.

    Odd slot counts give the empty list (their expectation vanishes).
    """
    if n_slots > 2 * K_MAX:
        raise TruncationError(f"truncation exceeded: {n_slots} slots > {2 * K_MAX}")
    if n_slots % 2 == 1:
        return []
    out = []

    def recurse(unmatched, acc):
        if not unmatched:
            out.append(tuple(acc))
            return
        i = unmatched[0]
        rest = unmatched[1:]
        for k, j in enumerate(rest):
            recurse(rest[:k] + rest[k + 1 :], acc + [(i, j)])

    recurse(tuple(range(n_slots)), [])
    return out


def _double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


_TRACE_CACHE: dict = {}


def _cached_trace(rep, n_slots, pairing, casimir_positions):
    key = (rep.name, n_slots, pairing, casimir_positions)
    val = _TRACE_CACHE.get(key)
    if val is None:
        val = trace_contracted_word(rep, n_slots, pairing, casimir_positions)
        _TRACE_CACHE[key] = val
    return val


def _monomial_expectation(mono: Monomial, rep, cov, out, k_max):
    """Accumulate the monomial's per-order contributions into ``out``."""
    # loop order = reverse of product order
    slots = mono.slots[::-1]
    diff_pos = [p for p, s in enumerate(slots) if s.kind == "diff"]
    riem_pos = [p for p, s in enumerate(slots) if s.kind == "riemann"]
    n_diff = len(diff_pos)
    if n_diff % 2 == 1:
        return
    order = n_diff // 2 + len(riem_pos)
    if order > k_max:
        return
    riem_weight = 1.0
    for p in riem_pos:
        riem_weight *= slots[p].weight
    if n_diff == 0:
        if mono.coefficient != 0.0:
            lie = _cached_trace(rep, len(slots), (), tuple(riem_pos))
            out[order] += mono.coefficient * riem_weight * lie
        return

    # covariance weights between differential slots, computed once
    w = np.zeros((n_diff, n_diff))
    for i in range(n_diff):
        for j in range(i + 1, n_diff):
            w[i, j] = w[j, i] = pair_covariance(
                cov, slots[diff_pos[i]], slots[diff_pos[j]]
            )

    total = 0.0
    casimirs = tuple(riem_pos)

    def recurse(unmatched, weight, acc):
        nonlocal total
        if not unmatched:
            pairing = tuple(
                tuple(sorted((diff_pos[i], diff_pos[j]))) for i, j in acc
            )
            total += weight * _cached_trace(rep, len(slots), pairing, casimirs)
            return
        i = unmatched[0]
        rest = unmatched[1:]
        for k, j in enumerate(rest):
            wij = w[i, j]
            if wij == 0.0:
                continue  # locality pruning: disjoint or vanishing kernel
            recurse(rest[:k] + rest[k + 1 :], weight * wij, acc + [(i, j)])

    recurse(tuple(range(n_diff)), 1.0, [])
    out[order] += mono.coefficient * riem_weight * total


def expectation_trace(series: FormalSeries, rep: Representation, cov, budget=None):
    """Per-order coupling coefficients of E(tr series) under the Wick rule.

    ``cov`` must expose integral(alpha, beta, lo, hi).  Sums over perfect
    matchings of each monomial's differential slots with zero-weight pairs
    pruned before any trace evaluation; Riemann slots contribute their scalar
    weight and a central Casimir insertion.  Deterministic summation order.
    """
    k = series.truncation
    if budget is not None:
        est = sum(
            _double_factorial(max(m.n_diff - 1, 0)) for m in series.monomials
        )
        if est > budget:
            raise ResourceBudgetError(
                f"estimated pairing count {est} exceeds budget {budget}",
                estimate=est,
                budget=budget,
            )
    out = np.zeros(k + 1)
    for mono in series.monomials:
        _monomial_expectation(mono, rep, cov, out, k)
    return out


# -- gauge conjugation -------------------------------------------------------


def _series_inverse(series: FormalSeries, max_slots: int) -> FormalSeries:
    """(1 + H)^-1 as a slot-truncated geometric series; degree-0 part must be 1."""
    const = sum(m.coefficient for m in series.monomials if not m.slots)
    if abs(const - 1.0) > 1e-12:
        raise Ym2Error("series inverse requires unit constant term")
    h = FormalSeries(
        tuple(m for m in series.monomials if m.slots), series.truncation
    )
    acc = FormalSeries.one(series.truncation)
    power = FormalSeries.one(series.truncation)
    # H has at least one slot per monomial, so max_slots bounds the expansion
    for _ in range(max_slots):
        power = (power * h.scaled(-1.0)).simplified()
        power = _drop_over(power, max_slots)
        if not power.monomials:
            break
        acc = acc + power
    return acc.simplified()


def _drop_over(series: FormalSeries, max_slots: int) -> FormalSeries:
    return FormalSeries(
        tuple(m for m in series.monomials if len(m.slots) <= max_slots),
        series.truncation,
    )


def gauge_conjugate(series: FormalSeries, lattice, K: int) -> FormalSeries:
    """Conjugate every curve generator by the lattice gauge transport of M[0].

    Each differential slot M[alpha](J) with alpha >= 1 and J in the lattice's
    midpoint-shifted family is split into its two half-cells K and replaced by
    h(x*)^-1 M[alpha](K) h(x*), where x* is the midpoint of K and h is the Ito
    transport of the alpha = 0 generator from 0 to x* on the 4N lattice.  The
    result is expanded to total lambda-degree <= K.  Slots with alpha = 0 are
    left untouched (inputs are expected to involve only curve generators).
    """
    from .lattice_transport import ito_transport  # deferred: avoids an import cycle

    if K < series.truncation:
        raise Ym2Error("conjugation truncation must cover the input series")
    if K > K_MAX:
        raise TruncationError(f"truncation exceeded: K={K} > K_MAX={K_MAX}")
    max_slots = 2 * K
    lat4 = lattice.refine(4)
    tilde = {
        (lo, hi): idx for idx, (lo, hi) in lattice.tilde_intervals_indexed()
    }

    transport_cache: dict = {}

    def h_pair(x_star):
        if x_star not in transport_cache:
            h = ito_transport(lat4, 0, 0.0, x_star, K)
            h = FormalSeries(h.monomials, K)
            hinv = _series_inverse(h, max_slots)
            transport_cache[x_star] = (h, hinv)
        return transport_cache[x_star]

    def replacements(slot: Slot):
        """List of slot-tuple/coefficient alternatives replacing one slot."""
        if slot.kind != "diff" or slot.alpha == 0:
            return [(1.0, (slot,))]
        if slot.interval not in tilde:
            raise Ym2Error(
                f"slot interval {slot.interval} is not in the lattice's shifted family"
            )
        lo, hi = slot.interval
        dx = lattice.dx
        if abs((hi - lo) - dx) < 1e-12:
            halves = [(lo, (lo + hi) / 2.0), ((lo + hi) / 2.0, hi)]
        else:
            halves = [(lo, hi)]  # the half-length boundary interval
        out = []
        for piece in halves:
            x_star = (piece[0] + piece[1]) / 2.0
            h, hinv = h_pair(x_star)
            mid = FormalSeries(
                (Monomial(1.0, (Slot(slot.alpha, piece),)),), K
            )
            conj = (hinv * mid) * h
            for m in conj.monomials:
                out.append((m.coefficient, m.slots))
        return out

    result = []
    for mono in series.monomials:
        partial = [(mono.coefficient, ())]
        for slot in mono.slots:
            reps = replacements(slot)
            partial = [
                (c0 * c1, s0 + s1)
                for c0, s0 in partial
                for c1, s1 in reps
                if len(s0) + len(s1) <= max_slots
            ]
        for c, s in partial:
            m = Monomial(c, s)
            if m.lambda_degree() <= K:
                result.append(m)
    return FormalSeries(tuple(result), K).simplified()
