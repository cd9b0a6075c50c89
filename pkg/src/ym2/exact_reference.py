"""Exact closed forms for simple loops, with an SU(2) character-sum cross-check.

A simple loop of area A in representation rho has expectation
``dim(rho) * exp(-lam * A * kappa2(rho) / 2)``; disjoint simple loops multiply.
The character route evaluates the same number as an integral of the character
against the heat kernel on the group, which for SU(2) reduces to a
one-dimensional Weyl integral — an independent check of the Casimir
normalization used everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import UnsupportedRepresentationError, Ym2Error
from .lie_core import Representation

__all__ = [
    "ExactValue",
    "CharacterValue",
    "exact_simple_loop",
    "exact_disjoint_product",
    "su2_character_check",
]


@dataclass(frozen=True)
class ExactValue:
    """amplitude * exp(rate * lam); closed under products of disjoint loops."""

    amplitude: float
    rate: float

    def __call__(self, lam: float) -> float:
        return self.amplitude * math.exp(self.rate * lam)

    def coefficients(self, K: int) -> np.ndarray:
        return np.array(
            [self.amplitude * self.rate**k / math.factorial(k) for k in range(K + 1)]
        )


def exact_simple_loop(rep: Representation, area: float) -> ExactValue:
    """Heat-kernel value for a non-self-intersecting loop enclosing ``area``."""
    if area < 0:
        raise Ym2Error("area must be nonnegative")
    return ExactValue(float(rep.dim), -area * rep.casimir_scalar / 2.0)


def exact_disjoint_product(reps_and_areas) -> ExactValue:
    """Product value for pairwise-disjoint simple loops (independence)."""
    amplitude, rate = 1.0, 0.0
    for rep, area in reps_and_areas:
        single = exact_simple_loop(rep, area)
        amplitude *= single.amplitude
        rate += single.rate
    return ExactValue(amplitude, rate)


@dataclass(frozen=True)
class CharacterValue:
    value: float
    tail_estimate: float
    converged: bool


def _su2_spin(rep: Representation) -> float:
    if rep.group_id != "su2":
        raise UnsupportedRepresentationError(
            "character check supports su2 representations only"
        )
    return {"fund": 0.5, "trivial": 0.0}[rep.rep_id]


def _su2_casimir(j: float) -> float:
    # normalization pinned by kappa2(fundamental) = 3/2
    return 2.0 * j * (j + 1.0)


def su2_character_check(
    rep: Representation, area: float, lam: float, cutoff: int
) -> CharacterValue:
    """Weyl-integrated character sum against the SU(2) heat kernel.

    K_t on the maximal torus is the spin sum of (2j+1) e^{-t j(j+1)} chi_j with
    t = lam * area; integrating against chi_rho with the sin^2 Weyl measure
    recovers the closed form.  The tail estimate flags an insufficient cutoff
    instead of raising.
    """
    if cutoff < 1:
        raise Ym2Error("cutoff must be at least 1")
    j_rho = _su2_spin(rep)
    t = lam * area
    spins = [0.5 * k for k in range(0, int(2 * cutoff) + 1)]

    def chi(j, theta):
        return np.sin((2 * j + 1) * theta) / np.sin(theta)

    def integrand(theta):
        kernel = sum(
            (2 * j + 1) * math.exp(-t * _su2_casimir(j) / 2.0) * chi(j, theta)
            for j in spins
        )
        return (2.0 / math.pi) * chi(j_rho, theta) * kernel * np.sin(theta) ** 2

    value, _ = quad(integrand, 0.0, math.pi, limit=200)
    j_next = spins[-1] + 0.5
    tail = 3.0 * (2 * j_next + 1) ** 2 * math.exp(-t * _su2_casimir(j_next) / 2.0)
    return CharacterValue(value=value, tail_estimate=tail, converged=tail < 1e-8)
