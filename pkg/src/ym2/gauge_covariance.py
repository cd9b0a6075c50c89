"""Scalar Green's functions for the axial gauges and per-loop covariance kernels.

Each gauge supplies a symmetric kernel gbar(y, y') for the kinetic operator in
the y-direction.  A loop then induces the covariance matrix function

    C[alpha, beta](x) = sigma_ab * gbar(h_alpha(x), h_beta(x)),

where h_alpha is the height of piece alpha and sigma_ab = +-1 for equal or
opposite traversal directions.  Index 0 is reserved for the x-axis itself
(height 0, right-moving), used by the gauge-invariance machinery.

Kernels are kept in closed form: all lattice sums integrate them exactly, so
the only approximation anywhere downstream is the lattice subdivision itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve_geometry import AdmissibleLoop, HorizontalCurve
from .errors import Ym2Error

__all__ = [
    "GaugeChoice",
    "CovarianceSpec",
    "parse_gauge",
    "green_scalar",
    "covariance_fn",
    "interval_integral",
]

_KINDS = ("pax", "ax", "pax_mass", "pax_shift")


@dataclass(frozen=True)
class GaugeChoice:
    """One of: pax, ax, pax_mass (param = mass m > 0), pax_shift (param = c > 0)."""

    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise Ym2Error(f"unknown gauge {self.kind!r}")
        if self.kind in ("pax_mass", "pax_shift"):
            if self.param is None or self.param <= 0:
                raise Ym2Error(f"{self.kind} requires a positive parameter")
        elif self.param is not None:
            raise Ym2Error(f"{self.kind} takes no parameter")

    def __str__(self):
        if self.param is None:
            return self.kind
        return f"{self.kind}:{self.param:g}"


def parse_gauge(text: str) -> GaugeChoice:
    """Parse gauge strings: "pax", "ax", "pax_mass:<m>", "pax_shift:<c>"."""
    text = text.strip()
    if ":" in text:
        kind, param = text.split(":", 1)
        try:
            return GaugeChoice(kind, float(param))
        except ValueError:
            raise Ym2Error(f"bad gauge parameter in {text!r}") from None
    return GaugeChoice(text)


def green_scalar(gauge: GaugeChoice, y: float, yp: float) -> float:
    """The scalar kernel gbar(y, y') of the chosen gauge."""
    if gauge.kind == "pax":
        return -abs(y - yp) / 2.0
    if gauge.kind == "ax":
        if y * yp < 0:
            return 0.0
        return min(abs(y), abs(yp))
    if gauge.kind == "pax_mass":
        m = gauge.param
        return math.exp(-m * abs(y - yp)) / (2.0 * m)
    # pax_shift
    return -abs(y - yp) / 2.0 + gauge.param / 2.0


def _axis_curve(length: float) -> HorizontalCurve:
    return HorizontalCurve(((0.0, 0.0), (max(length, 1.0), 0.0)))


class CovarianceSpec:
    """Closed-form covariance kernels C[alpha, beta](x) for one loop and gauge.

    ``value`` evaluates the kernel pointwise; ``integral`` integrates it exactly
    over an x-interval (piecewise closed form, deterministic).  Indices run over
    0..m with 0 the x-axis; the spec is immutable and safe to share.
    """

    def __init__(self, loop: AdmissibleLoop, gauge: GaugeChoice):
        self.loop = loop
        self.gauge = gauge
        self._curves = [_axis_curve(loop.strip_length)] + list(loop.pieces)
        self._signs = [1] + [1 if p.right_moving else -1 for p in loop.pieces]
        if gauge.kind == "ax":
            self._check_pax_combination()

    @property
    def m(self) -> int:
        return len(self._curves) - 1

    def sigma(self, alpha: int, beta: int) -> int:
        return self._signs[alpha] * self._signs[beta]

    def _curve(self, alpha: int) -> HorizontalCurve:
        return self._curves[alpha]

    def overlap_window(self, alpha: int, beta: int):
        a, b = self._curve(alpha), self._curve(beta)
        lo, hi = max(a.x_lo, b.x_lo), min(a.x_hi, b.x_hi)
        return lo, hi

    def value(self, alpha: int, beta: int, x: float) -> float:
        """C[alpha, beta](x); 0 outside the overlap of the pieces' x-ranges."""
        lo, hi = self.overlap_window(alpha, beta)
        if not lo <= x <= hi:
            return 0.0
        ya = float(self._curve(alpha).height(x))
        yb = float(self._curve(beta).height(x))
        return self.sigma(alpha, beta) * green_scalar(self.gauge, ya, yb)

    def integral(self, alpha: int, beta: int, lo: float, hi: float) -> float:
        """Exact integral of C[alpha, beta] over [lo, hi] (clipped to the overlap)."""
        wlo, whi = self.overlap_window(alpha, beta)
        lo, hi = max(lo, wlo), min(hi, whi)
        if hi <= lo:
            return 0.0
        total = 0.0
        for x0, x1 in self._atoms(alpha, beta, lo, hi):
            total += self._atom_integral(alpha, beta, x0, x1)
        return self.sigma(alpha, beta) * total

    # -- internals ---------------------------------------------------------

    def _atoms(self, alpha, beta, lo, hi):
        """Subintervals of [lo, hi] on which the unsigned kernel is analytic."""
        cuts = {lo, hi}
        ca, cb = self._curve(alpha), self._curve(beta)
        for c in (ca, cb):
            for x in c.breakpoints():
                if lo < x < hi:
                    cuts.add(float(x))
        xs = sorted(cuts)
        refined = [xs[0]]
        for x0, x1 in zip(xs[:-1], xs[1:]):
            seg_cuts = set()
            pa = _linear_on(ca, x0, x1)
            pb = _linear_on(cb, x0, x1)
            candidates = [
                (pa[0] - pb[0], pa[1] - pb[1]),  # difference root: |.| kink
            ]
            if self.gauge.kind == "ax":
                candidates += [(pa[0] + pb[0], pa[1] + pb[1]), pa, pb]
            for a0, b0 in candidates:
                if b0 != 0.0:
                    r = -a0 / b0
                    if x0 < r < x1:
                        seg_cuts.add(r)
            for x in sorted(seg_cuts) + [x1]:
                refined.append(x)
        return list(zip(refined[:-1], refined[1:]))

    def _atom_integral(self, alpha, beta, x0, x1):
        """Integral of the unsigned kernel over one analytic atom."""
        ca, cb = self._curve(alpha), self._curve(beta)
        if self.gauge.kind == "pax_mass":
            m = self.gauge.param
            a_a, b_a = _linear_on(ca, x0, x1)
            a_b, b_b = _linear_on(cb, x0, x1)
            a, b = a_a - a_b, b_a - b_b
            mid = a + b * (x0 + x1) / 2.0
            s = 1.0 if mid >= 0 else -1.0  # s*(a+bx) = |diff| on the atom
            if b == 0.0:
                return (x1 - x0) * math.exp(-m * abs(a)) / (2.0 * m)
            lo_v = math.exp(-m * s * (a + b * x0))
            hi_v = math.exp(-m * s * (a + b * x1))
            return (lo_v - hi_v) / (2.0 * m * m * s * b)
        # kernels linear on the atom: trapezoid rule is exact
        f0 = green_scalar(self.gauge, float(ca.height(x0)), float(cb.height(x0)))
        f1 = green_scalar(self.gauge, float(ca.height(x1)), float(cb.height(x1)))
        return (f0 + f1) * (x1 - x0) / 2.0

    def _check_pax_combination(self):
        """Construction self-check: the axial kernel equals the four-term
        partial-axial combination gbar(y,y') - gbar(y,0) - gbar(0,y') + gbar(0,0)
        at the level of the unsigned Green's functions."""
        pax = GaugeChoice("pax")
        for alpha in range(1, self.m + 1):
            for beta in range(alpha, self.m + 1):
                lo, hi = self.overlap_window(alpha, beta)
                if hi <= lo:
                    continue
                for x in np.linspace(lo, hi, 7):
                    ya = float(self._curve(alpha).height(x))
                    yb = float(self._curve(beta).height(x))
                    combo = (
                        green_scalar(pax, ya, yb)
                        - green_scalar(pax, ya, 0.0)
                        - green_scalar(pax, 0.0, yb)
                        + green_scalar(pax, 0.0, 0.0)
                    )
                    direct = green_scalar(self.gauge, ya, yb)
                    if abs(combo - direct) > 1e-12:
                        raise AssertionError(
                            "axial kernel disagrees with its partial-axial combination"
                        )


def _linear_on(curve: HorizontalCurve, x0: float, x1: float):
    """(a, b) with height(x) = a + b*x on [x0, x1] (no vertex strictly inside)."""
    mid = (x0 + x1) / 2.0
    for p0, p1, a, b in curve.linear_pieces():
        if p0 <= mid <= p1:
            return a, b
    # callers clip to the overlap window first; guard anyway
    raise Ym2Error(f"x-window [{x0}, {x1}] outside curve range")


def covariance_fn(loop: AdmissibleLoop, gauge: GaugeChoice | str) -> CovarianceSpec:
    """Build the covariance kernel spec for a loop in the requested gauge."""
    if isinstance(gauge, str):
        gauge = parse_gauge(gauge)
    return CovarianceSpec(loop, gauge)


def interval_integral(spec: CovarianceSpec, alpha: int, beta: int, interval) -> float:
    """Exact closed-form integral of C[alpha, beta] over the interval (lo, hi)."""
    lo, hi = interval
    return spec.integral(alpha, beta, lo, hi)
