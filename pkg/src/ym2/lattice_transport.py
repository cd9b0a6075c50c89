"""Subdivision lattices and discretized parallel transport series.

Ito transport multiplies one elementary factor (1 - M(I)) per full lattice cell
in traversal order, which expands to the usual strictly-ordered sums.  The
Stratonovich transport runs over the midpoint-shifted interval family, where
consecutive chain elements may overlap halfway; its conversion to Ito-Riemann
form contracts adjacent overlapping pairs into scalar Casimir weights, with
term counts following the Fibonacci recursion.

Transports are built for any traversal direction with the orientation sign
(-1)^n per order; the direction enters the covariance through the +-1 of
same/opposite traversal, and the two bookkeepings together reproduce the
continuum chord-diagram values.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OffLatticeError, Ym2Error
from .wick_algebra import FormalSeries, Monomial, Slot

__all__ = [
    "Lattice",
    "TransportSeries",
    "ito_transport",
    "strat_transport",
    "strat_to_ito",
    "ito_riemann_patterns",
]


def _cells_equal(a, b):
    if len(a) != len(b):
        return False
    for (a0, a1), (b0, b1) in zip(a, b):
        if abs(a0 - b0) > 1e-12 * (1 + abs(a0)) or abs(a1 - b1) > 1e-12 * (1 + abs(a1)):
            return False
    return True


@dataclass(frozen=True)
class Lattice:
    """Uniform subdivision of [0, L] into N cells.

    All endpoints are integer multiples of ``half`` = L/(2N), so within one
    lattice the family identities (the shifted intervals' right halves tile
    [0, L] and coincide with the 2N-cell grid, whose halves give the 4N grid)
    hold bit-exactly; cross-grid comparisons carry an ulp-scale tolerance.
    """

    N: int
    L: float

    def __post_init__(self):
        if self.N < 1 or self.L <= 0:
            raise Ym2Error("lattice needs N >= 1 and L > 0")
        # family identities, checked on construction (ulp-scale float tolerance)
        assert _cells_equal(self._tilde_plus_family(), self._grid_cells(2 * self.N))
        fine = self._grid_cells(4 * self.N)
        plus_minus = [self._half_split(c)[0] for c in self._tilde_plus_family()]
        plus_plus = [self._half_split(c)[1] for c in self._tilde_plus_family()]
        assert _cells_equal(sorted(plus_minus + plus_plus), fine)

    @property
    def half(self) -> float:
        return self.L / (2 * self.N)

    @property
    def dx(self) -> float:
        return 2 * self.half

    def point(self, i: int) -> float:
        return (2 * i) * self.half

    def points(self):
        return [self.point(i) for i in range(self.N + 1)]

    def _grid_cells(self, n):
        h = self.L / n
        return [(i * h, (i + 1) * h) for i in range(n)]

    @staticmethod
    def _half_split(cell):
        lo, hi = cell
        mid = (lo + hi) / 2
        return (lo, mid), (mid, hi)

    def cells(self):
        """The N full cells [i dx, (i+1) dx]."""
        return [(2 * i * self.half, (2 * i + 2) * self.half) for i in range(self.N)]

    def cells_in(self, lo: float, hi: float):
        """Full cells contained in [lo, hi]."""
        return [c for c in self.cells() if c[0] >= lo - 1e-12 and c[1] <= hi + 1e-12]

    def tilde_interval(self, i: int):
        """J_i = [i dx/2, (i+2) dx/2] for 0 <= i <= 2N-2; J_{-1} = [0, dx/2]."""
        if i == -1:
            return (0.0, self.half)
        if not 0 <= i <= 2 * self.N - 2:
            raise Ym2Error(f"shifted interval index {i} out of range")
        return (i * self.half, (i + 2) * self.half)

    def tilde_indices(self):
        return list(range(-1, 2 * self.N - 1))

    def tilde_intervals_indexed(self):
        return [(i, self.tilde_interval(i)) for i in self.tilde_indices()]

    def tilde_in(self, lo: float, hi: float):
        """Indices i with J_i contained in [lo, hi]."""
        out = []
        for i in self.tilde_indices():
            a, b = self.tilde_interval(i)
            if a >= lo - 1e-12 and b <= hi + 1e-12:
                out.append(i)
        return out

    def _tilde_plus_family(self):
        return sorted(self.j_plus(i) for i in self.tilde_indices())

    def j_minus(self, i: int):
        """Left half of J_i under midpoint division (degenerate for i = -1)."""
        if i == -1:
            return (0.0, 0.0)
        lo, hi = self.tilde_interval(i)
        return (lo, (i + 1) * self.half)

    def j_plus(self, i: int):
        if i == -1:
            return self.tilde_interval(-1)
        return ((i + 1) * self.half, (i + 2) * self.half)

    def refine(self, factor: int) -> "Lattice":
        return Lattice(self.N * factor, self.L)

    def on_lattice(self, x: float) -> bool:
        r = x / self.dx
        return abs(r - round(r)) < 1e-9 and -1e-12 <= x <= self.L + 1e-12


@dataclass(frozen=True)
class TransportSeries(FormalSeries):
    """A transport expansion remembering how it was built."""

    lattice: Lattice = None
    alpha: int = 0
    x_minus: float = 0.0
    x_plus: float = 0.0
    scheme: str = "ito"


def _check_endpoints(lattice, x_minus, x_plus):
    for x in (x_minus, x_plus):
        if not lattice.on_lattice(x):
            raise OffLatticeError(
                f"transport endpoint {x} is not a lattice point (N={lattice.N})"
            )


def _elementary_product(factors, truncation):
    """Ordered product of elementary series, later factors multiplying from the left."""
    acc = FormalSeries.one(truncation)
    for f in factors:
        acc = f * acc
    return acc


def ito_transport(lattice, alpha, x_minus, x_plus, K) -> TransportSeries:
    """Truncated Ito parallel transport of generator ``alpha`` from x_minus to x_plus.

    Expands to 1 + sum_n (-1)^n [strictly ordered products over full cells in
    [min, max]]; cells are visited in traversal order (descending product index
    for right-moving, ascending for left-moving).
    """
    _check_endpoints(lattice, x_minus, x_plus)
    lo, hi = min(x_minus, x_plus), max(x_minus, x_plus)
    cells = lattice.cells_in(lo, hi)
    if x_plus < x_minus:
        cells = cells[::-1]  # traversal order for a left-moving transport
    factors = [
        FormalSeries(
            (Monomial(1.0, ()), Monomial(-1.0, (Slot(alpha, c),))), K
        )
        for c in cells
    ]
    series = _elementary_product(factors, K)
    return TransportSeries(
        series.monomials, K, lattice=lattice, alpha=alpha,
        x_minus=x_minus, x_plus=x_plus, scheme="ito",
    )


def _strat_range(lattice, x_minus, x_plus):
    lo, hi = min(x_minus, x_plus), max(x_minus, x_plus)
    avail = lattice.tilde_in(lo, hi)
    if not avail:
        return [], None
    right = x_plus >= x_minus
    i_tie = max(avail) if right else min(avail)
    return avail, i_tie


def strat_transport(lattice, alpha, x_minus, x_plus, K) -> TransportSeries:
    """Truncated Stratonovich parallel transport over the shifted interval family.

    Chains descend (right-moving) with odd index gaps, tied to the maximal
    available index by an even gap; consecutive chain intervals may overlap
    halfway, which is what distinguishes the midpoint rule from the Ito one.
    """
    _check_endpoints(lattice, x_minus, x_plus)
    avail, i_tie = _strat_range(lattice, x_minus, x_plus)
    right = x_plus >= x_minus
    monomials = [Monomial(1.0, ())]
    if avail:
        avail_set = set(avail)
        max_len = 2 * K

        def extend(chain):
            n = len(chain)
            if n > 0:
                slots = tuple(Slot(alpha, lattice.tilde_interval(i)) for i in chain)
                monomials.append(Monomial((-1.0) ** n, slots))
            if n == max_len:
                return
            last = chain[-1]
            if right:
                nxt = [j for j in avail_set if j < last and (last - j) % 2 == 1]
            else:
                nxt = [j for j in avail_set if j > last and (j - last) % 2 == 1]
            for j in sorted(nxt):
                extend(chain + [j])

        starts = [i for i in avail if (i - i_tie) % 2 == 0]
        for i in sorted(starts):
            extend([i])
    return TransportSeries(
        tuple(monomials), K, lattice=lattice, alpha=alpha,
        x_minus=x_minus, x_plus=x_plus, scheme="strat",
    )


def conversion_sites(lattice, x_minus, x_plus):
    """Tiling sites of the converted transport: every other shifted interval,
    anchored at the direction's tied end.  They partition the covered range."""
    avail, i_tie = _strat_range(lattice, x_minus, x_plus)
    if not avail:
        return []
    return sorted(i for i in avail if (i - i_tie) % 2 == 0)


def strat_to_ito(series: TransportSeries, cov) -> TransportSeries:
    """Convert a Stratonovich transport into its Ito-Riemann form.

    The outermost sum splits into a strictly-separated Ito branch and an
    adjacent-pair branch whose expectation becomes a Riemann slot weighted by
    the same-curve kernel integral over the half-cell overlap; applied
    recursively, the surviving terms factorize over non-overlapping tiling
    sites.  The discarded remainder decays with refinement, which the
    convergence tests certify.
    """
    if not isinstance(series, TransportSeries) or series.scheme != "strat":
        raise Ym2Error("strat_to_ito expects a Stratonovich transport series")
    lattice, alpha = series.lattice, series.alpha
    right = series.x_plus >= series.x_minus
    lo = min(series.x_minus, series.x_plus)
    hi = max(series.x_minus, series.x_plus)
    avail = set(lattice.tilde_in(lo, hi))
    sites = conversion_sites(lattice, series.x_minus, series.x_plus)
    K = series.truncation

    factors = []
    order = sites if right else sites[::-1]  # traversal order
    for v in order:
        j = lattice.tilde_interval(v)
        monos = [Monomial(1.0, ()), Monomial(-1.0, (Slot(alpha, j),))]
        neighbor = v - 1 if right else v + 1
        if neighbor in avail:
            jn = lattice.tilde_interval(neighbor)
            olo, ohi = max(j[0], jn[0]), min(j[1], jn[1])
            if ohi > olo:
                weight = cov.integral(alpha, alpha, olo, ohi)
                monos.append(
                    Monomial(1.0, (Slot(alpha, (olo, ohi), "riemann", weight),))
                )
        factors.append(FormalSeries(tuple(monos), K))
    converted = _elementary_product(factors, K)
    return TransportSeries(
        converted.monomials, K, lattice=lattice, alpha=alpha,
        x_minus=series.x_minus, x_plus=series.x_plus, scheme="ito_riemann",
    )


def ito_riemann_patterns(n: int):
    """Token patterns produced by fully converting a depth-n Stratonovich sum:
    ordered compositions of n into differentials (D, one slot) and contracted
    adjacent pairs (R, two slots).  Their count is the Fibonacci number F_{n+1}."""
    if n == 0:
        return [()]
    out = []
    for first, rest in (("D", n - 1), ("R", n - 2)):
        if rest >= 0:
            out.extend((first,) + tail for tail in ito_riemann_patterns(rest))
    return out
