"""Loop-level series evaluation: lattice sweep, continuum chord sweep, extrapolation.

The lattice backend evaluates E(tr(P_m ... P_1)) per coupling order without
materializing the transport expansions.  Every gauge here has an x-local
kernel, so a Wick pair must sit inside a single half-cell of the subdivision;
sweeping half-cells left to right therefore closes all contractions locally.
The state is one End(V) word per loop piece, accumulated per coupling order,
with insertions applied on the side matching the piece's traversal direction.
Expanded transports (via lattice_transport + wick_algebra) provide the same
numbers at small N and anchor the sweep in tests.

The continuum backend integrates the same insertion flow exactly: between
breakpoints the kernels are linear in x, the per-order states are polynomial,
and the path-ordered integration is done in closed form.  It is the fast,
quadrature-free route for the translation-invariant gauges.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .curve_geometry import AdmissibleLoop
from .errors import OffLatticeError, ResourceBudgetError, Ym2Error
from .gauge_covariance import CovarianceSpec, GaugeChoice, covariance_fn, parse_gauge
from .lattice_transport import Lattice, conversion_sites, ito_transport, strat_to_ito, strat_transport
from .lie_core import Representation, casimir_matrix
from .wick_algebra import K_MAX, expectation_trace

__all__ = [
    "SeriesResult",
    "wilson_series_lattice",
    "wilson_series",
    "wilson_series_continuum_pax",
]

_PAX_FAMILY = ("pax", "pax_mass", "pax_shift")


@dataclass(frozen=True)
class SeriesResult:
    """Per-order coupling coefficients with lattice-refinement error estimates."""

    gauge: GaugeChoice
    truncation: int
    schedule: tuple
    coefficients: np.ndarray
    error_estimate: np.ndarray
    per_n: dict
    flags: tuple = ()

    def value(self, lam: float) -> float:
        return float(sum(c * lam**k for k, c in enumerate(self.coefficients)))


# -- strand/tile construction -------------------------------------------------


@dataclass(frozen=True)
class _Tile:
    halves: tuple  # global half-cell indices covered, ascending
    tad_half: int | None = None
    tad_weight: float = 0.0


def _half_index(lat: Lattice, x: float) -> int:
    r = x / lat.half
    i = int(round(r))
    if abs(r - i) > 1e-9:
        raise OffLatticeError(f"{x} is not a half-cell boundary")
    return i


def _pax_tiles(lat: Lattice, piece):
    tiles = []
    for lo, hi in lat.cells_in(piece.x_lo, piece.x_hi):
        h0 = _half_index(lat, lo)
        tiles.append(_Tile((h0, h0 + 1)))
    return tiles


def _strat_tiles(lat: Lattice, piece, alpha: int, spec: CovarianceSpec):
    right = piece.right_moving
    avail = set(lat.tilde_in(piece.x_lo, piece.x_hi))
    sites = conversion_sites(lat, piece.x_minus, piece.x_plus)
    tiles = []
    for v in sites:
        lo, hi = lat.tilde_interval(v)
        h0 = _half_index(lat, lo)
        halves = (h0,) if v == -1 else (h0, h0 + 1)
        neighbor = v - 1 if right else v + 1
        tad_half, tad_weight = None, 0.0
        if neighbor in avail:
            nlo, nhi = lat.tilde_interval(neighbor)
            olo, ohi = max(lo, nlo), min(hi, nhi)
            if ohi > olo:
                tad_half = _half_index(lat, olo)
                tad_weight = spec.integral(alpha, alpha, olo, ohi)
        tiles.append(_Tile(halves, tad_half, tad_weight))
    return tiles


class _SweepOps:
    """Cached insertion operators acting on the m-strand word tensor.

    Tensor axes are (order, r_1, c_1, ..., r_m, c_m).  An insertion on a
    right-moving strand left-multiplies its word (contracts the row axis);
    a left-moving strand right-multiplies (contracts the column axis).
    """

    def __init__(self, rep: Representation, right_moving: tuple):
        self.rep = rep
        self.m = len(right_moving)
        self.right = right_moving
        self.d = rep.dim
        self.E = np.stack(rep.basis)  # (g, d, d)
        self.cas = casimir_matrix(rep)
        self._letters = "abcdefghijklmnop"[: 2 * self.m]
        self._cache = {}

    def _axis_spec(self, strand):
        """(op_subscript, old_letter, new_letter index) for one insertion."""
        row, col = self._letters[2 * strand], self._letters[2 * strand + 1]
        if self.right[strand]:
            return "row", row
        return "col", col

    def pair_op(self, s1, s2):
        key = ("pair", s1, s2)
        if key not in self._cache:
            letters = list(self._letters)
            new = "qrstuv"
            in1 = letters[:]
            out = letters[:]
            terms = []
            for idx, s in enumerate((s1, s2)):
                kind, letter = self._axis_spec(s)
                pos = letters.index(letter)
                fresh = new[idx]
                out[pos] = fresh
                if kind == "row":  # e[s] @ W: (fresh, old)
                    terms.append(f"w{fresh}{letter}")
                else:  # W @ e[s]: (old, fresh)
                    terms.append(f"w{letter}{fresh}")
            sub = f"{terms[0]},{terms[1]},z{''.join(in1)}->z{''.join(out)}"
            self._cache[key] = sub
        sub = self._cache[key]
        return lambda arr: np.einsum(sub, self.E, self.E, arr)

    def casimir_op(self, s):
        key = ("cas", s)
        if key not in self._cache:
            letters = list(self._letters)
            kind, letter = self._axis_spec(s)
            out = letters[:]
            pos = letters.index(letter)
            out[pos] = "q"
            if kind == "row":
                term = f"q{letter}"
            else:
                term = f"{letter}q"
            self._cache[key] = f"{term},z{''.join(letters)}->z{''.join(out)}"
        sub = self._cache[key]
        return lambda arr: np.einsum(sub, self.cas, arr)

    def initial(self, n_orders):
        tensor = np.eye(self.d).astype(complex)
        for _ in range(self.m - 1):
            tensor = np.multiply.outer(tensor, np.eye(self.d).astype(complex))
        state = np.zeros((n_orders,) + (self.d,) * (2 * self.m), dtype=complex)
        state[0] = tensor
        return state

    def close_trace(self, arr):
        """Contract the word tensors cyclically: tr(W_m ... W_1) per order."""
        letters = list(self._letters)
        # row of strand s is i_{s+1}, col is i_s, with i_m identified with i_0
        idx = [chr(ord("A") + k) for k in range(self.m)]
        for s in range(self.m):
            letters[2 * s] = idx[(s + 1) % self.m]
            letters[2 * s + 1] = idx[s]
        return np.einsum(f"z{''.join(letters)}->z", arr)


def _matchings(items):
    items = list(items)
    if not items:
        return [()]
    out = []
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for sub in _matchings(rest[:k] + rest[k + 1 :]):
            out.append(((first, partner),) + sub)
    return out


def _branches(avail_d, avail_t):
    """All (pairs, tads) emission patterns at one half-cell."""
    out = []
    for size in range(0, len(avail_d) + 1, 2):
        for subset in itertools.combinations(avail_d, size):
            for pairs in _matchings(subset):
                rest = [t for t in avail_t if t not in subset]
                for tsize in range(len(rest) + 1):
                    for tads in itertools.combinations(rest, tsize):
                        out.append((pairs, tads))
    return out


def _sweep(loop, rep, spec, K, lat, budget=None):
    m = loop.m
    right = tuple(p.right_moving for p in loop.pieces)
    if spec.gauge.kind == "pax":
        # vanishing diagonal kernel: left-endpoint sums suffice
        tiles = [_pax_tiles(lat, p) for p in loop.pieces]
    else:
        # nonzero same-piece kernel: midpoint sums, converted to Ito-Riemann form
        tiles = [_strat_tiles(lat, loop.piece(a), a, spec) for a in range(1, m + 1)]

    n_half = 2 * lat.N
    tile_at = [dict() for _ in range(m)]  # half-cell -> tile
    for s in range(m):
        for t in tiles[s]:
            for h in t.halves:
                tile_at[s][h] = t

    if budget is not None:
        est = n_half * (2**m) * (4 ** max(m, 1)) * (K + 1) * rep.dim ** (2 * m)
        if est > budget:
            raise ResourceBudgetError(
                f"lattice sweep estimate {est} exceeds budget {budget}",
                estimate=est,
                budget=budget,
            )

    ops = _SweepOps(rep, right)
    state = {0: ops.initial(K + 1)}
    pair_cache = {}

    def w_pair(u, s1, s2):
        key = (u, s1, s2)
        if key not in pair_cache:
            lo, hi = u * lat.half, (u + 1) * lat.half
            pair_cache[key] = spec.integral(s1 + 1, s2 + 1, lo, hi)
        return pair_cache[key]

    for u in range(n_half):
        new_state = {}
        infos = []
        for s in range(m):
            t = tile_at[s].get(u)
            infos.append(
                (
                    t is not None,
                    t is not None and t.tad_half == u,
                    t.tad_weight if t is not None else 0.0,
                )
            )
        for mask, arr in state.items():
            avail_d = [s for s in range(m) if infos[s][0] and not (mask >> s) & 1]
            avail_t = [s for s in range(m) if infos[s][1] and not (mask >> s) & 1]
            for pairs, tads in _branches(avail_d, avail_t):
                weight = 1.0
                for s1, s2 in pairs:
                    weight *= w_pair(u, s1, s2)
                    if weight == 0.0:
                        break
                if weight == 0.0:
                    continue
                for t in tads:
                    weight *= infos[t][2]
                if weight == 0.0:
                    continue
                shift = len(pairs) + len(tads)
                if shift > K:
                    continue
                out = arr
                for s1, s2 in pairs:
                    out = ops.pair_op(s1, s2)(out)
                for t in tads:
                    out = ops.casimir_op(t)(out)
                new_mask = mask
                for s1, s2 in pairs:
                    new_mask |= (1 << s1) | (1 << s2)
                for t in tads:
                    new_mask |= 1 << t
                target = new_state.setdefault(
                    new_mask, np.zeros_like(arr)
                )
                if shift == 0:
                    target += weight * out
                else:
                    target[shift:] += weight * out[: K + 1 - shift]
        # clear the used-bit of strands whose tile ends at this half-cell
        clear = 0
        for s in range(m):
            t = tile_at[s].get(u)
            if t is not None and t.halves[-1] == u:
                clear |= 1 << s
        state = {}
        for mask, arr in new_state.items():
            nm = mask & ~clear
            if nm in state:
                state[nm] = state[nm] + arr
            else:
                state[nm] = arr

    total = np.zeros(K + 1, dtype=complex)
    for arr in state.values():
        total += ops.close_trace(arr)
    if np.abs(total.imag).max() > 1e-9:
        raise AssertionError("lattice sweep produced a non-real trace")
    return total.real


def _explicit(loop, rep, spec, K, lat, budget=None):
    """Reference path: expand the transports and take the Wick expectation."""
    factors = []
    for alpha in range(loop.m, 0, -1):  # product order: last piece leftmost
        p = loop.piece(alpha)
        if spec.gauge.kind == "pax":
            factors.append(ito_transport(lat, alpha, p.x_minus, p.x_plus, K))
        else:
            t = strat_transport(lat, alpha, p.x_minus, p.x_plus, K)
            factors.append(strat_to_ito(t, spec))
    series = factors[0]
    for f in factors[1:]:
        series = series * f
    return expectation_trace(series, rep, spec, budget=budget)


def wilson_series_lattice(
    loop: AdmissibleLoop,
    rep: Representation,
    gauge,
    K: int,
    N: int,
    method: str = "sweep",
    budget: float | None = None,
) -> np.ndarray:
    """Per-order coefficients of the loop expectation at one subdivision N.

    Builds Ito transports for the translation-invariant gauges and converted
    Stratonovich transports for complete axial gauge, multiplies them in loop
    order and evaluates the Wick-rule trace expectation.  ``method="sweep"``
    computes the same value by the half-cell transfer sweep; "explicit"
    materializes the expansions (small N only).
    """
    if isinstance(gauge, str):
        gauge = parse_gauge(gauge)
    if K > K_MAX:
        raise Ym2Error(f"truncation K={K} exceeds K_MAX={K_MAX}")
    lat = Lattice(N, loop.strip_length)
    for p in loop.pieces:
        for x in (p.x_minus, p.x_plus):
            if not lat.on_lattice(x):
                raise OffLatticeError(
                    f"piece endpoint {x} is off the N={N} lattice; "
                    "choose a schedule matching the loop geometry"
                )
    spec = covariance_fn(loop, gauge)
    if method == "sweep":
        return _sweep(loop, rep, spec, K, lat, budget=budget)
    if method == "explicit":
        return _explicit(loop, rep, spec, K, lat, budget=budget)
    raise Ym2Error(f"unknown lattice method {method!r}")


def wilson_series(
    loop: AdmissibleLoop,
    rep: Representation,
    gauge,
    K: int,
    schedule,
    budget: float | None = None,
) -> SeriesResult:
    """Refinement sweep over the lattice schedule with first-order Richardson
    extrapolation per order.

    The error model is fixed to leading order 1/N; a growing last refinement
    difference flags the order as not converged rather than raising.
    """
    if isinstance(gauge, str):
        gauge = parse_gauge(gauge)
    schedule = list(schedule)
    if len(schedule) < 3 or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise Ym2Error("schedule must be at least 3 strictly increasing N values")
    per_n = {n: wilson_series_lattice(loop, rep, gauge, K, n, budget=budget) for n in schedule}
    n2, n3 = schedule[-2], schedule[-1]
    v1, v2, v3 = (per_n[n] for n in schedule[-3:])
    extrapolated = (n3 * v3 - n2 * v2) / (n3 - n2)
    coeffs = np.array(extrapolated)
    coeffs[0] = float(rep.dim)  # order zero is exact
    err = np.abs(coeffs - v3)
    err[0] = 0.0
    flags = []
    scale = np.maximum(np.abs(v3), 1.0)
    d12 = np.abs(v2 - v1)
    d23 = np.abs(v3 - v2)
    if np.any(d23 > 1.05 * d12 + 1e-12 * scale):
        flags.append("not_converged")
    return SeriesResult(
        gauge=gauge,
        truncation=K,
        schedule=tuple(schedule),
        coefficients=coeffs,
        error_estimate=err,
        per_n=per_n,
        flags=tuple(flags),
    )


# -- continuum chord sweep (partial axial gauge family) -----------------------


class _PolyState:
    """Per-order polynomial tensors on one atom, in powers of (x - x0)."""

    def __init__(self, ops, K):
        self.ops = ops
        self.K = K
        d, m = ops.d, ops.m
        shape = (d,) * (2 * m)
        self.coeffs = [np.zeros((1,) + shape, dtype=complex) for _ in range(K + 1)]

    @staticmethod
    def _integrate(poly):
        out = np.zeros((poly.shape[0] + 1,) + poly.shape[1:], dtype=complex)
        for deg in range(poly.shape[0]):
            out[deg + 1] = poly[deg] / (deg + 1)
        return out

    @staticmethod
    def _eval(poly, dx):
        return sum(poly[deg] * dx**deg for deg in range(poly.shape[0]))


def _continuum_breakpoints(loop, spec):
    cuts = {0.0, loop.strip_length}
    for p in loop.pieces:
        cuts.update(float(x) for x in p.breakpoints())
    pieces = list(loop.pieces)
    for a, b in itertools.combinations(range(len(pieces)), 2):
        pa, pb = pieces[a], pieces[b]
        lo, hi = max(pa.x_lo, pb.x_lo), min(pa.x_hi, pb.x_hi)
        if hi <= lo:
            continue
        xs = sorted(
            set(
                [float(x) for x in pa.breakpoints() if lo <= x <= hi]
                + [float(x) for x in pb.breakpoints() if lo <= x <= hi]
                + [lo, hi]
            )
        )
        for x0, x1 in zip(xs[:-1], xs[1:]):
            # kink of |h_a - h_b| inside the co-linear piece
            va0 = float(pa.height(x0)) - float(pb.height(x0))
            va1 = float(pa.height(x1)) - float(pb.height(x1))
            if va0 * va1 < 0:
                cuts.add(x0 + (x1 - x0) * va0 / (va0 - va1))
    return sorted(cuts)


def wilson_series_continuum_pax(
    loop: AdmissibleLoop, rep: Representation, K: int, gauge="pax"
) -> np.ndarray:
    """Exact continuum coefficients for the partial-axial-gauge family.

    Chords join equal-x points on distinct pieces; sweeping x once integrates
    the path-ordered insertion flow in closed form (the kernels are linear in
    x between breakpoints, so every per-order state stays polynomial).
    Same-piece chords vanish: the strictly ordered expansion never puts two
    insertions at one point of one piece.
    """
    if isinstance(gauge, str):
        gauge = parse_gauge(gauge)
    if gauge.kind not in ("pax", "pax_shift"):
        raise Ym2Error("continuum sweep supports the pax family with linear kernels")
    if K > K_MAX:
        raise Ym2Error(f"truncation K={K} exceeds K_MAX={K_MAX}")
    spec = covariance_fn(loop, gauge)
    ops = _SweepOps(rep, tuple(p.right_moving for p in loop.pieces))
    m = loop.m

    values = [None] * (K + 1)
    values[0] = ops.initial(1)[0]
    for k in range(1, K + 1):
        values[k] = np.zeros_like(values[0])

    cuts = _continuum_breakpoints(loop, spec)
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        dx = x1 - x0
        if dx <= 0:
            continue
        mid = (x0 + x1) / 2
        active_pairs = []
        for a, b in itertools.combinations(range(1, m + 1), 2):
            pa, pb = loop.piece(a), loop.piece(b)
            if pa.x_lo <= mid <= pa.x_hi and pb.x_lo <= mid <= pb.x_hi:
                v0 = spec.value(a, b, x0)
                v1 = spec.value(a, b, x1)
                if v0 != 0.0 or v1 != 0.0:
                    active_pairs.append((a - 1, b - 1, v0, (v1 - v0) / dx))
        # midpoint-rule tadpole drift: density C[a,a]/2 per unit length
        drifts = []
        for a in range(1, m + 1):
            pa = loop.piece(a)
            if pa.x_lo <= mid <= pa.x_hi:
                v0 = spec.value(a, a, x0) / 2.0
                v1 = spec.value(a, a, x1) / 2.0
                if v0 != 0.0 or v1 != 0.0:
                    drifts.append((a - 1, v0, (v1 - v0) / dx))
        # per-order polynomials in (x - x0)
        polys = [v[np.newaxis] for v in values]
        for k in range(1, K + 1):
            rhs = np.zeros((polys[k - 1].shape[0] + 1,) + polys[k - 1].shape[1:], complex)
            for s1, s2, c0, c1 in active_pairs:
                inserted = ops.pair_op(s1, s2)(polys[k - 1])
                rhs[: inserted.shape[0]] += c0 * inserted
                rhs[1 : inserted.shape[0] + 1] += c1 * inserted
            for s, c0, c1 in drifts:
                inserted = ops.casimir_op(s)(polys[k - 1])
                rhs[: inserted.shape[0]] += c0 * inserted
                rhs[1 : inserted.shape[0] + 1] += c1 * inserted
            integ = _PolyState._integrate(rhs)
            integ[0] += values[k]  # continuity: T_k(x0) carries over
            polys[k] = integ
        for k in range(K + 1):
            values[k] = _PolyState._eval(polys[k], dx)

    out = np.zeros(K + 1, dtype=complex)
    for k in range(K + 1):
        out[k] = ops.close_trace(values[k][np.newaxis])[0]
    if np.abs(out.imag).max() > 1e-10:
        raise AssertionError("continuum sweep produced a non-real trace")
    return out.real
