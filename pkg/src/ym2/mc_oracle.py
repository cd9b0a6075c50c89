"""White-noise Monte Carlo for the complete-axial-gauge Wilson loop.

Each sample draws a 2D Gaussian white-noise field on a grid, integrates it
over the regions between the loop pieces and the x-axis to get the increment
variables, evaluates the finite-N Stratonovich holonomy of every piece on the
sampled values, and traces the loop product.  The per-sample chain sum is
finite and is evaluated exactly by a prefix recursion, so no truncation or
sample rejection is needed.

Streams are counter-based: sample i draws from Philox keyed by (seed, i), so
results are bit-identical for a given (seed, n_samples, N) regardless of how
the sample range is chunked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve_geometry import AdmissibleLoop, HorizontalCurve
from .errors import McDomainError, Ym2Error
from .lattice_transport import Lattice
from .lie_core import Representation

__all__ = ["NoiseField", "McEstimate", "sample_tilde_m", "mc_wilson", "build_noise_field"]

RNG_ID = "numpy-philox4x64(key=(seed, sample_index))"


@dataclass(frozen=True)
class NoiseField:
    """Grid geometry and seed for the white-noise samples.

    Cell (u, v) covers [x_breaks[u], x_breaks[u+1]] x [y_breaks[v], y_breaks[v+1]]
    and carries independent centered Gaussians of variance lam * cell_area per
    Lie-algebra component.
    """

    x_breaks: tuple
    y_breaks: tuple
    lam: float
    seed: int
    lie_dim: int

    @property
    def n_x(self) -> int:
        return len(self.x_breaks) - 1

    @property
    def n_y(self) -> int:
        return len(self.y_breaks) - 1

    def cell_areas(self) -> np.ndarray:
        dx = np.diff(np.asarray(self.x_breaks))
        dy = np.diff(np.asarray(self.y_breaks))
        return np.outer(dx, dy)

    def draw(self, sample_index: int) -> np.ndarray:
        """Cell values for one sample: shape (n_x, n_y, lie_dim)."""
        rng = np.random.Generator(
            np.random.Philox(key=[int(self.seed), int(sample_index)])
        )
        z = rng.standard_normal((self.n_x, self.n_y, self.lie_dim))
        return np.sqrt(self.lam * self.cell_areas())[..., None] * z


def _y_breaks(loop: AdmissibleLoop, N: int):
    heights = {0.0}
    constant = True
    for p in loop.pieces:
        ys = [v[1] for v in p.vertices]
        heights.update(float(y) for y in ys)
        if max(ys) - min(ys) > 0:
            constant = False
    breaks = sorted(heights)
    if not constant:
        # sloped pieces: refine so the partial-cell attribution error shrinks with N
        target = loop.y_max / max(N // 2, 4)
        refined = [breaks[0]]
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            steps = max(1, int(np.ceil((hi - lo) / target)))
            refined.extend(lo + (hi - lo) * (k + 1) / steps for k in range(steps))
        breaks = refined
    return tuple(breaks)


def build_noise_field(
    loop: AdmissibleLoop, lam: float, N: int, seed: int, lie_dim: int
) -> NoiseField:
    if not loop.above_axis:
        raise McDomainError("translate loop above axis for MC")
    if lam <= 0:
        raise McDomainError("MC requires lambda > 0")
    lat = Lattice(N, loop.strip_length)
    x_breaks = tuple((u * lat.half) for u in range(2 * N + 1))
    return NoiseField(x_breaks, _y_breaks(loop, N), lam, seed, lie_dim)


def _area_below_clipped(piece: HorizontalCurve, xlo, xhi, y0, y1):
    """Exact area of {(x, y): xlo <= x <= xhi, y0 <= y <= min(height(x), y1)}."""
    xlo = max(xlo, piece.x_lo)
    xhi = min(xhi, piece.x_hi)
    if xhi <= xlo:
        return 0.0
    total = 0.0
    for p0, p1, a, b in piece.linear_pieces():
        lo, hi = max(xlo, p0), min(xhi, p1)
        if hi <= lo:
            continue
        cuts = {lo, hi}
        for level in (y0, y1):
            if b != 0.0:
                r = (level - a) / b
                if lo < r < hi:
                    cuts.add(r)
        xs = sorted(cuts)
        for c0, c1 in zip(xs[:-1], xs[1:]):
            # integrand (min(h, y1) - y0)^+ is linear between cuts
            v0 = max(min(a + b * c0, y1) - y0, 0.0)
            v1 = max(min(a + b * c1, y1) - y0, 0.0)
            total += (v0 + v1) * (c1 - c0) / 2.0
    return total


def _strip_weights(field: NoiseField, piece: HorizontalCurve, interval):
    """Per-cell weights |R cap c| / |c| for the region under the piece over
    the x-window ``interval``; nonzero only in the strip's columns."""
    xlo, xhi = interval
    xb = np.asarray(field.x_breaks)
    yb = np.asarray(field.y_breaks)
    u0 = int(np.searchsorted(xb, xlo + 1e-12) - 1)
    u1 = int(np.searchsorted(xb, xhi - 1e-12) - 1)
    cols = range(max(u0, 0), min(u1, field.n_x - 1) + 1)
    weights = {}
    for u in cols:
        cx0, cx1 = max(xb[u], xlo), min(xb[u + 1], xhi)
        if cx1 <= cx0:
            continue
        col = np.zeros(field.n_y)
        for v in range(field.n_y):
            area = _area_below_clipped(piece, cx0, cx1, yb[v], yb[v + 1])
            if area != 0.0:
                cell_area = (xb[u + 1] - xb[u]) * (yb[v + 1] - yb[v])
                col[v] = area / cell_area
        if np.any(col):
            weights[u] = col
    return weights


def sample_tilde_m(
    field: NoiseField,
    loop: AdmissibleLoop,
    alpha: int,
    interval,
    sample_index: int = 0,
    cells: np.ndarray | None = None,
) -> np.ndarray:
    """Orientation-signed white-noise integral over the region between piece
    ``alpha`` (restricted to the x-window) and the x-axis.

    Left-moving pieces carry the sign -1, matching the direction convention of
    the covariance kernels.
    """
    if not loop.above_axis:
        raise McDomainError("translate loop above axis for MC")
    piece = loop.piece(alpha)
    if cells is None:
        cells = field.draw(sample_index)
    out = np.zeros(field.lie_dim)
    for u, col in _strip_weights(field, piece, interval).items():
        out += col @ cells[u]
    return out if piece.right_moving else -out


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int
    lattice_n: int
    n_rejected: int = 0
    flags: tuple = ()
    rng_id: str = RNG_ID


def _strand_plan(lat: Lattice, piece: HorizontalCurve):
    """Traversal-ordered shifted-interval indices and the tie index."""
    avail = lat.tilde_in(piece.x_lo, piece.x_hi)
    right = piece.right_moving
    if not avail:
        return [], None, right
    i_tie = max(avail) if right else min(avail)
    order = avail if right else avail[::-1]
    return order, i_tie, right


def _chain_transport(mats: np.ndarray, order, i_tie) -> np.ndarray:
    """Exact sum of the Stratonovich chain series on sampled increments.

    mats: (n_samples, n_intervals, d, d) in traversal order, already negated.
    B(i) = mats[i] @ (1 + sum of B(j) over admissible successors), accumulated
    with running parity prefix sums; the full series is 1 + sum of B over
    tie-parity tops.
    """
    ns, n_int, d, _ = mats.shape
    eye = np.broadcast_to(np.eye(d, dtype=complex), (ns, d, d))
    s_par = [np.zeros((ns, d, d), complex), np.zeros((ns, d, d), complex)]
    total = np.zeros((ns, d, d), complex)
    for pos, idx in enumerate(order):
        par = idx & 1
        b = mats[:, pos] @ (eye + s_par[1 - par])
        s_par[par] = s_par[par] + b
        if (idx - i_tie) % 2 == 0:
            total += b
    return eye + total


def mc_wilson(
    loop: AdmissibleLoop,
    rep: Representation,
    lam: float,
    N: int,
    n_samples: int,
    seed: int,
    chunk: int = 2048,
) -> McEstimate:
    """Monte Carlo estimate of the loop expectation at coupling ``lam``.

    Deterministic for fixed (seed, n_samples, N): sample i always draws from
    the Philox stream keyed (seed, i) and the reduction runs in index order.
    """
    if n_samples < 1:
        raise McDomainError("no samples requested")
    if lam <= 0:
        raise McDomainError("MC requires lambda > 0")
    if not loop.above_axis:
        raise McDomainError("translate loop above axis for MC")
    field = build_noise_field(loop, lam, N, seed, rep.lie_dim)
    lat = Lattice(N, loop.strip_length)
    basis = np.stack(rep.basis)  # (g, d, d)

    plans = []
    for alpha in range(1, loop.m + 1):
        piece = loop.piece(alpha)
        order, i_tie, right = _strand_plan(lat, piece)
        # every strip touches at most two noise columns: store compact weights
        n_j = len(order)
        col0 = np.zeros(n_j, dtype=int)
        w = np.zeros((n_j, 2, field.n_y))
        for pos, idx in enumerate(order):
            strip = _strip_weights(field, piece, lat.tilde_interval(idx))
            if not strip:
                continue
            base = min(strip)
            col0[pos] = base
            for u, col in strip.items():
                assert u - base in (0, 1)
                w[pos, u - base] = col
        sign = 1.0 if right else -1.0
        plans.append((order, i_tie, col0, sign * w))

    traces = np.empty(n_samples)
    d = rep.dim
    for start in range(0, n_samples, chunk):
        stop = min(start + chunk, n_samples)
        ns = stop - start
        cells = np.stack([field.draw(i) for i in range(start, stop)])
        prod = np.broadcast_to(np.eye(d, dtype=complex), (ns, d, d))
        for order, i_tie, col0, w in plans:
            if not len(order):
                continue
            gathered0 = cells[:, col0]  # (ns, n_j, n_y, g)
            gathered1 = cells[:, np.minimum(col0 + 1, field.n_x - 1)]
            vals = np.einsum("sjya,jy->sja", gathered0, w[:, 0])
            vals += np.einsum("sjya,jy->sja", gathered1, w[:, 1])
            mats = -np.einsum("sja,adc->sjdc", vals, basis)
            transport = _chain_transport(mats, order, i_tie)
            prod = transport @ prod  # later pieces multiply from the left
        traces[start:stop] = np.trace(prod, axis1=1, axis2=2).real
    mean = float(np.mean(traces))
    stderr = float(np.std(traces, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return McEstimate(
        mean=mean,
        stderr=stderr,
        n_samples=n_samples,
        seed=seed,
        lattice_n=N,
    )
