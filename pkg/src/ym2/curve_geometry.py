"""Closed loops on the plane as horizontal polyline pieces with implicit vertical joins.

A horizontal piece is the graph of a piecewise-linear function over an x-range,
traversed either rightward or leftward.  A loop is an ordered list of such
pieces whose endpoints match in x (consecutive pieces are joined by vertical
segments, which transport trivially in axial gauges and carry no data).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import LoopError, NotSimpleLoopError

__all__ = [
    "HorizontalCurve",
    "AdmissibleLoop",
    "build_loop",
    "direction_sign",
    "enclosed_area",
]

_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class HorizontalCurve:
    """Graph piece x -> (x, height(x)) traversed in vertex order.

    vertices: tuple of (x, y), x strictly monotone (increasing = right-moving).
    """

    vertices: tuple

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise LoopError("horizontal curve needs at least two vertices")
        xs = [v[0] for v in self.vertices]
        dxs = np.diff(xs)
        if not (np.all(dxs > 0) or np.all(dxs < 0)):
            raise LoopError("vertex x-coordinates must be strictly monotone")

    @property
    def right_moving(self) -> bool:
        return self.vertices[1][0] > self.vertices[0][0]

    @property
    def x_minus(self) -> float:
        """Initial x-coordinate (larger than x_plus for a left-moving piece)."""
        return self.vertices[0][0]

    @property
    def x_plus(self) -> float:
        return self.vertices[-1][0]

    @property
    def x_lo(self) -> float:
        return min(self.x_minus, self.x_plus)

    @property
    def x_hi(self) -> float:
        return max(self.x_minus, self.x_plus)

    def _sorted_xy(self):
        vs = self.vertices if self.right_moving else self.vertices[::-1]
        return np.array([v[0] for v in vs]), np.array([v[1] for v in vs])

    def height(self, x):
        """Piecewise-linear interpolant on [x_lo, x_hi]."""
        xs, ys = self._sorted_xy()
        return np.interp(x, xs, ys)

    def breakpoints(self):
        """Ascending x-coordinates of the polyline vertices."""
        xs, _ = self._sorted_xy()
        return xs

    def linear_pieces(self):
        """Yield (x0, x1, a, b) with height(x) = a + b*x on [x0, x1]."""
        xs, ys = self._sorted_xy()
        for i in range(len(xs) - 1):
            x0, x1 = float(xs[i]), float(xs[i + 1])
            b = (ys[i + 1] - ys[i]) / (x1 - x0)
            a = ys[i] - b * x0
            yield x0, x1, float(a), float(b)

    def translated(self, dx=0.0, dy=0.0) -> "HorizontalCurve":
        return HorizontalCurve(tuple((x + dx, y + dy) for x, y in self.vertices))

    @property
    def y_min(self) -> float:
        return min(v[1] for v in self.vertices)

    @property
    def y_max(self) -> float:
        return max(v[1] for v in self.vertices)


@dataclass(frozen=True)
class AdmissibleLoop:
    """Closed admissible loop: ordered horizontal pieces, vertical joins implicit.

    Construction translates the loop in x so its support starts at 0; the
    y-coordinates are kept as given (complete axial gauge is y-dependent).
    """

    pieces: tuple
    strip_length: float

    @property
    def m(self) -> int:
        return len(self.pieces)

    def piece(self, alpha: int) -> HorizontalCurve:
        """1-based piece accessor (curve indices follow loop order 1..m)."""
        if not 1 <= alpha <= self.m:
            raise IndexError(f"piece index {alpha} out of range 1..{self.m}")
        return self.pieces[alpha - 1]

    @property
    def y_min(self) -> float:
        return min(p.y_min for p in self.pieces)

    @property
    def y_max(self) -> float:
        return max(p.y_max for p in self.pieces)

    @property
    def above_axis(self) -> bool:
        return self.y_min >= 0.0

    @property
    def crosses_axis(self) -> bool:
        return self.y_min < 0.0 < self.y_max

    def translated(self, dy: float) -> "AdmissibleLoop":
        return AdmissibleLoop(
            tuple(p.translated(dy=dy) for p in self.pieces), self.strip_length
        )

    def polygon(self):
        """Vertex cycle of the full boundary; vertical joins appear as the jumps
        between consecutive pieces' endpoints."""
        verts = []
        for p in self.pieces:
            verts.extend(p.vertices)
        return verts


def build_loop(pieces) -> AdmissibleLoop:
    """Validate matching conditions and normalize the x-support to [0, L].

    pieces: iterable of HorizontalCurve or of vertex lists [[x, y], ...].
    """
    curves = []
    for p in pieces:
        if isinstance(p, HorizontalCurve):
            curves.append(p)
        else:
            curves.append(HorizontalCurve(tuple((float(x), float(y)) for x, y in p)))
    if not curves:
        raise LoopError("loop needs at least one piece")
    m = len(curves)
    for a in range(m):
        b = (a + 1) % m
        gap = abs(curves[a].x_plus - curves[b].x_minus)
        if gap > _MATCH_TOL:
            raise LoopError(
                "loop not closed up to vertical segments: "
                f"piece {a + 1} ends at x={curves[a].x_plus}, "
                f"piece {b + 1} starts at x={curves[b].x_minus}"
            )
    x0 = min(c.x_lo for c in curves)
    if x0 != 0.0:
        curves = [c.translated(dx=-x0) for c in curves]
    length = max(c.x_hi for c in curves)
    return AdmissibleLoop(tuple(curves), float(length))


def direction_sign(loop: AdmissibleLoop, alpha: int, beta: int) -> int:
    """+1 if pieces alpha and beta traverse x in the same direction, else -1."""
    return 1 if loop.piece(alpha).right_moving == loop.piece(beta).right_moving else -1


def _orient(p, q, r):
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r):
    return (
        min(p[0], q[0]) - 1e-15 <= r[0] <= max(p[0], q[0]) + 1e-15
        and min(p[1], q[1]) - 1e-15 <= r[1] <= max(p[1], q[1]) + 1e-15
    )


def _segments_intersect(a, b, c, d):
    """Proper or improper intersection of closed segments ab and cd."""
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0) and o1 * o2 != 0) and ((o3 > 0) != (o4 > 0) and o3 * o4 != 0):
        return True
    if o1 == 0 and _on_segment(a, b, c):
        return True
    if o2 == 0 and _on_segment(a, b, d):
        return True
    if o3 == 0 and _on_segment(c, d, a):
        return True
    if o4 == 0 and _on_segment(c, d, b):
        return True
    return False


def _boundary_edges(loop):
    verts = loop.polygon()
    n = len(verts)
    edges = []
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        if a != b:  # zero-length joins (matching heights) carry nothing
            edges.append((a, b))
    return edges


def _edges_double_back(a, b, d):
    """Edges a->b and b->d overlap collinearly beyond their shared endpoint."""
    if _orient(a, b, d) != 0:
        return False
    return (a[0] - b[0]) * (d[0] - b[0]) + (a[1] - b[1]) * (d[1] - b[1]) > 0


def _is_simple(loop):
    edges = _boundary_edges(loop)
    n = len(edges)
    for i, j in itertools.combinations(range(n), 2):
        a, b = edges[i]
        c, d = edges[j]
        if b == c and d == a and n > 2:
            return False  # the two edges retrace each other
        if b == c:
            if _edges_double_back(a, b, d):
                return False
            continue
        if d == a:
            if _edges_double_back(c, d, b):
                return False
            continue
        if _segments_intersect(a, b, c, d):
            return False
    return True


def enclosed_area(loop: AdmissibleLoop) -> float:
    """Area |R| of the region enclosed by a simple loop (shoelace formula).

    Raises NotSimpleLoopError for self-intersecting loops; those have no exact
    heat-kernel reference here.
    """
    if not _is_simple(loop):
        raise NotSimpleLoopError("not simple: loop boundary self-intersects")
    verts = loop.polygon()
    n = len(verts)
    acc = 0.0
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return abs(acc) / 2.0
