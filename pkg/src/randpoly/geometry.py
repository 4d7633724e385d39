"""Convex polygon primitives: bodies, half-plane clipping, caps, and chord lengths.

All bodies are strictly convex polygons with counterclockwise vertex order.
Smooth shapes (disks, ellipses) are represented by fine regular polygons so
that a single exact clipping/area code path serves every body.

Direction conventions, used consistently across the package:

* ``d(theta) = (cos theta, sin theta)`` is the direction of a boundary line
  at angle ``theta``.
* ``n(theta) = (-sin theta, cos theta)`` is the left normal of that line.
* A cap at angle ``theta`` with offset ``c`` is the part of the body in the
  half-plane ``{x : x . n(theta) <= c}``; the rest of the body lies to the
  left of the directed boundary line.  Growing ``c`` grows the cap from the
  tangent point at angle ``theta`` to the whole body.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BodySpec",
    "Cap",
    "ConvexBody",
    "HalfPlane",
    "apply_affine",
    "cap_by_area",
    "cap_by_point",
    "cap_intersection_area",
    "chord_length",
    "chord_profile",
    "clip",
    "convex_hull_vertices",
    "make_body",
    "map_angle",
    "support_vertex",
]

TAU = 2.0 * math.pi

# Per-body cap on memoized chord profiles, in bytes of array payload.
_PROFILE_CACHE_BYTES = 8 << 20


def direction(theta: float) -> np.ndarray:
    """Unit vector of a boundary line at angle ``theta``."""
    return np.array([math.cos(theta), math.sin(theta)])


def left_normal(theta: float) -> np.ndarray:
    """Left normal of a boundary line at angle ``theta``."""
    return np.array([-math.sin(theta), math.cos(theta)])


def wrap_angle(theta: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    t = math.fmod(theta, TAU)
    if t < 0.0:
        t += TAU
    return 0.0 if t == TAU else t


def polygon_area(vertices: np.ndarray) -> float:
    """Signed shoelace area; positive for counterclockwise order."""
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


class ConvexBody:
    """A bounded, strictly convex polygon with counterclockwise vertices.

    Vertices are stored as an immutable ``(n, 2)`` float array.  ``area`` is
    cached at construction; ``edge_angles`` (directed edge angles in
    [0, 2*pi)) are computed lazily because intermediate clip results rarely
    need them.
    """

    def __init__(self, vertices: np.ndarray, _validate: bool = True):
        v = np.ascontiguousarray(np.asarray(vertices, dtype=float))
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("a convex body needs at least 3 planar vertices")
        if _validate:
            v = _canonical_vertices(v)
        v.flags.writeable = False
        self.vertices = v
        self.area = polygon_area(v)
        if self.area <= 0.0:
            raise ValueError("vertices must be counterclockwise with positive area")
        self._profile_cache: dict[float, ChordProfile] = {}

    @property
    def edge_angles(self) -> np.ndarray:
        """Directed angle of each edge (v[i] -> v[i+1]) in [0, 2*pi)."""
        cached = getattr(self, "_edge_angles", None)
        if cached is None:
            e = np.roll(self.vertices, -1, axis=0) - self.vertices
            cached = np.mod(np.arctan2(e[:, 1], e[:, 0]), TAU)
            self._edge_angles = cached
        return cached

    @property
    def scale(self) -> float:
        """Bounding-box diagonal, used for relative tolerances."""
        cached = getattr(self, "_scale", None)
        if cached is None:
            span = self.vertices.max(axis=0) - self.vertices.min(axis=0)
            cached = self._scale = float(math.hypot(span[0], span[1]))
        return cached

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cross = v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]
        return (v + w).T @ cross / (6.0 * self.area)

    def contains(self, point, tol: float | None = None) -> bool:
        """Whether ``point`` is in the body, up to a boundary tolerance."""
        if tol is None:
            tol = 1e-9 * self.scale
        p = np.asarray(point, dtype=float)
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        r = p - v
        cross = e[:, 0] * r[:, 1] - e[:, 1] * r[:, 0]
        lengths = np.hypot(e[:, 0], e[:, 1])
        return bool(np.all(cross >= -tol * lengths))

    def to_json(self) -> list[list[float]]:
        return self.vertices.tolist()

    def __repr__(self) -> str:  # pragma: no cover
        return f"ConvexBody({len(self.vertices)} vertices, area={self.area:.6g})"


def _canonical_vertices(v: np.ndarray) -> np.ndarray:
    """Drop duplicate and collinear consecutive vertices; enforce strict convexity."""
    scale = float(np.max(np.abs(v))) + 1e-300
    keep = np.ones(len(v), dtype=bool)
    nxt = np.roll(v, -1, axis=0)
    dup = np.hypot(*(nxt - v).T) <= 1e-14 * scale
    keep &= ~dup
    v = v[keep]
    if len(v) < 3:
        raise ValueError("degenerate polygon after removing duplicate vertices")
    prv = np.roll(v, 1, axis=0)
    nxt = np.roll(v, -1, axis=0)
    e0 = v - prv
    e1 = nxt - v
    cross = e0[:, 0] * e1[:, 1] - e0[:, 1] * e1[:, 0]
    flat = cross <= 1e-24 * scale * scale
    if np.any(flat):
        v = v[~flat]
        if len(v) < 3:
            raise ValueError("degenerate polygon after removing collinear vertices")
        prv = np.roll(v, 1, axis=0)
        nxt = np.roll(v, -1, axis=0)
        e0 = v - prv
        e1 = nxt - v
        cross = e0[:, 0] * e1[:, 1] - e0[:, 1] * e1[:, 0]
        if np.any(cross <= 0.0):
            raise ValueError("vertices are not in strictly convex ccw position")
    elif np.any(cross <= 0.0):
        raise ValueError("vertices are not in strictly convex ccw position")
    return v


@dataclass(frozen=True)
class HalfPlane:
    """Half-plane ``{x : x . n(angle) <= offset}`` bounded by a line at ``angle``."""

    angle: float
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "angle", wrap_angle(self.angle))

    def flipped(self) -> "HalfPlane":
        """The complementary half-plane (same boundary line, other side)."""
        return HalfPlane(self.angle + math.pi, -self.offset)


@dataclass(frozen=True)
class Cap:
    """A cap of a body: the part behind a boundary line at a given angle."""

    halfplane: HalfPlane
    chord: tuple[np.ndarray, np.ndarray]
    cap_area: float
    body: ConvexBody = field(repr=False)

    @property
    def chord_length(self) -> float:
        a, b = self.chord
        return float(math.hypot(b[0] - a[0], b[1] - a[1]))


@dataclass(frozen=True)
class BodySpec:
    """Shape recipe: ``kind`` plus named numeric parameters.

    String grammar (also used on the command line):
    ``kind:key=value,key=value`` with kinds ``square`` (side or area),
    ``ngon`` (k, area), ``disk`` (area, k), ``ellipse`` (area, ratio, k),
    ``triangle`` (legs, or area for a canonical scalene shape) and
    ``random`` (k, seed, area).
    """

    kind: str
    params: dict

    @classmethod
    def from_string(cls, text: str) -> "BodySpec":
        text = text.strip()
        kind, _, rest = text.partition(":")
        kind = kind.strip().lower()
        params: dict = {}
        if rest.strip():
            for item in rest.split(","):
                key, sep, value = item.partition("=")
                if not sep:
                    raise ValueError(f"malformed body parameter {item!r}")
                key = key.strip()
                try:
                    num = float(value)
                except ValueError as exc:
                    raise ValueError(f"body parameter {key!r} is not numeric") from exc
                if key in ("k", "seed"):
                    num = int(num)
                params[key] = num
        return cls(kind, params)

    def to_string(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}:{inner}" if inner else self.kind


_SCALENE = np.array([[0.0, 0.0], [2.0, 0.0], [0.6, 1.4]])


def make_body(spec: BodySpec | str) -> ConvexBody:
    """Build a strictly convex ccw polygon of exactly the requested area."""
    if isinstance(spec, str):
        spec = BodySpec.from_string(spec)
    kind = spec.kind
    p = dict(spec.params)

    if kind == "square":
        side = p.get("side")
        if side is None:
            area = _positive(p, "area")
            side = math.sqrt(area)
        elif side <= 0:
            raise ValueError("square side must be positive")
        v = np.array([[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]])
        return ConvexBody(v)

    if kind in ("ngon", "disk", "ellipse"):
        k = int(p.get("k", 4096))
        if k < 3:
            raise ValueError("polygon vertex count k must be at least 3")
        area = _positive(p, "area")
        # Regular k-gon whose polygon area is exactly the target.
        radius = math.sqrt(2.0 * area / (k * math.sin(TAU / k)))
        angles = TAU * np.arange(k) / k
        v = radius * np.column_stack([np.cos(angles), np.sin(angles)])
        if kind == "ellipse":
            ratio = p.get("ratio", 2.0)
            if ratio <= 0:
                raise ValueError("ellipse axis ratio must be positive")
            s = math.sqrt(ratio)
            v = v * np.array([s, 1.0 / s])  # unimodular stretch keeps the area
        return ConvexBody(v)

    if kind == "triangle":
        legs = p.get("legs")
        if legs is not None:
            if legs <= 0:
                raise ValueError("triangle legs must be positive")
            v = np.array([[0.0, 0.0], [legs, 0.0], [0.0, legs]])
            return ConvexBody(v)
        area = _positive(p, "area")
        v = _SCALENE * math.sqrt(area / polygon_area(_SCALENE))
        return ConvexBody(v)

    if kind == "random":
        if "seed" not in p:
            raise ValueError("random body needs an explicit seed")
        k = int(p.get("k", 12))
        if k < 3:
            raise ValueError("random body needs k >= 3 sample points")
        area = _positive(p, "area")
        rng = np.random.default_rng(int(p["seed"]))
        pts = rng.random((k, 2))
        hull = convex_hull_vertices(pts)
        if len(hull) < 3:
            raise ValueError("random points produced a degenerate hull")
        body = ConvexBody(hull)
        c = body.centroid
        v = (hull - c) * math.sqrt(area / body.area) + c
        return ConvexBody(v)

    raise ValueError(f"unknown body kind {kind!r}")


def _positive(params: dict, key: str) -> float:
    value = params.get(key)
    if value is None:
        raise ValueError(f"missing body parameter {key!r}")
    if value <= 0:
        raise ValueError(f"body parameter {key!r} must be positive")
    return float(value)


def convex_hull_vertices(points: np.ndarray) -> np.ndarray:
    """Strictly convex hull by the sort-based monotone chain.

    Points are ordered lexicographically (x, then y); collinear boundary
    points are dropped, so every returned vertex is an extreme point.
    Returns a ccw array with fewer than 3 rows when the input is degenerate.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return pts.reshape(0, 2)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.diff(pts, axis=0) != 0.0, axis=1)
    pts = pts[keep]
    n = len(pts)
    if n == 1:
        return pts.copy()
    if n == 2:
        return pts.copy()

    def half(seq):
        out = []
        for px, py in seq:
            while len(out) > 1:
                ax, ay = out[-2]
                bx, by = out[-1]
                if (bx - ax) * (py - ay) - (by - ay) * (px - ax) <= 0.0:
                    out.pop()
                else:
                    break
            out.append((px, py))
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    return np.array(hull)


def clip(body: ConvexBody, half: HalfPlane) -> ConvexBody | None:
    """Intersect a body with a half-plane.

    Returns the clipped convex polygon, the body itself when it is entirely
    inside, or ``None`` when the intersection is empty or has zero area.
    """
    v = body.vertices
    n = left_normal(half.angle)
    w = v @ n
    inside = w <= half.offset
    count = int(inside.sum())
    if count == len(v):
        return body
    if count == 0:
        return None

    nxt_inside = np.roll(inside, -1)
    crossing = inside != nxt_inside
    w_next = np.roll(w, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (half.offset - w) / (w_next - w)
    nxt = np.roll(v, -1, axis=0)
    cuts = v + (nxt - v) * t[:, None]

    slots = inside.astype(np.intp) + crossing.astype(np.intp)
    pos = np.zeros(len(v) + 1, dtype=np.intp)
    np.cumsum(slots, out=pos[1:])
    out = np.empty((pos[-1], 2))
    out[pos[:-1][inside]] = v[inside]
    out[pos[:-1][crossing] + inside[crossing]] = cuts[crossing]
    try:
        return ConvexBody(out)
    except ValueError:
        return None  # sliver of zero area


class ChordProfile:
    """Height profile of a body along the left normal of a direction.

    Projecting the body onto ``n(theta)`` gives, for each height ``t``, the
    chord ``{x in K : x . n(theta) = t}``.  For a polygon the chord length is
    piecewise linear in ``t`` and the cap area is piecewise quadratic, both
    with breakpoints at vertex heights, so caps by area or by point reduce to
    exact local quadratic algebra instead of iterative root-finding.
    """

    __slots__ = (
        "theta", "d", "n", "heights", "chords", "areas", "total_area",
        "_right_w", "_right_u", "_right_idx", "_left_w", "_left_u", "_left_idx",
    )

    def __init__(self, body: ConvexBody, theta: float):
        self.theta = theta
        self.d = direction(theta)
        self.n = left_normal(theta)
        v = body.vertices
        u = v @ self.d
        w = v @ self.n
        m = len(v)

        wmin = w.min()
        wmax = w.max()
        bottom = np.flatnonzero(w == wmin)
        top = np.flatnonzero(w == wmax)
        i_br = bottom[np.argmax(u[bottom])]
        i_bl = bottom[np.argmin(u[bottom])]
        i_tr = top[np.argmax(u[top])]
        i_tl = top[np.argmin(u[top])]

        # ccw from the bottom-right vertex ascends the right side of the body.
        self._right_idx = _ccw_range(i_br, i_tr, m)
        # cw from the bottom-left vertex ascends the left side.
        self._left_idx = _ccw_range(i_tl, i_bl, m)[::-1]
        self._right_w = w[self._right_idx]
        self._right_u = u[self._right_idx]
        self._left_w = w[self._left_idx]
        self._left_u = u[self._left_idx]

        ts = np.unique(w)
        ur = np.interp(ts, self._right_w, self._right_u)
        ul = np.interp(ts, self._left_w, self._left_u)
        chords = np.maximum(ur - ul, 0.0)
        self.heights = ts
        self.chords = chords
        areas = np.empty_like(ts)
        areas[0] = 0.0
        np.cumsum(np.diff(ts) * (chords[:-1] + chords[1:]) * 0.5, out=areas[1:])
        self.areas = areas
        self.total_area = float(areas[-1])

    # -- scalar/vector queries -------------------------------------------

    def area_at_offset(self, t):
        """Cap area at offset ``t`` (piecewise quadratic, exact)."""
        t = np.clip(t, self.heights[0], self.heights[-1])
        i = np.clip(np.searchsorted(self.heights, t, side="right") - 1,
                    0, len(self.heights) - 2)
        dt = self.heights[i + 1] - self.heights[i]
        slope = (self.chords[i + 1] - self.chords[i]) / dt
        s = t - self.heights[i]
        return self.areas[i] + s * (self.chords[i] + 0.5 * slope * s)

    def offset_at_area(self, r):
        """Offset of the cap with area ``r`` (inverse of ``area_at_offset``)."""
        r = np.clip(r, 0.0, self.total_area)
        i = np.clip(np.searchsorted(self.areas, r, side="right") - 1,
                    0, len(self.heights) - 2)
        dt = self.heights[i + 1] - self.heights[i]
        slope = (self.chords[i + 1] - self.chords[i]) / dt
        da = r - self.areas[i]
        disc = np.sqrt(np.maximum(self.chords[i] ** 2 + 2.0 * slope * da, 0.0))
        denom = self.chords[i] + disc
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(denom > 0.0, 2.0 * da / denom, 0.0)
        return self.heights[i] + np.minimum(s, dt)

    def chord_at_offset(self, t):
        return np.interp(t, self.heights, self.chords)

    def chord_at_area(self, r):
        """Chord length of the cap with area ``r``."""
        r = np.clip(r, 0.0, self.total_area)
        i = np.clip(np.searchsorted(self.areas, r, side="right") - 1,
                    0, len(self.heights) - 2)
        dt = self.heights[i + 1] - self.heights[i]
        slope = (self.chords[i + 1] - self.chords[i]) / dt
        da = r - self.areas[i]
        return np.sqrt(np.maximum(self.chords[i] ** 2 + 2.0 * slope * da, 0.0))

    def chord_endpoints(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Endpoints of the chord at offset ``t``, left to right along d."""
        ul = float(np.interp(t, self._left_w, self._left_u))
        ur = float(np.interp(t, self._right_w, self._right_u))
        return ul * self.d + t * self.n, ur * self.d + t * self.n

    def exit_along_direction(self, point) -> tuple[np.ndarray, int]:
        """Where the forward ray from ``point`` along ``d`` leaves the body.

        Returns the exit point and the index (into the body's vertex array)
        of the edge containing it.
        """
        p = np.asarray(point, dtype=float)
        t = float(p @ self.n)
        t = min(max(t, self._right_w[0]), self._right_w[-1])
        j = int(np.clip(np.searchsorted(self._right_w, t, side="right") - 1,
                        0, len(self._right_w) - 2))
        w0, w1 = self._right_w[j], self._right_w[j + 1]
        frac = 0.0 if w1 == w0 else (t - w0) / (w1 - w0)
        ur = self._right_u[j] + frac * (self._right_u[j + 1] - self._right_u[j])
        return ur * self.d + t * self.n, int(self._right_idx[j])


def _ccw_range(start: int, stop: int, m: int) -> np.ndarray:
    """Vertex indices from ``start`` to ``stop`` inclusive, walking ccw."""
    if stop >= start:
        return np.arange(start, stop + 1)
    return np.concatenate([np.arange(start, m), np.arange(0, stop + 1)])


def chord_profile(body: ConvexBody, theta: float) -> ChordProfile:
    """Memoized ``ChordProfile`` for a body and angle."""
    cache = body._profile_cache
    prof = cache.get(theta)
    if prof is None:
        prof = ChordProfile(body, theta)
        if len(cache) * len(body.vertices) * 48 < _PROFILE_CACHE_BYTES:
            cache[theta] = prof
    return prof


def support_vertex(body: ConvexBody, theta: float) -> np.ndarray:
    """Vertex touched by the directed tangent line at ``theta`` (body on its left).

    Equivalently the vertex minimizing ``x . n(theta)``.  When the tangent
    line contains a whole edge, the endpoint further along the direction
    ``d(theta)`` is returned.
    """
    v = body.vertices
    w = v @ left_normal(theta)
    wmin = w.min()
    cand = np.flatnonzero(w <= wmin + 1e-12 * body.scale)
    u = v[cand] @ direction(theta)
    return v[cand[np.argmax(u)]].copy()


def cap_by_point(body: ConvexBody, point, theta: float) -> Cap:
    """Cap whose boundary line passes through ``point`` at angle ``theta``.

    The cap is the side of the line that shrinks onto the tangent point
    ``support_vertex(body, theta)`` as the point moves toward it; its area is
    the quantity usually denoted by the cap-area function of (point, angle).
    """
    p = np.asarray(point, dtype=float)
    if not body.contains(p):
        raise ValueError("cap point lies outside the body")
    prof = chord_profile(body, theta)
    offset = float(p @ prof.n)
    offset = min(max(offset, prof.heights[0]), prof.heights[-1])
    r = float(prof.area_at_offset(offset))
    return Cap(HalfPlane(theta, offset), prof.chord_endpoints(offset), r, body)


def cap_by_area(body: ConvexBody, r: float, theta: float) -> Cap:
    """Cap at angle ``theta`` with prescribed area ``r`` (0 < r <= area).

    The cap area is continuous and strictly increasing in the line offset,
    and for a polygon it is piecewise quadratic, so the offset is solved
    exactly segment by segment.
    """
    if not 0.0 < r <= body.area * (1.0 + 1e-12):
        raise ValueError("cap area must lie in (0, area(body)]")
    prof = chord_profile(body, theta)
    offset = float(prof.offset_at_area(min(r, prof.total_area)))
    return Cap(HalfPlane(theta, offset), prof.chord_endpoints(offset), r, body)


def chord_length(body: ConvexBody, x: float, theta: float) -> float:
    """Chord length of the cap of area ``log(1/x)`` at angle ``theta``.

    Defined on (0, 1]; returns 0 when ``x <= exp(-area)`` (the cap would be
    the whole body) and 0 at ``x = 1`` (the cap shrinks to a point).
    """
    if not 0.0 < x <= 1.0:
        raise ValueError("x must lie in (0, 1]")
    if x == 1.0:
        return 0.0
    if x <= math.exp(-body.area):
        return 0.0
    r = -math.log(x)
    return float(chord_profile(body, theta).chord_at_area(r))


def cap_intersection_area(body: ConvexBody, c1: Cap, c2: Cap) -> float:
    """Area of the intersection of two caps of the same body."""
    if c1.body is not body or c2.body is not body:
        raise ValueError("caps belong to a different body")
    first = clip(body, c1.halfplane)
    if first is None:
        return 0.0
    second = clip(first, c2.halfplane)
    return 0.0 if second is None else second.area


def apply_affine(body: ConvexBody, matrix, shift=(0.0, 0.0)) -> ConvexBody:
    """Apply an area-preserving affine map (unimodular matrix plus shift)."""
    m = np.asarray(matrix, dtype=float)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det - 1.0) > 1e-12:
        raise ValueError("matrix must be unimodular (det 1)")
    v = body.vertices @ m.T + np.asarray(shift, dtype=float)
    return ConvexBody(v)


def map_angle(matrix, theta: float) -> float:
    """Angle of the image of the direction ``d(theta)`` under ``matrix``.

    This is the induced action on boundary-line directions used when
    comparing direction measures of a body and its affine image.
    """
    m = np.asarray(matrix, dtype=float)
    d = m @ direction(theta)
    return wrap_angle(math.atan2(d[1], d[0]))
