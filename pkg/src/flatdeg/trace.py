"""Triangulations of polygon surfaces and exact straight-line tracing.

Each polygon is cut into triangles by ear clipping. Triangle half-edge
``k`` runs from local vertex ``k`` to ``k+1``; its homology chain is written
in terms of the polygon edge classes of the surface, so traced paths can be
evaluated against cocycles of the polygon cell complex.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NotPeriodic
from .surface import Corner, Vec, ccw_from, cross, in_sector, vadd, vneg, vsub

EAST: Vec = (Fraction(1), Fraction(0))
WEST: Vec = (Fraction(-1), Fraction(0))
NORTH: Vec = (Fraction(0), Fraction(1))
SOUTH: Vec = (Fraction(0), Fraction(-1))


def _in_closed_triangle(q: Vec, a: Vec, b: Vec, c: Vec) -> bool:
    return cross(vsub(b, a), vsub(q, a)) >= 0 and cross(vsub(c, b), vsub(q, b)) >= 0 and cross(vsub(a, c), vsub(q, c)) >= 0


def ear_clip(poly: tuple[Vec, ...]) -> list[tuple[int, int, int]]:
    """Triangulate a simple counterclockwise polygon, allowing straight vertices."""
    idx = list(range(len(poly)))
    tris = []
    while len(idx) > 3:
        m = len(idx)
        for j in range(m):
            a, b, c = idx[(j - 1) % m], idx[j], idx[(j + 1) % m]
            if cross(vsub(poly[b], poly[a]), vsub(poly[c], poly[b])) <= 0:
                continue
            if any(
                _in_closed_triangle(poly[o], poly[a], poly[b], poly[c]) for o in idx if o not in (a, b, c)
            ):
                continue
            tris.append((a, b, c))
            del idx[j]
            break
        else:
            raise ValueError("ear clipping failed; polygon is not simple")
    tris.append(tuple(idx))
    return tris


def default_step_bound(surface) -> int:
    env = os.environ.get("FLATDEG_STEP_BOUND")
    if env:
        return int(env)
    den = 1
    for poly in surface.polygons:
        for x, y in poly:
            den = max(den, x.denominator, y.denominator)
    return 10 * max(1, len(surface.edge_classes)) * den * max(1, len(surface.polygons)) + 1000


@dataclass
class TraceResult:
    start: Corner
    arrival: Corner
    holonomy: Vec
    chain: dict[int, Fraction]
    segments: list[tuple[int, Vec, Vec]] = field(default_factory=list)


class Triangulation:
    def __init__(self, surface):
        self.surface = surface
        self.points: list[tuple[Vec, Vec, Vec]] = []
        self.poly_of: list[int] = []
        self.corner_vertex: list[tuple[int, int, int]] = []
        self.chain: dict[Corner, dict[int, Fraction]] = {}
        edge_owner: dict[Corner, Corner] = {}
        diag: dict[tuple[int, int, int], Corner] = {}
        for p, poly in enumerate(surface.polygons):
            n = len(poly)
            for a, b, c in ear_clip(poly):
                t = len(self.points)
                self.points.append((poly[a], poly[b], poly[c]))
                self.poly_of.append(p)
                self.corner_vertex.append(tuple(surface.vertex_of[(p, x)] for x in (a, b, c)))
                for k, (u, w) in enumerate(((a, b), (b, c), (c, a))):
                    if w == (u + 1) % n:
                        edge_owner[(p, u)] = (t, k)
                        ei, sg = surface.edge_index[(p, u)]
                        self.chain[(t, k)] = {ei: Fraction(sg)}
                    else:
                        diag[(p, u, w)] = (t, k)
                        ch: dict[int, Fraction] = {}
                        x = u
                        while x != w:
                            ei, sg = surface.edge_index[(p, x)]
                            ch[ei] = ch.get(ei, Fraction(0)) + sg
                            x = (x + 1) % n
                        self.chain[(t, k)] = {e: c for e, c in ch.items() if c != 0}
        self.glue: dict[Corner, Corner] = {}
        for (p, u), he in edge_owner.items():
            q, j = surface.partner[p][u]
            self.glue[he] = edge_owner[(q, j)]
        for (p, u, w), he in diag.items():
            self.glue[he] = diag[(p, w, u)]
        self.bound = default_step_bound(surface)
        self._rotation: dict[int, list[Corner]] = {}

    # geometry ----------------------------------------------------------
    def vec(self, t: int, k: int) -> Vec:
        pts = self.points[t]
        return vsub(pts[(k + 1) % 3], pts[k])

    def sector(self, c: Corner) -> tuple[Vec, Vec]:
        t, k = c
        return self.vec(t, k), vneg(self.vec(t, (k - 1) % 3))

    def contains(self, c: Corner, w: Vec) -> bool:
        a, b = self.sector(c)
        return in_sector(w, a, b)

    def ccw_next(self, c: Corner) -> Corner:
        t, k = c
        return self.glue[(t, (k - 1) % 3)]

    def vertex(self, c: Corner) -> int:
        return self.corner_vertex[c[0]][c[1]]

    def rotation(self, v: int) -> list[Corner]:
        """Triangle corners at a vertex class in counterclockwise order."""
        if v not in self._rotation:
            start = None
            for t in range(len(self.points)):
                for k in range(3):
                    if self.corner_vertex[t][k] == v:
                        start = (t, k)
                        break
                if start:
                    break
            cyc = [start]
            c = self.ccw_next(start)
            while c != start:
                cyc.append(c)
                c = self.ccw_next(c)
            self._rotation[v] = cyc
        return self._rotation[v]

    def outgoing(self, v: int, w: Vec) -> list[Corner]:
        return [c for c in self.rotation(v) if self.contains(c, w)]

    def position(self, c: Corner, w: Vec) -> tuple[int, Fraction]:
        """Sort key of the direction w (inside corner c) around its vertex."""
        v = self.vertex(c)
        return (self.rotation(v).index(c), ccw_from(self.sector(c)[0], w))

    def next_corner_with(self, v: int, after: tuple[int, Fraction], w: Vec) -> Corner:
        """First corner counterclockwise after a position whose sector holds w."""
        rot = self.rotation(v)
        i0, a0 = after
        for step in range(len(rot) + 1):
            i = (i0 + step) % len(rot)
            c = rot[i]
            if not self.contains(c, w):
                continue
            if step == 0 and ccw_from(self.sector(c)[0], w) <= a0:
                continue
            return c
        raise RuntimeError("direction not found around vertex")

    # tracing -------------------------------------------------------------
    def _path(self, t: int, p: int, q: int, chain: dict[int, Fraction]) -> None:
        if p == q:
            return
        if q == (p + 1) % 3:
            src, sg = self.chain[(t, p)], 1
        else:
            src, sg = self.chain[(t, q)], -1
        for e, c in src.items():
            chain[e] = chain.get(e, Fraction(0)) + sg * c

    def trace(self, start: Corner, w: Vec, bound: int | None = None, stop=None) -> TraceResult:
        """Follow the ray in direction w out of a corner until it meets a vertex.

        ``stop(t, a, b)`` may return a truthy value to end the walk early
        after the segment from a to b in triangle t; the returned value is
        stored on the result as ``stopped``.
        """
        bound = bound or self.bound
        t, k = start
        e = self.vec(t, k)
        if cross(e, w) == 0 and e[0] * w[0] + e[1] * w[1] > 0:
            pts = self.points[t]
            other = self.glue[(t, k)]
            q = self.points[other[0]]
            segs = [(t, pts[k], pts[(k + 1) % 3]), (other[0], q[(other[1] + 1) % 3], q[other[1]])]
            res = TraceResult(start, other, e, dict(self.chain[(t, k)]), segs)
            res.stopped = stop(t, pts[k], pts[(k + 1) % 3]) if stop else None
            return res
        chain: dict[int, Fraction] = {}
        segs = []
        hol = (Fraction(0), Fraction(0))
        x = self.points[t][k]
        slid = k
        skip = {k, (k - 1) % 3}  # edges through the starting point
        steps = 0
        while True:
            pts = self.points[t]
            best = None
            for j in range(3):
                if j in skip:
                    continue
                a, b = pts[j], pts[(j + 1) % 3]
                d = vsub(b, a)
                den = cross(w, d)
                if den == 0:
                    continue
                ax = vsub(a, x)
                s = cross(ax, d) / den
                r = cross(ax, w) / den
                if s <= 0 or r < 0 or r > 1:
                    continue
                if best is None or s < best[0]:
                    best = (s, j, r)
            if best is None:
                raise RuntimeError("ray left the triangle without crossing an edge")
            s, j, r = best
            y = vadd(x, (s * w[0], s * w[1]))
            segs.append((t, x, y))
            hol = vadd(hol, (s * w[0], s * w[1]))
            if stop:
                hit = stop(t, x, y)
                if hit:
                    res = TraceResult(start, None, hol, chain, segs)
                    res.stopped = hit
                    return res
            if r == 0 or r == 1:
                m = j if r == 0 else (j + 1) % 3
                self._path(t, slid, m, chain)
                res = TraceResult(start, (t, m), hol, {e: c for e, c in chain.items() if c != 0}, segs)
                res.stopped = None
                return res
            self._path(t, slid, j, chain)
            t2, j2 = self.glue[(t, j)]
            shift = vsub(self.points[t2][(j2 + 1) % 3], pts[j])
            x = vadd(y, shift)
            t, slid, skip = t2, (j2 + 1) % 3, {j2}
            steps += 1
            if steps > bound:
                raise NotPeriodic(f"ray did not reach a singularity within {bound} crossings")

    def chain_vector(self, chain: dict[int, Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * len(self.surface.edge_classes)
        for e, c in chain.items():
            out[e] += c
        return out
