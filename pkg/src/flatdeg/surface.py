"""Translation and half-translation surfaces presented by rational polygons.

A surface is a tuple of counterclockwise polygons together with a perfect
matching of their edges. Edge ``i`` of a polygon runs from vertex ``i`` to
vertex ``i+1``. Every polygon vertex is a point of the distinguished set
(zeros plus marked points), so regular vertex classes are always marked.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    AlreadyOrientable,
    AngleError,
    DegenerateMatrix,
    GluingMismatch,
    InvalidPolygon,
    NotConnected,
)

Vec = tuple[Fraction, Fraction]
Corner = tuple[int, int]


def vec(x, y) -> Vec:
    return (Fraction(x), Fraction(y))


def vsub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def vadd(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1])


def vneg(a: Vec) -> Vec:
    return (-a[0], -a[1])


def vscale(c, a: Vec) -> Vec:
    return (c * a[0], c * a[1])


def cross(a: Vec, b: Vec) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


def vdot(a: Vec, b: Vec) -> Fraction:
    return a[0] * b[0] + a[1] * b[1]


def pseudo_angle(v: Vec) -> Fraction:
    """Exact monotone substitute for the argument of v, valued in [0, 4)."""
    x, y = v
    if x == 0 and y == 0:
        raise ValueError("zero vector has no direction")
    if y >= 0:
        if x > 0:
            return y / (x + y)
        return 1 - x / (-x + y)
    if x < 0:
        return 2 + (-y) / (-x - y)
    return 3 + x / (x - y)


def ccw_from(a: Vec, w: Vec) -> Fraction:
    """Pseudo-angle of w measured counterclockwise from a, in [0, 4)."""
    d = pseudo_angle(w) - pseudo_angle(a)
    return d + 4 if d < 0 else d


def in_sector(w: Vec, start: Vec, stop: Vec) -> bool:
    """Whether w lies in the half-open counterclockwise sector [start, stop)."""
    return ccw_from(start, w) < ccw_from(start, stop)


def polygon_area(poly: Sequence[Vec]) -> Fraction:
    n = len(poly)
    return sum((cross(poly[i], poly[(i + 1) % n]) for i in range(n)), Fraction(0)) / 2


def _segments_meet(p1: Vec, p2: Vec, q1: Vec, q2: Vec) -> bool:
    d1 = cross(vsub(p2, p1), vsub(q1, p1))
    d2 = cross(vsub(p2, p1), vsub(q2, p1))
    d3 = cross(vsub(q2, q1), vsub(p1, q1))
    d4 = cross(vsub(q2, q1), vsub(p2, q1))
    if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
        return True

    def on(a, b, c):
        return cross(vsub(b, a), vsub(c, a)) == 0 and min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(
            a[1], b[1]
        ) <= c[1] <= max(a[1], b[1])

    return on(p1, p2, q1) or on(p1, p2, q2) or on(q1, q2, p1) or on(q1, q2, p2)


def check_polygon(poly: Sequence[Vec], pid) -> None:
    n = len(poly)
    if n < 3:
        raise InvalidPolygon(f"polygon {pid} has fewer than 3 vertices")
    for i in range(n):
        if poly[i] == poly[(i + 1) % n]:
            raise InvalidPolygon(f"polygon {pid} has a zero-length edge {i}")
    if polygon_area(poly) <= 0:
        raise InvalidPolygon(f"polygon {pid} is not counterclockwise")
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                a, b = (i, j) if j == i + 1 else (j, i)
                # adjacent edges: only the shared vertex, no backtracking
                e1 = vsub(poly[(a + 1) % n], poly[a])
                e2 = vsub(poly[(b + 1) % n], poly[b])
                if cross(e1, e2) == 0 and vdot(e1, e2) < 0:
                    raise InvalidPolygon(f"polygon {pid} folds back at vertex {b}")
                continue
            if _segments_meet(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]):
                raise InvalidPolygon(f"polygon {pid} is not simple (edges {i} and {j})")


class _PolygonSurface:
    """Shared combinatorics of polygon surfaces; subclasses fix the gluing rule."""

    polygons: tuple[tuple[Vec, ...], ...]
    partner: tuple[tuple[Corner, ...], ...]
    names: tuple[str, ...]
    poly_component: tuple[int, ...]

    def edge_vector(self, p: int, i: int) -> Vec:
        poly = self.polygons[p]
        return vsub(poly[(i + 1) % len(poly)], poly[i])

    def half_edges(self) -> list[Corner]:
        return [(p, i) for p, poly in enumerate(self.polygons) for i in range(len(poly))]

    def ccw_next(self, c: Corner) -> Corner:
        """The corner met next when turning counterclockwise around a vertex."""
        p, i = c
        n = len(self.polygons[p])
        return self.partner[p][(i - 1) % n]

    @cached_property
    def corner_cycles(self) -> tuple[tuple[Corner, ...], ...]:
        seen = set()
        cycles = []
        for c in self.half_edges():
            if c in seen:
                continue
            cyc = []
            d = c
            while d not in seen:
                seen.add(d)
                cyc.append(d)
                d = self.ccw_next(d)
            cycles.append(tuple(cyc))
        return tuple(cycles)

    @cached_property
    def vertex_of(self) -> dict[Corner, int]:
        return {c: k for k, cyc in enumerate(self.corner_cycles) for c in cyc}

    @property
    def n_vertices(self) -> int:
        return len(self.corner_cycles)

    @cached_property
    def edge_classes(self) -> tuple[Corner, ...]:
        """One representative half-edge per glued pair (the smaller one)."""
        return tuple(c for c in self.half_edges() if c <= self.partner[c[0]][c[1]])

    @cached_property
    def edge_index(self) -> dict[Corner, tuple[int, int]]:
        """half-edge -> (edge class index, orientation sign)."""
        out = {}
        for k, c in enumerate(self.edge_classes):
            out[c] = (k, 1)
            out[self.partner[c[0]][c[1]]] = (k, -1)
        return out

    @property
    def n_components(self) -> int:
        return len(self.names)

    def component_polygons(self, comp: int) -> list[int]:
        return [p for p, c in enumerate(self.poly_component) if c == comp]

    def vertex_component(self, v: int) -> int:
        return self.poly_component[self.corner_cycles[v][0][0]]

    def corner_angle_halfturns(self, c: Corner) -> int:
        """Number of east or west rays inside the corner sector."""
        p, i = c
        n = len(self.polygons[p])
        out = self.edge_vector(p, i)
        back = vneg(self.edge_vector(p, (i - 1) % n))
        return int(in_sector((Fraction(1), Fraction(0)), out, back)) + int(
            in_sector((Fraction(-1), Fraction(0)), out, back)
        )

    def vertex_halfturns(self, v: int) -> int:
        """Total cone angle at a vertex class in units of pi."""
        return sum(self.corner_angle_halfturns(c) for c in self.corner_cycles[v])

    def area(self) -> list[Fraction]:
        out = [Fraction(0)] * self.n_components
        for p, poly in enumerate(self.polygons):
            out[self.poly_component[p]] += polygon_area(poly)
        return out

    def euler_characteristic(self) -> list[int]:
        chi = [0] * self.n_components
        for v in range(self.n_vertices):
            chi[self.vertex_component(v)] += 1
        for c in self.edge_classes:
            chi[self.poly_component[c[0]]] -= 1
        for p in range(len(self.polygons)):
            chi[self.poly_component[p]] += 1
        return chi

    def genus(self) -> list[int]:
        return [(2 - x) // 2 for x in self.euler_characteristic()]


def _components(polygons, partner, declared) -> tuple[tuple[str, ...], tuple[int, ...]]:
    """Connected components, checked against the declared component labels."""
    n = len(polygons)
    comp = [-1] * n
    order = []
    for start in range(n):
        if comp[start] >= 0:
            continue
        k = len(order)
        order.append(start)
        stack = [start]
        comp[start] = k
        while stack:
            p = stack.pop()
            for q, _ in partner[p]:
                if comp[q] < 0:
                    comp[q] = k
                    stack.append(q)
    if declared is None:
        names = tuple(f"c{k}" for k in range(len(order)))
        return names, tuple(comp)
    names = []
    for k, first in enumerate(order):
        members = {declared[p] for p in range(n) if comp[p] == k}
        if len(members) > 1:
            raise NotConnected(f"components {sorted(members)} are glued together")
        names.append(declared[first])
    for name in set(declared):
        ks = {comp[p] for p in range(n) if declared[p] == name}
        if len(ks) > 1:
            raise NotConnected(f"component {name} is not connected")
    return tuple(names), tuple(comp)


def _normalize_glue(polygons, gluings) -> tuple[tuple[Corner, ...], ...]:
    partner: list[list[Corner | None]] = [[None] * len(p) for p in polygons]
    for a, b in gluings:
        for p, i in (a, b):
            if not (0 <= p < len(polygons) and 0 <= i < len(polygons[p])):
                raise GluingMismatch(f"no edge {p}.{i}")
        if a == b:
            raise GluingMismatch(f"edge {a[0]}.{a[1]} glued to itself")
        for x, y in ((a, b), (b, a)):
            if partner[x[0]][x[1]] is not None:
                raise GluingMismatch(f"edge {x[0]}.{x[1]} glued twice")
            partner[x[0]][x[1]] = y
    for p, row in enumerate(partner):
        for i, q in enumerate(row):
            if q is None:
                raise GluingMismatch(f"edge {p}.{i} is not glued")
    return tuple(tuple(r) for r in partner)  # type: ignore[arg-type]


@dataclass(frozen=True, eq=False)
class TranslationSurface(_PolygonSurface):
    """A possibly disconnected translation surface with its marked points.

    Marked points are exactly the regular vertex classes; zeros are vertex
    classes of cone angle 2pi(k+1) with k >= 1.
    """

    polygons: tuple[tuple[Vec, ...], ...]
    partner: tuple[tuple[Corner, ...], ...]
    names: tuple[str, ...] = field(default=())
    poly_component: tuple[int, ...] = field(default=())

    # vertex data -------------------------------------------------------
    def vertex_order(self, v: int) -> int:
        """Zero order k of a vertex class (cone angle 2pi(k+1))."""
        return self.vertex_halfturns(v) // 2 - 1

    @cached_property
    def marked_points(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_vertices) if self.vertex_order(v) == 0)

    @cached_property
    def zeros(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_vertices) if self.vertex_order(v) > 0)

    def vertices_of_component(self, comp: int) -> list[int]:
        return [v for v in range(self.n_vertices) if self.vertex_component(v) == comp]

    def signature(self) -> "StratumSignature":
        comps = []
        for k in range(self.n_components):
            vs = self.vertices_of_component(k)
            orders = sorted((self.vertex_order(v) for v in vs if self.vertex_order(v) > 0), reverse=True)
            marked = sum(1 for v in vs if self.vertex_order(v) == 0)
            comps.append((tuple(orders), marked))
        return StratumSignature(tuple(comps))

    def holonomy(self, p: int, i: int) -> Vec:
        return self.edge_vector(p, i)

    # equality through the canonical form -------------------------------
    @cached_property
    def canonical_key(self):
        from .cylinders import canonical_key

        return canonical_key(self)

    def __eq__(self, other):
        if not isinstance(other, TranslationSurface):
            return NotImplemented
        if self.same_presentation(other):
            return True
        return self.canonical_key == other.canonical_key

    def __hash__(self):
        return hash(self.canonical_key)

    def same_presentation(self, other: "TranslationSurface") -> bool:
        return self.polygons == other.polygons and self.partner == other.partner

    def __repr__(self):
        return f"TranslationSurface({self.signature()}, polygons={len(self.polygons)})"


@dataclass(frozen=True)
class StratumSignature:
    components: tuple[tuple[tuple[int, ...], int], ...]

    def component_str(self, k: int) -> str:
        orders, marked = self.components[k]
        parts = [str(o) for o in orders] + ["0"] * marked
        return "H(" + ",".join(parts) + ")"

    def __str__(self):
        return "x".join(self.component_str(k) for k in range(len(self.components)))

    def zero_orders(self, k: int) -> tuple[int, ...]:
        return self.components[k][0]

    def marked(self, k: int) -> int:
        return self.components[k][1]


def build_from_polygons(
    polygons: Sequence[Sequence],
    gluings: Iterable[tuple[Corner, Corner]],
    component_labels: Sequence[str] | None = None,
    marks: Iterable[Corner] = (),
    warn: bool = True,
) -> TranslationSurface:
    """Validate a polygon-gluing description and build the surface.

    Regular vertex classes that are not listed in ``marks`` are marked
    anyway; a warning reports them when ``warn`` is set.
    """
    polys = tuple(tuple(vec(*v) for v in poly) for poly in polygons)
    for k, poly in enumerate(polys):
        check_polygon(poly, k)
    partner = _normalize_glue(polys, list(gluings))
    for p, poly in enumerate(polys):
        for i in range(len(poly)):
            q, j = partner[p][i]
            e = vsub(poly[(i + 1) % len(poly)], poly[i])
            f = vsub(polys[q][(j + 1) % len(polys[q])], polys[q][j])
            if vadd(e, f) != (0, 0):
                raise GluingMismatch(f"edges {p}.{i} and {q}.{j} are not opposite translates")
    names, comp = _components(polys, partner, list(component_labels) if component_labels else None)
    s = TranslationSurface(polys, partner, names, comp)
    for v in range(s.n_vertices):
        if s.vertex_halfturns(v) % 2:
            raise AngleError(f"cone angle at vertex class {v} is not a multiple of 2pi")
    for k, a in enumerate(s.area()):
        if a <= 0:
            raise InvalidPolygon(f"component {names[k]} has non-positive area")
    if warn:
        marked_vertices = {s.vertex_of[c] for c in marks if c in s.vertex_of}
        unmarked = [v for v in s.marked_points if v not in marked_vertices]
        if unmarked and marks is not None and list(marks):
            warnings.warn(f"regular vertex classes {unmarked} were not marked; marking them", stacklevel=2)
    return s


def _surface_from_parts(polys, partner, names=None, comp=None) -> TranslationSurface:
    """Build without re-validating polygons (internal constructors)."""
    polys = tuple(tuple(vec(*v) for v in poly) for poly in polys)
    partner = tuple(tuple(r) for r in partner)
    if names is None or comp is None:
        names, comp = _components(polys, partner, None)
    return TranslationSurface(polys, partner, tuple(names), tuple(comp))


def surface_from_polygons_and_pairs(polys, pairs, labels=None) -> TranslationSurface:
    """Internal builder from polygons and a list of glued half-edge pairs."""
    partner = _normalize_glue(polys, pairs)
    return _surface_from_parts(polys, partner, *(_components(polys, partner, labels) if labels else (None, None)))


def apply_gl2(s: TranslationSurface, m) -> TranslationSurface:
    """Image of the surface under a rational 2x2 matrix of positive determinant."""
    m = [[Fraction(x) for x in row] for row in m]
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if det <= 0:
        raise DegenerateMatrix("matrix must have positive determinant")
    polys = tuple(
        tuple((m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y) for x, y in poly) for poly in s.polygons
    )
    return TranslationSurface(polys, s.partner, s.names, s.poly_component)


def rotation_to_horizontal(direction: Vec):
    """Similarity matrix z -> z/d that turns the direction d to the east."""
    a, b = Fraction(direction[0]), Fraction(direction[1])
    n = a * a + b * b
    return [[a / n, b / n], [-b / n, a / n]]


def rotation_from_horizontal(direction: Vec):
    a, b = Fraction(direction[0]), Fraction(direction[1])
    return [[a, -b], [b, a]]


# ---------------------------------------------------------------------------
# origamis


def _perm_from_cycles(cycles: Sequence[Sequence[int]], n: int) -> list[int]:
    perm = list(range(n))
    seen = set()
    for cyc in cycles:
        for k, a in enumerate(cyc):
            if a in seen or not (1 <= a <= n):
                raise ValueError(f"bad cycle notation near {a}")
            seen.add(a)
            perm[a - 1] = cyc[(k + 1) % len(cyc)] - 1
    return perm


def perm_from_cycles(cycles: Sequence[Sequence[int]], n: int) -> list[int]:
    """0-based permutation from 1-based cycle notation."""
    return _perm_from_cycles(cycles, n)


def build_origami(h: Sequence[int], v: Sequence[int]) -> TranslationSurface:
    """Square-tiled surface: square i is glued to h[i] on its right, v[i] on top.

    ``h`` and ``v`` are 0-based permutation lists. The presentation uses one
    parallelogram per maximal horizontal cylinder, so polygon vertices are
    only the singular corners (plus one marked corner on a flat torus
    component).
    """
    n = len(h)
    if sorted(h) != list(range(n)) or sorted(v) != list(range(n)):
        raise ValueError("h and v must be permutations")
    hinv = [0] * n
    vinv = [0] * n
    for i in range(n):
        hinv[h[i]] = i
        vinv[v[i]] = i
    # corners as (square, k) with k = 0 BL, 1 BR, 2 TR, 3 TL
    parent = {(i, k): (i, k) for i in range(n) for k in range(4)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for i in range(n):
        union((i, 1), (h[i], 0))
        union((i, 2), (h[i], 3))
        union((i, 3), (v[i], 0))
        union((i, 2), (v[i], 1))
    size: dict = {}
    for x in parent:
        r = find(x)
        size[r] = size.get(r, 0) + 1
    # components of the square graph
    comp = [-1] * n
    ncomp = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        stack = [s]
        comp[s] = ncomp
        while stack:
            a = stack.pop()
            for b in (h[a], v[a], hinv[a], vinv[a]):
                if comp[b] < 0:
                    comp[b] = ncomp
                    stack.append(b)
        ncomp += 1
    sigma = {r for r, c in size.items() if c > 4}
    for k in range(ncomp):
        squares = [i for i in range(n) if comp[i] == k]
        if not any(find((i, j)) in sigma for i in squares for j in range(4)):
            sigma.add(find((min(squares), 0)))

    def bl_sigma(i):
        return find((i, 0)) in sigma

    def line_sigma(strip):
        return any(bl_sigma(i) for i in strip)

    strip_of = {}
    strips = []
    for i in range(n):
        if i in strip_of:
            continue
        cyc = [i]
        j = h[i]
        while j != i:
            cyc.append(j)
            j = h[j]
        for j in cyc:
            strip_of[j] = len(strips)
        strips.append(cyc)

    polys = []
    poly_comp = []
    bottom_key = {}  # square whose BL starts the edge -> (poly, edge)
    top_key = {}
    side = []
    for strip in strips:
        if not line_sigma(strip):
            continue
        i0 = next(i for i in strip if bl_sigma(i))
        w = len(strip)
        row0 = [i0]
        for _ in range(w - 1):
            row0.append(h[row0[-1]])
        rows = [row0]
        while True:
            top = [v[i] for i in rows[-1]]
            if line_sigma(top):
                break
            rows.append(top)
        height = len(rows)
        toprow = rows[-1]
        bpos = [k for k in range(w) if bl_sigma(row0[k])]
        tpos = [k for k in range(w) if bl_sigma(v[toprow[k]])]
        xt = tpos[0]
        verts = [(k, 0) for k in bpos] + [(w, 0)]
        edges_bottom = [row0[k] for k in bpos]
        tdesc = sorted(((p if p >= xt else p + w) for p in tpos), reverse=True)
        verts.append((w + xt, height))
        verts.extend((p, height) for p in tdesc if p != xt)
        verts.append((xt, height))
        # top edges run west; each is keyed by the square above its west end
        top_keys = [v[toprow[p % w]] for p in tdesc]
        pid = len(polys)
        polys.append(verts)
        poly_comp.append(comp[i0])
        nb = len(bpos)
        for e, sq in enumerate(edges_bottom):
            bottom_key[sq] = (pid, e)
        right = nb
        for e, sq in enumerate(top_keys):
            top_key[sq] = (pid, nb + 1 + e)
        left = len(verts) - 1
        side.append(((pid, right), (pid, left)))
    pairs = list(side)
    for sq, he in bottom_key.items():
        pairs.append((he, top_key[sq]))
    partner = _normalize_glue(polys, pairs)
    polys_v = tuple(tuple(vec(*p) for p in poly) for poly in polys)
    # renumber components by first polygon
    order = []
    for c in poly_comp:
        if c not in order:
            order.append(c)
    pc = tuple(order.index(c) for c in poly_comp)
    names = tuple(f"c{k}" for k in range(len(order)))
    return TranslationSurface(polys_v, partner, names, pc)


def origami_from_cycles(hcycles, vcycles, n: int | None = None) -> TranslationSurface:
    if n is None:
        n = max([a for c in list(hcycles) + list(vcycles) for a in c] + [1])
    return build_origami(_perm_from_cycles(hcycles, n), _perm_from_cycles(vcycles, n))


# ---------------------------------------------------------------------------
# half-translation surfaces


@dataclass(frozen=True, eq=False)
class HalfTranslationSurface(_PolygonSurface):
    """Polygons glued by z -> z + c or z -> -z + c.

    ``flipped[p][i]`` records whether edge i of polygon p is glued by a
    half-turn (the two edge vectors are then equal rather than opposite).
    """

    polygons: tuple[tuple[Vec, ...], ...]
    partner: tuple[tuple[Corner, ...], ...]
    names: tuple[str, ...] = field(default=())
    poly_component: tuple[int, ...] = field(default=())

    # equality of presentations; no canonical form is attempted here
    def __eq__(self, other):
        if not isinstance(other, HalfTranslationSurface):
            return NotImplemented
        return self.polygons == other.polygons and self.partner == other.partner

    def __hash__(self):
        return hash((self.polygons, self.partner))

    def is_flipped(self, p: int, i: int) -> bool:
        q, j = self.partner[p][i]
        return self.edge_vector(p, i) == self.edge_vector(q, j)

    def vertex_order(self, v: int) -> int:
        """Order of the quadratic differential at a vertex (-1 for a pole)."""
        return self.vertex_halfturns(v) - 2

    def orientable(self) -> bool:
        sign = [0] * len(self.polygons)
        for start in range(len(self.polygons)):
            if sign[start]:
                continue
            sign[start] = 1
            stack = [start]
            while stack:
                p = stack.pop()
                for i, (q, _) in enumerate(self.partner[p]):
                    want = -sign[p] if self.is_flipped(p, i) else sign[p]
                    if sign[q] == 0:
                        sign[q] = want
                        stack.append(q)
                    elif sign[q] != want:
                        return False
        return True


def build_half_translation(
    polygons: Sequence[Sequence], gluings: Iterable[tuple[Corner, Corner]], component_labels=None
) -> HalfTranslationSurface:
    polys = tuple(tuple(vec(*v) for v in poly) for poly in polygons)
    for k, poly in enumerate(polys):
        check_polygon(poly, k)
    partner = _normalize_glue(polys, list(gluings))
    any_flip = False
    for p, poly in enumerate(polys):
        for i in range(len(poly)):
            q, j = partner[p][i]
            e = vsub(poly[(i + 1) % len(poly)], poly[i])
            f = vsub(polys[q][(j + 1) % len(polys[q])], polys[q][j])
            if vadd(e, f) == (0, 0):
                continue
            if e == f:
                any_flip = True
                continue
            raise GluingMismatch(f"edges {p}.{i} and {q}.{j} are not glued by z -> +-z + c")
    if not any_flip:
        raise AlreadyOrientable("no edge is glued by a half-turn; this is a translation surface")
    names, comp = _components(polys, partner, list(component_labels) if component_labels else None)
    return HalfTranslationSurface(polys, partner, names, comp)


@dataclass(frozen=True)
class Involution:
    """Deck involution of a holonomy double cover: polygon p <-> poly_map[p].

    Edge i of polygon p is sent to edge i of the partner polygon and points
    z of the polygon to -z.
    """

    poly_map: tuple[int, ...]

    def half_edge(self, c: Corner) -> Corner:
        return (self.poly_map[c[0]], c[1])


def holonomy_double_cover(q: HalfTranslationSurface) -> tuple[TranslationSurface, Involution]:
    """Orientation double cover of a half-translation surface."""
    if q.orientable():
        raise AlreadyOrientable("the half-translation surface has trivial linear holonomy")
    m = len(q.polygons)
    polys = [list(poly) for poly in q.polygons] + [[vneg(x) for x in poly] for poly in q.polygons]
    pairs = []
    for p, i in q.edge_classes:
        r, j = q.partner[p][i]
        if q.is_flipped(p, i):
            pairs.append(((p, i), (r + m, j)))
            pairs.append(((p + m, i), (r, j)))
        else:
            pairs.append(((p, i), (r, j)))
            pairs.append(((p + m, i), (r + m, j)))
    partner = _normalize_glue(polys, pairs)
    polys_v = tuple(tuple(poly) for poly in polys)
    names, comp = _components(polys_v, partner, None)
    cover = TranslationSurface(polys_v, partner, names, comp)
    inv = Involution(tuple(list(range(m, 2 * m)) + list(range(m))))
    return cover, inv
