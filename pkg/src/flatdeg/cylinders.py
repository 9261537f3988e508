"""Cylinder decompositions in periodic directions and their diagnostics.

A decomposition is computed in the frame where the chosen direction points
east: the surface is divided by the primitive integer direction vector d, so
heights and circumferences are measured in units of |d|. Moduli are
frame-independent.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from . import linalg as la
from .errors import BadDirection, BadPivot, FlatError, NoDegeneration, NotGeneric, NotParallel, NotPeriodic
from .homology import CellComplex
from .linalg import QI
from .surface import (
    TranslationSurface,
    _normalize_glue,
    _components,
    apply_gl2,
    rotation_to_horizontal,
    vec,
)
from .trace import EAST, NORTH, SOUTH, WEST, Triangulation


def primitive_direction(direction) -> tuple[int, int]:
    a, b = Fraction(direction[0]), Fraction(direction[1])
    if a == 0 and b == 0:
        raise BadDirection("direction must be nonzero")
    m = math.lcm(a.denominator, b.denominator)
    x, y = int(a * m), int(b * m)
    g = math.gcd(x, y)
    x, y = x // g, y // g
    if x < 0 or (x == 0 and y < 0):
        x, y = -x, -y
    return x, y


@dataclass
class SaddleConnection:
    index: int
    length: Fraction
    chain: list[Fraction]
    start: int
    end: int
    start_corner: tuple
    arrival: tuple
    pieces: list = field(default_factory=list, repr=False)


@dataclass
class Cylinder:
    index: int
    direction: tuple[int, int]
    height: Fraction
    circumference: Fraction
    bottom: tuple[int, ...]
    top: tuple[int, ...]
    twist: Fraction
    core_chain: list[Fraction] = field(repr=False)
    cross_chain: list[Fraction] = field(repr=False)
    bottom_lengths: tuple[Fraction, ...] = ()
    top_lengths: tuple[Fraction, ...] = ()

    @property
    def modulus(self) -> Fraction:
        return self.height / self.circumference

    @property
    def shape(self) -> str:
        b, t = self.bottom_lengths, self.top_lengths
        if len(b) == 1 and len(t) == 1:
            return "simple"
        if (len(b) == 1 and len(t) == 2 and t[0] == t[1]) or (len(t) == 1 and len(b) == 2 and b[0] == b[1]):
            return "half_simple"
        return "other"


class Decomposition:
    """Maximal cylinders of a surface in one periodic direction."""

    def __init__(self, surface: TranslationSurface, direction=(1, 0), bound: int | None = None):
        self.surface = surface
        self.direction = primitive_direction(direction)
        d = self.direction
        self.frame = surface if d == (1, 0) else apply_gl2(surface, rotation_to_horizontal(d))
        self.complex = CellComplex(surface)
        self.tri = Triangulation(self.frame)
        self.bound = bound
        self._build()

    # construction --------------------------------------------------------
    def _build(self) -> None:
        tri = self.tri
        scs: list[SaddleConnection] = []
        starts: dict = {}
        arrivals: dict = {}
        by_triangle: dict[int, list] = {}
        for v in range(self.frame.n_vertices):
            for c in tri.outgoing(v, EAST):
                res = tri.trace(c, EAST, self.bound)
                if res.holonomy[1] != 0:
                    raise RuntimeError("eastward trace drifted vertically")
                k = len(scs)
                sc = SaddleConnection(
                    k, res.holonomy[0], tri.chain_vector(res.chain), v, tri.vertex(res.arrival), c, res.arrival
                )
                off = Fraction(0)
                if _is_edge_trace(tri, c):
                    (t1, a1, b1), (t2, a2, b2) = res.segments
                    sc.pieces = [(t1, a1, b1, Fraction(0)), (t2, a2, b2, Fraction(0))]
                else:
                    for t, a, b in res.segments:
                        sc.pieces.append((t, a, b, off))
                        off += b[0] - a[0]
                for t, a, b, o in sc.pieces:
                    by_triangle.setdefault(t, []).append((k, a, b, o))
                scs.append(sc)
                starts[c] = k
                arrivals[res.arrival] = k
        self.saddle_connections = scs
        self._pieces = by_triangle
        # rotation events around each vertex: E = departure, W = arrival
        nb, nt = {}, {}
        for v in range(self.frame.n_vertices):
            ev = []
            for c in tri.rotation(v):
                if c in starts:
                    ev.append((tri.position(c, EAST), "E", starts[c]))
                if c in arrivals:
                    ev.append((tri.position(c, WEST), "W", arrivals[c]))
            ev.sort(key=lambda x: x[0])
            n = len(ev)
            for i, (_, kind, s) in enumerate(ev):
                if kind != "W":
                    continue
                prev, nxt = ev[(i - 1) % n], ev[(i + 1) % n]
                if prev[1] != "E" or nxt[1] != "E":
                    raise RuntimeError("separatrix directions do not alternate")
                nb[s] = prev[2]
                nt[s] = nxt[2]
        self._next_bottom, self._next_top = nb, nt

        def cycles(nxt):
            seen, out = set(), []
            for s in range(len(scs)):
                if s in seen:
                    continue
                cyc = [s]
                seen.add(s)
                x = nxt[s]
                while x != s:
                    cyc.append(x)
                    seen.add(x)
                    x = nxt[x]
                out.append(cyc)
            return out

        bottoms = cycles(nb)
        top_cycle_of = {}
        for cyc in cycles(nt):
            for s in cyc:
                top_cycle_of[s] = cyc
        cyls = []
        for bcyc in bottoms:
            s0 = min(bcyc)
            i = bcyc.index(s0)
            bcyc = bcyc[i:] + bcyc[:i]
            h, t_sc, p = self._north_hit(scs[s0])
            tcyc = top_cycle_of[t_sc]
            j = tcyc.index(t_sc)
            tcyc = tcyc[j:] + tcyc[:j]
            w = (-p, h)
            sc0 = scs[s0]
            c0 = tri.next_corner_with(sc0.start, tri.position(sc0.start_corner, EAST), w)
            res = tri.trace(c0, w, self.bound)
            if res.holonomy != w or tri.vertex(res.arrival) != scs[t_sc].start:
                raise RuntimeError("cross curve did not close on the top boundary")
            core = [Fraction(0)] * self.complex.n_edges
            for s in bcyc:
                core = la.add(core, scs[s].chain)
            circ = sum((scs[s].length for s in bcyc), Fraction(0))
            if circ != sum((scs[s].length for s in tcyc), Fraction(0)):
                raise RuntimeError("cylinder boundaries have different lengths")
            cyls.append(
                Cylinder(
                    len(cyls),
                    self.direction,
                    h,
                    circ,
                    tuple(bcyc),
                    tuple(tcyc),
                    -p,
                    core,
                    tri.chain_vector(res.chain),
                    tuple(scs[s].length for s in bcyc),
                    tuple(scs[s].length for s in tcyc),
                )
            )
        self.cylinders = cyls
        area = sum(self.frame.area(), Fraction(0))
        if sum((c.height * c.circumference for c in cyls), Fraction(0)) != area:
            raise RuntimeError("cylinders do not fill the surface")
        self.above = {}
        self.below = {}
        for c in cyls:
            off = Fraction(0)
            for s in c.bottom:
                self.above[s] = (c.index, off)
                off += scs[s].length
            off = Fraction(0)
            for s in c.top:
                self.below[s] = (c.index, off)
                off += scs[s].length

    def _north_hit(self, sc: SaddleConnection):
        """Trace north from the start of a bottom saddle connection.

        Returns (height, top saddle connection, offset of the hit point from
        the start of that saddle connection).
        """
        tri = self.tri
        c0 = tri.next_corner_with(sc.start, tri.position(sc.start_corner, EAST), NORTH)
        climbed = Fraction(0)
        pieces = self._pieces

        def stop(t, a, b):
            # triangle coordinates jump across glued edges, so heights are accumulated
            nonlocal climbed
            best = None
            corners = tri.points[t]
            for k, p0, p1, off in pieces.get(t, ()):
                y = p0[1]
                if not (a[1] < y <= b[1]):
                    continue
                if not (p0[0] <= a[0] <= p1[0]):
                    continue
                if (a[0], y) in corners:
                    # a vertex: the walk itself stops there
                    continue
                if best is None or y < best[0]:
                    best = (y, k, off + a[0] - p0[0], climbed + y - a[1])
            if best is None:
                climbed += b[1] - a[1]
            return best

        res = tri.trace(c0, NORTH, self.bound, stop=stop)
        hit = res.stopped
        if hit is not None:
            _, k, p, h = hit
            length = self.saddle_connections[k].length
            if not 0 < p < length:
                raise RuntimeError("vertical ray met a saddle connection at its endpoint")
            return h, k, p
        h = res.holonomy[1]
        arr = res.arrival
        v = tri.vertex(arr)
        c = tri.next_corner_with(v, tri.position(arr, SOUTH), EAST)
        return h, self._start_index(c), Fraction(0)

    def _start_index(self, corner) -> int:
        for s in self.saddle_connections:
            if s.start_corner == corner:
                return s.index
        raise RuntimeError("no separatrix leaves this corner")

    # queries ---------------------------------------------------------------
    def frame_value(self, z: QI) -> QI:
        """Convert a holonomy from the original frame to the decomposition frame."""
        a, b = self.direction
        return QI.coerce(z) / QI(a, b)

    def from_frame(self, z) -> QI:
        a, b = self.direction
        return QI.coerce(z) * QI(a, b)

    @cached_property
    def cylinder_surface(self):
        return CylinderForm.from_decomposition(self)

    def dual(self, c: int) -> list[Fraction]:
        """The cocycle gamma_C^*: 1 on the upward cross curve of C, 0 on the rest."""
        cf = self.cylinder_surface
        vals = cf.edge_values(sc={}, cross={c: Fraction(1)})
        return cf.push(vals)

    def core_functional(self, c: int, basis) -> list:
        return [la.dot(b, self.cylinders[c].core_chain) for b in basis]


def _is_edge_trace(tri, corner) -> bool:
    t, k = corner
    e = tri.vec(t, k)
    return e[1] == 0 and e[0] > 0


def decompose(surface: TranslationSurface, direction=(1, 0), bound: int | None = None) -> Decomposition:
    return Decomposition(surface, direction, bound)


def cylinder_decomposition(surface, direction=(1, 0), bound=None):
    """List of cylinders, or the NotPeriodic error object (not raised)."""
    try:
        return Decomposition(surface, direction, bound).cylinders
    except NotPeriodic as exc:
        return exc


# ---------------------------------------------------------------------------
# horizontal cylinder form


@dataclass
class CylinderForm:
    """A horizontally periodic surface as parallelograms glued along saddle connections.

    ``cyl`` entries are (height, twist, bottom ids, top ids); ``lengths``
    maps saddle connection id -> length. The twist is the horizontal offset of
    the start of the first top saddle connection from the start of the first
    bottom one.
    """

    lengths: dict[int, Fraction]
    cyl: list[tuple[Fraction, Fraction, tuple[int, ...], tuple[int, ...]]]
    decomposition: Decomposition | None = None

    @staticmethod
    def from_decomposition(dec: Decomposition) -> "CylinderForm":
        lengths = {s.index: s.length for s in dec.saddle_connections}
        cyl = [(c.height, c.twist, c.bottom, c.top) for c in dec.cylinders]
        return CylinderForm(lengths, cyl, dec)

    @cached_property
    def built(self):
        return build_cylinder_surface(self.lengths, self.cyl)

    @property
    def surface(self) -> TranslationSurface:
        return self.built[0]

    def edge_values(self, sc: dict, cross: dict) -> list:
        """Cocycle on the parallelogram complex from values on saddle connections and cross curves."""
        s, bottom_he, top_he, right_he = self.built
        out = [Fraction(0)] * len(s.edge_classes)
        for k, val in sc.items():
            e, sg = s.edge_index[bottom_he[k]]
            out[e] = val * sg
        for c, val in cross.items():
            e, sg = s.edge_index[right_he[c]]
            out[e] = val * sg
        return out

    @cached_property
    def phi(self) -> list[list[Fraction]]:
        """Chain map: parallelogram edge classes -> chains on the original surface."""
        dec = self.decomposition
        s, bottom_he, top_he, right_he = self.built
        rows: list = [None] * len(s.edge_classes)
        for k, he in bottom_he.items():
            e, sg = s.edge_index[he]
            rows[e] = la.scale(Fraction(sg), dec.saddle_connections[k].chain)
        for c, he in right_he.items():
            e, sg = s.edge_index[he]
            rows[e] = la.scale(Fraction(sg), dec.cylinders[c].cross_chain)
        return rows

    def pull(self, u) -> list:
        """Cocycle on the original surface -> cocycle on the parallelogram complex."""
        return [la.dot(u, r) for r in self.phi]

    @cached_property
    def _push_system(self):
        dec = self.decomposition
        basis = dec.complex.cocycle_basis
        mat = [self.pull(b) for b in basis]
        return basis, mat

    def push(self, w) -> list:
        """Cocycle on the parallelogram complex -> cocycle on the original surface."""
        basis, mat = self._push_system
        coeffs = la.solve(la.transpose(mat), w, len(basis))
        if coeffs is None:
            raise FlatError("value vector is not a cocycle of the cylinder complex")
        return la.combo(coeffs, basis, len(basis[0]) if basis else 0)


def build_cylinder_surface(lengths: dict, cyl: list, names=None, comp_of_cyl=None):
    """Parallelogram presentation of a cylinder form.

    Returns (surface, bottom half-edge per saddle connection, top half-edge
    per saddle connection, right side half-edge per cylinder).
    """
    polys = []
    bottom_he, top_he, right_he, left_he = {}, {}, {}, {}
    for ci, (h, x, bottom, top) in enumerate(cyl):
        c = sum((lengths[s] for s in bottom), Fraction(0))
        verts = [(Fraction(0), Fraction(0))]
        pos = Fraction(0)
        for k, s in enumerate(bottom):
            bottom_he[s] = (ci, k)
            pos += lengths[s]
            verts.append((pos, Fraction(0)))
        # verts ends at (c, 0); right side goes to (c + x, h)
        right_he[ci] = (ci, len(bottom))
        tpos = [x]
        for s in top[:-1]:
            tpos.append(tpos[-1] + lengths[s])
        verts.append((c + x, Fraction(h)))
        k = len(bottom) + 1
        for m in range(len(top) - 1, -1, -1):
            top_he[top[m]] = (ci, k)
            k += 1
            if m > 0:
                verts.append((tpos[m], Fraction(h)))
        verts.append((x, Fraction(h)))
        # the last vertex (x, h) starts the left side back to the origin
        left_he[ci] = (ci, len(verts) - 1)
        polys.append(verts)
    pairs = []
    for s, he in bottom_he.items():
        pairs.append((he, top_he[s]))
    for ci in range(len(cyl)):
        pairs.append((right_he[ci], left_he[ci]))
    partner = _normalize_glue(polys, pairs)
    polys_v = tuple(tuple(vec(*p) for p in poly) for poly in polys)
    if names is None:
        names, comp = _components(polys_v, partner, None)
    else:
        comp = tuple(comp_of_cyl)
    surf = TranslationSurface(polys_v, partner, tuple(names), tuple(comp))
    return surf, bottom_he, top_he, right_he


# ---------------------------------------------------------------------------
# canonical form


def _cylinder_data(lengths: dict, cyl: list):
    above, below = {}, {}
    for ci, (h, x, bottom, top) in enumerate(cyl):
        off = Fraction(0)
        for s in bottom:
            above[s] = (ci, off)
            off += lengths[s]
        off = Fraction(0)
        for s in top:
            below[s] = (ci, off)
            off += lengths[s]
    return above, below


def _rooted_code(lengths, cyl, above, below, root_cyl, root_pos):
    """Encode the cylinder form by a breadth-first walk from one root."""
    labels: dict[int, int] = {}
    code = []
    queue = [(root_cyl, root_pos)]
    seen = {root_cyl}
    while queue:
        ci, r = queue.pop(0)
        h, x, bottom, top = cyl[ci]
        c = sum((lengths[s] for s in bottom), Fraction(0))
        origin = sum((lengths[s] for s in bottom[:r]), Fraction(0))
        bot = list(bottom[r:]) + list(bottom[:r])
        tstarts = []
        acc = x
        for s in top:
            tstarts.append((acc - origin) % c)
            acc += lengths[s]
        m = min(range(len(top)), key=lambda j: tstarts[j])
        twist = tstarts[m]
        tp = list(top[m:]) + list(top[:m])
        for s in bot + tp:
            if s not in labels:
                labels[s] = len(labels)
        code.append(
            (h, c, twist, tuple((labels[s], lengths[s]) for s in bot), tuple((labels[s], lengths[s]) for s in tp))
        )
        for s in bot:
            d, toff = below[s]
            if d in seen:
                continue
            seen.add(d)
            hd, xd, bd, td = cyl[d]
            cd = sum((lengths[q] for q in bd), Fraction(0))
            target = (xd + toff) % cd
            bstarts = []
            acc = Fraction(0)
            for q in bd:
                bstarts.append(acc)
                acc += lengths[q]
            j = min(range(len(bd)), key=lambda j: (bstarts[j] - target) % cd)
            queue.append((d, j))
        for s in tp:
            e, boff = above[s]
            if e in seen:
                continue
            seen.add(e)
            queue.append((e, list(cyl[e][2]).index(s)))
    return tuple(code)


def form_components(lengths, cyl) -> list[list[int]]:
    above, below = _cylinder_data(lengths, cyl)
    parent = list(range(len(cyl)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s in lengths:
        a, b = find(above[s][0]), find(below[s][0])
        if a != b:
            parent[a] = b
    groups: dict[int, list[int]] = {}
    for ci in range(len(cyl)):
        groups.setdefault(find(ci), []).append(ci)
    return sorted(groups.values())


def form_canonical_codes(lengths, cyl):
    """Canonical code per connected component (minimum over all roots)."""
    above, below = _cylinder_data(lengths, cyl)
    out = []
    for group in form_components(lengths, cyl):
        best = None
        for ci in group:
            for r in range(len(cyl[ci][2])):
                code = _rooted_code(lengths, cyl, above, below, ci, r)
                if best is None or code < best:
                    best = code
        out.append(best)
    return out


def canonical_key(surface: TranslationSurface):
    """Presentation-independent key: equal iff the surfaces are isomorphic.

    Built from the horizontal cylinder decomposition, which exists for every
    surface with rational coordinates.
    """
    dec = Decomposition(surface, (1, 0))
    form = dec.cylinder_surface
    return tuple(sorted(form_canonical_codes(form.lengths, form.cyl)))


def surface_from_code(codes) -> TranslationSurface:
    """Parallelogram presentation of canonical component codes."""
    lengths: dict[int, Fraction] = {}
    cyl = []
    comp = []
    base = 0
    for k, code in enumerate(codes):
        top_n = 0
        for h, c, twist, bot, tp in code:
            for lab, ln in bot + tp:
                lengths[base + lab] = ln
                top_n = max(top_n, lab + 1)
            cyl.append((h, twist, tuple(base + lab for lab, _ in bot), tuple(base + lab for lab, _ in tp)))
            comp.append(k)
        base += top_n
    names = tuple(f"c{k}" for k in range(len(codes)))
    return build_cylinder_surface(lengths, cyl, names, comp)[0]


def canonical_surface(surface: TranslationSurface) -> TranslationSurface:
    return surface_from_code(surface.canonical_key)


# ---------------------------------------------------------------------------
# M-parallelism and equivalence classes


def functional(t, chain) -> list:
    """Values of the basis of T on a chain."""
    return [la.dot(b, chain) for b in t.basis]


def proportionality(f, g):
    """Real r with f = r*g, or None. g must be nonzero."""
    k = next((i for i, x in enumerate(g) if x != 0), None)
    if k is None:
        raise FlatError("reference functional vanishes on T")
    r = f[k] / g[k]
    return r if all(a == r * b for a, b in zip(f, g)) else None


def is_parallel(c1: Cylinder, c2: Cylinder, t) -> bool:
    """M-parallelism: core functionals on T differ by a positive real factor."""
    if c1.direction != c2.direction:
        raise NotParallel("cylinders have different directions")
    f1 = functional(t, c1.core_chain)
    f2 = functional(t, c2.core_chain)
    r = c2.circumference / c1.circumference
    return all(b == r * a for a, b in zip(f1, f2))


def is_generically_parallel(t, chain, core_chain) -> bool:
    return proportionality(functional(t, chain), functional(t, core_chain)) is not None


def cylinder_is_generic(dec: Decomposition, c: int, t) -> bool:
    """Every boundary saddle connection stays parallel to the core on T."""
    cyl = dec.cylinders[c]
    core = functional(t, cyl.core_chain)
    for s in set(cyl.bottom) | set(cyl.top):
        if proportionality(functional(t, dec.saddle_connections[s].chain), core) is None:
            return False
    return True


@dataclass
class EquivalenceClass:
    index: int
    cylinders: tuple[int, ...]
    genericity: str
    cylinders_generic: bool

    @property
    def generic(self) -> bool:
        return self.genericity == "generic"


def equivalence_classes(dec: Decomposition, t) -> list[EquivalenceClass]:
    cyls = dec.cylinders
    groups: list[list[int]] = []
    for c in cyls:
        for g in groups:
            if is_parallel(cyls[g[0]], c, t):
                g.append(c.index)
                break
        else:
            groups.append([c.index])
    out = []
    for k, g in enumerate(groups):
        each = all(cylinder_is_generic(dec, c, t) for c in g)
        core = cyls[g[0]].core_chain
        all_sc = all(is_generically_parallel(t, s.chain, core) for s in dec.saddle_connections)
        label = "generic" if each and (t.rel == 0 or all_sc) else "unknown"
        out.append(EquivalenceClass(k, tuple(g), label, each))
    return out


def class_of(classes, c: int) -> EquivalenceClass:
    for cls in classes:
        if c in cls.cylinders:
            return cls
    raise KeyError(c)


# ---------------------------------------------------------------------------
# twist spaces


def standard_deformation(dec: Decomposition, cylinders) -> list[Fraction]:
    """sigma = sum of h_C gamma_C^* (heights in the decomposition frame)."""
    n = dec.complex.n_edges
    out = [Fraction(0)] * n
    for c in cylinders:
        out = la.add(out, la.scale(dec.cylinders[c].height, dec.dual(c)))
    return out


@dataclass
class TwistSpace:
    cylinders: tuple[int, ...]
    coefficients: list[list[Fraction]]
    basis: list[list[Fraction]]

    @property
    def dim(self) -> int:
        return len(self.basis)


def twist_space(dec: Decomposition, cylinders, t) -> TwistSpace:
    """span{gamma_C^*} ∩ T, with each basis vector's coefficients a_C."""
    cylinders = tuple(cylinders)
    n = dec.complex.n_edges
    duals = [dec.dual(c) for c in cylinders]
    # a . duals - b . basis = 0
    cols = duals + [la.scale(-1, b) for b in t.basis]
    rows = la.transpose(cols, len(cols))
    ker = la.nullspace(rows, len(cols)) if cols else []
    coeffs = la.span_basis([k[: len(duals)] for k in ker])
    basis = [la.combo(a, duals, n) for a in coeffs]
    return TwistSpace(cylinders, coeffs, basis)


def cylinder_twist_coefficients(dec: Decomposition, cylinders, u) -> list:
    """Values a_C = u(s_C) of a twist cocycle on the cross curves."""
    return [la.dot(u, dec.cylinders[c].cross_chain) for c in cylinders]


@dataclass
class TwistDecomposition:
    a: QI
    twist_part: list
    rest: list


def _as_qi(u) -> list[QI]:
    return [QI.coerce(x) for x in u]


def twist_decomposition(eta, dec: Decomposition, cls: EquivalenceClass, w, t, require_generic: bool = True):
    """Split eta = a*w + eta_C + eta_rest.

    eta_C lies in the twist space of the class and eta_rest in T vanishes on
    every saddle connection in the closure of the class.
    """
    if require_generic and not cls.generic:
        raise NotGeneric("the class is not certified generic")
    if not cls.cylinders_generic:
        raise NotGeneric("some cylinder of the class is not generic")
    eta, w = _as_qi(eta), _as_qi(w)
    n = dec.complex.n_edges
    pivot = None
    for c in cls.cylinders:
        wc = la.dot(w, dec.cylinders[c].core_chain)
        if wc != 0:
            pivot = c
            break
    if pivot is None:
        raise BadPivot("w vanishes on every core curve of the class")
    core = dec.cylinders[pivot].core_chain
    a = la.dot(eta, core) / la.dot(w, core)
    rem = la.sub(eta, la.scale(a, w))
    tw = twist_space(dec, cls.cylinders, t)
    target = [la.dot(rem, dec.cylinders[c].cross_chain) for c in cls.cylinders]
    # coefficients over the twist basis: sum_j x_j coeffs[j] = target
    m = la.transpose([[QI.coerce(x) for x in row] for row in tw.coefficients], len(cls.cylinders)) if tw.dim else []
    x = la.solve(m, target, tw.dim) if tw.dim else ([] if all(z == 0 for z in target) else None)
    if x is None:
        raise NotGeneric("cross curve values are not realized by the twist space")
    twist_part = la.combo(x, [_as_qi(b) for b in tw.basis], n) if tw.dim else [QI(0)] * n
    rest = la.sub(rem, twist_part)
    return TwistDecomposition(a, twist_part, rest)


def closure_chains(dec: Decomposition, cylinders) -> list[list[Fraction]]:
    """Saddle connections and cross curves spanning the relative homology of the closure."""
    out = []
    seen = set()
    for c in cylinders:
        cyl = dec.cylinders[c]
        for s in cyl.bottom + cyl.top:
            if s not in seen:
                seen.add(s)
                out.append(dec.saddle_connections[s].chain)
        out.append(cyl.cross_chain)
    return out


# ---------------------------------------------------------------------------
# geminal diagnostics


def is_free(dec: Decomposition, c: int, t) -> bool:
    return t.contains(dec.dual(c))


def are_twins(dec: Decomposition, c1: int, c2: int, t) -> bool:
    a, b = dec.cylinders[c1], dec.cylinders[c2]
    if a.height != b.height or a.circumference != b.circumference:
        return False
    fa, fb = functional(t, a.core_chain), functional(t, b.core_chain)
    if fa != fb:
        return False
    # height functionals agree up to the core and the boundary saddle
    # connections, since cross curves differ by boundary chains
    diff = functional(t, la.sub(a.cross_chain, b.cross_chain))
    slack = [fa] + [functional(t, dec.saddle_connections[s].chain) for s in set(a.bottom + a.top + b.bottom + b.top)]
    if any(x != 0 for x in diff) and not la.in_span(la.span_basis(slack), diff):
        return False
    return t.contains(la.add(dec.dual(c1), dec.dual(c2)))


@dataclass
class GeminalReport:
    status: dict[int, str]
    partner: dict[int, int]

    @property
    def geminal(self) -> bool:
        return all(s != "violation" for s in self.status.values())


def geminal_report(dec: Decomposition, t) -> GeminalReport:
    status, partner = {}, {}
    for c in dec.cylinders:
        if is_free(dec, c.index, t):
            status[c.index] = "free"
    for c in dec.cylinders:
        if c.index in status:
            continue
        for d in dec.cylinders:
            if d.index != c.index and d.index not in status and are_twins(dec, c.index, d.index, t):
                status[c.index] = status[d.index] = "twin"
                partner[c.index], partner[d.index] = d.index, c.index
                break
        else:
            status[c.index] = "violation"
    return GeminalReport(status, partner)


def is_nested(dec_c: Decomposition, c: int, dec_h: Decomposition, h: int) -> bool:
    """C lies in the closure of H and crosses H exactly once."""
    if dec_c.direction == dec_h.direction:
        return False
    cyl_c, cyl_h = dec_c.cylinders[c], dec_h.cylinders[h]
    hol = la.dot(period_vector(dec_h.surface), cyl_c.core_chain)
    z = dec_h.frame_value(hol)
    if abs(z.im) != cyl_h.height:
        return False
    return abs(la.dot(dec_h.dual(h), cyl_c.core_chain)) == 1


def period_vector(surface) -> list[QI]:
    re, im = CellComplex(surface).period_parts()
    return [QI(a, b) for a, b in zip(re, im)]


@dataclass
class ComplementComponent:
    cylinders: tuple[int, ...]
    classes: tuple[int, ...]


def hat_complement(dec: Decomposition, cls: EquivalenceClass, t, classes=None) -> list[ComplementComponent]:
    """Components of the complement of the class and its generically parallel saddle connections."""
    classes = classes if classes is not None else equivalence_classes(dec, t)
    removed = set(cls.cylinders)
    core = dec.cylinders[cls.cylinders[0]].core_chain
    rest = [c.index for c in dec.cylinders if c.index not in removed]
    parent = {c: c for c in rest}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s in dec.saddle_connections:
        lo, hi = dec.below[s.index][0], dec.above[s.index][0]
        if lo in removed or hi in removed:
            continue
        if is_generically_parallel(t, s.chain, core):
            continue
        a, b = find(lo), find(hi)
        if a != b:
            parent[a] = b
    groups: dict[int, list[int]] = {}
    for c in rest:
        groups.setdefault(find(c), []).append(c)
    out = []
    for g in sorted(groups.values()):
        ks = sorted({class_of(classes, c).index for c in g})
        out.append(ComplementComponent(tuple(g), tuple(ks)))
    return out


@dataclass
class StabilityReport:
    stable: bool
    twist_dim: int
    preserving_dim: int
    n_classes: int
    rank: int
    rel: int


def is_cylindrically_stable(dec: Decomposition, t) -> StabilityReport:
    tw = twist_space(dec, [c.index for c in dec.cylinders], t)
    pres = t.annihilator_of([c.core_chain for c in dec.cylinders])
    stable = tw.dim == pres.dim
    if stable != (tw.dim == t.rank + t.rel):
        raise FlatError("stability criteria disagree")
    n_classes = len(equivalence_classes(dec, t))
    if t.rel == 0 and stable != (n_classes == t.rank):
        raise FlatError("rel-zero class count criterion disagrees")
    return StabilityReport(stable, tw.dim, pres.dim, n_classes, t.rank, t.rel)


# ---------------------------------------------------------------------------
# rel and typical degenerations


def involved_with_rel(dec: Decomposition, cls: EquivalenceClass, t) -> bool:
    for r in t.rel_basis:
        for c in cls.cylinders:
            if la.dot(r, dec.cylinders[c].cross_chain) != 0:
                return True
    return False


def height_ratio_constant(dec: Decomposition, c1: int, c2: int, tw: TwistSpace) -> bool:
    """Whether every twist deformation keeps h_1/h_2 fixed."""
    i, j = tw.cylinders.index(c1), tw.cylinders.index(c2)
    h1, h2 = dec.cylinders[c1].height, dec.cylinders[c2].height
    return all(a[i] * h2 == a[j] * h1 for a in tw.coefficients)


@dataclass
class TypicalVector:
    vector: list[QI]
    coefficients: list[QI]
    t_v: Fraction
    collapsing: tuple[int, ...]


def collapse_time(dec: Decomposition, cylinders, coefficients):
    """(t_v, collapsing cylinders) for v = sum a_C gamma_C^* in the frame."""
    from .errors import NoCollapse

    best, arg = None, []
    for c, a in zip(cylinders, coefficients):
        a = QI.coerce(a)
        if a.im < 0:
            tc = -dec.cylinders[c].height / a.im
            if best is None or tc < best:
                best, arg = tc, [c]
            elif tc == best:
                arg.append(c)
    if best is None:
        raise NoCollapse("no cylinder has decreasing height")
    return best, tuple(arg)


def find_typical_vector(dec: Decomposition, cls: EquivalenceClass, t, seed: int = 0, tries: int = 200):
    """A twist vector whose degeneration is typical and divergent."""
    rng = random.Random(seed)
    cyls = cls.cylinders
    tw = twist_space(dec, cyls, t)
    if tw.dim == 0:
        raise NoDegeneration("the twist space is trivial")
    pairs = [(a, b) for k, a in enumerate(cyls) for b in cyls[k + 1 :] if not height_ratio_constant(dec, a, b, tw)]
    sigma = standard_deformation(dec, cyls)
    if not t.contains(sigma):
        raise NoDegeneration("the standard deformation is not in T")
    hs = {c: dec.cylinders[c].height for c in cyls}
    for attempt in range(tries):
        span = 3 + attempt // 20
        beta = [Fraction(rng.randint(-span, span)) for _ in range(tw.dim)]
        if attempt == 0 and tw.dim == 1:
            beta = [Fraction(1)]
        c_coef = [sum((b * row[k] for b, row in zip(beta, tw.coefficients)), Fraction(0)) for k in range(len(cyls))]
        if all(x <= 0 for x in c_coef):
            if all(x >= 0 for x in c_coef):
                continue
            beta = [-b for b in beta]
            c_coef = [-x for x in c_coef]
        val = dict(zip(cyls, c_coef))
        if any(val[a] * hs[b] == val[b] * hs[a] for a, b in pairs):
            continue
        coeffs = [QI(0, -x) for x in c_coef]
        t_v, coll = collapse_time(dec, cyls, coeffs)
        d = coll[0]
        shear = -dec.cylinders[d].twist / (t_v * hs[d])
        coeffs = [QI(shear * hs[c], -x) for c, x in zip(cyls, c_coef)]
        vec_ = [QI(shear * s, -sum((b * u[e] for b, u in zip(beta, tw.basis)), Fraction(0))) for e, s in enumerate(sigma)]
        return TypicalVector(vec_, coeffs, t_v, coll)
    raise NoDegeneration("no typical vector found")


def free_marked_points(surface, t) -> list[int]:
    cx = t.complex
    return [p for p in surface.marked_points if t.contains(cx.vertex_coboundary(p))]
