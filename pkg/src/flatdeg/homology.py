"""Relative homology and cohomology of a polygon surface.

Chains live on the glued edge classes (one coordinate per class, oriented
like its representative half-edge). Since every polygon vertex belongs to
the distinguished set, a relative cocycle is any edge vector vanishing on
every face boundary, and H^1(X, Sigma) is exactly that space.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import cached_property

from . import linalg as la
from .errors import DimensionMismatch, FlatError, InvolutionMismatch
from .linalg import QI


class CellComplex:
    def __init__(self, surface):
        self.surface = surface
        self.n_edges = len(surface.edge_classes)
        self.n_faces = len(surface.polygons)
        self.n_vertices = surface.n_vertices

    @cached_property
    def face_boundaries(self) -> list[list[Fraction]]:
        rows = []
        for p, poly in enumerate(self.surface.polygons):
            row = [Fraction(0)] * self.n_edges
            for i in range(len(poly)):
                e, sg = self.surface.edge_index[(p, i)]
                row[e] += sg
            rows.append(row)
        return rows

    @cached_property
    def face_words(self) -> list[list[tuple[int, int]]]:
        """Boundary of each face as (edge class, sign) in counterclockwise order."""
        return [
            [self.surface.edge_index[(p, i)] for i in range(len(poly))]
            for p, poly in enumerate(self.surface.polygons)
        ]

    @cached_property
    def edge_endpoints(self) -> list[tuple[int, int]]:
        s = self.surface
        out = []
        for p, i in s.edge_classes:
            n = len(s.polygons[p])
            out.append((s.vertex_of[(p, i)], s.vertex_of[(p, (i + 1) % n)]))
        return out

    @cached_property
    def edge_component(self) -> list[int]:
        return [self.surface.poly_component[p] for p, _ in self.surface.edge_classes]

    def boundary1(self, chain) -> list[Fraction]:
        out = [Fraction(0)] * self.n_vertices
        for e, c in enumerate(chain):
            if c != 0:
                a, b = self.edge_endpoints[e]
                out[b] += c
                out[a] -= c
        return out

    @cached_property
    def cocycle_basis(self) -> list[list[Fraction]]:
        """Basis of H^1(X, Sigma; Q) as edge vectors."""
        return la.nullspace(self.face_boundaries, self.n_edges)

    @property
    def dim_h1(self) -> int:
        return len(self.cocycle_basis)

    def is_cocycle(self, u) -> bool:
        return all(la.dot(u, f) == 0 for f in self.face_boundaries)

    @cached_property
    def absolute_cycles(self) -> list[list[Fraction]]:
        """Closed chains giving a basis of H_1(X; Q)."""
        rows = [[Fraction(0)] * self.n_edges for _ in range(self.n_vertices)]
        for e, (a, b) in enumerate(self.edge_endpoints):
            rows[b][e] += 1
            rows[a][e] -= 1
        z1 = la.nullspace(rows, self.n_edges)
        span = la.span_basis(self.face_boundaries)
        r = len(span)
        out = []
        for z in z1:
            trial = span + [z]
            if la.rank(trial) > r:
                span = la.span_basis(trial)
                r += 1
                out.append(z)
        return out

    @cached_property
    def kernel_p(self) -> list[list[Fraction]]:
        """Basis of the purely relative classes: coboundaries of vertex indicators."""
        out = []
        for comp in range(self.surface.n_components):
            vs = [v for v in range(self.n_vertices) if self.surface.vertex_component(v) == comp]
            for v in vs[1:]:
                out.append(self.vertex_coboundary(v))
        return out

    def vertex_coboundary(self, v: int) -> list[Fraction]:
        u = [Fraction(0)] * self.n_edges
        for e, (a, b) in enumerate(self.edge_endpoints):
            if b == v:
                u[e] += 1
            if a == v:
                u[e] -= 1
        return u

    def p_matrix_row(self, u) -> list:
        """Image of a cocycle in H^1(X): its values on the absolute cycle basis."""
        return [la.dot(u, z) for z in self.absolute_cycles]

    def in_ker_p(self, u) -> bool:
        return all(x == 0 for x in self.p_matrix_row(u))

    def pairing(self, u, w):
        """Intersection pairing <p(u), p(w)> (face-by-face primitive formula)."""
        if len(u) != self.n_edges or len(w) != self.n_edges:
            raise DimensionMismatch("cocycles do not match the complex")
        total = 0
        for word in self.face_words:
            acc_u = 0
            for e, sg in word:
                we = w[e]
                if we != 0 and acc_u != 0:
                    total = total + acc_u * we * sg
                ue = u[e]
                if ue != 0:
                    acc_u = acc_u + ue * sg
            acc_w = 0
            for e, sg in word:
                ue = u[e]
                if ue != 0 and acc_w != 0:
                    total = total - acc_w * ue * sg
                we = w[e]
                if we != 0:
                    acc_w = acc_w + we * sg
        return total / 2

    def pairing_matrix(self, basis) -> list[list]:
        return [[self.pairing(a, b) for b in basis] for a in basis]

    def period_parts(self) -> tuple[list[Fraction], list[Fraction]]:
        re, im = [], []
        for p, i in self.surface.edge_classes:
            x, y = self.surface.edge_vector(p, i)
            re.append(x)
            im.append(y)
        return re, im

    def chain_of_half_edge(self, p: int, i: int) -> list[Fraction]:
        e, sg = self.surface.edge_index[(p, i)]
        out = [Fraction(0)] * self.n_edges
        out[e] = Fraction(sg)
        return out

    def edge_name(self, e: int) -> str:
        p, i = self.surface.edge_classes[e]
        return f"{p}.{i}"


def cell_complex(surface) -> CellComplex:
    return CellComplex(surface)


def period_class(surface) -> list[QI]:
    re, im = CellComplex(surface).period_parts()
    return [QI(a, b) for a, b in zip(re, im)]


def projection_p(surface):
    """Matrix of p on the cocycle basis (rows) and a basis of ker p."""
    cx = CellComplex(surface)
    mat = [cx.p_matrix_row(b) for b in cx.cocycle_basis]
    return mat, cx.kernel_p


def symplectic_pairing(u, w, surface):
    return CellComplex(surface).pairing(u, w)


def evaluate(u, chain):
    return la.dot(u, chain)


# ---------------------------------------------------------------------------
# involutions on the complex


def involution_edge_map(surface, inv) -> list[tuple[int, int]]:
    """For each edge class e: (J(e), sign) with J_* e = sign * J(e)."""
    out = []
    for p, i in surface.edge_classes:
        q, j = inv.half_edge((p, i))
        out.append(surface.edge_index[(q, j)])
    for e, (f, sg) in enumerate(out):
        g, sg2 = out[f]
        if g != e or sg * sg2 != 1:
            raise InvolutionMismatch("the map on edges is not an involution")
    for p, i in surface.edge_classes:
        q, j = inv.half_edge((p, i))
        if surface.edge_vector(q, j) != tuple(-x for x in surface.edge_vector(p, i)):
            raise InvolutionMismatch("the involution does not negate holonomy")
        pp, ii = surface.partner[p][i]
        if inv.half_edge((pp, ii)) != surface.partner[q][j]:
            raise InvolutionMismatch("the involution does not respect the gluing")
    return out


def pullback_involution(u, edge_map) -> list:
    return [sg * u[f] for f, sg in edge_map]


# ---------------------------------------------------------------------------
# serialization


def cocycle_to_json(u, surface) -> dict[str, str]:
    cx = CellComplex(surface)
    return {cx.edge_name(e): la.format_qi(x) for e, x in enumerate(u) if x != 0}


def cocycle_from_json(data: dict, surface) -> list[QI]:
    u = [QI(0) for _ in surface.edge_classes]
    for key, val in data.items():
        try:
            p, i = (int(x) for x in str(key).split("."))
            e, sg = surface.edge_index[(p, i)]
        except (ValueError, KeyError) as exc:
            raise FlatError(f"unknown edge id {key!r}") from exc
        u[e] = u[e] + la.parse_qi(str(val)) * sg
    return u


def dumps_cocycles(vectors, surface) -> str:
    return json.dumps([cocycle_to_json(u, surface) for u in vectors], sort_keys=True)
