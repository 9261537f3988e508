"""Tangent spaces of invariant subvarieties as subspaces of H^1(X, Sigma; C).

Every space handled here is defined over Q, so it is stored as a rational
basis whose complex span is the space. Dimensions are complex dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations

from . import linalg as la
from .errors import InvalidTangentSpace, NotProduct
from .homology import CellComplex, involution_edge_map, pullback_involution
from .linalg import QI


class TangentSpace:
    def __init__(self, surface, basis, check: bool = True):
        self.surface = surface
        self.complex = CellComplex(surface)
        n = self.complex.n_edges
        vecs = [[Fraction(x) for x in b] for b in basis]
        for b in vecs:
            if len(b) != n:
                raise InvalidTangentSpace("basis vector has the wrong length")
        self.basis = la.span_basis(vecs) if vecs else []
        if check:
            self.validate()

    @staticmethod
    def from_complex(surface, vectors) -> "TangentSpace":
        """Accept Gaussian-rational vectors; the space must be defined over Q."""
        re, im = [], []
        for v in vectors:
            z = [QI.coerce(x) for x in v]
            re.append([x.re for x in z])
            im.append([x.im for x in z])
        cspan = la.rank([[QI.coerce(x) for x in v] for v in vectors]) if vectors else 0
        t = TangentSpace(surface, re + im, check=False)
        if t.dim != cspan:
            raise InvalidTangentSpace("the subspace is not defined over Q")
        t.validate()
        return t

    def validate(self) -> None:
        cx = self.complex
        for b in self.basis:
            if not cx.is_cocycle(b):
                raise InvalidTangentSpace("basis vector is not a relative cocycle")
        re, im = cx.period_parts()
        if not (self.contains(re) and self.contains(im)):
            raise InvalidTangentSpace("the space does not contain the period class")

    # membership ------------------------------------------------------------
    def contains(self, u) -> bool:
        """Membership of a rational or Gaussian-rational cocycle."""
        if any(isinstance(x, QI) for x in u):
            z = [QI.coerce(x) for x in u]
            return la.in_span(self.basis, [x.re for x in z]) and la.in_span(self.basis, [x.im for x in z])
        return la.in_span(self.basis, u)

    def coordinates(self, u):
        return la.solve_left(self.basis, u)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def rel_basis(self) -> list[list[Fraction]]:
        """Basis of T ∩ ker p."""
        return la.intersect(self.basis, self.complex.kernel_p, self.complex.n_edges)

    @property
    def rel(self) -> int:
        return len(self.rel_basis)

    @cached_property
    def rank(self) -> int:
        p = [self.complex.p_matrix_row(b) for b in self.basis]
        r = la.rank(p) if p else 0
        return r // 2

    @cached_property
    def pairing_matrix(self):
        return self.complex.pairing_matrix(self.basis)

    def symplectic_rank(self) -> int:
        """Half the rank of the pairing restricted to T (must equal rank)."""
        return (la.rank(self.pairing_matrix) if self.basis else 0) // 2

    def annihilator_of(self, chains) -> "TangentSpace":
        """T ∩ Ann(chains)."""
        if not chains:
            return self
        rows = la.restrict(chains, self.basis)
        ker = la.nullspace(rows, self.dim)
        vecs = [la.combo(k, self.basis, self.complex.n_edges) for k in ker]
        return TangentSpace(self.surface, vecs, check=False)

    def sub(self, vectors) -> "TangentSpace":
        return TangentSpace(self.surface, vectors, check=False)

    def __repr__(self):
        return f"TangentSpace(dim={self.dim}, rank={self.rank}, rel={self.rel})"


def stratum_tangent(surface) -> TangentSpace:
    return TangentSpace(surface, CellComplex(surface).cocycle_basis)


def quadratic_double_tangent(cover, involution) -> TangentSpace:
    """Anti-invariant cocycles of the deck involution."""
    cx = CellComplex(cover)
    emap = involution_edge_map(cover, involution)
    n = cx.n_edges
    rows = [list(f) for f in cx.face_boundaries]
    # u(J e) + u(e) = 0 for every edge class e
    for e, (f, sg) in enumerate(emap):
        row = [Fraction(0)] * n
        row[e] += 1
        row[f] += sg
        rows.append(row)
    return TangentSpace(cover, la.nullspace(rows, n))


def rank(t: TangentSpace) -> int:
    return t.rank


def rel(t: TangentSpace) -> int:
    return t.rel


def riemann_hurwitz_bound(g: int) -> int:
    """Largest genus of the base of a nontrivial translation cover of genus g."""
    return (g + 1) // 2


def is_high_rank(t: TangentSpace) -> bool:
    if t.surface.n_components != 1:
        raise InvalidTangentSpace("high rank is defined for connected surfaces")
    g = t.surface.genus()[0]
    return 2 * t.rank >= g + 2


def exceeds_easy_bound(t: TangentSpace) -> bool:
    """rank > (g + s - 1)/2 with s the number of zeros (meaningful when rel is 0)."""
    g = t.surface.genus()[0]
    s = len(t.surface.zeros)
    return 2 * t.rank > g + s - 1


# ---------------------------------------------------------------------------
# products


@dataclass
class PrimeFactorization:
    blocks: list[tuple[int, ...]]
    spaces: list[TangentSpace]
    ranks: list[int]


def component_projection(t: TangentSpace, comps) -> list[list[Fraction]]:
    cx = t.complex
    keep = [cx.edge_component[e] in comps for e in range(cx.n_edges)]
    return [[x if keep[e] else Fraction(0) for e, x in enumerate(b)] for b in t.basis]


def sub_surface(surface, comps):
    """The union of some components, with the edge-class index map."""
    from .surface import TranslationSurface

    polys = [p for p in range(len(surface.polygons)) if surface.poly_component[p] in comps]
    new = {p: k for k, p in enumerate(polys)}
    partner = tuple(tuple((new[q], j) for q, j in surface.partner[p]) for p in polys)
    comp_ids = sorted(set(comps))
    sub = TranslationSurface(
        tuple(surface.polygons[p] for p in polys),
        partner,
        tuple(surface.names[c] for c in comp_ids),
        tuple(comp_ids.index(surface.poly_component[p]) for p in polys),
    )
    emap = []
    for p, i in sub.edge_classes:
        emap.append(surface.edge_index[(polys[p], i)])
    return sub, emap


def restrict_to(t: TangentSpace, comps) -> TangentSpace:
    sub, emap = sub_surface(t.surface, comps)
    vecs = [[b[e] * sg for e, sg in emap] for b in t.basis]
    return TangentSpace(sub, vecs, check=False)


def prime_factorization(t: TangentSpace) -> PrimeFactorization:
    m = t.surface.n_components
    cx = t.complex
    for b in t.basis:
        if not cx.is_cocycle(b):
            raise NotProduct("the space is not inside the cohomology of the components")
    splitting = []
    for r in range(1, m):
        for sub in combinations(range(m), r):
            if all(t.contains(v) for v in component_projection(t, set(sub))):
                splitting.append(set(sub))
    # atoms: components no splitting set separates
    blocks: list[list[int]] = []
    for c in range(m):
        for blk in blocks:
            d = blk[0]
            if all((c in s) == (d in s) for s in splitting):
                blk.append(c)
                break
        else:
            blocks.append([c])
    spaces, ranks = [], []
    for blk in blocks:
        space = restrict_to(t, set(blk))
        per = [restrict_to(t, {c}).rank for c in blk]
        if len(set(per)) > 1:
            raise NotProduct(f"components {blk} of one prime factor have different ranks {per}")
        spaces.append(space)
        ranks.append(space.rank)
    return PrimeFactorization([tuple(b) for b in blocks], spaces, ranks)


def is_prime(t: TangentSpace) -> bool:
    return len(prime_factorization(t).blocks) == 1
