"""Cylinder collapse, boundary tangent spaces and the degeneration dichotomy.

Everything happens in the horizontal frame of a decomposition. A collapsing
cylinder with twist x' at the collapse time identifies the point at bottom
position X with the point at top position X - x'. Intervals on the tops of
the surviving cylinders are chased upward through collapsing cylinders until
they land on the bottom of a surviving one; the resulting pieces are the
saddle connections of the limit, which is again a cylinder form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from . import linalg as la
from .cylinders import (
    CylinderForm,
    Decomposition,
    _cylinder_data,
    build_cylinder_surface,
    collapse_time,
    cylinder_is_generic,
    form_components,
    standard_deformation,
)
from .errors import (
    DichotomyViolation,
    FlatError,
    NotDivergent,
    TrappedChase,
    WholeSurface,
)
from .homology import CellComplex
from .linalg import QI
from .surface import apply_gl2, rotation_from_horizontal
from .tangent import TangentSpace, prime_factorization


@dataclass
class Piece:
    """A limit saddle connection: an interval chased from a surviving top to a surviving bottom."""

    index: int
    length: Fraction
    start_cyl: int
    end_cyl: int
    levels: list[tuple[int, Fraction, Fraction]]
    collapsed: list[int]


def _chase(form: CylinderForm, collapsing: set[int], twists: dict[int, Fraction]) -> list[Piece]:
    lengths, cyl = form.lengths, form.cyl
    above, below = _cylinder_data(lengths, cyl)
    circ = [sum((lengths[s] for s in c[2]), Fraction(0)) for c in cyl]
    top_offsets = {}
    for ci, (_, _, _, top) in enumerate(cyl):
        off = Fraction(0)
        for s in top:
            top_offsets[s] = off
            off += lengths[s]
    bound = 4 * len(cyl) + 4
    pieces: list[Piece] = []

    def go(start, levels, through, s, u0, u1):
        levels = levels + [(s, u0, u1)]
        b, off = above[s]
        if b not in collapsing:
            pieces.append(Piece(len(pieces), u1 - u0, start, b, levels, through))
            return
        if len(through) >= bound:
            raise TrappedChase("a chase keeps circling through collapsing cylinders")
        c = circ[b]
        y0 = (off + u0 - twists[b]) % c
        y1 = y0 + (u1 - u0)
        parts = []
        for k in cyl[b][3]:
            for shift in (Fraction(0), c):
                a = top_offsets[k] + shift
                lo, hi = max(a, y0), min(a + lengths[k], y1)
                if lo < hi:
                    parts.append((lo, k, lo - a, hi - a))
        for _, k, w0, w1 in sorted(parts):
            go(start, levels, through + [b], k, w0, w1)

    for ci, (_, _, _, top) in enumerate(cyl):
        if ci in collapsing:
            continue
        for s in top:
            go(ci, [], [], s, Fraction(0), lengths[s])
    return pieces


@dataclass
class ChaseLimit:
    form: CylinderForm
    pieces: list[Piece]
    survivors: list[int]
    surface: object
    bottom_he: dict
    top_he: dict
    right_he: dict
    new_index: dict[int, int]


def _limit_from_pieces(form: CylinderForm, pieces, collapsing, heights, twists) -> ChaseLimit:
    lengths, cyl = form.lengths, form.cyl
    above, below = _cylinder_data(lengths, cyl)
    bottom_off = {s: above[s][1] for s in lengths}
    top_off = {s: below[s][1] for s in lengths}
    survivors = [ci for ci in range(len(cyl)) if ci not in collapsing]
    new_index = {ci: k for k, ci in enumerate(survivors)}
    bots: dict[int, list] = {ci: [] for ci in survivors}
    tops: dict[int, list] = {ci: [] for ci in survivors}
    for p in pieces:
        s0, u0, _ = p.levels[0]
        tops[p.start_cyl].append((top_off[s0] + u0, p.index))
        s1, w0, _ = p.levels[-1]
        bots[p.end_cyl].append((bottom_off[s1] + w0, p.index))
    new_cyl = []
    for ci in survivors:
        b = tuple(i for _, i in sorted(bots[ci]))
        t = tuple(i for _, i in sorted(tops[ci]))
        new_cyl.append((heights[ci], twists[ci], b, t))
    plen = {p.index: p.length for p in pieces}
    surf, bhe, the, rhe = build_cylinder_surface(plen, new_cyl)
    lim_form = CylinderForm(plen, new_cyl)
    return ChaseLimit(lim_form, pieces, survivors, surf, bhe, the, rhe, new_index)


def _pushforward(form: CylinderForm, lim: ChaseLimit, collapsing, twists) -> list[list[Fraction]]:
    """Matrix of the collapse map: one limit chain per edge class of the cylinder complex."""
    src, s_bhe, _, s_rhe = form.built
    dst = lim.surface
    n = len(dst.edge_classes)
    circ = [sum((form.lengths[s] for s in c[2]), Fraction(0)) for c in form.cyl]
    _, below = _cylinder_data(form.lengths, form.cyl)

    def piece_chain(p, coef=Fraction(1)):
        e, sg = dst.edge_index[lim.bottom_he[p]]
        out = [Fraction(0)] * n
        out[e] = coef * sg
        return out

    occ: dict[int, list] = {}
    for p in lim.pieces:
        for s, u0, u1 in p.levels:
            occ.setdefault(s, []).append((p.index, u0, u1))
    rows: list = [None] * len(src.edge_classes)
    for s, he in s_bhe.items():
        e, sg = src.edge_index[he]
        acc = [Fraction(0)] * n
        for pi, _, _ in occ.get(s, ()):
            acc = la.add(acc, piece_chain(pi))
        rows[e] = la.scale(Fraction(sg), acc)
    for ci, he in s_rhe.items():
        e, sg = src.edge_index[he]
        if ci not in collapsing:
            f, fsg = dst.edge_index[lim.right_he[lim.new_index[ci]]]
            acc = [Fraction(0)] * n
            acc[f] = Fraction(fsg)
        else:
            x = twists[ci]
            c = circ[ci]
            a, b, sign = (-x, Fraction(0), 1) if x >= 0 else (Fraction(0), -x, -1)
            acc = [Fraction(0)] * n
            for k in form.cyl[ci][3]:
                for pi, w0, w1 in occ.get(k, ()):
                    pos = below[k][1] + w0
                    ln = w1 - w0
                    m_lo = math.ceil((a - pos) / c)
                    m_hi = math.floor((b - ln - pos) / c)
                    cnt = m_hi - m_lo + 1
                    if cnt > 0:
                        acc = la.add(acc, piece_chain(pi, Fraction(sign * cnt)))
        rows[e] = la.scale(Fraction(sg), acc)
    return rows


@dataclass
class GraphEdge:
    piece: int
    tail: int
    head: int
    weight: Fraction
    length: Fraction


@dataclass
class DegenerationResult:
    decomposition: Decomposition
    cylinders: tuple[int, ...]
    coefficients: list[QI]
    t_v: Fraction
    collapsing: tuple[int, ...]
    limit: object
    limit_frame: object
    pieces: list[Piece]
    pushforward: list[list[Fraction]] = field(repr=False)
    vanishing: list[list[Fraction]] = field(repr=False)
    tangent: TangentSpace | None = None
    boundary: TangentSpace | None = None
    pullback: list[list[Fraction]] = field(default_factory=list, repr=False)
    graph: list[GraphEdge] = field(default_factory=list)
    divergent: bool = True
    chase: ChaseLimit | None = field(default=None, repr=False)

    @property
    def graph_vertices(self) -> list[int]:
        vs = set()
        for e in self.graph:
            vs.update((e.tail, e.head))
        return sorted(vs)

    def digraph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.graph_vertices)
        for e in self.graph:
            g.add_edge(e.tail, e.head, key=e.piece, weight=e.weight)
        return g


def vanishing_cycles(form: CylinderForm, limit_surface, rows, original_complex: CellComplex):
    """Basis of the kernel of a collapse map on relative homology, as original chains.

    ``rows`` gives, for each edge class of the cylinder complex of ``form``,
    its image as a chain on ``limit_surface``.
    """
    src = form.surface
    n_src = len(src.edge_classes)
    dst_faces = CellComplex(limit_surface).face_boundaries
    # z in the cylinder complex and c over limit faces with F z = sum c_F dF
    cols = [list(r) for r in rows] + [[-x for x in f] for f in dst_faces]
    mat = la.transpose(cols, len(cols))
    ker = la.nullspace(mat, len(cols))
    phi = form.phi
    chains = []
    for k in ker:
        chains.append(la.combo(k[:n_src], phi, original_complex.n_edges))
    base = la.span_basis(original_complex.face_boundaries)
    r = len(base)
    out = []
    for ch in chains:
        trial = base + [ch]
        if la.rank(trial) > r:
            base = la.span_basis(trial)
            r += 1
            out.append(ch)
    return out


def _pull_back(form: CylinderForm, rows, u) -> list[Fraction]:
    return form.push([la.dot(u, r) for r in rows])


def collapse(
    dec: Decomposition,
    cylinders,
    coefficients,
    t: TangentSpace | None = None,
    strict: bool = False,
) -> DegenerationResult:
    """Collapse the class along v = sum a_C gamma_C^* (coefficients in the frame)."""
    cylinders = tuple(cylinders)
    coefficients = [QI.coerce(a) for a in coefficients]
    t_v, coll = collapse_time(dec, cylinders, coefficients)
    form = dec.cylinder_surface
    collapsing = set(coll)
    for comp in form_components(form.lengths, form.cyl):
        if all(c in collapsing for c in comp):
            raise WholeSurface("the collapsing cylinders cover a whole component")
    heights, twists = {}, {}
    for ci, (h, x, _, _) in enumerate(form.cyl):
        heights[ci], twists[ci] = h, x
    for c, a in zip(cylinders, coefficients):
        heights[c] = heights[c] + t_v * a.im
        twists[c] = twists[c] + t_v * a.re
    pieces = _chase(form, collapsing, twists)
    lim = _limit_from_pieces(form, pieces, collapsing, heights, twists)
    rows = _pushforward(form, lim, collapsing, twists)
    cx = dec.complex
    V = vanishing_cycles(form, lim.surface, rows, cx)
    limit_frame = lim.surface
    d = dec.direction
    limit = limit_frame if d == (1, 0) else apply_gl2(limit_frame, rotation_from_horizontal(d))
    graph = []
    for p in pieces:
        if not p.collapsed:
            continue
        he = lim.bottom_he[p.index]
        poly, i = he
        tail = limit_frame.vertex_of[he]
        head = limit_frame.vertex_of[(poly, (i + 1) % len(limit_frame.polygons[poly]))]
        w = sum((form.cyl[c][0] for c in p.collapsed), Fraction(0))
        graph.append(GraphEdge(p.index, tail, head, w, p.length))
    res = DegenerationResult(
        dec, cylinders, coefficients, t_v, coll, limit, limit_frame, pieces, rows, V, graph=graph,
        divergent=bool(V), chase=lim,
    )
    if not V and strict:
        raise NotDivergent("the path stays in the stratum")
    if t is not None:
        _attach_tangent(res, form, lim, t)
    return res


def _attach_tangent(res: DegenerationResult, form: CylinderForm, lim: ChaseLimit, t: TangentSpace) -> None:
    res.boundary, res.tangent, res.pullback = boundary_tangent(form, res.pushforward, res.limit, res.vanishing, t)


def boundary_tangent(form: CylinderForm, rows, limit, vanishing, t: TangentSpace):
    """(Ann(V) ∩ T upstairs, the same space on the limit, pullbacks of the limit basis)."""
    lcx = CellComplex(limit)
    lbasis = lcx.cocycle_basis
    pulled = [_pull_back(form, rows, u) for u in lbasis]
    if la.rank(pulled) != len(lbasis):
        raise FlatError("the collapse map is not surjective on relative homology")
    boundary = t.annihilator_of(vanishing)
    # limit classes whose pullback lies in T
    cols = pulled + [la.scale(-1, b) for b in t.basis]
    ker = la.nullspace(la.transpose(cols, len(cols)), len(cols)) if cols else []
    ys = [k[: len(pulled)] for k in ker]
    limit_vectors = la.span_basis([la.combo(y, lbasis, lcx.n_edges) for y in ys]) if ys else []
    tangent = TangentSpace(limit, limit_vectors, check=True)
    if tangent.dim != boundary.dim:
        raise FlatError("boundary tangent space dimensions disagree")
    return boundary, tangent, [_pull_back(form, rows, u) for u in tangent.basis]


# ---------------------------------------------------------------------------
# dichotomy


@dataclass
class RankReducing:
    certificate: list[Fraction] | None
    rank_before: int
    rank_after: int
    conditional: bool
    failures: list[str] = field(default_factory=list)

    verdict = "rank_reducing"


@dataclass
class RankPreserving:
    components: list[list[int]]
    balance: dict[int, Fraction]
    rank_before: int
    rank_after: int
    conditional: bool
    failures: list[str] = field(default_factory=list)

    verdict = "rank_preserving"


def _certificate_system(res: DegenerationResult):
    tan = res.tangent
    cx = tan.complex
    rows, rhs = [], []
    for e in res.graph:
        ei, sg = res.limit_frame.edge_index[_piece_half_edge(res, e.piece)]
        rows.append([b[ei] * sg for b in tan.basis])
        rhs.append(e.length)
    for z in cx.absolute_cycles:
        rows.append([la.dot(b, z) for b in tan.basis])
        rhs.append(Fraction(0))
    return rows, rhs


def rel_certificate(res: DegenerationResult):
    """A purely relative class of the boundary space equal to the edge holonomies, or None.

    Free variables of the system are set to zero, so the choice is fixed by
    the basis of the boundary space when several certificates exist.
    """
    tan = res.tangent
    rows, rhs = _certificate_system(res)
    y = la.solve(rows, rhs, tan.dim) if tan.dim else None
    if y is None:
        return None
    return la.combo(y, tan.basis, tan.complex.n_edges)


def certificate_is_unique(res: DegenerationResult) -> bool:
    rows, _ = _certificate_system(res)
    return la.rank(rows) == res.tangent.dim if rows else res.tangent.dim == 0


def _piece_half_edge(res: DegenerationResult, piece: int):
    return res.chase.bottom_he[piece]


def is_acyclic(res: DegenerationResult) -> bool:
    return nx.is_directed_acyclic_graph(res.digraph())


def vertex_balance(res: DegenerationResult) -> dict[int, Fraction]:
    """Outgoing minus incoming weight at each graph vertex."""
    bal = {v: Fraction(0) for v in res.graph_vertices}
    for e in res.graph:
        bal[e.tail] += e.weight
        bal[e.head] -= e.weight
    return bal


def strongly_connected_pieces(res: DegenerationResult):
    g = res.digraph()
    comps = [sorted(c) for c in nx.strongly_connected_components(g)]
    where = {v: k for k, c in enumerate(comps) for v in c}
    ok = all(where[e.tail] == where[e.head] for e in res.graph)
    return ok, sorted(comps)


def classify_dichotomy(res: DegenerationResult, t: TangentSpace, conditional: bool = False):
    """Rank-reducing with a rel-scalability certificate, or rank-preserving with strong connectivity.

    The verdict is conditional when the caller says so (class genericity not
    established) or when some collapsed cylinder is not generic. Failed checks
    raise DichotomyViolation, except for conditional verdicts, where they are
    listed in ``failures``.
    """
    if res.tangent is None:
        raise FlatError("the degeneration has no boundary tangent space attached")
    dec = res.decomposition
    conditional = conditional or not all(cylinder_is_generic(dec, c, t) for c in res.cylinders)
    failures: list[str] = []

    def fail(msg):
        if not conditional:
            raise DichotomyViolation(msg)
        failures.append(msg)

    before, after = t.rank, res.tangent.rank
    if after < before:
        if after != before - 1:
            fail(f"rank dropped by {before - after}")
        if set(res.collapsing) != set(res.cylinders):
            fail("rank-reducing collapse does not collapse the whole class")
        if not is_acyclic(res):
            fail("rank-reducing collapse has a directed cycle")
        cert = rel_certificate(res)
        if cert is None:
            fail("no rel-scalability certificate exists")
        return RankReducing(cert, before, after, conditional, failures)
    if after > before:
        fail("rank increased")
    ok, comps = strongly_connected_pieces(res)
    if not ok:
        fail("rank-preserving collapse graph is not strongly connected")
    bal = vertex_balance(res)
    if any(x != 0 for x in bal.values()):
        fail("vertex weights do not balance")
    return RankPreserving(comps, bal, before, after, conditional, failures)


def is_rank_reducing_by_cycles(res: DegenerationResult, t: TangentSpace) -> bool:
    """Some vanishing cycle is nonzero on T but zero on the rel part of T."""
    rel = t.rel_basis
    for z in _vanishing_combinations(res, t):
        on_t = any(la.dot(b, z) != 0 for b in t.basis)
        on_rel = any(la.dot(r, z) != 0 for r in rel)
        if on_t and not on_rel:
            return True
    return False


def _vanishing_combinations(res: DegenerationResult, t: TangentSpace):
    """Vanishing cycles adjusted to kill the rel part when possible."""
    V = res.vanishing
    rel = t.rel_basis
    if not V:
        return []
    # the subspace of V on which every rel class vanishes
    rows = [[la.dot(r, z) for z in V] for r in rel]
    ker = la.nullspace(rows, len(V)) if rows else [la.unit(len(V), i) for i in range(len(V))]
    n = len(V[0])
    return [la.combo(k, V, n) for k in ker]


def absolute_decomposition_holds(res: DegenerationResult, t: TangentSpace) -> bool:
    """p(T) = p(T_b) + C p(sigma), direct when reducing and p(T) = p(T_b) otherwise."""
    cx = t.complex
    pt = [cx.p_matrix_row(b) for b in t.basis]
    pb = [cx.p_matrix_row(b) for b in res.boundary.basis]
    sigma = standard_deformation(res.decomposition, res.cylinders)
    ps = cx.p_matrix_row(sigma)
    r_t, r_b = la.rank(pt), la.rank(pb) if pb else 0
    r_sum = la.rank(pb + [ps])
    reducing = res.tangent.rank < t.rank
    if reducing:
        return r_sum == r_t and r_b + 1 == r_t and la.rank(pt + pb + [ps]) == r_t
    return r_b == r_t


def pairing_restricts(res: DegenerationResult) -> bool:
    """The pairing on the limit equals the pairing of the pulled-back classes."""
    lcx = res.tangent.complex
    ucx = res.decomposition.complex
    b, u = res.tangent.basis, res.pullback
    for i in range(len(b)):
        for j in range(i + 1, len(b)):
            if lcx.pairing(b[i], b[j]) != ucx.pairing(u[i], u[j]):
                return False
    return True


def boundary_is_prime(res: DegenerationResult) -> bool:
    return len(prime_factorization(res.tangent).blocks) == 1


# ---------------------------------------------------------------------------
# first-return collapse onto a cylinder


def collapse_complement_onto(dec: Decomposition, h: int):
    """Collapse every cylinder except H along vertical leaves.

    Each point on the top of H is glued to the point where the northward leaf
    first returns to the bottom of H. Returns the surface in the original
    orientation.
    """
    form = dec.cylinder_surface
    collapsing = {ci for ci in range(len(form.cyl)) if ci != h}
    comps = form_components(form.lengths, form.cyl)
    comp_h = next(c for c in comps if h in c)
    collapsing = {ci for ci in collapsing if ci in comp_h}
    heights = {ci: c[0] for ci, c in enumerate(form.cyl)}
    twists = {ci: c[1] for ci, c in enumerate(form.cyl)}
    keep_form = CylinderForm(form.lengths, form.cyl)
    pieces = _chase(keep_form, collapsing, twists)
    pieces = [p for p in pieces if p.start_cyl == h]
    for k, p in enumerate(pieces):
        p.index = k
    lim = _limit_from_pieces(keep_form, pieces, collapsing | (set(range(len(form.cyl))) - set(comp_h)), heights, twists)
    d = dec.direction
    s = lim.surface
    return s if d == (1, 0) else apply_gl2(s, rotation_from_horizontal(d))


# ---------------------------------------------------------------------------
# DOT export


def export_graph(res: DegenerationResult, verdict=None) -> str:
    """DOT text with vertices and edges in a fixed order and weights as labels."""
    lines = ["digraph collapse {"]
    if isinstance(verdict, RankPreserving) and res.graph:
        bal = " ".join(f"v{v}:{w}" for v, w in sorted(_in_weights(res).items()))
        lines.append(f"  // balanced weights {bal}")
    for v in res.graph_vertices:
        lines.append(f'  v{v} [label="{v}"];')
    for e in sorted(res.graph, key=lambda e: (e.tail, e.head, e.piece)):
        lines.append(f'  v{e.tail} -> v{e.head} [label="{e.weight}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _in_weights(res: DegenerationResult) -> dict[int, Fraction]:
    out = {v: Fraction(0) for v in res.graph_vertices}
    for e in res.graph:
        out[e.head] += e.weight
    return out
