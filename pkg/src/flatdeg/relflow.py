"""Schiffer variations, real rel flows and double degenerations.

All flows here are horizontal: a real purely relative cocycle changes only
the lengths of horizontal saddle connections and the twists of horizontal
cylinders, so the surface stays in cylinder form until some saddle
connections reach length zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg as la
from .cylinders import CylinderForm, Decomposition, build_cylinder_surface, functional, proportionality
from .degeneration import (
    DegenerationResult,
    RankReducing,
    _pull_back,
    boundary_tangent,
    certificate_is_unique,
    classify_dichotomy,
    collapse,
    is_acyclic,
    vanishing_cycles,
)
from .errors import AssumptionFails, FlatError, NoCertificate, NotReducing, NotRel, StarNotEmbedded, StarsOverlap
from .homology import CellComplex
from .linalg import QI
from .surface import TranslationSurface, apply_gl2, rotation_from_horizontal
from .tangent import TangentSpace


# ---------------------------------------------------------------------------
# Schiffer variations


@dataclass
class SchifferData:
    """Displacements of the singular points, normalized to sum zero per component."""

    surface: TranslationSurface
    lam: list[QI]

    def difference(self, a: int, b: int) -> QI:
        return self.lam[b] - self.lam[a]


def _as_qi(u) -> list[QI]:
    return [QI.coerce(x) for x in u]


def lambda_from_rel(xi, surface: TranslationSurface) -> SchifferData:
    """Vertex displacements whose differences are the values of a purely relative class."""
    cx = CellComplex(surface)
    z = _as_qi(xi)
    if len(z) != cx.n_edges:
        raise NotRel("the cocycle does not match the surface")
    if not cx.is_cocycle(z) or not cx.in_ker_p(z):
        raise NotRel("the class has nonzero absolute periods")
    adj: dict[int, list] = {v: [] for v in range(cx.n_vertices)}
    for e, (a, b) in enumerate(cx.edge_endpoints):
        adj[a].append((b, z[e]))
        adj[b].append((a, -z[e]))
    lam: list = [None] * cx.n_vertices
    for comp in range(surface.n_components):
        vs = surface.vertices_of_component(comp)
        root = vs[0]
        lam[root] = QI(0)
        stack = [root]
        while stack:
            a = stack.pop()
            for b, val in adj[a]:
                if lam[b] is None:
                    lam[b] = lam[a] + val
                    stack.append(b)
        mean = sum((lam[v] for v in vs), QI(0)) / len(vs)
        for v in vs:
            lam[v] = lam[v] - mean
    for e, (a, b) in enumerate(cx.edge_endpoints):
        if lam[b] - lam[a] != z[e]:
            raise NotRel("vertex displacements are inconsistent with the class")
    return SchifferData(surface, lam)


def _real_schiffer(surface: TranslationSurface, lam: list[Fraction]):
    """Move the singular points east by real amounts; returns the new surface and vertex map."""
    dec = Decomposition(surface)
    lengths = {}
    for s in dec.saddle_connections:
        a, b = s.start, s.end
        east = max(lam[a], Fraction(0))
        west = max(-lam[b], Fraction(0))
        if east >= s.length or west >= s.length:
            raise StarNotEmbedded(f"a star segment covers saddle connection {s.index}")
        if east + west >= s.length:
            raise StarsOverlap(f"two star segments meet on saddle connection {s.index}")
        lengths[s.index] = s.length + lam[b] - lam[a]
    cyl = []
    for c in dec.cylinders:
        bottom_start = dec.saddle_connections[c.bottom[0]].start
        top_start = dec.saddle_connections[c.top[0]].start
        cyl.append((c.height, c.twist + lam[top_start] - lam[bottom_start], c.bottom, c.top))
    new, bottom_he, _, _ = build_cylinder_surface(lengths, cyl, surface.names, _cylinder_components(dec))
    vmap = {}
    for s in dec.saddle_connections:
        vmap[s.start] = new.vertex_of[bottom_he[s.index]]
    return new, vmap


def _cylinder_components(dec: Decomposition) -> list[int]:
    s = dec.frame
    out = []
    for c in dec.cylinders:
        sc = dec.saddle_connections[c.bottom[0]]
        out.append(s.vertex_component(sc.start))
    return out


_QUARTER = [[0, 1], [-1, 0]]
_QUARTER_BACK = [[0, -1], [1, 0]]


def schiffer(surface: TranslationSurface, lam) -> TranslationSurface:
    """Cut along the stars of the displacements and reglue.

    ``lam`` is a SchifferData or a list of complex displacements per vertex.
    The real part is applied in the horizontal direction, then the imaginary
    part in the vertical direction.
    """
    return schiffer_with_map(surface, lam)[0]


def schiffer_with_map(surface: TranslationSurface, lam):
    """The Schiffer variation and the map from old to new vertex indices."""
    if isinstance(lam, SchifferData):
        lam = lam.lam
    lam = _as_qi(lam)
    if len(lam) != surface.n_vertices:
        raise FlatError("one displacement per vertex is required")
    out = surface
    vmap = {v: v for v in range(surface.n_vertices)}
    if any(z.re != 0 for z in lam):
        out, step = _real_schiffer(surface, [z.re for z in lam])
        vmap = {v: step[w] for v, w in vmap.items()}
    if any(z.im != 0 for z in lam):
        moved: list = [None] * out.n_vertices
        for v, w in vmap.items():
            moved[w] = lam[v].im
        new, step = _real_schiffer(apply_gl2(out, _QUARTER), moved)
        out = apply_gl2(new, _QUARTER_BACK)
        vmap = {v: step[w] for v, w in vmap.items()}
    return out, vmap


# ---------------------------------------------------------------------------
# horizontal rel flow


@dataclass
class RelFlowResult:
    tau: Fraction | None
    limit: TranslationSurface | None
    vanishing: list[list[Fraction]] = field(repr=False)
    collapsing: tuple[int, ...]
    decomposition: Decomposition = field(repr=False)
    values: dict[int, Fraction] = field(repr=False)
    pushforward: list = field(default_factory=list, repr=False)
    tangent: TangentSpace | None = None
    boundary: TangentSpace | None = None
    pullback: list = field(default_factory=list, repr=False)

    @property
    def unbounded(self) -> bool:
        return self.tau is None


def _check_real_rel(xi, surface, t):
    cx = CellComplex(surface)
    z = _as_qi(xi)
    if len(z) != cx.n_edges:
        raise NotRel("the cocycle does not match the surface")
    if any(x.im != 0 for x in z):
        raise NotRel("the flow direction must be a real class")
    u = [x.re for x in z]
    if not cx.is_cocycle(u) or not cx.in_ker_p(u):
        raise NotRel("the class has nonzero absolute periods")
    if t is not None and not t.contains(u):
        raise NotRel("the class is not tangent to the subvariety")
    return u


def _flowed_form(dec: Decomposition, u, time: Fraction, drop_zero: bool):
    lengths = {}
    for s in dec.saddle_connections:
        ln = s.length - time * la.dot(u, s.chain)
        if ln < 0 or (ln == 0 and not drop_zero):
            raise FlatError("the flow has passed its limit")
        if ln > 0:
            lengths[s.index] = ln
    cyl = []
    for c in dec.cylinders:
        x = c.twist - time * la.dot(u, c.cross_chain)
        cyl.append((c.height, x, tuple(k for k in c.bottom if k in lengths), tuple(k for k in c.top if k in lengths)))
    return lengths, cyl


def flow_time(surface: TranslationSurface, xi) -> Fraction | None:
    """First time a horizontal saddle connection reaches zero length, or None."""
    dec = Decomposition(surface)
    u = _check_real_rel(xi, surface, None)
    best = None
    for s in dec.saddle_connections:
        x = la.dot(u, s.chain)
        if x > 0:
            r = s.length / x
            if best is None or r < best:
                best = r
    return best


def rel_flow(surface: TranslationSurface, xi, time) -> TranslationSurface:
    """The surface after flowing for a time before the limit."""
    time = Fraction(time)
    dec = Decomposition(surface)
    u = _check_real_rel(xi, surface, None)
    lengths, cyl = _flowed_form(dec, u, time, drop_zero=False)
    return build_cylinder_surface(lengths, cyl, surface.names, _cylinder_components(dec))[0]


def rel_flow_limit(surface: TranslationSurface, xi, t: TangentSpace | None = None) -> RelFlowResult:
    """Flow by -tau*xi until horizontal saddle connections vanish, then contract them."""
    u = _check_real_rel(xi, surface, t)
    dec = Decomposition(surface)
    values = {s.index: la.dot(u, s.chain) for s in dec.saddle_connections}
    tau = None
    for s in dec.saddle_connections:
        if values[s.index] > 0:
            r = s.length / values[s.index]
            if tau is None or r < tau:
                tau = r
    if tau is None:
        return RelFlowResult(None, None, [], (), dec, values)
    gone = tuple(s.index for s in dec.saddle_connections if s.length == tau * values[s.index])
    lengths, cyl = _flowed_form(dec, u, tau, drop_zero=True)
    limit, bottom_he, _, right_he = build_cylinder_surface(lengths, cyl)
    form = dec.cylinder_surface
    src, s_bhe, _, s_rhe = form.built
    n = len(limit.edge_classes)
    rows: list = [None] * len(src.edge_classes)
    for k, he in s_bhe.items():
        e, sg = src.edge_index[he]
        acc = [Fraction(0)] * n
        if k in lengths:
            f, fsg = limit.edge_index[bottom_he[k]]
            acc[f] = Fraction(sg * fsg)
        rows[e] = acc
    for c, he in s_rhe.items():
        e, sg = src.edge_index[he]
        acc = [Fraction(0)] * n
        f, fsg = limit.edge_index[right_he[c]]
        acc[f] = Fraction(sg * fsg)
        rows[e] = acc
    V = vanishing_cycles(form, limit, rows, dec.complex)
    res = RelFlowResult(tau, limit, V, gone, dec, values, rows)
    if not vanishing_matches_collapsing(res):
        raise FlatError("vanishing cycles differ from the contracted saddle connections")
    if t is not None:
        res.boundary, res.tangent, res.pullback = boundary_tangent(form, rows, limit, V, t)
    return res


def vanishing_matches_collapsing(res: RelFlowResult) -> bool:
    cx = res.decomposition.complex
    faces = la.span_basis(cx.face_boundaries)
    sc = [res.decomposition.saddle_connections[k].chain for k in res.collapsing]
    a = la.rank(faces + res.vanishing)
    b = la.rank(faces + sc)
    return a == b == la.rank(faces + res.vanishing + sc)


# ---------------------------------------------------------------------------
# double degenerations


@dataclass
class DoubleDegeneration:
    inner: DegenerationResult
    verdict: RankReducing
    eta: list[Fraction] = field(repr=False)
    outer: RelFlowResult = field(repr=False)
    limit: TranslationSurface
    limit_frame: TranslationSurface = field(repr=False)
    tangent: TangentSpace
    pullback: list = field(repr=False)
    lc_chains: list = field(repr=False)
    unique: bool
    checks: dict[str, bool] = field(default_factory=dict)


def heights_proportional(dec: Decomposition, cylinders, t: TangentSpace) -> bool:
    """Whether the height ratios of the cylinders are constant on T."""
    cylinders = list(cylinders)
    if len(cylinders) < 2:
        return True
    a = dec.cylinders[cylinders[0]]
    core = functional(t, a.core_chain)
    for c in cylinders[1:]:
        b = dec.cylinders[c]
        k = a.height / b.height
        chain = la.sub(a.cross_chain, la.scale(k, b.cross_chain))
        f = functional(t, chain)
        if any(x != 0 for x in f) and proportionality(f, core) is None:
            return False
    return True


def lc_chains(dec: Decomposition, cylinders, t: TangentSpace) -> list[list[Fraction]]:
    """Saddle connections in the closure of the class and those generically parallel to it."""
    cylinders = list(cylinders)
    core = functional(t, dec.cylinders[cylinders[0]].core_chain)
    out = []
    inside = set()
    for c in cylinders:
        cyl = dec.cylinders[c]
        inside.update(cyl.bottom)
        inside.update(cyl.top)
        out.append(cyl.cross_chain)
    for s in dec.saddle_connections:
        if s.index in inside or proportionality(functional(t, s.chain), core) is not None:
            out.append(s.chain)
    return out


def _core_span(dec: Decomposition, cylinders) -> int:
    cx = dec.complex
    cores = [dec.cylinders[c].core_chain for c in cylinders]
    faces = la.span_basis(cx.face_boundaries)
    return la.rank(faces + cores) - len(faces)


def double_degeneration(
    dec: Decomposition, cylinders, coefficients, t: TangentSpace, strict: bool = True
) -> DoubleDegeneration:
    """Collapse the class, then flow the limit along the rel certificate until time 1."""
    cylinders = tuple(cylinders)
    inner = collapse(dec, cylinders, coefficients, t)
    verdict = classify_dichotomy(inner, t)
    if not isinstance(verdict, RankReducing):
        raise NotReducing("the collapse preserves rank")
    if verdict.failures:
        raise AssumptionFails("the collapse is not a valid degeneration: " + "; ".join(verdict.failures))
    if verdict.certificate is None:
        raise NoCertificate("no purely relative class scales the graph")
    if not heights_proportional(dec, inner.collapsing, t):
        raise AssumptionFails("heights of the collapsing cylinders do not keep constant ratios")
    eta = verdict.certificate
    unique = certificate_is_unique(inner)
    outer = rel_flow_limit(inner.limit_frame, eta, inner.tangent)
    if outer.tau != 1:
        raise AssumptionFails(f"the rel flow stops at time {outer.tau} before the graph is contracted")
    mid = outer.decomposition
    gone = set(outer.collapsing)
    core_f = None
    for e in inner.graph:
        f = functional(inner.tangent, _graph_chain(inner, e.piece))
        core_f = f if core_f is None else core_f
    for k in gone:
        f = functional(inner.tangent, mid.saddle_connections[k].chain)
        if core_f is not None and any(x != 0 for x in f) and proportionality(f, core_f) is None:
            raise AssumptionFails("a vanishing saddle connection is not generically parallel to the graph")
    form = dec.cylinder_surface
    pulled = [_pull_back(form, inner.pushforward, u) for u in outer.pullback]
    lc = lc_chains(dec, cylinders, t)
    target = t.annihilator_of(lc)
    g0 = sum(dec.surface.genus())
    g1 = sum(outer.limit.genus())
    checks = {
        "dimension_drop": outer.tangent.dim == inner.tangent.dim - 1,
        "rank_drop": outer.tangent.rank == t.rank - 1,
        "rel_zero": t.rel != 0 or outer.tangent.rel == 0,
        "unique_when_rel_zero": t.rel != 0 or unique,
        "annihilator_of_lc": la.subspace_eq(pulled, target.basis),
        "genus_drop": g0 - g1 >= _core_span(dec, cylinders),
        "acyclic": is_acyclic(inner),
    }
    if strict:
        bad = [k for k, ok in checks.items() if not ok]
        if bad:
            raise AssumptionFails("postconditions fail: " + ", ".join(bad))
    d = dec.direction
    limit = outer.limit if d == (1, 0) else apply_gl2(outer.limit, rotation_from_horizontal(d))
    return DoubleDegeneration(
        inner, verdict, eta, outer, limit, outer.limit, outer.tangent, pulled, lc, unique, checks
    )


def _graph_chain(res: DegenerationResult, piece: int) -> list[Fraction]:
    s = res.limit_frame
    e, sg = s.edge_index[res.chase.bottom_he[piece]]
    out = [Fraction(0)] * len(s.edge_classes)
    out[e] = Fraction(sg)
    return out
