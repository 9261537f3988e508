import dataclasses
import random
from fractions import Fraction

import pytest

from flatdeg import linalg as la
from flatdeg.cylinders import Decomposition, collapse_time, equivalence_classes, find_typical_vector
from flatdeg.degeneration import (
    RankPreserving,
    RankReducing,
    absolute_decomposition_holds,
    boundary_is_prime,
    classify_dichotomy,
    collapse,
    collapse_complement_onto,
    export_graph,
    is_acyclic,
    is_rank_reducing_by_cycles,
    pairing_restricts,
)
from flatdeg.errors import NoCollapse, WholeSurface
from flatdeg.linalg import QI
from flatdeg.surface import apply_gl2, build_origami
from flatdeg.tangent import stratum_tangent

import oracles
from shapes import l_origami, pipeline, torus

# H(1,1,1,1): horizontal class (1, 3) holds homologous cylinders of heights 2 and 1
TWO_HEIGHTS = ([7, 1, 2, 0, 4, 8, 6, 3, 5], [0, 8, 7, 6, 5, 2, 4, 3, 1])
# H(1,1): collapsing horizontal cylinder 1 keeps the rank
PRESERVING = ([3, 0, 2, 1], [0, 3, 1, 2])


def _vertical(dec, cylinders):
    return [QI(0, -dec.cylinders[c].height) for c in cylinders]


def _two_heights():
    s = build_origami(*TWO_HEIGHTS)
    dec = Decomposition(s)
    k = next(k for k in equivalence_classes(dec, stratum_tangent(s)) if len(k.cylinders) == 2)
    short, tall = sorted(k.cylinders, key=lambda c: dec.cylinders[c].height)
    assert (dec.cylinders[short].height, dec.cylinders[tall].height) == (1, 2)
    return dec, short, tall


def test_collapse_time_single():
    dec, short, tall = _two_heights()
    assert collapse_time(dec, [short, tall], [QI(0, -1), QI(0, -1)]) == (1, (short,))


def test_collapse_time_tie():
    dec, short, tall = _two_heights()
    t_v, coll = collapse_time(dec, [short, tall], [QI(0, -1), QI(0, -2)])
    assert t_v == 1 and set(coll) == {short, tall}


def test_standard_collapse_takes_unit_time():
    dec, short, tall = _two_heights()
    t_v, coll = collapse_time(dec, [short, tall], _vertical(dec, [short, tall]))
    assert t_v == 1 and set(coll) == {short, tall}


def test_no_shrinking_cylinder():
    dec, short, tall = _two_heights()
    with pytest.raises(NoCollapse):
        collapse_time(dec, [short, tall], [QI(1, 0), QI(0, 1)])


def test_pipeline_first_collapse():
    s = pipeline()
    t = stratum_tangent(s)
    dec = Decomposition(s, (0, 1))
    k = equivalence_classes(dec, t)[1]
    assert [dec.cylinders[c].shape for c in k.cylinders] == ["simple"]
    res = collapse(dec, k.cylinders, _vertical(dec, k.cylinders), t)
    assert str(res.limit.signature()) == "H(1,1)"
    assert res.limit.area() == [4]


def test_whole_torus_cannot_collapse():
    dec = Decomposition(torus())
    with pytest.raises(WholeSurface):
        collapse(dec, [0], [QI(0, -1)])


def _oracle_limit(h, v, dec, cylinders):
    squares = oracles.squares_of(h, v, dec, cylinders)
    if squares is None:
        return None
    h2, v2 = oracles.collapse_rows(h, v, squares)
    return oracles.component_orders(h2, v2), len(h2)


def test_collapse_matches_square_deletion():
    rng = random.Random(10)
    checked = 0
    for sig in ["H(2)", "H(1,1)", "H(4)"]:
        per = 0
        for h, v, s in oracles.origamis_in(rng, sig, range(3, 9)):
            dec = Decomposition(s)
            t = stratum_tangent(s)
            for k in equivalence_classes(dec, t):
                want = _oracle_limit(h, v, dec, k.cylinders)
                if want is None:
                    continue
                try:
                    res = collapse(dec, k.cylinders, _vertical(dec, k.cylinders), t)
                except WholeSurface:
                    assert want[1] == 0
                    continue
                got = sorted(c[0] for c in res.limit.signature().components)
                assert (got, sum(res.limit.area())) == want
                per += 1
            if per >= 8:
                break
        checked += per
    assert checked >= 20


def test_sheared_l_collapse():
    h, v = [1, 0, 2], [2, 1, 0]
    # the shear [[1,1],[0,1]] sends (h, v) to (h, v h^-1)
    hi = oracles.inverse(h)
    v2 = [v[hi[i]] for i in range(3)]
    s = apply_gl2(build_origami(h, v), [[1, 1], [0, 1]])
    assert s == build_origami(h, v2)
    dec = Decomposition(s)
    (c,) = [c.index for c in dec.cylinders if c.circumference == 1]
    res = collapse(dec, [c], _vertical(dec, [c]), stratum_tangent(s))
    want, area = _oracle_limit(h, v2, dec, [c])
    assert sorted(x[0] for x in res.limit.signature().components) == want
    assert res.limit.area() == [area]
    assert res.limit.genus()[0] == s.genus()[0] - 1


def _check_certificate(res, cert):
    """Purely relative, in the boundary space, and equal to the holonomy on every graph edge."""
    tan = res.tangent
    cx = tan.complex
    assert tan.contains(cert)
    assert cx.in_ker_p(cert)
    frame = res.limit_frame
    for e in res.graph:
        he = res.chase.bottom_he[e.piece]
        idx, sign = frame.edge_index[he]
        assert cert[idx] * sign == e.length


def test_rel_zero_collapses_reduce_rank():
    rng = random.Random(11)
    seen = 0
    for sig in ["H(2)", "H(4)"]:
        for h, v, s in oracles.origamis_in(rng, sig, range(3, 9)):
            t = stratum_tangent(s)
            dec = Decomposition(s)
            for k in equivalence_classes(dec, t):
                if not k.cylinders_generic:
                    continue
                try:
                    tv = find_typical_vector(dec, k, t)
                    res = collapse(dec, k.cylinders, tv.coefficients, t)
                except WholeSurface:
                    continue
                verdict = classify_dichotomy(res, t)
                assert isinstance(verdict, RankReducing) and not verdict.conditional
                assert verdict.rank_after == verdict.rank_before - 1
                assert set(res.collapsing) == set(k.cylinders)
                assert is_acyclic(res)
                _check_certificate(res, verdict.certificate)
                seen += 1
            if seen >= 12:
                break
    assert seen >= 12


def _reachable(res, start):
    seen, todo = {start}, [start]
    while todo:
        a = todo.pop()
        for e in res.graph:
            if e.tail == a and e.head not in seen:
                seen.add(e.head)
                todo.append(e.head)
    return seen


def test_rank_preserving_collapse_is_balanced():
    s = build_origami(*PRESERVING)
    t = stratum_tangent(s)
    dec = Decomposition(s)
    res = collapse(dec, [1], [QI(0, -1)], t)
    verdict = classify_dichotomy(res, t)
    assert isinstance(verdict, RankPreserving) and not verdict.conditional
    assert verdict.rank_after == verdict.rank_before == 2
    assert res.graph
    for e in res.graph:
        assert e.tail in _reachable(res, e.head)
    for x in res.graph_vertices:
        out = sum((e.weight for e in res.graph if e.tail == x), Fraction(0))
        inn = sum((e.weight for e in res.graph if e.head == x), Fraction(0))
        assert out == inn
    assert not is_rank_reducing_by_cycles(res, t)


def test_rank_drop_agrees_with_vanishing_cycles():
    rng = random.Random(12)
    seen = 0
    for sig in ["H(2)", "H(1,1)", "H(4)"]:
        for h, v, s in oracles.origamis_in(rng, sig, range(3, 9)):
            t = stratum_tangent(s)
            dec = Decomposition(s)
            for k in equivalence_classes(dec, t):
                try:
                    tv = find_typical_vector(dec, k, t)
                    res = collapse(dec, k.cylinders, tv.coefficients, t)
                except WholeSurface:
                    continue
                assert is_rank_reducing_by_cycles(res, t) == (res.tangent.rank < t.rank)
                seen += 1
            if seen >= 8 * (["H(2)", "H(1,1)", "H(4)"].index(sig) + 1):
                break
    assert seen >= 20


def test_non_divergent_collapse():
    s = build_origami([2, 1, 0], [2, 0, 1])
    t = stratum_tangent(s)
    res = collapse(Decomposition(s), [0], [QI(Fraction(1, 4), -1)], t)
    assert not res.divergent and res.vanishing == []
    assert str(res.limit.signature()) == "H(2)"
    assert not is_rank_reducing_by_cycles(res, t)
    assert res.tangent.dim == t.dim


def test_structural_properties_of_boundaries():
    rng = random.Random(13)
    seen = 0
    for h, v, s in oracles.origamis_in(rng, "H(1,1)", range(4, 9)):
        t = stratum_tangent(s)
        dec = Decomposition(s)
        for k in equivalence_classes(dec, t):
            try:
                tv = find_typical_vector(dec, k, t)
                res = collapse(dec, k.cylinders, tv.coefficients, t)
            except WholeSurface:
                continue
            assert pairing_restricts(res)
            assert boundary_is_prime(res)
            if k.cylinders_generic:
                assert absolute_decomposition_holds(res, t)
            seen += 1
        if seen >= 10:
            break
    assert seen >= 10


def test_collapse_onto_whole_torus():
    s = torus()
    assert collapse_complement_onto(Decomposition(s), 0) == s


def test_collapse_onto_bottom_of_sheared_l():
    s = apply_gl2(l_origami(), [[1, Fraction(1, 3)], [0, 1]])
    dec = Decomposition(s)
    (bottom,) = [c.index for c in dec.cylinders if c.circumference == 2]
    out = collapse_complement_onto(dec, bottom)
    assert str(out.signature()) == "H(2)"
    assert len(Decomposition(out).cylinders) == 1
    for c in range(len(dec.cylinders)):
        assert len(Decomposition(collapse_complement_onto(dec, c)).cylinders) == 1


def test_graph_export():
    s = build_origami(*PRESERVING)
    t = stratum_tangent(s)
    res = collapse(Decomposition(s), [1], [QI(0, -1)], t)
    empty = dataclasses.replace(res, graph=[])
    assert export_graph(empty) == "digraph collapse {\n}\n"
    dot = export_graph(res)
    assert dot.count("->") == len(res.graph) == 1
    assert '[label="1"]' in dot
    with_balance = export_graph(res, classify_dichotomy(res, t))
    assert with_balance.splitlines()[1].startswith("  // balanced weights v0:1")


def test_pipeline_graph_is_one_arrow():
    s = pipeline()
    t = stratum_tangent(s)
    dec = Decomposition(s, (0, 1))
    k = equivalence_classes(dec, t)[1]
    res = collapse(dec, k.cylinders, _vertical(dec, k.cylinders), t)
    assert export_graph(res) == 'digraph collapse {\n  v0 [label="0"];\n  v1 [label="1"];\n  v0 -> v1 [label="1"];\n}\n'
    assert la.rank(res.vanishing) == 1
