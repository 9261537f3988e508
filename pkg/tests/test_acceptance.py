import random
import time
from collections import Counter
from fractions import Fraction

from flatdeg import linalg as la
from flatdeg.cylinders import (
    Decomposition,
    equivalence_classes,
    find_typical_vector,
    geminal_report,
    period_vector,
)
from flatdeg.degeneration import (
    RankReducing,
    absolute_decomposition_holds,
    boundary_is_prime,
    classify_dichotomy,
    collapse,
    is_acyclic,
    pairing_restricts,
    strongly_connected_pieces,
    vertex_balance,
)
from flatdeg.errors import DichotomyViolation, FlatError, NoDegeneration, WholeSurface
from flatdeg.homology import CellComplex
from flatdeg.linalg import QI
from flatdeg.relflow import double_degeneration, lambda_from_rel, rel_flow_limit, schiffer, schiffer_with_map
from flatdeg.surface import build_origami, holonomy_double_cover
from flatdeg.surfio import parse_surf, serialize_surf
from flatdeg.tangent import TangentSpace, is_high_rank, quadratic_double_tangent, stratum_tangent

import oracles
from shapes import SIX_ODD, pillowcase, strip

# H(2) with cylinders of heights 2 and 1
TALL_L = ([1, 0, 2, 3], [2, 1, 3, 0])


def _report(capsys, k, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")


def _vertical(dec, cylinders):
    return [QI(0, -dec.cylinders[c].height) for c in cylinders]


# 1. the H(4) pipeline


def _find_pipeline(rng):
    for h, v, s in oracles.origamis_in(rng, "H(4)", range(5, 13), limit=20000):
        t = stratum_tangent(s)
        dec = Decomposition(s, (0, 1))
        for k in equivalence_classes(dec, t):
            if len(k.cylinders) != 1 or dec.cylinders[k.cylinders[0]].shape != "simple":
                continue
            coeffs = _vertical(dec, k.cylinders)
            try:
                first = collapse(dec, k.cylinders, coeffs, t)
                if str(first.limit.signature()) != "H(1,1)":
                    continue
                dd = double_degeneration(dec, k.cylinders, coeffs, t)
            except FlatError:
                continue
            if str(dd.limit.signature()) == "H(0)xH(0)" and all(dd.checks.values()):
                return h, v, dd
    return None


def test_criterion_1_pipeline(capsys):
    start = time.perf_counter()
    found = _find_pipeline(random.Random(100))
    elapsed = time.perf_counter() - start
    ok = found is not None and elapsed < 5
    detail = f"search took {elapsed:.2f}s"
    if found:
        h, v, dd = found
        detail += f"; h={h} v={v}: H(4) -> {dd.inner.limit.signature()} -> {dd.limit.signature()}"
    _report(capsys, 1, ok, detail)
    assert ok


# 2 and 3. the dichotomy suite


def _check_certificate(res, cert):
    tan = res.tangent
    if not (tan.contains(cert) and tan.complex.in_ker_p(cert)):
        return False
    frame = res.limit_frame
    for e in res.graph:
        idx, sign = frame.edge_index[res.chase.bottom_he[e.piece]]
        if cert[idx] * sign != e.length:
            return False
    return True


def _independent_violations(res, verdict):
    """Re-check a verdict without trusting the classifier."""
    bad = []
    if isinstance(verdict, RankReducing):
        if set(res.collapsing) != set(res.cylinders):
            bad.append("C_v != C")
        if not is_acyclic(res):
            bad.append("cycle")
        if verdict.certificate is None or not _check_certificate(res, verdict.certificate):
            bad.append("certificate")
    else:
        ok, _ = strongly_connected_pieces(res)
        if not ok:
            bad.append("not strongly connected")
        if any(x != 0 for x in vertex_balance(res).values()):
            bad.append("unbalanced")
    return bad


def _tier(k):
    if k.generic:
        return "certified"
    return "generic cylinders" if k.cylinders_generic else "non-generic"


def _dichotomy_suite(seed=200, target=110):
    rng = random.Random(seed)
    cases = []
    sigs = ["H(2)", "H(1,1)", "H(4)"]
    gens = {sig: oracles.origamis_in(rng, sig, range(3, 11), limit=100000) for sig in sigs}
    while sum(1 for c in cases if c["tier"] == "certified") < target:
        sig = sigs[len(cases) % 3]
        h, v, s = next(gens[sig])
        t = stratum_tangent(s)
        dec = Decomposition(s)
        k = rng.choice(equivalence_classes(dec, t))
        try:
            tv = find_typical_vector(dec, k, t, seed=rng.randrange(10**6))
            res = collapse(dec, k.cylinders, tv.coefficients, t)
        except (WholeSurface, NoDegeneration):
            continue
        case = {"sig": sig, "tier": _tier(k), "violations": []}
        try:
            verdict = classify_dichotomy(res, t, conditional=not k.generic)
        except DichotomyViolation as exc:
            case["violations"].append(str(exc))
            cases.append(case)
            continue
        case["verdict"] = verdict.verdict
        case["failures"] = list(verdict.failures)
        if case["tier"] != "non-generic":
            case["violations"] += verdict.failures + _independent_violations(res, verdict)
        case["drop"] = t.rank - res.tangent.rank
        case["absolute"] = absolute_decomposition_holds(res, t)
        cases.append(case)
    return cases


_SUITE = {}


def _suite():
    if not _SUITE:
        start = time.perf_counter()
        _SUITE["cases"] = _dichotomy_suite()
        _SUITE["elapsed"] = time.perf_counter() - start
    return _SUITE["cases"], _SUITE["elapsed"]


def _tally(cases):
    return dict(Counter(c.get("verdict") for c in cases))


def test_criterion_2_dichotomy(capsys):
    cases, elapsed = _suite()
    firm = [c for c in cases if c["tier"] == "certified"]
    soft = [c for c in cases if c["tier"] == "generic cylinders"]
    outside = [c for c in cases if c["tier"] == "non-generic"]
    violations = sum(len(c["violations"]) for c in firm + soft)
    listed = sum(1 for c in outside if c.get("failures") or c["violations"])
    ok = len(firm) >= 100 and violations == 0 and elapsed < 60
    detail = (
        f"{len(firm)} certified-generic cases {_tally(firm)}, {len(soft)} with generic cylinders in an "
        f"uncertified class {_tally(soft)}, {violations} violations, {elapsed:.1f}s; "
        f"{len(outside)} non-generic (conditional) cases, {listed} with listed failures"
    )
    _report(capsys, 2, ok, detail)
    assert ok


def test_criterion_3_rank_arithmetic(capsys):
    cases, _ = _suite()
    done = [c for c in cases if "drop" in c and c["tier"] != "non-generic"]
    bad_drop = [c for c in done if c["drop"] not in (0, 1)]
    bad_reduce = [c for c in done if c["verdict"] == "rank_reducing" and c["drop"] != 1]
    bad_abs = [c for c in done if not c["absolute"]]
    outside = [c for c in cases if "drop" in c and c["tier"] == "non-generic"]
    ok = len(done) >= 100 and not bad_drop and not bad_reduce and not bad_abs
    detail = (
        f"{len(done)} degenerations with generic cylinders: drops {dict(Counter(c['drop'] for c in done))}, "
        f"{len(bad_reduce)} reducing without drop 1, {len(bad_abs)} absolute decomposition failures; "
        f"non-generic (conditional): drops {dict(Counter(c['drop'] for c in outside))}, "
        f"{sum(not c['absolute'] for c in outside)} absolute decomposition failures"
    )
    _report(capsys, 3, ok, detail)
    assert ok


# 4. constant moduli in rel zero


def _hol(w, chain):
    return sum((z * c for z, c in zip(w, chain) if c), QI(0))


def _cross(a, b):
    return a.re * b.im - a.im * b.re


def _moduli_failures(s, t, directions):
    """Intra-class modulus ratios must be rational and constant to first order along T."""
    fails, checked = 0, 0
    for d in directions:
        dec = Decomposition(s, d)
        classes = equivalence_classes(dec, t)
        if len(classes) > t.rank:
            fails += 1
        w = period_vector(s)
        for k in classes:
            cyl = [dec.cylinders[c] for c in k.cylinders]
            mod = [Fraction(c.height) / Fraction(c.circumference) for c in cyl]
            if not all(isinstance(m, Fraction) for m in mod):
                fails += 1
            if not k.generic or len(cyl) < 2:
                continue
            checked += 1
            hol = [(_hol(w, c.core_chain), _hol(w, c.cross_chain)) for c in cyl]
            area = [_cross(z, x) for z, x in hol]
            for b in t.basis:
                for unit in (QI(1), QI(0, 1)):
                    du = []
                    for c, (z, x) in zip(cyl, hol):
                        dz = unit * la.dot(b, c.core_chain)
                        dx = unit * la.dot(b, c.cross_chain)
                        du.append(_cross(z, dx) + _cross(dz, x))
                    # |z_i|^2 ratios are constant since cores stay parallel with fixed ratio
                    if any(du[i] * area[0] != du[0] * area[i] for i in range(len(cyl))):
                        fails += 1
    return fails, checked


def _random_half_translation(rng, n):
    edges = [(i, e) for i in range(n) for e in (0, 2)]
    rng.shuffle(edges)
    pairs = [(edges[2 * j], edges[2 * j + 1]) for j in range(n)]
    try:
        q = strip(n, pairs)
        cover, inv = holonomy_double_cover(q)
    except FlatError:
        return None
    return cover, inv


def test_criterion_4_rel_zero_moduli(capsys):
    dirs = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1)]
    spaces = []
    for q in [pillowcase(), strip(6, SIX_ODD)]:
        cover, inv = holonomy_double_cover(q)
        spaces.append(("quaddouble", cover, quadratic_double_tangent(cover, inv)))
    rng = random.Random(400)
    while len(spaces) < 15:
        got = _random_half_translation(rng, rng.randint(2, 6))
        if got is None:
            continue
        t = quadratic_double_tangent(*got)
        if t.rel == 0:
            spaces.append(("quaddouble", got[0], t))
    for _, (_, _, s) in zip(range(10), oracles.origamis_in(random.Random(401), "H(2)", range(3, 9))):
        spaces.append(("H(2)", s, stratum_tangent(s)))
    fails, multi = 0, 0
    for kind, s, t in spaces:
        assert t.rel == 0
        f, n = _moduli_failures(s, t, dirs)
        fails += f
        multi += n
    ok = fails == 0 and multi > 0
    detail = (
        f"{len(spaces)} rel-0 tangent spaces x {len(dirs)} directions, "
        f"{multi} multi-cylinder classes checked to first order, {fails} failures"
    )
    _report(capsys, 4, ok, detail)
    assert ok


# 5. rel flow against enumeration


def test_criterion_5_rel_flow(capsys):
    rng = random.Random(500)
    checked, bounded, bad = 0, 0, 0
    for h, v, s in oracles.origamis_in(rng, "H(1,1)", range(4, 11)):
        dec = Decomposition(s)
        phi = oracles.match_vertices(h, v, dec)
        z = s.zeros[1]
        xi = CellComplex(s).vertex_coboundary(z)
        ratios = []
        for a, b, n in oracles.horizontal_saddles(h, v):
            x = (phi[b] == z) - (phi[a] == z)
            if x > 0:
                ratios.append((Fraction(n, x), (phi[a], phi[b], n)))
        res = rel_flow_limit(s, xi, stratum_tangent(s))
        if not ratios:
            bad += not res.unbounded
        else:
            tau = min(r for r, _ in ratios)
            want = Counter(key for r, key in ratios if r == tau)
            got = Counter(
                (sc.start, sc.end, sc.length)
                for sc in (res.decomposition.saddle_connections[k] for k in res.collapsing)
            )
            bad += res.tau != tau or got != want
            bounded += 1
        checked += 1
        if bounded >= 25:
            break
    ok = bounded >= 20 and bad == 0
    _report(capsys, 5, ok, f"{checked} H(1,1) origamis ({bounded} with finite time), {bad} mismatches")
    assert ok


# 6. structural oracles


def test_criterion_6_structure(capsys):
    rng = random.Random(600)
    n_pair = n_prime = n_conn = 0
    bad = Counter()
    for sig in ["H(2)", "H(1,1)", "H(4)"]:
        per = 0
        for h, v, s in oracles.origamis_in(rng, sig, range(3, 10)):
            t = stratum_tangent(s)
            dec = Decomposition(s)
            for k in equivalence_classes(dec, t):
                try:
                    tv = find_typical_vector(dec, k, t)
                    res = collapse(dec, k.cylinders, tv.coefficients, t)
                except (WholeSurface, NoDegeneration):
                    continue
                n_pair += 1
                bad["pairing"] += not pairing_restricts(res)
                n_prime += 1
                bad["prime"] += not boundary_is_prime(res)
                drop = t.rank - res.tangent.rank
                genus_drop = s.genus()[0] - sum(res.limit.genus())
                if is_high_rank(t) and (drop == 0 or (drop == 1 and genus_drop >= 1)):
                    n_conn += 1
                    bad["connected"] += res.limit.n_components != 1
                per += 1
            if per >= 8:
                break
    # geminal verdicts
    gem_ok = True
    strata = [s for _, (_, _, s) in zip(range(6), oracles.origamis_in(random.Random(601), "H(1,1)", range(4, 9)))]
    for s in strata:
        gem_ok &= geminal_report(Decomposition(s), stratum_tangent(s)).geminal
    cover, inv = holonomy_double_cover(strip(6, SIX_ODD))
    qt = quadratic_double_tangent(cover, inv)
    for d in [(1, 0), (0, 1), (1, 1)]:
        gem_ok &= geminal_report(Decomposition(cover, d), qt).geminal
    tall = build_origami(*TALL_L)
    re, im = CellComplex(tall).period_parts()
    teich = TangentSpace.from_complex(tall, [re, im])
    not_gem = not geminal_report(Decomposition(tall), teich).geminal
    ok = n_pair >= 20 and sum(bad.values()) == 0 and n_conn > 0 and gem_ok and not_gem
    detail = (
        f"pairing restricts on {n_pair - bad['pairing']}/{n_pair}, prime {n_prime - bad['prime']}/{n_prime}, "
        f"connected {n_conn - bad['connected']}/{n_conn}; geminal strata and quadratic double {gem_ok}, "
        f"Teichmueller curve not geminal {not_gem}"
    )
    _report(capsys, 6, ok, detail)
    assert ok


# 7. round trips


def test_criterion_7_round_trips(capsys):
    rng = random.Random(700)
    surf_bad = 0
    n_surf = 0
    while n_surf < 50:
        h, v = oracles.random_origami(rng, rng.randint(1, 10))
        if not oracles.is_connected(h, v):
            continue
        s = build_origami(h, v)
        surf_bad += parse_surf(serialize_surf(s)) != s
        n_surf += 1
    schiffer_bad = 0
    n_sch = 0
    for h, v, s in oracles.origamis_in(rng, "H(1,1)", range(4, 11)):
        lam = lambda_from_rel(CellComplex(s).vertex_coboundary(s.zeros[1]), s).lam
        step = min(Fraction(n) for _, _, n in oracles.horizontal_saddles(h, v)) / 4
        unit = QI(step) if n_sch % 2 == 0 else QI(0, step)
        fwd = [z * unit for z in lam]
        out, vmap = schiffer_with_map(s, fwd)
        back = [None] * out.n_vertices
        for old, new in vmap.items():
            back[new] = -fwd[old]
        schiffer_bad += schiffer(out, back) != s
        n_sch += 1
        if n_sch == 50:
            break
    ok = surf_bad == 0 and schiffer_bad == 0 and n_sch == 50
    detail = f"SURF {n_surf - surf_bad}/{n_surf}, Schiffer {n_sch - schiffer_bad}/{n_sch}"
    _report(capsys, 7, ok, detail)
    assert ok
