"""Brute-force checks computed straight from origami permutations.

Nothing here uses the library's triangulations, traces or cylinder code.
Square i has i -> h[i] to its right and i -> v[i] above it.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from fractions import Fraction


def inverse(p):
    q = [0] * len(p)
    for i, x in enumerate(p):
        q[x] = i
    return q


def cycles(p):
    seen, out = set(), []
    for i in range(len(p)):
        if i in seen:
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        out.append(cyc)
    return out


def corner_map(h, v):
    """Counterclockwise turn around the bottom-left corner of each square.

    Cycles of this map are the vertex classes, and a cycle of length l has
    cone angle 2 pi l.
    """
    hi, vi = inverse(h), inverse(v)
    return [v[h[vi[hi[i]]]] for i in range(len(h))]


def vertex_classes(h, v):
    """Class index of the bottom-left corner of every square, and the cycle lengths."""
    cls = {}
    sizes = []
    for k, cyc in enumerate(cycles(corner_map(h, v))):
        sizes.append(len(cyc))
        for i in cyc:
            cls[i] = k
    return [cls[i] for i in range(len(h))], sizes


def zero_orders(h, v):
    _, sizes = vertex_classes(h, v)
    return sorted((s - 1 for s in sizes if s > 1), reverse=True)


def is_connected(h, v):
    n = len(h)
    seen, todo = {0}, [0]
    while todo:
        i = todo.pop()
        for j in (h[i], v[i]):
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return len(seen) == n


def euler_genus(h, v):
    """Genus from V - E + F on the square complex."""
    n = len(h)
    _, sizes = vertex_classes(h, v)
    chi = len(sizes) - 2 * n + n
    return (2 - chi) // 2


def horizontal_saddles(h, v):
    """Horizontal saddle connections as (start class, end class, length).

    Each singular bottom-left corner starts one eastward saddle connection
    along square bottoms. It runs until it reaches another singular corner.
    """
    cls, sizes = vertex_classes(h, v)
    singular = [sizes[cls[i]] > 1 for i in range(len(h))]
    out = []
    for i in range(len(h)):
        if not singular[i]:
            continue
        j, length = i, 0
        while True:
            length += 1
            j = h[j]
            if singular[j]:
                break
        out.append((cls[i], cls[j], length))
    return out


def cylinder_rows(h, v):
    """Maximal horizontal cylinders as (height, circumference, squares, bottom row).

    Rows are cycles of h. A row continues into the row above when its top
    edge carries no singular corner.
    """
    cls, sizes = vertex_classes(h, v)
    singular = [sizes[cls[i]] > 1 for i in range(len(h))]
    rows = cycles(h)
    row_of = {i: k for k, r in enumerate(rows) for i in r}
    up = {}
    for k, r in enumerate(rows):
        if not any(singular[v[i]] for i in r):
            up[k] = row_of[v[r[0]]]
    down = {b: a for a, b in up.items()}
    out = []
    for k, r in enumerate(rows):
        if k in down:
            continue
        squares, j = list(r), k
        while j in up:
            j = up[j]
            squares += rows[j]
        out.append((len(squares) // len(r), len(r), sorted(squares), sorted(r)))
    return out


def horizontal_cylinders(h, v):
    return sorted((a, b) for a, b, _, _ in cylinder_rows(h, v))


def bottom_saddles(h, v, bottom):
    """(start, end, length) of the saddle connections along the bottom of a row."""
    rows = set(bottom)
    cls, sizes = vertex_classes(h, v)
    starts = [i for i in range(len(h)) if sizes[cls[i]] > 1]
    return Counter(s for s, i in zip(horizontal_saddles(h, v), starts) if i in rows)


def squares_of(h, v, dec, cylinders):
    """Squares filling the given library cylinders, or None if the match is ambiguous.

    Oracle cylinders are matched by height, circumference and the saddle
    connections on their bottom boundary.
    """
    phi = match_vertices(h, v, dec)
    if phi is None:
        return None
    sc = dec.saddle_connections
    keyed = []
    for height, circ, squares, bottom in cylinder_rows(h, v):
        bs = Counter()
        for (a, b, n), k in bottom_saddles(h, v, bottom).items():
            bs[(phi[a], phi[b], Fraction(n))] += k
        keyed.append(((height, circ, bs), squares))
    out = set()
    for c in cylinders:
        cyl = dec.cylinders[c]
        key = (cyl.height, cyl.circumference, Counter((sc[k].start, sc[k].end, sc[k].length) for k in cyl.bottom))
        hits = [sq for k, sq in keyed if k == key]
        if len(hits) != 1:
            return None
        out |= set(hits[0])
    return out


def collapse_rows(h, v, dead):
    """Delete the squares in ``dead`` and reglue each survivor to the next one straight above.

    Vertical collapse of whole cylinders with their twists frozen does exactly
    this. Returns the new permutations on the surviving squares, relabelled.
    """
    keep = [i for i in range(len(h)) if i not in dead]
    new = {i: k for k, i in enumerate(keep)}
    h2, v2 = [], []
    for i in keep:
        h2.append(new[h[i]])
        j = v[i]
        while j in dead:
            j = v[j]
        v2.append(new[j])
    return h2, v2


def orbits(h, v):
    n = len(h)
    seen = [False] * n
    out = []
    for s in range(n):
        if seen[s]:
            continue
        comp, todo = [], [s]
        seen[s] = True
        while todo:
            i = todo.pop()
            comp.append(i)
            for j in (h[i], v[i], inverse(h)[i], inverse(v)[i]):
                if not seen[j]:
                    seen[j] = True
                    todo.append(j)
        out.append(sorted(comp))
    return out


def component_orders(h, v):
    """Sorted nonzero zero orders of each connected component."""
    out = []
    for comp in orbits(h, v):
        idx = {i: k for k, i in enumerate(comp)}
        hh = [idx[h[i]] for i in comp]
        vv = [idx[v[i]] for i in comp]
        out.append(tuple(zero_orders(hh, vv)))
    return sorted(out)


def match_vertices(h, v, dec):
    """Bijection from oracle classes to library vertices that makes the saddle lists agree.

    Returns None when no bijection does.
    """
    cls, sizes = vertex_classes(h, v)
    sing = [k for k, s in enumerate(sizes) if s > 1]
    lib = Counter((s.start, s.end, s.length) for s in dec.saddle_connections)
    ours = horizontal_saddles(h, v)
    zeros = list(dec.surface.zeros)
    if len(zeros) != len(sing):
        return None
    for perm in itertools.permutations(zeros):
        phi = dict(zip(sing, perm))
        if Counter((phi[a], phi[b], Fraction(n)) for a, b, n in ours) == lib:
            return phi
    return None


def random_origami(rng: random.Random, n: int):
    h = list(range(n))
    v = list(range(n))
    rng.shuffle(h)
    rng.shuffle(v)
    return h, v


def origamis_in(rng: random.Random, signature: str, sizes, limit: int = 4000):
    """Random connected origamis in a stratum, as (h, v) pairs."""
    from flatdeg.surface import build_origami

    for _ in range(limit):
        h, v = random_origami(rng, rng.choice(list(sizes)))
        if not is_connected(h, v):
            continue
        s = build_origami(h, v)
        if str(s.signature()) == signature:
            yield h, v, s
