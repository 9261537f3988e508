"""SURF v1 text format and the one-line origami format.

    surf 1
    component A
    polygon 0 0,0 1,0 1,1 0,1
    glue 0.0 0.2
    glue 0.1 0.3
    mark 0.0

Vertices are ``x,y`` pairs of rationals. Lines starting with ``#`` are
comments. An origami is written ``origami h=(1 2)(3) v=(1 3)(2)`` with
1-based cycle notation; omitted labels are fixed points.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import GluingMismatch, SurfSyntaxError
from .surface import (
    HalfTranslationSurface,
    TranslationSurface,
    _normalize_glue,
    build_from_polygons,
    build_half_translation,
    origami_from_cycles,
)


@dataclass
class SurfText:
    """A parsed but not yet validated SURF description."""

    polygons: list[list[tuple[Fraction, Fraction]]] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    gluings: list[tuple[tuple[int, int], tuple[int, int]]] = field(default_factory=list)
    marks: list[tuple[int, int]] = field(default_factory=list)


def _frac(tok: str, line: int, col: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise SurfSyntaxError(f"bad rational {tok!r}", line, col) from None


def _pair(tok: str, line: int, col: int, sep: str):
    parts = tok.split(sep)
    if len(parts) != 2:
        raise SurfSyntaxError(f"expected a{sep}b, got {tok!r}", line, col)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise SurfSyntaxError(f"expected integers in {tok!r}", line, col) from None


def _tokens(text: str):
    """(token, column) pairs with 1-based columns."""
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", text)]


_CYCLES = re.compile(r"^\s*origami\s+h=(?P<h>[()\d\s]*?)\s+v=(?P<v>[()\d\s]*?)\s*$")


def _parse_cycles(text: str, line: int):
    text = text.strip()
    if not text:
        return []
    if not re.fullmatch(r"(\(\s*\d+(\s+\d+)*\s*\)\s*)+", text):
        raise SurfSyntaxError(f"bad cycle notation {text!r}", line)
    return [[int(x) for x in grp.split()] for grp in re.findall(r"\(([^()]*)\)", text)]


def parse_origami(text: str, line: int = 1) -> TranslationSurface:
    m = _CYCLES.match(text)
    if not m:
        raise SurfSyntaxError("expected 'origami h=(...) v=(...)'", line)
    h = _parse_cycles(m.group("h"), line)
    v = _parse_cycles(m.group("v"), line)
    try:
        return origami_from_cycles(h, v)
    except ValueError as exc:
        raise SurfSyntaxError(str(exc), line) from None


def read_surf(text: str) -> SurfText:
    out = SurfText()
    lines = text.splitlines()
    body = [(k + 1, ln) for k, ln in enumerate(lines) if ln.strip() and not ln.lstrip().startswith("#")]
    if not body:
        raise SurfSyntaxError("empty file", 1)
    first_no, first = body[0]
    toks = _tokens(first)
    if [t for t, _ in toks] != ["surf", "1"]:
        raise SurfSyntaxError("expected header 'surf 1'", first_no, 1)
    label = None
    ids: dict[int, int] = {}
    raw_glue = []
    raw_marks = []
    for no, ln in body[1:]:
        toks = _tokens(ln)
        kw, _ = toks[0]
        args = toks[1:]
        if kw == "component":
            if len(args) != 1:
                raise SurfSyntaxError("component takes one name", no, toks[0][1])
            label = args[0][0]
        elif kw == "polygon":
            if len(args) < 4:
                raise SurfSyntaxError("polygon needs an id and at least three vertices", no, toks[0][1])
            tok, col = args[0]
            try:
                pid = int(tok)
            except ValueError:
                raise SurfSyntaxError(f"bad polygon id {tok!r}", no, col) from None
            if pid in ids:
                raise SurfSyntaxError(f"polygon {pid} defined twice", no, col)
            verts = []
            for tok, col in args[1:]:
                parts = tok.split(",")
                if len(parts) != 2:
                    raise SurfSyntaxError(f"expected x,y, got {tok!r}", no, col)
                verts.append((_frac(parts[0], no, col), _frac(parts[1], no, col)))
            ids[pid] = len(out.polygons)
            out.polygons.append(verts)
            out.labels.append(label if label is not None else "c0")
        elif kw == "glue":
            if len(args) != 2:
                raise SurfSyntaxError("glue takes two edges", no, toks[0][1])
            raw_glue.append((no, [(_pair(t, no, c, "."), c) for t, c in args]))
        elif kw == "mark":
            if len(args) != 1:
                raise SurfSyntaxError("mark takes one vertex", no, toks[0][1])
            raw_marks.append((no, _pair(args[0][0], no, args[0][1], "."), args[0][1]))
        else:
            raise SurfSyntaxError(f"unknown keyword {kw!r}", no, toks[0][1])
    if not out.polygons:
        raise SurfSyntaxError("no polygons", len(lines) or 1)

    def local(no, pair, col):
        p, i = pair
        if p not in ids:
            raise SurfSyntaxError(f"unknown polygon {p}", no, col)
        q = ids[p]
        if not 0 <= i < len(out.polygons[q]):
            raise SurfSyntaxError(f"polygon {p} has no edge or vertex {i}", no, col)
        return q, i

    for no, ends in raw_glue:
        a, b = (local(no, pr, c) for pr, c in ends)
        out.gluings.append((a, b))
    for no, pr, col in raw_marks:
        out.marks.append(local(no, pr, col))
    return out


def parse_surf(text: str):
    """A TranslationSurface, or a HalfTranslationSurface when some edges are glued by a half-turn."""
    stripped = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if stripped and stripped[0].lstrip().startswith("origami"):
        if len(stripped) > 1:
            raise SurfSyntaxError("unexpected text after the origami line", 2)
        no = next(k + 1 for k, ln in enumerate(text.splitlines()) if ln.strip() == stripped[0].strip())
        return parse_origami(stripped[0], no)
    desc = read_surf(text)
    try:
        return build_from_polygons(desc.polygons, desc.gluings, desc.labels, desc.marks, warn=False)
    except GluingMismatch:
        if not _has_half_turn(desc):
            raise
    return build_half_translation(desc.polygons, desc.gluings, desc.labels)


def _has_half_turn(desc: SurfText) -> bool:
    polys = desc.polygons
    try:
        partner = _normalize_glue(polys, desc.gluings)
    except GluingMismatch:
        return False
    for p, poly in enumerate(polys):
        for i in range(len(poly)):
            q, j = partner[p][i]
            e = (poly[(i + 1) % len(poly)][0] - poly[i][0], poly[(i + 1) % len(poly)][1] - poly[i][1])
            qq = polys[q]
            f = (qq[(j + 1) % len(qq)][0] - qq[j][0], qq[(j + 1) % len(qq)][1] - qq[j][1])
            if e == f:
                return True
    return False


def serialize_surf(surface) -> str:
    lines = ["surf 1"]
    current = None
    for p, poly in enumerate(surface.polygons):
        name = surface.names[surface.poly_component[p]]
        if name != current:
            lines.append(f"component {name}")
            current = name
        verts = " ".join(f"{x},{y}" for x, y in poly)
        lines.append(f"polygon {p} {verts}")
    for p, i in surface.edge_classes:
        q, j = surface.partner[p][i]
        lines.append(f"glue {p}.{i} {q}.{j}")
    if isinstance(surface, TranslationSurface):
        for v in surface.marked_points:
            p, i = surface.corner_cycles[v][0]
            lines.append(f"mark {p}.{i}")
    return "\n".join(lines) + "\n"


def load_surface(arg: str):
    """A path to a SURF file, or an inline origami description."""
    if arg.lstrip().startswith("origami"):
        return parse_origami(arg)
    with open(arg, encoding="utf-8") as fh:
        return parse_surf(fh.read())

