import random

import pytest

from flatdeg.errors import GluingMismatch, SurfSyntaxError
from flatdeg.surface import HalfTranslationSurface, apply_gl2, build_origami
from flatdeg.surfio import load_surface, parse_origami, parse_surf, serialize_surf

import oracles
from shapes import PIPELINE, PIPELINE_TEXT, l_origami, pillowcase, torus

TORUS = """surf 1
component A
polygon 0 0,0 1,0 1,1 0,1
glue 0.0 0.2
glue 0.1 0.3
mark 0.0
"""


def test_torus_file():
    s = parse_surf(TORUS)
    assert s == torus()
    assert str(s.signature()) == "H(0)"


def test_comments_and_blank_lines_are_ignored():
    text = "# a torus\n\n" + TORUS.replace("glue 0.0", "  # bottom to top\nglue 0.0")
    assert parse_surf(text) == torus()


def test_origami_line_matches_builder():
    assert parse_origami(PIPELINE_TEXT) == build_origami(*PIPELINE)
    assert parse_surf("# one line\n" + PIPELINE_TEXT + "\n") == build_origami(*PIPELINE)
    assert load_surface(PIPELINE_TEXT) == build_origami(*PIPELINE)


def test_fixed_points_may_be_omitted():
    assert parse_origami("origami h=(1 2) v=(1 3)") == l_origami()
    assert parse_origami("origami h=(1 2)(3) v=(1 3)(2)") == l_origami()


@pytest.mark.parametrize(
    "text, line",
    [
        ("surf 1\npolygon 0 0,0 1,0 1,1 0,1\nglue 0.0\n", 3),
        ("surf 1\npolygon 0 0,0 1,0 1,1 0,1\nglue 0.0 0.2\nglue 0.1 0.\n", 4),
        ("surf 1\npolygon 0 0,0 1,0 1,x 0,1\n", 2),
        ("surf 2\n", 1),
        ("surf 1\n\n# gone\nbogus 1\n", 4),
        ("surf 1\npolygon 0 0,0 1,0 1,1 0,1\nglue 0.0 7.2\n", 3),
        ("origami h=(1 2 v=(1)\n", 1),
    ],
)
def test_syntax_errors_carry_line_numbers(text, line):
    with pytest.raises(SurfSyntaxError) as info:
        parse_surf(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_truncated_file():
    lines = TORUS.splitlines()
    with pytest.raises(SurfSyntaxError) as info:
        parse_surf("\n".join(lines[:4]) + "\nglue 0.1")
    assert info.value.line == 5


def test_unpaired_edges_are_rejected():
    with pytest.raises(GluingMismatch):
        parse_surf("surf 1\npolygon 0 0,0 1,0 1,1 0,1\nglue 0.0 0.2\n")


def test_round_trip_on_random_origamis():
    rng = random.Random(40)
    seen = 0
    while seen < 30:
        h, v = oracles.random_origami(rng, rng.randint(1, 9))
        if not oracles.is_connected(h, v):
            continue
        s = build_origami(h, v)
        assert parse_surf(serialize_surf(s)) == s
        seen += 1


def test_round_trip_keeps_rational_vertices():
    s = apply_gl2(l_origami(), [[2, "1/3"], [0, "1/2"]])
    text = serialize_surf(s)
    assert "1/3" in text or "1/2" in text
    assert parse_surf(text) == s


def test_half_translation_file():
    q = pillowcase()
    back = parse_surf(serialize_surf(q))
    assert isinstance(back, HalfTranslationSurface)
    assert back == q
    assert [back.vertex_order(v) for v in range(back.n_vertices)] == [-1] * 4
