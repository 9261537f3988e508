"""Command line interface.

Exit codes: 0 on success, 1 on a domain error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .cylinders import (
    Decomposition,
    equivalence_classes,
    find_typical_vector,
    geminal_report,
    is_cylindrically_stable,
)
from .degeneration import RankReducing, classify_dichotomy, collapse, export_graph
from .errors import FlatError
from .homology import CellComplex, cocycle_from_json, cocycle_to_json
from .linalg import QI, format_qi, parse_qi
from .relflow import double_degeneration, rel_flow, rel_flow_limit
from .surface import HalfTranslationSurface, holonomy_double_cover
from .surfio import load_surface, serialize_surf
from .tangent import TangentSpace, is_high_rank, quadratic_double_tangent, stratum_tangent

SCHEMA = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _direction(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"direction must be a,b; got {text!r}")
    try:
        a, b = Fraction(parts[0]), Fraction(parts[1])
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad direction {text!r}") from None
    if a == 0 and b == 0:
        raise UsageError("direction must be nonzero")
    den = a.denominator * b.denominator
    return int(a * den), int(b * den)


def _jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, QI):
        return format_qi(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return str(x)


def _setup(args):
    """(working surface, tangent space); a half-translation input is replaced by its cover."""
    try:
        surface = load_surface(args.surface)
    except OSError as exc:
        raise UsageError(f"cannot read {args.surface}: {exc.strerror}") from None
    sub = args.subvariety
    if isinstance(surface, HalfTranslationSurface):
        cover, inv = holonomy_double_cover(surface)
        if sub in ("stratum", None):
            return cover, stratum_tangent(cover)
        if sub == "quaddouble":
            return cover, quadratic_double_tangent(cover, inv)
        surface = cover
    elif sub == "quaddouble":
        raise FlatError("the quadratic double locus needs a half-translation surface")
    if sub in ("stratum", None):
        return surface, stratum_tangent(surface)
    if sub.startswith("file:"):
        path = sub[5:]
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise FlatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        vectors = [cocycle_from_json(d, surface) for d in data]
        return surface, TangentSpace.from_complex(surface, vectors)
    raise UsageError(f"unknown subvariety {sub!r}")


def _decomposition(args, surface):
    return Decomposition(surface, _direction(args.direction))


def _class(args, dec, t):
    classes = equivalence_classes(dec, t)
    if args.class_id is None:
        raise UsageError("--class is required")
    if not 0 <= args.class_id < len(classes):
        raise UsageError(f"class {args.class_id} does not exist; there are {len(classes)}")
    return classes[args.class_id]


def _coefficients(args, dec, cls, t):
    if args.vector is None:
        tv = find_typical_vector(dec, cls, t, seed=args.seed)
        return tv.coefficients
    try:
        data = json.loads(args.vector)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--vector is not JSON: {exc.msg}") from None
    if isinstance(data, dict):
        data = [data.get(str(c), "0") for c in cls.cylinders]
    if not isinstance(data, list) or len(data) != len(cls.cylinders):
        raise UsageError(f"--vector needs one coefficient per cylinder of the class ({len(cls.cylinders)})")
    try:
        return [parse_qi(str(x)) for x in data]
    except (ValueError, ZeroDivisionError):
        raise UsageError("--vector entries must be rationals or a+b i") from None


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args):
    surface = load_surface(args.surface)
    report = {
        "kind": "half_translation" if isinstance(surface, HalfTranslationSurface) else "translation",
        "components": list(surface.names),
        "genus": surface.genus(),
        "area": surface.area(),
    }
    if not isinstance(surface, HalfTranslationSurface):
        report["signature"] = str(surface.signature())
        report["marked_points"] = len(surface.marked_points)
    return report, None


def cmd_analyze(args):
    surface, t = _setup(args)
    report = {
        "signature": str(surface.signature()),
        "genus": surface.genus(),
        "area": surface.area(),
        "dim": t.dim,
        "rank": t.rank,
        "rel": t.rel,
    }
    if surface.n_components == 1:
        report["high_rank"] = is_high_rank(t)
    return report, None


def cmd_rank(args):
    surface, t = _setup(args)
    report = {"rank": t.rank, "rel": t.rel}
    if surface.n_components == 1:
        report["high_rank"] = is_high_rank(t)
    return report, None


def cmd_cyl(args):
    surface, t = _setup(args)
    dec = _decomposition(args, surface)
    classes = equivalence_classes(dec, t)
    stab = is_cylindrically_stable(dec, t)
    cyls = [
        {"index": c.index, "height": c.height, "circumference": c.circumference, "twist": c.twist, "shape": c.shape}
        for c in dec.cylinders
    ]
    cls = [
        {"index": k.index, "cylinders": list(k.cylinders), "genericity": k.genericity} for k in classes
    ]
    report = {"direction": list(dec.direction), "cylinders": cyls, "classes": cls, "stable": stab.stable}
    return report, None


def cmd_geminal(args):
    surface, t = _setup(args)
    rep = geminal_report(_decomposition(args, surface), t)
    return {"geminal": rep.geminal, "status": rep.status, "partner": rep.partner}, None


def cmd_stable(args):
    surface, t = _setup(args)
    s = is_cylindrically_stable(_decomposition(args, surface), t)
    report = {
        "stable": s.stable,
        "twist_dim": s.twist_dim,
        "preserving_dim": s.preserving_dim,
        "classes": s.n_classes,
        "rank": s.rank,
        "rel": s.rel,
    }
    return report, None


def _collapse(args):
    surface, t = _setup(args)
    dec = _decomposition(args, surface)
    cls = _class(args, dec, t)
    coeffs = _coefficients(args, dec, cls, t)
    res = collapse(dec, cls.cylinders, coeffs, t)
    return t, cls, coeffs, res


def _collapse_report(t, cls, coeffs, res):
    return {
        "class": list(cls.cylinders),
        "coefficients": coeffs,
        "t_v": res.t_v,
        "C_v": list(res.collapsing),
        "limit_signature": str(res.limit.signature()),
        "divergent": res.divergent,
        "rank_before": t.rank,
        "rank_after": res.tangent.rank,
        "dim_boundary": res.tangent.dim,
        "graph": [[e.tail, e.head, e.weight] for e in res.graph],
    }


def cmd_collapse(args):
    t, cls, coeffs, res = _collapse(args)
    return _collapse_report(t, cls, coeffs, res), res.limit


def cmd_dichotomy(args):
    t, cls, coeffs, res = _collapse(args)
    report = _collapse_report(t, cls, coeffs, res)
    verdict = classify_dichotomy(res, t, conditional=not cls.generic)
    report["verdict"] = verdict.verdict
    report["conditional"] = verdict.conditional
    report["failures"] = verdict.failures
    if isinstance(verdict, RankReducing):
        cert = verdict.certificate
        report["certificate"] = None if cert is None else cocycle_to_json(cert, res.limit_frame)
    else:
        report["scc"] = verdict.components
    return report, res.limit


def cmd_graph_dot(args):
    t, cls, coeffs, res = _collapse(args)
    verdict = classify_dichotomy(res, t, conditional=not cls.generic)
    return None, export_graph(res, verdict)


def cmd_double_collapse(args):
    surface, t = _setup(args)
    dec = _decomposition(args, surface)
    cls = _class(args, dec, t)
    coeffs = _coefficients(args, dec, cls, t)
    dd = double_degeneration(dec, cls.cylinders, coeffs, t)
    report = {
        "class": list(cls.cylinders),
        "inner_signature": str(dd.inner.limit.signature()),
        "limit_signature": str(dd.limit.signature()),
        "eta": cocycle_to_json(dd.eta, dd.inner.limit_frame),
        "eta_unique": dd.unique,
        "tie_break": None if dd.unique else "free variables set to zero",
        "dim_before": t.dim,
        "dim_boundary": dd.inner.tangent.dim,
        "dim_double": dd.tangent.dim,
        "rank_double": dd.tangent.rank,
        "rel_double": dd.tangent.rel,
        "checks": dd.checks,
    }
    return report, dd.limit


def cmd_relflow(args):
    surface, t = _setup(args)
    if args.xi is None:
        raise UsageError("--xi is required")
    if args.xi == "rel":
        zeros = surface.zeros
        if len(zeros) < 2:
            raise FlatError("the canonical rel generator needs two zeros")
        xi = CellComplex(surface).vertex_coboundary(zeros[1])
    else:
        try:
            with open(args.xi, encoding="utf-8") as fh:
                xi = cocycle_from_json(json.load(fh), surface)
        except OSError as exc:
            raise UsageError(f"cannot read {args.xi}: {exc.strerror}") from None
    if args.tau != "limit":
        try:
            time = Fraction(args.tau)
        except (ValueError, ZeroDivisionError):
            raise UsageError("--tau must be a rational or 'limit'") from None
        out = rel_flow(surface, xi, time)
        return {"tau": time, "signature": str(out.signature())}, out
    res = rel_flow_limit(surface, xi, t)
    if res.unbounded:
        return {"unbounded": True}, None
    report = {
        "unbounded": False,
        "tau": res.tau,
        "collapsing": list(res.collapsing),
        "vanishing_dim": len(res.vanishing),
        "limit_signature": str(res.limit.signature()),
        "dim_boundary": res.tangent.dim,
    }
    return report, res.limit


def cmd_cover(args):
    surface = load_surface(args.surface)
    if not isinstance(surface, HalfTranslationSurface):
        raise FlatError("the input is already a translation surface")
    cover, inv = holonomy_double_cover(surface)
    return {"signature": str(cover.signature()), "involution": list(inv.poly_map)}, cover


COMMANDS = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "cyl": cmd_cyl,
    "rank": cmd_rank,
    "geminal": cmd_geminal,
    "stable": cmd_stable,
    "collapse": cmd_collapse,
    "dichotomy": cmd_dichotomy,
    "relflow": cmd_relflow,
    "double-collapse": cmd_double_collapse,
    "cover": cmd_cover,
    "graph-dot": cmd_graph_dot,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flatdeg", description="Cylinder degenerations of translation surfaces.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--surface", required=True, help="SURF file or inline 'origami h=(..) v=(..)'")
    p.add_argument("--subvariety", default="stratum", help="stratum, quaddouble or file:<path>")
    p.add_argument("--direction", default="1,0", help="periodic direction a,b with rational entries")
    p.add_argument("--json", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class", dest="class_id", type=int)
    p.add_argument("--vector", help="JSON list of twist coefficients, one per cylinder of the class")
    p.add_argument("--xi", help="JSON cocycle file, or 'rel' for the canonical generator")
    p.add_argument("--tau", default="limit")
    return p


def _emit(report, surface, as_json: bool, out) -> None:
    if isinstance(surface, str):
        out.write(surface)
        return
    if as_json:
        data = {"schema": SCHEMA}
        data.update(_jsonable(report or {}))
        if surface is not None:
            data["surface"] = serialize_surf(surface)
        out.write(json.dumps(data, sort_keys=True, indent=2) + "\n")
        return
    for k, v in (report or {}).items():
        val = _jsonable(v)
        out.write(f"{k}: {val if isinstance(val, str) else json.dumps(val, sort_keys=True)}\n")
    if surface is not None:
        out.write(serialize_surf(surface))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report, surface = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"flatdeg: {exc}", file=sys.stderr)
        return 2
    except FlatError as exc:
        print(f"flatdeg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(report, surface, args.json, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
