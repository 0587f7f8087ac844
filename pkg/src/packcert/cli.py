"""Command-line front end: ``packcert <command> ...``.

Reports are built as named tables (fixed column lists) and rendered either as
one JSON document or as CSV blocks separated by ``# table:`` lines. The audit
command is the exception: its JSON output is the bare certificate list.
Nothing time- or host-dependent is written, so equal inputs give equal bytes.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from . import audit as audit_mod
from .cells import PARTIAL_LABEL, cluster_report, critical_edges, edge_angle_checks, enumerate_four_cells, gamma
from .errors import (
    BoundaryVertex,
    ContainerExceedsGeneration,
    ContainmentViolation,
    DegenerateInput,
    PackingValidationError,
)
from .packing import (
    REPAIR_STEP,
    density,
    generate_cubic,
    generate_fcc,
    generate_random_saturated,
    is_saturated,
    load,
    save,
    write_atomic,
)
from .score import FCC_CELL_VOLUME, L_neighbor_sum, compatibility_from_scores, scan_from_scores, vertex_scores
from .voronoi import INTERIOR_MARGIN, check_region, voronoi_cell

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
CHECK_TOL = 1e-9

ANCHORS = {
    "centers": "number of centers in the instance",
    "density": "vol(B(0,r) & union of B(v,1)) / vol(B(0,r)), exact lens sum",
    "saturation_gap": "max over probe grid of distance to nearest center; < 2 means saturated at that resolution",
    "voronoi_volume": "vol(voronoi(V,v)) over centers with |v| <= region",
    "G": "G(v,L) = -vol(voronoi(V,v)) + 8 m1 - 8 m2 sum_u L(h(v,u))",
    "L_sum_max": "max over v of sum_u L(h(v,u)) over |u-v| <= 2 h0; at most 12",
    "negligibility": "S(r)/r^2 with S(r) = sum of G(v,L) over |v| <= r",
    "fcc_compat": "min over v of vol(voronoi(V,v)) + G(v,L) - 4 sqrt(2); >= 0 when FCC-compatible",
    "cells": "4-cells: circumradius < sqrt(2), empty circumball, at least one vertex in the region",
    "gamma": "gamma(X,L) = vol(X) - (2 m1/pi) tsol(X) + (8 m2/pi) sum_e dih(X,e) L(h(e))",
    "edge_angle": "max over interior edges with h < sqrt(2) of the dihedral sum around it; at most 2 pi",
    "vertex_angle": "max over interior vertices of the solid-angle sum around it; at most 4 pi",
    "cluster": "sum over 4-cells X with critical edge e of gamma(X) wt(X) + beta(e,X)",
}


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- rendering


def _cell(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _json_value(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        x = float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.tables: dict[str, tuple[list[str], list[list]]] = {}
        self.failed: list[str] = []

    def table(self, name: str, columns: list[str]):
        rows: list[list] = []
        self.tables[name] = (columns, rows)
        return rows

    def to_json(self) -> str:
        doc = {
            "tool": "packcert",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "tables": {
                name: {"columns": cols, "rows": [[_json_value(x) for x in row] for row in rows]}
                for name, (cols, rows) in self.tables.items()
            },
            "failed_checks": self.failed,
        }
        return json.dumps(doc, indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# packcert {__version__} {self.command}\n")
        buf.write(f"# config: {json.dumps(self.config, sort_keys=True)}\n")
        buf.write(f"# failed_checks: {';'.join(self.failed)}\n")
        w = csv.writer(buf, lineterminator="\n")
        for name, (cols, rows) in self.tables.items():
            buf.write(f"# table: {name}\n")
            w.writerow(cols)
            for row in rows:
                w.writerow([_cell(x) for x in row])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def _certificate_text(cert: audit_mod.Certificate, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(cert.to_list(), indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# packcert {__version__} audit\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "claim", "relation", "computed_lo", "computed_hi", "bound_lo", "bound_hi", "pass", "note"])
    for s in cert.steps:
        w.writerow([s.name, s.claim, s.relation] + [_cell(x) for x in (
            s.computed.lo, s.computed.hi, s.bound.lo, s.bound.hi, s.passed)] + [s.note])
    return buf.getvalue()


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


# -------------------------------------------------------------------- inputs


def _r_values(args) -> list[float]:
    rs = [float(r) for r in (args.r or [])]
    bad = [r for r in rs if not r >= 1.0]
    if bad:
        raise UsageError(f"r values must be >= 1, got {bad}")
    return rs


def _generate(kind: str, radius: float, seed):
    if radius < 4:
        raise UsageError(f"radius must be >= 4, got {radius}")
    if kind == "fcc":
        return generate_fcc(radius)
    if kind == "cubic":
        return generate_cubic(radius)
    if kind == "random":
        if seed is None:
            raise UsageError("random packings need an explicit --seed")
        return generate_random_saturated(radius, seed)
    raise UsageError(f"cannot generate kind {kind!r}")


def _input_packing(args):
    if args.packing and args.kind:
        raise UsageError("give either a packing file or --kind/--radius, not both")
    if args.packing:
        return load(args.packing)
    if args.kind:
        if args.radius is None:
            raise UsageError("--kind needs --radius")
        return _generate(args.kind, args.radius, args.seed)
    raise UsageError("no input: give a packing file or --kind/--radius")


def _region(args, p) -> float:
    if args.region is not None:
        return float(args.region)
    return max(0.0, p.gen_radius - INTERIOR_MARGIN)


def _source_config(args, p) -> dict:
    cfg = {"packing": args.packing} if args.packing else {"kind": args.kind, "radius": args.radius, "seed": args.seed}
    cfg.update(gen_radius=p.gen_radius, packing_kind=p.kind, packing_seed=p.seed)
    return cfg


# ------------------------------------------------------------------ sections


def _measure_tables(rep: Report, p, region: float, rs: list[float], grid_step: float) -> None:
    rows = rep.table("measure", ["quantity", "r", "value", "anchor"])
    rows.append(["centers", None, len(p), ANCHORS["centers"]])
    for r in rs:
        if r + 1.0 > p.gen_radius:
            raise UsageError(f"r = {r:g} needs r + 1 <= gen_radius = {p.gen_radius:g}")
        rows.append(["density", r, density(p, r), ANCHORS["density"]])
    sat_region = p.gen_radius - 1.0
    if sat_region > 0:
        cert = is_saturated(p, sat_region, grid_step)
        rows.append(["saturation_gap", sat_region, cert.worst_gap, ANCHORS["saturation_gap"]])
    scores = vertex_scores(p, region)
    vols = [vol for vol, _ in scores.values()]
    gs = [g for _, g in scores.values()]
    rows.append(["voronoi_count", region, len(vols), ANCHORS["voronoi_volume"]])
    if vols:
        rows.append(["voronoi_volume_min", region, min(vols), ANCHORS["voronoi_volume"]])
        rows.append(["voronoi_volume_max", region, max(vols), ANCHORS["voronoi_volume"]])
        rows.append(["voronoi_volume_mean", region, math.fsum(vols) / len(vols), ANCHORS["voronoi_volume"]])
        rows.append(["G_min", region, min(gs), ANCHORS["G"]])
        rows.append(["G_max", region, max(gs), ANCHORS["G"]])
        lsum = max(L_neighbor_sum(p, v) for v in scores)
        rows.append(["L_sum_max", region, lsum, ANCHORS["L_sum_max"]])
        if lsum > 12.0 + CHECK_TOL:
            rep.failed.append("L_sum_max")
        compat = compatibility_from_scores(scores)
        rows.append(["fcc_compat_min", region, compat.min_margin, ANCHORS["fcc_compat"]])
        rows.append(["fcc_compat_argmin", region, compat.argmin, ANCHORS["fcc_compat"]])
        if not compat.passed:
            rep.failed.append("fcc_compat_min")
    gmap = {v: g for v, (_, g) in scores.items()}
    for r, s, ratio in scan_from_scores(p, gmap, [r for r in rs if r <= region]):
        rows.append(["negligibility_sum", r, s, ANCHORS["negligibility"]])
        rows.append(["negligibility_ratio", r, ratio, ANCHORS["negligibility"]])


def _voronoi_tables(rep: Report, p, region: float) -> None:
    rows = rep.table("voronoi", ["index", "norm", "volume", "max_radius", "faces", "volume_minus_4sqrt2"])
    check_region(p, region)
    for v in p.indices_within(region):
        cell = voronoi_cell(p, v)
        rows.append([int(v), float(np.linalg.norm(p.centers[v])), cell.volume, cell.max_radius,
                     len(cell.polytope.faces), cell.volume - FCC_CELL_VOLUME])


def _cells_tables(rep: Report, p, region: float) -> None:
    cells = enumerate_four_cells(p, region)
    summary = rep.table("cells_summary", ["quantity", "value", "anchor"])
    plain = [gamma(X) for X in cells if not critical_edges(X)[0]]
    angles = edge_angle_checks(p, region, cells)
    summary.append(["cell_count", len(cells), ANCHORS["cells"]])
    summary.append(["cospherical_count", sum(X.cospherical for X in cells), ANCHORS["cells"]])
    summary.append(["noncritical_count", len(plain), ANCHORS["gamma"]])
    summary.append(["noncritical_gamma_min", min(plain) if plain else None, ANCHORS["gamma"]])
    summary.append(["edge_angle_max", angles.max_edge_sum, ANCHORS["edge_angle"]])
    summary.append(["vertex_angle_max", angles.max_vertex_sum, ANCHORS["vertex_angle"]])
    if not angles.passed:
        rep.failed.append("cell_angles")
    clusters = rep.table("clusters", ["edge_i", "edge_j", "h", "partial_gamma", "cell_count", "label"])
    for row in cluster_report(p, region, cells):
        clusters.append([row.edge.i, row.edge.j, row.edge.h, row.partial_gamma, row.cell_count, row.label])


def _audit_table(rep: Report, cert: audit_mod.Certificate) -> None:
    rows = rep.table("audit", ["name", "claim", "relation", "computed_lo", "computed_hi",
                               "bound_lo", "bound_hi", "pass", "note"])
    for s in cert.steps:
        rows.append([s.name, s.claim, s.relation, s.computed.lo, s.computed.hi,
                     s.bound.lo, s.bound.hi, s.passed, s.note])
    if not cert.passed:
        rep.failed.append("audit")


def _bounds(args):
    bounds = audit_mod.BOUNDS
    for item in args.tighten or []:
        key, sep, value = item.rpartition(":")
        if not sep or key not in bounds:
            raise UsageError(f"--tighten expects KEY:VALUE with KEY one of {sorted(bounds)}, got {item!r}")
        try:
            bounds = audit_mod.tighten(key, bounds, to=Fraction(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"bad --tighten value {value!r}") from exc
    return bounds


# ------------------------------------------------------------------ commands


def cmd_generate(args) -> int:
    kind = args.kind_pos or args.kind
    if kind is None or (args.kind_pos and args.kind and args.kind_pos != args.kind):
        raise UsageError("give the kind once, positionally or with --kind")
    if args.radius is None:
        raise UsageError("--radius is required")
    if args.out is None:
        raise UsageError("--out is required")
    p = _generate(kind, args.radius, args.seed)
    save(p, args.out)
    cert = is_saturated(p, p.gen_radius - 1.0, args.grid_step)
    print(f"centers: {len(p)}")
    print(f"saturation: worst gap {cert.worst_gap:.6g} over B(0, {cert.region_radius:g}) "
          f"at grid step {cert.grid_step:g} -> {'saturated' if cert.saturated else 'NOT saturated'}")
    return EXIT_OK


def cmd_measure(args) -> int:
    p = _input_packing(args)
    region = _region(args, p)
    rs = _r_values(args)
    cfg = _source_config(args, p) | {"region": region, "r": rs, "grid_step": args.grid_step}
    rep = Report("measure", cfg)
    _measure_tables(rep, p, region, rs, args.grid_step)
    _emit(rep.render(args.format), args.out)
    return EXIT_CHECK if rep.failed else EXIT_OK


def cmd_voronoi_stats(args) -> int:
    p = _input_packing(args)
    region = _region(args, p)
    rep = Report("voronoi-stats", _source_config(args, p) | {"region": region})
    _voronoi_tables(rep, p, region)
    _emit(rep.render(args.format), args.out)
    return EXIT_OK


def cmd_cells(args) -> int:
    p = _input_packing(args)
    region = _region(args, p)
    rep = Report("cells", _source_config(args, p) | {"region": region, "cluster_label": PARTIAL_LABEL})
    _cells_tables(rep, p, region)
    _emit(rep.render(args.format), args.out)
    return EXIT_CHECK if rep.failed else EXIT_OK


def cmd_audit(args) -> int:
    bounds = _bounds(args)
    p = None
    if args.packing or args.kind:
        p = _input_packing(args)
    cert = audit_mod.full_report(bounds, packing=p, r_list=_r_values(args) if p is not None else ())
    _emit(_certificate_text(cert, args.format), args.out)
    for s in cert.failures():
        print(f"FAIL {s.name}: {s.claim}", file=sys.stderr)
    return EXIT_OK if cert.passed else EXIT_CHECK


def cmd_report(args) -> int:
    p = _input_packing(args)
    region = _region(args, p)
    rs = _r_values(args)
    bounds = _bounds(args)
    cfg = _source_config(args, p) | {"region": region, "r": rs, "grid_step": args.grid_step}
    rep = Report("report", cfg)
    _measure_tables(rep, p, region, rs, args.grid_step)
    _cells_tables(rep, p, region)
    _audit_table(rep, audit_mod.full_report(bounds, packing=p, r_list=rs))
    _emit(rep.render(args.format), args.out)
    return EXIT_CHECK if rep.failed else EXIT_OK


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="packcert", description="Sphere-packing density certification tools.")
    ap.add_argument("--version", action="version", version=f"packcert {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, packing=True):
        if packing:
            sp.add_argument("packing", nargs="?", help="packing JSON file")
        sp.add_argument("--kind", choices=["fcc", "cubic", "random"])
        sp.add_argument("--radius", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=["json", "csv"], default="json")

    g = sub.add_parser("generate", help="generate a packing file")
    g.add_argument("kind_pos", nargs="?", choices=["fcc", "cubic", "random"], metavar="kind")
    common(g, packing=False)
    g.add_argument("--grid-step", type=float, default=REPAIR_STEP)
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("measure", help="density, Voronoi, score and compatibility report")
    common(m)
    m.add_argument("--r", type=float, action="append", help="container radius (repeatable)")
    m.add_argument("--region", type=float)
    m.add_argument("--grid-step", type=float, default=REPAIR_STEP)
    m.set_defaults(func=cmd_measure)

    v = sub.add_parser("voronoi-stats", help="per-center Voronoi cell table")
    common(v)
    v.add_argument("--region", type=float)
    v.set_defaults(func=cmd_voronoi_stats)

    c = sub.add_parser("cells", help="4-cell summary and critical-edge clusters")
    common(c)
    c.add_argument("--region", type=float)
    c.set_defaults(func=cmd_cells)

    a = sub.add_parser("audit", help="interval audit of the constant chain")
    common(a)
    a.add_argument("--r", type=float, action="append", help="also check the final bound at this r")
    a.add_argument("--tighten", action="append", metavar="KEY:VALUE", help="replace one audited bound")
    a.set_defaults(func=cmd_audit)

    r = sub.add_parser("report", help="measure + cells + audit in one document")
    common(r)
    r.add_argument("--r", type=float, action="append")
    r.add_argument("--region", type=float)
    r.add_argument("--grid-step", type=float, default=REPAIR_STEP)
    r.add_argument("--tighten", action="append", metavar="KEY:VALUE")
    r.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "grid_step", 1.0) <= 0:
        print("packcert: error: --grid-step must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, BoundaryVertex, ContainerExceedsGeneration) as exc:
        print(f"packcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ContainmentViolation, DegenerateInput) as exc:
        print(f"packcert: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (OSError, PackingValidationError) as exc:
        print(f"packcert: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
