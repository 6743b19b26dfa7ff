#!/usr/bin/env python3
"""
End-to-end pipeline and command line.

find_shortest_geodesic -> classify_geodesic -> find_second_geodesic ->
verify_product, plus the width check. Solver runs for different seeds are
independent and may run on a thread pool; results are joined in seed order
so reports stay deterministic.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from birkhoff import ShorteningOutcome, birkhoff_run, geodesic_residual
from config import LOG_FORMAT, Settings, load_settings, log_level
from constructions import (
    FIGURE_EIGHT_CONSTANT,
    LONG_SPHERE_CONSTANT,
    LONG_SPHERE_DEPTH,
    SHORT_XY_CONSTANT,
    SHORT_Z_CONSTANT,
    UNIVERSAL_CONSTANT,
    CaseLabel,
    bracket_n,
    covering_N,
    long_sphere_candidate,
    minmax_over_sweepout,
    noncontractibility_check,
    random_surface_points,
    rotman_bound,
    starfish_long_candidate,
    starfish_short_sweepout_xy,
    starfish_short_sweepout_z,
    sweepout_from_distance,
)
from curves import (
    ClosedCurve,
    SurfacePoint,
    complement_regions,
    is_distinct,
    obj_polyline,
    self_intersections,
    winding_mod2,
)
from errors import (
    ConstructionDegenerate,
    GeodesicError,
    NoDistinctGeodesic,
    NoGeodesicFound,
    NonGenericCrossing,
    PathThroughCurve,
    PreconditionError,
    RegionExtractionFailed,
    RotmanViolated,
)
from mesh import GENERATORS, TriMesh, load_mesh_file, save_obj, save_off
from metric import DistanceField, distance_field, farthest_point, level_length, level_set
from models import CheckRow, GeodesicSummary, HypothesisRow, RatioRow, VerificationReportModel, report_json

logger = logging.getLogger(__name__)

WIDTH_CONSTANT = 1600.0
FALLBACK_PAIRS = 8
LOOP_ATTEMPTS = 8

INDEX_ASSUMPTION = "Morse index of the shortest geodesic is assumed, not computed"
STABILITY_ASSUMPTION = "stability of the figure-eight geodesic is assumed, not computed"


@dataclass
class GeodesicRecord:
    curve: ClosedCurve
    residual: float
    self_crossings: int
    provenance: str
    alternatives: List[ClosedCurve] = field(default_factory=list)
    widths: List[float] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def length(self) -> float:
        return self.curve.length

    def summary(self, with_points: bool = True) -> GeodesicSummary:
        points = self.curve.points.tolist() if with_points else []
        return GeodesicSummary(length=self.length, residual=self.residual,
                               self_crossings=self.self_crossings, provenance=self.provenance,
                               points=points)


def count_self_crossings(mesh: TriMesh, c: ClosedCurve) -> int:
    try:
        return len(self_intersections(mesh, c))
    except NonGenericCrossing:
        logger.warning("curve touches itself tangentially; counting it as non-simple")
        return -1


def _record(mesh: TriMesh, outcome: ShorteningOutcome, provenance: str, **extra) -> GeodesicRecord:
    return GeodesicRecord(outcome.curve, outcome.residual, count_self_crossings(mesh, outcome.curve),
                          provenance, **extra)


def _run_all(fn: Callable[[Any], Any], items: Sequence[Any], workers: int) -> List[Any]:
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- shortest geodesic ---------------------------------------------------------------

def _short_loop(mesh: TriMesh, field_p: DistanceField, rng: np.random.Generator) -> Optional[ClosedCurve]:
    """Largest level cycle of a small distance sphere whose length fits the loop window."""
    lo, hi = 4.0 * mesh.min_edge, rotman_bound(mesh.area)
    r = rng.uniform(0.1, 0.5) * field_p.max
    for _ in range(LOOP_ATTEMPTS):
        length = level_length(field_p, r)
        if lo <= length <= hi:
            cycles = level_set(field_p, r)
            if cycles:
                return cycles[0].curve
        r *= 0.5 if length > hi else 1.5
        if not 0 < r < field_p.max:
            break
    return None


def find_shortest_geodesic(mesh: TriMesh, seeds: Optional[int] = None, settings: Optional[Settings] = None,
                           workers: int = 1) -> GeodesicRecord:
    """Shortest geodesic found by min-max over sweepouts and by shortening short loops."""
    settings = settings or Settings()
    seeds = settings.seeds if seeds is None else seeds
    if seeds < 4:
        raise PreconditionError("at least 4 seeds are needed", {"seeds": seeds})
    rng = np.random.default_rng(settings.rng_seed)
    sources = random_surface_points(mesh, rng, seeds)
    loop_sources = random_surface_points(mesh, rng, seeds)
    loop_rngs = [np.random.default_rng(s) for s in rng.integers(0, 2 ** 31, size=seeds)]

    def by_sweepout(x: SurfacePoint):
        try:
            sweep = sweepout_from_distance(mesh, x, settings.slices, settings.steiner_per_edge)
            result = minmax_over_sweepout(mesh, sweep, settings)
            return result.outcome, result.widths[-1], f"min-max over sweepout from face {x.face}"
        except GeodesicError as exc:
            logger.info("sweepout from face %d failed: %s", x.face, exc)
            return None

    def by_loop(job: Tuple[SurfacePoint, np.random.Generator]):
        p, loop_rng = job
        try:
            loop = _short_loop(mesh, distance_field(mesh, p, settings.steiner_per_edge), loop_rng)
            if loop is None:
                return None
            out = birkhoff_run(mesh, loop, settings, max_iter=settings.loop_iters)
            return out, None, f"shortened loop around face {p.face}"
        except GeodesicError as exc:
            logger.info("loop around face %d failed: %s", p.face, exc)
            return None

    runs = _run_all(by_sweepout, sources, workers) + _run_all(by_loop, list(zip(loop_sources, loop_rngs)), workers)
    done = [r for r in runs if r is not None]
    widths = [w for _, w, _ in done if w is not None]
    found = [(out, prov) for out, _, prov in done if out.is_geodesic]
    logger.info("shortest geodesic search: %d of %d runs reached a geodesic", len(found), len(runs))
    if not found:
        raise NoGeodesicFound("every run collapsed or stalled", {"runs": len(runs)})

    found.sort(key=lambda item: item[0].length)
    best, provenance = found[0]
    record = _record(mesh, best, provenance, alternatives=[out.curve for out, _ in found[1:]], widths=widths)
    bound = rotman_bound(mesh.area)
    if record.length > bound:
        raise RotmanViolated("shortest geodesic exceeds 4 sqrt(2A)",
                             {"L1": record.length, "bound": bound})
    logger.info("L1 = %.6g (%s)", record.length, provenance)
    return record


# --- classification --------------------------------------------------------------------

@dataclass
class CaseAnalysis:
    label: CaseLabel
    points: Dict[str, SurfacePoint] = field(default_factory=dict)
    depths: Dict[str, float] = field(default_factory=dict)
    hypotheses: List[HypothesisRow] = field(default_factory=list)

    @property
    def hypotheses_held(self) -> bool:
        return bool(self.hypotheses) and all(h.held for h in self.hypotheses)


def case_analysis(mesh: TriMesh, gamma1: GeodesicRecord, settings: Optional[Settings] = None) -> CaseAnalysis:
    """Label plus the deepest point of each complementary region and the depth hypotheses."""
    settings = settings or Settings()
    A, L1 = mesh.area, gamma1.length
    crossings = gamma1.self_crossings
    if crossings not in (0, 1):
        logger.info("shortest geodesic has %d self-crossings; using the general fallback", crossings)
        return CaseAnalysis(CaseLabel.GENERAL_FALLBACK)

    regions = complement_regions(mesh, gamma1.curve)
    expected = 2 if crossings == 0 else 3
    if len(regions) != expected:
        raise RegionExtractionFailed(f"expected {expected} complementary regions, found {len(regions)}",
                                     {"regions": len(regions), "self_crossings": crossings})
    field_g = DistanceField(mesh, gamma1.curve, settings.steiner_per_edge)
    deepest = [farthest_point(field_g, restrict=r.mask) for r in regions]

    if crossings == 0:
        threshold = LONG_SPHERE_DEPTH * A / L1
        (x, dx), (y, dy) = deepest
        hyps = [HypothesisRow(name="d_x > 170 A / L1", value=dx, threshold=threshold, held=dx > threshold),
                HypothesisRow(name="d_y > 170 A / L1", value=dy, threshold=threshold, held=dy > threshold)]
        return CaseAnalysis(CaseLabel.LONG_SPHERE, {"x": x, "y": y}, {"d_x": dx, "d_y": dy}, hyps)

    # the outer region is the one separated from both others by the curve
    pts = [p for p, _ in deepest]
    parity = np.zeros((3, 3), dtype=int)
    for i in range(3):
        for j in range(i + 1, 3):
            try:
                parity[i, j] = parity[j, i] = winding_mod2(mesh, gamma1.curve, pts[i], pts[j],
                                                           steiner=settings.steiner_per_edge)
            except PathThroughCurve as exc:
                raise RegionExtractionFailed("regions could not be told apart", {"reason": str(exc)}) from exc
    outer = [k for k in range(3) if parity[k].sum() == 2]
    if len(outer) != 1:
        raise RegionExtractionFailed("no region is separated from both others", {"parity": parity.tolist()})
    kz = outer[0]
    lobes = [k for k in range(3) if k != kz]
    threshold = FIGURE_EIGHT_CONSTANT * A / L1
    d = {k: deepest[k][1] for k in range(3)}
    short_lobes = [k for k in lobes if d[k] <= threshold]
    if short_lobes:
        ky = min(lobes, key=lambda k: d[k])
        kx = lobes[0] if lobes[1] == ky else lobes[1]
        label = CaseLabel.STARFISH_SHORT_XY
    else:
        kx, ky = lobes
        label = CaseLabel.STARFISH_SHORT_Z if d[kz] <= threshold else CaseLabel.STARFISH_ALL_LONG
    points = {"x": pts[kx], "y": pts[ky], "z": pts[kz]}
    depths = {"d_x": d[kx], "d_y": d[ky], "d_z": d[kz]}

    def row(name: str, value: float, long: bool) -> HypothesisRow:
        held = value > threshold if long else value <= threshold
        return HypothesisRow(name=f"{name} {'>' if long else '<='} 16 sqrt(2) A / L1", value=value,
                             threshold=threshold, held=held)

    if label is CaseLabel.STARFISH_ALL_LONG:
        hyps = [row("d_x", depths["d_x"], True), row("d_y", depths["d_y"], True), row("d_z", depths["d_z"], True)]
    elif label is CaseLabel.STARFISH_SHORT_Z:
        hyps = [row("d_x", depths["d_x"], True), row("d_y", depths["d_y"], True), row("d_z", depths["d_z"], False)]
    else:
        hyps = [row("d_y", depths["d_y"], False)]
    return CaseAnalysis(label, points, depths, hyps)


def classify_geodesic(mesh: TriMesh, gamma1: GeodesicRecord, settings: Optional[Settings] = None) -> CaseLabel:
    return case_analysis(mesh, gamma1, settings).label


# --- second geodesic -----------------------------------------------------------------------

def _construct(mesh: TriMesh, gamma1: GeodesicRecord, analysis: CaseAnalysis, settings: Settings,
               checks: Dict[str, Any]) -> Tuple[ShorteningOutcome, str, List[float]]:
    p = analysis.points
    label = analysis.label
    if label is CaseLabel.LONG_SPHERE:
        return long_sphere_candidate(mesh, gamma1.curve, p["x"], p["y"], settings), "long sphere covering", []
    if label is CaseLabel.STARFISH_ALL_LONG:
        out = starfish_long_candidate(mesh, gamma1.curve, p["x"], p["y"], p["z"], settings)
        return out, "figure-eight spine candidate", []
    build = starfish_short_sweepout_z if label is CaseLabel.STARFISH_SHORT_Z else starfish_short_sweepout_xy
    sweep = build(mesh, gamma1.curve, p["x"], p["y"], p["z"], settings)
    degree_one = noncontractibility_check(mesh, sweep, settings)
    checks["noncontractible"] = degree_one
    if not degree_one:
        raise ConstructionDegenerate(f"{label.value} sweepout has even degree",
                                     {"provenance": sweep.provenance, "slices": len(sweep.slices)})
    result = minmax_over_sweepout(mesh, sweep, settings)
    return result.outcome, f"min-max over {sweep.provenance} sweepout", result.widths


def _general_candidates(mesh: TriMesh, settings: Settings, workers: int) -> List[Tuple[ShorteningOutcome, str]]:
    rng = np.random.default_rng(settings.rng_seed + 1)
    sources = random_surface_points(mesh, rng, FALLBACK_PAIRS)

    def run(x: SurfacePoint):
        try:
            sweep = sweepout_from_distance(mesh, x, settings.slices, settings.steiner_per_edge)
            return minmax_over_sweepout(mesh, sweep, settings).outcome, f"min-max over sweepout from face {x.face}"
        except GeodesicError as exc:
            logger.info("fallback sweepout from face %d failed: %s", x.face, exc)
            return None

    return [r for r in _run_all(run, sources, workers) if r is not None]


def find_second_geodesic(mesh: TriMesh, gamma1: GeodesicRecord, label: Optional[CaseLabel] = None,
                         settings: Optional[Settings] = None, analysis: Optional[CaseAnalysis] = None,
                         workers: int = 1) -> GeodesicRecord:
    """Shortest geodesic distinct from gamma1, by the construction its case calls for."""
    settings = settings or Settings()
    if analysis is None:
        analysis = case_analysis(mesh, gamma1, settings)
    if label is not None and label is not analysis.label:
        analysis = CaseAnalysis(label, analysis.points, analysis.depths, analysis.hypotheses)

    rejected: List[Dict[str, Any]] = []
    checks: Dict[str, Any] = {}
    if analysis.label is not CaseLabel.GENERAL_FALLBACK:
        try:
            outcome, provenance, widths = _construct(mesh, gamma1, analysis, settings, checks)
            if outcome.is_geodesic:
                distinct, evidence = is_distinct(gamma1.curve, outcome.curve)
                if distinct:
                    logger.info("%s construction gave L2 = %.6g", analysis.label.value, outcome.length)
                    return _record(mesh, outcome, provenance, widths=widths,
                                   details={"distinctness": evidence, **checks, **outcome.details})
                rejected.append({"provenance": provenance, "length": outcome.length, "evidence": evidence})
            else:
                rejected.append({"provenance": provenance, "kind": outcome.kind.value})
            logger.warning("%s construction did not give a distinct geodesic; falling back", analysis.label.value)
        except GeodesicError as exc:
            logger.warning("%s construction failed (%s: %s); falling back",
                           analysis.label.value, type(exc).__name__, exc)
            rejected.append({"error": type(exc).__name__, "message": str(exc)})

    candidates = [(c, "alternative from the shortest-geodesic search") for c in gamma1.alternatives]
    candidates += [(out.curve, prov) for out, prov in _general_candidates(mesh, settings, workers)
                   if out.is_geodesic]
    survivors = []
    for curve, provenance in candidates:
        distinct, evidence = is_distinct(gamma1.curve, curve)
        if distinct:
            survivors.append((curve, provenance, evidence))
        else:
            rejected.append({"provenance": provenance, "length": curve.length, "evidence": evidence})
    if not survivors:
        raise NoDistinctGeodesic("every candidate covers the shortest geodesic", {"rejected": rejected})
    curve, provenance, evidence = min(survivors, key=lambda item: item[0].length)
    return GeodesicRecord(curve, geodesic_residual(mesh, curve), count_self_crossings(mesh, curve), provenance,
                          details={"distinctness": evidence, "rejected": rejected, **checks})


# --- verification ----------------------------------------------------------------------------

def width1_check(mesh: TriMesh, settings: Optional[Settings] = None, axes: int = 4,
                 workers: int = 1) -> Tuple[float, float, bool]:
    """Smallest pulled-tight width over several sweepouts, against 1600 sqrt(A)."""
    settings = settings or Settings()
    if axes < 4:
        raise PreconditionError("the width check needs at least 4 sweepouts", {"axes": axes})
    rng = np.random.default_rng(settings.rng_seed + 2)

    def width(x: SurfacePoint) -> Optional[float]:
        try:
            sweep = sweepout_from_distance(mesh, x, settings.slices, settings.steiner_per_edge)
            return minmax_over_sweepout(mesh, sweep, settings).width
        except GeodesicError as exc:
            logger.info("width sweepout from face %d failed: %s", x.face, exc)
            return None

    widths = [w for w in _run_all(width, random_surface_points(mesh, rng, axes), workers) if w is not None]
    bound = WIDTH_CONSTANT * math.sqrt(mesh.area)
    if not widths:
        logger.warning("no sweepout could be pulled tight")
        return float("inf"), bound, False
    w = min(widths)
    return w, bound, w <= bound


CONSTANT_ROWS = (
    ("long sphere", LONG_SPHERE_CONSTANT, CaseLabel.LONG_SPHERE),
    ("figure eight, all legs long", FIGURE_EIGHT_CONSTANT, CaseLabel.STARFISH_ALL_LONG),
    ("figure eight, short outer leg", SHORT_Z_CONSTANT, CaseLabel.STARFISH_SHORT_Z),
    ("figure eight, short lobe leg", SHORT_XY_CONSTANT, CaseLabel.STARFISH_SHORT_XY),
)


def verify_product(mesh: TriMesh, gamma1: GeodesicRecord, gamma2: GeodesicRecord,
                   analysis: CaseAnalysis, settings: Optional[Settings] = None,
                   width: Optional[Tuple[float, float, bool]] = None,
                   timings: Optional[Dict[str, float]] = None) -> VerificationReportModel:
    settings = settings or Settings()
    A, L1, L2 = mesh.area, gamma1.length, gamma2.length
    product = L1 * L2
    ratio = product / A

    ratios = []
    for name, constant, label in CONSTANT_ROWS:
        applicable = analysis.label is label and analysis.hypotheses_held
        ratios.append(RatioRow(bound=name, constant=constant, product_over_area=ratio,
                               status="pass" if ratio <= constant else "fail",
                               applicability="applicable" if applicable else "informational"))
    ratios.append(RatioRow(bound="universal", constant=UNIVERSAL_CONSTANT, product_over_area=ratio,
                           status="pass" if ratio <= UNIVERSAL_CONSTANT else "fail",
                           applicability="applicable"))

    bound = rotman_bound(A)
    distinct, evidence = is_distinct(gamma1.curve, gamma2.curve)
    checks = [CheckRow(name="rotman", passed=L1 <= bound, detail=f"L1={L1:.6g} <= 4 sqrt(2A)={bound:.6g}")]
    if width is None and gamma1.widths:
        w = min(gamma1.widths)
        wb = WIDTH_CONSTANT * math.sqrt(A)
        width = (w, wb, w <= wb)
    if width is not None:
        checks.append(CheckRow(name="width1", passed=bool(width[2]),
                               detail=f"width={width[0]:.6g} <= 1600 sqrt(A)={width[1]:.6g}"))
    checks.append(CheckRow(name="distinctness", passed=distinct,
                           detail=f"hausdorff={evidence['hausdorff']:.6g}, gap={evidence['length_gap']:.4g}"))
    if "noncontractible" in gamma2.details:
        degree = 1 if gamma2.details["noncontractible"] else 0
        checks.append(CheckRow(name="noncontractibility", passed=degree == 1,
                               detail=f"degree mod 2 of the {analysis.label.value} sweepout is {degree}"))

    notes = []
    try:
        n = bracket_n(A, L1)
        p = (200.0 * math.sqrt(2.0) * (n + 1)) ** 2
        notes.append(f"n={n}, N={covering_N(n)}: the general argument uses the {p:.6g}-width, which is "
                     "not estimated; only the final inequality is checked here")
    except GeodesicError as exc:
        notes.append(f"n could not be bracketed: {exc}")
    if analysis.label is CaseLabel.STARFISH_SHORT_XY:
        notes.append("the short lobe leg bound is stated as 64 A / L1 and derived as 64 sqrt(2) A / L1; "
                     "the larger constant is checked")

    report = VerificationReportModel(
        mesh={"name": mesh.name, **mesh.diagnostics().model_dump()},
        area=A,
        L1=L1,
        L2=L2,
        product=product,
        case=analysis.label.value,
        hypotheses=analysis.hypotheses,
        ratios=ratios,
        checks=checks,
        distinctness={"distinct": distinct, **evidence, "provenance": gamma2.provenance},
        assumptions=[INDEX_ASSUMPTION] + ([STABILITY_ASSUMPTION] if analysis.label.value.startswith("Starfish") else []),
        notes=notes,
        settings=settings.public(),
        timings=dict(timings or {}),
    )
    failed = [r.bound for r in ratios if r.applicability == "applicable" and r.status == "fail"]
    if failed:
        logger.warning("applicable constant rows failed: %s", ", ".join(failed))
    return report


def run_pipeline(mesh: TriMesh, settings: Optional[Settings] = None, workers: int = 1,
                 with_width: bool = False):
    """Full pipeline; returns (report, gamma1, gamma2)."""
    settings = settings or Settings()
    timings: Dict[str, float] = {}
    t0 = time.perf_counter()
    gamma1 = find_shortest_geodesic(mesh, settings=settings, workers=workers)
    timings["shortest"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    analysis = case_analysis(mesh, gamma1, settings)
    logger.info("case: %s", analysis.label.value)
    timings["classify"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    gamma2 = find_second_geodesic(mesh, gamma1, settings=settings, analysis=analysis, workers=workers)
    timings["second"] = time.perf_counter() - t0
    width = None
    if with_width:
        t0 = time.perf_counter()
        width = width1_check(mesh, settings, workers=workers)
        timings["width"] = time.perf_counter() - t0
    report = verify_product(mesh, gamma1, gamma2, analysis, settings, width=width, timings=timings)
    return report, gamma1, gamma2


# --- command line -----------------------------------------------------------------------------

def _parse_params(items: Sequence[str]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise PreconditionError(f"generator parameter must be key=value, got {item!r}")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


def _settings_from(args: argparse.Namespace) -> Settings:
    return load_settings({
        "steiner_per_edge": getattr(args, "steiner", None),
        "geodesic_tol": getattr(args, "geodesic_tol", None),
        "collapse_tol": getattr(args, "collapse_tol", None),
        "seeds": getattr(args, "seeds", None),
        "slices": getattr(args, "slices", None),
        "rng_seed": getattr(args, "seed", None),
    })


def _write(path: Optional[str], text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geodesics", description="Closed geodesics on triangulated spheres")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--mesh", required=True, help="OFF or OBJ file")
        p.add_argument("--format", choices=("off", "obj"), help="mesh format when the extension is missing")
        p.add_argument("--steiner", type=int)
        p.add_argument("--geodesic-tol", type=float)
        p.add_argument("--collapse-tol", type=float)
        p.add_argument("--seeds", type=int)
        p.add_argument("--slices", type=int)
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--workers", type=int, default=1)

    gen = sub.add_parser("gen", help="write a generated mesh")
    gen.add_argument("kind", choices=sorted(GENERATORS))
    gen.add_argument("--subdiv", type=int)
    gen.add_argument("--param", action="append", default=[], help="generator parameter key=value")
    gen.add_argument("--out", help="output path (.off or .obj)")

    check = sub.add_parser("check", help="print mesh diagnostics")
    check.add_argument("--mesh", required=True)
    check.add_argument("--format", choices=("off", "obj"))

    for name, text in (("geodesic", "find the shortest closed geodesic"),
                       ("second", "find a second closed geodesic"),
                       ("verify", "run the full pipeline and write the report"),
                       ("width", "estimate the width against 1600 sqrt(A)"),
                       ("export", "write curves as OBJ polylines")):
        p = sub.add_parser(name, help=text)
        solver_flags(p)
        if name in ("geodesic", "second", "export"):
            p.add_argument("--out")
        if name == "verify":
            p.add_argument("--json", dest="json_out", help="report path")
            p.add_argument("--width", action="store_true", help="include the width check")
        if name == "export":
            p.add_argument("--second", action="store_true", help="include the second geodesic")
            p.add_argument("--sweepout", action="store_true", help="export a distance sweepout instead")
    return parser


def _command(args: argparse.Namespace) -> int:
    if args.command == "gen":
        params = _parse_params(args.param)
        if args.subdiv is not None:
            params["subdiv"] = args.subdiv
        mesh = GENERATORS[args.kind](**params)
        text = save_obj(mesh) if args.out and args.out.lower().endswith(".obj") else save_off(mesh)
        _write(args.out, text)
        logger.info("generated %s", mesh)
        return 0

    mesh = load_mesh_file(args.mesh, args.format)
    if args.command == "check":
        print(json.dumps(mesh.diagnostics().model_dump(), indent=2, sort_keys=True))
        return 0

    settings = _settings_from(args)
    if args.command == "width":
        w, bound, ok = width1_check(mesh, settings, workers=args.workers)
        print(json.dumps({"width": w, "bound": bound, "pass": ok}, indent=2))
        return 0 if ok else 1

    if args.command == "export" and args.sweepout:
        rng = np.random.default_rng(settings.rng_seed)
        x = random_surface_points(mesh, rng, 1)[0]
        sweep = sweepout_from_distance(mesh, x, settings.slices, settings.steiner_per_edge)
        _write(args.out, obj_polyline(sweep.slices, [f"slice_{k}" for k in range(len(sweep.slices))]))
        return 0

    if args.command == "verify":
        report, _, _ = run_pipeline(mesh, settings, workers=args.workers, with_width=args.width)
        text = report_json(report) + "\n"
        if args.json_out:
            _write(args.json_out, text)
        else:
            sys.stdout.write(text)
        return 0 if report.all_applicable_pass else 1

    gamma1 = find_shortest_geodesic(mesh, settings=settings, workers=args.workers)
    if args.command == "geodesic":
        _write(args.out, gamma1.summary().model_dump_json(indent=2) + "\n")
        return 0
    want_second = args.command == "second" or args.second
    gamma2 = find_second_geodesic(mesh, gamma1, settings=settings, workers=args.workers) if want_second else None
    if args.command == "second":
        _write(args.out, gamma2.summary().model_dump_json(indent=2) + "\n")
        return 0
    curves, names = [gamma1.curve], ["gamma1"]
    if gamma2 is not None:
        curves.append(gamma2.curve)
        names.append("gamma2")
    _write(args.out, obj_polyline(curves, names))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else log_level(), format=LOG_FORMAT)
    try:
        return _command(args)
    except GeodesicError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: invalid settings: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
