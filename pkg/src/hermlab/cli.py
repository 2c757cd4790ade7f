"""Batch front end: ``hermlab {check, point, converge, gallery}``.

Exit codes: 0 every check passed, 1 an identity failed, 2 the input or the
configuration was rejected.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import checks, domains, forms, geometry
from .domains import DomainModel, QuadratureError
from .expr import ExprError, MetricField, load_metric
from .gallery import DEFAULT_EPS, GALLERY_IDS, gallery_metric, gallery_toml

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
ROW_KEYS = ["id", "paper_ref", "kind", "residual_abs", "residual_rel", "tolerance", "pass", "resolution"]


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    metric: Optional[str] = None
    gallery: Optional[str] = None
    eps: float = DEFAULT_EPS
    domain: Optional[str] = None
    R: list = field(default_factory=lambda: [12])
    tol_point: float = checks.TOL_POINT
    tol_int: float = checks.TOL_INT
    points: int = 100
    seed: int = 0
    threads: Optional[int] = None
    report: Optional[str] = None
    csv: Optional[str] = None

    def validate(self) -> None:
        if (self.metric is None) == (self.gallery is None):
            raise ConfigError("give exactly one of --metric PATH or --gallery ID")
        if any(r < 2 for r in self.R):
            raise ConfigError("resolution R must be at least 2")
        if self.tol_point <= 0 or self.tol_int <= 0:
            raise ConfigError("tolerances must be positive")
        if self.points < 1:
            raise ConfigError("--points must be positive")

    def load(self) -> MetricField:
        self.validate()
        try:
            m = gallery_metric(self.gallery, self.eps) if self.gallery else load_metric(Path(self.metric))
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from exc
        except (ExprError, OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.domain and self.domain != m.domain.kind:
            d = DomainModel.torus() if self.domain == "torus" else DomainModel.hopf()
            m = MetricField(m.name, d, *m.components, source=m.source)
        return m


def _clean(x):
    """JSON-ready copy (complex as [re, im], numpy scalars as Python)."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def determinism_hash(report: dict) -> str:
    body = {k: v for k, v in report.items() if k not in ("determinism_hash", "timestamp")}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def run_check(cfg: RunConfig, m: MetricField) -> tuple[dict, list]:
    """Full pipeline; returns (report, failures)."""
    R = cfg.R[0]
    start = time.time()
    deck = domains.deck_invariance_check(m)
    results = checks.run_pointwise_suite(m, n=cfg.points, seed=cfg.seed, tol_point=cfg.tol_point)
    chern = {"c1sq_wedge": None, "c1sq_scalar": None}
    diagnostics: dict = {}
    if deck.passed:
        rule = domains.build_rule(m.domain, R)
        integrals = checks.compute_integrals(m, rule, threads=cfg.threads)
        results += checks.run_integral_suite(m, R=R, tol_int=cfg.tol_int, integrals=integrals)
        w, s = checks.chern_number(m, integrals=integrals)
        chern = {"c1sq_wedge": w, "c1sq_scalar": s}
        diagnostics = checks.classify(m, n=cfg.points, seed=cfg.seed, integrals=integrals).as_dict()
        diagnostics["volume"] = float(np.real(integrals["vol"]))
    diagnostics["deck"] = {
        "passed": deck.passed,
        "max_residual": deck.max_residual,
        "worst_point": [complex(z) for z in deck.worst_point[:2]],
        "n_samples": deck.n_samples,
    }
    diagnostics["check_details"] = {r.id: r.details for r in results}
    report = {
        "metric": m.name,
        "domain": m.domain.kind,
        "resolution": R,
        "seed": cfg.seed,
        "checks": [r.row() for r in results],
        "chern": chern,
        "diagnostics": diagnostics,
    }
    report = _clean(report)
    report["determinism_hash"] = determinism_hash(report)
    report["timestamp"] = {
        "utc": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "elapsed_s": round(time.time() - start, 3),
    }
    failures = [f"{r.id}: residual_rel {r.residual_rel:.3e} > {r.tolerance:.1e}" for r in results if not r.passed]
    if not deck.passed:
        failures.insert(0, f"deck invariance: residual {deck.max_residual:.3e} (integral suite skipped)")
    return report, failures


def write_csv(path: str, rows: list, keys: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k) for k in keys})


def cmd_check(cfg: RunConfig) -> int:
    m = cfg.load()
    report, failures = run_check(cfg, m)
    if cfg.report:
        Path(cfg.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if cfg.csv:
        write_csv(cfg.csv, report["checks"], ROW_KEYS)
    for row in report["checks"]:
        mark = "pass" if row["pass"] else "FAIL"
        print(f"{row['id']:>4} {row['kind']:<9} rel {row['residual_rel']:.3e}  {mark}")
    ch = report["chern"]
    if ch["c1sq_wedge"] is not None:
        print(f"4 pi^2 c1^2: wedge {ch['c1sq_wedge']:.6e}  scalar {ch['c1sq_scalar']:.6e}")
        dg = report["diagnostics"]
        print(f"kahler {dg['kahler']}  gauduchon {dg['gauduchon']}  ric20_zero {dg['ric20_zero']}")
    if failures:
        print("failures:\n  " + "\n  ".join(failures), file=sys.stderr)
        return EXIT_CONFIG if not report["diagnostics"]["deck"]["passed"] else EXIT_FAIL
    return EXIT_OK


def _c(x) -> str:
    x = complex(x) + 0.0  # drops negative zeros
    return f"{x.real:+.6g}{x.imag:+.6g}i"


def _matrix(label: str, a) -> str:
    a = np.atleast_2d(np.asarray(a))
    rows = ["  [" + ", ".join(_c(x) for x in row) + "]" for row in a]
    return f"{label}:\n" + "\n".join(rows)


_DIFFS = ("dz1", "dz2", "dzb1", "dzb2")


def _basis_label(k: int) -> str:
    return "^".join(_DIFFS[a] for a in forms.BASIS[k]) or "1"


def point_dashboard(m: MetricField, z1: complex, z2: complex) -> str:
    p = domains.honest([z1], [z2])
    if not m.domain.contains(p[0]):
        raise ConfigError(f"point ({z1}, {z2}) lies outside the chart of the {m.domain.kind} model")
    mj = geometry.metric_at(m, p)
    fr = geometry.frame_from_metric(mj, p)
    D = forms.Dashboard(mj)
    out = [
        _matrix("h", fr.h[0]),
        _matrix("Gamma^k_ij (k-major)", fr.Gamma[0].reshape(2, 4)),
        _matrix("Gamma^k_ibar j (k-major)", fr.GammaBar[0].reshape(2, 4)),
        _matrix("T^k_ij (k-major)", fr.T[0].reshape(2, 4)),
        _matrix("T_i", fr.Ttr[0]),
        _matrix("Ric11", fr.RicH[0]),
        _matrix("Ric20", fr.RicHol[0]),
        _matrix("Theta1", fr.Theta1[0]),
        _matrix("Theta2", fr.Theta2[0]),
        _matrix("Theta4", fr.Theta4[0]),
        _matrix("M", fr.M[0]),
        f"s = {complex(fr.s[0]).real:.10g}",
        f"s_c = {complex(fr.s_c[0]).real:.10g}",
        f"s11 = {complex(fr.s11[0]).real:.10g}",
    ]
    for name, val in D.as_dict().items():
        v = np.asarray(val)[0]
        if v.ndim == 0:
            out.append(f"{name} = {_c(v)}")
        else:
            terms = [f"{_basis_label(k)}: {_c(v[k])}" for k in range(forms.DIM) if abs(v[k]) > 1e-14]
            out.append(f"{name} = {{{', '.join(terms)}}}" if terms else f"{name} = 0")
    return "\n".join(out)


def cmd_point(cfg: RunConfig, coords: list) -> int:
    m = cfg.load()
    try:
        z1, z2 = (complex(c.replace("i", "j")) for c in coords)
    except ValueError as exc:
        raise ConfigError(f"bad coordinates {coords!r}: {exc}") from exc
    print(point_dashboard(m, z1, z2))
    return EXIT_OK


def convergence_table(m: MetricField, R_list: list, threads=None, tol_int: float = checks.TOL_INT) -> list:
    """Rows (id, R, residual_rel, order) with the empirical decay order between successive R."""
    rows, prev = [], {}
    for R in R_list:
        rule = domains.build_rule(m.domain, R)
        integrals = checks.compute_integrals(m, rule, threads=threads)
        for r in checks.run_integral_suite(m, R=R, tol_int=tol_int, integrals=integrals):
            order = None
            if r.id in prev:
                R0, e0 = prev[r.id]
                if e0 > 0 and r.residual_rel > 0:
                    order = math.log(e0 / r.residual_rel) / math.log(R / R0)
            prev[r.id] = (R, r.residual_rel)
            rows.append({"id": r.id, "R": R, "residual_rel": r.residual_rel, "order": order})
    return rows


def cmd_converge(cfg: RunConfig) -> int:
    if len(cfg.R) < 2:
        raise ConfigError("converge needs at least two resolutions (-R 6 12 ...)")
    m = cfg.load()
    rows = convergence_table(m, sorted(cfg.R), cfg.threads, cfg.tol_int)
    for row in rows:
        order = "" if row["order"] is None else f"  order {row['order']:.2f}"
        print(f"{row['id']:>4} R={row['R']:<3} rel {row['residual_rel']:.3e}{order}")
    if cfg.csv:
        write_csv(cfg.csv, rows, ["id", "R", "residual_rel", "order"])
    if cfg.report:
        Path(cfg.report).write_text(json.dumps(_clean({"metric": m.name, "rows": rows}), indent=2) + "\n")
    return EXIT_OK


def cmd_gallery(cfg: RunConfig) -> int:
    for name in GALLERY_IDS:
        print(f"# {name}")
        print(gallery_toml(name, cfg.eps))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--metric", help="metric file (TOML)")
    src.add_argument("--gallery", help="built-in metric id")
    common.add_argument("--eps", type=float, default=DEFAULT_EPS, help="torus_conformal amplitude")
    common.add_argument("--domain", choices=["torus", "hopf"])
    common.add_argument("-R", type=int, nargs="+", default=[12], help="quadrature resolution(s)")
    common.add_argument("--tol-point", type=float, default=checks.TOL_POINT)
    common.add_argument("--tol-int", type=float, default=checks.TOL_INT)
    common.add_argument("--points", type=int, default=100, help="pointwise sample count")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--report", help="JSON report path")
    common.add_argument("--csv", help="CSV table path")

    parser = argparse.ArgumentParser(prog="hermlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="run every identity check")
    pt = sub.add_parser("point", parents=[common], help="print the curvature dashboard at a point")
    pt.add_argument("coords", nargs=2, metavar="Z", help="z1 z2 as complex numbers, e.g. 1 0.5+0.2i")
    sub.add_parser("converge", parents=[common], help="integral residuals across resolutions")
    sub.add_parser("gallery", parents=[common], help="list the built-in metrics")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    cfg = RunConfig(
        metric=args.metric,
        gallery=args.gallery,
        eps=args.eps,
        domain=args.domain,
        R=list(args.R),
        tol_point=args.tol_point,
        tol_int=args.tol_int,
        points=args.points,
        seed=args.seed,
        threads=args.threads,
        report=args.report,
        csv=args.csv,
    )
    if cfg.threads:
        os.environ["HERMLAB_THREADS"] = str(cfg.threads)
    try:
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "point":
            return cmd_point(cfg, args.coords)
        if args.command == "converge":
            return cmd_converge(cfg)
        return cmd_gallery(cfg)
    except (ConfigError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
