"""Command-line front end.

Each run writes ``report.json`` (and ``trace.csv`` with ``--csv``) into
``--out``.  Exit codes: 0 success, 1 invalid input, 2 numerical failure,
3 inconclusive verdict under ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .convergence import (classify_elliptic_finite, classify_interior_dw,
                          corollary_elliptic_infinite, spectrum_automorphism)
from .discmap import classify_automorphism, denjoy_wolff
from .errors import NumericFailure, ValidationError
from .holofunc import CoeffSeries, series_from_function
from .isometry import (bergman_moment_test, construct_h2_weight, h2_isometry_test,
                       nfold_cover_weight, symmetric_blaschke_weight)
from .quadrature import DiscQuadrature
from .specs import (build_operator, load_json, parse_coeffs, parse_halfplane, parse_map, parse_space,
                    parse_weight, to_jsonable)
from .transfer import (SmirnoffDomainSpec, h2d_iterate_transfer, h2d_transfer_bound,
                       halfplane_equivalence_suite, halfplane_norm_check, halfplane_to_disc,
                       kernel_growth_probe, smirnoff_weight)
from .wco import (build_matrix, gelfand_radius, iterate_direct, iterate_matrix, norm_estimate,
                  power_bounded_probe)

TRACE_HEADER = ("n", "norm", "norm_minus_P", "witness")
INCONCLUSIVE = {"inconclusive"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    action: Optional[str] = None
    weight: Optional[str] = None
    map: Optional[str] = None
    space: Optional[str] = None
    trunc: int = 128
    grid: Optional[int] = None
    radius: Optional[float] = None
    tol: float = 1e-8
    horizon: int = 40
    quad_nodes: tuple = (64, 256)
    lambda_cap: float = 1.0
    strict: bool = False
    out: str = "."
    json: bool = False
    csv: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.trunc < 1 or self.horizon < 1 or min(self.quad_nodes) < 1:
            raise ValidationError("trunc, horizon and quad nodes must be positive")
        if not 0 < self.tol < 1:
            raise ValidationError("tol must lie in (0, 1)")
        if self.lambda_cap <= 0:
            raise ValidationError("lambda cap must be positive")
        if self.grid is not None and self.grid < 1:
            raise ValidationError("grid must be positive")
        if self.radius is not None and not 0 < self.radius <= 1:
            raise ValidationError("radius must lie in (0, 1]")

    def knobs(self) -> dict:
        return {"trunc": self.trunc, "grid": self.grid, "radius": self.radius, "tol": self.tol,
                "horizon": self.horizon, "quad_nodes": list(self.quad_nodes),
                "lambda_cap": self.lambda_cap, "space": self.space or "h2"}


def _operator(cfg: RunConfig):
    if cfg.map is None:
        raise ValidationError("--map is required")
    return build_operator(cfg.weight, cfg.map, cfg.space, cfg.trunc, cfg.grid, cfg.radius)


def _rows_from_norms(norms, minus=None):
    return [(n, v, (minus[n - 1] if minus else None), None) for n, v in enumerate(norms, start=1)]


def cmd_classify(cfg: RunConfig):
    op = _operator(cfg)
    cls = classify_automorphism(op.phi)
    result = {"automorphism": cls.as_dict()}
    if cls.kind == "elliptic" and cls.order is not None:
        rep = classify_elliptic_finite(op, tol=cfg.tol, horizon=cfg.horizon)
        return {**result, "convergence": rep.as_dict()}, rep.trace, rep.mode
    if cls.kind == "elliptic":
        rep = corollary_elliptic_infinite(op, horizon=cfg.horizon)
        return {**result, "convergence": rep.as_dict()}, rep.trace, rep.mode
    dw = denjoy_wolff(op.phi)
    result["denjoy_wolff"] = dw.as_dict()
    if dw.location == "interior":
        rep = classify_interior_dw(op, tol=cfg.tol, horizon=cfg.horizon,
                                   assume_re_lt_one=bool(cfg.extra.get("assume_re_lt_one")))
        return {**result, "convergence": rep.as_dict()}, rep.trace, rep.mode
    kg = kernel_growth_probe(op, horizon=max(cfg.horizon, 60))
    # weak convergence would force sup ||T^n|| < inf (uniform boundedness)
    mode = "none" if kg.fired else "inconclusive"
    result["convergence"] = {
        "mode": mode, "theorem": "boundary Denjoy-Wolff point: kernel growth probe",
        "rationale": {"kernel_growth_fired": kg.fired, "threshold": kg.threshold},
        "evidence": {"kernel_growth": kg.as_dict()}, "limit": None}
    rows = [(n, None, None, v) for n, v in enumerate(kg.trace) if n > 0]
    return result, rows, mode


def cmd_iterate(cfg: RunConfig):
    op = _operator(cfg)
    n = int(cfg.extra.get("n") or 1)
    f = parse_coeffs(load_json(cfg.extra.get("f") or "[1]"))
    direct = iterate_direct(op, n, f)
    powered = iterate_matrix(op, n).apply(f)
    m = min(direct.truncation_order, powered.truncation_order)
    diff = float(np.linalg.norm(direct.coeffs[:m] - powered.coeffs[:m]))
    est = norm_estimate(op)
    if cfg.extra.get("export_matrix"):
        build_matrix(op).to_csv(Path(cfg.out) / "matrix.csv")
    result = {"n": n, "direct_coeffs": direct.coeffs[:16], "matrix_coeffs": powered.coeffs[:16],
              "dual_path_difference_h2": {"value": diff, "tag": "finite-section"},
              "norm": {**est.as_dict()}}
    return result, [], None


def _quad(cfg, alpha):
    kr, kt = cfg.quad_nodes
    return DiscQuadrature.build(kr, kt, alpha)


def cmd_isometry(cfg: RunConfig):
    space = cfg.space or "h2"
    horizon = cfg.extra.get("iso_horizon") or 50
    tol = cfg.extra.get("iso_tol")
    if cfg.map is None:
        raise ValidationError("--map is required")
    phi = parse_map(cfg.map)
    if space == "h2":
        tol = tol or 1e-9
        if cfg.action == "construct":
            theta = parse_weight(cfg.extra["theta"]) if cfg.extra.get("theta") else None
            w, case = construct_h2_weight(phi, theta)
        else:
            w, case = (parse_weight(cfg.weight) if cfg.weight else CoeffSeries([1.0])), None
        rep = h2_isometry_test(w, phi, horizon=horizon, tol=tol)
    else:
        sp = parse_space(space)
        tol = tol or 1e-10
        if cfg.action == "construct":
            if cfg.extra.get("psi"):
                w = symmetric_blaschke_weight(phi, parse_map(cfg.extra["psi"]))
                case = "symmetric-blaschke"
            else:
                cover = cfg.extra.get("cover")
                if cover is None:
                    raise ValidationError("construct on a Bergman space needs --cover N or --psi MAP")
                w, case = nfold_cover_weight(phi, int(cover)), "nfold-cover"
        else:
            w, case = (parse_weight(cfg.weight) if cfg.weight else CoeffSeries([1.0])), None
        rep = bergman_moment_test(w, phi, _quad(cfg, sp.alpha), J=int(cfg.extra.get("J") or 8), tol=tol)
    result = {"isometry": rep.as_dict(), "space": space}
    if cfg.action == "construct":
        coeffs = w.coeffs if isinstance(w, CoeffSeries) else series_from_function(w, cfg.trunc).coeffs
        weight_doc = {"case": case, "label": getattr(w, "label", "series"),
                      "coeffs": [[c.real, c.imag] for c in coeffs], "tag": "construction"}
        _write_json(Path(cfg.out) / "weight.json", weight_doc)
        result["weight"] = {"case": case, "file": "weight.json"}
    return result, [], rep.verdict


def cmd_spectrum(cfg: RunConfig):
    op = _operator(cfg)
    spec = spectrum_automorphism(op)
    g = gelfand_radius(op.with_trunc(cfg.trunc))
    result = {"spectrum": spec.as_dict(), "gelfand": g.as_dict(),
              "cross_check": {"estimate": g.estimate, "within_5e-2": spec.contains(g.estimate, 5e-2),
                              "tag": "finite-section"}}
    rows = [(n, v, None, None) for n, v in zip(g.schedule, g.values)]
    return result, rows, None


def cmd_transfer(cfg: RunConfig):
    action = cfg.action
    if action == "halfplane":
        text = cfg.extra.get("phi")
        if not text:
            raise ValidationError("--phi 'affine:a,b' is required")
        H = parse_halfplane(text)
        op = halfplane_to_disc(H, cfg.trunc)
        check = halfplane_norm_check(H, cfg.trunc)
        result = {"phi": op.phi.describe(), "norm_pair": [check.formula, check.estimate],
                  "norm_check": check.as_dict()}
        if abs(H.ang_deriv_inf - 1.0) >= 1e-3:
            suite = halfplane_equivalence_suite(H, horizon=min(cfg.horizon, 30))
            result["equivalence"] = suite
            rows = _rows_from_norms(suite["condition_iv"]["trace"])
        else:
            result["equivalence"] = {"skipped": "Phi'(inf) = 1 is excluded by the equivalence theorem"}
            rows = []
        return result, rows, None
    if action == "smirnoff":
        if not cfg.extra.get("beta"):
            raise ValidationError("--beta SERIES is required")
        spec = SmirnoffDomainSpec(parse_coeffs(load_json(cfg.extra["beta"])))
        if cfg.map is None:
            raise ValidationError("--map (the disc map phi) is required")
        op = smirnoff_weight(spec, disc_map=parse_map(cfg.map), trunc=cfg.trunc)
        w0 = complex(cfg.extra.get("w0") or 0.0)
        kg = kernel_growth_probe(op, w0, horizon=max(cfg.horizon, 60))
        result = {"kernel_growth": kg.as_dict(), "weight_head": series_from_function(op.w, 8).coeffs}
        rows = [(n, None, None, v) for n, v in enumerate(kg.trace) if n > 0]
        return result, rows, None
    if action == "weighted":
        op = _operator(cfg)
        d = cfg.extra.get("d") or "bergman"
        bound = h2d_transfer_bound(op, d, cfg.lambda_cap)
        result = {"bound": bound.as_dict(), "Lambda": cfg.lambda_cap}
        try:
            it = h2d_iterate_transfer(op, d, horizon=cfg.horizon, tol=cfg.tol)
        except ValidationError as exc:
            it = {"status": "inconclusive", "note": str(exc)}
        result["iterates"] = it
        rows = _rows_from_norms(it.get("h2d_trace", []))
        return result, rows, it.get("status")
    raise ValidationError(f"unknown transfer action {action!r}")


def cmd_probe(cfg: RunConfig):
    op = _operator(cfg)
    pb = power_bounded_probe(op, cfg.horizon)
    result = {"power_bound": pb.as_dict()}
    rows = _rows_from_norms(pb.trace)
    try:
        dw = denjoy_wolff(op.phi)
        result["denjoy_wolff"] = dw.as_dict()
        if dw.location == "boundary" and op.space.kind == "H2":
            result["kernel_growth"] = kernel_growth_probe(op, horizon=max(cfg.horizon, 60)).as_dict()
    except ValidationError as exc:
        result["denjoy_wolff"] = {"skipped": str(exc)}
    return result, rows, pb.status


COMMANDS = {"classify": cmd_classify, "iterate": cmd_iterate, "isometry": cmd_isometry,
            "spectrum": cmd_spectrum, "transfer": cmd_transfer, "probe": cmd_probe}


def _write_json(path: Path, obj) -> None:
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False)
    path.write_text(text + "\n")


def write_trace(path: Path, rows) -> None:
    def cell(v):
        return "" if v is None else repr(float(v))

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for n, a, b, c in rows:
            writer.writerow([int(n), cell(a), cell(b), cell(c)])


def run(cfg: RunConfig) -> int:
    """Execute one command and write its report; returns the exit status."""
    cfg.validate()
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create output directory {out}: {exc}") from None
    result, rows, verdict = COMMANDS[cfg.command](cfg)
    report = {"command": cfg.command, "action": cfg.action, "version": __version__,
              "config": {**cfg.knobs(), "weight": cfg.weight, "map": cfg.map,
                         **{k: v for k, v in cfg.extra.items() if v is not None}},
              "result": result}
    _write_json(out / "report.json", report)
    if cfg.csv:
        write_trace(out / "trace.csv", rows)
    if cfg.json:
        sys.stdout.write((out / "report.json").read_text())
    if cfg.strict and verdict in INCONCLUSIVE:
        return 3
    return 0


def _common(p: argparse.ArgumentParser):
    p.add_argument("--weight", help="weight as JSON coefficient list or spec")
    p.add_argument("--map", help="disc map as JSON spec")
    p.add_argument("--space", help="h2 | a2 | a2alpha:<alpha> | h2d:<preset>")
    p.add_argument("--trunc", type=int, default=128)
    p.add_argument("--grid", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--horizon", type=int, default=40)
    p.add_argument("--quad-nodes", default="64,256", help="Kr,Ktheta")
    p.add_argument("--lambda-cap", type=float, default=1.0, help="Lambda in the weighted-space bound")
    p.add_argument("--strict", action="store_true", help="exit 3 on an inconclusive verdict")
    p.add_argument("--out", default=".")
    p.add_argument("--json", action="store_true", help="also print report.json to stdout")
    p.add_argument("--csv", action="store_true", help="write trace.csv")
    p.add_argument("--config", help="JSON file with any of the options above")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wcolab", description="Weighted composition operator laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parser.subcommands = sub.choices

    p = sub.add_parser("classify", help="convergence mode of T^n")
    _common(p)
    p.add_argument("--assume-re-lt-one", action="store_true", help="assert r_e(T) < 1")

    p = sub.add_parser("iterate", help="T^n f by both paths")
    _common(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--f", help="JSON coefficient list (default [1])")
    p.add_argument("--export-matrix", action="store_true", help="write matrix.csv")

    p = sub.add_parser("isometry", help="isometry test or weight construction")
    p.add_argument("action", choices=["test", "construct"])
    _common(p)
    p.add_argument("--theta", help="inner factor for the H^2 construction (JSON coefficients)")
    p.add_argument("--cover", type=int, help="N for the N-fold cover weight")
    p.add_argument("--psi", help="symmetry automorphism (JSON map) for the symmetric Blaschke weight")
    p.add_argument("--J", type=int, help="highest pullback moment degree")

    p = sub.add_parser("spectrum", help="spectrum formula for automorphisms and Gelfand cross-check")
    _common(p)

    p = sub.add_parser("transfer", help="half-plane, Smirnoff and weighted-space transfers")
    p.add_argument("action", choices=["halfplane", "smirnoff", "weighted"])
    _common(p)
    p.add_argument("--phi", help="half-plane map, e.g. 'affine:2,0'")
    p.add_argument("--beta", help="conformal map beta as JSON coefficients")
    p.add_argument("--w0", type=float, help="kernel base point (real)")
    p.add_argument("--d", help="weight preset for H^2(d), default 'bergman'")

    p = sub.add_parser("probe", help="power-boundedness and kernel growth")
    _common(p)
    return parser


def _config_from_args(args, parser: argparse.ArgumentParser) -> RunConfig:
    """Flags override the ``--config`` file, which overrides parser defaults."""
    values = vars(args).copy()
    sub = parser.subcommands[args.command]
    if values.get("config"):
        try:
            data = json.loads(Path(values["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        for k, v in data.items():
            key = k.replace("-", "_")
            if key in ("weight", "map") and not isinstance(v, str):
                v = json.dumps(v)
            if key in values and values[key] == sub.get_default(key):
                values[key] = v
            elif key not in values:
                raise ValidationError(f"unknown config key {k!r}")
    try:
        quad = tuple(int(x) for x in str(values.pop("quad_nodes")).split(","))
    except ValueError:
        raise ValidationError("--quad-nodes expects 'Kr,Ktheta'") from None
    if len(quad) != 2:
        raise ValidationError("--quad-nodes expects 'Kr,Ktheta'")
    base = {k: values.pop(k) for k in ("command", "weight", "map", "space", "trunc", "grid", "radius",
                                       "tol", "horizon", "lambda_cap", "strict", "out", "json", "csv")}
    values.pop("config", None)
    action = values.pop("action", None)
    extra = dict(values)
    return RunConfig(action=action, quad_nodes=quad, extra=extra, **base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args, parser)
        return run(cfg)
    except ValidationError as exc:
        print(f"wcolab: invalid input: {exc}", file=sys.stderr)
        return 1
    except NumericFailure as exc:
        print(f"wcolab: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
