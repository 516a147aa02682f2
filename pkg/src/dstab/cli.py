"""Command-line front end: problem files in, JSON reports and CSV traces out.

Exit codes: 0 success, 1 bad input, 2 iteration cap reached before
convergence, 3 nominal system not stable in the region, 4 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import jsonschema
import numpy as np

from . import kernels
from .bounds import BoundsConfig
from .errors import DegreeDropError, DStabError
from .hull import classify_origin, convex_hull
from .params import (MonomialPolynomial, ParameterBox, StateSpacePolynomial, scale_box,
                     value_set_vertex_images, verify_multilinearity)
from .region import Disk, DRegion, HalfPlane, nominal_roots_in_region, sweep_point
from .split import CutScheme
from .sweep import (ClassicFrequency, ClassicReport, FrequencyTrace, Record, SweepConfig,
                    SweepReport, TraceRow, algorithm1, algorithm2, compare)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CAPPED = 2
EXIT_UNSTABLE = 3
EXIT_SOLVER = 4

_NUMBER = {"type": "number"}
_VECTOR = {"type": "array", "items": _NUMBER, "minItems": 1}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}
_INTERVAL = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["system", "box", "region"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "system": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "state_space": {
                    "type": "object",
                    "required": ["A0", "A"],
                    "additionalProperties": False,
                    "properties": {"A0": _MATRIX, "A": {"type": "array", "items": _MATRIX}},
                },
                "monomials": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "minItems": 2,
                            "maxItems": 2,
                            "prefixItems": [_NUMBER, {"type": "array",
                                                      "items": {"type": "integer", "minimum": 0}}],
                        },
                    },
                },
            },
        },
        "box": {
            "type": "object",
            "required": ["lower", "upper"],
            "additionalProperties": False,
            "properties": {"lower": {"type": "array", "items": _NUMBER},
                           "upper": {"type": "array", "items": _NUMBER}},
        },
        "nominal": {"type": "array", "items": _NUMBER},
        "region": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {"type": "object", "required": ["type", "sigma", "delta"],
                     "additionalProperties": False,
                     "properties": {"type": {"const": "half_plane"}, "sigma": _NUMBER,
                                    "delta": _INTERVAL}},
                    {"type": "object",
                     "required": ["type", "center_re", "center_im", "radius", "delta"],
                     "additionalProperties": False,
                     "properties": {"type": {"const": "disk"}, "center_re": _NUMBER,
                                    "center_im": _NUMBER, "radius": _NUMBER,
                                    "delta": _INTERVAL}},
                ]
            },
        },
        "declared_multilinear": {"type": "boolean"},
    },
}


class ProblemError(Exception):
    """Invalid problem file; the message carries ``path:line:``."""


class Problem:
    def __init__(self, poly, box: ParameterBox, region: DRegion, declared_multilinear: bool,
                 source: str = "<problem>"):
        self.poly = poly
        self.box = box
        self.region = region
        self.declared_multilinear = declared_multilinear
        self.source = source


def _line_of(text: str, path) -> int:
    """Best-effort line of the JSON element at ``path`` (keys and list indices)."""
    line = 1
    pos = 0
    for part in path:
        if isinstance(part, str):
            hit = text.find(f'"{part}"', pos)
            if hit < 0:
                break
            pos = hit + len(part) + 2
        else:
            # step over list items by counting top-level commas after the next "["
            start = text.find("[", pos)
            if start < 0:
                break
            depth = 0
            count = 0
            t = start
            while t < len(text):
                ch = text[t]
                if ch in "[{":
                    depth += 1
                elif ch in "]}":
                    depth -= 1
                    if depth == 0:
                        break
                elif ch == "," and depth == 1:
                    count += 1
                    if count == part:
                        break
                t += 1
            pos = t + 1 if part > 0 else start + 1
    line += text.count("\n", 0, pos)
    return line


def _fail(source, text, path, message):
    where = ".".join(str(p) for p in path) or "<root>"
    raise ProblemError(f"{source}:{_line_of(text, path)}: {where}: {message}")


def parse_problem(text: str, source: str = "<problem>", seed: int = 0) -> Problem:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    try:
        jsonschema.validate(data, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        _fail(source, text, list(exc.absolute_path), exc.message)

    sys_ = data["system"]
    lower, upper = data["box"]["lower"], data["box"]["upper"]
    if len(lower) != len(upper):
        _fail(source, text, ["box", "upper"], "lower and upper differ in length")
    n_params = len(lower)
    try:
        if "state_space" in sys_:
            ss = sys_["state_space"]
            a0 = np.array(ss["A0"], dtype=float)
            if a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
                _fail(source, text, ["system", "state_space", "A0"], "A0 must be square")
            mats = ss["A"]
            if len(mats) != n_params:
                _fail(source, text, ["system", "state_space", "A"],
                      f"{len(mats)} parameter matrices for {n_params} box parameters")
            for i, m in enumerate(mats):
                if np.array(m, dtype=float).shape != a0.shape:
                    _fail(source, text, ["system", "state_space", "A", i], "shape differs from A0")
            ap = np.array(mats, dtype=float).reshape((n_params,) + a0.shape)
            poly = StateSpacePolynomial(a0, ap)
        else:
            for p, row in enumerate(sys_["monomials"]):
                for t, (_, exps) in enumerate(row):
                    if len(exps) != n_params:
                        _fail(source, text, ["system", "monomials", p, t],
                              f"exponent vector needs {n_params} entries")
            poly = MonomialPolynomial(tuple(tuple((c, tuple(e)) for c, e in row)
                                            for row in sys_["monomials"]), n_params)
    except (ValueError, DStabError) as exc:
        _fail(source, text, ["system"], str(exc))
    try:
        box = ParameterBox(tuple(lower), tuple(upper),
                           tuple(data["nominal"]) if "nominal" in data else None)
    except DStabError as exc:
        _fail(source, text, ["nominal"] if "nominal" in data else ["box"], str(exc))
    pieces = []
    for t, piece in enumerate(data["region"]):
        try:
            if piece["type"] == "half_plane":
                pieces.append(HalfPlane(piece["sigma"], tuple(piece["delta"])))
            else:
                pieces.append(Disk(complex(piece["center_re"], piece["center_im"]),
                                   piece["radius"], tuple(piece["delta"])))
        except DStabError as exc:
            _fail(source, text, ["region", t], str(exc))
    declared = data.get("declared_multilinear", True)
    if not verify_multilinearity(poly, box, seed=seed):
        key = ["declared_multilinear"] if "declared_multilinear" in data else ["system"]
        _fail(source, text, key, "family is not multilinear in the parameters")
    return Problem(poly, box, DRegion(tuple(pieces)), declared, source)


def load_problem(path, seed: int = 0) -> Problem:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemError(f"{path}:1: cannot read problem file: {exc.strerror}") from None
    return parse_problem(text, str(path), seed)


# ---------------------------------------------------------------- serialization

def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def dumps(obj, indent: int = 0) -> str:
    """JSON with every float written to 17 significant digits; inf/nan as strings."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _float(x) -> float:
    return float(x)  # also accepts the "inf" / "nan" strings


def _opt_tuple(x):
    return tuple(x) if x is not None else None


def config_to_dict(cfg: SweepConfig) -> dict:
    d = asdict(cfg)
    d["scheme"] = cfg.scheme.value
    return d


def config_from_dict(d: dict) -> SweepConfig:
    b = {k: (_float(v) if isinstance(v, str) else v) for k, v in d["bounds"].items()}
    return SweepConfig(
        n_r=d["n_r"], n_c=d["n_c"],
        delta_lo=None if d["delta_lo"] is None else _float(d["delta_lo"]),
        delta_hi=None if d["delta_hi"] is None else _float(d["delta_hi"]),
        eps=_float(d["eps"]), max_iter=d["max_iter"], scheme=CutScheme(d["scheme"]),
        bounds=BoundsConfig(**b))


def report_to_dict(report: SweepReport, cfg: SweepConfig | None = None) -> dict:
    """Everything in the report except wall time (kept out so files are reproducible)."""
    out = {
        "k_hat": report.k_hat,
        "argmin_freq": report.argmin_freq,
        "argmin_delta": report.argmin_delta,
        "q0": report.q0,
        "converged": report.converged,
        "zero_at_nominal": report.zero_at_nominal,
        "domains_evaluated": report.domains_evaluated,
        "prune_counts": report.prune_counts,
        "column_iterations": report.column_iterations,
        "records": [{"value": r.value, "freq_id": r.freq_id, "delta": r.delta, "stamp": r.stamp}
                    for r in report.records],
        "per_freq": [{"freq_id": f.freq_id, "delta": f.delta, "k_l_min": f.k_l_min,
                      "k_u_min": f.k_u_min, "iterations": f.iterations, "domains": f.domains}
                     for f in report.per_freq],
    }
    if cfg is not None:
        out = {"config": config_to_dict(cfg), **out}
    return out


def report_from_dict(d: dict) -> SweepReport:
    """Inverse of :func:`report_to_dict`; the trace is not part of the file."""
    return SweepReport(
        k_hat=_float(d["k_hat"]),
        argmin_freq=_opt_tuple(d["argmin_freq"]),
        argmin_delta=None if d["argmin_delta"] is None else _float(d["argmin_delta"]),
        per_freq=[FrequencyTrace(tuple(f["freq_id"]), _float(f["delta"]), _float(f["k_l_min"]),
                                 _float(f["k_u_min"]), f["iterations"], f["domains"])
                  for f in d["per_freq"]],
        records=[Record(_float(r["value"]), tuple(r["freq_id"]), _float(r["delta"]),
                        tuple(r["stamp"])) for r in d["records"]],
        prune_counts=dict(d["prune_counts"]),
        domains_evaluated=d["domains_evaluated"],
        converged=d["converged"],
        q0=tuple(_float(v) for v in d["q0"]),
        column_iterations=list(d["column_iterations"]),
        zero_at_nominal=d["zero_at_nominal"],
    )


def classic_to_dict(report: ClassicReport, eps_r: float, cfg: SweepConfig) -> dict:
    return {
        "config": {**config_to_dict(cfg), "eps_r": eps_r},
        "k_tilde": report.k_tilde,
        "k_tilde_lower": report.k_tilde_lower,
        "argmin_freq": report.argmin_freq,
        "argmin_delta": report.argmin_delta,
        "q0": report.q0,
        "converged": report.converged,
        "domains_evaluated": report.domains_evaluated,
        "per_freq": [{"freq_id": f.freq_id, "delta": f.delta, "k_l": f.k_l, "k_u": f.k_u,
                      "iterations": f.iterations, "domains": f.domains, "converged": f.converged}
                     for f in report.per_freq],
    }


def classic_from_dict(d: dict) -> ClassicReport:
    return ClassicReport(
        k_tilde=_float(d["k_tilde"]),
        k_tilde_lower=_float(d["k_tilde_lower"]),
        argmin_freq=_opt_tuple(d["argmin_freq"]),
        argmin_delta=None if d["argmin_delta"] is None else _float(d["argmin_delta"]),
        per_freq=[ClassicFrequency(tuple(f["freq_id"]), _float(f["delta"]), _float(f["k_l"]),
                                   _float(f["k_u"]), f["iterations"], f["domains"],
                                   f["converged"], ()) for f in d["per_freq"]],
        domains_evaluated=d["domains_evaluated"],
        converged=d["converged"],
        q0=tuple(_float(v) for v in d["q0"]),
    )


def _csv_num(x) -> str:
    x = float(x)
    return "inf" if x == math.inf else ("-inf" if x == -math.inf else "%.17g" % x)


def write_trace(path: Path, rows: list[TraceRow]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "i", "delta", "k_l", "k_u", "event"])
        for r in rows:
            w.writerow([r.j, r.i, _csv_num(r.delta), _csv_num(r.k_l), _csv_num(r.k_u), r.event])


def write_classic_trace(path: Path, report: ClassicReport):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "i", "delta", "iteration", "k_l", "k_u"])
        for f in report.per_freq:
            _, i, j = f.freq_id
            for r, (k_l, k_u) in enumerate(f.history, start=1):
                w.writerow([j, i, _csv_num(f.delta), r, _csv_num(k_l), _csv_num(k_u)])


# ---------------------------------------------------------------- commands

def _sweep_config(args) -> SweepConfig:
    bounds = BoundsConfig(k_cap=args.kcap, seed=args.seed)
    return SweepConfig(n_r=args.nr, n_c=args.nc, delta_lo=args.dl, delta_hi=args.du,
                       eps=args.eps, max_iter=args.it, scheme=CutScheme(args.scheme),
                       bounds=bounds)


def _check_nominal(problem: Problem):
    try:
        stable = nominal_roots_in_region(problem.poly, problem.region, problem.box.nominal)
    except DegreeDropError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    if not stable:
        print("error: nominal system has roots outside the region", file=sys.stderr)
        return EXIT_UNSTABLE
    return None


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_margin(args, problem: Problem) -> int:
    cfg = _sweep_config(args)
    report = algorithm2(problem.poly, problem.region, problem.box, cfg)
    out = _out_dir(args)
    (out / "report.json").write_text(dumps(report_to_dict(report, cfg)) + "\n")
    write_trace(out / "trace.csv", report.trace)
    print(f"k_hat = {_csv_num(report.k_hat)}  delta = {report.argmin_delta}  "
          f"domains = {report.domains_evaluated}  wall = {report.wall_time:.3f}s")
    return EXIT_OK if report.converged else EXIT_CAPPED


def cmd_sweep_classic(args, problem: Problem) -> int:
    cfg = _sweep_config(args)
    eps_r = args.eps_r if args.eps_r is not None else args.eps
    report = algorithm1(problem.poly, problem.region, problem.box, eps_r, cfg, args.it)
    out = _out_dir(args)
    (out / "report.json").write_text(dumps(classic_to_dict(report, eps_r, cfg)) + "\n")
    write_classic_trace(out / "trace.csv", report)
    print(f"k_tilde = {_csv_num(report.k_tilde)}  delta = {report.argmin_delta}  "
          f"domains = {report.domains_evaluated}  wall = {report.wall_time:.3f}s")
    return EXIT_OK if report.converged else EXIT_CAPPED


def cmd_valueset(args, problem: Problem) -> int:
    if args.delta is None or args.k is None:
        print("error: valueset needs --delta and --k", file=sys.stderr)
        return EXIT_INPUT
    piece = problem.region.pieces[args.piece]
    z = sweep_point(piece, args.delta)
    box = scale_box(problem.box, args.k)
    images = value_set_vertex_images(problem.poly, z, box).images
    hull = convex_hull(list(images))
    origin = classify_origin(hull)
    out = _out_dir(args)
    with open(out / "valueset.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "index", "re", "im"])
        for t, v in enumerate(images):
            w.writerow(["vertex", t, _csv_num(v.real), _csv_num(v.imag)])
        for t, v in zip(hull.source_indices, hull.points):
            w.writerow(["hull", t, _csv_num(v.real), _csv_num(v.imag)])
    print(f"origin: {origin.location.name.lower()}  hull points = {len(hull.points)}")
    return EXIT_OK


def cmd_compare(args, problem: Problem) -> int:
    cfg = _sweep_config(args)
    eps_r = args.eps_r if args.eps_r is not None else args.eps
    cmp_ = compare(problem.poly, problem.region, problem.box, cfg, eps_r, args.it)
    par, cla = cmp_.parallel, cmp_.classic
    result = {
        "config": {**config_to_dict(cfg), "eps_r": eps_r},
        "q0": par.q0,
        "k_hat": par.k_hat,
        "k_hat_delta": par.argmin_delta,
        "k_tilde": cla.k_tilde,
        "k_tilde_delta": cla.argmin_delta,
        "relative_gap": cmp_.relative_gap,
        "domains_parallel": par.domains_evaluated,
        "domains_classic": cla.domains_evaluated,
        "ratio": cmp_.ratio,
        "records": len(par.records),
        "prune_counts": par.prune_counts,
        "wall_time_parallel": par.wall_time,
        "wall_time_classic": cla.wall_time,
        "speedup": cmp_.speedup,
        "backend": kernels.BACKEND,
    }
    out = _out_dir(args)
    (out / "compare.json").write_text(dumps(result) + "\n")
    print(f"k_hat = {_csv_num(par.k_hat)}  k_tilde = {_csv_num(cla.k_tilde)}  "
          f"ratio = {cmp_.ratio:.4f}  speedup = {cmp_.speedup:.1f}")
    return EXIT_OK if par.converged and cla.converged else EXIT_CAPPED


COMMANDS = {
    "margin": cmd_margin,
    "sweep-classic": cmd_sweep_classic,
    "valueset": cmd_valueset,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dstab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("problem", help="problem file (JSON)")
    p.add_argument("--eps", type=float, default=0.01, help="record tolerance (parallel sweep)")
    p.add_argument("--eps-r", type=float, default=None,
                   help="per-frequency tolerance for the classic sweep (default: --eps)")
    p.add_argument("--nr", type=int, default=30, help="rows of the frequency grid")
    p.add_argument("--nc", type=int, default=50, help="columns of the frequency grid")
    p.add_argument("--dl", type=float, default=None, help="grid start (default: region interval)")
    p.add_argument("--du", type=float, default=None, help="grid end (default: region interval)")
    p.add_argument("--it", type=int, default=None, help="iteration cap")
    p.add_argument("--scheme", choices=[s.value for s in CutScheme], default="maximal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kcap", type=float, default=1e4, help="largest scale factor searched")
    p.add_argument("--delta", type=float, default=None, help="valueset: sweep parameter")
    p.add_argument("--k", type=float, default=None, help="valueset: scale factor")
    p.add_argument("--piece", type=int, default=0, help="valueset: region piece index")
    p.add_argument("--backend", choices=["python", "cython"], default=None,
                   help="kernel implementation (default: compiled when available)")
    p.add_argument("--out", default="dstab-out", help="output directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.backend is not None:
        try:
            kernels.set_backend(args.backend)
        except ImportError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
    try:
        problem = load_problem(args.problem, args.seed)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code = _check_nominal(problem)
    if code is not None:
        return code
    try:
        return COMMANDS[args.command](args, problem)
    except (ValueError, DStabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT if isinstance(exc, ValueError) else EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
