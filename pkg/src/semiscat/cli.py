"""Command-line experiment runner.

    semiscat SUBCOMMAND [--config PATH] [--out DIR] [--h H ...] [--grid N] [--dim D] [--seed S]

Every run writes SUBCOMMAND.json (scalar results plus the resolved config and
its hash) and zero or more CSV tables into the output directory.  Exit codes:
0 success, 2 invalid input, 3 numerical/domain failure; on failure a JSON
error object is printed to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import ExperimentConfig
from .dynamics import PhasePoint, run_to_escape, scattering_map
from .errors import DomainError, ValidationError
from .poly import MultiPoly
from .potential import make_potential
from .smatrix import SphereGaussianState, apply_scattering_matrix, verify_correspondence
from .wavepacket import WavePacket, farfield_future, farfield_past, propagate_full

SUBCOMMANDS = ("scatmap", "propagate", "smatrix", "farfield", "resolve", "oracle-compare", "eigenfun")


# -- serialization ------------------------------------------------------------

def _num(x: float) -> str:
    return format(float(x), ".17g") if math.isfinite(x) else "null"


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits; keys sorted."""
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(json.dumps(str(k)) + ":" + dumps(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps({"re": obj.real, "im": obj.imag})
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _atomic_write(path: str, text: str):
    folder = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _poly_json(p: MultiPoly):
    return [[list(a), c.real, c.imag] for a, c in sorted(p.items())]


def _matrix_json(m):
    a = np.asarray(m)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


# -- helpers -------------------------------------------------------------------

def _sphere_points(d: int, n: int):
    if d == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    # Fibonacci lattice on S^2
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = np.pi * (1 + 5 ** 0.5) * k
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def _point_header(d):
    return ["theta"] if d == 2 else ["x", "y", "z"]


def _point_cols(pts):
    if pts.shape[-1] == 2:
        return np.arctan2(pts[:, 1], pts[:, 0])[:, None]
    return pts


def _state(cfg: ExperimentConfig, h: float) -> SphereGaussianState:
    x0, xi0, gamma, q0 = cfg.state_arrays()
    return SphereGaussianState(x0, xi0, gamma, q0, h)


def _sweep(fn, args_list, jobs: int):
    if jobs <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=min(jobs, len(args_list))) as ex:
        return list(ex.map(fn, *zip(*args_list)))


# -- subcommands ---------------------------------------------------------------

def cmd_scatmap(cfg, args):
    s = cfg["scatmap"]
    d = cfg.dim
    n = args.grid if args.grid else int(s["n"])
    a = float(s["omega_angle"])
    omega = np.zeros(d)
    perp = np.zeros(d)
    omega[:2] = [np.cos(a), np.sin(a)]
    perp[:2] = [-np.sin(a), np.cos(a)]
    V = cfg.potential()
    rows = []
    for e in np.linspace(-s["eta_max"], s["eta_max"], n):
        img = scattering_map(omega, e * perp, V, tol=cfg.tol, t_max=cfg.t_max(V))
        p_out = np.zeros(d)
        p_out[:2] = [-img.omega[1], img.omega[0]]
        rows.append((float(e), float(np.arctan2(img.omega[1], img.omega[0])),
                     float(img.eta @ p_out), float(img.time_delay)))
    arr = np.array(rows)
    result = {"n": n, "omega_angle": a, "max_deflection": float(np.max(np.abs(arr[:, 1] - a)))}
    return result, {"scatmap.csv": (["eta", "omega_out_angle", "eta_out", "time_delay"], rows)}


def cmd_propagate(cfg, args):
    x0, xi0, gamma, poly = cfg.state_arrays()
    V = cfg.potential()
    t = float(cfg["propagate"]["t"])
    out, rows = {}, []
    for h in cfg.hs:
        u = WavePacket(x0, xi0, gamma, poly, 0.0, h)
        pr = propagate_full(u, t, V, tol=cfg.tol)
        p = pr.packet
        out[f"h={h:g}"] = {"x": p.x, "xi": p.xi, "gamma": _matrix_json(p.gamma.a),
                        "poly": _poly_json(p.poly), "phase": p.phase, "norm_in": u.norm(),
                        "norm_out": p.norm(), "sqrt_det": pr.sqrt_det,
                        "symplectic_defect": pr.frame.symplectic_defect()}
        rows.append((h, *p.x, *p.xi, p.phase, p.norm()))
    d = len(x0)
    header = ["h"] + [f"x{i}" for i in range(d)] + [f"xi{i}" for i in range(d)] + ["phase", "norm"]
    return {"t": t, "runs": out}, {"propagate.csv": (header, rows)}


def cmd_smatrix(cfg, args):
    V = cfg.potential()
    d = cfg.dim
    pts = _sphere_points(d, 512)
    out, tables = {}, {}
    for h in cfg.hs:
        st = _state(cfg, h)
        res = apply_scattering_matrix(st, V, tol=cfg.tol, t_max=cfg.t_max(V))
        rep = verify_correspondence(st, V, tol=cfg.tol, t_max=cfg.t_max(V))
        inp = st(pts)
        img = res.image(pts)
        o = res.state
        out[f"h={h:g}"] = {
            "delta1": res.delta1, "x1": o.x0, "xi1": o.xi0, "gamma1": _matrix_json(o.gamma0.a),
            "q1": _poly_json(o.q0), "omega1": res.diagnostics["omega1"],
            "eta1": res.diagnostics["eta1"], "t_minus": res.diagnostics["t_minus"],
            "t_plus": res.diagnostics["t_plus"], "x_plus": res.diagnostics["x_plus"],
            "correspondence_discrepancy": rep.discrepancy,
            "correspondence_passed": rep.passed,
            "identity_deviation": float(np.max(np.abs(img - inp))),
            "shell_defect": res.diagnostics["shell_defect"],
            "symplectic_defect": res.diagnostics["symplectic_defect"],
        }
        rows = [(*c, a.real, a.imag, b.real, b.imag)
                for c, a, b in zip(_point_cols(pts), inp, img)]
        tables[f"smatrix_profile_h{h:g}.csv"] = (
            _point_header(d) + ["in_re", "in_im", "out_re", "out_im"], rows)
    return {"runs": out, "potential_is_zero": V.is_zero}, tables


def cmd_farfield(cfg, args):
    d = cfg.dim
    n = args.grid if args.grid else int(cfg["farfield"]["n"])
    pts = _sphere_points(d, n)
    out, tables = {}, {}
    for h in cfg.hs:
        u = _state(cfg, h).packet()
        fut, past = farfield_future(u), farfield_past(u)
        f, p = fut(pts), past(pts)
        out[f"h={h:g}"] = {"future_peak": fut.peak, "past_peak": past.peak,
                        "future_max": float(np.max(np.abs(f))), "past_max": float(np.max(np.abs(p)))}
        rows = [(*c, a.real, a.imag, b.real, b.imag) for c, a, b in zip(_point_cols(pts), f, p)]
        tables[f"farfield_h{h:g}.csv"] = (
            _point_header(d) + ["future_re", "future_im", "past_re", "past_im"], rows)
    return {"runs": out}, tables


def _resolve_one(h, X, n, n_xi, harmonics):
    from .sphere import SphereFunction, reconstruct, resolution_asymptotic, resolution_constant
    c = resolution_constant(h)
    errs = []
    for m in harmonics:
        f = SphereFunction.from_callable(lambda th: np.exp(1j * m * th), n)
        g = reconstruct(f, h, X, n_xi=n_xi)
        errs.append((h, m, (g - f).l2() / f.l2()))
    return c, c / resolution_asymptotic(h), errs


def cmd_resolve(cfg, args):
    if cfg.dim != 2:
        raise ValidationError("resolve is implemented for d = 2 only")
    r = cfg["resolve"]
    n = args.grid if args.grid else int(r["n"])
    runs = _sweep(_resolve_one, [(h, float(r["X"]), n, int(r["n_xi"]), list(r["harmonics"]))
                                 for h in cfg.hs], args.jobs)
    out, rows = {}, []
    for h, (c, ratio, errs) in zip(cfg.hs, runs):
        out[f"h={h:g}"] = {"c_h": c, "asymptotic_ratio": ratio,
                        "errors": {str(m): e for _, m, e in errs}}
        rows.extend(errs)
    return {"runs": out, "X": r["X"], "n": n}, {"resolve.csv": (["h", "harmonic", "rel_l2_error"], rows)}


def _oracle_one(h, opts, tol):
    from .oracle import propagation_error
    V = make_potential(opts["bumps"], dim=int(opts["dim"]))
    g = np.atleast_2d(np.asarray(opts["gamma"], float)) * np.eye(int(opts["dim"]))
    u = WavePacket.gaussian(opts["x0"], opts["xi0"], g, h)
    tr = run_to_escape(V, PhasePoint(u.x, u.xi), tol, radius=V.support_radius + opts["escape_margin"])
    err = propagation_error(u, V, tr.t, float(opts["L"]), int(opts["n"]),
                            dt=opts["dt_per_h"] * h, tol=tol)
    return err, tr.t


def cmd_oracle_compare(cfg, args):
    opts = cfg["oracle"]
    if args.grid:
        opts = {**opts, "n": args.grid}
    runs = _sweep(_oracle_one, [(h, opts, cfg.tol) for h in cfg.hs], args.jobs)
    errs = [e for e, _ in runs]
    rows = [(h, e, t) for h, (e, t) in zip(cfg.hs, runs)]
    ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    return ({"errors": errs, "ratios": ratios, "t": [t for _, t in runs]},
            {"oracle_compare.csv": (["h", "rel_l2_error", "t"], rows)})


def _eigen_one(h, spec, tol):
    from .oracle import assemble_generalized_eigenfunction
    d = len(spec["x0"])
    V = make_potential(spec["bumps"], dim=d)
    g = np.atleast_2d(np.asarray(spec["gamma"], float)) * np.eye(d)
    u = WavePacket.gaussian(spec["x0"], spec["xi0"], g, h)
    r = assemble_generalized_eigenfunction(u, V, float(spec["L"]), int(spec["n"]),
                                           float(spec["window"]), margin=float(spec["margin"]), tol=tol)
    return r.residual, r.normalized_residual, r.t_plus


def cmd_eigenfun(cfg, args):
    spec = cfg["eigenfun"]
    if args.grid:
        spec = {**spec, "n": args.grid}
    hs = cfg.hs if args.h else [float(x) for x in spec["h"]]
    runs = _sweep(_eigen_one, [(h, spec, cfg.tol) for h in hs], args.jobs)
    rows = [(h, *r) for h, r in zip(hs, runs)]
    raw = [r[0] for r in runs]
    norm = [r[1] for r in runs]
    return ({"h": hs, "residual": raw, "normalized_residual": norm,
             "raw_ratios": [raw[i] / raw[i + 1] for i in range(len(raw) - 1)],
             "normalized_ratios": [norm[i] / norm[i + 1] for i in range(len(norm) - 1)]},
            {"eigenfun.csv": (["h", "residual", "normalized_residual", "t_plus"], rows)})


COMMANDS = {
    "scatmap": cmd_scatmap, "propagate": cmd_propagate, "smatrix": cmd_smatrix,
    "farfield": cmd_farfield, "resolve": cmd_resolve, "oracle-compare": cmd_oracle_compare,
    "eigenfun": cmd_eigenfun,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="semiscat", description="Semiclassical scattering of Gaussian states.")
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--config", help="TOML experiment file")
    p.add_argument("--out", help="output directory (default from config)")
    p.add_argument("--h", type=float, action="append", help="semiclassical parameter (repeatable)")
    p.add_argument("--grid", type=int, help="grid size for the chosen subcommand")
    p.add_argument("--dim", type=int, choices=(2, 3))
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallel runs in h sweeps")
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        over = {}
        if args.h:
            over["h"] = args.h
        if args.dim:
            over["dim"] = args.dim
        if args.seed is not None:
            over["seed"] = args.seed
        if args.out:
            over["out"] = args.out
        if args.grid is not None and args.grid < 1:
            raise ValidationError("--grid must be positive")
        cfg = ExperimentConfig.resolve(args.config, over)
        np.random.seed(int(cfg["seed"]))
        result, tables = COMMANDS[args.command](cfg, args)
        out_dir = cfg["out"]
        os.makedirs(out_dir, exist_ok=True)
        doc = {"command": args.command, "config": cfg.data, "config_hash": cfg.hash(),
               "result": result}
        _atomic_write(os.path.join(out_dir, f"{args.command}.json"), dumps(doc) + "\n")
        for name, (header, rows) in tables.items():
            _atomic_write(os.path.join(out_dir, name), _csv_text(header, rows))
        return 0
    except ValidationError as exc:
        _report(exc, 2)
        return 2
    except DomainError as exc:
        _report(exc, 3)
        return 3


def _report(exc, code):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                 "exit_code": code}) + "\n")


def main():
    sys.exit(run())
