"""Command-line driver: ``partialfourier <subcommand> [options]``.

Exit codes: 0 success, 1 usage or input error, 2 right-hand side outside the
compatibility set, 3 precision or certification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from . import io
from .classify import classify_full, classify_partial_smooth, decay_table
from .config import RunConfig
from .conjugation import psi, verify_intertwine
from .diophantine import (CertificationError, demo_nonsolvable, divisor_floor, divisor_scan,
                          parse_a0, witness_table, witnesses)
from .repr_core import weight_su2
from .solver import SolverConfig, project_to_K, solve
from .su2 import PrecisionError, QuadratureError, quadrature_for_bandlimit
from .transform import (FullCoeff, PartialCoeffField, TimeGrid, analyze_full, analyze_partial,
                        random_full_coeff, synthesize)

log = logging.getLogger("partialfourier")

EXIT_OK, EXIT_INPUT, EXIT_NOT_IN_K, EXIT_PRECISION = 0, 1, 2, 3


def _write(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _config(args) -> RunConfig:
    overrides = {
        "ell_max": args.ell_max, "n_t": args.n_t, "tau_max": args.tau_max,
        "upsample": args.upsample, "seed": args.seed,
        "a_a0": args.a0,
        "a_cos": None if args.a_cos is None else [float(v) for v in args.a_cos.split(",") if v],
        "a_sin": None if args.a_sin is None else [float(v) for v in args.a_sin.split(",") if v],
    }
    return RunConfig.from_file(args.config, **overrides)


def _rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def _full_vector(fc: FullCoeff, keys) -> np.ndarray:
    return np.concatenate([np.asarray(fc.entries[k]).ravel() for k in keys])


def _load_partial(path, cfg: RunConfig) -> PartialCoeffField:
    obj = io.load_coeffs(path)
    if isinstance(obj, FullCoeff):
        return obj.to_partial(TimeGrid(cfg.n_t), ell_max=obj.ell_max)
    return obj


def cmd_transform(args) -> int:
    cfg = _config(args)
    grid = TimeGrid(cfg.n_t)
    quad = quadrature_for_bandlimit(cfg.ell)
    spec = {"kind": "random"} if args.input is None else json.loads(Path(args.input).read_text())
    kind = spec.get("kind")
    source = None
    if kind == "random":
        rng = np.random.default_rng(cfg.seed)
        source = random_full_coeff(rng, cfg.ell, cfg.tau_max, float(spec.get("decay", 0.0)))
        samples = synthesize(source, quad, grid)
    elif kind == "constant":
        samples = np.full((grid.n_t, quad.n_nodes), complex(spec.get("value", 1.0)))
    elif kind == "samples":
        samples = np.load(spec["path"])
        if samples.shape != (grid.n_t, quad.n_nodes):
            raise io.FileFormatError(f"samples shape {samples.shape} != {(grid.n_t, quad.n_nodes)}")
    elif kind == "coefficients":
        source = io.load_coeffs(spec["path"])
        if not isinstance(source, FullCoeff):
            source = analyze_full(source, cfg.tau_max)
        samples = synthesize(source, quad, grid)
    else:
        raise io.FileFormatError(f"unknown input kind {kind!r}")
    fc = analyze_full(analyze_partial(samples, grid, quad, cfg.ell), cfg.tau_max)
    keys = fc.keys()
    back = synthesize(fc, quad, grid)
    err_sa = _rel(back, samples)
    err_as = None
    if source is not None:
        src = {k: source.entries.get(k, np.zeros_like(fc.entries[k])) for k in keys}
        err_as = _rel(_full_vector(fc, keys), _full_vector(FullCoeff(src), keys))
    retained = fc.pruned(cfg.tolerances["prune"])
    if args.out:
        io.save_coeffs(retained, args.out)
    if args.csv:
        rows = [(tau, tw, w, v) for tau, tw, w, v in decay_table(retained, "hs")]
        io.save_csv(["tau", "two_ell", "weight", "hs_norm"], rows, args.csv)
    tol = cfg.tolerances["roundtrip"]
    report = {
        "command": "transform",
        "config": cfg.to_dict(),
        "synthesize_analyze_error": err_sa,
        "analyze_synthesize_error": err_as,
        "retained_entries": len(retained),
        "ok": err_sa <= tol and (err_as is None or err_as <= tol),
    }
    _write(io.dumps(report), args.report)
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = _config(args)
    obj = io.load_coeffs(args.input)
    if isinstance(obj, FullCoeff):
        rep = classify_full(obj, cfg.test_orders, norm=args.norm, slack=args.slack)
        rows = decay_table(obj, args.norm) if obj.is_dense() else []
        header = ["tau", "two_ell", "weight", "norm"]
    else:
        rep = classify_partial_smooth(obj, cfg.beta_max, cfg.test_orders, slack=args.slack)
        rows = [(tw, weight_su2(tw), float(np.abs(b).max())) for tw, b in obj.items()]
        header = ["two_ell", "weight", "sup_norm"]
    if args.csv:
        io.save_csv(header, rows, args.csv)
    _write(io.dumps({"command": "classify", "report": rep.to_dict()}), args.report)
    return EXIT_OK


def _mode_key(k) -> str:
    tw, tm, tn = k
    return f"{Fraction(tw, 2)},{Fraction(tm, 2)},{Fraction(tn, 2)}"


def cmd_solve(args) -> int:
    cfg = _config(args)
    a = cfg.coefficient
    f = _load_partial(args.input, cfg)
    if args.project:
        f = project_to_K(a, f)
    out = solve(a, f, SolverConfig(upsample=cfg.upsample, tol_compat=cfg.tolerances["compat"]))
    if args.out:
        io.save_coeffs(out.solution, args.out)
    tol = cfg.tolerances["residual"]
    worst = max((r / max(1.0, out.rhs_scale[k]) for k, r in out.residuals.items()), default=0.0)
    report = {
        "command": "solve",
        "a": a.to_dict(),
        "in_K": out.in_range,
        "skipped_modes": [
            {"mode": _mode_key(k), "integral": [out.compat_values[k].real, out.compat_values[k].imag]}
            for k in out.skipped_modes
        ],
        "max_relative_residual": worst,
        "residual_ok": worst <= tol,
        "residuals": {_mode_key(k): v for k, v in out.residuals.items()},
        "resonance_map": {f"{Fraction(tw, 2)},{Fraction(tm, 2)}": v for (tw, tm), v in out.resonance_map.items()},
        "solution_n_t": out.solution.grid.n_t,
    }
    _write(io.dumps(report), args.report)
    if not out.in_range:
        log.error("right-hand side fails compatibility on %d modes", len(out.skipped_modes))
        return EXIT_NOT_IN_K
    return EXIT_OK


def cmd_conjugate(args) -> int:
    cfg = _config(args)
    a = cfg.coefficient
    u = _load_partial(args.input, cfg)
    v = psi(a, u, args.sign)
    if args.out:
        io.save_coeffs(v, args.out)
    report = {
        "command": "conjugate",
        "a": a.to_dict(),
        "sign": args.sign,
        "intertwine_residual": verify_intertwine(a, u, cfg.upsample),
        "roundtrip_error": (psi(a, v, -args.sign) - u).sup_norm(),
    }
    _write(io.dumps(report), args.report)
    return EXIT_OK


def cmd_diophantine(args) -> int:
    cfg = _config(args)
    a0 = parse_a0(args.value if args.value is not None else cfg.a["a0"])
    report = {"command": "diophantine", "a0": a0.describe()}
    if a0.is_rational:
        step = 2 if args.integer_m else 1
        ms = [Fraction(k, 2) for k in range(-2 * cfg.m_max, 2 * cfg.m_max + 1, step)]
        C, table = divisor_floor(a0, ms)
        report["divisor_floor"] = C
        report["table"] = [{"two_m": tm, "residue": str(r), "value": v} for tm, r, v in table]
    elif a0.kind == "liouville":
        report.update(witness_table(witnesses(a0, cfg.M_max)))
    else:
        report["divisor_scan_C"] = divisor_scan(a0, 2 * cfg.m_max, 0.0)
    _write(io.dumps(report), args.out)
    return EXIT_OK


def cmd_demo(args) -> int:
    cfg = _config(args)
    a0 = parse_a0(args.value if args.value is not None else "liouville")
    rows, search = demo_nonsolvable(a0, cfg.M_max, cfg.dps)
    table = witness_table(search)
    if args.witnesses:
        io.save_json(table, args.witnesses)
    csv_rows = [
        (r.M, str(r.tau), str(r.ell), mpmath.nstr(r.rhs_mag, 20),
         mpmath.nstr(mpmath.mpf(r.bound.numerator) / r.bound.denominator, 20),
         mpmath.nstr(r.sol_mag, 20), mpmath.nstr(r.identity_residual, 5),
         str(bool(r.rhs_mag <= mpmath.mpf(r.bound.numerator) / r.bound.denominator)))
        for r in rows
    ]
    header = ["M", "tau", "ell", "rhs_mag", "bound", "sol_mag", "identity_residual", "rhs_le_bound"]
    _write(io.csv_text(header, csv_rows), args.csv)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partialfourier", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--ell-max")
    common.add_argument("--n-t", type=int)
    common.add_argument("--tau-max", type=int)
    common.add_argument("--upsample", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--a0", help='mean of a(t): "p/q", "liouville"')
    common.add_argument("--a-cos", help="comma-separated cosine coefficients of a(t)")
    common.add_argument("--a-sin", help="comma-separated sine coefficients of a(t)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("transform", parents=[common], help="analyze/synthesize round trip")
    s.add_argument("--input", help="JSON field spec (random | constant | samples | coefficients)")
    s.add_argument("--out", help="coefficient file to write")
    s.add_argument("--csv", help="decay table (tau, two_ell, weight, hs_norm)")
    s.add_argument("--report")
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("classify", parents=[common], help="decay verdict for a coefficient file")
    s.add_argument("--input", required=True)
    s.add_argument("--norm", choices=["max", "hs"], default="max")
    s.add_argument("--slack", type=float, default=0.5)
    s.add_argument("--csv")
    s.add_argument("--report")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("solve", parents=[common], help="solve L u = f")
    s.add_argument("--input", required=True, help="coefficient file holding f")
    s.add_argument("--project", action="store_true", help="project f onto the compatibility set first")
    s.add_argument("--out")
    s.add_argument("--report")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("conjugate", parents=[common], help="apply the gauge transform")
    s.add_argument("--input", required=True)
    s.add_argument("--sign", type=int, choices=[1, -1], default=1)
    s.add_argument("--out")
    s.add_argument("--report")
    s.set_defaults(func=cmd_conjugate)

    s = sub.add_parser("diophantine", parents=[common], help="classify a0 and report divisors or witnesses")
    s.add_argument("--value", help="a0 spec (overrides config)")
    s.add_argument("--integer-m", action="store_true", help="restrict the divisor floor to integer m")
    s.add_argument("--out")
    s.set_defaults(func=cmd_diophantine)

    s = sub.add_parser("demo-nonsolvable", parents=[common], help="Liouville non-solvability report")
    s.add_argument("--value", help="a0 spec (default: liouville)")
    s.add_argument("--witnesses", help="witness table JSON")
    s.add_argument("--csv", help="paired report CSV")
    s.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CertificationError, PrecisionError) as exc:
        log.error("%s", exc)
        return EXIT_PRECISION
    except (io.FileFormatError, QuadratureError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
