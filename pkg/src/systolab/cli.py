"""Command-line front end: deterministic experiment drivers with CSV output.

Every CSV is accompanied by a JSON run manifest (resolved parameters, input
digests, tool version, wall time).  Outputs are plain comma-separated text
with a header row and LF line endings; numeric formatting uses Python's
shortest-roundtrip repr, so identical invocations produce byte-identical
files regardless of the worker thread count.

Exit codes: 0 success, 2 input error, 3 budget exceeded / inconclusive.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time

from . import __version__
from .complexes import complex_to_text, load_complex
from .errors import BudgetExceeded, SystolabError
from .growth import entropy_estimate, free_product_limit, growth_table, sample_radii
from .groups import parse_group
from .invariants import phi_systole, stable_systole, volume, volume_entropy
from .norms import parse_norm
from .optimize import OptimizeConfig, entropy_systole_scan, optimize_ratio
from .presentation import load_phi

BUDGET_ENV = "SYSTOLAB_BUDGET"


def _env_budget() -> int | None:
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else None


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return repr(x)
    return str(x)


def _write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _write_manifest(out_path, subcommand, params, input_paths, started) -> None:
    manifest = {
        "tool": "systolab",
        "version": __version__,
        "subcommand": subcommand,
        "parameters": params,
        "inputs": {str(p): _digest(p) for p in input_paths},
        "wall_time_s": round(time.monotonic() - started, 6),
    }
    with open(f"{out_path}.manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _entropy_rows(est):
    counts = est.diagnostics["counts"]
    radii = est.diagnostics["radii"]
    seq = dict(est.lower_sequence)
    set_size = est.diagnostics.get("set_size", 0)
    rows = []
    for r, c in zip(radii, counts):
        lower = seq.get(r)
        bound = None
        if est.upper_bound is not None and r > 0 and c >= 1 and set_size > 0:
            bound = (math.log(c) + math.log(set_size)) / r
        elif est.upper_bound is not None and set_size == 0:
            bound = 0.0
        rows.append((r, c, lower, bound))
    return rows


def _load_pair(args):
    X = load_complex(args.complex)
    P = load_phi(X, args.phi)
    return X, P


def cmd_growth(args) -> int:
    started = time.monotonic()
    group = parse_group(args.group)
    norm = parse_norm(group, args.norm)
    radii = None
    if args.radii:
        radii = [float(x) for x in args.radii.split(",")]
    table = growth_table(
        group, norm, r_max=args.rmax, radii=radii, samples=args.samples,
        budget=_env_budget(),
    )
    est = entropy_estimate(
        group, norm, args.rmax, samples=args.samples, radii=radii,
        budget=_env_budget(),
    )
    rows = _entropy_rows(est)
    _write_csv(args.out, ["r", "beta", "log_beta_over_r", "lemma73_bound"], rows)
    _write_manifest(
        args.out, "growth",
        {"group": args.group, "norm": args.norm, "rmax": args.rmax,
         "radii": args.radii, "samples": args.samples, "threads": args.threads},
        [], started,
    )
    print(f"wrote {args.out}: beta({table.radii[-1]:g}) = {table.counts[-1]}")
    return 0


def cmd_entropy(args) -> int:
    started = time.monotonic()
    group = parse_group(args.group)
    norm = parse_norm(group, args.norm)
    est = entropy_estimate(
        group, norm, args.rmax, samples=args.samples, budget=_env_budget()
    )
    rows = _entropy_rows(est)
    _write_csv(args.out, ["r", "beta", "log_beta_over_r", "lemma73_bound"], rows)
    _write_manifest(
        args.out, "entropy",
        {"group": args.group, "norm": args.norm, "rmax": args.rmax,
         "samples": args.samples, "threads": args.threads},
        [], started,
    )
    upper = "n/a" if est.upper_bound is None else f"{est.upper_bound:.6f}"
    print(f"entropy estimate {est.point_estimate:.6f} (upper bound {upper})")
    if not est.diagnostics.get("exhaustive", True):
        print("warning: enumeration budget exhausted; estimate is not exhaustive")
        return 3
    return 0


def cmd_free_product_limit(args) -> int:
    started = time.monotonic()
    G = parse_group(args.left)
    H = parse_group(args.right)
    left_norm = parse_norm(G, args.left_norm)
    right_norm = parse_norm(H, args.right_norm)
    rhos = [float(x) for x in args.rhos.split(",")]
    result = free_product_limit(
        G, H, left_norm, right_norm, rhos, args.rmax,
        samples=args.samples, budget_limit=_env_budget(), threads=args.threads,
    )
    rows = []
    for row in result.rows:
        rows.append(
            (
                row.rho,
                args.rmax,
                row.estimate.point_estimate,
                row.estimate.upper_bound,
                result.baseline.point_estimate,
            )
        )
    _write_csv(
        args.out,
        ["rho", "r_max", "entropy_estimate", "upper_bound", "baseline_lambda_G"],
        rows,
    )
    _write_manifest(
        args.out, "free-product-limit",
        {"left": args.left, "right": args.right, "left_norm": args.left_norm,
         "right_norm": args.right_norm, "rhos": args.rhos, "rmax": args.rmax,
         "samples": args.samples, "threads": args.threads},
        [], started,
    )
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def cmd_systole(args) -> int:
    started = time.monotonic()
    X, P = _load_pair(args)
    result = phi_systole(
        X, P,
        radius_budget=args.radius if args.radius else math.inf,
        node_budget=_env_budget(),
        threads=args.threads,
    )
    label = "" if result.witness_label is None else str(result.witness_label)
    _write_csv(
        args.out,
        ["basepoint", "length", "label"],
        [(result.basepoint, result.length, label)],
    )
    _write_manifest(
        args.out, "systole",
        {"complex": args.complex, "phi": args.phi, "radius": args.radius,
         "threads": args.threads},
        [args.complex, args.phi], started,
    )
    print(_fmt(result.length))
    return 0


def cmd_stable_systole(args) -> int:
    started = time.monotonic()
    X, P = _load_pair(args)
    a = tuple(int(x) for x in getattr(args, "cls").split(","))
    result = stable_systole(X, P, a, args.kmax, node_budget=_env_budget())
    lower, upper = result.bracket
    rows = [
        (k, length, ratio, lower, upper) for k, length, ratio in result.per_k
    ]
    _write_csv(args.out, ["k", "ell_ka", "ratio", "lower", "upper"], rows)
    _write_manifest(
        args.out, "stable-systole",
        {"complex": args.complex, "phi": args.phi, "class": getattr(args, "cls"),
         "kmax": args.kmax, "threads": args.threads},
        [args.complex, args.phi], started,
    )
    print(f"stable norm bracket [{lower!r}, {upper!r}] (diameter {result.diameter!r})")
    return 0


def cmd_volume_entropy(args) -> int:
    started = time.monotonic()
    X, P = _load_pair(args)
    est = volume_entropy(
        X, P, args.rmax, samples=args.samples,
        node_budget=_env_budget(),
        gen_norm_radius=args.gen_norm_radius,
    )
    rows = _entropy_rows(est)
    _write_csv(args.out, ["r", "beta", "log_beta_over_r", "lemma73_bound"], rows)
    _write_manifest(
        args.out, "volume-entropy",
        {"complex": args.complex, "phi": args.phi, "rmax": args.rmax,
         "samples": args.samples, "gen_norm_radius": args.gen_norm_radius,
         "threads": args.threads},
        [args.complex, args.phi], started,
    )
    print(f"entropy estimate {est.point_estimate:.6f}")
    if "generator_norm_upper_estimate" in est.diagnostics:
        print(
            "generator-norm upper estimate "
            f"{est.diagnostics['generator_norm_upper_estimate']:.6f} "
            f"(sandwich factor {est.diagnostics['sandwich_factor']:.4f})"
        )
    if not est.diagnostics.get("exhaustive", True):
        print("warning: cover expansion budget exhausted")
        return 3
    return 0


def cmd_optimize(args) -> int:
    started = time.monotonic()
    X, P = _load_pair(args)
    cfg = OptimizeConfig(
        max_iters=args.iters,
        initial_step=args.step,
        shrink=args.shrink,
        min_step=args.min_step,
        seed=args.seed,
        normalize=args.normalize,
        subdivision_rounds=args.subdivide,
    )
    result = optimize_ratio(X, P, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    trace_path = os.path.join(args.out_dir, "trace.csv")
    _write_csv(trace_path, ["stage", "iteration", "ratio"], result.trace)
    metric_path = os.path.join(args.out_dir, "best_metric.txt")
    with open(metric_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(complex_to_text(result.complex))
    _write_manifest(
        trace_path, "optimize",
        {"complex": args.complex, "phi": args.phi, "iters": args.iters,
         "step": args.step, "min_step": args.min_step, "shrink": args.shrink,
         "seed": args.seed, "normalize": args.normalize,
         "subdivide": args.subdivide, "threads": args.threads},
        [args.complex, args.phi], started,
    )
    print(f"final ratio {result.final_ratio!r} (verified {result.verified_ratio!r})")
    return 0


def cmd_scan(args) -> int:
    started = time.monotonic()
    members = []
    with open(args.family, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                print(f"{args.family}:{lineno}: expected 'name complex phi'",
                      file=sys.stderr)
                return 2
            name, cpath, ppath = parts
            base = os.path.dirname(os.path.abspath(args.family))
            cfull = os.path.join(base, cpath)
            pfull = os.path.join(base, ppath)
            X = load_complex(cfull)
            P = load_phi(X, pfull)
            members.append((name, X, P))
    rows = entropy_systole_scan(
        members, args.rmax, node_budget=_env_budget(), threads=args.threads
    )
    _write_csv(
        args.out,
        ["name", "dim", "volume", "systole", "ratio", "entropy",
         "entropy_product", "implied_c"],
        [
            (r.name, r.dimension, r.volume, r.systole, r.ratio, r.entropy,
             r.entropy_product, r.implied_constant)
            for r in rows
        ],
    )
    _write_manifest(
        args.out, "scan",
        {"family": args.family, "rmax": args.rmax, "threads": args.threads},
        [args.family], started,
    )
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="systolab",
        description=(
            "growth, entropy, and systole computations on groups and "
            "piecewise-flat complexes"
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output CSV path")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("growth", help="growth function of a norm on a group")
    p.add_argument("--group", required=True)
    p.add_argument("--norm", required=True)
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--samples", type=int, default=6)
    p.add_argument("--radii", default=None, help="explicit comma-separated radii")
    common(p)
    p.set_defaults(func=cmd_growth, default_out="growth.csv")

    p = sub.add_parser("entropy", help="entropy estimate of a norm on a group")
    p.add_argument("--group", required=True)
    p.add_argument("--norm", required=True)
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--samples", type=int, default=6)
    common(p)
    p.set_defaults(func=cmd_entropy, default_out="entropy.csv")

    p = sub.add_parser(
        "free-product-limit",
        help="entropy of combined norms on a free product across scales",
    )
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--left-norm", dest="left_norm", default="word")
    p.add_argument("--right-norm", dest="right_norm", default="word")
    p.add_argument("--rhos", required=True, help="comma-separated scales")
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--samples", type=int, default=6)
    common(p)
    p.set_defaults(func=cmd_free_product_limit, default_out="free_product.csv")

    p = sub.add_parser("systole", help="shortest noncontractible loop length")
    p.add_argument("--complex", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--radius", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_systole, default_out="systole.csv")

    p = sub.add_parser("stable-systole", help="stable norm of a homology class")
    p.add_argument("--complex", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--class", dest="cls", required=True,
                   help="comma-separated integer vector")
    p.add_argument("--kmax", type=int, default=4)
    common(p)
    p.set_defaults(func=cmd_stable_systole, default_out="stable_systole.csv")

    p = sub.add_parser("volume-entropy", help="entropy of the cover ball growth")
    p.add_argument("--complex", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--samples", type=int, default=6)
    p.add_argument("--gen-norm-R", dest="gen_norm_radius", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_volume_entropy, default_out="volume_entropy.csv")

    p = sub.add_parser("optimize", help="minimize volume / systole^n over lengths")
    p.add_argument("--complex", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--iters", type=int, default=60)
    p.add_argument("--step", type=float, default=1.10)
    p.add_argument("--min-step", dest="min_step", type=float, default=1.0005)
    p.add_argument("--shrink", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--subdivide", type=int, default=0)
    p.add_argument("--out-dir", dest="out_dir", default="optimize_out")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_optimize, default_out=None)

    p = sub.add_parser("scan", help="entropy-versus-systole family scan")
    p.add_argument("--family", required=True,
                   help="file of 'name complex phi' lines")
    p.add_argument("--rmax", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_scan, default_out="scan.csv")

    return parser


def dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "out", None) is None and args.default_out is not None:
        args.out = args.default_out
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc} (proven lower bound {exc.lower_bound!r})",
              file=sys.stderr)
        return 3
    except (SystolabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
