"""Command-line surface: validate / verify / fcs / sweep.

Exit codes: 0 success (all checks passed), 1 at least one check failed,
2 usage, config or I/O error.  Outputs are CSV (measures, characteristic
functions, sweep tables) and JSON (reports, verdicts); identical inputs and
seeds give byte-identical outputs regardless of worker count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import fcs as fcsmod
from .checks import run_suites
from .dynamics import balance_check, delta_q_direct
from .scenarios import ConfigError, RunConfig, parse_config

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _parse_grid(text: str) -> np.ndarray:
    """Parse 'a,b,c' as explicit points or 'lo:hi:n' as a linspace."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r}: expected lo:hi:n")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        return np.linspace(lo, hi, n)
    return np.array([float(x) for x in text.split(",")])


def _load(args) -> RunConfig:
    return parse_config(args.config)


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(x) if isinstance(x, float) else str(x) for x in row) + "\n")


def cmd_validate(args) -> int:
    run = _load(args)
    scn = run.scenario
    print(
        f"ok: d_S={scn.dim_sys} d_R={scn.dim_res} dim={scn.dim} "
        f"lambda={scn.lam} beta={scn.beta}"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    run = _load(args)
    results = run_suites(run.scenario, which=args.suite, seed=args.seed,
                         quad_tol=run.quad_tol)
    records = [r.as_record() for r in results]
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"[{status}] {r.check_name}: residual {r.residual:.3e} (tol {r.tolerance:.1e})")
    if args.out_dir:
        _write_json(Path(args.out_dir) / "verify_report.json", records)
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def cmd_fcs(args) -> int:
    run = _load(args)
    scn = run.scenario
    t = args.t
    out_dir = Path(args.out_dir)
    gamma_grid = _parse_grid(args.gamma_grid) if args.gamma_grid else fcsmod.default_gamma_grid(scn)

    sys_res = fcsmod.system_fcs(scn, t, cluster_tol=run.cluster_tol, gamma_grid=gamma_grid)
    res_res = fcsmod.reservoir_fcs(scn, t, merge_tol=run.cluster_tol, gamma_grid=gamma_grid)

    rows = [
        [float(x), float(w), "system"]
        for x, w in zip(sys_res.measure.locations, sys_res.measure.weights)
    ] + [
        [float(x), float(w), "reservoir"]
        for x, w in zip(res_res.measure.locations, res_res.measure.weights)
    ]
    _write_csv(out_dir / "measures.csv", ["location", "weight", "which"], rows)

    char_rows = []
    for (g, val), kind in [(s, "system") for s in sys_res.char_samples] + [
        (s, "reservoir") for s in res_res.char_samples
    ]:
        char_rows.append([float(g), float(val.real), float(val.imag), kind])
    _write_csv(out_dir / "char.csv", ["gamma", "re", "im", "source"], char_rows)

    dq_s, dq_r = delta_q_direct(scn, t)
    summary = {
        "t": t,
        "lambda": scn.lam,
        "beta": scn.beta,
        "mean_system": sys_res.mean,
        "mean_reservoir": res_res.mean,
        "moments_reservoir": [float(m) for m in res_res.moments],
        "moments_system": [float(m) for m in sys_res.moments],
        "dq_system": dq_s,
        "dq_reservoir": dq_r,
        "balance_residual": balance_check(scn, t),
        "mean_identity_residual": abs(res_res.mean - dq_r),
    }
    _write_json(out_dir / "summary.json", summary)
    print(f"wrote {out_dir}/measures.csv, char.csv, summary.json")
    return EXIT_OK


def cmd_sweep(args) -> int:
    run = _load(args)
    scn = run.scenario
    out_dir = Path(args.out_dir)
    t_grid = _parse_grid(args.t_grid)
    lam_grid = _parse_grid(args.lambda_grid)
    gamma_grid = _parse_grid(args.gamma_grid) if args.gamma_grid else fcsmod.default_gamma_grid(scn)

    sweep = fcsmod.limit_sweep(
        scn, t_grid, lam_grid, gamma_grid=gamma_grid, workers=args.workers
    )
    rows = [
        [r.lam, r.t, r.distance, r.mean_res, r.mean_sys, *(float(m) for m in r.moments_res[1:4])]
        for r in sweep.rows
    ]
    _write_csv(
        out_dir / "sweep.csv",
        ["lambda", "t", "distance", "mean_R", "mean_S", "m2", "m3", "m4"],
        rows,
    )

    # Convergence verdict per lambda: the late-time plateau (upper half of the
    # positive t range) must improve on the t = 0 baseline distance.
    verdicts = []
    ts = np.atleast_1d(t_grid)
    t_mid = (ts.min() + ts.max()) / 2
    for lam in np.atleast_1d(lam_grid):
        lam = float(lam)
        lam_rows = [r for r in sweep.rows if r.lam == lam]
        base = next((r.distance for r in lam_rows if r.t == 0.0), None)
        plateau_rows = [r for r in lam_rows if r.t > 0 and r.t >= t_mid]
        plateau = float(np.mean([r.distance for r in plateau_rows])) if plateau_rows else None
        improved = (
            base is not None
            and plateau is not None
            and plateau < base * (1.0 - 1e-9)  # strict, beyond roundoff
        )
        verdicts.append(
            {
                "lambda": lam,
                "baseline_t0": base,
                "plateau_distance": plateau,
                "pass": improved,
            }
        )
    _write_json(out_dir / "verdict.json", verdicts)
    print(f"wrote {out_dir}/sweep.csv, verdict.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fcslab",
        description="Energy full counting statistics on confined system+reservoir models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="parse and validate a scenario config")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=cmd_validate)

    p_ver = sub.add_parser("verify", help="run identity-check suites")
    p_ver.add_argument("--config", required=True)
    p_ver.add_argument("--suite", default="all",
                       choices=["all", "operator", "states", "modular", "fcs"])
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--out-dir", default=None)
    p_ver.set_defaults(func=cmd_verify)

    p_fcs = sub.add_parser("fcs", help="compute both FCS measures at one time")
    p_fcs.add_argument("--config", required=True)
    p_fcs.add_argument("--t", type=float, required=True)
    p_fcs.add_argument("--out-dir", required=True)
    p_fcs.add_argument("--gamma-grid", default=None)
    p_fcs.set_defaults(func=cmd_fcs)

    p_sw = sub.add_parser("sweep", help="sweep the FCS over a (lambda, t) grid")
    p_sw.add_argument("--config", required=True)
    p_sw.add_argument("--t-grid", required=True)
    p_sw.add_argument("--lambda-grid", required=True)
    p_sw.add_argument("--gamma-grid", default=None)
    p_sw.add_argument("--workers", type=int, default=1)
    p_sw.add_argument("--out-dir", required=True)
    p_sw.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
