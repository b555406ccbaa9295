"""Command-line runner: ``rareexit {estimate,table,verify,selfcheck} --spec FILE``.

Exit status is 0 on success, 1 for a bad spec, 2 when a check fails and 3 on
a numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from .config import ExperimentSpec, load_spec
from .errors import ConfigError, HypothesisViolation, RareExitError
from .sampler import EstimatorReport, SimConfig, estimate, experiment_grid
from .verify import certify_region_lemmas, theorem_bound

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_NUMERIC = 0, 1, 2, 3


def _versions() -> dict[str, str]:
    out = {"python": platform.python_version()}
    for pkg in ("artifact", "numpy", "scipy", "numba"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


def _out_dir(args, spec: ExperimentSpec) -> Path:
    d = Path(args.out or spec.out or Path("results") / spec.name)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _cell(args, spec: ExperimentSpec):
    eps = args.eps if args.eps is not None else spec.eps[0]
    T = args.T if args.T is not None else spec.T[0]
    return eps, T


def _params_dict(p) -> dict[str, float]:
    return {k: float(getattr(p, k)) for k in ("eps", "T", "xhat", "M", "kappa", "delta",
                                              "tstar", "z", "H")}


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _print_report(r: EstimatorReport):
    print(f"scheme={r.scheme} eps={r.epsilon:g} T={r.T:g} N={r.n}")
    print(f"  estimate      {r.estimate:.6e}  (std error {r.std_error:.3e})")
    print(f"  second moment {r.second_moment:.6e}")
    print(f"  rel error     {r.rel_error:.4g}   hits {r.hits}   {r.wall_time_s:.1f}s")


# --- commands ---------------------------------------------------------------------

def cmd_estimate(args, spec: ExperimentSpec) -> int:
    eps, T = _cell(args, spec)
    n = args.n or spec.n
    cfg = SimConfig(spec.rule.params(spec.problem, eps, T), spec.rule.kind, n, spec.dt,
                    spec.seed, 0)
    rep = estimate(spec.problem, cfg, args.workers)
    _print_report(rep)
    if args.out:
        d = _out_dir(args, spec)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EstimatorReport.CSV_FIELDS)
        w.writerow(rep.csv_row())
        (d / "cell.csv").write_text(buf.getvalue())
    return EXIT_NUMERIC if rep.zero_hits else EXIT_OK


def cmd_table(args, spec: ExperimentSpec) -> int:
    t0 = time.perf_counter()
    res = experiment_grid(spec.problem, spec.eps, spec.T, spec.rule, spec.n, spec.seed,
                          dt=spec.dt, workers=args.workers)
    wall = time.perf_counter() - t0
    d = _out_dir(args, spec)
    (d / "estimates.csv").write_text(res.table_csv("estimate"))
    (d / "rel_errors.csv").write_text(res.table_csv("rel_error"))
    (d / "cells.csv").write_text(res.cells_csv())
    cells = {}
    for i, e in enumerate(res.eps):
        for j, T in enumerate(res.T):
            key = f"{e!r},{T!r}"
            entry = {"stream": i * len(res.T) + j}
            try:
                entry["params"] = _params_dict(spec.rule.params(spec.problem, e, T))
            except (RareExitError, ValueError) as exc:
                entry["params"] = f"{type(exc).__name__}: {exc}"
            if (i, j) in res.errors:
                entry["error"] = res.errors[(i, j)]
            cells[key] = entry
    manifest = {
        "name": spec.name, "command": "table", "config": spec.raw,
        "resolved": {"seed": spec.seed, "dt": spec.dt, "n": spec.n, "scheme": spec.rule.kind,
                     "L": spec.problem.L, "c": spec.problem.c, "sbar": spec.problem.sbar},
        "cells": cells, "versions": _versions(), "workers": args.workers,
        "wall_time_s": round(wall, 3),
    }
    (d / "manifest.json").write_text(json.dumps(_json_safe(manifest), indent=2) + "\n")
    print(f"{len(res.reports)} cells done, {len(res.errors)} failed, {wall:.1f}s -> {d}")
    with np.printoptions(precision=3):
        print("estimates:\n", res.table("estimate"))
        print("relative errors:\n", res.table("rel_error"))
    return EXIT_NUMERIC if res.errors else EXIT_OK


def cmd_verify(args, spec: ExperimentSpec) -> int:
    eps, T = _cell(args, spec)
    p = spec.rule.params(spec.problem, eps, T)
    kind = spec.rule.kind
    if not kind.startswith("mollified"):
        raise ConfigError("scheme.kind", "verify needs a mollified scheme")
    cert = certify_region_lemmas(spec.problem, p, spec.analysis, kind)
    bound = theorem_bound(spec.problem, p, spec.analysis, kind, strict=False)
    d = _out_dir(args, spec)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["region", "worst_margin", "t", "x", "worst_margin_half_eps", "shrink",
                "certified"])
    for r in cert.at_eps.regions:
        h = next(q for q in cert.at_half.regions if q.name == r.name)
        w.writerow([r.name, repr(r.worst_margin), repr(r.t), repr(r.x), repr(h.worst_margin),
                    repr(cert.shrink[r.name]), cert.certified[r.name]])
    (d / "verify_regions.csv").write_text(buf.getvalue())

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "value"])
    for k, v in [("bound", bound.bound), ("I1", bound.I1), ("I2", bound.I2),
                 ("decay_rate", bound.decay_rate), *bound.components.items()]:
        w.writerow([k, repr(float(v))])
    for k, v in bound.hypotheses.items():
        w.writerow([f"hypothesis: {k}", v])
    (d / "verify_theorem.csv").write_text(buf.getvalue())

    print(f"region checks at eps={eps:g} (eta={spec.analysis.eta:g}, "
          f"slack={spec.analysis.slack:g}):")
    for r in cert.at_eps.regions:
        if r.points == 0:
            print(f"  {r.name:8s} empty")
            continue
        status = "pass" if cert.certified[r.name] else "FAIL"
        print(f"  {r.name:8s} {status}  worst {r.worst_margin:+.3e} at t={r.t:.3g} "
              f"x={r.x:.3g}  shrink at eps/2 x{cert.shrink[r.name]:.3g}")
    print(f"theorem bound {bound.bound:.6g} (I1={bound.I1:.6g}, I2={bound.I2:.6g}); "
          f"decay rate {bound.decay_rate:.6g}")
    for k, v in bound.hypotheses.items():
        print(f"  [{'x' if v else ' '}] {k}")
    print("summary:", "all regions certified" if cert.passed else "region check failed")
    return EXIT_OK if cert.passed else EXIT_CHECK


def cmd_selfcheck(args, spec: ExperimentSpec) -> int:
    eps, T = _cell(args, spec)
    n = args.n or spec.n
    p = spec.rule.params(spec.problem, eps, T)
    kind = spec.rule.kind
    ok = True
    rows = {}
    for w in sorted({1, max(args.workers, 8)}):
        r = estimate(spec.problem, SimConfig(p, kind, n, spec.dt, spec.seed, 0), w)
        rows[w] = r.csv_row()[:-1]
    same = len({tuple(v) for v in rows.values()}) == 1
    print(f"reproducibility over workers {sorted(rows)}: {'pass' if same else 'FAIL'}")
    ok &= same
    a = estimate(spec.problem, SimConfig(p, kind, n, spec.dt, spec.seed, 0), args.workers)
    b = estimate(spec.problem, SimConfig(p, kind, n, spec.dt / 2, spec.seed, 0), args.workers)
    diff = abs(a.estimate - b.estimate)
    tol = 2.0 * math.hypot(a.std_error, b.std_error)
    good = diff < tol
    print(f"dt halving: {a.estimate:.4e} vs {b.estimate:.4e}, |diff| {diff:.2e} "
          f"< {tol:.2e}: {'pass' if good else 'FAIL'}")
    ok &= good
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {"estimate": cmd_estimate, "table": cmd_table, "verify": cmd_verify,
            "selfcheck": cmd_selfcheck}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rareexit", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--spec", required=True, help="INI experiment spec")
    ap.add_argument("--out", help="output directory (default: spec run.out or results/NAME)")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=lambda s: int(s, 0), help="override run.seed")
    ap.add_argument("--dt", type=float, help="override run.dt")
    ap.add_argument("--eps", type=float, help="cell for estimate/verify/selfcheck")
    ap.add_argument("--T", type=float, help="cell for estimate/verify/selfcheck")
    ap.add_argument("--n", type=int, help="override run.n for estimate/selfcheck")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.spec)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed", "must fit in 64 unsigned bits")
            spec.seed = args.seed
        if args.dt is not None:
            if not 0 < args.dt <= min(spec.T):
                raise ConfigError("--dt", "need 0 < dt <= min(T)")
            spec.dt = args.dt
        if args.workers < 1:
            raise ConfigError("--workers", "must be at least 1")
        return COMMANDS[args.command](args, spec)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HypothesisViolation, AssertionError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (RareExitError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
