"""
Command line entry point: ``proxnmf {generate,factorize,verify,bench}``.

Exit codes: 0 success, 1 verification failure, 2 input error,
3 solver stopped at the iteration cap.
"""
import argparse
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import bench as _bench
from .datagen import Regime, classify_regime, generate_instance
from .errors import ProxNMFError
from .io import (read_json, read_matrix_csv, write_anchors, write_json,
                 write_matrix_csv)
from .matrix import DEFAULT_DEDUPE_TOL, dedupe_columns, l1_normalize_columns
from .oracle import (brute_force_extreme_rays, reconstruction_residual,
                     validate_phi2)
from .solver import SolverConfig, denormalize, run_solver

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3

RECONSTRUCTION_TOL = 1e-4


class InputError(Exception):
    pass


def _fail(msg):
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_INPUT


# generate -------------------------------------------------------------------

def cmd_generate(args):
    try:
        auto = classify_regime(args.m, args.n, args.r)
        regime = Regime.parse(args.regime) if args.regime else auto
        if regime is Regime.AMBIGUOUS:
            raise InputError(
                f"(m={args.m}, n={args.n}, r={args.r}) matches several regimes; pass --regime")
        inst = generate_instance(args.m, args.n, args.r, regime, args.seed,
                                 shuffle=args.shuffle)
    except (ProxNMFError, InputError, ValueError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    os.makedirs(args.out, exist_ok=True)
    write_matrix_csv(os.path.join(args.out, "X.csv"), inst.X_orig)
    write_json(os.path.join(args.out, "meta.json"), inst.meta())
    print(f"wrote {args.m}x{args.n} {regime.value} instance with {args.r} anchors to {args.out}")
    return EXIT_OK


# factorize ------------------------------------------------------------------

def _config_from_args(args):
    return SolverConfig(
        epsilon=args.epsilon,
        step_t=args.t,
        ridge_delta=args.delta,
        anchor_tau=args.tau,
        max_iters=args.max_iters,
        seed=args.seed,
        refine_weights=not args.no_refine,
    )


def _ground_truth(meta_path):
    if not meta_path:
        return None
    meta = read_json(meta_path)
    return np.asarray([i - 1 for i in meta["true_anchors"]], dtype=np.intp), meta


def factorize_matrix(X, cfg, dedupe_tol=DEFAULT_DEDUPE_TOL, truth=None):
    """
    Normalize, dedupe, solve and denormalize.

    Returns ``(report, anchors, W_orig, wall_time_ms)`` with `anchors` 0-based
    over the columns of `X`.
    """
    t0 = time.perf_counter()
    Xn, scales = l1_normalize_columns(X)
    Xd, keep, dup_map = dedupe_columns(Xn, dedupe_tol)
    res = run_solver(Xd, cfg)
    wall_ms = (time.perf_counter() - t0) * 1e3

    anchors = keep[res.anchors]
    n = X.shape[1]
    pos = {int(k): i for i, k in enumerate(keep)}
    W = np.zeros((anchors.size, n))
    if anchors.size:
        for j in range(n):
            W[:, j] = res.W[:, pos[dup_map.get(j, j)]]
    W_orig = denormalize(anchors, W, scales) if anchors.size else W

    residuals = {"phi2": validate_phi2(Xd, res.C_final).as_dict()}
    if anchors.size:
        residuals["reconstruction"] = reconstruction_residual(Xn, anchors, W)
        residuals["reconstruction_original"] = reconstruction_residual(X, anchors, W_orig)
    else:
        residuals["reconstruction"] = residuals["reconstruction_original"] = 1.0

    report = {
        "config": {**asdict(cfg), "dedupe_tol": dedupe_tol},
        "instance": {"m": int(X.shape[0]), "n": int(n)},
        "anchors_found": [int(i) + 1 for i in anchors],
        "anchors_true": None,
        "accuracy": None,
        "false_positives": None,
        "iterations": res.iterations,
        "converged": res.converged,
        "last_step_norm": res.last_step_norm,
        "feasibility": res.feasibility,
        "diag_gap": res.diag_gap,
        "duplicates": {str(j + 1): k + 1 for j, k in sorted(dup_map.items())},
        "residuals": residuals,
    }
    if truth is not None:
        true, meta = truth
        report["instance"].update(
            {k: meta[k] for k in ("r", "regime", "seed", "shuffled") if k in meta})
        found = set(anchors.tolist())
        tp = len(found & set(true.tolist()))
        report["anchors_true"] = [int(i) + 1 for i in true]
        report["accuracy"] = [tp, int(true.size)]
        report["false_positives"] = len(found) - tp
    return report, anchors, W_orig, wall_ms


def cmd_factorize(args):
    try:
        X = read_matrix_csv(args.x)
        cfg = _config_from_args(args)
        truth = _ground_truth(args.meta)
        report, anchors, W_orig, wall_ms = factorize_matrix(
            X, cfg, args.dedupe_tol, truth)
    except (ProxNMFError, ValueError, OSError, KeyError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    os.makedirs(args.out, exist_ok=True)
    write_json(os.path.join(args.out, "report.json"), report)
    write_json(os.path.join(args.out, "timing.json"), {"wall_time_ms": wall_ms})
    write_anchors(os.path.join(args.out, "anchors.txt"), anchors)
    write_matrix_csv(os.path.join(args.out, "W.csv"), W_orig)
    status = "converged" if report["converged"] else "stopped at max_iters"
    print(f"{len(anchors)} anchors, {report['iterations']} iterations ({status})")
    if report["accuracy"] is not None:
        tp, r = report["accuracy"]
        print(f"accuracy {tp}/{r}, false positives {report['false_positives']}")
    return EXIT_OK if report["converged"] else EXIT_NOT_CONVERGED


# verify ---------------------------------------------------------------------

def verify_run(X, report, W_orig, truth=None, oracle=True, oracle_max_n=200,
               eta=None, recon_tol=RECONSTRUCTION_TOL):
    """
    Recompute the checks for a factorization.

    Returns a list of ``(name, status, detail)`` with status one of
    ``"PASS"``, ``"FAIL"``, ``"SKIP"``.
    """
    checks = []
    n = X.shape[1]
    anchors = np.asarray([i - 1 for i in report["anchors_found"]], dtype=np.intp)
    cfg = report["config"]
    eta = 10.0 * cfg["epsilon"] if eta is None else eta

    Xn, scales = l1_normalize_columns(X)
    bad_index = anchors.size and (anchors.min() < 0 or anchors.max() >= n)
    if W_orig.shape != (anchors.size, n) or bad_index:
        checks.append(("weights-shape", "FAIL",
                       f"W is {W_orig.shape}, anchors {anchors.size}, n {n}"))
        return checks
    checks.append(("weights-shape", "PASS", f"{anchors.size}x{n}"))

    if anchors.size == 0:
        checks.append(("phi2", "FAIL", "no anchors"))
        checks.append(("reconstruction", "FAIL", "no anchors"))
    else:
        W = W_orig * scales[anchors][:, None] / scales[None, :]
        C = np.zeros((n, n))
        C[anchors, :] = W
        rep = validate_phi2(Xn, C)
        ok = rep.feasible(eta)
        checks.append(("phi2", "PASS" if ok else "FAIL",
                       f"eq {rep.max_equality_violation:.2e}, "
                       f"colsum {rep.max_column_sum_violation:.2e}, "
                       f"min {rep.min_entry:.2e}, eta {eta:.1e}"))
        rec = reconstruction_residual(Xn, anchors, W)
        checks.append(("reconstruction", "PASS" if rec <= recon_tol else "FAIL",
                       f"{rec:.2e} (tol {recon_tol:.0e})"))

    if not oracle:
        checks.append(("oracle", "SKIP", "disabled"))
    elif n > oracle_max_n:
        checks.append(("oracle", "SKIP", f"n={n} exceeds oracle limit {oracle_max_n}"))
    else:
        Xd, keep, _ = dedupe_columns(Xn, cfg.get("dedupe_tol", DEFAULT_DEDUPE_TOL))
        expect = keep[brute_force_extreme_rays(Xd)]
        ok = np.array_equal(np.sort(anchors), expect)
        checks.append(("oracle", "PASS" if ok else "FAIL",
                       _set_diff(anchors, expect)))

    if truth is not None:
        ok = np.array_equal(np.sort(anchors), np.sort(truth))
        checks.append(("ground-truth", "PASS" if ok else "FAIL", _set_diff(anchors, truth)))
    return checks


def _set_diff(found, expect):
    found, expect = set(found.tolist()), set(np.asarray(expect).tolist())
    missing = sorted(i + 1 for i in expect - found)
    extra = sorted(i + 1 for i in found - expect)
    if not missing and not extra:
        return f"{len(found)} anchors match"
    return f"missing {missing}, unexpected {extra}"


def cmd_verify(args):
    try:
        X = read_matrix_csv(args.x)
        report = read_json(args.report)
        w_path = args.weights or os.path.join(os.path.dirname(args.report) or ".", "W.csv")
        W_orig = read_matrix_csv(w_path) if report["anchors_found"] else np.zeros((0, X.shape[1]))
        truth = _ground_truth(args.meta)
        checks = verify_run(
            X, report, W_orig,
            truth=None if truth is None else truth[0],
            oracle=args.oracle, oracle_max_n=args.oracle_max_n,
            eta=args.eta, recon_tol=args.recon_tol)
    except (ProxNMFError, ValueError, OSError, KeyError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    for name, status, detail in checks:
        print(f"{status:4s}  {name}: {detail}")
    failed = [c for c in checks if c[1] == "FAIL"]
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


# bench ----------------------------------------------------------------------

def cmd_bench(args):
    try:
        rows = _bench.select_rows(args.rows)
    except KeyError as exc:
        return _fail(str(exc))
    cfg = SolverConfig(step_t=args.t, ridge_delta=args.delta, anchor_tau=args.tau,
                       max_iters=args.max_iters)
    result = _bench.run_bench(rows, seeds=args.seeds, base_seed=args.seed,
                              jobs=args.jobs, cfg=cfg)
    result = _bench.as_jsonable(result)
    table = _bench.format_table(result)
    print(table, end="")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_json(os.path.join(args.out, "bench.json"), result)
        with open(os.path.join(args.out, "bench.txt"), "w", encoding="utf-8") as fh:
            fh.write(table)
    return EXIT_OK


# parser ---------------------------------------------------------------------

def _solver_flags(p, with_eps=True):
    d = SolverConfig()
    if with_eps:
        p.add_argument("--epsilon", type=float, default=d.epsilon)
        p.add_argument("--seed", type=int, default=d.seed, help="price vector seed")
    p.add_argument("--t", type=float, default=d.step_t, help="proximal step constant")
    p.add_argument("--delta", type=float, default=d.ridge_delta, help="proximal ridge weight")
    p.add_argument("--tau", type=float, default=d.anchor_tau, help="anchor diagonal tolerance")
    p.add_argument("--max-iters", type=int, default=d.max_iters)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="proxnmf", description="Separable NMF by a proximal point LP solver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic separable instance")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--regime", choices=["c1", "c2", "c3"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shuffle", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("factorize", help="find anchor columns of a matrix CSV")
    p.add_argument("x", metavar="X.csv")
    p.add_argument("--out", required=True)
    p.add_argument("--meta", help="instance meta.json with ground truth")
    p.add_argument("--dedupe-tol", type=float, default=DEFAULT_DEDUPE_TOL)
    p.add_argument("--no-refine", action="store_true",
                   help="skip the NNLS refit of the weights")
    _solver_flags(p)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("verify", help="re-check a factorization")
    p.add_argument("x", metavar="X.csv")
    p.add_argument("report", metavar="report.json")
    p.add_argument("--weights", help="W.csv, default next to report.json")
    p.add_argument("--meta", help="instance meta.json with ground truth")
    p.add_argument("--oracle", dest="oracle", action="store_true", default=True,
                   help="compare with brute-force extreme rays (default)")
    p.add_argument("--no-oracle", dest="oracle", action="store_false")
    p.add_argument("--oracle-max-n", type=int, default=200)
    p.add_argument("--eta", type=float, help="feasibility tolerance, default 10*epsilon")
    p.add_argument("--recon-tol", type=float, default=RECONSTRUCTION_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="rerun the synthetic accuracy table")
    p.add_argument("--rows", default="small",
                   help="comma list of rows or groups: " + ", ".join(_bench.ROW_GROUPS))
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--jobs", type=int, default=_bench.default_jobs(),
                   help=f"worker processes (env {_bench.JOBS_ENV})")
    p.add_argument("--out")
    _solver_flags(p, with_eps=False)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
