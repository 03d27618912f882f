"""Command-line front end: ``mtv {denoise,verify,sweep,refine,bench}``.

Exit codes: 0 success, 1 bad flags or unusable input, 2 non-convergence or a
failed check.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .experiments import bench_image, bench_per_sigma, refinement_experiment, synthetic_image
from .operators import DenoiseProblem, add_gaussian_noise, psnr
from .solvers import SolverConfig, denoise_dual_apg, sweep_theta_lambda
from .suite import run_suite

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
log = logging.getLogger("mtv")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _floats(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("grid values must be finite")
    return vals


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None


def _cfg(args) -> SolverConfig:
    try:
        return SolverConfig(max_iter=args.max_iter, tol=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_params(lam, theta):
    if lam is not None and not (math.isfinite(lam) and lam >= 0):
        raise UsageError(f"--lambda must be >= 0, got {lam}")
    if theta is not None and not 0.0 <= theta <= 1.0:
        raise UsageError(f"--theta must lie in [0, 1], got {theta}")


def _load(path) -> np.ndarray:
    try:
        return io.load_image(path).values
    except (FileNotFoundError, io.UnsupportedImageError) as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------


def cmd_denoise(args) -> int:
    _check_params(args.lam, args.theta)
    cfg = _cfg(args)
    img = _load(args.input)
    y = img
    if args.sigma:
        y = add_gaussian_noise(img, args.sigma, args.seed).values
    a, rep = denoise_dual_apg(DenoiseProblem(y, args.lam, args.theta), cfg)
    out = Path(args.output)
    io.save_image(a, out)
    report = Path(args.report) if args.report else out.with_suffix(".csv")
    row = io.ReportRow(
        image_id=Path(args.input).stem,
        sigma=float(args.sigma or 0.0),
        lam=float(args.lam),
        theta=float(args.theta),
        psnr_db=psnr(a, img) if args.sigma else math.nan,
        iterations=rep.iterations,
        runtime_ms=rep.runtime_ms,
        objective=rep.final_objective,
    )
    io.write_csv([row], report)
    print(f"wrote {out} ({rep.iterations} iterations, relative gap {rep.residual:.2e})")
    if not rep.converged:
        print("warning: solver did not converge", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suite(args.seed, inject_fault=args.inject_fault)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed (seed {args.seed})")
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


def _clean_image(args, size=64):
    if args.input:
        return _load(args.input)
    return synthetic_image(args.seed, size)


def cmd_sweep(args) -> int:
    if not args.theta_grid or not args.lambda_grid:
        raise UsageError("--theta-grid and --lambda-grid must be nonempty")
    for t in args.theta_grid:
        _check_params(None, t)
    for lam in args.lambda_grid:
        _check_params(lam, None)
    cfg = _cfg(args)
    clean = _clean_image(args)
    res = sweep_theta_lambda(clean, args.sigma, args.theta_grid, args.lambda_grid, seed=args.seed, cfg=cfg)
    image_id = Path(args.input).stem if args.input else f"synthetic-{args.seed}"
    rows = [
        io.ReportRow(
            image_id, float(args.sigma), float(lam), float(th), float(res.table[i, j]),
            int(res.iterations[i, j]), float(res.runtime_ms[i, j]), float(res.objectives[i, j]),
        )
        for i, th in enumerate(res.thetas)
        for j, lam in enumerate(res.lambdas)
    ]
    io.write_csv(rows, args.output)
    lam, th, p = res.best
    print(f"wrote {len(rows)} rows to {args.output}")
    print(f"best: lambda*={lam:g} theta*={th:g} psnr={p:.3f} dB")
    return EXIT_OK


def cmd_refine(args) -> int:
    _check_params(args.lam, args.theta)
    if args.input:
        img = _load(args.input)
        c = args.crop
        if img.shape[0] < c or img.shape[1] < c:
            raise UsageError(f"image smaller than the {c}x{c} crop")
        img = img[:c, :c]
    else:
        img = synthetic_image(args.seed, args.crop)
    if img.shape[0] & (img.shape[0] - 1):
        raise UsageError("--crop must be a power of two")
    y = add_gaussian_noise(img, args.sigma, args.seed).values if args.sigma else img
    base = img.shape[0].bit_length() - 1
    levels = args.levels or [base, base + 1, base + 2]
    if min(levels) < base:
        raise UsageError(f"levels must be >= {base} for a {img.shape[0]}x{img.shape[0]} crop")
    rows = refinement_experiment(y, args.lam, args.theta, levels, args.embedding, tol=args.tol, max_iter=args.max_iter)
    with open(args.output, "w", newline="") as fh:
        fh.write("level,objective,measurement_dev,solution_dev,gap,converged,runtime_ms\n")
        for r in rows:
            fh.write(
                f"{r.level},{r.objective!r},{r.measurement_dev!r},{r.solution_dev!r},"
                f"{r.gap!r},{int(r.converged)},{r.runtime_ms!r}\n"
            )
    objs = [r.objective for r in rows]
    spread = max(objs) - min(objs)
    mdev = max(r.measurement_dev for r in rows)
    for r in rows:
        print(f"level {r.level}: objective {r.objective:.12g}  meas. dev {r.measurement_dev:.2e}  sol. dev {r.solution_dev:.2e}")
    print(f"objective spread {spread:.2e}, measurement spread {mdev:.2e}")
    ok = spread <= 1e-8 and mdev <= 1e-6 and all(r.converged for r in rows)
    return EXIT_OK if ok else EXIT_FAIL


def _bench_job(job):
    image_id, clean, sigma, seed, mode, fixed, tol, max_iter = job
    cfg = SolverConfig(tol=tol, max_iter=max_iter)
    return bench_image(image_id, clean, sigma, seed, mode=mode, fixed=fixed, cfg=cfg)


def cmd_bench(args) -> int:
    cfg = _cfg(args)
    if args.synthetic:
        corpus = [(f"synthetic-{k}", synthetic_image(args.seed * 1000 + k)) for k in range(args.synthetic)]
    else:
        data_dir = args.data_dir or io.default_data_dir()
        if not data_dir:
            raise UsageError(f"no data directory: pass --data-dir or set {io.DATA_DIR_ENV}")
        try:
            files = io.list_images(data_dir)
        except FileNotFoundError as exc:
            raise UsageError(str(exc)) from None
        if args.max_images:
            files = files[: args.max_images]
        corpus = [(p.stem, _load(p)) for p in files]
    if not corpus:
        raise UsageError("no images found")
    sigmas = args.sigma_list or [5 / 255, 15 / 255, 25 / 255]
    if args.mode == "fixed":
        _check_params(args.lam, args.theta)
        if args.lam is None or args.theta is None:
            raise UsageError("--mode fixed needs --lambda and --theta")

    jobs = [
        (iid, img, s, args.seed + k, args.mode, (args.lam, args.theta), cfg.tol, cfg.max_iter)
        for s in sigmas
        for k, (iid, img) in enumerate(corpus)
    ]
    workers = max(1, args.workers)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    map_fn = pool.map if pool else map
    try:
        if args.mode == "per-sigma":
            results = []
            for s in sigmas:
                results += bench_per_sigma(corpus, s, args.seed, cfg=cfg, map_fn=map_fn)
        else:
            results = list(map_fn(_bench_job, jobs))
    finally:
        if pool:
            pool.shutdown()

    rows = []
    for r in results:
        for method, t in (("tv", r.tv), ("mtv", r.mtv)):
            rows.append(
                io.ReportRow(f"{r.image_id}:{method}", r.sigma, t.lam, t.theta, t.psnr, t.iterations, t.runtime_ms, t.objective)
            )
    io.write_csv(rows, args.output)
    print(f"wrote {len(rows)} rows to {args.output}")
    print("sigma*255   TV mean   MTV mean   MTV-TV   theta* mean   theta* std")
    for s in sigmas:
        sub = [r for r in results if r.sigma == s]
        tv = np.mean([r.tv.psnr for r in sub])
        mtv = np.mean([r.mtv.psnr for r in sub])
        th = np.array([r.mtv.theta for r in sub])
        print(f"{s * 255:9.2f}  {tv:8.3f}  {mtv:9.3f}  {mtv - tv:+7.3f}  {th.mean():12.4f}  {th.std():11.4f}")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mtv", description="Mixed-derivative total-variation denoising and checks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(sp, tol=1e-9, max_iter=20000):
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--max-iter", type=int, default=max_iter)

    d = sub.add_parser("denoise", help="denoise one image")
    d.add_argument("--input", required=True)
    d.add_argument("--output", required=True)
    d.add_argument("--lambda", dest="lam", type=float, required=True)
    d.add_argument("--theta", type=float, default=0.5)
    d.add_argument("--sigma", type=float, default=0.0, help="add noise of this std before denoising")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--report", help="CSV report path (default: output with .csv)")
    solver_flags(d)
    d.set_defaults(func=cmd_denoise)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--inject-fault", action="store_true", help="corrupt one check (harness self-test)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="PSNR over a theta x lambda grid")
    s.add_argument("--input", help="clean image (default: synthetic)")
    s.add_argument("--output", required=True)
    s.add_argument("--sigma", type=float, default=25 / 255)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--theta-grid", type=_floats, default=[0.0, 0.25, 0.5, 0.75, 1.0])
    s.add_argument("--lambda-grid", type=_floats, default=[0.02, 0.05, 0.1, 0.2])
    solver_flags(s, tol=1e-6, max_iter=5000)
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("refine", help="solve one problem on finer dyadic grids")
    r.add_argument("--input", help="image to crop (default: synthetic)")
    r.add_argument("--output", required=True)
    r.add_argument("--crop", type=int, default=32)
    r.add_argument("--lambda", dest="lam", type=float, default=0.1)
    r.add_argument("--theta", type=float, default=0.5)
    r.add_argument("--sigma", type=float, default=0.1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--levels", type=_ints, default=None)
    r.add_argument("--embedding", choices=["refined-data", "measurement"], default="refined-data")
    solver_flags(r, tol=1e-13, max_iter=200000)
    r.set_defaults(func=cmd_refine)

    b = sub.add_parser("bench", help="TV vs MTV over a directory of images")
    b.add_argument("--data-dir", default=None, help=f"default: ${io.DATA_DIR_ENV}")
    b.add_argument("--synthetic", type=int, default=0, help="use N synthetic images instead")
    b.add_argument("--output", required=True)
    b.add_argument("--sigma", dest="sigma_list", type=_floats, default=None,
                   help="comma-separated noise levels (default 5,15,25 over 255)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--mode", choices=["per-image", "per-sigma", "fixed"], default="per-image")
    b.add_argument("--lambda", dest="lam", type=float, default=None)
    b.add_argument("--theta", type=float, default=None)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--max-images", type=int, default=0)
    solver_flags(b, tol=1e-6, max_iter=5000)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mtv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
