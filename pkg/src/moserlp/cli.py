"""Command-line entry point.

Exit codes: 0 success, 1 verification or validation failure, 2 usage error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import certificate as cert_mod
from .formats import (FormatError, RunConfig, format_points, load_points, parse_config, parse_order,
                      point_file_from_set, resolve)
from .geometry import PointSet, distinct_distances
from .moser_lp import CROFT_DENSITY, FourierGrid, SolverFailure, autocorrelation_profile, build, solve_instance
from .udgraph import build_udg, fractional_chromatic, geometric_fractional_chromatic

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ValidationError(Exception):
    pass


def _out(text: str = "") -> None:
    sys.stdout.write(text + "\n")


def _timing(label: str, t0: float) -> None:
    _out(f"# {label}: {time.perf_counter() - t0:.2f} s")


def _load(path: str, *, exact: bool | None = True) -> tuple[PointSet, list | None]:
    try:
        f = load_points(path)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    except FormatError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    try:
        X = f.point_set()
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if exact is True and not X.exact:
        raise UsageError(f"{path}: an exact point set is required")
    if exact is False and X.exact:
        X = X.to_float()
    if f.edges:
        bad = [(i, j) for i, j in f.edges if not X.is_unit(i - 1, j - 1)]
        if bad:
            i, j = bad[0]
            raise ValidationError(f"{path}: declared edge {i} {j} is not at unit distance")
    return X, f.edges


def _config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            cfg = parse_config(Path(args.config).read_text(), cfg)
        except (OSError, FormatError) as exc:
            raise UsageError(str(exc)) from None
    return cfg


def _grid(args, cfg: RunConfig) -> FourierGrid:
    step, tmax = args.grid if args.grid else (cfg.grid_step, cfg.grid_tmax)
    try:
        return FourierGrid(step, tmax)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _iec(args, cfg: RunConfig) -> tuple[int, int | None]:
    """(kmin, kmax) with kmax None for every size; KMAX may be given as 'all' or 0."""
    try:
        kmin, kmax = (int(args.iec[0]), 0 if args.iec[1] == "all" else int(args.iec[1])) if args.iec \
            else (cfg.iec_kmin, cfg.iec_kmax)
    except ValueError:
        raise UsageError("--iec takes two integers (KMAX may be 'all')") from None
    if kmin < 1 or (kmax and kmax < kmin) or kmax < 0:
        raise UsageError("--iec needs 1 <= KMIN <= KMAX")
    return kmin, kmax or None


# --- commands -----------------------------------------------------------------
def cmd_check_points(args) -> int:
    t0 = time.perf_counter()
    X, declared = _load(args.file)
    G = build_udg(X)
    computed = sorted((i + 1, j + 1) for i, j in G.edges)
    if declared is not None:
        for i, j in declared:
            _out(f"edge {i} {j} OK")
        missing = sorted(set(computed) - {tuple(sorted(e)) for e in declared})
        for i, j in missing:
            _out(f"note: unit pair {i} {j} is not declared")
    _out(f"points = {len(X)}")
    _out(f"edges = {len(computed)}")
    _out(f"distinct_distances = {distinct_distances(X)}")
    _out("status = PASS")
    _timing("check-points", t0)
    return EXIT_OK


def _write_plot(path: str, inst, sol) -> None:
    kappa = sol.x[inst.kappa_cols.start:inst.kappa_cols.stop]
    radii = [i / 100 for i in range(501)]
    rows = autocorrelation_profile(kappa, inst.grid, radii)
    lines = [f"# croft_reference = {CROFT_DENSITY}", f"# bound = {sol.objective!r}", "r,f"]
    lines += [f"{r:.2f},{f!r}" for r, f in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_bound(args) -> int:
    cfg = _config(args)
    t0 = time.perf_counter()
    X, _ = _load(args.file, exact=None)
    grid = _grid(args, cfg)
    kmin, kmax = _iec(args, cfg)
    inst = build(X, grid, kmin, kmax, independent_only=not args.all_subsets,
                 dedup=args.dedup or cfg.dedup)
    _out(inst.summary())
    _timing("build", t0)
    t1 = time.perf_counter()
    try:
        sol = solve_instance(inst, time_limit=args.time_limit or cfg.time_limit or None)
    except SolverFailure as exc:
        _out(f"status = {exc.status}")
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SOLVER
    _timing("solve", t1)
    _out(f"bound = {sol.objective!r}")
    _out(f"# residuals primal={sol.primal_residual:.2e} dual={sol.dual_residual:.2e} gap={sol.gap:.2e}")
    if args.emit_cert:
        if not X.exact:
            raise UsageError("certificates need an exact point set")
        c = cert_mod.extract(inst, sol)
        Path(args.emit_cert).write_text(cert_mod.format_certificate(c))
        _out(f"certificate = {args.emit_cert}")
    if args.plot:
        _write_plot(args.plot, inst, sol)
        _out(f"plot = {args.plot}")
    return EXIT_OK


def _read_cert(path: str) -> cert_mod.DualCertificate:
    try:
        return cert_mod.parse_certificate(resolve(path).read_text())
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    except cert_mod.CertificateError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def cmd_verify(args) -> int:
    cfg = _config(args)
    t0 = time.perf_counter()
    X, _ = _load(args.points)
    c = _read_cert(args.certificate)
    T = args.T if args.T is not None else cfg.verify_T
    h = args.h if args.h is not None else cfg.verify_h
    nu_cap = args.nu_cap if args.nu_cap is not None else cfg.nu_cap
    try:
        res = cert_mod.verify(X, c, T, h, nu_cap=nu_cap, coarse_step=args.coarse_step,
                              tail_scale_floor=args.tail_scale_floor, tail_coef=args.tail_coef,
                              raise_on_failure=False)
    except cert_mod.CertificateError as exc:
        raise UsageError(str(exc)) from None
    except LookupError as exc:
        raise UsageError(f"T too small for the tail bound: {exc}") from None
    text = res.to_text()
    sys.stdout.write(text)
    if args.report:
        c.report = text
        Path(args.report).write_text(cert_mod.format_certificate(c))
    _timing("verify", t0)
    if not res.passed:
        sys.stderr.write(f"rejected: {res.reason}\n")
        return EXIT_FAIL
    return EXIT_OK


def cmd_complete_cert(args) -> int:
    cfg = _config(args)
    X, _ = _load(args.points)
    c = _read_cert(args.certificate)
    kmin, kmax = _iec(args, cfg)
    inst = build(X, FourierGrid(1.0, 0.0), kmin, kmax, independent_only=True, dedup=True)
    try:
        full, nu = cert_mod.fit_wc(inst, c)
    except cert_mod.CertificateError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SOLVER
    full.provenance = {"points": X.digest(), "n": str(len(X)), "iec": inst.policy.describe(),
                       "wc": "fitted to fixed scalars"}
    Path(args.output).write_text(cert_mod.format_certificate(full))
    _out(f"wc_entries = {len(full.wc)}")
    _out(f"fitted_nu = {nu!r}")
    return EXIT_OK


def cmd_fcn(args) -> int:
    X, _ = _load(args.file, exact=None)
    _out(str(fractional_chromatic(build_udg(X), args.form)))
    return EXIT_OK


def cmd_gfcn(args) -> int:
    X, _ = _load(args.file)
    _out(str(geometric_fractional_chromatic(X, args.kmax)))
    return EXIT_OK


def cmd_search(args) -> int:
    from .search import SearchConfig, beam_search, load_frontier, save_frontier

    cfg = _config(args)
    X, _ = _load(args.file, exact=None)
    step, tmax = args.grid if args.grid else (cfg.search_step, cfg.search_tmax)
    kmin, kmax = _iec(args, cfg)
    try:
        scfg = SearchConfig(width=args.width if args.width is not None else cfg.search_width,
                            depth=args.depth if args.depth is not None else cfg.search_depth,
                            grid=FourierGrid(step, tmax), iec_k_min=kmin, iec_k_max=kmax,
                            workers=args.workers if args.workers is not None else cfg.workers, max_children=args.max_children,
                            seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    frontier = None
    if args.resume:
        with open(args.resume) as fh:
            frontier = load_frontier(fh)
    t0 = time.perf_counter()
    log_fh = open(args.log, "w") if args.log else None
    try:
        res = beam_search(X, scfg, log_stream=log_fh, frontier=frontier,
                          progress=lambda d, k: _out(f"# depth {d}: {k} children scored"))
    finally:
        if log_fh:
            log_fh.close()
    if args.checkpoint:
        with open(args.checkpoint, "w") as fh:
            save_frontier(res.frontiers[-1], fh)
    _out(f"best_score = {res.best.score!r}")
    _out(f"best_points = {len(res.best.points)}")
    _out(f"best_depth = {res.best.depth}")
    _out(f"failures = {res.failures}")
    if args.output:
        Path(args.output).write_text(format_points(point_file_from_set(res.best.points)))
    _timing("search", t0)
    return EXIT_OK


def cmd_symbolize(args) -> int:
    from .search import InconsistencyError, ReconstructionFailure, symbolize

    F, _ = _load(args.floatfile, exact=False)
    try:
        order = parse_order(resolve(args.orderfile).read_text())
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    except FormatError as exc:
        raise ValidationError(str(exc)) from None
    root_name = args.root or order.root
    root = _load(root_name)[0] if root_name else None
    try:
        Y, rep = symbolize(F, order, root)
    except (ReconstructionFailure, InconsistencyError) as exc:
        raise ValidationError(str(exc)) from None
    counts = rep.counts()
    summary = " ".join(f"{k}:{counts[k]}" for k in sorted(counts))
    edges = sorted((i + 1, j + 1) for i, j in build_udg(Y).edges)
    text = format_points(point_file_from_set(Y, edges), f"rules {summary}")
    if args.output:
        Path(args.output).write_text(text)
        _out(f"rules = {summary}")
        _out(f"written = {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- parser -------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="moserlp", description="Linear-programming bounds for unit-distance avoiding planar sets.")
    p.add_argument("--config", help="key = value run configuration")
    sub = p.add_subparsers(dest="command", required=True)

    def lp_opts(q):
        q.add_argument("--grid", nargs=2, type=float, metavar=("STEP", "TMAX"))
        q.add_argument("--iec", nargs=2, metavar=("KMIN", "KMAX"))

    q = sub.add_parser("check-points", help="exact check of unit edges and distinct distances")
    q.add_argument("file")
    q.set_defaults(func=cmd_check_points)

    q = sub.add_parser("bound", help="build and solve the program, print the bound")
    q.add_argument("file")
    lp_opts(q)
    q.add_argument("--all-subsets", action="store_true", help="congruence rows for dependent subsets too")
    q.add_argument("--dedup", action="store_true", help="one IE1 row and one IE2 row per distance")
    q.add_argument("--time-limit", type=float)
    q.add_argument("--emit-cert", metavar="OUT")
    q.add_argument("--plot", metavar="OUT.csv")
    q.set_defaults(func=cmd_bound)

    q = sub.add_parser("verify", help="rigorously verify a certificate")
    q.add_argument("points")
    q.add_argument("certificate")
    q.add_argument("--T", type=float)
    q.add_argument("--h", type=float)
    q.add_argument("--nu-cap", type=float)
    q.add_argument("--coarse-step", type=float)
    q.add_argument("--tail-scale-floor", type=float)
    q.add_argument("--tail-coef", type=float)
    q.add_argument("--report", metavar="OUT", help="write the certificate with a [report] section")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("complete-cert", help="fit wc for fixed published scalars")
    q.add_argument("points")
    q.add_argument("certificate")
    q.add_argument("-o", "--output", required=True)
    q.add_argument("--iec", nargs=2, metavar=("KMIN", "KMAX"))
    q.set_defaults(func=cmd_complete_cert)

    q = sub.add_parser("fcn", help="fractional chromatic number (exact)")
    q.add_argument("file")
    q.add_argument("--form", choices=("inequality", "equality"), default="inequality")
    q.set_defaults(func=cmd_fcn)

    q = sub.add_parser("gfcn", help="geometric fractional chromatic number (exact)")
    q.add_argument("file")
    q.add_argument("--kmax", type=int, default=2)
    q.set_defaults(func=cmd_gfcn)

    q = sub.add_parser("search", help="beam search from a root set")
    q.add_argument("file")
    lp_opts(q)
    q.add_argument("--width", type=int)
    q.add_argument("--depth", type=int)
    q.add_argument("--workers", type=int)
    q.add_argument("--max-children", type=int)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--log", metavar="OUT.jsonl")
    q.add_argument("--checkpoint", metavar="OUT.jsonl")
    q.add_argument("--resume", metavar="IN.jsonl")
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_search)

    q = sub.add_parser("symbolize", help="recover exact coordinates from floats")
    q.add_argument("floatfile")
    q.add_argument("orderfile")
    q.add_argument("--root")
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_symbolize)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ValidationError as exc:
        sys.stderr.write(f"validation failed: {exc}\n")
        _out("status = FAIL")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
