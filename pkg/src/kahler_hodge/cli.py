"""Command-line front end: ``kahler-hodge <command> [options]``.

Exit status is 0 on success, 1 on a parse or validation error and 2 when a
check suite (or a decomposition tolerance) fails.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from pathlib import Path

from .algebra import AlgebraError, all_indices
from .checks import check_algebra, check_calculus, check_delta, check_green
from .fields import GridError, Region
from .hodge import DecayWarning, decompose_full_space, decompose_region, split_by_grade
from .parser import FieldFileError, load_field
from .potential import SELF_CELL_RULES, KernelError, KernelSpec
from .tables import format_report, write_report, write_table

EXIT_OK, EXIT_INPUT, EXIT_SUITE = 0, 1, 2


def parse_region(text: str, grid) -> Region:
    """``i0:i1,j0:j1,...`` (inclusive node indices) to a :class:`Region`."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != grid.n:
        raise GridError(f"region needs {grid.n} ranges, got {len(parts)}")
    bounds = []
    for p in parts:
        lo, sep, hi = p.partition(":")
        if not sep:
            raise GridError(f"region range {p!r} is not of the form i0:i1")
        try:
            bounds.append((int(lo), int(hi)))
        except ValueError:
            raise GridError(f"region range {p!r} is not integer") from None
    return Region(grid, tuple(bounds))


def _diag_section(diag: dict) -> dict:
    # timings stay out of reports so identical runs give identical files
    return {k: v for k, v in diag.items() if k != "seconds"}


def cmd_decompose(args) -> int:
    alpha = load_field(args.input)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kernel = KernelSpec(alpha.n, args.self_cell)
    region = parse_region(args.region, alpha.grid) if args.region else None
    parts = split_by_grade(alpha)
    if not parts:
        raise GridError("input field is identically zero")
    totals = {"closed": None, "coclosed": None, "harmonic": None}
    sections = {}
    worst = 0.0
    t0 = time.perf_counter()
    for k, part in parts.items():
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DecayWarning)
            if region is None:
                res = decompose_full_space(part, kernel_spec=kernel, backend=args.backend,
                                           **({"derivative_order": args.order} if args.order else {}))
            else:
                res = decompose_region(part, region, kernel_spec=kernel, boundary_check=args.boundary_check,
                                       backend=args.backend,
                                       **({"derivative_order": args.order} if args.order else {}))
        diag = _diag_section(res.diagnostics)
        diag["warnings"] = len(caught)
        sections[f"grade {k}"] = diag
        worst = max(worst, diag["reconstruction_error"])
        for name in totals:
            comp = getattr(res, name)
            totals[name] = comp if totals[name] is None else totals[name] + comp
    grid = totals["closed"].grid
    n = grid.n
    # all three parts keep the grade of their input, so the columns are the
    # basis indices of the input grades
    grades = sorted(parts)
    cols = [idx for idx in all_indices(n) if len(idx) in grades]
    for name, fld in totals.items():
        write_table(fld, out / f"{name}.csv", cols)
    tol = args.tol_rel + args.tol_abs
    ok = worst <= tol
    header = {
        "command": "decompose",
        "input": Path(args.input).name,
        "mode": "region" if region else "full-space",
        "n": n,
        "grades": grades,
        "self_cell": args.self_cell,
        "reconstruction_error": worst,
        "tolerance": tol,
        "status": "ok" if ok else "tolerance exceeded",
    }
    text = write_report(out / "report.txt", header, sections)
    sys.stdout.write(text)
    print(f"seconds: {time.perf_counter() - t0:.3f}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_SUITE


def _emit_suite(res, args) -> int:
    header = {"command": args.command, "suite": res.name, "status": "pass" if res.passed else "fail"}
    text = format_report(header, {"checks": res.lines()})
    if getattr(args, "out", None):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK if res.passed else EXIT_SUITE


def cmd_check_algebra(args) -> int:
    return _emit_suite(check_algebra(args.n), args)


def cmd_check_calculus(args) -> int:
    return _emit_suite(check_calculus(fields=args.fields, seed=args.seed, tol_rel=args.tol_rel), args)


def cmd_check_green(args) -> int:
    return _emit_suite(check_green(points=args.points, tol_rel=args.tol_rel), args)


def cmd_check_delta(args) -> int:
    return _emit_suite(check_delta(tol_rel=args.tol_rel, include_4d=not args.skip_4d), args)


def cmd_boundary_check(args) -> int:
    alpha = load_field(args.input)
    region = parse_region(args.region, alpha.grid)
    kernel = KernelSpec(alpha.n, args.self_cell)
    sections = {}
    ok = True
    for k, part in split_by_grade(alpha).items():
        res = decompose_region(part, region, kernel_spec=kernel, boundary_check=True, backend=args.backend)
        diag = _diag_section(res.diagnostics)
        if args.tol_rel is not None and diag["boundary_d_norm"] > args.tol_abs:
            ok = ok and diag["boundary_d_relative"] <= args.tol_rel
        sections[f"grade {k}"] = diag
    header = {"command": "boundary-check", "input": Path(args.input).name,
              "status": "ok" if ok else "tolerance exceeded"}
    text = format_report(header, sections)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_SUITE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kahler-hodge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="decompose a field file into closed, coclosed and harmonic parts")
    d.add_argument("--input", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--region", help="inclusive node ranges i0:i1,j0:j1,... (region mode)")
    d.add_argument("--tol-rel", type=float, default=0.05)
    d.add_argument("--tol-abs", type=float, default=0.0)
    d.add_argument("--self-cell", choices=SELF_CELL_RULES, default="ball")
    d.add_argument("--order", type=int, choices=(2, 4, 6), help="derivative stencil order")
    d.add_argument("--boundary-check", action="store_true", help="compare the surface prediction (region mode)")
    d.add_argument("--backend", choices=("auto", "numba", "numpy"), default="auto")
    d.set_defaults(func=cmd_decompose)

    a = sub.add_parser("check-algebra", help="exhaustive basis products against a brute-force oracle")
    a.add_argument("--n", type=int, default=5)
    a.add_argument("--out")
    a.set_defaults(func=cmd_check_algebra)

    c = sub.add_parser("check-calculus", help="exact discrete identities and product-rule convergence")
    c.add_argument("--fields", type=int, default=20)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol-rel", type=float, default=1e-12)
    c.add_argument("--tol-abs", type=float, default=0.0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_check_calculus)

    g = sub.add_parser("check-green", help="Green–Kähler identity, pointwise and integrated")
    g.add_argument("--points", type=int, default=32)
    g.add_argument("--tol-rel", type=float, default=0.01)
    g.add_argument("--tol-abs", type=float, default=0.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_check_green)

    e = sub.add_parser("check-delta", help="point evaluation from the Laplacian through the kernel")
    e.add_argument("--tol-rel", type=float, default=0.05)
    e.add_argument("--tol-abs", type=float, default=0.0)
    e.add_argument("--skip-4d", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=cmd_check_delta)

    b = sub.add_parser("boundary-check", help="surface-integral prediction against the harmonic remainder")
    b.add_argument("--input", required=True)
    b.add_argument("--region", required=True)
    b.add_argument("--tol-rel", type=float)
    b.add_argument("--tol-abs", type=float, default=0.0)
    b.add_argument("--self-cell", choices=SELF_CELL_RULES, default="ball")
    b.add_argument("--backend", choices=("auto", "numba", "numpy"), default="auto")
    b.add_argument("--out")
    b.set_defaults(func=cmd_boundary_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FieldFileError as exc:
        print(f"error: {exc.record()}", file=sys.stderr)
        return EXIT_INPUT
    except (GridError, AlgebraError, KernelError, OSError) as exc:
        print(f"error: E_VALUE::: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
