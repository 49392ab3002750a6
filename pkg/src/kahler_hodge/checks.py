"""Verification suites shared by the command line and the test-suite.

Each suite returns a :class:`SuiteResult`: named rows holding a measured
value, its limit and a pass flag.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import algebra as alg
from .fields import (
    FormField,
    GridSpec,
    Region,
    exterior_derivative,
    field_eta,
    field_product,
    interior_derivative,
    kahler_derivative,
    verify_product_rules,
)
from .green import green_identity_residual
from .potential import delta_identity_residual

# -- brute-force sign oracle ---------------------------------------------------


def oracle_clifford(a, b):
    """Clifford product of two basis indices by adjacent transpositions.

    Returns ``(index, sign)``. Equal neighbours cancel (``dx^i dx^i = 1``).
    """
    seq = list(a) + list(b)
    sign = 1
    i = 0
    while i < len(seq) - 1:
        if seq[i] > seq[i + 1]:
            seq[i], seq[i + 1] = seq[i + 1], seq[i]
            sign = -sign
            i = max(i - 1, 0)
        elif seq[i] == seq[i + 1]:
            del seq[i:i + 2]
            i = max(i - 1, 0)
        else:
            i += 1
    return tuple(seq), sign


def oracle_product(a, b, kind: str):
    if kind == "clifford":
        return oracle_clifford(a, b)
    if kind == "exterior":
        return None if set(a) & set(b) else oracle_clifford(a, b)
    if kind == "left":
        return oracle_clifford(a, b) if set(a) <= set(b) else None
    if kind == "right":
        return oracle_clifford(a, b) if set(b) <= set(a) else None
    raise ValueError(kind)


def oracle_reversion_sign(a) -> int:
    return oracle_clifford(tuple(reversed(a)), ())[1]


def oracle_complement_sign(a, n: int) -> int:
    comp = tuple(i for i in range(1, n + 1) if i not in a)
    return oracle_clifford(tuple(a), comp)[1]


# -- results -------------------------------------------------------------------


@dataclass
class CheckRow:
    name: str
    value: float
    limit: float
    passed: bool
    note: str = ""


@dataclass
class SuiteResult:
    name: str
    rows: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, name, value, limit, passed=None, note=""):
        value = float(value)
        if passed is None:
            passed = value <= limit
        self.rows.append(CheckRow(name, value, float(limit), bool(passed), note))

    def lines(self) -> list:
        out = []
        for r in self.rows:
            status = "pass" if r.passed else "FAIL"
            extra = f" ({r.note})" if r.note else ""
            out.append(f"{r.name}: {r.value:.6g} limit {r.limit:.6g} {status}{extra}")
        return out


# -- algebra -------------------------------------------------------------------


def check_algebra(max_n: int = 5) -> SuiteResult:
    """Exhaustive comparison of every basis product and sign against the oracle."""
    t0 = time.perf_counter()
    res = SuiteResult(f"algebra n<={max_n}")
    for n in range(1, max_n + 1):
        basis = alg.all_indices(n)
        counts = {k: [0, 0] for k in ("clifford", "exterior", "interior", "left", "right",
                                        "reversion", "eta", "complement")}
        mv = {a: alg.Multivector(n, {a: 1.0}) for a in basis}
        funcs = {"clifford": alg.clifford_product, "exterior": alg.exterior_product,
                 "left": alg.left_contraction}
        for a in basis:
            for b in basis:
                for kind, fn in funcs.items():
                    want = oracle_product(a, b, kind)
                    got = fn(mv[a], mv[b])
                    expect = alg.Multivector(n, {} if want is None else {want[0]: want[1]})
                    counts[kind][0] += 1
                    counts[kind][1] += got != expect
                want = oracle_product(a, b, "right")
                got = alg.BLADE_PRODUCTS["right"](alg.index_to_mask(a), alg.index_to_mask(b))
                got = None if got is None else (alg.mask_to_index(got[0]), got[1])
                counts["right"][0] += 1
                counts["right"][1] += got != want
                if len(a) == 1:
                    want = oracle_product(a, b, "left")
                    expect = alg.Multivector(n, {} if want is None else {want[0]: want[1]})
                    counts["interior"][0] += 1
                    counts["interior"][1] += alg.interior_product(mv[a], mv[b]) != expect
            rev = alg.reversion(mv[a])[a]
            counts["reversion"][0] += 1
            counts["reversion"][1] += rev != oracle_reversion_sign(a)
            counts["eta"][0] += 1
            counts["eta"][1] += alg.eta(mv[a])[a] != (-1) ** len(a)
            comp, sign = alg.complement(a, n)
            counts["complement"][0] += 1
            counts["complement"][1] += sign != oracle_complement_sign(a, n)
        for kind, (total, bad) in counts.items():
            res.add(f"n={n} {kind} mismatches of {total}", bad, 0)
    res.seconds = time.perf_counter() - t0
    res.add("runtime seconds", res.seconds, 10.0)
    return res


# -- discrete calculus -----------------------------------------------------------


def random_field(grid: GridSpec, rng, grades=None) -> FormField:
    """Gaussian envelope times random quadratics, on every basis index of the chosen grades."""
    n = grid.n
    mesh = grid.mesh()
    env = np.exp(-0.5 * sum(x * x for x in mesh))
    comps = {}
    for idx in alg.all_indices(n):
        if grades is not None and len(idx) not in grades:
            continue
        c = rng.normal(size=(n + 1,))
        q = rng.normal()
        poly = c[0] + sum(c[i + 1] * mesh[i] for i in range(n)) + q * mesh[0] * mesh[-1]
        comps[idx] = env * poly
    return FormField(grid, comps)


def _rel(lhs: FormField, rhs: FormField, mask, *scales) -> float:
    scale = max([lhs.max_abs(mask), rhs.max_abs(mask)] + [s.max_abs(mask) for s in scales] + [1e-300])
    return (lhs - rhs).max_abs(mask) / scale


def calculus_identities(u: FormField, c: alg.Multivector) -> dict:
    """Relative max residuals of the exact discrete identities for one field.

    ``c`` is a constant differential for the constant-differential rules.
    """
    grid = u.grid
    n = grid.n
    mask = grid.interior_mask(1)
    zero = FormField.zeros(grid)
    du, deltau = exterior_derivative(u), interior_derivative(u)
    out = {
        "dd": _rel(exterior_derivative(du), zero, mask, du),
        "delta delta": _rel(interior_derivative(deltau), zero, mask, deltau),
        "partial partial": _rel(kahler_derivative(kahler_derivative(u)),
                                interior_derivative(du) + exterior_derivative(deltau), mask),
    }
    z = FormField.constant(grid, alg.unit_n_form(n))
    uz = field_product(u, z)
    out["delta(uz) = (du)z"] = _rel(interior_derivative(uz), field_product(du, z), mask)
    out["d(uz) = (delta u)z"] = _rel(exterior_derivative(uz), field_product(deltau, z), mask)
    cf = FormField.constant(grid, c)
    out["partial(uc) = (partial u)c"] = _rel(kahler_derivative(field_product(u, cf)),
                                             field_product(kahler_derivative(u), cf), mask)
    f = u.grade_part(0)
    df = exterior_derivative(f)
    out["delta(cf) = -(eta c).df"] = _rel(interior_derivative(field_product(cf, f)),
                                          -field_product(field_eta(cf), df, "right"), mask, df)
    return out


def check_calculus(dims=(3, 4), fields: int = 20, seed: int = 0, tol_rel: float = 1e-12,
                   product_rule_band=(3.5, 4.5)) -> SuiteResult:
    """Exact identities on randomized fields plus the O(h^2) product-rule study."""
    t0 = time.perf_counter()
    res = SuiteResult("calculus")
    rng = np.random.default_rng(seed)
    for n in dims:
        grid = GridSpec.cube(n, -2.0, 2.0, 12 if n == 3 else 8)
        worst: dict = {}
        for _ in range(fields):
            u = random_field(grid, rng)
            c = alg.Multivector(n, {idx: rng.normal() for idx in alg.all_indices(n)})
            for k, v in calculus_identities(u, c).items():
                worst[k] = max(worst.get(k, 0.0), v)
        for k, v in worst.items():
            res.add(f"n={n} {k}", v, tol_rel)
    lo, hi = product_rule_band
    for k, ratio in product_rule_ratios().items():
        res.add(f"product rule {k} ratio", ratio, hi, lo <= ratio <= hi)
    res.seconds = time.perf_counter() - t0
    return res


def product_rule_ratios(points=(33, 65), seed: int = 1) -> dict:
    """Residual ratio between grid ``h`` and ``h/2`` for each product rule, n = 3."""
    rng = np.random.default_rng(seed)
    coeffs = {idx: (rng.normal(), rng.normal(size=3)) for idx in alg.all_indices(3)}
    out = []
    for p in points:
        grid = GridSpec.cube(3, -3.0, 3.0, p)
        mesh = grid.mesh()

        def build(shift):
            comps = {}
            for idx, (a, centre) in coeffs.items():
                r2 = sum((x - shift * ci) ** 2 for x, ci in zip(mesh, centre))
                comps[idx] = a * np.exp(-0.5 * r2)
            return FormField(grid, comps)

        out.append(verify_product_rules(build(0.3), build(-0.3)))
    return {k: out[0][k] / out[1][k] for k in out[0]}


# -- Green identity ---------------------------------------------------------------


def green_pair(grid: GridSpec):
    """Unit-variance Gaussian forms ``u`` (grades 0, 2) and ``v`` (grade 1)."""
    m = grid.mesh()

    def gauss(c):
        return np.exp(-0.5 * ((m[0] - c) ** 2 + sum(x * x for x in m[1:])))

    u = FormField(grid, {(): gauss(0.0), (1, 2): 0.5 * gauss(0.0)})
    v = FormField(grid, {(1,): gauss(-0.5), (2,): gauss(0.0)})
    return u, v


def check_green(points: int = 32, tol_rel: float = 0.01, band=(3.5, 4.5),
                integrated_order: int = 4) -> SuiteResult:
    """Pointwise O(h^2) convergence and the integrated Stokes balance on a half box."""
    t0 = time.perf_counter()
    res = SuiteResult("green")
    pw = []
    for p in (points, 2 * points):
        grid = GridSpec.cube(3, -4.0, 4.0, p)
        u, v = green_pair(grid)
        pw.append(green_identity_residual(u, v).pointwise)
    ratio = pw[0] / pw[1]
    res.add("pointwise residual", pw[0], np.inf)
    res.add("pointwise ratio h to h/2", ratio, band[1], band[0] <= ratio <= band[1])
    grid = GridSpec.cube(3, -4.0, 4.0, points)
    u, v = green_pair(grid)
    region = Region(grid, ((points // 2, points - 1), (0, points - 1), (0, points - 1)))
    g = green_identity_residual(u, v, region, derivative_order=integrated_order)
    res.add("boundary flux", g.boundary, np.inf)
    res.add("volume integral", g.volume, np.inf)
    res.add("integrated relative gap", g.integrated_relative, tol_rel)
    res.seconds = time.perf_counter() - t0
    return res


# -- point-evaluation identity -------------------------------------------------------


def delta_identity_case(n: int, lo: float, hi: float, points: int, at: str = "origin",
                        stencil: str = "compact4") -> tuple:
    """Reconstruct ``exp(-r^2)`` from its Laplacian; ``(value, relative error, seconds)``.

    ``at="origin"`` probes x = 0 (a node or not); ``at="node"`` probes the
    grid node nearest the origin.
    """
    t0 = time.perf_counter()
    grid = GridSpec.cube(n, lo, hi, points)
    phi = FormField.scalar(grid, np.exp(-sum(x * x for x in grid.mesh())))
    if at == "origin":
        near = 0.0
    elif at == "node":
        x = grid.coordinates(1)
        near = float(x[np.argmin(np.abs(x))])
    else:
        raise ValueError(f"at must be 'origin' or 'node', got {at!r}")
    probe = np.full((1, n), near)
    exact = float(np.exp(-n * near * near))
    err = delta_identity_residual(phi, probes=probe, reference=[exact], stencil=stencil)
    return exact, err / exact, time.perf_counter() - t0


def check_delta(tol_rel: float = 0.05, include_4d: bool = True, tol_rel_4d: float = 0.10) -> SuiteResult:
    t0 = time.perf_counter()
    res = SuiteResult("delta identity")
    _, e32, s32 = delta_identity_case(3, -4.0, 4.0, 32)
    _, e48, s48 = delta_identity_case(3, -5.0, 5.0, 48)
    res.add("n=3 32^3 relative error", e32, tol_rel)
    res.add("n=3 48^3 relative error", e48, e32, e48 < e32, "must fall below the 32^3 error")
    res.add("n=3 32^3 seconds", s32, 60.0)
    res.add("n=3 48^3 seconds", s48, 60.0)
    if include_4d:
        _, e4, s4 = delta_identity_case(4, -3.5, 3.5, 12)
        res.add("n=4 12^4 relative error", e4, tol_rel_4d)
        res.add("n=4 12^4 seconds", s4, 300.0)
    res.seconds = time.perf_counter() - t0
    return res


__all__ = [
    "oracle_clifford", "oracle_product", "oracle_reversion_sign", "oracle_complement_sign",
    "CheckRow", "SuiteResult", "check_algebra", "check_calculus", "calculus_identities",
    "random_field", "product_rule_ratios", "check_green", "green_pair", "check_delta",
    "delta_identity_case",
]
