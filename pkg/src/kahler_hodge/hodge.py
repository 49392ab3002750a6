"""Closed / co-closed / harmonic decomposition of sampled k-forms.

Full-space mode (the field decays inside the grid)::

    alpha = c [ d(dx^A I_A^delta) + delta(dx^A I_A^d) ],   c = -1/((n-2) S_{n-1})

with ``I^delta`` and ``I^d`` the Newtonian potentials of ``delta alpha`` and
``d alpha``. Region mode integrates over a sub-box only and keeps the
harmonic remainder ``F`` so that ``closed + coclosed + harmonic = alpha``.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _summation
from .algebra import (
    AlgebraError,
    BLADE_PRODUCTS,
    index_to_mask,
    mask_to_index,
)
from .fields import (
    FormField,
    GridError,
    GridSpec,
    Region,
    exterior_derivative,
    interior_derivative,
    partial_derivative,
)
from .potential import KernelSpec, complement_sign, helmholtz_integral

RESIDUAL_OFFSET = 2
# full-space mode needs the wider stencil for accuracy; region mode keeps the
# three-point stencil so the 2-cell residual offset clears the boundary layer
FULL_SPACE_ORDER = 4
REGION_ORDER = 2


class DecayWarning(UserWarning):
    """The field is not negligible on the grid boundary in full-space mode."""


@dataclass(frozen=True)
class DecompositionResult:
    """Components of a decomposition plus diagnostics.

    ``closed``, ``coclosed`` and ``harmonic`` live on the grid that was
    decomposed (the region's own lattice in region mode).
    """

    closed: FormField
    coclosed: FormField
    harmonic: FormField
    diagnostics: dict = field(default_factory=dict)

    @property
    def grid(self) -> GridSpec:
        return self.closed.grid

    def reconstruction(self) -> FormField:
        return self.closed + self.coclosed + self.harmonic


def _relative(num: float, den: float) -> float:
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return num / den


def _assemble(potentials: dict, grid: GridSpec) -> FormField:
    return FormField(grid, potentials)


def _boundary_decay(alpha: FormField) -> float:
    """Largest |alpha| or |d_h alpha| on the grid boundary relative to max |alpha|."""
    scale = alpha.max_abs()
    if scale == 0.0:
        return 0.0
    edge = ~alpha.grid.interior_mask(1)
    worst = alpha.max_abs(edge)
    for h in range(1, alpha.n + 1):
        worst = max(worst, partial_derivative(alpha, h).max_abs(edge))
    return worst / scale


def _grade(alpha: FormField) -> int | None:
    try:
        return alpha.grade_of()
    except AlgebraError as exc:
        raise AlgebraError(f"decomposition needs a homogeneous form: {exc}") from None


def _potential_pair(alpha: FormField, kernel_spec: KernelSpec, backend: str, order: int):
    """``(c, nu, mu, dx^A I^delta, dx^A I^d)`` over the whole grid of ``alpha``."""
    region = Region.full(alpha.grid)
    nu = interior_derivative(alpha, order)
    mu = exterior_derivative(alpha, order)
    p_delta = _assemble(helmholtz_integral(nu, region, "delta", kernel_spec=kernel_spec, backend=backend), alpha.grid)
    p_d = _assemble(helmholtz_integral(mu, region, "d", kernel_spec=kernel_spec, backend=backend), alpha.grid)
    return nu, mu, p_delta, p_d


def decompose_full_space(alpha: FormField, grid: GridSpec | None = None, kernel_spec: KernelSpec | None = None,
                         decay_tol: float = 1e-3, derivative_order: int = FULL_SPACE_ORDER,
                         backend: str = "auto") -> DecompositionResult:
    """Helmholtz decomposition of a form that decays inside the grid.

    The harmonic component is the zero field. If ``alpha`` or its first
    derivatives exceed ``decay_tol`` (relative) on the grid boundary a
    :class:`DecayWarning` is issued and ``diagnostics["decay_ok"]`` is False.
    """
    if grid is not None and grid != alpha.grid:
        raise GridError("alpha does not live on the given grid")
    grid = alpha.grid
    kernel_spec = kernel_spec or KernelSpec(grid.n)
    _grade(alpha)
    t0 = time.perf_counter()
    decay = _boundary_decay(alpha)
    decay_ok = decay <= decay_tol
    if not decay_ok:
        warnings.warn(f"field not negligible on the grid boundary (relative {decay:.3g}); "
                      "the surface term at infinity is not zero", DecayWarning, stacklevel=2)
    nu, mu, p_delta, p_d = _potential_pair(alpha, kernel_spec, backend, derivative_order)
    c = kernel_spec.normalization
    closed = c * exterior_derivative(p_delta, derivative_order)
    coclosed = c * interior_derivative(p_d, derivative_order)
    harmonic = FormField.zeros(grid)
    mask = grid.interior_mask(RESIDUAL_OFFSET)
    scale = alpha.norm(mask)
    diag = {
        "mode": "full-space",
        "n": grid.n,
        "grade": alpha.grade_of(),
        "points": list(grid.shape),
        "boundary_decay": decay,
        "decay_ok": decay_ok,
        "reconstruction_error": _relative((closed + coclosed - alpha).norm(mask), scale),
        "closed_relative_norm": _relative(closed.norm(mask), scale),
        "coclosed_relative_norm": _relative(coclosed.norm(mask), scale),
        "closed_d_residual": exterior_derivative(closed, derivative_order).max_abs(grid.interior_mask(1)),
        "coclosed_delta_residual": interior_derivative(coclosed, derivative_order).max_abs(grid.interior_mask(1)),
        "seconds": time.perf_counter() - t0,
    }
    return DecompositionResult(closed, coclosed, harmonic, diag)


def decompose_region(alpha: FormField, region: Region, kernel_spec: KernelSpec | None = None,
                     boundary_check: bool = False, derivative_order: int = REGION_ORDER,
                     backend: str = "auto") -> DecompositionResult:
    """Decomposition over a sub-box with the harmonic remainder.

    The integrals run over the region only. The harmonic part is the remainder
    ``alpha - closed - coclosed`` (the normalised ``F``), so the three parts
    add back to ``alpha`` up to rounding. All outputs live on
    ``region.subgrid``.
    """
    if alpha.grid != region.grid:
        raise GridError("alpha does not live on the region's grid")
    _grade(alpha)
    if not region.interior_mask(RESIDUAL_OFFSET).any():
        raise GridError("region too thin: no nodes two cells inside")
    kernel_spec = kernel_spec or KernelSpec(alpha.n)
    t0 = time.perf_counter()
    local = region.restrict(alpha)
    nu, mu, p_delta, p_d = _potential_pair(local, kernel_spec, backend, derivative_order)
    c = kernel_spec.normalization
    closed = c * exterior_derivative(p_delta, derivative_order)
    coclosed = c * interior_derivative(p_d, derivative_order)
    harmonic = local - closed - coclosed
    sub = local.grid
    mask = sub.interior_mask(RESIDUAL_OFFSET)
    scale = local.norm(mask)
    dd_f, ddel_f = hyperharmonic_residual(harmonic, Region.full(sub), derivative_order)
    diag = {
        "mode": "region",
        "n": sub.n,
        "grade": local.grade_of(),
        "points": list(sub.shape),
        "bounds": [list(b) for b in region.bounds],
        "reconstruction_error": _relative((closed + coclosed + harmonic - local).norm(mask), scale),
        "closed_relative_norm": _relative(closed.norm(mask), scale),
        "coclosed_relative_norm": _relative(coclosed.norm(mask), scale),
        "harmonic_relative_norm": _relative(harmonic.norm(mask), scale),
        "hyperharmonic_delta_d": dd_f,
        "hyperharmonic_d_delta": ddel_f,
        "hyperharmonic_delta_d_relative": _relative(dd_f, scale),
        "hyperharmonic_d_delta_relative": _relative(ddel_f, scale),
    }
    if boundary_check:
        diag.update(boundary_consistency(local, harmonic, kernel_spec, derivative_order, backend=backend))
    diag["seconds"] = time.perf_counter() - t0
    return DecompositionResult(closed, coclosed, harmonic, diag)


def hyperharmonic_residual(F: FormField, region: Region, derivative_order: int = REGION_ORDER) -> tuple:
    """``(||delta d F||_2, ||d delta F||_2)`` on nodes two cells inside the region.

    ``F`` may live on the region's parent grid or on ``region.subgrid``.
    """
    if F.grid == region.grid:
        F = region.restrict(F)
    elif F.grid != region.subgrid:
        raise GridError("F lives neither on the region grid nor on its sub-box")
    mask = F.grid.interior_mask(RESIDUAL_OFFSET)
    if not mask.any():
        raise GridError("region too thin: no nodes two cells inside")
    o = derivative_order
    ddf = interior_derivative(exterior_derivative(F, o), o)
    dfd = exterior_derivative(interior_derivative(F, o), o)
    return ddf.norm(mask), dfd.norm(mask)


# -- boundary surface term ----------------------------------------------------

def bracket_factor(A, i: int, l: int, n: int, which: str):
    """Algebra factor of the surface term as ``(index, sign)`` or None.

    ``which="delta"``: ``(dx^A . dx^i) ^ dx^l`` (right interior product first);
    ``which="d"``:     ``(dx^A ^ dx^i) . dx^l``.
    """
    ma, mi, ml = index_to_mask(tuple(A)), 1 << (i - 1), 1 << (l - 1)
    first, second = ("right", "exterior") if which == "delta" else ("exterior", "right")
    r1 = BLADE_PRODUCTS[first](ma, mi)
    if r1 is None:
        return None
    r2 = BLADE_PRODUCTS[second](r1[0], ml)
    if r2 is None:
        return None
    return mask_to_index(r2[0]), r1[1] * r2[1]


def _face_sources(grid: GridSpec, axis: int):
    """Face nodes normal to 1-based ``axis``: flat indices, coordinates, signed weights."""
    shape = grid.shape
    ax = axis - 1
    idx = np.arange(grid.size).reshape(shape)
    coords = grid.nodes()
    w_full = np.ones(shape)
    for b, p in enumerate(shape):
        if b == ax:
            continue
        f = np.full(p, grid.spacing[b])
        f[0] = f[-1] = 0.5 * grid.spacing[b]
        w_full = w_full * f.reshape([-1 if a == b else 1 for a in range(grid.n)])
    flat, wts = [], []
    for pos, normal in ((0, -1.0), (shape[ax] - 1, 1.0)):
        sl = [slice(None)] * grid.n
        sl[ax] = pos
        flat.append(idx[tuple(sl)].ravel())
        wts.append(normal * w_full[tuple(sl)].ravel())
    flat = np.concatenate(flat)
    return flat, coords[flat], np.concatenate(wts)


def boundary_term(alpha: FormField, region: Region, which: str = "delta",
                  kernel_spec: KernelSpec | None = None, targets_mask=None,
                  derivative_order: int = REGION_ORDER, backend: str = "auto") -> FormField:
    """Surface-integral prediction for the derivatives of the harmonic part.

    ``which="delta"`` predicts ``delta F`` from ``delta alpha`` on the region
    boundary; ``which="d"`` predicts ``d F`` from ``d alpha``. ``F`` here is the
    normalised harmonic component returned by :func:`decompose_region`. The
    result lives on ``region.subgrid``; nodes outside ``targets_mask`` are 0.
    """
    if which not in ("delta", "d"):
        raise ValueError(f"which must be 'delta' or 'd', got {which!r}")
    if alpha.grid != region.grid:
        raise GridError("alpha does not live on the region's grid")
    local = region.restrict(alpha)
    _grade(local)
    kernel_spec = kernel_spec or KernelSpec(local.n)
    op = interior_derivative if which == "delta" else exterior_derivative
    source = op(local, derivative_order)
    return _surface_prediction(source, which, kernel_spec, targets_mask, backend)


def _surface_prediction(source: FormField, which: str, kernel_spec: KernelSpec, targets_mask, backend) -> FormField:
    grid = source.grid
    n = grid.n
    if targets_mask is None:
        targets_mask = np.ones(grid.shape, dtype=bool)
    targets = grid.nodes()[targets_mask.ravel()]
    keys = [k for k in source.components if np.any(source.components[k] != 0.0)]
    out: dict = {}
    if keys and len(targets):
        vals = np.stack([complement_sign(k, n) * source.components[k].ravel() for k in keys], axis=1)
        for i in range(1, n + 1):
            flat, pts, wts = _face_sources(grid, i)
            # gsum[t, l-1, q]: surface integral of dK/dx'_l * source_q * n_i
            gsum = _summation.gradient_sum(targets, pts, vals[flat], wts, n - 2, backend=backend)
            for q, A in enumerate(keys):
                for l in range(1, n + 1):
                    fac = bracket_factor(A, i, l, n, which)
                    if fac is None:
                        continue
                    idx, sign = fac
                    term = sign * gsum[:, l - 1, q]
                    out[idx] = out[idx] + term if idx in out else term
    # the raw remainder F_raw = alpha/c - ...; F = c F_raw
    c = kernel_spec.normalization
    comps = {}
    for idx, vals_t in out.items():
        arr = np.zeros(grid.shape)
        arr[targets_mask] = c * vals_t
        comps[idx] = arr
    return FormField(grid, comps)


def boundary_consistency(local: FormField, harmonic: FormField, kernel_spec: KernelSpec,
                         derivative_order: int = REGION_ORDER, backend: str = "auto") -> dict:
    """Relative L2 gaps between the surface predictions and the discrete
    ``d F`` / ``delta F`` of the remainder, on nodes two cells inside."""
    grid = local.grid
    mask = grid.interior_mask(RESIDUAL_OFFSET)
    out = {}
    o = derivative_order
    for which, op in (("delta", interior_derivative), ("d", exterior_derivative)):
        pred = _surface_prediction(op(local, o), which, kernel_spec, mask, backend)
        actual = op(harmonic, o)
        gap = (pred - actual).norm(mask)
        ref = actual.norm(mask)
        out[f"boundary_{which}_gap"] = gap
        out[f"boundary_{which}_norm"] = ref
        out[f"boundary_{which}_relative"] = _relative(gap, ref)
    return out


def volume_cancellation_integrand(alpha: FormField, which: str = "delta") -> dict:
    """Integrand of the integration-by-parts volume term, per kernel index ``l``.

    Returns ``{l: FormField}`` with ``sum_{A,i} bracket(A, i, l) * d_i(source_A s_A)``,
    where the source is ``delta alpha`` or ``d alpha``. It is ``eta(delta delta alpha)``-
    or ``d d alpha``-shaped and vanishes wherever the discrete partials commute.
    """
    if which not in ("delta", "d"):
        raise ValueError(f"which must be 'delta' or 'd', got {which!r}")
    _grade(alpha)
    n = alpha.n
    source = interior_derivative(alpha) if which == "delta" else exterior_derivative(alpha)
    signed = FormField(alpha.grid, {k: complement_sign(k, n) * v for k, v in source.components.items()})
    parts = {i: partial_derivative(signed, i) for i in range(1, n + 1)}
    result = {}
    for l in range(1, n + 1):
        acc: dict = {}
        for i in range(1, n + 1):
            for A, arr in parts[i].components.items():
                fac = bracket_factor(A, i, l, n, which)
                if fac is None:
                    continue
                idx, sign = fac
                term = sign * arr
                acc[idx] = acc[idx] + term if idx in acc else term
        result[l] = FormField(alpha.grid, acc)
    return result


def volume_cancellation_term(alpha: FormField, which: str = "delta", kernel_spec: KernelSpec | None = None,
                             offset: int = 1, backend: str = "auto") -> FormField:
    """The assembled volume term ``-sum_l sum_x' dK/dx'_l * integrand_l`` over nodes
    ``offset`` cells inside the grid, evaluated at the same nodes."""
    grid = alpha.grid
    kernel_spec = kernel_spec or KernelSpec(grid.n)
    mask = grid.interior_mask(offset)
    pts = grid.nodes()[mask.ravel()]
    w = np.full(len(pts), grid.cell_volume)
    integrand = volume_cancellation_integrand(alpha, which)
    out: dict = {}
    for l, fld in integrand.items():
        keys = list(fld.components)
        if not keys:
            continue
        vals = np.stack([fld.components[k][mask] for k in keys], axis=1)
        g = _summation.gradient_sum(pts, pts, vals, w, grid.n - 2, backend=backend)
        for q, k in enumerate(keys):
            term = -g[:, l - 1, q]
            out[k] = out[k] + term if k in out else term
    comps = {}
    for k, v in out.items():
        arr = np.zeros(grid.shape)
        arr[mask] = v
        comps[k] = arr
    return FormField(grid, comps)


def split_by_grade(alpha: FormField) -> dict:
    """Homogeneous parts of an inhomogeneous field, keyed by grade."""
    return {k: alpha.grade_part(k) for k in sorted(alpha.grades())}


__all__ = [
    "DecompositionResult", "DecayWarning", "decompose_full_space", "decompose_region",
    "hyperharmonic_residual", "boundary_term", "boundary_consistency", "bracket_factor",
    "volume_cancellation_integrand", "volume_cancellation_term", "split_by_grade",
]
