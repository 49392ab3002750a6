"""Newtonian kernel ``1/r^(n-2)`` and the potential integrals of the decomposition.

The integrals are midpoint sums over node-centred cells clipped to the
integration region. The singular self-cell term uses the exact mean of the
kernel over the ball of equal volume, ``n / (2 a^(n-2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _summation
from .algebra import AlgebraError, complement_monomial, exterior_product, Multivector, unit_n_form
from .fields import FormField, GridError, Region, compact_laplacian, laplacian

SELF_CELL_RULES = ("ball", "none")


class KernelError(ValueError):
    """Kernel requested outside its range of validity."""


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit (n-1)-sphere, ``2 pi^(n/2) / Gamma(n/2)``."""
    if n < 1:
        raise KernelError(f"dimension must be >= 1, got {n}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _check_kernel_dimension(n: int) -> None:
    if n < 3:
        raise KernelError(f"dimension below kernel validity: n={n} (need n >= 3)")


def kernel(r12: float, n: int) -> float:
    """``1 / r12^(n-2)`` for ``r12 > 0``; ``r12 = 0`` belongs to the self-cell rule."""
    _check_kernel_dimension(n)
    if r12 < 0:
        raise KernelError("distance must be non-negative")
    if r12 == 0:
        raise KernelError("kernel is singular at r12 = 0; use a self-cell rule")
    return r12 ** -(n - 2)


def ball_self_value(cell_volume: float, n: int) -> float:
    """Mean of ``1/r^(n-2)`` over the n-ball whose volume is ``cell_volume``."""
    _check_kernel_dimension(n)
    radius = (n * cell_volume / unit_sphere_area(n)) ** (1.0 / n)
    return n / (2.0 * radius ** (n - 2))


@dataclass(frozen=True)
class KernelSpec:
    """Kernel configuration for dimension ``n``.

    ``self_cell`` selects the value used when source and target coincide:
    ``"ball"`` (equal-volume ball average) or ``"none"`` (drop the term).
    """

    n: int
    self_cell: str = "ball"

    def __post_init__(self):
        _check_kernel_dimension(self.n)
        if self.self_cell not in SELF_CELL_RULES:
            raise KernelError(f"unknown self-cell rule {self.self_cell!r}")

    @property
    def normalization(self) -> float:
        """``-1 / ((n-2) S_{n-1})``."""
        return -1.0 / ((self.n - 2) * unit_sphere_area(self.n))

    def self_value(self, cell_volume: float) -> float:
        if self.self_cell == "none":
            return 0.0
        return ball_self_value(cell_volume, self.n)

    def __call__(self, r12):
        r12 = np.asarray(r12, dtype=float)
        return r12 ** -(self.n - 2)


def complement_sign(index, n: int) -> float:
    """z-coefficient of ``dx^A ^ dx^Abar`` with the signed complement monomial."""
    z = unit_n_form(n)
    prod = exterior_product(Multivector(n, {tuple(index): 1.0}), complement_monomial(index, n))
    return prod[next(iter(z.coeffs))]


def _targets(region: Region, probes):
    if probes is None:
        return region.subgrid.nodes(), region.shape
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    if probes.shape[1] != region.grid.n:
        raise GridError(f"probe points must have {region.grid.n} coordinates")
    return probes, (probes.shape[0],)


def newtonian_sums(values: dict, region: Region, probes=None, kernel_spec: KernelSpec | None = None,
                   backend: str = "auto") -> dict:
    """Kernel sums of several scalar lattices (all on ``region.grid``) over ``region``.

    Returns ``{key: array}`` shaped like the region lattice, or ``(m,)`` for probes.
    """
    grid = region.grid
    kernel_spec = kernel_spec or KernelSpec(grid.n)
    if kernel_spec.n != grid.n:
        raise KernelError("kernel dimension does not match the grid")
    targets, out_shape = _targets(region, probes)
    if not values:
        return {}
    keys = list(values)
    sub = region.subgrid
    src_vals = np.stack([np.asarray(values[k])[region.slices].ravel() for k in keys], axis=1)
    weights = sub.quadrature_weights().ravel()
    keep = np.any(src_vals != 0.0, axis=1)
    if not keep.any():
        return {k: np.zeros(out_shape) for k in keys}
    sums = _summation.direct_sum(
        targets, sub.nodes()[keep], src_vals[keep], weights[keep],
        power=grid.n - 2, self_value=kernel_spec.self_value(grid.cell_volume), backend=backend,
    )
    return {k: sums[:, q].reshape(out_shape) for q, k in enumerate(keys)}


def helmholtz_integral(source: FormField, region: Region | None = None, which: str = "delta",
                       probes=None, kernel_spec: KernelSpec | None = None, backend: str = "auto") -> dict:
    """Potential integrals ``I_A`` of a homogeneous source (``delta alpha`` or ``d alpha``).

    For every component ``A`` of the source, ``I_A(x)`` is the kernel sum of the
    z-coefficient of ``source_A dx^A ^ dx^Abar``, taken over ``region`` and
    evaluated at the region nodes (or at ``probes``).

    Parameters
    ----------
    source : FormField
        Homogeneous integrand, on the region's grid.
    region : Region, optional
        Integration region; the whole grid by default.
    which : {"delta", "d"}
        Label of the source, kept for error messages.
    probes : array (m, n), optional
        Evaluation points instead of the region nodes.

    Returns
    -------
    dict
        ``{A: lattice}`` keyed by basis index.
    """
    if which not in ("delta", "d"):
        raise ValueError(f"which must be 'delta' or 'd', got {which!r}")
    region = region or Region.full(source.grid)
    if source.grid != region.grid:
        raise GridError("source and region live on different grids")
    if not source.is_homogeneous():
        raise AlgebraError(f"{which}-part source must be homogeneous, grades {sorted(source.grades())}")
    n = source.n
    values = {k: complement_sign(k, n) * v for k, v in source.components.items()}
    return newtonian_sums(values, region, probes, kernel_spec, backend)


def reconstruct_from_laplacian(phi: FormField, region: Region | None = None, probes=None,
                               kernel_spec: KernelSpec | None = None, stencil: str = "compact4",
                               backend: str = "auto") -> np.ndarray:
    """``-(1/((n-2)S)) sum K(x - x') lap(phi)(x') dV'`` at the region nodes or probes.

    ``stencil`` is ``"compact4"`` (fourth-order compact Laplacian, the
    default), ``"compact"`` (second order) or ``"composed"`` (``delta d +
    d delta`` from the form operators). Compact stencils are zeroed where
    they do not fit inside the region.
    """
    if phi.grades() - {0}:
        raise AlgebraError("point-evaluation identity takes a scalar field")
    region = region or Region.full(phi.grid)
    kernel_spec = kernel_spec or KernelSpec(phi.n)
    local = region.restrict(phi)
    if stencil in ("compact", "compact4"):
        order = 4 if stencil == "compact4" else 2
        lap = np.nan_to_num(compact_laplacian(local[()], local.grid.spacing, order), nan=0.0)
    elif stencil == "composed":
        lap = laplacian(local)[()]
    else:
        raise ValueError(f"unknown stencil {stencil!r}")
    full = np.zeros(phi.grid.shape)
    full[region.slices] = lap
    sums = newtonian_sums({(): full}, region, probes, kernel_spec, backend)[()]
    return kernel_spec.normalization * sums


def delta_identity_residual(phi: FormField, region: Region | None = None, probes=None,
                            reference=None, **kwargs) -> float:
    """Max deviation between ``phi`` and its reconstruction from its Laplacian.

    Without ``probes`` the comparison runs over the region nodes at least two
    cells inside. With ``probes``, ``reference`` supplies the exact values
    there (required unless every probe is a grid node).
    """
    region = region or Region.full(phi.grid)
    if probes is None:
        mask = region.interior_mask(2)
        if not mask.any():
            raise GridError("region too thin: no interior nodes")
        targets = region.subgrid.nodes()[mask.ravel()]
        reference = region.restrict(phi)[()][mask]
    else:
        targets = np.atleast_2d(np.asarray(probes, dtype=float))
        if reference is None:
            reference = _node_values(phi, targets)
    approx = reconstruct_from_laplacian(phi, region, targets, **kwargs)
    return float(np.max(np.abs(np.asarray(reference, dtype=float) - approx), initial=0.0))


def _node_values(phi: FormField, points: np.ndarray) -> np.ndarray:
    grid = phi.grid
    idx = []
    for d in range(grid.n):
        lo, _, _ = grid.axes[d]
        h = grid.spacing[d]
        k = np.rint((points[:, d] - lo) / h).astype(int)
        if np.any(np.abs(lo + k * h - points[:, d]) > 1e-9 * h) or np.any((k < 0) | (k >= grid.shape[d])):
            raise GridError("probe is not a grid node; pass reference values")
        idx.append(k)
    return phi[()][tuple(idx)]
