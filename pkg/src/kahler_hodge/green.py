"""Kähler scalar products, the Green–Kähler identity and the energy norm.

``(u, v) = (zeta(u) v)_0`` is the scalar part of the Clifford product of the
reversed ``u`` with ``v``. The first-order product is the (n-1)-form

    (u, v)_1 = sum_i s_i (dx^i . z),    s_i = (zeta(dx^i u) v)_0,

whose exterior derivative is ``[(u, dv) + (v, du)] z`` with ``d`` the Kähler
derivative ``dx^h d_h``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import index_to_mask, mask_to_index, reorder_sign, reversion_sign
from .fields import (
    FormField,
    GridError,
    Region,
    dx,
    exterior_derivative,
    field_product,
    kahler_derivative,
)


def _check_pair(u: FormField, v: FormField) -> None:
    if not isinstance(u, FormField) or not isinstance(v, FormField):
        raise TypeError("scalar products take FormField operands")
    if u.grid != v.grid:
        raise GridError("u and v live on different grids")


def scalar_product_zero(u: FormField, v: FormField) -> np.ndarray:
    """Pointwise ``(zeta(u) v)_0`` as a scalar lattice."""
    _check_pair(u, v)
    out = np.zeros(u.grid.shape)
    for k, a in u.components.items():
        if k not in v.components:
            continue
        m = index_to_mask(k)
        # scalar part of zeta(dx^A) dx^A
        sign = reversion_sign(len(k)) * reorder_sign(m, m)
        out = out + sign * a * v.components[k]
    return out


def _unit_contraction(n: int, i: int) -> tuple:
    """``dx^i . z`` as ``(index, sign)``."""
    full = (1 << n) - 1
    m = 1 << (i - 1)
    return mask_to_index(full ^ m), reorder_sign(m, full)


def first_order_coefficients(u: FormField, v: FormField) -> list:
    """``[s_1, ..., s_n]`` with ``s_i = (zeta(dx^i u) v)_0``."""
    _check_pair(u, v)
    return [scalar_product_zero(field_product(dx(u.grid, i), u), v) for i in range(1, u.n + 1)]


def scalar_product_one(u: FormField, v: FormField) -> FormField:
    """``(u, v)_1 = sum_i s_i (dx^i . z)``, a field of grade ``n - 1``."""
    coeffs = first_order_coefficients(u, v)
    comps = {}
    for i, s in enumerate(coeffs, start=1):
        idx, sign = _unit_contraction(u.n, i)
        comps[idx] = sign * s
    return FormField(u.grid, comps)


def green_volume_density(u: FormField, v: FormField, derivative_order: int = 2) -> np.ndarray:
    """``(u, dv) + (v, du)`` with the discrete Kähler derivative."""
    _check_pair(u, v)
    return (scalar_product_zero(u, kahler_derivative(v, derivative_order))
            + scalar_product_zero(v, kahler_derivative(u, derivative_order)))


@dataclass(frozen=True)
class GreenResidual:
    """Pointwise and integrated residuals of the Green–Kähler identity.

    ``pointwise`` is the max over nodes one cell inside the region of
    ``|d(u,v)_1 / z - (u,dv) - (v,du)|``. ``boundary`` is the discrete Stokes
    sum of ``(u,v)_1`` over the region faces, ``volume`` the quadrature of the
    right-hand side over the region.
    """

    pointwise: float
    boundary: float
    volume: float

    @property
    def integrated(self) -> float:
        return abs(self.boundary - self.volume)

    @property
    def integrated_relative(self) -> float:
        scale = max(abs(self.boundary), abs(self.volume))
        return 0.0 if scale == 0.0 else self.integrated / scale


def face_flux(coeffs: list, region: Region) -> float:
    """``sum_i`` of the outward trapezoid face sums of ``s_i`` over the region box."""
    grid = region.subgrid
    total = 0.0
    for i, s in enumerate(coeffs, start=1):
        ax = i - 1
        w = np.ones([p for b, p in enumerate(grid.shape) if b != ax])
        k = 0
        for b, p in enumerate(grid.shape):
            if b == ax:
                continue
            f = np.full(p, grid.spacing[b])
            f[0] = f[-1] = 0.5 * grid.spacing[b]
            w = w * f.reshape([-1 if a == k else 1 for a in range(grid.n - 1)])
            k += 1
        total += float(np.sum(np.take(s, -1, axis=ax) * w) - np.sum(np.take(s, 0, axis=ax) * w))
    return total


def green_identity_residual(u: FormField, v: FormField, region: Region | None = None,
                            derivative_order: int = 2) -> GreenResidual:
    """Residuals of ``d(u,v)_1 = [(u,dv) + (v,du)] z`` over ``region``."""
    _check_pair(u, v)
    region = region or Region.full(u.grid)
    if region.grid != u.grid:
        raise GridError("region lives on a different grid")
    u, v = region.restrict(u), region.restrict(v)
    grid = u.grid
    n = grid.n
    rhs = green_volume_density(u, v, derivative_order)
    one = scalar_product_one(u, v)
    lhs = exterior_derivative(one, derivative_order)[tuple(range(1, n + 1))]
    mask = grid.interior_mask(1)
    pointwise = float(np.max(np.abs(lhs - rhs)[mask], initial=0.0))
    coeffs = first_order_coefficients(u, v)
    boundary = face_flux(coeffs, Region.full(grid))
    volume = float(np.sum(rhs * grid.quadrature_weights()))
    return GreenResidual(pointwise, boundary, volume)


def energy_norm(alpha: FormField, region: Region | None = None) -> float:
    """``sum_A |a_A|^2`` integrated over the region with trapezoid weights."""
    region = region or Region.full(alpha.grid)
    local = region.restrict(alpha)
    w = local.grid.quadrature_weights()
    return float(sum(np.sum(a * a * w) for a in local.components.values()))


__all__ = [
    "scalar_product_zero", "scalar_product_one", "first_order_coefficients",
    "green_volume_density", "green_identity_residual", "GreenResidual",
    "face_flux", "energy_norm",
]
