"""Differential forms sampled on uniform Cartesian grids.

A :class:`FormField` stores one dense scalar lattice per basis component.
Partial derivatives use second-order central differences at interior nodes
and second-order one-sided differences on the grid boundary
(``numpy.gradient`` with ``edge_order=2``). Central stencils along different
axes commute, so ``dd = 0`` and ``delta delta = 0`` hold to rounding at
interior nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from .algebra import (
    BLADE_PRODUCTS,
    AlgebraError,
    Multivector,
    basis_index,
    check_dimension,
    eta_sign,
    index_to_mask,
    mask_to_index,
)

INTERIOR = 2
BOUNDARY = 1
EXTERIOR = 0


class GridError(ValueError):
    """Invalid grid geometry, region bounds or mismatched grids."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over a box of E_n.

    Parameters
    ----------
    axes : sequence of (min, max, points)
        One triple per axis; ``points >= 3``.
    """

    axes: tuple

    def __post_init__(self):
        axes = tuple((float(lo), float(hi), int(p)) for lo, hi, p in self.axes)
        check_dimension(len(axes))
        for i, (lo, hi, p) in enumerate(axes, start=1):
            if not lo < hi:
                raise GridError(f"axis {i}: need min < max, got {lo} >= {hi}")
            if p < 3:
                raise GridError(f"axis {i}: need at least 3 points, got {p}")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def cube(cls, n: int, lo: float, hi: float, points: int) -> "GridSpec":
        return cls(tuple((lo, hi, points) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(p for _, _, p in self.axes)

    @property
    def spacing(self) -> tuple:
        return tuple((hi - lo) / (p - 1) for lo, hi, p in self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def coordinates(self, axis: int) -> np.ndarray:
        """1-D node coordinates along 1-based ``axis``."""
        lo, hi, p = self.axes[axis - 1]
        return np.linspace(lo, hi, p)

    def mesh(self) -> list:
        return np.meshgrid(*(self.coordinates(i) for i in range(1, self.n + 1)), indexing="ij")

    def nodes(self) -> np.ndarray:
        """Node coordinates as an array of shape (size, n), C order."""
        return np.stack([m.ravel() for m in self.mesh()], axis=1)

    def interior_mask(self, offset: int = 1) -> np.ndarray:
        """Nodes at least ``offset`` cells away from every grid face."""
        mask = np.zeros(self.shape, dtype=bool)
        if any(2 * offset >= p for p in self.shape):
            return mask
        mask[tuple(slice(offset, p - offset) for p in self.shape)] = True
        return mask

    def quadrature_weights(self) -> np.ndarray:
        """Volume of each node-centred cell clipped to the grid box."""
        w = np.ones(self.shape)
        for ax, p in enumerate(self.shape):
            f = np.ones(p)
            f[0] = f[-1] = 0.5
            w = w * f.reshape([-1 if a == ax else 1 for a in range(self.n)])
        return w * self.cell_volume


@dataclass(frozen=True)
class Region:
    """Axis-aligned sub-box of a grid given by inclusive index ranges."""

    grid: GridSpec
    bounds: tuple

    def __post_init__(self):
        bounds = tuple((int(a), int(b)) for a, b in self.bounds)
        if len(bounds) != self.grid.n:
            raise GridError(f"region needs {self.grid.n} index ranges, got {len(bounds)}")
        for i, ((a, b), p) in enumerate(zip(bounds, self.grid.shape), start=1):
            if not 0 <= a < b < p:
                raise GridError(f"axis {i}: bad index range {a}:{b} for {p} points")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def full(cls, grid: GridSpec) -> "Region":
        return cls(grid, tuple((0, p - 1) for p in grid.shape))

    @property
    def slices(self) -> tuple:
        return tuple(slice(a, b + 1) for a, b in self.bounds)

    @property
    def shape(self) -> tuple:
        return tuple(b - a + 1 for a, b in self.bounds)

    @cached_property
    def subgrid(self) -> GridSpec:
        """The sub-box as a grid of its own (needs >= 3 points per axis)."""
        axes = []
        for i, (a, b) in enumerate(self.bounds, start=1):
            x = self.grid.coordinates(i)
            axes.append((x[a], x[b], b - a + 1))
        return GridSpec(tuple(axes))

    def classify(self) -> np.ndarray:
        """Per-node labels on the parent grid: INTERIOR, BOUNDARY or EXTERIOR."""
        labels = np.full(self.grid.shape, EXTERIOR, dtype=np.int8)
        labels[self.slices] = BOUNDARY
        inner = tuple(slice(a + 1, b) for a, b in self.bounds)
        labels[inner] = INTERIOR
        return labels

    def interior_mask(self, offset: int = 1) -> np.ndarray:
        """Mask on the region lattice of nodes ``offset`` cells inside the sub-box."""
        return self.subgrid.interior_mask(offset)

    def restrict(self, field: "FormField") -> "FormField":
        if field.grid != self.grid:
            raise GridError("field does not live on the region's grid")
        return FormField(self.subgrid, {k: v[self.slices] for k, v in field.components.items()})


class FormField:
    """A differential form sampled on a :class:`GridSpec`.

    ``components`` maps each basis index to a lattice of shape ``grid.shape``;
    missing components are zero. Arrays are copied and frozen.
    """

    __slots__ = ("grid", "components")

    def __init__(self, grid: GridSpec, components: Mapping[Iterable[int], np.ndarray] | None = None):
        comps = {}
        for key, arr in (components or {}).items():
            key = basis_index(key, grid.n)
            arr = np.array(np.broadcast_to(np.asarray(arr, dtype=float), grid.shape))
            arr.setflags(write=False)
            if key in comps:
                raise AlgebraError(f"duplicate component {key}")
            comps[key] = arr
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "components", dict(sorted(comps.items(), key=lambda kv: (len(kv[0]), kv[0]))))

    def __setattr__(self, name, value):
        raise AttributeError("FormField is immutable")

    @property
    def n(self) -> int:
        return self.grid.n

    @classmethod
    def zeros(cls, grid: GridSpec) -> "FormField":
        return cls(grid, {})

    @classmethod
    def constant(cls, grid: GridSpec, mv: Multivector) -> "FormField":
        if mv.n != grid.n:
            raise AlgebraError(f"dimension mismatch: {mv.n} vs {grid.n}")
        return cls(grid, {k: np.full(grid.shape, v) for k, v in mv.coeffs.items()})

    @classmethod
    def from_function(cls, grid: GridSpec, funcs: Mapping[Iterable[int], Callable]) -> "FormField":
        """Sample ``{index: f(*coords)}`` at every node."""
        mesh = grid.mesh()
        return cls(grid, {k: f(*mesh) for k, f in funcs.items()})

    @classmethod
    def scalar(cls, grid: GridSpec, values) -> "FormField":
        return cls(grid, {(): values})

    def __getitem__(self, index) -> np.ndarray:
        index = tuple(index)
        if index in self.components:
            return self.components[index]
        basis_index(index, self.n)
        return np.zeros(self.grid.shape)

    def grades(self) -> set:
        return {len(k) for k, v in self.components.items() if np.any(v != 0.0)}

    def is_homogeneous(self) -> bool:
        return len(self.grades()) <= 1

    def grade_of(self) -> int | None:
        """Grade of a homogeneous field, None for the zero field."""
        g = self.grades()
        if len(g) > 1:
            raise AlgebraError(f"field is not homogeneous (grades {sorted(g)})")
        return next(iter(g)) if g else None

    def grade_part(self, k: int) -> "FormField":
        return FormField(self.grid, {a: v for a, v in self.components.items() if len(a) == k})

    def at(self, node: tuple) -> Multivector:
        """The multivector at one node (integer index tuple)."""
        return Multivector(self.n, {k: float(v[node]) for k, v in self.components.items()})

    def _check(self, other: "FormField") -> None:
        if not isinstance(other, FormField):
            raise TypeError(f"expected FormField, got {type(other).__name__}")
        if other.grid != self.grid:
            raise GridError("fields live on different grids")

    def __add__(self, other: "FormField") -> "FormField":
        self._check(other)
        out = dict(self.components)
        for k, v in other.components.items():
            out[k] = out[k] + v if k in out else v
        return FormField(self.grid, out)

    def __neg__(self) -> "FormField":
        return FormField(self.grid, {k: -v for k, v in self.components.items()})

    def __sub__(self, other: "FormField") -> "FormField":
        return self + (-other)

    def __mul__(self, scale: float) -> "FormField":
        if not np.isscalar(scale):
            return NotImplemented
        return FormField(self.grid, {k: scale * v for k, v in self.components.items()})

    __rmul__ = __mul__

    def map(self, func: Callable[[np.ndarray], np.ndarray]) -> "FormField":
        return FormField(self.grid, {k: func(v) for k, v in self.components.items()})

    def max_abs(self, mask: np.ndarray | None = None) -> float:
        vals = [np.max(np.abs(v[mask] if mask is not None else v), initial=0.0) for v in self.components.values()]
        return float(max(vals, default=0.0))

    def norm(self, mask: np.ndarray | None = None) -> float:
        """Discrete L2 norm ``sqrt(sum |a_A|^2 dV)`` over ``mask`` (default all nodes)."""
        total = 0.0
        for v in self.components.values():
            sel = v[mask] if mask is not None else v
            total += float(np.sum(sel * sel))
        return float(np.sqrt(total * self.grid.cell_volume))

    def __repr__(self):
        labels = ",".join("".join(map(str, k)) or "0" for k in self.components)
        return f"FormField(n={self.n}, shape={self.grid.shape}, components=[{labels}])"


# -- pointwise products -------------------------------------------------------

def field_product(u: FormField, v: FormField, kind: str = "clifford") -> FormField:
    """Pointwise product of two fields; ``kind`` is one of
    ``clifford``, ``exterior``, ``left``, ``right`` (contractions) or ``scalar``."""
    u._check(v)
    blade_op = BLADE_PRODUCTS[kind]
    out: dict[int, np.ndarray] = {}
    for ka, va in u.components.items():
        ma = index_to_mask(ka)
        for kb, vb in v.components.items():
            res = blade_op(ma, index_to_mask(kb))
            if res is None:
                continue
            mask, sign = res
            term = va * vb if sign > 0 else -(va * vb)
            out[mask] = out[mask] + term if mask in out else term
    return FormField(u.grid, {mask_to_index(m): a for m, a in out.items()})


def field_eta(u: FormField) -> FormField:
    return FormField(u.grid, {k: eta_sign(len(k)) * v for k, v in u.components.items()})


def dx(grid: GridSpec, axis: int) -> FormField:
    """The constant 1-form field dx^axis."""
    return FormField.constant(grid, Multivector(grid.n, {(axis,): 1.0}))


def left_interior(w: FormField, u: FormField) -> FormField:
    """``e^h u``: left interior product by a 1-form field."""
    if w.grades() - {1}:
        raise AlgebraError("left interior product needs a grade-1 first factor")
    return field_product(w, u, "left")


# -- derivatives -------------------------------------------------------------

DERIVATIVE_ORDERS = (2, 4, 6)


def _check_order(order: int) -> int:
    if order not in DERIVATIVE_ORDERS:
        raise ValueError(f"derivative order must be one of {DERIVATIVE_ORDERS}, got {order!r}")
    return order


@lru_cache(maxsize=None)
def central_weights(order: int) -> np.ndarray:
    """First-derivative central-difference weights on offsets ``-m..m``, ``m = order/2``."""
    m = order // 2
    k = np.arange(-m, m + 1, dtype=float)
    rhs = np.zeros(2 * m + 1)
    rhs[1] = 1.0
    w = np.linalg.solve(np.vander(k, increasing=True).T, rhs)
    w[m] = 0.0
    return w


def _central(v: np.ndarray, h: float, ax: int, order: int) -> np.ndarray:
    # wide central stencil where it fits, numpy.gradient on the outer layers
    out = np.gradient(v, h, axis=ax, edge_order=2)
    m = order // 2
    p = v.shape[ax]
    if p <= 2 * m:
        return out
    lead = (slice(None),) * ax
    acc = np.zeros_like(out[lead + (slice(m, p - m),)])
    for j, c in enumerate(central_weights(order)):
        if c != 0.0:
            acc += c * v[lead + (slice(j, p - 2 * m + j),)]
    out[lead + (slice(m, p - m),)] = acc / h
    return out


def partial_derivative(f: FormField, axis: int, order: int = 2) -> FormField:
    """``d_h f`` along 1-based ``axis``, componentwise and grade-preserving.

    ``order=2`` is ``numpy.gradient`` (central inside, second-order one-sided
    at the ends). ``order=4`` and ``6`` use wider central stencils wherever
    they fit and ``numpy.gradient`` on the outer layers. Both act along one axis only, so partials along
    different axes commute exactly.
    """
    if not 1 <= axis <= f.n:
        raise GridError(f"axis {axis} out of range 1..{f.n}")
    _check_order(order)
    h = f.grid.spacing[axis - 1]
    if order == 2:
        return FormField(f.grid, {
            k: np.gradient(v, h, axis=axis - 1, edge_order=2) for k, v in f.components.items()
        })
    return FormField(f.grid, {k: _central(v, h, axis - 1, order) for k, v in f.components.items()})


def _derivative(u: FormField, blade_op, order: int = 2) -> FormField:
    # accumulate h outer, component inner so that d + delta matches the
    # direct Clifford sum bit for bit on homogeneous input
    out: dict[int, np.ndarray] = {}
    for h in range(1, u.n + 1):
        dh = partial_derivative(u, h, order)
        mh = 1 << (h - 1)
        for k, arr in dh.components.items():
            res = blade_op(mh, index_to_mask(k))
            if res is None:
                continue
            mask, sign = res
            term = arr if sign > 0 else -arr
            out[mask] = out[mask] + term if mask in out else term
    return FormField(u.grid, {mask_to_index(m): a for m, a in out.items()})


def exterior_derivative(u: FormField, order: int = 2) -> FormField:
    """``du = dx^h ^ d_h u``."""
    return _derivative(u, BLADE_PRODUCTS["exterior"], order)


def interior_derivative(u: FormField, order: int = 2) -> FormField:
    """``delta u = dx^h . d_h u``; zero on 0-forms."""
    return _derivative(u, BLADE_PRODUCTS["left"], order)


def kahler_derivative(u: FormField, order: int = 2) -> FormField:
    """``partial u = dx^h d_h u`` (Clifford product), equal to ``du + delta u``."""
    return _derivative(u, BLADE_PRODUCTS["clifford"], order)


def laplacian(u: FormField, order: int = 2) -> FormField:
    """``delta d u + d delta u``.

    On interior nodes this is the componentwise sum of composed central
    differences, i.e. the (2h)-wide second-difference stencil per axis
    for ``order=2``.
    """
    return (interior_derivative(exterior_derivative(u, order), order)
            + exterior_derivative(interior_derivative(u, order), order))


def compact_laplacian(f: np.ndarray, spacing: tuple, order: int = 2) -> np.ndarray:
    """Standard compact Laplacian of a scalar lattice; NaN where the stencil
    does not fit (1 node from the boundary for ``order=2``, 2 for ``order=4``).

    Not part of the d/delta operator family; used where only a scalar
    Laplacian is needed (the point-evaluation identity).
    """
    if order == 2:
        coeffs = (1.0, -2.0, 1.0)
    elif order == 4:
        coeffs = tuple(c / 12.0 for c in (-1.0, 16.0, -30.0, 16.0, -1.0))
    else:
        raise ValueError(f"order must be 2 or 4, got {order}")
    reach = len(coeffs) // 2
    out = np.full(f.shape, np.nan)
    if any(p <= 2 * reach for p in f.shape):
        return out
    inner = tuple(slice(reach, p - reach) for p in f.shape)
    acc = np.zeros(tuple(p - 2 * reach for p in f.shape))
    for ax, h in enumerate(spacing):
        for shift, c in zip(range(-reach, reach + 1), coeffs):
            sl = list(inner)
            sl[ax] = slice(reach + shift, f.shape[ax] - reach + shift)
            acc += (c / (h * h)) * f[tuple(sl)]
    out[inner] = acc
    return out


def residual_mask(grid: GridSpec, include_boundary: bool = False, offset: int = 1) -> np.ndarray:
    if include_boundary:
        return np.ones(grid.shape, dtype=bool)
    mask = grid.interior_mask(offset)
    if not mask.any():
        raise GridError("grid too thin: no interior nodes")
    return mask


def verify_product_rules(u: FormField, v: FormField, include_boundary: bool = False) -> dict:
    """Max-norm residuals of the product rules for the Kähler derivatives.

    Keys: ``leibniz`` (``d_h(uv)``), ``clifford_partial``, ``clifford_d``,
    ``clifford_delta``, ``wedge_partial``, ``wedge_d``, ``wedge_delta``.
    ``e_h v`` is read as ``e^h v = dx^h . v`` (flat metric).
    """
    u._check(v)
    grid = u.grid
    mask = residual_mask(grid, include_boundary)
    prod = {"clifford": lambda a, b: field_product(a, b, "clifford"),
            "wedge": lambda a, b: field_product(a, b, "exterior")}
    du, dlu, pu = exterior_derivative(u), interior_derivative(u), kahler_derivative(u)
    dv, dlv, pv = exterior_derivative(v), interior_derivative(v), kahler_derivative(v)
    eu = field_eta(u)
    partial_u = [partial_derivative(u, h) for h in range(1, grid.n + 1)]
    partial_v = [partial_derivative(v, h) for h in range(1, grid.n + 1)]
    e_u = [left_interior(dx(grid, h), u) for h in range(1, grid.n + 1)]
    e_v = [left_interior(dx(grid, h), v) for h in range(1, grid.n + 1)]

    def hsum(terms):
        total = FormField.zeros(grid)
        for t in terms:
            total = total + t
        return total

    res = {}
    uv = field_product(u, v, "clifford")
    res["leibniz"] = max(
        (partial_derivative(uv, h) - prod["clifford"](partial_u[h - 1], v) - prod["clifford"](u, partial_v[h - 1])).max_abs(mask)
        for h in range(1, grid.n + 1)
    )
    for name, p in prod.items():
        w = p(u, v)
        ehu_dhv = hsum(p(e_u[h], partial_v[h]) for h in range(grid.n))
        eta_dhu_ehv = hsum(p(field_eta(partial_u[h]), e_v[h]) for h in range(grid.n))
        if name == "clifford":
            lhs_rhs = {
                "partial": (kahler_derivative(w), p(pu, v) + p(eu, pv) + 2.0 * ehu_dhv),
                "d": (exterior_derivative(w), p(du, v) + p(eu, dv) + ehu_dhv - eta_dhu_ehv),
                "delta": (interior_derivative(w), p(dlu, v) + p(eu, dlv) + ehu_dhv + eta_dhu_ehv),
            }
        else:
            lhs_rhs = {
                "partial": (kahler_derivative(w), p(pu, v) + p(eu, pv) + ehu_dhv + eta_dhu_ehv),
                "d": (exterior_derivative(w), p(du, v) + p(eu, dv)),
                "delta": (interior_derivative(w), p(dlu, v) + p(eu, dlv) + ehu_dhv + eta_dhu_ehv),
            }
        for op, (lhs, rhs) in lhs_rhs.items():
            res[f"{name}_{op}"] = (lhs - rhs).max_abs(mask)
    return res


__all__ = [
    "GridSpec", "Region", "FormField", "GridError",
    "partial_derivative", "exterior_derivative", "interior_derivative",
    "kahler_derivative", "laplacian", "compact_laplacian", "verify_product_rules",
    "field_product", "field_eta", "dx", "INTERIOR", "BOUNDARY", "EXTERIOR",
]
