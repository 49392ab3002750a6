"""Pointwise Kähler (Clifford) algebra of differential forms on E_n.

Basis monomials ``dx^A`` are identified by a :data:`BasisIndex`, a strictly
increasing tuple of 1-based axis labels; the empty tuple is the scalar unit.
The metric is the identity, so ``dx^i dx^j + dx^j dx^i = 2 delta^ij``.

Internally a monomial is a bitmask (axis ``i`` is bit ``i - 1``); signs of
basis products come from counting the transpositions needed to bring the
concatenated factors into canonical order.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from types import MappingProxyType
from typing import Iterable, Mapping

MAX_DIMENSION = 16

BasisIndex = tuple  # tuple[int, ...], strictly increasing axis labels


class AlgebraError(ValueError):
    """Raised on invalid basis indices, dimension mismatches and bad grades."""


# -- basis index bookkeeping -------------------------------------------------

def check_dimension(n: int) -> int:
    if int(n) != n or n < 1 or n > MAX_DIMENSION:
        raise AlgebraError(f"dimension must be an integer in 1..{MAX_DIMENSION}, got {n!r}")
    return int(n)


def basis_index(axes: Iterable[int], n: int) -> BasisIndex:
    """Validate ``axes`` as a canonical basis index for dimension ``n``."""
    axes = tuple(int(a) for a in axes)
    for a in axes:
        if a < 1 or a > n:
            raise AlgebraError(f"axis {a} out of range 1..{n}")
    if any(b <= a for a, b in zip(axes, axes[1:])):
        raise AlgebraError(f"basis index {axes} is not strictly increasing")
    return axes


def index_to_mask(index: BasisIndex) -> int:
    mask = 0
    for a in index:
        mask |= 1 << (a - 1)
    return mask


@lru_cache(maxsize=None)
def mask_to_index(mask: int) -> BasisIndex:
    out = []
    axis = 1
    while mask:
        if mask & 1:
            out.append(axis)
        mask >>= 1
        axis += 1
    return tuple(out)


def grade(index: BasisIndex) -> int:
    return len(index)


def all_indices(n: int, k: int | None = None) -> list[BasisIndex]:
    """All basis indices of dimension ``n`` (optionally of grade ``k``), ordered by grade."""
    grades = range(n + 1) if k is None else [k]
    return [c for g in grades for c in combinations(range(1, n + 1), g)]


def index_label(index: BasisIndex) -> str:
    """Digit-string label, ``'13'`` for dx^1 dx^3 and ``'0'`` for the scalar.

    Axes above 9 are written in brackets, e.g. ``'1[10]'``.
    """
    if not index:
        return "0"
    return "".join(str(a) if a < 10 else f"[{a}]" for a in index)


@lru_cache(maxsize=None)
def reorder_sign(a: int, b: int) -> int:
    """Sign of the canonical reordering of monomial ``a`` followed by ``b``.

    Counts, for every axis in ``b``, the axes of ``a`` that lie above it.
    """
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


# -- blade-level products (mask, mask) -> (mask, sign) or None ----------------

def blade_clifford(a: int, b: int):
    return a ^ b, reorder_sign(a, b)


def blade_exterior(a: int, b: int):
    if a & b:
        return None
    return a | b, reorder_sign(a, b)


def blade_left_contraction(a: int, b: int):
    if a & ~b:
        return None
    return a ^ b, reorder_sign(a, b)


def blade_right_contraction(a: int, b: int):
    if b & ~a:
        return None
    return a ^ b, reorder_sign(a, b)


def blade_scalar(a: int, b: int):
    if a != b:
        return None
    return 0, reorder_sign(a, b)


BLADE_PRODUCTS = {
    "clifford": blade_clifford,
    "exterior": blade_exterior,
    "left": blade_left_contraction,
    "right": blade_right_contraction,
    "scalar": blade_scalar,
}


def eta_sign(k: int) -> int:
    return -1 if k % 2 else 1


def reversion_sign(k: int) -> int:
    return -1 if (k * (k - 1) // 2) % 2 else 1


# -- multivectors ------------------------------------------------------------

class Multivector:
    """Element ``sum_A a_A dx^A`` of the Kähler algebra of dimension ``n``.

    Immutable. Absent keys have coefficient zero; zero coefficients are
    dropped at construction so equality is structural.
    """

    __slots__ = ("_n", "_coeffs")

    def __init__(self, n: int, coeffs: Mapping[Iterable[int], float] | None = None):
        n = check_dimension(n)
        clean: dict[BasisIndex, float] = {}
        for key, value in (coeffs or {}).items():
            key = basis_index(key, n)
            value = float(value)
            if value != 0.0:
                clean[key] = clean.get(key, 0.0) + value
        object.__setattr__(self, "_n", n)
        object.__setattr__(self, "_coeffs", MappingProxyType(
            {k: v for k, v in sorted(clean.items(), key=lambda kv: (len(kv[0]), kv[0])) if v != 0.0}
        ))

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    @property
    def n(self) -> int:
        return self._n

    @property
    def coeffs(self) -> Mapping[BasisIndex, float]:
        return self._coeffs

    @classmethod
    def scalar(cls, n: int, value: float = 1.0) -> "Multivector":
        return cls(n, {(): value})

    @classmethod
    def basis(cls, n: int, axes: Iterable[int], value: float = 1.0) -> "Multivector":
        """The monomial ``value * dx^axes``; ``axes`` need not be sorted.

        Unsorted or repeated axes are multiplied out with the Clifford rule,
        so ``basis(3, (2, 1))`` is ``-dx^1 dx^2``.
        """
        out = cls.scalar(n, value)
        for a in axes:
            out = clifford_product(out, cls(n, {(a,): 1.0}))
        return out

    def __getitem__(self, index: Iterable[int]) -> float:
        return self._coeffs.get(tuple(index), 0.0)

    def grades(self) -> set[int]:
        return {len(k) for k in self._coeffs}

    def grade_part(self, k: int) -> "Multivector":
        return Multivector(self._n, {a: v for a, v in self._coeffs.items() if len(a) == k})

    def is_homogeneous(self) -> bool:
        return len(self.grades()) <= 1

    def scalar_part(self) -> float:
        return self._coeffs.get((), 0.0)

    def _check(self, other: "Multivector") -> None:
        if not isinstance(other, Multivector):
            raise TypeError(f"expected Multivector, got {type(other).__name__}")
        if other.n != self.n:
            raise AlgebraError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Multivector.scalar(self.n, other)
        self._check(other)
        out = dict(self._coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return Multivector(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.n, {k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.n, {k: v * other for k, v in self._coeffs.items()})
        return clifford_product(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def __xor__(self, other):
        return exterior_product(self, other)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.n == other.n and dict(self._coeffs) == dict(other.coeffs)

    def __hash__(self):
        return hash((self.n, tuple(self._coeffs.items())))

    def isclose(self, other: "Multivector", atol: float = 1e-12) -> bool:
        self._check(other)
        keys = set(self._coeffs) | set(other.coeffs)
        return all(abs(self[k] - other[k]) <= atol for k in keys)

    def __repr__(self):
        if not self._coeffs:
            return f"Multivector(n={self.n}, 0)"
        terms = " + ".join(
            f"{v:g}" if not k else f"{v:g}*dx{index_label(k)}" for k, v in self._coeffs.items()
        )
        return f"Multivector(n={self.n}, {terms})"


def _bilinear(u: Multivector, v: Multivector, blade_op) -> Multivector:
    if not isinstance(u, Multivector) or not isinstance(v, Multivector):
        raise TypeError("products take Multivector operands")
    if u.n != v.n:
        raise AlgebraError(f"dimension mismatch: {u.n} vs {v.n}")
    out: dict[int, float] = {}
    for ka, va in u.coeffs.items():
        ma = index_to_mask(ka)
        for kb, vb in v.coeffs.items():
            res = blade_op(ma, index_to_mask(kb))
            if res is None:
                continue
            mask, sign = res
            out[mask] = out.get(mask, 0.0) + sign * va * vb
    return Multivector(u.n, {mask_to_index(m): c for m, c in out.items()})


def clifford_product(u: Multivector, v: Multivector) -> Multivector:
    """Clifford (Kähler) product ``u v`` with orthonormal generators."""
    return _bilinear(u, v, blade_clifford)


def exterior_product(u: Multivector, v: Multivector) -> Multivector:
    return _bilinear(u, v, blade_exterior)


def _require_grade_one(w: Multivector) -> None:
    if not w.coeffs or w.grades() != {1}:
        raise AlgebraError("interior product needs a homogeneous grade-1 first argument")


def interior_product(w: Multivector, u: Multivector) -> Multivector:
    """Left interior product ``w . u`` of a 1-form ``w`` with ``u``.

    Equals ``w u - w ^ u``: the grade-lowering part of the Clifford product.
    """
    _require_grade_one(w)
    return _bilinear(w, u, blade_left_contraction)


def right_interior_product(u: Multivector, w: Multivector) -> Multivector:
    """Right interior product ``u . w`` (equals ``u w - u ^ w`` for a 1-form ``w``)."""
    _require_grade_one(w)
    return _bilinear(u, w, blade_right_contraction)


def left_contraction(u: Multivector, v: Multivector) -> Multivector:
    """General left contraction; agrees with :func:`interior_product` on 1-forms."""
    return _bilinear(u, v, blade_left_contraction)


def scalar_product(u: Multivector, v: Multivector) -> float:
    """Scalar part of the Clifford product ``u v``."""
    return _bilinear(u, v, blade_scalar).scalar_part()


def eta(u: Multivector) -> Multivector:
    """Main involution: grade-r part scaled by (-1)^r."""
    return Multivector(u.n, {k: eta_sign(len(k)) * v for k, v in u.coeffs.items()})


def reversion(u: Multivector) -> Multivector:
    """Reverse the order of the 1-form factors: grade-r part times (-1)^(r(r-1)/2)."""
    return Multivector(u.n, {k: reversion_sign(len(k)) * v for k, v in u.coeffs.items()})


def unit_n_form(n: int) -> Multivector:
    n = check_dimension(n)
    return Multivector(n, {tuple(range(1, n + 1)): 1.0})


def complement(index: Iterable[int], n: int) -> tuple[BasisIndex, int]:
    """Complementary index and the sign ``s`` with ``dx^A ^ (s dx^Abar) = z``."""
    n = check_dimension(n)
    index = basis_index(index, n)
    comp = tuple(a for a in range(1, n + 1) if a not in index)
    return comp, reorder_sign(index_to_mask(index), index_to_mask(comp))


def complement_monomial(index: Iterable[int], n: int) -> Multivector:
    """The signed monomial ``dx^Abar`` of the decomposition formula."""
    comp, sign = complement(index, n)
    return Multivector(n, {comp: float(sign)})
