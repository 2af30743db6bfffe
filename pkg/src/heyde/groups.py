"""Concrete abelian groups: finite products of cyclic groups and tori.

Finite groups are self-dual through the pairing
``(x, y) = exp(2*pi*i * sum_j x_j y_j / n_j)``; the dual of ``T^d`` is ``Z^d``
with ``(t, y) = exp(2*pi*i * t . y)`` for angle coordinates ``t`` mod 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np
import sympy

from . import config

__all__ = [
    "GroupSpec",
    "FiniteSubgroup",
    "DualSublattice",
    "pairing",
    "torsion_subgroup_order2",
    "annihilator",
    "annihilator_Y2",
    "haar_charfn",
    "subgroups",
    "abelian_groups",
]


@dataclass(frozen=True)
class GroupSpec:
    """Either ``FiniteProduct(orders)`` or ``Torus(dim)``."""

    kind: str
    orders: tuple[int, ...] = ()
    dim: int = 0

    def __post_init__(self):
        if self.kind == "finite":
            orders = tuple(int(n) for n in self.orders)
            if not orders:
                raise ValueError("finite group needs at least one cyclic factor")
            if any(n < 2 for n in orders):
                raise ValueError(f"cyclic orders must be >= 2, got {orders}")
            object.__setattr__(self, "orders", orders)
            object.__setattr__(self, "dim", len(orders))
        elif self.kind == "torus":
            if int(self.dim) < 1:
                raise ValueError(f"torus dimension must be >= 1, got {self.dim}")
            object.__setattr__(self, "dim", int(self.dim))
            object.__setattr__(self, "orders", ())
        else:
            raise ValueError(f"unknown group kind {self.kind!r}")

    @classmethod
    def finite(cls, *orders: int) -> GroupSpec:
        if len(orders) == 1 and not isinstance(orders[0], (int, np.integer)):
            orders = tuple(orders[0])
        return cls("finite", orders=tuple(orders))

    @classmethod
    def torus(cls, dim: int) -> GroupSpec:
        return cls("torus", dim=dim)

    @classmethod
    def from_dict(cls, data: dict) -> GroupSpec:
        if not isinstance(data, dict):
            raise ValueError(f"group must be an object like {{'kind': 'finite', 'orders': [..]}}, got {data!r}")
        kind = data.get("kind")
        if kind == "finite":
            return cls.finite(*data["orders"])
        if kind == "torus":
            return cls.torus(data["dim"])
        raise ValueError(f"unknown group kind {kind!r}")

    def to_dict(self) -> dict:
        if self.is_finite:
            return {"kind": "finite", "orders": list(self.orders)}
        return {"kind": "torus", "dim": self.dim}

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def order(self) -> int:
        if not self.is_finite:
            raise ValueError("a torus has no finite order")
        return math.prod(self.orders)

    @property
    def exponent(self) -> int:
        return reduce(math.lcm, self.orders, 1)

    def __str__(self):
        if self.is_finite:
            return "x".join(f"Z{n}" for n in self.orders)
        return f"T^{self.dim}"

    # -- finite-group tables -------------------------------------------------
    # Elements are enumerated in row-major order over range(n_1) x ... x range(n_k);
    # the flat position of an element is its index in every table below.

    @cached_property
    def _modulus(self) -> np.ndarray:
        return np.asarray(self.orders, dtype=np.int64)

    @cached_property
    def elements(self) -> np.ndarray:
        """All elements as an (order, k) integer array."""
        self._require_finite()
        if self.order > config.MAX_FINITE_ORDER:
            raise ValueError(
                f"group order {self.order} exceeds cap {config.MAX_FINITE_ORDER}"
            )
        grids = np.indices(self.orders).reshape(self.dim, -1).T
        return np.ascontiguousarray(grids, dtype=np.int64)

    def reduce(self, coords) -> np.ndarray:
        """Canonical representative(s): mod n_i for finite groups, unchanged for Z^d."""
        coords = np.asarray(coords, dtype=np.int64)
        if coords.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got shape {coords.shape}")
        if self.is_finite:
            return np.mod(coords, self._modulus)
        return coords

    def index(self, coords) -> np.ndarray:
        """Flat positions of finite-group elements given by coordinates (mod n_i)."""
        self._require_finite()
        coords = self.reduce(coords)
        return np.ravel_multi_index(tuple(np.moveaxis(coords, -1, 0)), self.orders)

    @cached_property
    def add_table(self) -> np.ndarray:
        e = self.elements
        return self.index(e[:, None, :] + e[None, :, :])

    @cached_property
    def neg_table(self) -> np.ndarray:
        return self.index(-self.elements)

    def _require_finite(self):
        if not self.is_finite:
            raise ValueError(f"operation needs a finite group, got {self}")


def _check_dims(spec: GroupSpec, *arrays):
    for a in arrays:
        if np.shape(a)[-1] != spec.dim:
            raise ValueError(
                f"dimension mismatch: {spec} needs {spec.dim} coordinates, got {np.shape(a)}"
            )


def pairing(x, y, spec: GroupSpec):
    """Value of the character ``y`` at ``x``; broadcasts over leading axes."""
    x = np.asarray(x)
    y = np.asarray(y)
    _check_dims(spec, x, y)
    if spec.is_finite:
        # phase as an exact residue mod lcm(n) keeps angles free of float drift
        L = spec.exponent
        weights = np.asarray([L // n for n in spec.orders], dtype=np.int64)
        r = np.mod(np.sum(x.astype(np.int64) * y.astype(np.int64) * weights, axis=-1), L)
        return np.exp(2j * np.pi * r / L)
    phase = np.sum(np.asarray(x, dtype=float) * y, axis=-1)
    return np.exp(2j * np.pi * np.mod(phase, 1.0))


@dataclass(frozen=True, eq=False)
class FiniteSubgroup:
    """A subgroup of a finite product, materialized as a sorted element list."""

    ambient: GroupSpec
    generators: tuple[tuple[int, ...], ...] = ()
    elements: tuple[tuple[int, ...], ...] = field(default=None)

    def __post_init__(self):
        self.ambient._require_finite()
        gens = tuple(tuple(int(c) for c in self.ambient.reduce(g)) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if self.elements is None:
            object.__setattr__(self, "elements", _closure(self.ambient, gens))
        else:
            elems = sorted({tuple(int(c) for c in self.ambient.reduce(e)) for e in self.elements})
            object.__setattr__(self, "elements", tuple(elems))

    @classmethod
    def from_elements(cls, ambient: GroupSpec, elements) -> FiniteSubgroup:
        elems = [tuple(int(c) for c in e) for e in np.asarray(elements).reshape(-1, ambient.dim)]
        sub = cls(ambient, generators=tuple(elems), elements=tuple(elems))
        if sub.elements != _closure(ambient, sub.elements):
            raise ValueError("element list is not closed under addition")
        return sub

    @classmethod
    def trivial(cls, ambient: GroupSpec) -> FiniteSubgroup:
        return cls(ambient)

    @classmethod
    def whole(cls, ambient: GroupSpec) -> FiniteSubgroup:
        return cls(ambient, elements=tuple(map(tuple, ambient.elements)))

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def mask(self) -> np.ndarray:
        """Boolean indicator over the ambient element table."""
        m = np.zeros(self.ambient.order, dtype=bool)
        m[self.ambient.index(np.asarray(self.elements))] = True
        return m

    def __contains__(self, x) -> bool:
        return bool(self.mask[self.ambient.index(x)])

    def __eq__(self, other):
        if not isinstance(other, FiniteSubgroup):
            return NotImplemented
        return self.ambient == other.ambient and self.elements == other.elements

    def __hash__(self):
        return hash((self.ambient, self.elements))

    def __repr__(self):
        return f"FiniteSubgroup({self.ambient}, order={self.order})"


def _closure(spec: GroupSpec, gens) -> tuple[tuple[int, ...], ...]:
    zero = tuple([0] * spec.dim)
    seen = {zero}
    frontier = [zero]
    gens = [np.asarray(g, dtype=np.int64) for g in gens]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                z = tuple(int(c) for c in spec.reduce(np.asarray(x) + g))
                if z not in seen:
                    seen.add(z)
                    nxt.append(z)
        frontier = nxt
    return tuple(sorted(seen))


def torsion_subgroup_order2(spec: GroupSpec) -> FiniteSubgroup:
    """``G = {x : 2x = 0}``, the subgroup generated by the elements of order 2."""
    e = spec.elements
    keep = np.all(np.mod(2 * e, spec._modulus) == 0, axis=1)
    return FiniteSubgroup(spec, elements=tuple(map(tuple, e[keep])))


def annihilator(K: FiniteSubgroup) -> FiniteSubgroup:
    """``A(Y, K)``: characters trivial on ``K`` (as a subgroup of the self-dual group)."""
    spec = K.ambient
    vals = pairing(np.asarray(K.elements)[None, :, :], spec.elements[:, None, :], spec)
    keep = np.all(np.abs(vals - 1.0) < config.TOL_FINITE, axis=1)
    return FiniteSubgroup(spec, elements=tuple(map(tuple, spec.elements[keep])))


@dataclass(frozen=True, eq=False)
class DualSublattice:
    """Full-rank sublattice ``B Z^d`` of ``Z^d`` (columns of ``basis`` span it)."""

    basis: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        b = np.asarray(self.basis)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError(f"basis must be square, got shape {b.shape}")
        if not np.all(b == np.round(b)):
            raise ValueError("basis must be integral")
        object.__setattr__(self, "basis", tuple(tuple(int(v) for v in row) for row in b))
        if self.det == 0:
            raise ValueError("singular basis: image is not a full-rank sublattice")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def _sym(self) -> sympy.Matrix:
        return sympy.Matrix(self.basis)

    @cached_property
    def det(self) -> int:
        return int(self._sym.det())

    @property
    def index(self) -> int:
        return abs(self.det)

    @cached_property
    def adjugate(self) -> np.ndarray:
        return np.asarray(self._sym.adjugate().tolist(), dtype=np.int64)

    def contains(self, y) -> np.ndarray | bool:
        """Exact membership: ``adj(B) y == 0 (mod |det B|)``; broadcasts over rows."""
        y = np.asarray(y, dtype=np.int64)
        if y.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got shape {y.shape}")
        r = np.mod(y @ self.adjugate.T, self.index)
        out = np.all(r == 0, axis=-1)
        return bool(out) if out.ndim == 0 else out

    __contains__ = contains

    def annihilated_points(self) -> np.ndarray:
        """Numerators of the finite torus subgroup ``K`` with ``A(Y, K)`` = this lattice.

        ``K = {t : B^T t in Z^d} = (B^T)^{-1} Z^d / Z^d``; points are returned as
        integer numerators over the common denominator ``index``.
        """
        D = self.index
        B = np.asarray(self.basis, dtype=np.int64)
        pts = np.indices((D,) * self.dim).reshape(self.dim, -1).T
        keep = np.all(np.mod(pts @ B, D) == 0, axis=1)
        return pts[keep]

    def to_dict(self) -> dict:
        return {"basis": [list(r) for r in self.basis], "index": self.index}

    def __eq__(self, other):
        if not isinstance(other, DualSublattice):
            return NotImplemented
        # same lattice iff each basis lies in the other
        a = np.asarray(self.basis).T
        b = np.asarray(other.basis).T
        return self.dim == other.dim and all(other.contains(a)) and all(self.contains(b))

    def __hash__(self):
        return hash((self.dim, self.index))

    def __repr__(self):
        return f"DualSublattice(basis={self.basis}, index={self.index})"


def annihilator_Y2(spec: GroupSpec) -> DualSublattice:
    """``Y^(2) = 2 Z^d``, the annihilator of the order-2 subgroup of ``T^d``."""
    if spec.is_finite:
        raise ValueError("annihilator_Y2 is defined for tori; use annihilator() on finite groups")
    return DualSublattice(tuple(tuple(2 if i == j else 0 for j in range(spec.dim)) for i in range(spec.dim)))


def haar_charfn(K, y) -> np.ndarray | float:
    """Characteristic function of Haar measure on ``K``: indicator of ``A(Y, K)``.

    ``K`` is a :class:`FiniteSubgroup`, or, on a torus, the :class:`DualSublattice`
    ``A(Y, K)`` that determines the finite subgroup ``K``.
    """
    if isinstance(K, DualSublattice):
        return np.asarray(K.contains(y), dtype=float)[()]
    spec = K.ambient
    y = np.asarray(y)
    vals = pairing(np.asarray(K.elements), y[..., None, :], spec)
    return np.all(np.abs(vals - 1.0) < config.TOL_FINITE, axis=-1).astype(float)[()]


def subgroups(spec: GroupSpec) -> list[FiniteSubgroup]:
    """Every subgroup of a finite group, by repeated one-generator extension."""
    found = {FiniteSubgroup.trivial(spec)}
    frontier = list(found)
    elems = [tuple(e) for e in spec.elements]
    while frontier:
        nxt = []
        for S in frontier:
            for g in elems:
                if g in S:
                    continue
                T = FiniteSubgroup(spec, generators=S.generators + (g,))
                if T not in found:
                    found.add(T)
                    nxt.append(T)
        frontier = nxt
    return sorted(found, key=lambda S: (S.order, S.elements))


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def abelian_groups(max_order: int, min_order: int = 2) -> list[GroupSpec]:
    """One representative per isomorphism class, in invariant-factor form ``n_1 | n_2 | ...``."""
    out = []
    for N in range(max(min_order, 2), max_order + 1):
        factors = sympy.factorint(N)
        per_prime = [
            [[p**e for e in part] for part in _partitions(a)] for p, a in sorted(factors.items())
        ]
        for choice in itertools.product(*per_prime):
            r = max(len(c) for c in choice)
            inv = [1] * r
            for powers in choice:
                # largest powers go to the last invariant factor
                for i, q in enumerate(powers):
                    inv[r - 1 - i] *= q
            out.append(GroupSpec.finite(*inv))
    return out
