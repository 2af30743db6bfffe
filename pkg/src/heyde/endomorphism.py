"""Integer-matrix endomorphisms of finite products and tori.

An :class:`Endo` acts on column coordinate vectors, ``x -> M x`` (mod ``n_i`` in
row ``i`` for finite products, mod 1 on torus angles). Its adjoint acts on the
dual so that ``(M x, y) = (x, M~ y)``; on a torus ``M~ = M^T``, and on a finite
product ``M~_ji = M_ij n_j / n_i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import sympy

from .groups import DualSublattice, FiniteSubgroup, GroupSpec, torsion_subgroup_order2

__all__ = [
    "Endo",
    "KernelReport",
    "adjoint",
    "check_condition_d1",
    "image_lattice",
    "check_necessary_condition_9a",
    "automorphisms",
]


@dataclass(frozen=True, eq=False)
class Endo:
    spec: GroupSpec
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        M = np.asarray(self.matrix)
        k = self.spec.dim
        if M.shape != (k, k):
            raise ValueError(f"{self.spec} needs a {k}x{k} matrix, got shape {M.shape}")
        if not np.all(M == np.round(M)):
            raise ValueError("endomorphism matrix must be integral")
        M = M.astype(np.int64)
        if self.spec.is_finite:
            n = np.asarray(self.spec.orders, dtype=np.int64)
            # column j must respect the relation n_j x_j = 0
            bad = np.mod(M * n[None, :], n[:, None]) != 0
            if bad.any():
                i, j = map(int, np.argwhere(bad)[0])
                raise ValueError(
                    f"matrix does not descend to {self.spec}: n_{j}*M[{i},{j}] "
                    f"= {n[j] * M[i, j]} is not 0 mod {n[i]}"
                )
            M = np.mod(M, n[:, None])
        object.__setattr__(self, "matrix", tuple(tuple(int(v) for v in row) for row in M))

    @classmethod
    def identity(cls, spec: GroupSpec) -> Endo:
        return cls.scalar(spec, 1)

    @classmethod
    def scalar(cls, spec: GroupSpec, c: int) -> Endo:
        k = spec.dim
        return cls(spec, tuple(tuple(c if i == j else 0 for j in range(k)) for i in range(k)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=np.int64)

    @cached_property
    def adjoint_array(self) -> np.ndarray:
        M = self.array
        if not self.spec.is_finite:
            return M.T.copy()
        n = np.asarray(self.spec.orders, dtype=np.int64)
        # M~[j, i] = M[i, j] * n_j / n_i, integral by well-formedness
        return (M * n[None, :] // n[:, None]).T.copy()

    def apply(self, x) -> np.ndarray:
        """Image of group element(s) ``x`` (integer coords, or torus angles)."""
        x = np.asarray(x)
        if self.spec.is_finite:
            return self.spec.reduce(x.astype(np.int64) @ self.array.T)
        return np.mod(np.asarray(x, dtype=float) @ self.array.T, 1.0)

    __call__ = apply

    def apply_dual(self, y) -> np.ndarray:
        """Adjoint action on dual element(s) ``y``."""
        y = np.asarray(y, dtype=np.int64)
        return self.spec.reduce(y @ self.adjoint_array.T)

    def _combine(self, other, op) -> Endo:
        if isinstance(other, int):
            other = Endo.scalar(self.spec, other)
        if other.spec != self.spec:
            raise ValueError(f"spec mismatch: {self.spec} vs {other.spec}")
        return Endo(self.spec, op(self.array, other.array))

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __neg__(self):
        return Endo(self.spec, -self.array)

    def __rmul__(self, c: int):
        return Endo(self.spec, int(c) * self.array)

    def __matmul__(self, other: Endo) -> Endo:
        """Composition ``self o other``."""
        if other.spec != self.spec:
            raise ValueError(f"spec mismatch: {self.spec} vs {other.spec}")
        return Endo(self.spec, self.array @ other.array)

    def __eq__(self, other):
        if not isinstance(other, Endo):
            return NotImplemented
        return self.spec == other.spec and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.spec, self.matrix))

    def __repr__(self):
        return f"Endo({self.spec}, {[list(r) for r in self.matrix]})"

    @property
    def det(self) -> int:
        return int(sympy.Matrix(self.matrix).det())

    @cached_property
    def index_map(self) -> np.ndarray:
        """Finite groups: flat index of ``M x`` for every element ``x``."""
        return self.spec.index(self.apply(self.spec.elements))

    @cached_property
    def dual_index_map(self) -> np.ndarray:
        return self.spec.index(self.apply_dual(self.spec.elements))

    def is_automorphism(self) -> bool:
        if self.spec.is_finite:
            return len(np.unique(self.index_map)) == self.spec.order
        return abs(self.det) == 1

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.matrix]


def adjoint(e: Endo) -> Endo:
    return Endo(e.spec, e.adjoint_array)


@dataclass(frozen=True)
class KernelReport:
    endo: Endo
    kernel_elements: tuple[tuple[int, ...], ...] | None
    det: int | None
    is_trivial: bool

    @property
    def kernel(self) -> FiniteSubgroup | None:
        if self.kernel_elements is None:
            return None
        return FiniteSubgroup(self.endo.spec, elements=self.kernel_elements)

    def to_dict(self) -> dict:
        return {
            "endo": self.endo.to_list(),
            "kernel_elements": None if self.kernel_elements is None else [list(k) for k in self.kernel_elements],
            "det": self.det,
            "is_trivial": self.is_trivial,
        }


def kernel(e: Endo) -> FiniteSubgroup:
    spec = e.spec
    zero = spec.index(np.zeros(spec.dim, dtype=np.int64))
    keep = e.index_map == zero
    return FiniteSubgroup(spec, elements=tuple(map(tuple, spec.elements[keep])))


def check_condition_d1(alpha: Endo) -> KernelReport:
    """Is ``Ker(I + alpha)`` trivial?

    On ``T^d`` the kernel of an integer matrix ``N`` with ``det N != 0`` is a
    finite group of order ``|det N|``, so triviality means ``|det(I + M)| = 1``.
    """
    if not alpha.is_automorphism():
        raise ValueError(f"{alpha} is not an automorphism")
    ipa = Endo.identity(alpha.spec) + alpha
    if alpha.spec.is_finite:
        K = kernel(ipa)
        return KernelReport(ipa, K.elements, None, K.order == 1)
    d = ipa.det
    return KernelReport(ipa, None, d, abs(d) == 1)


def image_lattice(e) -> DualSublattice:
    """``e(Z^d)`` for an integer matrix acting on the dual of a torus.

    Pass either a bare integer matrix (interpreted as the dual-side map) or a
    torus :class:`Endo`, whose dual-side matrix is its adjoint.
    """
    if isinstance(e, Endo):
        if e.spec.is_finite:
            raise ValueError("image_lattice needs a torus endomorphism")
        M = e.adjoint_array
    else:
        M = np.asarray(e)
    return DualSublattice(tuple(map(tuple, M)))


def check_necessary_condition_9a(alpha: Endo) -> bool:
    """``Ker(I + alpha)`` is contained in the 2-torsion subgroup ``G``."""
    K = kernel(Endo.identity(alpha.spec) + alpha)
    G = torsion_subgroup_order2(alpha.spec)
    return set(K.elements) <= set(G.elements)


def _entry_choices(spec: GroupSpec, i: int, j: int) -> list[int]:
    n_i, n_j = spec.orders[i], spec.orders[j]
    return [m for m in range(n_i) if (m * n_j) % n_i == 0]


def endomorphisms(spec: GroupSpec):
    """Yield every endomorphism of a finite product."""
    k = spec.dim
    choices = [_entry_choices(spec, i, j) for i in range(k) for j in range(k)]
    for flat in itertools.product(*choices):
        yield Endo(spec, tuple(tuple(flat[i * k: (i + 1) * k]) for i in range(k)))


def automorphisms(spec: GroupSpec) -> list[Endo]:
    """All automorphisms of a finite product, by exhaustive bijection check."""
    return [e for e in endomorphisms(spec) if e.is_automorphism()]
