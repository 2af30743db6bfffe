"""Measures on finite products and tori, and their characteristic functions.

Finite measures hold a mass array shaped like the group (``masses[x]`` for
``x`` in ``range(n_1) x ... x range(n_k)``). Torus measures are held on the
Fourier side: :class:`TorusCharFn` keeps coefficients on the box
``[-W, W]^d`` plus a bound on the absolute coefficient mass outside it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import config
from .endomorphism import Endo
from .groups import FiniteSubgroup, GroupSpec, pairing

__all__ = [
    "FiniteMeasure",
    "TorusCharFn",
    "GaussianParams",
    "charfn",
    "convolve",
    "reflect",
    "pushforward",
    "gaussian_charfn",
    "gaussian_tail_bound",
    "density_on_grid",
    "DensityReport",
]


@dataclass(frozen=True, eq=False)
class FiniteMeasure:
    spec: GroupSpec
    masses: np.ndarray
    signed: bool = False

    def __post_init__(self):
        m = np.array(self.masses, dtype=float).reshape(self.spec.orders)
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        total = m.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {total!r}, not 1")
        if not self.signed and m.min() < -config.TOL_FINITE:
            raise ValueError("negative mass in a probability measure (pass signed=True)")

    @classmethod
    def point(cls, spec: GroupSpec, x) -> FiniteMeasure:
        m = np.zeros(spec.orders)
        m[tuple(spec.reduce(x))] = 1.0
        return cls(spec, m)

    @classmethod
    def haar(cls, K: FiniteSubgroup) -> FiniteMeasure:
        m = np.zeros(K.ambient.orders)
        m.reshape(-1)[K.mask] = 1.0 / K.order
        return cls(K.ambient, m)

    @classmethod
    def uniform(cls, spec: GroupSpec) -> FiniteMeasure:
        return cls(spec, np.full(spec.orders, 1.0 / spec.order))

    @classmethod
    def from_dict(cls, data: dict, spec: GroupSpec | None = None) -> FiniteMeasure:
        spec = GroupSpec.from_dict(data["group"]) if "group" in data else spec
        if spec is None:
            raise ValueError("measure needs a group")
        if "point" in data:
            return cls.point(spec, data["point"])
        return cls(spec, np.asarray(data["masses"], dtype=float), bool(data.get("signed", False)))

    def to_dict(self) -> dict:
        return {
            "group": self.spec.to_dict(),
            "masses": [float(v) for v in self.flat],
            "signed": self.signed,
        }

    @property
    def flat(self) -> np.ndarray:
        return self.masses.reshape(-1)

    def support(self, tol: float = 0.0) -> np.ndarray:
        """Coordinates of the atoms (rows of the element table)."""
        return self.spec.elements[np.abs(self.flat) > tol]

    def charfn_table(self) -> np.ndarray:
        """``mu^(y)`` for every dual element, shaped like the group.

        ``sum_x mu(x) exp(2 pi i x.y/n)`` is ``N * ifftn(mu)`` in numpy's sign convention.
        """
        return np.fft.ifftn(self.masses) * self.spec.order

    def __call__(self, y) -> np.ndarray:
        return charfn(self, y)

    def allclose(self, other: FiniteMeasure, tol: float = config.TOL_FINITE) -> bool:
        return self.spec == other.spec and np.max(np.abs(self.masses - other.masses)) < tol

    def __repr__(self):
        return f"FiniteMeasure({self.spec}, {np.round(self.flat, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class TorusCharFn:
    """Fourier coefficients ``c(y)`` of a (signed) measure on ``T^d`` over ``[-W, W]^d``.

    ``coeffs[y + W]`` holds ``c(y)``. ``tail_bound`` bounds ``sum |c(y)|`` over
    lattice points outside the window. ``extension`` (optional) evaluates
    ``c`` exactly at arbitrary lattice points and is consulted only outside the
    window; ``log_modulus`` (optional) returns ``log|c(y)|`` without underflow.
    """

    coeffs: np.ndarray
    tail_bound: float = 0.0
    extension: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    log_modulus: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if len(set(c.shape)) != 1 or c.shape[0] % 2 != 1:
            raise ValueError(f"coefficient box must be (2W+1)^d, got shape {c.shape}")
        if abs(c[(c.shape[0] // 2,) * c.ndim] - 1.0) > 1e-9:
            raise ValueError("coefficient at 0 must equal 1")
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_function(cls, fn, dim: int, window: int, tail_bound: float = 0.0,
                      exact: bool = True, log_modulus=None) -> TorusCharFn:
        """Tabulate a vectorized lattice function; keep it as the extension if ``exact``."""
        pts = box_points(dim, window)
        vals = np.asarray(fn(pts)).reshape((2 * window + 1,) * dim)
        return cls(vals, tail_bound, fn if exact else None, log_modulus)

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    @property
    def window(self) -> int:
        return self.coeffs.shape[0] // 2

    def in_window(self, y) -> np.ndarray:
        return np.all(np.abs(np.asarray(y)) <= self.window, axis=-1)

    def __call__(self, y) -> np.ndarray:
        """Coefficient(s) at integer point(s) ``y``; broadcasts over leading axes."""
        y = np.asarray(y, dtype=np.int64)
        if y.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got shape {y.shape}")
        inside = self.in_window(y)
        out = np.empty(y.shape[:-1], dtype=complex)
        if np.all(inside):
            return self.coeffs[tuple(np.moveaxis(y + self.window, -1, 0))]
        if self.extension is None:
            far = y[~inside][0]
            raise ValueError(
                f"lattice point {far.tolist()} lies outside the stored window W={self.window}; "
                "rebuild with a larger window"
            )
        out[inside] = self.coeffs[tuple(np.moveaxis(y[inside] + self.window, -1, 0))]
        out[~inside] = self.extension(y[~inside])
        return out

    def log_abs(self, y) -> np.ndarray:
        """``log|c(y)|``, via ``log_modulus`` when available; raises on vanishing values."""
        y = np.asarray(y, dtype=np.int64)
        if self.log_modulus is not None:
            return np.asarray(self.log_modulus(y), dtype=float)
        vals = np.abs(self(y))
        if np.any(vals <= config.VANISHING):
            bad = y[vals <= config.VANISHING][0] if y.ndim > 1 else y
            raise ValueError(f"characteristic function vanishes at {np.asarray(bad).tolist()}")
        return np.log(vals)

    def is_hermitian(self, tol: float = config.TOL_FINITE) -> bool:
        flipped = self.coeffs[(slice(None, None, -1),) * self.dim]
        return bool(np.max(np.abs(self.coeffs - np.conj(flipped))) < tol)

    def abs_sum(self) -> float:
        """Upper bound for ``sum_y |c(y)|`` over the whole lattice."""
        return float(np.abs(self.coeffs).sum() + self.tail_bound)

    def with_coefficient(self, y, value) -> TorusCharFn:
        c = np.array(self.coeffs)
        c[tuple(np.asarray(y) + self.window)] = value
        return replace(self, coeffs=c, log_modulus=None)

    def to_dict(self) -> dict:
        pts = box_points(self.dim, self.window)
        vals = self.coeffs.reshape(-1)
        coefficients = []
        for p, v in zip(pts.tolist(), vals):
            entry = float(v.real) if v.imag == 0 else [float(v.real), float(v.imag)]
            coefficients.append([p, entry])
        return {
            "dim": self.dim,
            "window": self.window,
            "tail_bound": self.tail_bound,
            "coefficients": coefficients,
        }

    @classmethod
    def from_dict(cls, data: dict) -> TorusCharFn:
        d, W = int(data["dim"]), int(data["window"])
        c = np.zeros((2 * W + 1,) * d, dtype=complex)
        for p, v in data["coefficients"]:
            c[tuple(np.asarray(p) + W)] = complex(*v) if isinstance(v, list) else v
        return cls(c, float(data.get("tail_bound", 0.0)))


def box_points(dim: int, radius: int) -> np.ndarray:
    """All integer points of ``[-radius, radius]^dim`` in row-major order."""
    side = 2 * radius + 1
    return np.indices((side,) * dim).reshape(dim, -1).T - radius


@dataclass(frozen=True)
class GaussianParams:
    """``gamma^(y) = (shift, y) exp(-<A y, y>)`` on ``T^d``."""

    A: np.ndarray
    shift: np.ndarray | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if not np.allclose(A, A.T, atol=1e-12):
            raise ValueError("A is not symmetric")
        if np.linalg.eigvalsh(A).min() < -1e-10:
            raise ValueError("A is not positive semidefinite")
        object.__setattr__(self, "A", A)
        if self.shift is not None:
            object.__setattr__(self, "shift", np.mod(np.asarray(self.shift, dtype=float), 1.0))

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.A).min())

    def quadratic(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.einsum("...i,ij,...j->...", y, self.A, y)

    def to_charfn(self, window: int = config.DEFAULT_WINDOW) -> TorusCharFn:
        eps = self.min_eigenvalue
        tail = gaussian_tail_bound(eps, window, self.dim) if eps > 0 else np.inf
        return TorusCharFn.from_function(
            lambda y: gaussian_charfn(self, y), self.dim, window, tail,
            log_modulus=lambda y: -self.quadratic(y),
        )


def gaussian_charfn(g: GaussianParams, y) -> np.ndarray:
    y = np.asarray(y)
    if y.shape[-1] != g.dim:
        raise ValueError(f"expected {g.dim} coordinates, got shape {y.shape}")
    val = np.exp(-g.quadratic(y)).astype(complex)
    if g.shift is not None:
        val = val * pairing(g.shift, y, GroupSpec.torus(g.dim))
    return val


def gaussian_tail_bound(eps: float, window: int, dim: int, scale: float = 1.0) -> float:
    """Bound ``scale * sum_{|y|_inf > W} exp(-eps |y|^2)`` over ``Z^dim``.

    The 1-D tail ``sum_{|m| > W} exp(-eps m^2)`` is dominated by a geometric
    series since ``(W+1+j)^2 >= (W+1)^2 + j (2W+3)``.
    """
    if eps <= 0:
        return np.inf
    m = np.arange(-window, window + 1)
    S = np.exp(-eps * m * m).sum()
    T = 2 * np.exp(-eps * (window + 1) ** 2) / -np.expm1(-eps * (2 * window + 3))
    # (S+T)^d - S^d expanded so tiny T does not cancel; pad for rounding
    diff = T * sum((S + T) ** i * S ** (dim - 1 - i) for i in range(dim))
    return float(scale * diff * (1 + 1e-9))


def charfn(mu, y) -> np.ndarray:
    """Characteristic function of ``mu`` at dual element(s) ``y``."""
    if isinstance(mu, TorusCharFn):
        return mu(y)
    y = np.asarray(y)
    vals = pairing(mu.spec.elements, y[..., None, :], mu.spec)
    return vals @ mu.flat


def _same_spec(mu, nu):
    if isinstance(mu, FiniteMeasure) != isinstance(nu, FiniteMeasure):
        raise ValueError("cannot combine finite and torus measures")
    if isinstance(mu, FiniteMeasure) and mu.spec != nu.spec:
        raise ValueError(f"spec mismatch: {mu.spec} vs {nu.spec}")
    if isinstance(mu, TorusCharFn) and mu.dim != nu.dim:
        raise ValueError(f"dimension mismatch: {mu.dim} vs {nu.dim}")


def convolve(mu, nu):
    """``mu * nu``. Torus: product of coefficients on the smaller window.

    The torus tail bound is the sum of the two tail bounds, which is valid when
    coefficients outside the window have modulus at most 1 (true for
    probability measures).
    """
    _same_spec(mu, nu)
    if isinstance(mu, FiniteMeasure):
        spec = mu.spec
        w = np.outer(mu.flat, nu.flat).reshape(-1)
        out = np.bincount(spec.add_table.reshape(-1), weights=w, minlength=spec.order)
        return FiniteMeasure(spec, out, mu.signed or nu.signed)
    W = min(mu.window, nu.window)
    pts = box_points(mu.dim, W)
    vals = (mu(pts) * nu(pts)).reshape((2 * W + 1,) * mu.dim)
    ext = None
    if mu.extension is not None and nu.extension is not None:
        ext = lambda y: mu(y) * nu(y)  # noqa: E731
    logm = None
    if mu.log_modulus is not None and nu.log_modulus is not None:
        logm = lambda y: mu.log_modulus(y) + nu.log_modulus(y)  # noqa: E731
    return TorusCharFn(vals, mu.tail_bound + nu.tail_bound, ext, logm)


def reflect(mu):
    """``mu-bar(B) = mu(-B)``; its characteristic function is the conjugate."""
    if isinstance(mu, FiniteMeasure):
        out = mu.flat[mu.spec.neg_table]
        return FiniteMeasure(mu.spec, out, mu.signed)
    flipped = np.conj(mu.coeffs[(slice(None, None, -1),) * mu.dim])
    ext = None if mu.extension is None else (lambda y: np.conj(mu.extension(-np.asarray(y))))
    logm = None if mu.log_modulus is None else (lambda y: mu.log_modulus(-np.asarray(y)))
    return TorusCharFn(flipped, mu.tail_bound, ext, logm)


def pushforward(alpha: Endo, mu):
    """Image measure ``alpha(mu)``; its characteristic function is ``mu^(alpha~ y)``."""
    if isinstance(mu, FiniteMeasure):
        if alpha.spec != mu.spec:
            raise ValueError(f"spec mismatch: {alpha.spec} vs {mu.spec}")
        out = np.bincount(alpha.index_map, weights=mu.flat, minlength=mu.spec.order)
        return FiniteMeasure(mu.spec, out, mu.signed)
    if alpha.spec != GroupSpec.torus(mu.dim):
        raise ValueError(f"spec mismatch: {alpha.spec} vs T^{mu.dim}")
    W = mu.window
    pts = box_points(mu.dim, W)
    img = alpha.apply_dual(pts)
    if mu.extension is None and not np.all(mu.in_window(img)):
        need = int(np.abs(img).max())
        raise ValueError(
            f"adjoint image of the window reaches |y|_inf = {need} > W = {W}; "
            "supply a larger window"
        )
    vals = mu(img).reshape(mu.coeffs.shape)
    # points of the old window not hit by alpha~(window) may still be hit from outside
    hit = np.zeros(mu.coeffs.shape, dtype=bool)
    inside = mu.in_window(img)
    hit[tuple(np.moveaxis(img[inside] + W, -1, 0))] = True
    tail = mu.tail_bound + float(np.abs(mu.coeffs[~hit]).sum())
    ext = None if mu.extension is None else (lambda y: mu(alpha.apply_dual(y)))
    logm = None if mu.log_modulus is None else (lambda y: mu.log_modulus(alpha.apply_dual(y)))
    return TorusCharFn(vals, tail, ext, logm)


@dataclass(frozen=True)
class DensityReport:
    values: np.ndarray
    grid_min: float
    certified_min: float
    integral: float
    lower_bound: float

    def to_dict(self) -> dict:
        return {
            "grid_n": int(self.values.shape[0]),
            "grid_min": self.grid_min,
            "certified_min": self.certified_min,
            "integral": self.integral,
            "lower_bound": self.lower_bound,
        }


def density_on_grid(f: TorusCharFn, grid_n: int = config.DEFAULT_GRID) -> DensityReport:
    """``rho(t) = sum_y c(y) conj((t, y))`` on the grid ``t = j / grid_n``.

    ``certified_min`` is the grid minimum less the tail bound; ``lower_bound``
    is ``2 * c(0) - sum |c|``, a lower bound for ``rho`` on the whole torus.
    """
    W = f.window
    m = np.arange(-W, W + 1)
    j = np.arange(grid_n)
    E = np.exp(-2j * np.pi * np.outer(j, m) / grid_n)
    rho = f.coeffs
    for axis in range(f.dim):
        rho = np.moveaxis(np.tensordot(E, rho, axes=([1], [axis])), 0, axis)
    if np.max(np.abs(rho.imag)) > 1e-9 * max(1.0, np.max(np.abs(rho.real))):
        raise ValueError("coefficients are not Hermitian-symmetric; density is not real")
    rho = rho.real
    grid_min = float(rho.min())
    c0 = float(f.coeffs[(W,) * f.dim].real)
    return DensityReport(
        values=rho,
        grid_min=grid_min,
        certified_min=grid_min - f.tail_bound,
        integral=float(rho.mean()),
        lower_bound=2 * c0 - f.abs_sum(),
    )
