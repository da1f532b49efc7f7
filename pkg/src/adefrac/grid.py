"""Uniform grids, time axes, boundary conditions and discrete norms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class GridError(ValueError):
    """Raised for degenerate or inconsistent discretization parameters."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with ``M + 1`` nodes ``x_i = domain_min + i * dx``."""

    domain_min: float
    domain_max: float
    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise GridError(f"cell count must be an integer >= 2, got {self.M}")
        if not self.domain_max > self.domain_min:
            raise GridError("domain_max must exceed domain_min")

    @property
    def dx(self) -> float:
        return (self.domain_max - self.domain_min) / self.M

    @property
    def x(self) -> np.ndarray:
        # linspace pins both endpoints exactly
        return np.linspace(self.domain_min, self.domain_max, self.M + 1)

    @property
    def node_count(self) -> int:
        return self.M + 1

    def refined(self) -> "Grid1D":
        return Grid1D(self.domain_min, self.domain_max, 2 * self.M)


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product grid; arrays are indexed ``[i, j]`` with ``i`` along x."""

    xgrid: Grid1D
    ygrid: Grid1D

    @classmethod
    def square(cls, lo: float, hi: float, M: int) -> "Grid2D":
        return cls(Grid1D(lo, hi, M), Grid1D(lo, hi, M))

    @property
    def M1(self) -> int:
        return self.xgrid.M

    @property
    def M2(self) -> int:
        return self.ygrid.M

    @property
    def dx(self) -> float:
        return self.xgrid.dx

    @property
    def dy(self) -> float:
        return self.ygrid.dx

    @property
    def shape(self) -> tuple[int, int]:
        return (self.M1 + 1, self.M2 + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xgrid.x, self.ygrid.x, indexing="ij")

    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[1:-1, 1:-1] = True
        return mask

    def boundary_mask(self) -> np.ndarray:
        return ~self.interior_mask()


@dataclass(frozen=True)
class TimeAxis:
    T: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise GridError(f"step count must be a non-negative integer, got {self.N}")
        if self.N > 0 and not self.T > 0:
            raise GridError("final time must be positive")

    @property
    def dt(self) -> float:
        return self.T / self.N

    def t(self, n: int | float) -> float:
        if n == self.N:
            return float(self.T)
        return n * self.dt


class BoundaryKind(enum.Enum):
    ZERO_DIRICHLET = "zero-dirichlet"
    TIME_DIRICHLET = "time-dirichlet"
    ZERO_NEUMANN = "zero-neumann"


def _zero_1d(t):
    return 0.0


def _zero_2d(x, y, t):
    return np.zeros(np.broadcast(x, y).shape)


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary regime plus boundary data.

    In 1D, ``left(t)`` and ``right(t)`` give Dirichlet values at ``x_0`` and
    ``x_M``. In 2D, ``psi(x, y, t)`` is evaluated on the boundary nodes. Zero
    Dirichlet carries identically-zero data and follows the same code path
    as the time-dependent case.
    """

    kind: BoundaryKind
    left: Callable[[float], float] = _zero_1d
    right: Callable[[float], float] = _zero_1d
    psi: Callable = _zero_2d

    @classmethod
    def zero_dirichlet(cls) -> "BoundarySpec":
        return cls(BoundaryKind.ZERO_DIRICHLET)

    @classmethod
    def dirichlet(cls, left=None, right=None, psi=None) -> "BoundarySpec":
        return cls(
            BoundaryKind.TIME_DIRICHLET,
            left=left or _zero_1d,
            right=right or _zero_1d,
            psi=psi or _zero_2d,
        )

    @classmethod
    def zero_neumann(cls) -> "BoundarySpec":
        return cls(BoundaryKind.ZERO_NEUMANN)

    @property
    def is_neumann(self) -> bool:
        return self.kind is BoundaryKind.ZERO_NEUMANN

    def boundary_field(self, grid: Grid2D, t: float) -> np.ndarray:
        """Full-grid array holding ``psi(., ., t)`` (interior entries included)."""
        X, Y = grid.mesh()
        return np.asarray(self.psi(X, Y, t), dtype=np.float64) * np.ones(grid.shape)


def _interior(err: np.ndarray) -> np.ndarray:
    err = np.asarray(err, dtype=np.float64)
    if err.ndim == 1:
        inner = err[1:-1]
    elif err.ndim == 2:
        inner = err[1:-1, 1:-1]
    else:
        raise GridError("fields must be one- or two-dimensional")
    if inner.size == 0:
        raise GridError("degenerate grid")
    return inner


def _spacing(err: np.ndarray, grid) -> float:
    if isinstance(grid, Grid1D):
        return grid.dx
    if isinstance(grid, Grid2D):
        return grid.dx * grid.dy
    # bare spacing(s)
    h = np.atleast_1d(np.asarray(grid, dtype=np.float64))
    if h.size != err.ndim:
        raise GridError("spacing count does not match field dimension")
    return float(np.prod(h))


def l2_norm(err: np.ndarray, grid) -> float:
    """Grid-scaled L2 norm over interior nodes.

    ``grid`` is a :class:`Grid1D`/:class:`Grid2D` or the spacing(s) directly.
    The sum runs sequentially in C order so results are reproducible.
    """
    inner = _interior(err)
    total = 0.0
    for value in inner.ravel():
        total += value * value
    return math.sqrt(_spacing(inner, grid) * total)


def linf_norm(err: np.ndarray) -> float:
    """Maximum absolute value over interior nodes."""
    return float(np.max(np.abs(_interior(err))))


def convergence_rates(errors: Sequence[tuple[float, float]]) -> list[float]:
    """Observed orders ``log2(e_k / e_{k+1})`` along a step-halving ladder."""
    values = [float(e) for _, e in errors]
    for e in values:
        if not (e > 0 and math.isfinite(e)):
            raise ValueError("invalid error magnitude")
    return [math.log2(a / b) for a, b in zip(values[:-1], values[1:])]


@dataclass(frozen=True)
class ExactSolution:
    """Manufactured solution for ``u_t = lap(u) + b``.

    ``u``, ``source``, ``initial`` take array coordinates (``x`` in 1D,
    ``x, y`` in 2D) followed by ``t``. ``boundary`` is the matching
    :class:`BoundarySpec`; ``domain`` is ``(lo, hi)`` per axis.
    """

    name: str
    dim: int
    domain: tuple[float, float]
    u: Callable
    source: Callable
    initial: Callable
    boundary: BoundarySpec
    extras: dict = field(default_factory=dict)


def _heat1d_cos() -> ExactSolution:
    return ExactSolution(
        name="heat1d-dirichlet",
        dim=1,
        domain=(-math.pi, math.pi),
        u=lambda x, t: np.cos(x + t),
        source=lambda x, t: np.cos(x + t) - np.sin(x + t),
        initial=lambda x: np.cos(x),
        boundary=BoundarySpec.dirichlet(
            left=lambda t: math.cos(t - math.pi),
            right=lambda t: math.cos(t + math.pi),
        ),
    )


def _heat2d_sin() -> ExactSolution:
    def psi(x, y, t):
        return t * t * np.sin(x + y)

    return ExactSolution(
        name="heat2d-dirichlet",
        dim=2,
        domain=(0.0, math.pi),
        u=psi,
        source=lambda x, y, t: 2.0 * (t + t * t) * np.sin(x + y),
        initial=lambda x, y: np.zeros(np.broadcast(x, y).shape),
        boundary=BoundarySpec.dirichlet(psi=psi),
    )


def _heat1d_neumann() -> ExactSolution:
    pi = math.pi
    return ExactSolution(
        name="heat1d-neumann",
        dim=1,
        domain=(0.0, 1.0),
        u=lambda x, t: t * np.cos(pi * x),
        source=lambda x, t: np.cos(pi * x) + pi * pi * t * np.cos(pi * x),
        initial=lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
        boundary=BoundarySpec.zero_neumann(),
    )


def _dist_order() -> ExactSolution:
    def psi(x, y, t):
        return 64.0 * t**6 * np.sin(x + y)

    def source(x, y, t):
        return 128.0 * t**4 * np.sin(x + y) * (360.0 * (t - 1.0) / math.log(t) + t * t)

    return ExactSolution(
        name="dist-order",
        dim=2,
        domain=(0.0, math.pi),
        u=psi,
        source=source,
        initial=lambda x, y: np.zeros(np.broadcast(x, y).shape),
        boundary=BoundarySpec.dirichlet(psi=psi),
        extras={"weight": lambda g: math.gamma(7.0 - g)},
    )


CATALOG = {
    "heat1d-dirichlet": _heat1d_cos,
    "heat2d-dirichlet": _heat2d_sin,
    "heat1d-neumann": _heat1d_neumann,
    "dist-order": _dist_order,
}


def exact_solution(name: str) -> ExactSolution:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"no exact solution for experiment {name!r}") from None
