"""Time-marching drivers for the two fractional-time problems."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ade import ade_average_2d, mirror_2d, prepare_old_2d
from .grid import BoundarySpec, Grid2D, TimeAxis, exact_solution
from .kernels import DistributedOrderKernel, GlKernel, HistoryBuffer, collapse_kernel


class SolverError(RuntimeError):
    pass


class DegenerateOperatorError(SolverError):
    pass


class DivergenceError(SolverError):
    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite values at step {step}")


def _pow(dt, alpha):
    if not dt > 0:
        raise SolverError("time step must be positive")
    return math.exp(alpha * math.log(dt))


# ---------------------------------------------------------------------------
# distributed order


@dataclass
class DistOrderProblem:
    grid: Grid2D
    time: TimeAxis
    J: int
    weight: Callable[[float], float]
    source: Callable  # F(x, y, t)
    psi: Callable  # boundary data psi(x, y, t)
    initial: Callable | None = None  # zero unless given

    @classmethod
    def manufactured(cls, M: int, N: int, T: float = 0.5, J: int = 200) -> "DistOrderProblem":
        ex = exact_solution("dist-order")
        lo, hi = ex.domain
        return cls(
            grid=Grid2D.square(lo, hi, M),
            time=TimeAxis(T, N),
            J=J,
            weight=ex.extras["weight"],
            source=ex.source,
            psi=ex.u,
        )


@dataclass
class DistOrderState:
    problem: DistOrderProblem
    kernel: DistributedOrderKernel
    u: np.ndarray
    history: HistoryBuffer  # difference quotients (u^{k+1} - u^k)/dt, newest first
    psi_now: np.ndarray
    n: int = 0

    @property
    def t(self) -> float:
        return self.problem.time.t(self.n)


def init_dist_order(problem: DistOrderProblem) -> DistOrderState:
    grid, time = problem.grid, problem.time
    kernel = collapse_kernel(problem.weight, problem.J, time.dt if time.N else 1.0, max(time.N, 1))
    X, Y = grid.mesh()
    bc = BoundarySpec.dirichlet(psi=problem.psi)
    psi0 = bc.boundary_field(grid, 0.0)
    if problem.initial is None:
        u = np.zeros(grid.shape)
    else:
        u = np.array(problem.initial(X, Y), dtype=np.float64) * np.ones(grid.shape)
    boundary = grid.boundary_mask()
    if np.max(np.abs(psi0[boundary] - u[boundary]), initial=0.0) > 1e-12 and problem.initial is None:
        warnings.warn("boundary data at t = 0 is inconsistent with zero initial data")
    u = prepare_old_2d(u, grid, bc, 0.0, psi0)
    return DistOrderState(problem, kernel, u, HistoryBuffer(grid.shape), psi0)


def dist_order_rhs(state: DistOrderState, t_half: float | None = None) -> np.ndarray:
    """Explicit right-hand side: source at the half level minus the history convolution."""
    prob = state.problem
    n = state.n
    if len(state.history) != n:
        raise SolverError(f"history holds {len(state.history)} entries, expected {n}")
    if t_half is None:
        t_half = (n + 0.5) * prob.time.dt
    X, Y = prob.grid.mesh()
    F = np.asarray(prob.source(X, Y, t_half), dtype=np.float64) * np.ones(prob.grid.shape)
    if n == 0:
        return F
    return F - state.history.weighted_sum(state.kernel.kappa[1 : n + 1])


def dist_order_step(state: DistOrderState) -> DistOrderState:
    prob = state.problem
    grid, dt = prob.grid, prob.time.dt
    mu = state.kernel.mu
    if not mu > 0:
        raise DegenerateOperatorError(f"leading kernel weight must be positive, got {mu}")
    b = dist_order_rhs(state)
    t_new = prob.time.t(state.n + 1)
    psi_new = BoundarySpec.dirichlet(psi=prob.psi).boundary_field(grid, t_new)
    u = state.u
    rhs = u + (dt / mu) * b
    rx = dt / (mu * grid.dx**2)
    ry = dt / (mu * grid.dy**2)
    u_new, _ = ade_average_2d(u, rhs, 1.0, rx, ry, False, psi_new)
    if not np.all(np.isfinite(u_new)):
        raise DivergenceError(state.n + 1)
    state.history.push((u_new - u) / dt)
    state.u = u_new
    state.psi_now = psi_new
    state.n += 1
    return state


# ---------------------------------------------------------------------------
# sub-diffusive activator-inhibitor system


@dataclass
class TuringProblem:
    grid: Grid2D
    time: TimeAxis
    alpha: float = 0.92
    beta: float = 0.88
    D: float = 0.516
    delta: float = 2.0
    a11: float = 0.899
    a12: float = 1.0
    a21: float = -0.899
    a22: float = -0.91
    r1: float = 3.5
    r2: float = 0.0
    noise: float = 0.1
    seed: int = 0
    max_history: int | None = 800
    threshold: float = 1e-7

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")

    @classmethod
    def standard_setup(cls, nodes: int = 100, steps: int = 20000, dt: float = 0.08, **kw) -> "TuringProblem":
        """Unit-spacing square with ``nodes`` nodes per side."""
        grid = Grid2D.square(0.0, float(nodes - 1), nodes - 1)
        return cls(grid=grid, time=TimeAxis(steps * dt, steps), **kw)


@dataclass
class TuringState:
    problem: TuringProblem
    u: np.ndarray
    v: np.ndarray
    u0: np.ndarray
    v0: np.ndarray
    hist_u: HistoryBuffer
    hist_v: HistoryBuffer
    weights_u: np.ndarray
    weights_v: np.ndarray
    n: int = 0


def initial_noise(problem: TuringProblem) -> tuple[np.ndarray, np.ndarray]:
    """Uniform noise on ``[-noise, noise]`` from a seeded Philox generator."""
    rng = np.random.Generator(np.random.Philox(problem.seed))
    shape = problem.grid.shape
    u = rng.uniform(-problem.noise, problem.noise, size=shape) if problem.noise else np.zeros(shape)
    v = rng.uniform(-problem.noise, problem.noise, size=shape) if problem.noise else np.zeros(shape)
    return mirror_2d(u), mirror_2d(v)


def init_turing(problem: TuringProblem) -> TuringState:
    u, v = initial_noise(problem)
    cap = problem.max_history or problem.time.N
    ku = GlKernel(problem.alpha, problem.max_history, problem.threshold)
    kv = GlKernel(problem.beta, problem.max_history, problem.threshold)
    shape = problem.grid.shape
    return TuringState(
        problem, u.copy(), v.copy(), u, v,
        HistoryBuffer(shape, problem.max_history), HistoryBuffer(shape, problem.max_history),
        ku.weights(max(cap, 1)), kv.weights(max(cap, 1)),
    )


def _history_term(hist: HistoryBuffer, weights, s0):
    n = len(hist)
    if n == 0:
        return np.zeros_like(s0)
    a = weights[:n]
    return hist.weighted_sum(a) - a.sum() * s0


def turing_step(state: TuringState) -> TuringState:
    """One step of both components; the ``v`` update sees ``u^n`` only."""
    p = state.problem
    grid, dt = p.grid, p.time.dt
    ta, tb = _pow(dt, p.alpha), _pow(dt, p.beta)
    # overflow surfaces as non-finite values and is reported below
    with np.errstate(over="ignore", invalid="ignore"):
        u, v = state.u, state.v
        uv = u * v
        cubic = p.a11 * p.r1 * u * v * v

        rhs_u = state.u0 + ta * (0.5 * p.a11 * u + p.a12 * v - p.r2 * uv - cubic)
        rhs_u -= _history_term(state.hist_u, state.weights_u, state.u0)
        rhs_v = state.v0 + tb * (p.a21 * u + 0.5 * p.a22 * v + p.r2 * uv + cubic)
        rhs_v -= _history_term(state.hist_v, state.weights_v, state.v0)

        cu, cv = p.D * p.delta, p.delta
        zeros = np.zeros(grid.shape)
        u_new, _ = ade_average_2d(
            u, rhs_u, 1.0 - 0.5 * p.a11 * ta, cu * ta / grid.dx**2, cu * ta / grid.dy**2, True, zeros
        )
        v_new, _ = ade_average_2d(
            v, rhs_v, 1.0 - 0.5 * p.a22 * tb, cv * tb / grid.dx**2, cv * tb / grid.dy**2, True, zeros
        )
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
        raise DivergenceError(state.n + 1)
    state.hist_u.push(u_new)
    state.hist_v.push(v_new)
    state.u, state.v = u_new, v_new
    state.n += 1
    return state


def pattern_amplitude(field: np.ndarray) -> float:
    """Spatial standard deviation over interior nodes."""
    return float(np.std(field[1:-1, 1:-1]))


# ---------------------------------------------------------------------------
# marching


class SnapshotObserver:
    """Keeps copies of the fields at a cadence and/or listed steps.

    The cadence fires at ``n = k, 2k, ...``; the initial state is captured
    only when ``0`` is listed explicitly.
    """

    def __init__(self, every: int | None = None, steps: Sequence[int] = ()):
        self.every = every
        self.steps = set(steps)
        self.snapshots: dict[int, dict[str, np.ndarray]] = {}

    def wants(self, n: int) -> bool:
        return n in self.steps or (bool(self.every) and n > 0 and n % self.every == 0)

    def __call__(self, n, state):
        if self.wants(n):
            self.snapshots[n] = {name: f.copy() for name, f in fields_of(state).items()}


class NormTrace:
    """Records the pattern amplitude (and L2 size) of each field every step."""

    def __init__(self, every: int = 1):
        self.every = every
        self.rows: list[tuple] = []

    def __call__(self, n, state):
        if n % self.every == 0:
            row = [n]
            for f in fields_of(state).values():
                row += [pattern_amplitude(f), float(np.sqrt(np.mean(f[1:-1, 1:-1] ** 2)))]
            self.rows.append(tuple(row))


def fields_of(state) -> dict[str, np.ndarray]:
    if isinstance(state, TuringState):
        return {"u": state.u, "v": state.v}
    return {"u": state.u}


def run_to_final(problem, observers: Sequence[Callable] = ()):
    """March from the initial state through all ``N`` steps.

    Observers are called as ``obs(n, state)`` for ``n = 0`` and after every
    step. Returns the final state; a :class:`DivergenceError` carries the
    failing step index.
    """
    if isinstance(problem, TuringProblem):
        state, step = init_turing(problem), turing_step
    elif isinstance(problem, DistOrderProblem):
        state, step = init_dist_order(problem), dist_order_step
    else:
        raise TypeError(f"unsupported problem type {type(problem).__name__}")
    for obs in observers:
        obs(0, state)
    for _ in range(problem.time.N):
        step(state)
        for obs in observers:
            obs(state.n, state)
    return state
