"""Alternating direction explicit sweeps and one-step updates.

Every sweep is a pointwise forward (or backward) substitution: the node
being updated reads its already-updated neighbour behind the sweep front at
the new level and the neighbour ahead at the old level.
"""

from __future__ import annotations

import enum
from typing import NamedTuple

import numba as nb
import numpy as np

from .grid import BoundarySpec, Grid1D, Grid2D

MAX_DENSE_M = 200


class ConfigurationError(ValueError):
    pass


class Order(enum.Enum):
    ASCENDING = 1
    DESCENDING = -1


class SweepDirection2D(NamedTuple):
    x_dir: Order
    y_dir: Order


A, D = Order.ASCENDING, Order.DESCENDING
# p, q, v, w sweeps
SWEEPS_2D = (
    SweepDirection2D(A, A),
    SweepDirection2D(A, D),
    SweepDirection2D(D, A),
    SweepDirection2D(D, D),
)


def _check(dt, M):
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    if M < 2:
        raise ConfigurationError("need at least one interior node")


# ---------------------------------------------------------------------------
# 1D


@nb.njit(cache=True)
def _forward_kernel(u, b, r, dt, p, start):
    n = u.shape[0]
    for i in range(start, n - 1):
        p[i] = (u[i] + r * (p[i - 1] - u[i] + u[i + 1]) + dt * b[i]) / (1.0 + r)


@nb.njit(cache=True)
def _backward_kernel(u, b, r, dt, q, stop):
    n = u.shape[0]
    for i in range(stop, 0, -1):
        q[i] = (u[i] + r * (u[i - 1] - u[i] + q[i + 1]) + dt * b[i]) / (1.0 + r)


def prepare_old_1d(u, bc: BoundarySpec, t):
    """Copy of ``u^n`` with its boundary entries set per ``bc`` at time ``t``."""
    w = np.array(u, dtype=np.float64)
    if bc.is_neumann:
        w[0] = w[1]
        w[-1] = w[-2]
    else:
        w[0] = bc.left(t)
        w[-1] = bc.right(t)
    return w


def sweep_forward_1d(u, dt, dx, bc: BoundarySpec, b_half, t):
    """Ascending sweep ``p^{n+1}`` from ``u^n`` given at time ``t``.

    ``b_half`` is the source at ``t + dt/2`` on all nodes (boundary entries
    are ignored).
    """
    u = prepare_old_1d(u, bc, t)
    M = u.shape[0] - 1
    _check(dt, M)
    b = np.asarray(b_half, dtype=np.float64)
    r = dt / dx**2
    p = np.empty_like(u)
    if bc.is_neumann:
        # closure forcing p_0 = p_1; it is exactly the i = 1 solve
        p[0] = (1.0 - r) * u[1] + r * u[2] + dt * b[1]
        p[1] = p[0]
        _forward_kernel(u, b, r, dt, p, 2)
        p[M] = p[M - 1]
    else:
        p[0] = bc.left(t + dt)
        p[M] = bc.right(t + dt)
        _forward_kernel(u, b, r, dt, p, 1)
    return p


def sweep_backward_1d(u, dt, dx, bc: BoundarySpec, b_half, t):
    """Descending sweep ``q^{n+1}``; mirror image of :func:`sweep_forward_1d`."""
    u = prepare_old_1d(u, bc, t)
    M = u.shape[0] - 1
    _check(dt, M)
    b = np.asarray(b_half, dtype=np.float64)
    r = dt / dx**2
    q = np.empty_like(u)
    if bc.is_neumann:
        # source taken at the adjacent interior node, so q_{M-1} = q_M holds
        q[M] = r * u[M - 2] + (1.0 - r) * u[M - 1] + dt * b[M - 1]
        q[M - 1] = q[M]
        _backward_kernel(u, b, r, dt, q, M - 2)
        q[0] = q[1]
    else:
        q[0] = bc.left(t + dt)
        q[M] = bc.right(t + dt)
        _backward_kernel(u, b, r, dt, q, M - 1)
    return q


def fill_boundary_1d(u, bc: BoundarySpec, t):
    if bc.is_neumann:
        u[0] = u[1]
        u[-1] = u[-2]
    else:
        u[0] = bc.left(t)
        u[-1] = bc.right(t)
    return u


def ade_step_1d(u, dt, dx, bc: BoundarySpec, b_half, t):
    """Advance ``u`` from ``t`` to ``t + dt`` for ``u_t = u_xx + b``."""
    p = sweep_forward_1d(u, dt, dx, bc, b_half, t)
    q = sweep_backward_1d(u, dt, dx, bc, b_half, t)
    return fill_boundary_1d(0.5 * (p + q), bc, t + dt)


def forward_residual_1d(p, u, dt, dx, b_half, bc: BoundarySpec, t):
    """Residual of the ascending-sweep difference equation at interior nodes."""
    u = prepare_old_1d(u, bc, t)
    b = np.asarray(b_half, dtype=np.float64)
    lhs = (p[1:-1] - u[1:-1]) / dt
    rhs = (p[:-2] - p[1:-1] - u[1:-1] + u[2:]) / dx**2 + b[1:-1]
    return lhs - rhs


def solve_heat_1d(grid: Grid1D, N, T, bc: BoundarySpec, source, initial, on_step=None):
    """March ``u_t = u_xx + source(x, t)`` to ``T`` with ``N`` steps."""
    dt = T / N
    x = grid.x
    u = fill_boundary_1d(np.array(initial(x), dtype=np.float64), bc, 0.0)
    for n in range(N):
        t = n * dt
        b = source(x, t + 0.5 * dt)
        u = ade_step_1d(u, dt, grid.dx, bc, b, t)
        if on_step is not None:
            on_step(n + 1, u)
    return u


# ---------------------------------------------------------------------------
# 2D


@nb.njit(cache=True)
def _sweep2d_kernel(u, rhs, a, rx, ry, xstep, ystep, neumann, s):
    """Generic pointwise solve of one 2D sweep.

    Solves ``a s + rx (s - xn + u - xo) + ry (s - yn + u - yo) = rhs`` at each
    interior node, where ``xn``/``yn`` are the neighbours already swept (read
    from ``s``) and ``xo``/``yo`` the ones ahead (read from ``u``). With
    ``neumann`` a swept neighbour on the boundary is the node itself.
    """
    n1 = u.shape[0] - 1
    n2 = u.shape[1] - 1
    for ii in range(1, n1):
        i = ii if xstep > 0 else n1 - ii
        ib = i - xstep
        ia = i + xstep
        xghost = neumann and (ib == 0 or ib == n1)
        for jj in range(1, n2):
            j = jj if ystep > 0 else n2 - jj
            jb = j - ystep
            ja = j + ystep
            yghost = neumann and (jb == 0 or jb == n2)
            uij = u[i, j]
            num = rhs[i, j] + rx * (u[ia, j] - uij) + ry * (u[i, ja] - uij)
            den = a + rx + ry
            if xghost:
                den -= rx
            else:
                num += rx * s[ib, j]
            if yghost:
                den -= ry
            else:
                num += ry * s[i, jb]
            s[i, j] = num / den


def mirror_2d(u):
    u[0, :] = u[1, :]
    u[-1, :] = u[-2, :]
    u[:, 0] = u[:, 1]
    u[:, -1] = u[:, -2]
    return u


def prepare_old_2d(u, grid: Grid2D, bc: BoundarySpec, t, psi_t=None):
    """Copy of ``u^n`` with boundary entries set per ``bc`` at time ``t``."""
    w = np.array(u, dtype=np.float64)
    if bc.is_neumann:
        return mirror_2d(w)
    psi = bc.boundary_field(grid, t) if psi_t is None else psi_t
    inner = w[1:-1, 1:-1].copy()
    w[...] = psi
    w[1:-1, 1:-1] = inner
    return w


def sweep_2d(u, rhs, a, rx, ry, direction: SweepDirection2D, neumann, boundary_new):
    """Run one sweep on a prepared old field.

    ``boundary_new`` supplies Dirichlet values at the new level (ignored for
    Neumann, where boundary entries mirror their neighbours afterwards).
    """
    s = np.array(boundary_new, dtype=np.float64, copy=True)
    _sweep2d_kernel(
        u, rhs, float(a), float(rx), float(ry),
        direction.x_dir.value, direction.y_dir.value, bool(neumann), s,
    )
    if neumann:
        mirror_2d(s)
    return s


def ade_average_2d(u, rhs, a, rx, ry, neumann, boundary_new):
    """Average of the four sweeps; returns ``(u_new, [p, q, v, w])``."""
    sweeps = [sweep_2d(u, rhs, a, rx, ry, d, neumann, boundary_new) for d in SWEEPS_2D]
    out = 0.25 * (sweeps[0] + sweeps[1] + sweeps[2] + sweeps[3])
    if neumann:
        mirror_2d(out)
    else:
        out[0, :] = boundary_new[0, :]
        out[-1, :] = boundary_new[-1, :]
        out[:, 0] = boundary_new[:, 0]
        out[:, -1] = boundary_new[:, -1]
    return out, sweeps


def _heat_setup_2d(u_old, grid, bc, b_half, dt, t, coeff, psi_old, psi_new):
    if grid.M1 < 2 or grid.M2 < 2:
        raise ConfigurationError("need at least one interior node per axis")
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    u = prepare_old_2d(u_old, grid, bc, t, psi_old)
    if bc.is_neumann:
        new = np.zeros(grid.shape)
    else:
        new = bc.boundary_field(grid, t + dt) if psi_new is None else psi_new
    rhs = u + dt * np.asarray(b_half, dtype=np.float64)
    return u, rhs, coeff * dt / grid.dx**2, coeff * dt / grid.dy**2, new


def ade_sweep_2d(u_old, direction, grid: Grid2D, bc: BoundarySpec, b_half, dt, t, coeff=1.0):
    """Single directional sweep for ``u_t = coeff * lap(u) + b``."""
    u, rhs, rx, ry, new = _heat_setup_2d(u_old, grid, bc, b_half, dt, t, coeff, None, None)
    return sweep_2d(u, rhs, 1.0, rx, ry, direction, bc.is_neumann, new)


def ade_step_2d(u_old, grid: Grid2D, bc: BoundarySpec, b_half, dt, t, coeff=1.0,
                psi_old=None, psi_new=None):
    """Advance ``u_t = coeff * lap(u) + b`` from ``t`` to ``t + dt``.

    ``psi_old``/``psi_new`` optionally pass precomputed Dirichlet boundary
    fields at ``t`` and ``t + dt``.
    """
    u, rhs, rx, ry, new = _heat_setup_2d(u_old, grid, bc, b_half, dt, t, coeff, psi_old, psi_new)
    out, _ = ade_average_2d(u, rhs, 1.0, rx, ry, bc.is_neumann, new)
    return out


def solve_heat_2d(grid: Grid2D, N, T, bc: BoundarySpec, source, initial, coeff=1.0):
    dt = T / N
    X, Y = grid.mesh()
    psi_old = None if bc.is_neumann else bc.boundary_field(grid, 0.0)
    u = np.array(initial(X, Y), dtype=np.float64) * np.ones(grid.shape)
    u = prepare_old_2d(u, grid, bc, 0.0, psi_old)
    for n in range(N):
        t = n * dt
        psi_new = None if bc.is_neumann else bc.boundary_field(grid, t + dt)
        b = source(X, Y, t + 0.5 * dt)
        u = ade_step_2d(u, grid, bc, b, dt, t, coeff, psi_old, psi_new)
        psi_old = psi_new
    return u


# ---------------------------------------------------------------------------
# dense operator (analysis tool)


def second_difference_matrix(M, dx):
    """``(M-1) x (M-1)`` zero-Dirichlet second-difference matrix over ``dx**2``."""
    n = M - 1
    A = np.zeros((n, n))
    idx = np.arange(n)
    A[idx, idx] = -2.0
    A[idx[1:], idx[:-1]] = 1.0
    A[idx[:-1], idx[1:]] = 1.0
    return A / dx**2


def build_step_matrix_1d(M, dt, dx):
    """Dense one-step ADE update matrix for zero Dirichlet data."""
    if M > MAX_DENSE_M:
        raise ConfigurationError(f"dense step matrix limited to M <= {MAX_DENSE_M}")
    _check(dt, M)
    A = second_difference_matrix(M, dx)
    Dg = np.diag(np.diag(A))
    B = np.tril(A, -1) + 0.5 * Dg
    C = np.triu(A, 1) + 0.5 * Dg
    I = np.eye(M - 1)
    first = np.linalg.solve(I - dt * B, I + dt * C)
    second = np.linalg.solve(I - dt * C, I + dt * B)
    return 0.5 * (first + second)


def spectral_radius(matrix):
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


def apply_step_equivalence_check(u, matrix, dt, dx):
    """Max deviation between the sweep step and ``matrix @ u`` (zero data)."""
    u = np.asarray(u, dtype=np.float64)
    bc = BoundarySpec.zero_dirichlet()
    stepped = ade_step_1d(u, dt, dx, bc, np.zeros_like(u), 0.0)
    return float(np.max(np.abs(stepped[1:-1] - matrix @ u[1:-1])))
