"""Reference computations that never touch the sweep kernels.

Everything here uses generic dense linear algebra or plain quadrature so it
can serve as ground truth for the explicit solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

MAX_DENSE_UNKNOWNS = 4096


@dataclass(frozen=True)
class DenseOperator:
    """Square matrix over interior unknowns plus the grid it came from."""

    matrix: np.ndarray
    shape: tuple[int, ...]  # interior shape
    spacing: tuple[float, ...]

    def __post_init__(self):
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n):
            raise ValueError("operator must be square")
        if n > MAX_DENSE_UNKNOWNS:
            raise ValueError(f"dense operator limited to {MAX_DENSE_UNKNOWNS} unknowns")


def laplacian_1d(M: int, dx: float) -> DenseOperator:
    n = M - 1
    A = (np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) / dx**2
    return DenseOperator(A, (n,), (dx,))


def laplacian_2d(M1: int, M2: int, dx: float, dy: float) -> DenseOperator:
    """Five-point Laplacian, lexicographic ordering with ``i`` fastest."""
    n1, n2 = M1 - 1, M2 - 1
    if n1 * n2 > MAX_DENSE_UNKNOWNS:
        raise ValueError(f"dense operator limited to {MAX_DENSE_UNKNOWNS} unknowns")
    Ix, Iy = np.eye(n1), np.eye(n2)
    Tx = laplacian_1d(M1, dx).matrix
    Ty = laplacian_1d(M2, dy).matrix
    # k = i + n1 * j
    A = np.kron(Iy, Tx) + np.kron(Ty, Ix)
    return DenseOperator(A, (n1, n2), (dx, dy))


def _split(A):
    Dg = np.diag(np.diag(A))
    return np.tril(A, -1) + 0.5 * Dg, np.triu(A, 1) + 0.5 * Dg


def dense_triangular_split_step(u, dt, A, b=None):
    """Average of the lower- and upper-triangular sub-step solves.

    ``u`` holds interior unknowns in the operator's ordering; ``b`` is an
    optional constant source vector.
    """
    A = A.matrix if isinstance(A, DenseOperator) else np.asarray(A)
    u = np.asarray(u, dtype=np.float64)
    b = np.zeros_like(u) if b is None else np.asarray(b, dtype=np.float64)
    B, C = _split(A)
    I = np.eye(A.shape[0])
    lower, upper = I - dt * B, I - dt * C
    if np.any(np.diag(lower) == 0):
        raise np.linalg.LinAlgError("singular triangular factor")
    p = scipy.linalg.solve_triangular(lower, u + dt * (C @ u) + dt * b, lower=True)
    q = scipy.linalg.solve_triangular(upper, u + dt * (B @ u) + dt * b, lower=False)
    return 0.5 * (p + q)


def ade_operator_matrix(dt, A):
    """The same one-step map written with explicit inverses."""
    A = A.matrix if isinstance(A, DenseOperator) else np.asarray(A)
    B, C = _split(A)
    I = np.eye(A.shape[0])
    return 0.5 * (np.linalg.inv(I - dt * B) @ (I + dt * C) + np.linalg.inv(I - dt * C) @ (I + dt * B))


def _reverse_j_permutation(n1, n2):
    # position in i-ascending / j-descending ordering for each lexicographic index
    k = np.arange(n1 * n2)
    i, j = k % n1, k // n1
    return i + n1 * (n2 - 1 - j)


def dense_ade_step_2d(u_interior, dt, op: DenseOperator):
    """Four-sweep 2D step via two dense orderings.

    The ascending/ascending and descending/descending sweeps are the two
    triangular halves in lexicographic order; the mixed pairs are the halves
    after reversing ``j``. ``u_interior`` has shape ``(M1-1, M2-1)``.
    """
    n1, n2 = op.shape
    vec = np.asarray(u_interior, dtype=np.float64).reshape(n1 * n2, order="F")
    perm = _reverse_j_permutation(n1, n2)
    P = np.zeros((n1 * n2, n1 * n2))
    P[perm, np.arange(n1 * n2)] = 1.0
    first = dense_triangular_split_step(vec, dt, op.matrix)
    second = P.T @ dense_triangular_split_step(P @ vec, dt, P @ op.matrix @ P.T)
    return (0.5 * (first + second)).reshape((n1, n2), order="F")


def crank_nicolson_step(u, dt, A, b_half=None):
    """Solve ``(I - dt/2 A) u' = (I + dt/2 A) u + dt b_half`` by dense LU."""
    A = A.matrix if isinstance(A, DenseOperator) else np.asarray(A)
    u = np.asarray(u, dtype=np.float64)
    b = np.zeros_like(u) if b_half is None else np.asarray(b_half, dtype=np.float64)
    I = np.eye(A.shape[0])
    try:
        return scipy.linalg.solve(I - 0.5 * dt * A, u + 0.5 * dt * (A @ u) + dt * b)
    except scipy.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular Crank-Nicolson system") from exc


def crank_nicolson_heat_1d(grid, N, T, exact):
    """Reference solve of a 1D Dirichlet manufactured problem; full-grid result."""
    dt = T / N
    x, dx = grid.x, grid.dx
    op = laplacian_1d(grid.M, dx)
    f, g = exact.boundary.left, exact.boundary.right
    u = np.asarray(exact.initial(x), dtype=np.float64)[1:-1]
    for n in range(N):
        t = n * dt
        b = np.asarray(exact.source(x[1:-1], t + 0.5 * dt), dtype=np.float64).copy()
        b[0] += 0.5 * (f(t) + f(t + dt)) / dx**2
        b[-1] += 0.5 * (g(t) + g(t + dt)) / dx**2
        u = crank_nicolson_step(u, dt, op, b)
    return np.concatenate([[f(T)], u, [g(T)]])


def caputo_direct_quadrature(u, alpha, t, du=None, panels=10_000):
    """Caputo derivative of order ``alpha`` in (0, 1) at time ``t``.

    Evaluates ``1/Gamma(1-alpha) int_0^t (t-s)^(-alpha) u'(s) ds`` after the
    substitution ``s = t - r**(1/(1-alpha))``, which removes the endpoint
    singularity, using the composite midpoint rule. ``du`` is the derivative
    of ``u``; a central difference is used when it is omitted.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"order must lie in (0, 1), got {alpha}")
    if du is None:
        h = 1e-6

        def du(s):
            return (u(s + h) - u(s - h)) / (2 * h)

    if t == 0:
        return 0.0
    upper = t ** (1.0 - alpha)
    r = (np.arange(panels) + 0.5) * (upper / panels)
    s = t - r ** (1.0 / (1.0 - alpha))
    vals = np.asarray(du(s), dtype=np.float64) * np.ones_like(s)
    integral = vals.sum() * (upper / panels) / (1.0 - alpha)
    return integral / math.gamma(1.0 - alpha)


def first_derivative(f, x, h=1e-4):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def second_derivative(f, x, h=1e-4):
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def finite_difference_check(f, point, h=1e-4):
    """Central-difference first and second derivative of a scalar function."""
    return first_derivative(f, point, h), second_derivative(f, point, h)


def heat_residual(exact, point, t, h=1e-4):
    """``u_t - (lap u + b)`` for a catalog entry, via central differences."""
    if exact.dim == 1:
        (x,) = point
        ut = first_derivative(lambda s: exact.u(x, s), t, h)
        uxx = second_derivative(lambda s: exact.u(s, t), x, h)
        return ut - (uxx + exact.source(x, t))
    x, y = point
    ut = first_derivative(lambda s: exact.u(x, y, s), t, h)
    uxx = second_derivative(lambda s: exact.u(s, y, t), x, h)
    uyy = second_derivative(lambda s: exact.u(x, s, t), y, h)
    return ut - (uxx + uyy + exact.source(x, y, t))


def distributed_order_residual(exact, point, t, nodes=24, h=1e-4):
    """``int w(g) D^g u dg - (lap u + F)`` for the distributed-order entry.

    Orders in (1, 2) are handled as the order-(g-1) Caputo derivative of
    ``u_t``; the ``g`` integral uses Gauss-Legendre nodes in the open interval.
    """
    x, y = point
    weight = exact.extras["weight"]

    def ut(s):
        return first_derivative(lambda r: exact.u(x, y, r), s, h)

    def utt(s):
        return second_derivative(lambda r: exact.u(x, y, r), s, h)

    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for xi, wi in zip(gl_x, gl_w):
        gamma = 1.5 + 0.5 * xi
        total += 0.5 * wi * weight(gamma) * caputo_direct_quadrature(ut, gamma - 1.0, t, du=utt)
    lap = second_derivative(lambda s: exact.u(s, y, t), x, h) + second_derivative(
        lambda s: exact.u(x, s, t), y, h
    )
    return total - (lap + exact.source(x, y, t))
