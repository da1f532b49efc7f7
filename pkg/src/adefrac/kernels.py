"""Weight sequences and history storage for the fractional time discretizations.

Two kernels live here:

* the shifted Grunwald weights ``lambda_k`` used by the distributed-order
  scheme, collapsed over the order quadrature into a single convolution
  kernel ``kappa_k``;
* the Grunwald-Letnikov binomial weights ``(-1)^m binom(alpha, m)`` used by
  the sub-diffusive reaction-diffusion scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class KernelDomainError(ValueError):
    pass


def _check_order(alpha, lo_open=False):
    ok = (0.0 < alpha <= 1.0) if lo_open else (0.0 <= alpha <= 1.0)
    if not ok:
        raise KernelDomainError(f"fractional order {alpha} outside the admissible range")


def g_sequence(alpha: float, K: int) -> np.ndarray:
    """``g_0 .. g_K`` with ``g_k = (1 - (alpha + 1)/k) g_{k-1}``."""
    _check_order(alpha)
    g = np.empty(K + 1)
    g[0] = 1.0
    for k in range(1, K + 1):
        g[k] = (1.0 - (alpha + 1.0) / k) * g[k - 1]
    return g


def lambda_sequence(alpha: float, K: int) -> np.ndarray:
    """Shifted weights ``lambda_k = (1 + alpha/2) g_k - (alpha/2) g_{k-1}``."""
    g = g_sequence(alpha, K)
    lam = (1.0 + 0.5 * alpha) * g
    lam[1:] -= 0.5 * alpha * g[:-1]
    return lam


def trapezoid_weights(J: int) -> np.ndarray:
    c = np.ones(J + 1)
    c[0] = c[-1] = 0.5
    return c


@dataclass(frozen=True)
class DistributedOrderKernel:
    """Order quadrature and the collapsed history kernel.

    ``kappa[k] = dgamma * sum_l c_l w(gamma_l) dt**(-alpha_l) lambda_k(alpha_l)``
    for ``k = 0..N``; ``mu`` is ``kappa[0]``.
    """

    J: int
    dt: float
    alphas: np.ndarray
    c: np.ndarray
    w: np.ndarray
    lam: np.ndarray  # shape (J + 1, N + 1)
    kappa: np.ndarray

    @property
    def dgamma(self) -> float:
        return 1.0 / self.J

    @property
    def gammas(self) -> np.ndarray:
        return 1.0 + self.alphas

    @property
    def mu(self) -> float:
        return float(self.kappa[0])

    @property
    def order_scales(self) -> np.ndarray:
        """Per-order factors ``dgamma c_l w_l dt**(-alpha_l)``."""
        return self.dgamma * self.c * self.w * np.exp(-self.alphas * math.log(self.dt))


def collapse_kernel(w: Callable[[float], float], J: int, dt: float, N: int) -> DistributedOrderKernel:
    if J < 1:
        raise KernelDomainError("need at least one quadrature interval")
    if not dt > 0:
        raise KernelDomainError("time step must be positive")
    alphas = np.arange(J + 1) / J
    wl = np.array([float(w(1.0 + a)) for a in alphas])
    if np.any(wl < 0):
        raise KernelDomainError("order density must be non-negative")
    c = trapezoid_weights(J)
    lam = np.array([lambda_sequence(a, N) for a in alphas])
    kern = DistributedOrderKernel(J, dt, alphas, c, wl, lam, np.empty(0))
    kappa = kern.order_scales @ lam
    return DistributedOrderKernel(J, dt, alphas, c, wl, lam, kappa)


def gl_coefficients(alpha: float, m_max: int) -> np.ndarray:
    """``a_m = (-1)^m binom(alpha, m)`` via ``a_m = a_{m-1} (m - 1 - alpha) / m``."""
    _check_order(alpha, lo_open=True)
    a = np.empty(m_max + 1)
    a[0] = 1.0
    for m in range(1, m_max + 1):
        a[m] = a[m - 1] * (m - 1 - alpha) / m
    return a


@dataclass(frozen=True)
class GlKernel:
    """Binomial weights plus the history truncation policy.

    Only terms with ``m <= max_history`` and ``|a_m| >= threshold`` take part
    in the history sum (both conditions must hold).
    """

    alpha: float
    max_history: int | None = 800
    threshold: float = 1e-7

    def __post_init__(self):
        _check_order(self.alpha, lo_open=True)

    def weights(self, n_terms: int) -> np.ndarray:
        """Retained weights ``a_1 .. a_{n_terms}`` (dropped ones zeroed)."""
        a = gl_coefficients(self.alpha, n_terms)[1:]
        keep = np.abs(a) >= self.threshold
        if self.max_history is not None:
            keep[self.max_history:] = False
        return np.where(keep, a, 0.0)

    @property
    def capacity(self) -> int | None:
        return self.max_history


class HistoryBuffer:
    """Ring of past fields, read back newest first.

    ``capacity=None`` keeps everything (the distributed-order history must
    never be truncated).
    """

    def __init__(self, shape, capacity: int | None = None):
        self.shape = tuple(shape)
        self.capacity = capacity
        self._store = np.zeros((capacity if capacity else 16,) + self.shape)
        self._count = 0

    def __len__(self) -> int:
        if self.capacity is None:
            return self._count
        return min(self._count, self.capacity)

    @property
    def total_pushed(self) -> int:
        return self._count

    def push(self, value) -> None:
        value = np.asarray(value, dtype=np.float64)
        if self.capacity is None:
            if self._count == self._store.shape[0]:
                grown = np.zeros((2 * self._store.shape[0],) + self.shape)
                grown[: self._count] = self._store
                self._store = grown
            self._store[self._count] = value
        else:
            self._store[self._count % self.capacity] = value
        self._count += 1

    def _order(self) -> np.ndarray:
        """Slot indices ordered newest first."""
        n = len(self)
        newest = (self._count - 1) if self.capacity is None else (self._count - 1) % self.capacity
        if self.capacity is None:
            return np.arange(newest, newest - n, -1)
        return (newest - np.arange(n)) % self.capacity

    def newest_first(self) -> np.ndarray:
        return self._store[self._order()]

    def weighted_sum(self, weights) -> np.ndarray:
        """``sum_m weights[m] * entry_m`` with ``entry_0`` the newest field."""
        n = len(self)
        weights = np.asarray(weights, dtype=np.float64)[:n]
        if n == 0:
            return np.zeros(self.shape)
        # scatter the weights onto storage slots, then one matrix-vector product
        slot_w = np.zeros(self._store.shape[0])
        slot_w[self._order()[: weights.size]] = weights
        flat = self._store.reshape(self._store.shape[0], -1)
        return (slot_w @ flat).reshape(self.shape)


def gl_caputo_apply(history: HistoryBuffer, u_new, u0, kernel: GlKernel, dt: float) -> np.ndarray:
    """Grunwald-Letnikov approximation of the Caputo derivative at the new level.

    ``history`` holds ``u^n, u^{n-1}, ..., u^1`` newest first (``u^0`` is
    passed separately). The ``u^0`` subtraction is applied per retained term.
    """
    if not dt > 0:
        raise ValueError("time step must be positive")
    u_new = np.asarray(u_new, dtype=np.float64)
    u0 = np.asarray(u0, dtype=np.float64)
    n = len(history)
    a = kernel.weights(max(n, 1))[:n]
    total = (u_new - u0) + history.weighted_sum(a) - a.sum() * u0
    return total * math.exp(-kernel.alpha * math.log(dt))
