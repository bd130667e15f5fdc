"""Interaction picture and iterated perturbation equations for sign-carrying propagators.

With ``H = H0 + lam*H1`` the propagator ``U(t) = exp(-i*a*H*t/hbar)`` solves

    U(t) = U0(t) + (1/(i*hbar)) * int_0^t U0(t - s) (a*lam*H1) U(s) ds,

and the order-n iterate replaces ``U(s)`` under the integral by the order
``n-1`` iterate. Time integrals use Gauss-Legendre nodes, one nesting level
per order, with the lower-order iterates cached by node time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dual_oracle import LogicalSign
from .errors import AccuracyError, ContractError
from .green_calculus import SicInterval
from .hilbert_core import check_hermitian, mat_exp
from .path_integral import GridKernel, LatticeConfig


@dataclass(frozen=True)
class HamiltonianSplit:
    H0: np.ndarray
    H1: np.ndarray
    lam: float = 1.0

    def __post_init__(self):
        h0 = check_hermitian(self.H0)
        h1 = check_hermitian(self.H1)
        if h0.shape != h1.shape:
            raise ContractError("H0 and H1 differ in dimension")
        object.__setattr__(self, "H0", h0)
        object.__setattr__(self, "H1", h1)

    @property
    def perturbation(self) -> np.ndarray:
        return self.lam * self.H1

    @property
    def full(self) -> np.ndarray:
        return self.H0 + self.perturbation


def interaction_hamiltonian(split: HamiltonianSplit, sign, t: float, hbar: float = 1.0) -> np.ndarray:
    """``U0(t)^dagger (lam*H1) U0(t)`` with ``U0(t) = exp(-i*a*H0*t/hbar)``."""
    a = int(LogicalSign.coerce(sign))
    u0 = mat_exp(split.H0, -1j * a * t / hbar)
    return u0.conj().T @ split.perturbation @ u0


def _nodes(lo: float, hi: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


class _Iterator:
    """Shared machinery: ``step(t, n)`` returns the order-n iterate at time ``t``."""

    def __init__(self, u0: Callable, apply_h1: Callable, prefactor: complex, quad_points: int):
        self.u0 = u0
        self.apply_h1 = apply_h1
        self.pref = prefactor
        self.q = quad_points
        self._cache: dict[tuple[int, float], np.ndarray] = {}
        self._u0_cache: dict[float, np.ndarray] = {}

    def free(self, t: float) -> np.ndarray:
        if t not in self._u0_cache:
            self._u0_cache[t] = self.u0(t)
        return self._u0_cache[t]

    def integral(self, t: float, n: int, q: int) -> np.ndarray:
        ts, ws = _nodes(0.0, t, q)
        acc = 0.0
        for s, w in zip(ts, ws):
            acc = acc + w * (self.free(t - s) @ self.apply_h1(self.step(s, n - 1)))
        return self.pref * acc

    def step(self, t: float, n: int) -> np.ndarray:
        if n == 0 or t == 0.0:
            return self.free(t)
        key = (n, t)
        if key not in self._cache:
            self._cache[key] = self.free(t) + self.integral(t, n, self.q)
        return self._cache[key]


def dyson_iterate(
    split: HamiltonianSplit,
    sign,
    t: float,
    order: int,
    quad_points: int = 32,
    hbar: float = 1.0,
    tol: float | None = None,
) -> np.ndarray:
    """Order-``order`` iterate of the integral equation above.

    When ``tol`` is given, the outermost integral is recomputed with twice
    the nodes and an :class:`AccuracyError` is raised if the two differ by
    more than ``tol`` in Frobenius norm.
    """
    if order < 0:
        raise ContractError("order must be non-negative")
    a = int(LogicalSign.coerce(sign))
    h1 = a * split.perturbation
    w, v = np.linalg.eigh(split.H0)
    vh = v.conj().T
    it = _Iterator(
        lambda s: (v * np.exp(-1j * a * s * w / hbar)) @ vh,
        lambda m: h1 @ m,
        1.0 / (1j * hbar),
        quad_points,
    )
    out = it.step(float(t), order)
    if tol is not None and order > 0 and t != 0.0:
        fine = it.free(float(t)) + it.integral(float(t), order, 2 * quad_points)
        est = float(np.linalg.norm(fine - out))
        if est > tol:
            raise AccuracyError(f"time quadrature did not converge (change {est:.3g})", estimate=est)
    return out


def green_perturbation_step(
    g0_kernel: Callable,
    H1_of_x: Callable,
    interval: SicInterval,
    cfg: LatticeConfig,
    order: int,
    quad_points: int = 32,
    hbar: float = 1.0,
) -> GridKernel:
    """Iterated kernel equation on the grid for a multiplicative perturbation.

    ``g0_kernel(tau)`` must return the unperturbed grid transfer matrix for
    effective time ``tau`` (for example :func:`free_transfer_matrix`). Matrix
    products on the grid carry the trapezoid weight, so each iteration is the
    lattice form of ``int dt' int dx' G0 (a*H1) G``.
    """
    if order < 0:
        raise ContractError("order must be non-negative")
    a = int(interval.sign)
    x = cfg.x
    h1 = a * np.asarray(H1_of_x(x), dtype=float)
    it = _Iterator(
        lambda s: np.asarray(g0_kernel(a * s), dtype=complex),
        lambda m: h1[:, None] * m,
        1.0 / (1j * hbar),
        quad_points,
    )
    return GridKernel(x, cfg.dx, it.step(float(interval.T_m), order))
