"""One-dimensional eigensystems and eigenfunction expansions.

Two bases are provided: the harmonic oscillator and the infinite square
well. Basis index ``k`` always starts at 0 for the ground state, so the
square-well quantum number is ``n = k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.special import gammaln

from .dual_oracle import LogicalSign
from .errors import AccuracyError, ContractError

HERMITE_CAP = 500


@dataclass(frozen=True)
class PhysicalParams:
    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mass", "omega", "hbar"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ContractError(f"{name} must be positive and finite, got {v!r}")

    @property
    def alpha_sq(self) -> float:
        return self.mass * self.omega / self.hbar

    @property
    def alpha(self) -> float:
        return float(np.sqrt(self.alpha_sq))


def normalized_hermite_functions(n: int, xi) -> np.ndarray:
    """Rows ``0..n-1`` of ``h_k(xi) = H_k(xi) exp(-xi**2/2) / sqrt(sqrt(pi) 2**k k!)``.

    Uses the three-term recurrence on the normalized functions, which stays
    finite far past the point where raw Hermite polynomials overflow.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.zeros((n,) + xi.shape)
    if n == 0:
        return out
    out[0] = np.pi**-0.25 * np.exp(-0.5 * xi**2)
    if n > 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for k in range(1, n - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * xi * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


@dataclass(frozen=True)
class EigenSystem:
    kind: Literal["harmonic", "square_well"]
    params: PhysicalParams
    x_min: float = 0.0
    width: float = 1.0
    cap: int = HERMITE_CAP

    def _check(self, k):
        k = np.asarray(k)
        if np.any(k < 0):
            raise ContractError("basis index must be non-negative")
        if self.kind == "harmonic" and np.any(k >= self.cap):
            raise ContractError(f"basis index beyond stability cap {self.cap}")
        return k

    def eigenvalue(self, k):
        k = self._check(k)
        p = self.params
        if self.kind == "harmonic":
            return (k + 0.5) * p.hbar * p.omega
        n = k + 1
        return n**2 * np.pi**2 * p.hbar**2 / (2.0 * p.mass * self.width**2)

    def eigenfunctions(self, n: int, x) -> np.ndarray:
        """Array of shape ``(n, *x.shape)`` with ``u_0..u_{n-1}`` evaluated at ``x``."""
        if n > 0:
            self._check(n - 1)
        x = np.asarray(x, dtype=float)
        if self.kind == "harmonic":
            a = self.params.alpha
            return np.sqrt(a) * normalized_hermite_functions(n, a * x)
        inside = (x >= self.x_min) & (x <= self.x_min + self.width)
        q = np.arange(1, n + 1).reshape((n,) + (1,) * x.ndim)
        u = np.sqrt(2.0 / self.width) * np.sin(q * np.pi * (x - self.x_min) / self.width)
        return np.where(inside, u, 0.0)

    def eigenfunction(self, k: int, x):
        return self.eigenfunctions(int(k) + 1, x)[int(k)]

    def window(self, n: int) -> tuple[float, float]:
        """Integration window that covers the first ``n`` eigenfunctions."""
        if self.kind == "square_well":
            return self.x_min, self.x_min + self.width
        half = (np.sqrt(2.0 * n + 1.0) + 8.0) / self.params.alpha
        return -half, half


def harmonic_eigensystem(params: PhysicalParams = PhysicalParams(), cap: int = HERMITE_CAP) -> EigenSystem:
    return EigenSystem("harmonic", params, cap=cap)


def square_well_eigensystem(params: PhysicalParams, x_min: float, width: float) -> EigenSystem:
    if not width > 0:
        raise ContractError("well width must be positive")
    return EigenSystem("square_well", params, x_min=float(x_min), width=float(width))


@dataclass(frozen=True)
class ExpansionState:
    """Coefficients ``B_k`` of a state in an eigenbasis, for ``k < L_max``."""

    basis: EigenSystem
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size < 1:
            raise ContractError("coefficients must be a non-empty vector")
        if np.sum(np.abs(c) ** 2) > 1.0 + 1e-10:
            raise ContractError("coefficient norm exceeds 1")
        object.__setattr__(self, "coeffs", c)

    @property
    def L_max(self) -> int:
        return self.coeffs.size

    def tail_norms(self) -> np.ndarray:
        """``NRES(L)`` for ``L = 0..L_max``."""
        # summing the non-negative terms from the far end keeps the tail monotone
        tail = np.append(np.cumsum(np.abs(self.coeffs[::-1]) ** 2)[::-1], 0.0)
        return np.sqrt(tail)

    def reconstruct(self, x, L: int | None = None) -> np.ndarray:
        L = self.L_max if L is None else L
        return np.tensordot(self.coeffs[:L], self.basis.eigenfunctions(L, x), axes=1)


def residual_norm(state: ExpansionState, L: int) -> float:
    """``sqrt(sum_{k >= L} |B_k|**2)`` over the stored coefficients."""
    if not 0 <= L <= state.L_max:
        raise ContractError(f"L must lie in [0, {state.L_max}]")
    return float(state.tail_norms()[L])


def _gauss_legendre(lo: float, hi: float, panels: int, nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    xs = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return xs, ws


def expand_state(
    psi: Callable,
    basis: EigenSystem,
    L: int,
    window: tuple[float, float] | None = None,
    tol: float = 1e-11,
    nodes: int = 32,
    max_panels: int = 1024,
) -> ExpansionState:
    """Project ``psi`` onto ``u_0..u_{L-1}`` by composite Gauss-Legendre.

    The panel count doubles until successive coefficient vectors agree to
    ``tol``.
    """
    if L < 1:
        raise ContractError("L must be positive")
    lo, hi = basis.window(L) if window is None else window
    panels = 8
    prev = None
    err = np.inf
    while panels <= max_panels:
        xs, ws = _gauss_legendre(lo, hi, panels, nodes)
        u = basis.eigenfunctions(L, xs)
        vals = np.asarray(psi(xs), dtype=complex)
        coeffs = u @ (ws * vals)
        if prev is not None:
            err = float(np.max(np.abs(coeffs - prev)))
            if err <= tol:
                norm2 = np.sum(np.abs(coeffs) ** 2)
                if norm2 > 1.0:
                    # rounding above unit norm only
                    coeffs = coeffs / np.sqrt(norm2)
                return ExpansionState(basis, coeffs)
        prev = coeffs
        panels *= 2
    raise AccuracyError(f"projection did not converge to {tol:g}", estimate=err)


def eigensum_evolution(state: ExpansionState, sign, t: float) -> ExpansionState:
    """Multiply ``B_k`` by ``exp(-i*a*E_k*t/hbar)``."""
    a = int(LogicalSign.coerce(sign))
    e = state.basis.eigenvalue(np.arange(state.L_max))
    phase = np.exp(-1j * a * e * t / state.basis.params.hbar)
    return ExpansionState(state.basis, state.coeffs * phase)


def coherent_packet(beta: complex, params: PhysicalParams = PhysicalParams()) -> Callable:
    """Wavefunction of the coherent state ``|beta>`` (Fock populations Poisson in ``|beta|**2``)."""
    a = params.alpha
    beta = complex(beta)

    def psi(x):
        xi = a * np.asarray(x, dtype=float)
        expo = -0.5 * xi**2 + np.sqrt(2.0) * beta * xi - 0.5 * beta**2 - 0.5 * abs(beta) ** 2
        return np.sqrt(a) * np.pi**-0.25 * np.exp(expo)

    return psi


def coherent_coefficients(beta: complex, L: int) -> np.ndarray:
    """Closed-form Fock coefficients ``exp(-|beta|**2/2) beta**k / sqrt(k!)``."""
    k = np.arange(L)
    beta = complex(beta)
    if beta == 0:
        return (k == 0).astype(complex)
    return np.exp(-0.5 * abs(beta) ** 2 + k * np.log(beta) - 0.5 * gammaln(k + 1))


def ladder_operators(n: int, params: PhysicalParams = PhysicalParams()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Truncated annihilation, position and momentum matrices on ``n`` Fock levels."""
    a = np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)
    ad = a.conj().T
    x = np.sqrt(params.hbar / (2.0 * params.mass * params.omega)) * (a + ad)
    p = 1j * np.sqrt(params.mass * params.hbar * params.omega / 2.0) * (ad - a)
    return a, x, p
