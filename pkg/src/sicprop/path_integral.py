"""Lattice path integrals and time-sliced propagators for time-dependent H.

The lattice is a uniform periodic grid. The free step defaults to the
band-limited (spectral) form of the free propagator, which is exactly
unitary on the grid; the directly sampled kernel is available for
comparison and refuses to run when it is visibly non-unitary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .dual_oracle import LogicalSign
from .errors import ContractError, ResolutionError
from .green_calculus import GaussianPacket, SicInterval, free_green
from .hilbert_core import as_operator, check_hermitian, mat_exp, unitarity_defect
from .oscillator_basis import PhysicalParams

SAMPLED_UNITARITY_TOL = 1e-3


@dataclass(frozen=True)
class LatticeConfig:
    N: int
    x_min: float
    x_max: float
    P: int = 256

    def __post_init__(self):
        if self.N < 1:
            raise ContractError("N must be positive")
        if self.P < 64:
            raise ContractError("the grid needs at least 64 points")
        if not self.x_max > self.x_min:
            raise ContractError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.P

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.P)

    def epsilon(self, T_m: float) -> float:
        return T_m / self.N


@dataclass(frozen=True)
class GridKernel:
    """Transfer matrix on the grid; ``kernel()`` divides out the quadrature weight."""

    x: np.ndarray
    dx: float
    matrix: np.ndarray

    def kernel(self) -> np.ndarray:
        return self.matrix / self.dx

    def apply(self, psi_values) -> np.ndarray:
        return self.matrix @ np.asarray(psi_values, dtype=complex)

    def unitarity_defect(self) -> float:
        return unitarity_defect(self.matrix)


def free_transfer_matrix(
    cfg: LatticeConfig,
    tau: float,
    params: PhysicalParams = PhysicalParams(),
    method: Literal["spectral", "sampled"] = "spectral",
) -> np.ndarray:
    """Grid matrix of the free propagator over effective time ``tau``."""
    if tau == 0.0:
        return np.eye(cfg.P, dtype=complex)
    if method == "spectral":
        k = 2.0 * np.pi * np.fft.fftfreq(cfg.P, d=cfg.dx)
        phase = np.exp(-1j * params.hbar * k**2 * tau / (2.0 * params.mass))
        return np.fft.ifft(phase[:, None] * np.fft.fft(np.eye(cfg.P), axis=0), axis=0)
    if method == "sampled":
        x = cfg.x
        sign = 1 if tau > 0 else -1
        f = free_green(x[None, :], x[:, None], SicInterval(abs(tau), sign), params) * cfg.dx
        d = unitarity_defect(f)
        if d > SAMPLED_UNITARITY_TOL:
            raise ResolutionError(f"sampled free kernel is not unitary on this grid (defect {d:.3g})")
        return f
    raise ContractError(f"unknown method {method!r}")


def trotter_green(
    V: Callable,
    interval: SicInterval,
    cfg: LatticeConfig,
    params: PhysicalParams = PhysicalParams(),
    method: Literal["spectral", "sampled"] = "spectral",
) -> GridKernel:
    """``[exp(-i*a*T_hat*eps) exp(-i*a*V*eps)]**N`` on the grid, ``eps = T_m/N``."""
    a = int(interval.sign)
    eps = cfg.epsilon(interval.T_m)
    x = cfg.x
    free = free_transfer_matrix(cfg, a * eps, params, method)
    pot = np.exp(-1j * a * np.asarray(V(x), dtype=float) * eps / params.hbar)
    step = free * pot[None, :]
    return GridKernel(x, cfg.dx, np.linalg.matrix_power(step, cfg.N))


def packet_error(gk: GridKernel, initial: GaussianPacket, expected: GaussianPacket) -> float:
    """Grid L2 distance between the lattice-evolved packet and a reference packet."""
    out = gk.apply(initial(gk.x))
    return float(np.sqrt(gk.dx) * np.linalg.norm(out - expected(gk.x)))


@dataclass(frozen=True)
class PiecewiseHamiltonian:
    H_of_t: Callable
    t0: float
    T_m: float

    def __post_init__(self):
        if not (np.isfinite(self.t0) and np.isfinite(self.T_m) and self.T_m >= 0):
            raise ContractError("t0 must be finite and T_m finite and non-negative")

    def at(self, t: float) -> np.ndarray:
        return check_hermitian(as_operator(self.H_of_t(t)))


def sample_times(H: PiecewiseHamiltonian, sign, variant: Literal["def437", "def440"], N: int) -> np.ndarray:
    """Slice sample times, leftmost factor first."""
    a = int(LogicalSign.coerce(sign))
    if N < 1:
        raise ContractError("N must be positive")
    back = H.T_m - (np.arange(1, N + 1) - 0.5) * H.T_m / N
    if variant == "def437":
        return H.t0 + a * back
    if variant == "def440":
        return H.t0 + back
    raise ContractError(f"unknown variant {variant!r}")


def timedep_slices(H: PiecewiseHamiltonian, sign, variant: Literal["def437", "def440"], N: int, hbar: float = 1.0) -> list[np.ndarray]:
    a = int(LogicalSign.coerce(sign))
    tau = H.T_m / N
    return [mat_exp(H.at(t), -1j * a * tau / hbar) for t in sample_times(H, sign, variant, N)]


def timedep_sic_propagator(H: PiecewiseHamiltonian, sign, variant: Literal["def437", "def440"], N: int, hbar: float = 1.0) -> np.ndarray:
    slices = timedep_slices(H, sign, variant, N, hbar)
    out = slices[0]
    for s in slices[1:]:
        out = out @ s
    return out


def reversal_symmetry_check(U_plus, U_minus, mode: Literal["global", "local"]) -> float:
    """Frobenius defect of ``U(+1) = U(-1)^dagger``.

    ``global`` takes two operators; ``local`` takes two equal-length slice
    lists and returns the largest per-slice defect.
    """
    if mode == "global":
        p, m = as_operator(U_plus), as_operator(U_minus)
        if p.shape != m.shape:
            raise ContractError("operators differ in dimension")
        return float(np.linalg.norm(p - m.conj().T))
    if mode == "local":
        if len(U_plus) != len(U_minus):
            raise ContractError("slice lists differ in length")
        return max(reversal_symmetry_check(p, m, "global") for p, m in zip(U_plus, U_minus))
    raise ContractError(f"mode must be global or local, got {mode!r}")


def global_reversal_defect(H: PiecewiseHamiltonian, variant: Literal["def437", "def440"], N: int, hbar: float = 1.0) -> float:
    """Compare ``U(+1)`` from ``t0`` with ``U(-1)`` started at ``t0 + T_m`` (which ends at ``t0``)."""
    later = PiecewiseHamiltonian(H.H_of_t, H.t0 + H.T_m, H.T_m)
    return reversal_symmetry_check(
        timedep_sic_propagator(H, 1, variant, N, hbar),
        timedep_sic_propagator(later, -1, variant, N, hbar),
        "global",
    )


def local_reversal_defect(H: PiecewiseHamiltonian, variant: Literal["def437", "def440"], N: int, hbar: float = 1.0) -> float:
    return reversal_symmetry_check(
        timedep_slices(H, 1, variant, N, hbar),
        timedep_slices(H, -1, variant, N, hbar),
        "local",
    )


def fit_slope(ns: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``-log(error)`` against ``log(N)``."""
    return float(-np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)[0])
