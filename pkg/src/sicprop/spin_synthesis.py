"""Diagonal sign-carrying propagators on a register of spin-1/2 particles.

Spin ``l`` (1-based) carries bit ``k_{l-1}`` of the basis index with
``m_l = 1/2 - k_{l-1}``. Every propagator here is diagonal, so it is returned
as a :class:`DiagonalPhaseProfile` holding per-index phases plus a global
phase that is tracked rather than dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .dual_oracle import LogicalSign
from .errors import CapacityError, ContractError
from .hilbert_core import GlobalPhase, mat_exp, tensor

MAX_SPINS = 12

_PAULI_HALF = {
    "x": 0.5 * np.array([[0, 1], [1, 0]], dtype=complex),
    "y": 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": 0.5 * np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class SpinRegister:
    d: int
    max_spins: int = MAX_SPINS

    def __post_init__(self):
        if self.d < 1:
            raise ContractError("register needs at least one spin")
        if self.d > self.max_spins:
            raise CapacityError(f"{self.d} spins exceeds the limit of {self.max_spins}")

    @property
    def dim(self) -> int:
        return 2**self.d

    def bits(self) -> np.ndarray:
        """``bits[k, l-1] = k_{l-1}`` for every basis index ``k``."""
        k = np.arange(self.dim)
        return (k[:, None] >> np.arange(self.d)[None, :]) & 1

    def m_values(self) -> np.ndarray:
        """``m[k, l-1]``: the z quantum number of spin ``l`` in basis state ``k``."""
        return 0.5 - self.bits()


def spin_operator(reg: SpinRegister, spin: int, axis: Literal["x", "y", "z"]) -> np.ndarray:
    """``I_{spin,axis}`` embedded in the full register."""
    if not 1 <= spin <= reg.d:
        raise ContractError(f"spin {spin} out of range [1, {reg.d}]")
    if axis not in _PAULI_HALF:
        raise ContractError(f"axis must be x, y or z, got {axis!r}")
    factors = [np.eye(2, dtype=complex)] * reg.d
    factors = list(factors)
    factors[reg.d - spin] = _PAULI_HALF[axis]
    return tensor(*factors)


def basic_sic_rotation(reg: SpinRegister, spin: int, axis: Literal["x", "y", "z"], sign, theta: float) -> np.ndarray:
    """``exp(-i*theta*a*I_{spin,axis})``."""
    a = LogicalSign.coerce(sign)
    return mat_exp(spin_operator(reg, spin, axis), -1j * theta * int(a))


@dataclass(frozen=True)
class DiagonalPhaseProfile:
    """``U|k> = exp(i*global) * exp(i*phases[k]) |k>``."""

    phases: np.ndarray
    global_phase: GlobalPhase = field(default_factory=GlobalPhase)

    def __post_init__(self):
        p = np.asarray(self.phases, dtype=float)
        if p.ndim != 1 or p.size < 1 or not np.all(np.isfinite(p)):
            raise ContractError("phases must be a non-empty finite 1-D array")
        object.__setattr__(self, "phases", p)

    @property
    def dim(self) -> int:
        return self.phases.size

    def total_phases(self) -> np.ndarray:
        return self.phases + self.global_phase.angle

    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.total_phases())

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diagonal())

    def compose(self, other: "DiagonalPhaseProfile") -> "DiagonalPhaseProfile":
        if other.dim != self.dim:
            raise ContractError("profiles act on different dimensions")
        return DiagonalPhaseProfile(self.phases + other.phases, self.global_phase + other.global_phase)

    def conj(self) -> "DiagonalPhaseProfile":
        return DiagonalPhaseProfile(-self.phases, -self.global_phase)


@dataclass(frozen=True)
class SynthesisAngles:
    """Per-spin angles ``theta_list[l-1]`` and pair angles ``theta_pairs[j-1, l-1]`` (j > l)."""

    alpha: float
    beta: float
    theta_list: np.ndarray
    theta_pairs: np.ndarray


def linear_angles(reg: SpinRegister, alpha: float) -> SynthesisAngles:
    theta = -alpha * 2.0 ** np.arange(reg.d)
    return SynthesisAngles(alpha, 0.0, theta, np.zeros((reg.d, reg.d)))


def quadratic_angles(reg: SpinRegister, beta: float) -> SynthesisAngles:
    """Angles whose product realizes ``exp(-i*beta*a*k**2)`` up to a global phase.

    Writing ``k**2 = sum_j k_{j-1} 4**(j-1) + sum_{j>l} k_{j-1} k_{l-1} 2**(j+l-1)``
    and ``k = 1/2 - m`` gives a bilinear ``m_j m_l`` part (pair couplings) and
    a linear ``m_j`` part (single-spin z rotations).
    """
    d = reg.d
    j = np.arange(1, d + 1)
    pairs = np.tril(beta * 2.0 ** (j[:, None] + j[None, :] - 2), k=-1)
    c = np.tril(2.0 ** (j[:, None] + j[None, :] - 1), k=-1)
    weight = 4.0 ** (j - 1) + 0.5 * (c.sum(axis=0) + c.sum(axis=1))
    return SynthesisAngles(0.0, beta, -beta * weight, pairs)


def _quadratic_constant(reg: SpinRegister) -> float:
    j = np.arange(1, reg.d + 1)
    c = np.tril(2.0 ** (j[:, None] + j[None, :] - 1), k=-1)
    return float(0.5 * np.sum(4.0 ** (j - 1)) + 0.25 * c.sum())


def linear_phase_propagator(reg: SpinRegister, alpha: float, sign) -> DiagonalPhaseProfile:
    """Phases ``-alpha*a*k`` with global phase ``alpha*a*(2**d - 1)/2``."""
    a = int(LogicalSign.coerce(sign))
    k = np.arange(reg.dim, dtype=float)
    return DiagonalPhaseProfile(-alpha * a * k, GlobalPhase(alpha * a * (reg.dim - 1) / 2.0))


def pair_coupling_propagator(reg: SpinRegister, theta_pairs, sign) -> DiagonalPhaseProfile:
    """``exp(-i*a*sum_{j>l} theta_jl * 2 I_jz I_lz)`` as a phase profile."""
    a = int(LogicalSign.coerce(sign))
    tp = np.asarray(theta_pairs, dtype=float)
    if tp.shape != (reg.d, reg.d):
        raise ContractError(f"theta_pairs must be {reg.d}x{reg.d}")
    if np.any(np.triu(tp) != 0.0):
        raise ContractError("theta_pairs must be strictly lower triangular (j > l)")
    m = reg.m_values()
    bilinear = np.einsum("kj,jl,kl->k", m, tp, m)
    return DiagonalPhaseProfile(-a * 2.0 * bilinear)


def single_spin_z_propagator(reg: SpinRegister, theta_list, sign) -> DiagonalPhaseProfile:
    """Product of ``exp(-i*a*theta_l*I_lz)`` over all spins."""
    a = int(LogicalSign.coerce(sign))
    th = np.asarray(theta_list, dtype=float)
    if th.shape != (reg.d,):
        raise ContractError(f"theta_list must have length {reg.d}")
    return DiagonalPhaseProfile(-a * (reg.m_values() @ th))


def quadratic_phase_propagator(reg: SpinRegister, beta: float, sign) -> DiagonalPhaseProfile:
    """Phases ``-beta*a*k**2`` plus a tracked global phase.

    The returned profile is exactly the product of the pair couplings and
    single-spin rotations from :func:`quadratic_angles`.
    """
    a = int(LogicalSign.coerce(sign))
    k = np.arange(reg.dim, dtype=float)
    return DiagonalPhaseProfile(-beta * a * k**2, GlobalPhase(beta * a * _quadratic_constant(reg)))


def generator_from_angles(reg: SpinRegister, angles: SynthesisAngles) -> np.ndarray:
    """Explicit spin-operator generator ``sum_l theta_l I_lz + sum_{j>l} 2 theta_jl I_jz I_lz``.

    The propagator is ``exp(-i*a*G)``.
    """
    g = np.zeros((reg.dim, reg.dim), dtype=complex)
    z = [spin_operator(reg, l, "z") for l in range(1, reg.d + 1)]
    for l in range(reg.d):
        g += angles.theta_list[l] * z[l]
        for j in range(l + 1, reg.d):
            if angles.theta_pairs[j, l] != 0.0:
                g += 2.0 * angles.theta_pairs[j, l] * z[j] @ z[l]
    return g


def _product_z(reg: SpinRegister, spins: Sequence[int]) -> np.ndarray:
    out = np.eye(reg.dim, dtype=complex)
    for s in spins:
        out = out @ spin_operator(reg, s, "z")
    return out


def lomso_conjugation_reduce(reg: SpinRegister, spins: Sequence[int], theta: float, sign) -> tuple[np.ndarray, np.ndarray]:
    """Reduce a multi-spin longitudinal propagator to a single-spin rotation.

    For spins ``k_1..k_{l+1}`` returns ``(target, V)`` with
    ``target = exp(-i*theta*a*2**l * I_{k_1 z}...I_{k_{l+1} z})`` and
    ``target == V @ exp(-i*theta*a*I_{k_{l+1} z}) @ V^dagger``.
    Each step removes one spin ``k_j`` with the conjugator
    ``exp(+i*pi*I_{k_j z} I_{k_{l+1} y}) exp(-i*pi/2*I_{k_{l+1} y})``.
    """
    a = int(LogicalSign.coerce(sign))
    spins = [int(s) for s in spins]
    if not spins:
        raise ContractError("need at least one spin")
    if len(set(spins)) != len(spins):
        raise ContractError(f"spin indices must be distinct, got {spins}")
    for s in spins:
        if not 1 <= s <= reg.d:
            raise ContractError(f"spin {s} out of range [1, {reg.d}]")
    l = len(spins) - 1
    last = spins[-1]
    target = mat_exp(_product_z(reg, spins), -1j * theta * a * 2.0**l)
    y_last = spin_operator(reg, last, "y")
    conj = np.eye(reg.dim, dtype=complex)
    for kj in reversed(spins[:-1]):
        zy = spin_operator(reg, kj, "z") @ y_last
        step = mat_exp(zy, 1j * np.pi) @ mat_exp(y_last, -0.5j * np.pi)
        conj = conj @ step
    return target, conj
