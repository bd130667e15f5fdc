"""Dense complex linear algebra used as the brute-force reference layer.

Operators are plain ``numpy`` complex arrays. States are 1-D complex arrays.
Basis index ``k`` of a multi-qubit register is little-endian in spin number
(spin 1 is the least significant bit), so :func:`tensor` takes its factors
most-significant first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import CapacityError, ContractError

MAX_DIM = 2**20
UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-12


def canonical_angle(angle: float) -> float:
    """Map an angle onto the half-open interval (-pi, pi]."""
    a = float(np.mod(angle + np.pi, 2.0 * np.pi) - np.pi)
    if a <= -np.pi:
        a += 2.0 * np.pi
    return a


@dataclass(frozen=True)
class GlobalPhase:
    """A global phase factor ``exp(i*angle)`` kept explicitly.

    The angle is canonicalized to (-pi, pi] on construction.
    """

    angle: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.angle):
            raise ContractError("global phase angle must be finite")
        object.__setattr__(self, "angle", canonical_angle(self.angle))

    @property
    def factor(self) -> complex:
        return complex(np.exp(1j * self.angle))

    def __add__(self, other: "GlobalPhase") -> "GlobalPhase":
        return GlobalPhase(self.angle + other.angle)

    def __neg__(self) -> "GlobalPhase":
        return GlobalPhase(-self.angle)


def as_operator(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ContractError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def as_state(v, normalized: bool = False) -> np.ndarray:
    s = np.asarray(v, dtype=complex)
    if s.ndim != 1 or s.size < 1:
        raise ContractError(f"expected a non-empty vector, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ContractError("state has non-finite amplitudes")
    if normalized:
        n = np.linalg.norm(s)
        if abs(n - 1.0) > NORM_TOL:
            raise ContractError(f"state is not normalized (norm = {n!r})")
    return s


def tensor(*factors, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product, first factor most significant.

    ``tensor(A, B)[i*dimB + j, k*dimB + l] == A[i, k] * B[j, l]``.
    """
    if not factors:
        raise ContractError("tensor needs at least one factor")
    mats = [as_operator(f) for f in factors]
    dim = int(np.prod([m.shape[0] for m in mats], dtype=object))
    if dim > max_dim:
        raise CapacityError(f"tensor dimension {dim} exceeds max_dim {max_dim}")
    return reduce(np.kron, mats)


def hermiticity_defect(h) -> float:
    m = as_operator(h)
    return float(np.linalg.norm(m - m.conj().T))


def check_hermitian(h, tol: float | None = None) -> np.ndarray:
    m = as_operator(h)
    tol = HERMITIAN_TOL * m.shape[0] if tol is None else tol
    d = hermiticity_defect(m)
    if d > tol:
        raise ContractError(f"operator is not Hermitian (defect {d:.3e} > {tol:.1e})")
    return m


def mat_exp(h, scale: complex) -> np.ndarray:
    """Return ``exp(scale * H)`` for Hermitian ``H`` by eigendecomposition."""
    m = check_hermitian(h)
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    return (v * np.exp(complex(scale) * w)) @ v.conj().T


def unitarity_defect(u) -> float:
    """Frobenius norm of ``U^dagger U - I``."""
    m = as_operator(u)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))


def is_unitary(u, tol: float | None = None) -> bool:
    m = as_operator(u)
    tol = UNITARY_TOL * m.shape[0] if tol is None else tol
    return unitarity_defect(m) <= tol


def fidelity_up_to_phase(a, b) -> float:
    """``|<a|b>|`` for two normalized states of equal dimension."""
    sa = as_state(a, normalized=True)
    sb = as_state(b, normalized=True)
    if sa.shape != sb.shape:
        raise ContractError(f"dimension mismatch: {sa.size} vs {sb.size}")
    return float(min(1.0, abs(np.vdot(sa, sb))))


def basis_state(dim: int, k: int) -> np.ndarray:
    if not 0 <= k < dim:
        raise ContractError(f"basis index {k} out of range for dim {dim}")
    e = np.zeros(dim, dtype=complex)
    e[k] = 1.0
    return e
