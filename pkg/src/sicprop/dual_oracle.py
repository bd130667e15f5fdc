"""Selective phase oracle tracked in a physical state and a math-space state.

The physical side receives the phase on the true solution index ``x0``; the
math side receives it on the candidate index ``S``. Their inner product is
the overlap observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Literal

import numpy as np

from .errors import ContractError
from .hilbert_core import NORM_TOL, as_state, tensor

IZ = np.diag([0.5, -0.5]).astype(complex)
E2 = np.eye(2, dtype=complex)


class LogicalSign(IntEnum):
    """The double-valued sign ``a`` with ``a**2 == 1``."""

    PLUS = 1
    MINUS = -1

    @classmethod
    def coerce(cls, value) -> "LogicalSign":
        try:
            v = int(value)
        except (TypeError, ValueError) as exc:
            raise ContractError(f"sign must be +1 or -1, got {value!r}") from exc
        if v not in (1, -1) or v != value:
            raise ContractError(f"sign must be +1 or -1, got {value!r}")
        s = cls(v)
        assert s * s == 1
        return s


@dataclass(frozen=True)
class OracleSpec:
    n_qubits: int
    solution: int
    candidate: int
    theta: float

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ContractError("n_qubits must be positive")
        n = 2**self.n_qubits
        for name in ("solution", "candidate"):
            v = getattr(self, name)
            if not 0 <= v < n:
                raise ContractError(f"{name} index {v} out of range [0, {n})")
        if not np.isfinite(self.theta):
            raise ContractError("theta must be finite")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def signs(self, which: Literal["solution", "candidate"] = "candidate") -> list[LogicalSign]:
        """Per-spin signs, spin 1 first. Bit 0 gives +1 and bit 1 gives -1."""
        index = self._index(which)
        return [LogicalSign(1 - 2 * ((index >> m) & 1)) for m in range(self.n_qubits)]

    def _index(self, which: str) -> int:
        if which == "solution":
            return self.solution
        if which == "candidate":
            return self.candidate
        raise ContractError(f"which must be 'solution' or 'candidate', got {which!r}")


def oracle_diagonal(spec: OracleSpec, which: Literal["solution", "candidate"] = "candidate") -> np.ndarray:
    """Rank-one projector on the marked index, built as a product of spin factors.

    Each spin contributes ``E/2 + a*I_z``, which is ``|0><0|`` for ``a = +1``
    and ``|1><1|`` for ``a = -1``.
    """
    factors = [0.5 * E2 + int(a) * IZ for a in spec.signs(which)]
    return tensor(*reversed(factors))


def oracle_phase(spec: OracleSpec, which: Literal["solution", "candidate"] = "candidate") -> np.ndarray:
    """``exp(-i*theta*D)`` for the projector ``D`` of :func:`oracle_diagonal`."""
    d = oracle_diagonal(spec, which)
    # D is a projector, so the exponential series collapses.
    return np.eye(spec.dim, dtype=complex) + (np.exp(-1j * spec.theta) - 1.0) * d


@dataclass(frozen=True)
class DualAmplitudePair:
    """A physical state and its math-space partner over the same basis labels.

    Only ``physical`` is meant to be handed to anything that models a
    measurement; ``math`` is used for the overlap only.
    """

    physical: np.ndarray
    math: np.ndarray

    def __post_init__(self):
        p = as_state(self.physical, normalized=True)
        m = as_state(self.math, normalized=True)
        if p.shape != m.shape:
            raise ContractError(f"dimension mismatch: {p.size} vs {m.size}")
        object.__setattr__(self, "physical", p)
        object.__setattr__(self, "math", m)

    @classmethod
    def shared(cls, psi0) -> "DualAmplitudePair":
        s = as_state(psi0)
        return cls(s.copy(), s.copy())

    @property
    def dim(self) -> int:
        return self.physical.size


def apply_oracle(pair: DualAmplitudePair, spec: OracleSpec) -> DualAmplitudePair:
    if pair.dim != spec.dim:
        raise ContractError(f"pair dim {pair.dim} does not match 2**n = {spec.dim}")
    return DualAmplitudePair(
        oracle_phase(spec, "solution") @ pair.physical,
        oracle_phase(spec, "candidate") @ pair.math,
    )


def overlap_integral(pair: DualAmplitudePair) -> complex:
    """``<physical|math>``."""
    return complex(np.vdot(pair.physical, pair.math))


def overlap_closed_form(psi0, spec: OracleSpec) -> complex:
    """Closed-form overlap after one oracle call on a shared initial state."""
    s = as_state(psi0)
    if abs(np.linalg.norm(s) - 1.0) > NORM_TOL:
        raise ContractError("initial state must be normalized")
    if spec.solution == spec.candidate:
        return 1.0 + 0j
    p0 = abs(s[spec.solution]) ** 2
    ps = abs(s[spec.candidate]) ** 2
    th = spec.theta
    return complex(1.0 - p0 * (1.0 - np.exp(1j * th)) - ps * (1.0 - np.exp(-1j * th)))


def uniform_state(n_qubits: int) -> np.ndarray:
    n = 2**n_qubits
    return np.full(n, 1.0 / np.sqrt(n), dtype=complex)
