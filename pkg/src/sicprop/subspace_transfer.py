"""Pseudospin rotations, the leg-transfer unitaries W12/W23 and the
conjugation pipelines built from them.

A composite space has two or three components. Component 1 is the spin
register (or its infinite idealization), components 2 and 3 hold the target
eigenbases ``u_k`` and ``v_k``. Flat indices follow :func:`tensor` order, so
component 1 is the most significant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp

from .dual_oracle import LogicalSign
from .errors import AccuracyError, CapacityError, ContractError
from .hilbert_core import MAX_DIM, GlobalPhase
from .oscillator_basis import ExpansionState
from .spin_synthesis import (
    DiagonalPhaseProfile,
    SpinRegister,
    linear_phase_propagator,
    quadratic_phase_propagator,
)

_HALF_PAULI = {
    "x": np.array([[0, 0.5], [0.5, 0]], dtype=complex),
    "y": np.array([[0, -0.5j], [0.5j, 0]], dtype=complex),
    "z": np.array([[0.5, 0], [0, -0.5]], dtype=complex),
}

# component pairs touched by each leg
_LEGS = {"12": (0, 1), "23": (1, 2)}


@dataclass(frozen=True)
class CompositeSpace:
    dims: tuple[int, ...]
    max_dim: int = MAX_DIM

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (2, 3):
            raise ContractError("a composite space has two or three components")
        if any(d < 1 for d in dims):
            raise ContractError(f"component dims must be positive, got {dims}")
        if int(np.prod(dims, dtype=object)) > self.max_dim:
            raise CapacityError(f"composite dim {np.prod(dims)} exceeds {self.max_dim}")
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, multi: Sequence[int]) -> int:
        multi = tuple(int(m) for m in multi)
        if len(multi) != len(self.dims) or any(not 0 <= m < d for m, d in zip(multi, self.dims)):
            raise ContractError(f"multi-index {multi} invalid for dims {self.dims}")
        return int(np.ravel_multi_index(multi, self.dims))

    def basis(self, multi: Sequence[int]) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[self.index(multi)] = 1.0
        return e


@dataclass(frozen=True)
class PseudospinPair:
    K: tuple[int, ...]
    L: tuple[int, ...]

    def __post_init__(self):
        K, L = tuple(int(i) for i in self.K), tuple(int(i) for i in self.L)
        if K == L:
            raise ContractError("pseudospin pair needs two distinct states")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "L", L)


def _rotation_block(axis: str, angle: float) -> np.ndarray:
    """``exp(-i*angle*Q_axis)`` on the ordered pair ``(K, L)``."""
    if axis not in _HALF_PAULI:
        raise ContractError(f"axis must be x, y or z, got {axis!r}")
    # (2Q)**2 = 1, so the exponential is a cosine/sine pair
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    return c * np.eye(2) - 2j * s * _HALF_PAULI[axis]


def _rotate_rows(m: np.ndarray, i: int, j: int, block: np.ndarray) -> None:
    ri, rj = m[i].copy(), m[j].copy()
    m[i] = block[0, 0] * ri + block[0, 1] * rj
    m[j] = block[1, 0] * ri + block[1, 1] * rj


def pseudospin_rotation(space: CompositeSpace, pair: PseudospinPair, axis: str, angle: float) -> np.ndarray:
    """``exp(-i*angle*Q_axis^{KL})``: a 2x2 rotation on span{K, L}, identity elsewhere.

    With this convention ``angle = -pi`` sends ``|K>`` to ``+i|L>`` and
    ``angle = +pi`` sends it to ``-i|L>``.
    """
    i, j = space.index(pair.K), space.index(pair.L)
    out = np.eye(space.dim, dtype=complex)
    _rotate_rows(out, i, j, _rotation_block(axis, angle))
    return out


def _leg_pairs(space: CompositeSpace, leg: str, K_trunc: int):
    """Flat index arrays for every swapped pair and for the ground states of the leg."""
    if leg not in _LEGS:
        raise ContractError(f"leg must be '12' or '23', got {leg!r}")
    p, q = _LEGS[leg]
    if q >= len(space.dims):
        raise ContractError(f"leg {leg} needs a three-component space")
    if K_trunc < 1:
        raise ContractError("K_trunc must be positive")
    if K_trunc > min(space.dims[p], space.dims[q]):
        raise ContractError(f"K_trunc {K_trunc} exceeds the leg dims {space.dims[p]}, {space.dims[q]}")
    idx = np.array(np.unravel_index(np.arange(space.dim), space.dims))
    kp, kq = idx[p], idx[q]
    src = np.flatnonzero((kp >= 1) & (kp < K_trunc) & (kq == 0))
    partner_idx = idx[:, src].copy()
    partner_idx[q] = partner_idx[p]
    partner_idx[p] = 0
    dst = np.ravel_multi_index(tuple(partner_idx), space.dims)
    ground = np.flatnonzero((kp == 0) & (kq == 0))
    return src, dst, ground


def build_transfer_W(space: CompositeSpace, leg: Literal["12", "23"], K_trunc: int) -> np.ndarray:
    """Product of pi rotations ``exp(-i*pi*Q_x)`` on the leg pairs times ``exp(-i*pi/2 |ground><ground|)``.

    ``W|j,u_0> = -i|0,u_j>`` for ``j < K_trunc``; higher indices are left alone.
    Spectator components are carried along as identity factors.
    """
    src, dst, ground = _leg_pairs(space, leg, K_trunc)
    out = np.eye(space.dim, dtype=complex)
    block = _rotation_block("x", np.pi)
    for i, j in zip(src, dst):
        _rotate_rows(out, i, j, block)
    out[ground] *= np.exp(-0.5j * np.pi)
    return out


def transfer_W_sparse(space: CompositeSpace, leg: Literal["12", "23"], K_trunc: int) -> sp.csr_matrix:
    """The same operator as :func:`build_transfer_W`, assembled directly as a monomial matrix."""
    src, dst, ground = _leg_pairs(space, leg, K_trunc)
    perm = np.arange(space.dim)
    perm[src], perm[dst] = dst, src
    vals = np.ones(space.dim, dtype=complex)
    vals[src] = vals[dst] = -1j
    vals[ground] = -1j
    # column c is sent to row perm[c]
    return sp.csr_matrix((vals, (perm, np.arange(space.dim))), shape=(space.dim, space.dim))


@dataclass(frozen=True)
class TargetSpectrum:
    """``E_k = a*k + b`` or ``E_k = a*k**2 + b*k + c`` evolved for time ``t_m``."""

    form: Literal["linear", "quadratic"]
    a: float
    b: float = 0.0
    c: float = 0.0
    t_m: float = 1.0

    def __post_init__(self):
        if self.form not in ("linear", "quadratic"):
            raise ContractError(f"form must be linear or quadratic, got {self.form!r}")
        if not all(np.isfinite(v) for v in (self.a, self.b, self.c, self.t_m)):
            raise ContractError("spectrum coefficients must be finite")
        if self.form == "linear" and self.c != 0.0:
            raise ContractError("a linear spectrum has no c coefficient")

    @classmethod
    def linear(cls, a: float, b: float = 0.0, t_m: float = 1.0) -> "TargetSpectrum":
        return cls("linear", a, b, 0.0, t_m)

    @classmethod
    def quadratic(cls, a: float, b: float = 0.0, c: float = 0.0, t_m: float = 1.0) -> "TargetSpectrum":
        return cls("quadratic", a, b, c, t_m)

    def energies(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.form == "linear":
            return self.a * k + self.b
        return self.a * k**2 + self.b * k + self.c

    def phases(self, k, sign, hbar: float = 1.0) -> np.ndarray:
        a = int(LogicalSign.coerce(sign))
        return -a * self.energies(k) * self.t_m / hbar


def register_profile(ds: int, target: TargetSpectrum, sign, hbar: float = 1.0) -> tuple[DiagonalPhaseProfile, float]:
    """Spin-register propagator for ``target`` and the constant energy left out of it.

    The profile carries phases ``-a*(E_k - E_const)*t/hbar`` plus its own
    synthesis global phase; the second return value is ``E_const``.
    """
    reg = SpinRegister(ds)
    if target.form == "linear":
        return linear_phase_propagator(reg, target.a * target.t_m / hbar, sign), target.b
    quad = quadratic_phase_propagator(reg, target.a * target.t_m / hbar, sign)
    lin = linear_phase_propagator(reg, target.b * target.t_m / hbar, sign)
    return quad.compose(lin), target.c


def _pipeline_phase(ds: int, target: TargetSpectrum, sign, hbar: float) -> tuple[DiagonalPhaseProfile, GlobalPhase]:
    profile, const = register_profile(ds, target, sign, hbar)
    a = int(LogicalSign.coerce(sign))
    return profile, profile.global_phase + GlobalPhase(a * const * target.t_m / hbar)


def _check_leg_dim(ds: int, *dims: int) -> None:
    L = 2**ds
    for d in dims:
        if d < L:
            raise ContractError(f"component dim {d} is smaller than 2**ds = {L}")


def conjugate_linear_spectrum(ds: int, D2: int, target: TargetSpectrum, sign, hbar: float = 1.0) -> tuple[np.ndarray, GlobalPhase]:
    """``exp(-i*Phi) W12 (U_reg x I) W12^dagger`` on the ``2**ds x D2`` space.

    On ``|0,u_k>`` the result multiplies by ``exp(-i*a*E_k*t/hbar)`` for
    ``k < 2**ds``. Above that it multiplies by the constant
    ``exp(-i*a*E_const*t/hbar)``. The returned phase is ``Phi``.
    """
    _check_leg_dim(ds, D2)
    profile, phi = _pipeline_phase(ds, target, sign, hbar)
    space = CompositeSpace((2**ds, D2))
    w = transfer_W_sparse(space, "12", 2**ds)
    u = sp.diags(np.kron(profile.diagonal(), np.ones(D2)))
    built = (w @ u @ w.conj().T).toarray() * np.exp(-1j * phi.angle)
    return built, phi


def chained_transfer(ds: int, D2: int, D3: int, target: TargetSpectrum, sign, hbar: float = 1.0) -> tuple[np.ndarray, GlobalPhase]:
    """``exp(-i*Phi) W23 W12 U_reg W12^dagger W23^dagger`` on ``2**ds x D2 x D3``.

    Acts on ``|0,u_0,v_k>`` as :func:`conjugate_linear_spectrum` acts on ``|0,u_k>``.
    """
    _check_leg_dim(ds, D2, D3)
    profile, phi = _pipeline_phase(ds, target, sign, hbar)
    space = CompositeSpace((2**ds, D2, D3))
    w12 = transfer_W_sparse(space, "12", 2**ds)
    w23 = transfer_W_sparse(space, "23", 2**ds)
    u = sp.diags(np.kron(profile.diagonal(), np.ones(D2 * D3)))
    w = w23 @ w12
    built = (w @ u @ w.conj().T).toarray() * np.exp(-1j * phi.angle)
    return built, phi


@dataclass(frozen=True)
class TransferReport:
    norms: np.ndarray
    bound: float
    fidelities: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rotation_count: int = 0

    @property
    def max_norm(self) -> float:
        return float(np.max(self.norms))

    @property
    def passed(self) -> bool:
        return self.max_norm <= self.bound + 1e-12


def _sparse_transfer(dims: tuple[int, ...], leg: str, K: int) -> sp.csr_matrix:
    return transfer_W_sparse(CompositeSpace(dims), leg, K)


def transfer_norm_diagnostics(
    state: ExpansionState,
    ds: int,
    pipeline: Literal["three_step", "five_step"],
    alpha: float,
    sign,
) -> TransferReport:
    """Step-by-step distance between the truncated and the ideal pipeline.

    The ideal pipeline uses a register large enough for every stored
    coefficient. Truncated states are rotated by the analytic phase
    ``exp(i*(phi_inf - phi_0))`` from the register step onward so that the two
    global phases agree.
    """
    if pipeline not in ("three_step", "five_step"):
        raise ContractError(f"pipeline must be three_step or five_step, got {pipeline!r}")
    a = int(LogicalSign.coerce(sign))
    L = 2**ds
    n = state.L_max
    if n <= L:
        raise AccuracyError(f"need more than {L} coefficients, have {n}", estimate=None)
    d_full = max(1, int(np.ceil(np.log2(n))))
    D1 = 2**d_full
    k1 = np.arange(D1)
    phi_inf = alpha * a * (D1 - 1) / 2.0
    phi_0 = alpha * a * (L - 1) / 2.0
    u_inf = np.exp(1j * (phi_inf - alpha * a * k1))
    u_ap = np.exp(1j * (phi_0 - alpha * a * (k1 % L)))
    align = np.exp(1j * (phi_inf - phi_0))

    if pipeline == "three_step":
        dims = (D1, n)
        rest = n
        psi0 = np.kron(np.eye(D1)[0], state.coeffs)
        wx = _sparse_transfer(dims, "12", n)
        wa = _sparse_transfer(dims, "12", L)
        ui, ua = np.repeat(u_inf, rest), np.repeat(u_ap, rest)
        exact = [wx.conj().T @ psi0]
        exact.append(ui * exact[-1])
        exact.append(wx @ exact[-1])
        approx = [wa.conj().T @ psi0]
        approx.append(align * ua * approx[-1])
        approx.append(wa @ approx[-1])
    else:
        dims = (D1, n, n)
        rest = n * n
        e0 = np.zeros(n)
        e0[0] = 1.0
        psi0 = np.kron(np.eye(D1)[0], np.kron(e0, state.coeffs))
        w12x, w23x = _sparse_transfer(dims, "12", n), _sparse_transfer(dims, "23", n)
        w12a, w23a = _sparse_transfer(dims, "12", L), _sparse_transfer(dims, "23", L)
        ui, ua = np.repeat(u_inf, rest), np.repeat(u_ap, rest)
        exact = [w23x.conj().T @ psi0]
        exact.append(w12x.conj().T @ exact[-1])
        exact.append(ui * exact[-1])
        exact.append(w12x @ exact[-1])
        exact.append(w23x @ exact[-1])
        approx = [w23a.conj().T @ psi0]
        approx.append(w12a.conj().T @ approx[-1])
        approx.append(align * ua * approx[-1])
        approx.append(w12a @ approx[-1])
        approx.append(w23a @ approx[-1])

    norms = np.array([np.linalg.norm(x - y) for x, y in zip(approx, exact)])
    scale = np.vdot(psi0, psi0).real
    fids = np.array([abs(np.vdot(x, y)) / scale for x, y in zip(approx, exact)])
    bound = 2.0 * float(state.tail_norms()[L])
    legs = 1 if pipeline == "three_step" else 2
    return TransferReport(norms, bound, fids, rotation_count=legs * (L - 1))
