"""Coordinate-space kernels of sign-carrying propagators ``exp(-i*a*H*T/hbar)``.

Every closed form here is the ordinary kernel evaluated at the effective
time ``a*T``. Square roots use the principal branch, and evaluation near a
caustic (``sin(omega*a*T) ~ 0``) is refused.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np

from .dual_oracle import LogicalSign
from .errors import CausticError, ContractError
from .hilbert_core import mat_exp
from .oscillator_basis import EigenSystem, ExpansionState, PhysicalParams, ladder_operators, normalized_hermite_functions

CAUSTIC_EPS = 1e-9


@dataclass(frozen=True)
class SpacetimePoint:
    x: float
    t: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.t)):
            raise ContractError("spacetime point must be finite")


@dataclass(frozen=True)
class SicInterval:
    """Duration ``T_m >= 0`` with sign ``a``; the kernel sees ``effective = a*T_m``.

    If both endpoint times are given they must satisfy ``t_b - t_a = a*T_m``.
    """

    T_m: float
    sign: int = 1
    t_a: float | None = None
    t_b: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.T_m) and self.T_m >= 0):
            raise ContractError(f"T_m must be finite and non-negative, got {self.T_m!r}")
        object.__setattr__(self, "sign", LogicalSign.coerce(self.sign))
        if self.t_a is not None and self.t_b is not None:
            gap = self.t_b - self.t_a
            if abs(gap - self.effective) > 1e-12 * max(1.0, abs(gap)):
                raise ContractError(f"t_b - t_a = {gap!r} does not equal a*T_m = {self.effective!r}")

    @classmethod
    def between(cls, a: SpacetimePoint, b: SpacetimePoint) -> "SicInterval":
        gap = b.t - a.t
        return cls(abs(gap), 1 if gap >= 0 else -1, a.t, b.t)

    @property
    def effective(self) -> float:
        return int(self.sign) * self.T_m

    def flipped(self) -> "SicInterval":
        return SicInterval(self.T_m, -int(self.sign))


@dataclass(frozen=True)
class DeltaKernel:
    """``exp(i*phase(x_a)) * delta(x_b - x_a)``, kept symbolic."""

    phase: Callable

    def factor(self, x) -> np.ndarray:
        return np.exp(1j * np.asarray(self.phase(np.asarray(x, dtype=float)), dtype=float))

    def apply(self, psi_values, x) -> np.ndarray:
        return self.factor(x) * np.asarray(psi_values, dtype=complex)

    def conj(self) -> "DeltaKernel":
        p = self.phase
        return DeltaKernel(lambda x: -np.asarray(p(x)))


def potential_phase_green(V: Callable, interval: SicInterval, hbar: float = 1.0) -> DeltaKernel:
    a, T = int(interval.sign), interval.T_m
    return DeltaKernel(lambda x: -a * np.asarray(V(x), dtype=float) * T / hbar)


def _nonzero_time(interval: SicInterval) -> float:
    tau = interval.effective
    if tau == 0.0:
        raise ContractError("zero effective time: the kernel is a delta, use the identity")
    return tau


def _caustic_angle(interval: SicInterval, params: PhysicalParams, eps: float) -> float:
    theta = params.omega * _nonzero_time(interval)
    if abs(np.sin(theta)) < eps:
        n = int(np.round(theta / np.pi))
        raise CausticError(f"caustic at omega*a*T = {theta:.6g} (n = {n})", n=n)
    return theta


def free_green(xa, xb, interval: SicInterval, params: PhysicalParams = PhysicalParams()):
    tau = _nonzero_time(interval)
    m, hb = params.mass, params.hbar
    xa, xb = np.asarray(xa, dtype=float), np.asarray(xb, dtype=float)
    pref = np.sqrt(m / (2j * np.pi * hb * tau))
    return pref * np.exp(1j * m * (xb - xa) ** 2 / (2.0 * hb * tau))


def _mehler_series(x: float, y: float, s: complex, terms: int, dps: int) -> complex:
    with mpmath.workdps(dps):
        x, y, s = mpmath.mpf(x), mpmath.mpf(y), mpmath.mpc(s)
        c0 = mpmath.pi ** mpmath.mpf(-0.25)
        hx = [c0 * mpmath.exp(-x * x / 2), c0 * mpmath.sqrt(2) * x * mpmath.exp(-x * x / 2)]
        hy = [c0 * mpmath.exp(-y * y / 2), c0 * mpmath.sqrt(2) * y * mpmath.exp(-y * y / 2)]
        for k in range(1, terms - 1):
            a, b = mpmath.sqrt(mpmath.mpf(2) / (k + 1)), mpmath.sqrt(mpmath.mpf(k) / (k + 1))
            hx.append(a * x * hx[k] - b * hx[k - 1])
            hy.append(a * y * hy[k] - b * hy[k - 1])
        total = mpmath.fsum(hx[k] * hy[k] * s**k for k in range(terms))
        return complex(mpmath.sqrt(mpmath.pi) * mpmath.exp((x * x + y * y) / 2) * total)


def mehler_kernel(x, y, s: complex, terms: int, damping: float = 0.0) -> tuple[complex, complex]:
    """``sum_k H_k(x) H_k(y) s**k / (2**k k!)`` truncated, and its closed form.

    ``damping`` rescales ``s`` by ``1 - damping`` on both sides. The series
    terms can exceed the sum by dozens of orders of magnitude, so the
    partial sum is accumulated at a working precision sized to that gap.
    """
    x, y = float(x), float(y)
    s = complex(s) * (1.0 - damping)
    if abs(s) > 1.0 + 1e-15:
        raise ContractError(f"|s| must not exceed 1, got {abs(s)!r}")
    if terms < 1:
        raise ContractError("terms must be positive")
    one_minus = 1.0 - s * s
    if abs(one_minus) < 1e-14:
        raise CausticError(f"Mehler series diverges at s = {s!r}", n=0 if s.real > 0 else 1)
    log_closed = (2.0 * x * y * s - (x * x + y * y) * s * s) / one_minus - 0.5 * np.log(one_minus)
    closed = complex(np.exp(log_closed))
    lost = (0.5 * (x * x + y * y) - log_closed.real) / np.log(10.0)
    dps = 20 + int(np.ceil(max(lost, 0.0)))
    return _mehler_series(x, y, s, terms, dps), closed


def harmonic_green(xa, xb, interval: SicInterval, params: PhysicalParams = PhysicalParams(), eps: float = CAUSTIC_EPS):
    theta = _caustic_angle(interval, params, eps)
    m, w, hb = params.mass, params.omega, params.hbar
    xa, xb = np.asarray(xa, dtype=float), np.asarray(xb, dtype=float)
    s = np.sin(theta)
    pref = np.sqrt(m * w / (2j * np.pi * hb * s))
    return pref * np.exp(1j * m * w / (2.0 * hb * s) * ((xa**2 + xb**2) * np.cos(theta) - 2.0 * xa * xb))


def driven_green(xa, xb, interval: SicInterval, params: PhysicalParams = PhysicalParams(), f: float = 0.0, eps: float = CAUSTIC_EPS):
    """Kernel of ``p**2/2m + m*omega**2*x**2/2 + f*x``."""
    theta = _caustic_angle(interval, params, eps)
    m, w, hb = params.mass, params.omega, params.hbar
    xa, xb = np.asarray(xa, dtype=float), np.asarray(xb, dtype=float)
    s, c = np.sin(theta), np.cos(theta)
    pref = np.sqrt(m * w / (2j * np.pi * hb * s))
    expo = (
        m * w / (2.0 * hb * s) * ((xb**2 + xa**2) * c - 2.0 * xb * xa)
        + f / (hb * w) * (c - 1.0) / s * (xb + xa)
        + f**2 / (2.0 * m * hb * w**3) * (2.0 * c + theta * s - 2.0) / s
    )
    return pref * np.exp(1j * expo)


def eigensum_green(basis: EigenSystem, interval: SicInterval, xa, xb, L: int, damping: float = 0.0):
    """Abel-damped partial sum ``sum_{k<L} exp(-i*a*E_k*T/hbar) (1-damping)**k u_k(xa) u_k(xb)``."""
    if not 0.0 <= damping < 1.0:
        raise ContractError("damping must lie in [0, 1)")
    k = np.arange(L)
    w = np.exp(-1j * interval.effective * basis.eigenvalue(k) / basis.params.hbar) * (1.0 - damping) ** k
    xa, xb = np.broadcast_arrays(np.asarray(xa, dtype=float), np.asarray(xb, dtype=float))
    ua = basis.eigenfunctions(L, xa)
    ub = basis.eigenfunctions(L, xb)
    return np.tensordot(w, ua * ub, axes=1)


def eigensum_apply(state: ExpansionState, interval: SicInterval, x, damping: float = 0.0):
    """Packet-level eigensum: the damped series applied to an expanded state, evaluated at ``x``."""
    if not 0.0 <= damping < 1.0:
        raise ContractError("damping must lie in [0, 1)")
    k = np.arange(state.L_max)
    basis = state.basis
    w = np.exp(-1j * interval.effective * basis.eigenvalue(k) / basis.params.hbar) * (1.0 - damping) ** k
    return np.tensordot(state.coeffs * w, basis.eigenfunctions(state.L_max, x), axes=1)


def square_well_green(xa, xb, interval: SicInterval, params: PhysicalParams, width: float, n_images: int):
    """Image sum for a well with walls at 0 and ``width``, images ``|n| <= n_images``."""
    tau = _nonzero_time(interval)
    xa, xb = np.asarray(xa, dtype=float), np.asarray(xb, dtype=float)
    if np.any((xa < 0) | (xa > width) | (xb < 0) | (xb > width)):
        raise ContractError(f"points must lie in [0, {width}]")
    m, hb = params.mass, params.hbar
    pref = np.sqrt(m / (2j * np.pi * hb * tau))
    total = np.zeros(np.broadcast(xa, xb).shape, dtype=complex)
    for n in range(-n_images, n_images + 1):
        shift = 2.0 * n * width
        total += np.exp(1j * m * (xb - xa + shift) ** 2 / (2 * hb * tau))
        total -= np.exp(1j * m * (xb + xa + shift) ** 2 / (2 * hb * tau))
    return pref * total


@dataclass(frozen=True)
class QuadraticGreenForm:
    """``P * exp(i/hbar * [m/2 (S_bb xb^2 + 2 S_ab xa xb + S_aa xa^2) + Q_a xa + Q_b xb + Theta_0])``.

    ``prefactor`` defaults to ``sqrt(m*(-S_ab)/(2*pi*i*hbar))``.
    """

    m: float
    hbar: float
    S_bb: float
    S_ab: float
    S_aa: float
    Q_a: float = 0.0
    Q_b: float = 0.0
    Theta_0: float = 0.0
    prefactor: complex | None = None

    def __post_init__(self):
        vals = (self.m, self.hbar, self.S_bb, self.S_ab, self.S_aa, self.Q_a, self.Q_b, self.Theta_0)
        if not all(np.isfinite(v) for v in vals):
            raise ContractError("quadratic form parameters must be finite")
        if self.S_ab == 0.0:
            raise ContractError("S_ab must be nonzero")
        if self.prefactor is None:
            object.__setattr__(self, "prefactor", complex(np.sqrt(self.m * (-self.S_ab) / (2j * np.pi * self.hbar))))
        else:
            object.__setattr__(self, "prefactor", complex(self.prefactor))

    @classmethod
    def free(cls, interval: SicInterval, params: PhysicalParams = PhysicalParams()) -> "QuadraticGreenForm":
        tau = _nonzero_time(interval)
        return cls(params.mass, params.hbar, 1.0 / tau, -1.0 / tau, 1.0 / tau)

    @classmethod
    def harmonic(cls, interval: SicInterval, params: PhysicalParams = PhysicalParams(), eps: float = CAUSTIC_EPS) -> "QuadraticGreenForm":
        return cls.driven(interval, params, 0.0, eps)

    @classmethod
    def driven(cls, interval: SicInterval, params: PhysicalParams = PhysicalParams(), f: float = 0.0, eps: float = CAUSTIC_EPS) -> "QuadraticGreenForm":
        theta = _caustic_angle(interval, params, eps)
        w, m = params.omega, params.mass
        s, c = np.sin(theta), np.cos(theta)
        q = f * (c - 1.0) / (w * s)
        th0 = f**2 * (2.0 * c + theta * s - 2.0) / (2.0 * m * w**3 * s)
        return cls(m, params.hbar, w * c / s, -w / s, w * c / s, q, q, th0)

    def parameters(self) -> np.ndarray:
        return np.array([self.S_bb, self.S_ab, self.S_aa, self.Q_b, self.Q_a, self.Theta_0])

    def action(self, xa, xb):
        xa, xb = np.asarray(xa, dtype=float), np.asarray(xb, dtype=float)
        return 0.5 * self.m * (self.S_bb * xb**2 + 2.0 * self.S_ab * xa * xb + self.S_aa * xa**2) + self.Q_a * xa + self.Q_b * xb + self.Theta_0

    def __call__(self, xa, xb):
        return self.prefactor * np.exp(1j * self.action(xa, xb) / self.hbar)

    def inverse(self) -> "QuadraticGreenForm":
        """Kernel of the adjoint propagator: ``G_inv(xb; xa) = conj(G(xa; xb))``."""
        return QuadraticGreenForm(
            self.m, self.hbar, -self.S_aa, -self.S_ab, -self.S_bb, -self.Q_b, -self.Q_a, -self.Theta_0,
            np.conj(self.prefactor),
        )


def compose_quadratic(g1: QuadraticGreenForm, g2: QuadraticGreenForm, rtol: float = 1e-12) -> QuadraticGreenForm:
    """Kernel of ``U2 U1``: ``g1`` acts first (a -> c), ``g2`` second (c -> b)."""
    if g1.m != g2.m or g1.hbar != g2.hbar:
        raise ContractError("forms must share mass and hbar")
    m = g1.m
    S_cc, S_ac, S_aa, Q_c, Q_a = g1.S_bb, g1.S_ab, g1.S_aa, g1.Q_b, g1.Q_a
    Sp_cc, Sp_cb, Sp_bb, Qp_c, Qp_b = g2.S_aa, g2.S_ab, g2.S_bb, g2.Q_a, g2.Q_b
    den = Sp_cc + S_cc
    if abs(den) <= rtol * max(abs(Sp_cc), abs(S_cc), 1e-300):
        raise CausticError("intermediate Gaussian integral is degenerate (S'_cc + S_cc = 0)")
    qsum = Qp_c + Q_c
    pref = g1.prefactor * g2.prefactor * np.sqrt(2j * np.pi * g1.hbar / (m * den))
    return QuadraticGreenForm(
        m,
        g1.hbar,
        Sp_bb - Sp_cb**2 / den,
        -Sp_cb * S_ac / den,
        S_aa - S_ac**2 / den,
        Q_a - S_ac * qsum / den,
        Qp_b - Sp_cb * qsum / den,
        g2.Theta_0 + g1.Theta_0 - qsum**2 / (2.0 * m * den),
        pref,
    )


@dataclass(frozen=True)
class GaussianPacket:
    """``psi(x) = exp(-A x**2 + B x + C)`` with ``Re A > 0``."""

    A: complex
    B: complex
    C: complex
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("A", "B", "C"):
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise ContractError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.A.real <= 0:
            raise ContractError("packet is not normalizable (Re A <= 0)")

    @classmethod
    def from_center(cls, x0: float, w: float, p0: float = 0.0, hbar: float = 1.0) -> "GaussianPacket":
        """Normalized packet with ``|psi|**2`` of standard deviation ``w``."""
        if not w > 0:
            raise ContractError("width must be positive")
        A = 1.0 / (4.0 * w * w)
        B = x0 / (2.0 * w * w) + 1j * p0 / hbar
        C = -x0 * x0 / (4.0 * w * w) - 0.25 * np.log(2.0 * np.pi * w * w)
        return cls(A, B, C, hbar)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-self.A * x**2 + self.B * x + self.C)

    @property
    def center(self) -> float:
        return self.B.real / (2.0 * self.A.real)

    @property
    def width(self) -> float:
        return float(np.sqrt(1.0 / (4.0 * self.A.real)))

    @property
    def momentum(self) -> float:
        return self.hbar * (self.B.imag - 2.0 * self.A.imag * self.center)

    @property
    def normalization(self) -> complex:
        return complex(np.exp(self.C))

    def mirrored(self) -> "GaussianPacket":
        """``psi(-x)``."""
        return GaussianPacket(self.A, -self.B, self.C, self.hbar)

    def overlap(self, other: "GaussianPacket") -> complex:
        """``<self|other>`` in closed form."""
        al = np.conj(self.A) + other.A
        be = np.conj(self.B) + other.B
        return complex(np.sqrt(np.pi / al) * np.exp(be * be / (4.0 * al) + np.conj(self.C) + other.C))

    def norm(self) -> float:
        return float(np.sqrt(self.overlap(self).real))


def propagate_packet(packet: GaussianPacket, g: QuadraticGreenForm) -> GaussianPacket:
    """Exact Gaussian integral ``psi'(xb) = int G(xb; xa) psi(xa) dxa``."""
    if packet.hbar != g.hbar:
        raise ContractError("packet and kernel use different hbar")
    hb, m = g.hbar, g.m
    alpha = packet.A - 1j * m * g.S_aa / (2.0 * hb)
    if alpha.real <= 0:
        raise ContractError("non-integrable combination of packet and kernel")
    b0 = packet.B + 1j * g.Q_a / hb
    cross = 1j * m * g.S_ab / hb
    A = -1j * m * g.S_bb / (2.0 * hb) - cross**2 / (4.0 * alpha)
    B = 1j * g.Q_b / hb + b0 * cross / (2.0 * alpha)
    C = packet.C + 1j * g.Theta_0 / hb + np.log(g.prefactor) + 0.5 * np.log(np.pi / alpha) + b0 * b0 / (4.0 * alpha)
    return GaussianPacket(A, B, C, hb)


def square_well_packet(packet: GaussianPacket, interval: SicInterval, params: PhysicalParams, width: float, n_images: int, x) -> np.ndarray:
    """Image-sum kernel applied to a packet that lives inside the well.

    Each image term is a free propagation, done in closed form, of the
    packet or its mirror image, shifted by ``2*n*width``.
    """
    if packet.hbar != params.hbar:
        raise ContractError("packet and params use different hbar")
    x = np.asarray(x, dtype=float)
    g = QuadraticGreenForm.free(interval, params)
    direct = propagate_packet(packet, g)
    mirror = propagate_packet(packet.mirrored(), g)
    total = np.zeros(x.shape, dtype=complex)
    for n in range(-n_images, n_images + 1):
        y = x + 2.0 * n * width
        total += direct(y) - mirror(y)
    return total


@dataclass(frozen=True)
class QuarterPeriodResult:
    lhs: np.ndarray
    rhs: np.ndarray
    defect: float


def quarter_period_conjugation(
    params: PhysicalParams, t_m: float, sign, N_fock: int, swapped: bool = False
) -> QuarterPeriodResult:
    """Conjugate ``exp(-i*a*V*t_m)`` by a quarter period of the oscillator and compare with ``exp(-i*a*T*t_m)``.

    ``swapped`` conjugates the kinetic propagator instead and compares with
    the potential one. The defect is the Frobenius norm of ``lhs - rhs`` on
    the block ``k < N_fock/2``.
    """
    if N_fock < 16:
        raise ContractError("N_fock must be at least 16")
    a = int(LogicalSign.coerce(sign))
    m, w, hb = params.mass, params.omega, params.hbar
    _, x, p = ladder_operators(N_fock, params)
    kin = p @ p / (2.0 * m)
    pot = 0.5 * m * w * w * (x @ x)
    h = kin + pot
    tc = np.pi / (2.0 * w)
    inner, target = (kin, pot) if swapped else (pot, kin)
    lhs = mat_exp(h, 1j * tc / hb) @ mat_exp(inner, -1j * a * t_m / hb) @ mat_exp(h, -1j * tc / hb)
    rhs = mat_exp(target, -1j * a * t_m / hb)
    half = N_fock // 2
    defect = float(np.linalg.norm((lhs - rhs)[:half, :half]))
    return QuarterPeriodResult(lhs, rhs, defect)


