"""Acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult` carrying the measured worst
case next to the threshold it is judged against. Nothing here relaxes a
threshold: a check that cannot be met reports ``passed=False``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dual_oracle import DualAmplitudePair, OracleSpec, apply_oracle, overlap_closed_form, overlap_integral, uniform_state
from .errors import CausticError
from .green_calculus import (
    GaussianPacket,
    QuadraticGreenForm,
    SicInterval,
    compose_quadratic,
    driven_green,
    eigensum_apply,
    free_green,
    harmonic_green,
    mehler_kernel,
    propagate_packet,
    quarter_period_conjugation,
    square_well_packet,
)
from .hilbert_core import mat_exp
from .oscillator_basis import (
    ExpansionState,
    PhysicalParams,
    coherent_coefficients,
    expand_state,
    harmonic_eigensystem,
    ladder_operators,
    square_well_eigensystem,
)
from .path_integral import (
    LatticeConfig,
    PiecewiseHamiltonian,
    fit_slope,
    global_reversal_defect,
    local_reversal_defect,
    packet_error,
    trotter_green,
)
from .perturbation import HamiltonianSplit, dyson_iterate
from .spin_synthesis import (
    SpinRegister,
    generator_from_angles,
    linear_angles,
    linear_phase_propagator,
    lomso_conjugation_reduce,
    quadratic_angles,
    quadratic_phase_propagator,
    spin_operator,
)
from .subspace_transfer import (
    CompositeSpace,
    TargetSpectrum,
    chained_transfer,
    conjugate_linear_spectrum,
    transfer_norm_diagnostics,
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"[{tag}] {self.number:2d} {self.name}: {shown}"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": bool(self.passed),
            "metrics": {k: _plain(v) for k, v in self.metrics.items()},
        }


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.3g}"
    return str(v)


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    return v


def _random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def criterion_1(rng: np.random.Generator) -> CriterionResult:
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(1, 9))
        x0, s = rng.choice(2**n, size=2, replace=False)
        spec = OracleSpec(n, int(x0), int(s), float(rng.uniform(-2 * np.pi, 2 * np.pi)))
        psi0 = uniform_state(n) if i % 2 else _random_state(rng, 2**n)
        got = overlap_integral(apply_oracle(DualAmplitudePair.shared(psi0), spec))
        worst = max(worst, abs(got - overlap_closed_form(psi0, spec)))
    exact = overlap_integral(apply_oracle(DualAmplitudePair.shared(uniform_state(2)), OracleSpec(2, 1, 2, np.pi)))
    return CriterionResult(1, "oracle overlap", worst <= 1e-12 and abs(exact) <= 1e-12, {"max_err": worst, "exact_case": abs(exact)})


def criterion_2(rng: np.random.Generator) -> CriterionResult:
    worst, worst_d2 = 0.0, 0.0
    for d in range(2, 7):
        reg = SpinRegister(d)
        for _ in range(20):
            alpha, beta = rng.uniform(-2, 2, size=2)
            a = int(rng.choice([1, -1]))
            for prof, ang in (
                (linear_phase_propagator(reg, alpha, a), linear_angles(reg, alpha)),
                (quadratic_phase_propagator(reg, beta, a), quadratic_angles(reg, beta)),
            ):
                brute = np.diag(mat_exp(generator_from_angles(reg, ang), -1j * a))
                worst = max(worst, float(np.max(np.abs(prof.diagonal() - brute))))
            ph = quadratic_phase_propagator(reg, beta, a).phases
            d2 = ph[2:] - 2 * ph[1:-1] + ph[:-2]
            worst_d2 = max(worst_d2, float(np.max(np.abs(d2 + 2 * beta * a))))
    return CriterionResult(2, "synthesis eigenphases", worst <= 1e-10 and worst_d2 <= 1e-12, {"max_err": worst, "second_diff_err": worst_d2})


def criterion_3(rng: np.random.Generator) -> CriterionResult:
    worst = 0.0
    cases = 0
    for d in (2, 3):
        reg = SpinRegister(d)
        for l in (1, 2):
            if l + 1 > d:
                continue
            for a in (1, -1):
                for _ in range(5):
                    spins = [int(s) for s in rng.choice(np.arange(1, d + 1), size=l + 1, replace=False)]
                    theta = float(rng.uniform(-np.pi, np.pi))
                    target, v = lomso_conjugation_reduce(reg, spins, theta, a)
                    single = mat_exp(spin_operator(reg, spins[-1], "z"), -1j * theta * a)
                    worst = max(worst, float(np.max(np.abs(target - v @ single @ v.conj().T))))
                    cases += 1
    return CriterionResult(3, "multi-spin reduction", worst <= 1e-12, {"max_err": worst, "cases": cases})


def _column_error(built: np.ndarray, space: CompositeSpace, multi_of_k, phases) -> float:
    worst = 0.0
    for k, ph in enumerate(phases):
        idx = space.index(multi_of_k(k))
        col = built[:, idx].copy()
        col[idx] -= np.exp(1j * ph)
        worst = max(worst, float(np.linalg.norm(col)))
    return worst


def criterion_4(rng: np.random.Generator) -> CriterionResult:
    worst = 0.0
    for ds in (2, 3, 4):
        L = 2**ds
        for _ in range(2):
            a_, b_ = rng.uniform(-1.5, 1.5, size=2)
            target = TargetSpectrum.linear(float(a_), float(b_), t_m=float(rng.uniform(0.2, 2.0)))
            for sign in (1, -1):
                ph = target.phases(np.arange(L), sign)
                built, _ = conjugate_linear_spectrum(ds, L + 3, target, sign)
                worst = max(worst, _column_error(built, CompositeSpace((L, L + 3)), lambda k: (0, k), ph))
                built, _ = chained_transfer(ds, L, L, target, sign)
                worst = max(worst, _column_error(built, CompositeSpace((L, L, L)), lambda k: (0, 0, k), ph))
                del built
    return CriterionResult(4, "transfer pipelines", worst <= 1e-10, {"max_err": worst})


def criterion_5(rng: np.random.Generator) -> CriterionResult:
    basis = harmonic_eigensystem()
    states = {f"coherent:{b}": ExpansionState(basis, coherent_coefficients(b, 64)) for b in (0.5, 1.0, 2.0)}
    pk = GaussianPacket.from_center(0.6, 0.9, 0.4)
    states["gaussian"] = expand_state(pk, basis, 64)
    ok = True
    worst_ratio = 0.0
    metrics = {}
    for name, st in states.items():
        for pipeline in ("three_step", "five_step"):
            for sign in (1, -1):
                alpha = float(rng.uniform(0.1, 1.0))
                rep = transfer_norm_diagnostics(st, 4, pipeline, alpha, sign)
                ok &= rep.passed
                worst_ratio = max(worst_ratio, rep.max_norm / rep.bound)
                if name == "coherent:1.0":
                    metrics["beta1_bound"] = rep.bound
                    metrics["beta1_max_norm"] = max(metrics.get("beta1_max_norm", 0.0), rep.max_norm)
    metrics["worst_norm_over_bound"] = worst_ratio
    return CriterionResult(5, "certified truncation bound", ok, metrics)


MEHLER_CORNERS = [(3.0, 3.0, 0.9), (1.0, -1.0, 0.9), (3.0, -3.0, 0.9), (0.0, 3.0, 0.9), (-3.0, 3.0, -0.9)]


def criterion_6(rng: np.random.Generator) -> CriterionResult:
    pts = list(MEHLER_CORNERS)
    for _ in range(40):
        x, y = rng.uniform(-3, 3, size=2)
        s = rng.uniform(0, 0.9) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        pts.append((float(x), float(y), complex(s)))
    worst = 0.0
    for x, y, s in pts:
        series, closed = mehler_kernel(x, y, s, 200)
        worst = max(worst, abs(series - closed) / abs(closed))

    basis = harmonic_eigensystem()
    pk = GaussianPacket.from_center(0.4, 0.8, -0.3)
    st = expand_state(pk, basis, 80)
    xs = np.linspace(-5, 5, 81)
    worst_packet = 0.0
    for T in (0.7, 2.5):
        for sign in (1, -1):
            iv = SicInterval(T, sign)
            ref = propagate_packet(pk, QuadraticGreenForm.harmonic(iv))(xs)
            worst_packet = max(worst_packet, float(np.max(np.abs(eigensum_apply(st, iv, xs, damping=1e-12) - ref))))
    passed = worst <= 1e-10 and worst_packet <= 1e-6
    return CriterionResult(6, "Mehler kernel", passed, {"series_rel_err": worst, "packet_err": worst_packet})


def criterion_7(rng: np.random.Generator) -> CriterionResult:
    params = PhysicalParams(mass=1.3, omega=0.8)
    xa, xb = rng.uniform(-3, 3, size=(2, 30))
    worst = 0.0
    for T in rng.uniform(0.1, 3.0, size=4):
        plus, minus = SicInterval(float(T), 1), SicInterval(float(T), -1)
        for g in (
            lambda u, v, iv: free_green(u, v, iv, params),
            lambda u, v, iv: harmonic_green(u, v, iv, params),
            lambda u, v, iv: driven_green(u, v, iv, params, f=0.7),
        ):
            worst = max(worst, float(np.max(np.abs(g(xa, xb, minus) - np.conj(g(xb, xa, plus))))))
    m, w, hb = params.mass, params.omega, params.hbar
    tq = np.pi / (2 * w)
    worst_q = 0.0
    for a in (1, -1):
        closed = np.exp(-1j * a * np.pi / 4) * np.sqrt(m * w / (2 * np.pi * hb)) * np.exp(-1j * a * m * w * xa * xb / hb)
        worst_q = max(worst_q, float(np.max(np.abs(harmonic_green(xa, xb, SicInterval(tq, a), params) - closed))))
    return CriterionResult(7, "Green-function identities", worst <= 1e-12 and worst_q <= 1e-12, {"reversal_err": worst, "quarter_period_err": worst_q})


def _param_err(g: QuadraticGreenForm, h: QuadraticGreenForm) -> float:
    p, q = g.parameters(), h.parameters()
    return float(np.max(np.abs(p - q) / np.maximum(1.0, np.abs(q))))


def criterion_8(rng: np.random.Generator) -> CriterionResult:
    params = PhysicalParams(mass=0.9, omega=1.1)
    worst, worst_assoc, worst_free = 0.0, 0.0, 0.0
    for _ in range(10):
        T1, T2, T3 = rng.uniform(0.1, 0.9, size=3)
        f = float(rng.uniform(-1, 1))
        for a in (1, -1):
            g = lambda T: QuadraticGreenForm.driven(SicInterval(float(T), a), params, f)
            worst = max(worst, _param_err(compose_quadratic(g(T1), g(T2)), g(T1 + T2)))
            h = lambda T: QuadraticGreenForm.harmonic(SicInterval(float(T), a), params)
            worst = max(worst, _param_err(compose_quadratic(h(T1), h(T2)), h(T1 + T2)))
            fr = lambda T: QuadraticGreenForm.free(SicInterval(float(T), a), params)
            left = compose_quadratic(compose_quadratic(g(T1), fr(T2)), h(T3))
            right = compose_quadratic(g(T1), compose_quadratic(fr(T2), h(T3)))
            worst_assoc = max(worst_assoc, _param_err(left, right))
            worst_free = max(worst_free, _param_err(compose_quadratic(fr(T1), fr(T2)), fr(T1 + T2)))
    passed = worst <= 1e-9 and worst_assoc <= 1e-9 and worst_free <= 1e-14
    return CriterionResult(8, "composition calculus", passed, {"compose_err": worst, "assoc_err": worst_assoc, "free_err": worst_free})


def criterion_9(rng: np.random.Generator) -> CriterionResult:
    params = PhysicalParams(omega=1.0)
    worst_fid, worst_norm = 0.0, 0.0
    for _ in range(5):
        pk = GaussianPacket.from_center(*rng.uniform(-1, 1, size=1), float(rng.uniform(0.4, 1.5)), float(rng.uniform(-1, 1)))
        for a in (1, -1):
            # three legs, each below the first caustic
            s1, s2 = rng.uniform(0.6, 0.9, size=2)
            out = pk
            for T in (s1 * np.pi, s2 * np.pi, (2 - s1 - s2) * np.pi):
                out = propagate_packet(out, QuadraticGreenForm.harmonic(SicInterval(T, a), params))
            worst_fid = max(worst_fid, 1.0 - abs(pk.overlap(out)) ** 2)
            for g in (
                QuadraticGreenForm.free(SicInterval(1.3, a), params),
                QuadraticGreenForm.harmonic(SicInterval(2.1, a), params),
                QuadraticGreenForm.driven(SicInterval(0.7, a), params, 0.5),
            ):
                worst_norm = max(worst_norm, abs(propagate_packet(pk, g).norm() - 1.0))
    passed = worst_fid <= 1e-8 and worst_norm <= 1e-10
    return CriterionResult(9, "packet round trips", passed, {"infidelity": worst_fid, "norm_err": worst_norm})


def criterion_10(rng: np.random.Generator) -> CriterionResult:
    params = PhysicalParams()
    pk = GaussianPacket.from_center(0.5, 0.7, 0.3)
    ns = [8, 16, 32, 64, 128]
    slopes, worst_free = [], 0.0
    for a in (1, -1):
        iv = SicInterval(1.0, a)
        exact = propagate_packet(pk, QuadraticGreenForm.harmonic(iv, params))
        errs = [packet_error(trotter_green(lambda x: 0.5 * x**2, iv, LatticeConfig(n, -12, 12, 256), params), pk, exact) for n in ns]
        slopes.append(fit_slope(ns, errs))
        free = trotter_green(lambda x: 0.0 * x, iv, LatticeConfig(16, -15, 15, 256), params)
        worst_free = max(worst_free, packet_error(free, pk, propagate_packet(pk, QuadraticGreenForm.free(iv, params))))
    passed = all(abs(s - 1.0) <= 0.2 for s in slopes) and worst_free <= 1e-6
    return CriterionResult(10, "path integral convergence", passed, {"slope_plus": slopes[0], "slope_minus": slopes[1], "free_err": worst_free})


def ramped_oscillator(levels: int = 20, f0: float = 0.8, T: float = 1.0, t0: float = 0.0) -> PiecewiseHamiltonian:
    _, x, p = ladder_operators(levels)
    h0 = 0.5 * (p @ p + x @ x)
    return PiecewiseHamiltonian(lambda t: h0 + f0 * (t / T) * x, t0, T)


def criterion_11(rng: np.random.Generator) -> CriterionResult:
    H = ramped_oscillator()
    g437 = global_reversal_defect(H, "def437", 32)
    g440 = global_reversal_defect(H, "def440", 32)
    l440 = local_reversal_defect(H, "def440", 32)
    passed = g437 <= 1e-10 and l440 <= 1e-10 and g440 > 1e-3
    return CriterionResult(11, "time-dependent reversal", passed, {"def437_global": g437, "def440_local": l440, "def440_global": g440})


def criterion_12(rng: np.random.Generator) -> CriterionResult:
    levels = 40
    _, x, _ = ladder_operators(levels)
    h0 = np.diag(np.arange(levels) + 0.5).astype(complex)
    ratios = {}
    for n in (1, 2):
        errs = []
        for lam in (0.1, 0.05):
            split = HamiltonianSplit(h0, x, lam)
            errs.append(float(np.linalg.norm(mat_exp(split.full, -0.5j) - dyson_iterate(split, 1, 0.5, n))))
        ratios[n] = errs[0] / errs[1]
    zero = HamiltonianSplit(h0, np.zeros_like(h0), 1.0)
    exact_zero = float(np.max(np.abs(dyson_iterate(zero, 1, 0.5, 2) - mat_exp(h0, -0.5j))))
    passed = abs(ratios[1] - 4) <= 0.5 and abs(ratios[2] - 8) <= 1.5 and exact_zero == 0.0
    return CriterionResult(12, "perturbation scaling", passed, {"ratio_order1": ratios[1], "ratio_order2": ratios[2], "zero_h1_err": exact_zero})


def criterion_13(rng: np.random.Generator) -> CriterionResult:
    ok = True
    metrics = {}
    for swapped in (False, True):
        for a in (1, -1):
            d32 = quarter_period_conjugation(PhysicalParams(), 0.3, a, 32, swapped).defect
            d64 = quarter_period_conjugation(PhysicalParams(), 0.3, a, 64, swapped).defect
            ok &= d32 >= 2.0 * d64
            key = f"{'T' if swapped else 'V'}{'+' if a > 0 else '-'}"
            metrics[f"{key}_32"] = d32
            metrics[f"{key}_64"] = d64
    return CriterionResult(13, "quarter-period conjugation", ok, metrics)


def criterion_14(rng: np.random.Generator) -> CriterionResult:
    width = 1.0
    params = PhysicalParams()
    pk = GaussianPacket.from_center(0.45, 0.06, 5.0)
    basis = square_well_eigensystem(params, 0.0, width)
    st = expand_state(pk, basis, 200)
    xs = np.linspace(0.0, width, 101)
    worst, worst_wall = 0.0, 0.0
    for T in (0.01, 0.037):
        for a in (1, -1):
            iv = SicInterval(T, a)
            images = square_well_packet(pk, iv, params, width, 50, xs)
            worst = max(worst, float(np.max(np.abs(images - eigensum_apply(st, iv, xs)))))
            worst_wall = max(worst_wall, float(np.max(np.abs(images[[0, -1]]))))
    return CriterionResult(14, "square well images", worst <= 1e-6 and worst_wall <= 1e-8, {"packet_err": worst, "wall_amplitude": worst_wall})


CRITERIA: list[Callable[[np.random.Generator], CriterionResult]] = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
    criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13, criterion_14,
]


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng([seed, number])
    start = time.perf_counter()
    try:
        res = CRITERIA[number - 1](rng)
    except CausticError as exc:
        res = CriterionResult(number, CRITERIA[number - 1].__name__, False, {"error": str(exc)})
    res.seconds = time.perf_counter() - start
    return res


def run_all(seed: int = 0) -> list[CriterionResult]:
    return [run_criterion(i, seed) for i in range(1, len(CRITERIA) + 1)]
