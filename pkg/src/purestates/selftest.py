"""Quick invariant suite behind ``purestates selftest``.

Each check is a reduced-size version of a test-suite property and returns
``(passed, detail)``. The whole table runs in a few seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from purestates.algebra_gns import (
    commutant_dimension,
    diagonal_algebra,
    full_matrix_algebra,
    gns,
    gns_identity_residual,
    homomorphism_residual,
    is_pure_via_gns,
    state_from_density,
    state_from_vector,
)
from purestates.dynamics import PropagationConfig, SplitStepPropagator, conical_potential, free_potential, propagate
from purestates.probability import mix_measures, mixture_variance_decomposition, variance
from purestates.purification import partial_trace_II, purified_expectation, purify
from purestates.sampling import (
    random_density,
    random_distribution,
    random_hermitian,
    random_mixed_spread,
    random_unit_vector,
)
from purestates.states import (
    DensityMatrix,
    bloch_from_density,
    density_from_bloch,
    expectation,
    hs_norm,
    is_pure,
    vector_state,
)
from purestates.weyl import (
    Grid1D,
    bump_symbol,
    disc_mass,
    expectation_symbol,
    gaussian_envelope,
    plateau_symbol,
    semiclassical_limit_table,
    wave_packet,
    weyl_quantize,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _counterexample(rng):
    C = np.array([[0, 1j], [-1j, 0]])
    mix = expectation(DensityMatrix(np.diag([1 / 3, 2 / 3])), C)
    vec = expectation(vector_state(np.array([1j, math.sqrt(2)]) / math.sqrt(3)), C)
    ok = mix == 0.0 and abs(vec - 2 * math.sqrt(2) / 3) <= 1e-12
    return ok, f"mixture {mix:g}, vector {vec:.12f}"


def _purity(rng):
    worst_pure, worst_mixed = 0.0, 0.0
    for n in range(2, 6):
        for _ in range(20):
            worst_pure = max(worst_pure, abs(hs_norm(vector_state(random_unit_vector(n, rng))) - 1))
            worst_mixed = max(worst_mixed, hs_norm(random_mixed_spread(n, rng)))
    return worst_pure <= 1e-10 and worst_mixed <= 1 - 5e-3, f"pure dev {worst_pure:.1e}, max mixed {worst_mixed:.4f}"


def _bloch(rng):
    worst = 0.0
    for _ in range(500):
        a = rng.normal(size=3)
        a *= rng.uniform() ** (1 / 3) / np.linalg.norm(a)
        worst = max(worst, float(np.max(np.abs(bloch_from_density(density_from_bloch(a)).a - a))))
    return worst <= 1e-12, f"round trip {worst:.1e}"


def _mixture_variance(rng):
    worst = 0.0
    f = np.sin
    for _ in range(200):
        mu1, mu2 = random_distribution(int(rng.integers(1, 11)), rng), random_distribution(int(rng.integers(1, 11)), rng)
        lam = float(rng.uniform())
        d = mixture_variance_decomposition(mu1, mu2, lam, f)
        brute = variance(f, mix_measures(mu1, mu2, lam))
        worst = max(worst, abs(d.total - d.within - d.between), abs(d.total - brute))
    return worst <= 1e-12, f"identity residual {worst:.1e}"


def _gns(rng):
    M2 = full_matrix_algebra(2)
    fixed = (
        commutant_dimension(gns(M2, state_from_vector(M2, [1, 0]))) == 1
        and commutant_dimension(gns(M2, state_from_density(M2, np.diag([1 / 3, 2 / 3])))) == 4
    )
    diag = diagonal_algebra(2)
    fixed = fixed and not is_pure_via_gns(diag, state_from_vector(diag, np.ones(2) / math.sqrt(2)))
    worst, agree = 0.0, True
    for n in (2, 3):
        alg = full_matrix_algebra(n)
        for k in range(10):
            rho = random_density(n, rng, rank=1 if k % 2 else None)
            w = state_from_density(alg, rho)
            rep = gns(alg, w)
            worst = max(worst, gns_identity_residual(rep, w), homomorphism_residual(rep))
            agree = agree and is_pure_via_gns(alg, w) == is_pure(rho)
    return fixed and agree and worst <= 1e-8, f"fixed cases {'ok' if fixed else 'bad'}, residual {worst:.1e}"


def _purification(rng):
    worst = 0.0
    for n in (2, 3, 4):
        for _ in range(10):
            rho = random_density(n, rng)
            D = random_hermitian(n, rng)
            Psi = purify(rho, n)
            worst = max(
                worst,
                abs(purified_expectation(Psi, D) - expectation(rho, D)),
                float(np.linalg.norm(partial_trace_II(Psi.projector(), n, n).entries - rho.entries)),
            )
    return worst <= 1e-10, f"residual {worst:.1e}"


def _weyl(rng):
    g = Grid1D(512, 8.0)
    K = weyl_quantize(bump_symbol((0.2, 0.1), (2.0, 2.0)), 0.1, g)
    herm = float(np.max(np.abs(K - K.conj().T)))
    psi = wave_packet(gaussian_envelope, 0.3, -0.5, 0.1, g)
    one = expectation_symbol(psi, plateau_symbol((0.3, -0.5), 2.0, 3.0))
    return herm <= 1e-9 and abs(one - 1) <= 1e-6, f"hermiticity {herm:.1e}, unity {abs(one - 1):.1e}"


def _semiclassical(rng):
    rows = semiclassical_limit_table(
        gaussian_envelope, 0.3, -0.5, bump_symbol((0, 0), (2, 2)), [0.4, 0.2, 0.1], Grid1D(512, 8.0)
    )
    errs = [r.error for r in rows]
    ok = all(e1 / e2 >= 1.5 for e1, e2 in zip(errs, errs[1:]))
    return ok, "errors " + ", ".join(f"{e:.3g}" for e in errs)


def _dynamics(rng):
    g = Grid1D(1024, 8.0)
    hbar = 0.05
    psi0 = wave_packet(gaussian_envelope, 0.0, 1.0, hbar, g)
    psi = propagate(psi0, PropagationConfig(g, hbar, hbar / 8, 80, free_potential()))
    m = disc_mass(psi, (0.5, 1.0), 3 * math.sqrt(hbar))
    prop = SplitStepPropagator(g, hbar, conical_potential())
    dt = hbar / 16
    back = prop.step(prop.step(psi0.values, dt, 500), -dt, 500)
    rev = float(np.sqrt(np.sum(np.abs(back - psi0.values) ** 2) * g.dx))
    return m >= 0.9 and rev <= 1e-7, f"transport mass {m:.3f}, reversibility {rev:.1e}"


CHECKS: list[tuple[str, Callable]] = [
    ("counterexample", _counterexample),
    ("hs_purity", _purity),
    ("bloch_roundtrip", _bloch),
    ("mixture_variance", _mixture_variance),
    ("gns", _gns),
    ("purification", _purification),
    ("weyl_basics", _weyl),
    ("semiclassical_rate", _semiclassical),
    ("split_step", _dynamics),
]


def run_selftest(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, not an aborted table
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  status  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.detail}")
    return "\n".join(lines)
