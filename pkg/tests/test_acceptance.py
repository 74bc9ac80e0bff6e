"""Acceptance criteria, one test each, at the stated tolerances and runtime limits.

Every test reports a single PASS/FAIL line (collected in the terminal
summary) before asserting.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

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
from purestates.dynamics import (
    ConicalExperimentSpec,
    PropagationConfig,
    SplitStepPropagator,
    conical_potential,
    default_dt,
    default_grid,
    free_potential,
    linear_potential,
    prepare_initial_data,
    propagate,
    run_conical_experiment,
)
from purestates.probability import mix_measures, mixture_variance_decomposition
from purestates.purification import partial_trace_II, purified_expectation, purify
from purestates.sampling import (
    random_density,
    random_distribution,
    random_hermitian,
    random_mixed_spread,
    random_unit_vector,
    random_unitary,
)
from purestates.states import (
    PAULI,
    DensityMatrix,
    bloch_from_density,
    density_from_bloch,
    expectation,
    hs_norm,
    is_pure,
    vector_state,
    vector_state_gap,
)
from purestates.weyl import (
    Grid1D,
    bump_symbol,
    gaussian_envelope,
    husimi,
    husimi_peak,
    moyal_product_truncated,
    semiclassical_limit_table,
    wave_packet,
    weyl_quantize,
)

C = np.array([[0, 1j], [-1j, 0]])


def test_criterion_01_counterexample(report):
    t0 = time.perf_counter()
    mix = DensityMatrix(np.diag([1 / 3, 2 / 3]))
    e_mix = expectation(mix, C)
    e_vec = expectation(vector_state(np.array([1j, math.sqrt(2)]) / math.sqrt(3)), C)
    # A = diag(a1, a2), B = [[0, b], [b, 0]] from the family in the text, with a1 = -5, a2 = 5, b = 5
    A = np.diag([-5.0, 5.0])
    B = 5.0 * PAULI[0]
    gap = vector_state_gap([(A, expectation(mix, A)), (B, 0.0), (C, 0.0)], 200)
    elapsed = time.perf_counter() - t0
    ok = e_mix == 0.0 and abs(e_vec - 2 * math.sqrt(2) / 3) <= 1e-12 and gap >= 0.4 and elapsed < 1.0
    report(1, "two-level counterexample", ok,
           f"<C>_mix={e_mix!r}, <C>_vec={e_vec:.15f} (2sqrt2/3={2 * math.sqrt(2) / 3:.15f}), gap={gap:.4f}, {elapsed:.2f}s")
    assert ok


def test_criterion_02_hs_purity(report):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst_pure, worst_mixed = 0.0, 0.0
    for n in range(2, 9):
        for _ in range(100):
            worst_pure = max(worst_pure, abs(hs_norm(vector_state(random_unit_vector(n, rng))) - 1))
            worst_mixed = max(worst_mixed, hs_norm(random_mixed_spread(n, rng, floor=0.1)))
    elapsed = time.perf_counter() - t0
    ok = worst_pure <= 1e-10 and worst_mixed <= 1 - 5e-3 and elapsed < 5.0
    report(2, "Hilbert-Schmidt purity", ok,
           f"max |hs-1| pure={worst_pure:.1e}, max hs mixed={worst_mixed:.4f}, {elapsed:.2f}s")
    assert ok


def test_criterion_03_bloch(report):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst_eig, worst_rt = 0.0, 0.0
    for _ in range(10_000):
        a = rng.normal(size=3)
        a *= rng.uniform() ** (1 / 3) / np.linalg.norm(a)
        rho = density_from_bloch(a)
        r = np.linalg.norm(a)
        ev = np.linalg.eigvalsh(rho.entries)
        worst_eig = max(worst_eig, float(np.max(np.abs(ev - [(1 - r) / 2, (1 + r) / 2]))))
        back = density_from_bloch(bloch_from_density(rho))
        worst_rt = max(worst_rt, float(np.max(np.abs(bloch_from_density(rho).a - a))),
                       float(np.max(np.abs(back.entries - rho.entries))))
    elapsed = time.perf_counter() - t0
    ok = worst_eig <= 1e-12 and worst_rt <= 1e-12 and elapsed < 5.0
    report(3, "Bloch geometry", ok, f"eigenvalue err={worst_eig:.1e}, round trip={worst_rt:.1e}, {elapsed:.2f}s")
    assert ok


def _exact_variance(values, weights):
    vs = [Fraction(v) for v in values]
    ws = [Fraction(w) for w in weights]
    tot = sum(ws)
    m = sum(v * w for v, w in zip(vs, ws)) / tot
    return float(sum(w * (v - m) ** 2 for v, w in zip(vs, ws)) / tot)


def test_criterion_04_mixture_variance(report):
    rng = np.random.default_rng(4)
    cases = []
    for _ in range(1000):
        mu1 = random_distribution(int(rng.integers(1, 11)), rng)
        mu2 = random_distribution(int(rng.integers(1, 11)), rng)
        c = rng.normal(size=3)
        f = lambda p, c=c: c[0] + c[1] * p + c[2] * p * p
        cases.append((mu1, mu2, float(rng.uniform()), f))
    t0 = time.perf_counter()
    worst_id, worst_bf = 0.0, 0.0
    for mu1, mu2, lam, f in cases:
        d = mixture_variance_decomposition(mu1, mu2, lam, f)
        worst_id = max(worst_id, abs(d.total - (d.within + d.between)))
        mixed = mix_measures(mu1, mu2, lam)
        worst_bf = max(worst_bf, abs(d.total - _exact_variance([f(p) for p in mixed.points], mixed.weights)))
    elapsed = time.perf_counter() - t0
    ok = worst_id <= 1e-12 and worst_bf <= 1e-12 and elapsed < 1.0
    report(4, "mixture-variance identity", ok,
           f"identity residual={worst_id:.1e}, vs exact brute force={worst_bf:.1e}, {elapsed:.2f}s")
    assert ok


def test_criterion_05_gns(report):
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst_id, worst_hom, agree, total = 0.0, 0.0, 0, 0
    for n in (2, 3, 4):
        alg = full_matrix_algebra(n)
        for k in range(100):
            rank = 1 if k % 2 == 0 else int(rng.integers(2, n + 1))
            rho = random_density(n, rng, rank=rank)
            w = state_from_density(alg, rho)
            rep = gns(alg, w)
            worst_id = max(worst_id, gns_identity_residual(rep, w))
            worst_hom = max(worst_hom, homomorphism_residual(rep))
            agree += is_pure_via_gns(alg, w) == is_pure(rho)
            total += 1
    M2 = full_matrix_algebra(2)
    r1 = gns(M2, state_from_vector(M2, [1, 0]))
    r2 = gns(M2, state_from_density(M2, np.diag([1 / 3, 2 / 3])))
    diag = diagonal_algebra(2)
    wd = state_from_vector(diag, np.ones(2) / math.sqrt(2))
    r3 = gns(diag, wd)
    fixed = (
        commutant_dimension(r1) == 1
        and (r2.rep_dim, commutant_dimension(r2)) == (4, 4)
        and commutant_dimension(r3) == 2
        and not is_pure_via_gns(diag, wd)
    )
    elapsed = time.perf_counter() - t0
    ok = worst_id <= 1e-9 and worst_hom <= 1e-8 and agree == total and fixed and elapsed < 30.0
    report(5, "GNS suite", ok,
           f"identity={worst_id:.1e}, homomorphism={worst_hom:.1e}, agreement {agree}/{total}, "
           f"fixed cases {'ok' if fixed else 'WRONG'}, {elapsed:.2f}s")
    assert ok


def test_criterion_06_purification(report):
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst_def, worst_rt, worst_w, worst_up = 0.0, 0.0, 0.0, 0.0
    mixed_ok = True
    for n in (2, 3, 4):
        for k in range(50):
            rho = random_density(n, rng, rank=int(rng.integers(1, n + 1)))
            D = random_hermitian(n, rng)
            Psi = purify(rho, n)
            worst_def = max(worst_def, abs(purified_expectation(Psi, D) - expectation(rho, D)))
            worst_rt = max(worst_rt, float(np.linalg.norm(partial_trace_II(Psi.projector(), n, n).entries - rho.entries)))
            Psi_u = purify(rho, n, basis_II=random_unitary(n, rng))
            worst_w = max(worst_w, abs(purified_expectation(Psi_u, D) - purified_expectation(Psi, D)))
            worst_up = max(worst_up, abs(hs_norm(Psi.projector()) - 1))
            if np.sum(rho.eigvalsh() > 1e-12) > 1:
                mixed_ok = mixed_ok and hs_norm(rho) < 1
    elapsed = time.perf_counter() - t0
    ok = max(worst_def, worst_rt, worst_w, worst_up) <= 1e-10 and mixed_ok and elapsed < 10.0
    report(6, "purification suite", ok,
           f"identity={worst_def:.1e}, round trip={worst_rt:.1e}, w-basis={worst_w:.1e}, "
           f"|hs_up-1|={worst_up:.1e}, mixed downstairs<1: {mixed_ok}, {elapsed:.2f}s")
    assert ok


def test_criterion_07_semiclassical_limit(report):
    t0 = time.perf_counter()
    a = bump_symbol((0.0, 0.0), (2.0, 2.0))
    assert a.support_box[0][0] < 0.3 < a.support_box[0][1]
    rows = semiclassical_limit_table(gaussian_envelope, 0.3, -0.5, a, [0.4, 0.2, 0.1, 0.05], Grid1D(1024, 8.0))
    errs = [r.error for r in rows]
    ratios = [e1 / e2 for e1, e2 in zip(errs, errs[1:])]
    elapsed = time.perf_counter() - t0
    ok = all(e2 < e1 for e1, e2 in zip(errs, errs[1:])) and all(r >= 1.5 for r in ratios) and elapsed < 120
    report(7, "semiclassical limit", ok,
           "errors " + ", ".join(f"{e:.4g}" for e in errs) + "; ratios " + ", ".join(f"{r:.2f}" for r in ratios)
           + f", {elapsed:.1f}s")
    assert ok


def test_criterion_08_moyal(report):
    t0 = time.perf_counter()
    g = Grid1D(1024, 8.0)
    a = bump_symbol((0.3, 0.0), (3.5, 3.5))
    b = bump_symbol((-0.2, 0.4), (3.0, 3.5))
    errs = []
    for hbar in (0.2, 0.1, 0.05):
        lhs = weyl_quantize(a, hbar, g) @ weyl_quantize(b, hbar, g)
        rhs = weyl_quantize(moyal_product_truncated(a, b, hbar, 2), hbar, g)
        errs.append(np.linalg.norm(lhs - rhs, 2))
    ratios = [e1 / e2 for e1, e2 in zip(errs, errs[1:])]
    elapsed = time.perf_counter() - t0
    ok = all(r >= 4 for r in ratios) and elapsed < 120
    report(8, "Moyal composition", ok,
           "op-norm errors " + ", ".join(f"{e:.3e}" for e in errs) + "; ratios "
           + ", ".join(f"{r:.2f}" for r in ratios) + f", {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_09_conical_experiment(report):
    t0 = time.perf_counter()
    p1sq, p2sq = 0.36, 0.64
    grid = default_grid()
    pot = conical_potential()
    by_hbar = {}
    worst_drift = 0.0
    for hbar in (0.04, 0.02, 0.01):
        spec = ConicalExperimentSpec(beta=0.05, p1=0.6, p2=0.8, hbar=hbar, times=(-1.0, 1.0))
        recs = run_conical_experiment(spec, radius=0.3)
        by_hbar[hbar] = {r.t: r for r in recs}
        for r in recs:
            worst_drift = max(worst_drift, r.norm_drift / max(1.0, r.steps / 1000))

    # time reversibility at the default hbar: out to t = 1 and back
    spec = ConicalExperimentSpec()
    dt = default_dt(grid, spec.hbar, pot)
    n = math.ceil(1.0 / dt)
    psi0 = prepare_initial_data(spec, grid)
    prop = SplitStepPropagator(grid, spec.hbar, pot)
    back = prop.step(prop.step(psi0.values, 1.0 / n, n), -1.0 / n, n)
    rev = float(np.sqrt(np.sum(np.abs(back - psi0.values) ** 2) * grid.dx))

    d = by_hbar[0.01]
    pre = d[-1.0].mass_pre
    m1, m2 = d[1.0].mass1, d[1.0].mass2
    discrepancy = [max(abs(by_hbar[h][1.0].mass1 - p1sq), abs(by_hbar[h][1.0].mass2 - p2sq)) for h in (0.04, 0.02, 0.01)]
    monotone = all(b <= a for a, b in zip(discrepancy, discrepancy[1:]))
    elapsed = time.perf_counter() - t0
    checks = {
        "t=-1 mass at (0.5,1) >= 0.85": pre >= 0.85,
        "t=+1 mass1 = 0.36 +- 0.10": abs(m1 - p1sq) <= 0.10,
        "t=+1 mass2 = 0.64 +- 0.10": abs(m2 - p2sq) <= 0.10,
        "monotone approach over hbar": monotone,
        "norm drift <= 1e-9/1000 steps": worst_drift <= 1e-9,
        "reversibility <= 1e-7": rev <= 1e-7,
        "runtime <= 15 min": elapsed <= 900,
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    report(9, "conical splitting", ok,
           f"hbar=0.01: mass(0.5,1)@t=-1={pre:.3g}, mass1@t=1={m1:.3f}, mass2@t=1={m2:.3f}; "
           f"discrepancy over hbar 0.04/0.02/0.01 = {', '.join(f'{x:.3f}' for x in discrepancy)}; "
           f"drift={worst_drift:.1e}, reversibility={rev:.1e}, {elapsed:.0f}s"
           + (f"; failed: {'; '.join(failed)}" if failed else ""))
    assert ok, failed


def test_criterion_10_classical_transport(report):
    t0 = time.perf_counter()
    g = Grid1D(1024, 8.0)
    hbar, t = 0.05, 0.5
    cell = math.sqrt(hbar) / 4
    details, ok = [], True
    for name, pot, xi0, target in (
        ("V=0", free_potential(), 1.0, (0.5, 1.0)),
        ("V=-x", linear_potential(1.0), 0.0, (0.125, 0.5)),
    ):
        psi0 = wave_packet(gaussian_envelope, 0.0, xi0, hbar, g)
        dt = min(hbar / 8, PropagationConfig.max_stable_dt(g, hbar, pot))
        n = math.ceil(t / dt)
        psi = propagate(psi0, PropagationConfig(g, hbar, t / n, n, pot))
        xs = target[0] + cell * np.arange(-8, 9)
        ps = target[1] + cell * np.arange(-8, 9)
        px, pp = husimi_peak(husimi(psi, xs, ps), xs, ps)
        dx, dp = abs(px - target[0]), abs(pp - target[1])
        ok = ok and dx <= cell and dp <= cell
        details.append(f"{name} peak ({px:.4f}, {pp:.4f}) vs {target}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 60
    report(10, "free/linear transport", ok, "; ".join(details) + f", cell={cell:.4f}, {elapsed:.1f}s")
    assert ok
