import math

import numpy as np
import pytest

from purestates.dynamics import (
    ConicalExperimentSpec,
    PropagationConfig,
    SplitStepPropagator,
    branch_mass,
    branch_momentum,
    conical_potential,
    default_dt,
    default_grid,
    free_potential,
    linear_potential,
    predicted_centers,
    prepare_initial_data,
    propagate,
    run_conical_experiment,
)
from purestates.errors import DomainError, ResolutionError, ValidationError
from purestates.states import hs_norm, vector_state
from purestates.weyl import Bump1D, Grid1D, disc_mass, gaussian_envelope, husimi, husimi_peak, wave_packet

G = Grid1D(1024, 8.0)


def _peak(psi, center, half=0.6):
    step = math.sqrt(psi.hbar) / 4
    xs = center[0] + np.arange(-half, half, step)
    ps = center[1] + np.arange(-half, half, step)
    return husimi_peak(husimi(psi, xs, ps), xs, ps), step


@pytest.mark.parametrize(
    "potential, xi0, target",
    [(free_potential(), 1.0, (0.5, 1.0)), (linear_potential(1.0), 0.0, (0.125, 0.5))],
)
def test_classical_transport(potential, xi0, target):
    hbar, t = 0.05, 0.5
    psi0 = wave_packet(gaussian_envelope, 0.0, xi0, hbar, G)
    dt = min(hbar / 8, PropagationConfig.max_stable_dt(G, hbar, potential))
    n = math.ceil(t / dt)
    psi = propagate(psi0, PropagationConfig(G, hbar, t / n, n, potential))
    (px, pp), cell = _peak(psi, target)
    assert abs(px - target[0]) <= cell and abs(pp - target[1]) <= cell


def test_zero_steps_is_identity():
    psi0 = wave_packet(gaussian_envelope, 0.2, 0.3, 0.05, G)
    psi = propagate(psi0, PropagationConfig(G, 0.05, 0.001, 0, conical_potential()))
    np.testing.assert_array_equal(psi.values, psi0.values)


def test_unitarity_and_reversibility():
    hbar = 0.02
    pot = conical_potential()
    dt = default_dt(G, hbar, pot)
    psi0 = wave_packet(gaussian_envelope, 0.3, 0.2, hbar, G)
    prop = SplitStepPropagator(G, hbar, pot)
    v = prop.step(psi0.values, dt, 2000)
    assert abs(np.sqrt(np.sum(np.abs(v) ** 2) * G.dx) - 1) <= 2e-9
    back = prop.step(v, -dt, 2000)
    assert np.sqrt(np.sum(np.abs(back - psi0.values) ** 2) * G.dx) <= 1e-7


def test_energy_drift_small():
    hbar = 0.02
    pot = linear_potential(0.5)
    dt = default_dt(G, hbar, pot)
    psi0 = wave_packet(gaussian_envelope, 0.0, 0.3, hbar, G)
    prop = SplitStepPropagator(G, hbar, pot)
    e0 = prop.energy(psi0.values)
    e1 = prop.energy(prop.step(psi0.values, dt, int(1.0 / dt)))
    assert abs(e1 - e0) <= 1e-4 * abs(e0) + 1e-6


def test_config_errors():
    with pytest.raises(ResolutionError):
        PropagationConfig(G, 1e-4, 1e-5, 1, free_potential())
    with pytest.raises(ValidationError):
        PropagationConfig(G, 0.05, 0.05, 1, conical_potential())
    with pytest.raises(DomainError):
        PropagationConfig(G, 0.05, 0.0, 1)
    psi = wave_packet(gaussian_envelope, 0, 0, 0.05, G)
    with pytest.raises(ValidationError):
        propagate(psi, PropagationConfig(G, 0.1, 0.001, 1))


def test_conical_potential_values():
    V = conical_potential()
    assert V(np.array(0.0)) == 0.0
    np.testing.assert_array_equal(V(np.array([-2.0, 2.0])), [-2.0, -2.0])
    # force -V' = sign(x)
    x = np.array([-1.0, 1.0])
    h = 1e-6
    np.testing.assert_allclose(-(V(x + h) - V(x - h)) / (2 * h), [-1.0, 1.0])
    smooth = conical_potential(0.1)
    assert smooth(np.array(0.0)) == 0.0
    with pytest.raises(DomainError):
        conical_potential(-1.0)


def test_spec_validation():
    with pytest.raises(DomainError):
        ConicalExperimentSpec(beta=0.2)
    with pytest.raises(ValidationError):
        ConicalExperimentSpec(p1=0.5, p2=0.5)
    with pytest.raises(ValidationError):
        ConicalExperimentSpec(envelope1=Bump1D(0.5, 1.0))
    with pytest.raises(ValidationError):
        ConicalExperimentSpec(envelope1=Bump1D(1.0, 1.0), envelope2=Bump1D(-0.5, 1.0))


def test_predicted_centers():
    c = predicted_centers(1.0)
    assert c["mass1"] == (0.5, 1.0) and c["mass2"] == (-0.5, -1.0) and c["mass_pre"] == (0.5, -1.0)


def test_initial_data_single_branch():
    grid = Grid1D(4096, 8.0)
    spec = ConicalExperimentSpec(p1=1.0, p2=0.0, hbar=0.02)
    psi = prepare_initial_data(spec, grid)
    assert np.all(psi.values[grid.x < 0] == 0)


def test_initial_data_branch_masses_and_momentum():
    grid = default_grid()
    spec = ConicalExperimentSpec()
    psi = prepare_initial_data(spec, grid)
    rt = math.sqrt(spec.hbar)
    xi2 = branch_momentum(spec)
    assert xi2 == pytest.approx(-(0.01**0.05))
    # the branches share x-scale sqrt(hbar) but sit hbar^beta apart in xi: split there
    step = rt / 5
    xs = np.arange(-1.5, 1.5, step)
    ps = np.arange(-2.5, 1.5, step)
    H = husimi(psi, xs, ps) * step * step
    upper = ps > 0.5 * xi2
    assert H[:, upper].sum() == pytest.approx(0.36, rel=0.02)
    assert H[:, ~upper].sum() == pytest.approx(0.64, rel=0.02)

    near = (np.abs(xs + 1.5 * rt) < 0.5)[:, None] & (np.abs(ps - xi2) < 0.5)[None, :]
    i, j = np.unravel_index(np.argmax(np.where(near, H, -1)), H.shape)
    assert abs(ps[j] - xi2) <= step


def test_branch_mass_examples():
    hbar = 0.01
    psi = wave_packet(gaussian_envelope, 0.0, 0.0, hbar, G)
    assert branch_mass(psi, (0, 0), 0.3) >= 0.95
    assert branch_mass(psi, (0, 0), 2 * math.sqrt(hbar)) == pytest.approx(1 - math.exp(-2), abs=5e-3)
    assert branch_mass(psi, (10 * math.sqrt(hbar), 0), 2 * math.sqrt(hbar)) <= 1e-3
    with pytest.raises(ValidationError):
        branch_mass(psi, (0, 0), 0.1)
    with pytest.raises(ValidationError):
        branch_mass(psi, (7.9, 0), 0.3)


def test_evolved_state_stays_pure():
    spec = ConicalExperimentSpec(hbar=0.04)
    grid = Grid1D(2048, 8.0)
    pot = conical_potential()
    cfg = PropagationConfig(grid, spec.hbar, default_dt(grid, spec.hbar, pot), 100, pot)
    psi = propagate(prepare_initial_data(spec, grid), cfg)
    v = psi.values * math.sqrt(grid.dx)
    assert abs(hs_norm(vector_state(v, normalize=True)) - 1) <= 1e-12


@pytest.mark.slow
def test_mixture_weights_along_true_trajectories():
    # branch masses measured around each branch's own classical path carry the ratio p2^2 / p1^2
    spec = ConicalExperimentSpec(hbar=0.01, times=(1.0,))
    grid = default_grid()
    pot = conical_potential()
    rt = math.sqrt(spec.hbar)
    xi2 = branch_momentum(spec)
    t = 1.0
    seen = {}
    cfg = PropagationConfig(grid, spec.hbar, default_dt(grid, spec.hbar, pot), 0, pot)
    run_conical_experiment(spec, cfg, snapshots=lambda t, psi: seen.setdefault(t, psi))
    psi = seen[1.0]
    c1 = (1.5 * rt + 0.5 * t * t, t)
    c2 = (-1.5 * rt + xi2 * t - 0.5 * t * t, xi2 - t)
    m1, m2 = disc_mass(psi, c1, 0.3), disc_mass(psi, c2, 0.3)
    assert m2 / m1 == pytest.approx(0.64 / 0.36, rel=0.05)


@pytest.mark.slow
def test_conical_run_health():
    spec = ConicalExperimentSpec(hbar=0.04, times=(-0.5, 0.5, 1.0))
    recs = run_conical_experiment(spec)
    assert [r.t for r in recs] == [-0.5, 0.5, 1.0]
    e0 = SplitStepPropagator(default_grid(), 0.04, conical_potential()).energy(
        prepare_initial_data(spec, default_grid()).values
    )
    for r in recs:
        assert r.norm_drift <= 1e-9 * max(1.0, r.steps / 1000)
        assert r.energy_drift <= 1e-4 * abs(e0) + 1e-6
        assert 0 <= r.mass1 <= 1.02 and 0 <= r.mass2 <= 1.02
