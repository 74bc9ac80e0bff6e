"""Split-step Schrodinger propagation and the conical-potential experiment.

The Hamiltonian is H = -(hbar^2/2) d^2/dx^2 + V on a periodic grid. One
Strang step applies half the potential phase, the exact kinetic phase in
Fourier space, then the other half of the potential phase; it is symmetric,
so stepping with -dt inverts a step with +dt exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from purestates.errors import (
    BoundarySpillError,
    DomainError,
    NormDriftError,
    ResolutionError,
    ValidationError,
)
from purestates.weyl import Bump1D, Grid1D, GridWavefunction, disc_mass, normalized

EDGE_SPILL_TOL = 1e-4
NORM_DRIFT_PER_1000 = 1e-9
DEFAULT_RADIUS = 0.3
# absolute step cap: the splitting error at the cone apex scales with dt^2
# independently of hbar, and the energy tolerance has an absolute floor of 1e-6
DT_CAP = 1e-3


def conical_potential(smoothing: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    """V(x) = -|x|, or -sqrt(x^2 + w^2) + w for smoothing width w > 0."""
    if smoothing < 0:
        raise DomainError("smoothing width must be non-negative")
    if smoothing == 0.0:
        return lambda x: -np.abs(np.asarray(x, dtype=float))
    w = float(smoothing)
    return lambda x: -np.sqrt(np.asarray(x, dtype=float) ** 2 + w * w) + w


def linear_potential(force: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """V(x) = -force * x (constant force ``force``)."""
    return lambda x: -force * np.asarray(x, dtype=float)


def free_potential() -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class PropagationConfig:
    grid: Grid1D
    hbar: float
    dt: float
    n_steps: int = 0
    potential: Callable[[np.ndarray], np.ndarray] = field(default_factory=free_potential)

    def __post_init__(self) -> None:
        if not self.hbar > 0:
            raise DomainError("hbar must be positive")
        if self.dt == 0 or not math.isfinite(self.dt):
            raise DomainError("dt must be finite and non-zero")
        if self.n_steps < 0:
            raise DomainError("n_steps must be non-negative")
        if math.sqrt(self.hbar) < 4 * self.grid.dx:
            raise ResolutionError(
                f"sqrt(hbar) = {math.sqrt(self.hbar):.3g} is below 4 dx = {4 * self.grid.dx:.3g}"
            )
        vmax = float(np.max(np.abs(self.potential(self.grid.x))))
        if vmax > 0 and abs(self.dt) > 0.5 * self.hbar / vmax * (1 + 1e-12):
            raise ValidationError(
                f"|dt| = {abs(self.dt):.3g} exceeds the phase-step bound 0.5 hbar / max|V| = {0.5 * self.hbar / vmax:.3g}"
            )

    @staticmethod
    def max_stable_dt(grid: Grid1D, hbar: float, potential) -> float:
        vmax = float(np.max(np.abs(potential(grid.x))))
        return math.inf if vmax == 0 else 0.5 * hbar / vmax


class SplitStepPropagator:
    """Strang splitting for a fixed grid, hbar and potential."""

    def __init__(self, grid: Grid1D, hbar: float, potential) -> None:
        self.grid = grid
        self.hbar = hbar
        self.V = np.asarray(potential(grid.x), dtype=float)
        self.k2 = grid.wavenumbers() ** 2

    def step(self, psi: np.ndarray, dt: float, n: int) -> np.ndarray:
        half = np.exp(-0.5j * dt * self.V / self.hbar)
        kin = np.exp(-0.5j * dt * self.hbar * self.k2)
        v = np.asarray(psi, dtype=complex)
        for _ in range(n):
            v = half * np.fft.ifft(kin * np.fft.fft(half * v))
        return v

    def energy(self, psi: np.ndarray) -> float:
        """<H> with the kinetic part computed spectrally and V pointwise."""
        dx = self.grid.dx
        norm2 = np.sum(np.abs(psi) ** 2) * dx
        ph = np.fft.fft(psi)
        kinetic = 0.5 * self.hbar**2 * np.sum(self.k2 * np.abs(ph) ** 2) / np.sum(np.abs(ph) ** 2)
        potential = np.sum(self.V * np.abs(psi) ** 2) * dx / norm2
        return float(kinetic + potential)


def _norm(grid: Grid1D, v: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(v) ** 2) * grid.dx))


def _health(grid: Grid1D, v: np.ndarray, steps: int) -> float:
    drift = abs(_norm(grid, v) - 1.0)
    if drift > NORM_DRIFT_PER_1000 * max(1.0, steps / 1000.0):
        raise NormDriftError(f"norm drift {drift:.2e} after {steps} steps")
    spill = float(np.sum(np.abs(v[grid.edge_mask()]) ** 2) * grid.dx)
    if spill > EDGE_SPILL_TOL:
        raise BoundarySpillError(f"mass {spill:.2e} reached the boundary band")
    return drift


def propagate(psi0: GridWavefunction, cfg: PropagationConfig) -> GridWavefunction:
    """Evolve ``psi0`` by ``cfg.n_steps`` Strang steps of size ``cfg.dt`` (negative dt runs backwards)."""
    if psi0.grid != cfg.grid or not math.isclose(psi0.hbar, cfg.hbar):
        raise ValidationError("wavefunction grid/hbar differ from the propagation config")
    if cfg.n_steps == 0:
        return psi0
    prop = SplitStepPropagator(cfg.grid, cfg.hbar, cfg.potential)
    v = prop.step(psi0.values, cfg.dt, cfg.n_steps)
    _health(cfg.grid, v, cfg.n_steps)
    # norm is already 1 to ~1e-13; renormalise only to satisfy the exact type invariant
    return normalized(cfg.grid, v, cfg.hbar)


# ---------------------------------------------------------------- conical experiment


@dataclass(frozen=True)
class ConicalExperimentSpec:
    beta: float = 0.05
    p1: float = 0.6
    p2: float = 0.8
    envelope1: Bump1D = Bump1D(1.5, 1.0)
    envelope2: Bump1D = Bump1D(-1.5, 1.0)
    hbar: float = 0.01
    times: tuple = (-1.0, 1.0)

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 0.1:
            raise DomainError(f"beta must lie in (0, 1/10), got {self.beta}")
        if abs(self.p1**2 + self.p2**2 - 1.0) > 1e-12:
            raise ValidationError("p1^2 + p2^2 must equal 1")
        lo1, hi1 = self.envelope1.support
        lo2, hi2 = self.envelope2.support
        if lo1 < 0.0:
            raise ValidationError("envelope 1 must be supported on x > 0")
        if not (hi2 <= lo1 or hi1 <= lo2):
            raise ValidationError("envelope supports must be disjoint")
        if not self.hbar > 0:
            raise DomainError("hbar must be positive")
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))


def branch_momentum(spec: ConicalExperimentSpec) -> float:
    """Mean momentum of branch 2, -hbar^beta."""
    return -(spec.hbar**spec.beta)


def prepare_initial_data(spec: ConicalExperimentSpec, grid: Grid1D) -> GridWavefunction:
    """p1 hbar^{-1/4} Psi1(x/sqrt(hbar)) + p2 hbar^{-1/4} Psi2(x/sqrt(hbar)) e^{-i hbar^(beta-1) x}."""
    h = spec.hbar
    x = grid.x
    s = x / math.sqrt(h)
    u1 = h**-0.25 * spec.envelope1(s).astype(complex)
    u2 = h**-0.25 * spec.envelope2(s) * np.exp(-1j * h ** (spec.beta - 1.0) * x)
    if np.any((np.abs(u1) > 0) & (np.abs(u2) > 0)):
        raise ValidationError("branch envelopes overlap on the grid")
    n1, n2 = _norm(grid, u1), _norm(grid, u2)
    if n1 == 0 or n2 == 0:
        raise ResolutionError("an envelope is not resolved by the grid")
    psi = spec.p1 * u1 / n1 + spec.p2 * u2 / n2
    return normalized(grid, psi, h)


def branch_mass(
    psi: GridWavefunction,
    center: Sequence[float],
    radius: float = DEFAULT_RADIUS,
    check_radius: bool = True,
) -> float:
    """Husimi mass in the disc of ``radius`` about ``center``.

    The disc must hold a coherent-state core (radius >= 2 sqrt(hbar)) unless
    ``check_radius`` is off, which lets one fixed radius serve a whole hbar
    sweep.
    """
    if check_radius and radius < 2 * math.sqrt(psi.hbar):
        raise ValidationError(f"radius {radius} below 2 sqrt(hbar) = {2 * math.sqrt(psi.hbar):.3g}")
    return disc_mass(psi, center, radius)


@dataclass(frozen=True)
class ConicalRecord:
    hbar: float
    t: float
    mass1: float
    mass2: float
    mass_pre: float
    norm_drift: float
    energy_drift: float
    steps: int


def predicted_centers(t: float) -> dict:
    """Phase-space points at which the branch masses are evaluated.

    mass1 at (t^2/2, t), mass2 at (-t^2/2, -t), mass_pre at (t^2/2, -t).
    """
    return {
        "mass1": (0.5 * t * t, t),
        "mass2": (-0.5 * t * t, -t),
        "mass_pre": (0.5 * t * t, -t),
    }


def default_grid() -> Grid1D:
    return Grid1D(2**14, 8.0)


def default_dt(grid: Grid1D, hbar: float, potential) -> float:
    """hbar / 8, reduced to the phase-step bound or DT_CAP when either is tighter."""
    return min(hbar / 8.0, PropagationConfig.max_stable_dt(grid, hbar, potential), DT_CAP)


def run_conical_experiment(
    spec: ConicalExperimentSpec,
    cfg: PropagationConfig | None = None,
    radius: float = DEFAULT_RADIUS,
    snapshots: Callable[[float, GridWavefunction], None] | None = None,
) -> list[ConicalRecord]:
    """Propagate the two-branch initial data to each requested time.

    ``cfg`` supplies grid, |dt| and potential (its ``n_steps`` is ignored;
    step counts follow from the times). Positive and negative times are
    reached by stepping outward from t = 0, backward with negative dt.
    Results are returned in the order of ``spec.times``.
    """
    if cfg is None:
        grid = default_grid()
        pot = conical_potential()
        cfg = PropagationConfig(grid, spec.hbar, default_dt(grid, spec.hbar, pot), 0, pot)
    if not math.isclose(cfg.hbar, spec.hbar):
        raise ValidationError("config hbar differs from experiment hbar")
    grid = cfg.grid
    psi0 = prepare_initial_data(spec, grid)
    prop = SplitStepPropagator(grid, spec.hbar, cfg.potential)
    e0 = prop.energy(psi0.values)
    dt_abs = abs(cfg.dt)
    out: dict[float, ConicalRecord] = {}
    for sign in (+1.0, -1.0):
        ts = sorted({t for t in spec.times if (t > 0 if sign > 0 else t <= 0)}, key=abs)
        v, t_now, steps = psi0.values, 0.0, 0
        for t in ts:
            span = abs(t - t_now)
            n = math.ceil(span / dt_abs - 1e-9) if span > 0 else 0
            if n:
                v = prop.step(v, sign * span / n, n)
            steps += n
            t_now = t
            drift = _health(grid, v, steps)
            psi_t = normalized(grid, v, spec.hbar)
            centers = predicted_centers(t)
            masses = {k: branch_mass(psi_t, c, radius, check_radius=False) for k, c in centers.items()}
            out[t] = ConicalRecord(
                spec.hbar, t, masses["mass1"], masses["mass2"], masses["mass_pre"],
                drift, abs(prop.energy(v) - e0), steps,
            )
            if snapshots is not None:
                snapshots(t, psi_t)
    return [out[float(t)] for t in spec.times]
