"""Random test objects: states, unitaries, observables, distributions."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from purestates.probability import DiscreteDistribution
from purestates.states import DensityMatrix


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(n, random_state=rng)


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (m + m.conj().T)


def random_density(
    n: int,
    rng: np.random.Generator,
    rank: int | None = None,
    spectrum: np.ndarray | None = None,
) -> DensityMatrix:
    """U diag(p) U^dagger with Haar U; ``p`` Dirichlet on ``rank`` entries unless given."""
    if spectrum is None:
        rank = n if rank is None else rank
        p = np.zeros(n)
        p[:rank] = rng.dirichlet(np.ones(rank))
    else:
        p = np.asarray(spectrum, dtype=float)
    U = random_unitary(n, rng)
    rho = (U * p[None, :]) @ U.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def random_mixed_spread(n: int, rng: np.random.Generator, floor: float = 0.1) -> DensityMatrix:
    """Random state with at least two eigenvalues >= ``floor``."""
    while True:
        p = rng.dirichlet(np.ones(n))
        if np.sum(p >= floor) >= 2:
            return random_density(n, rng, spectrum=p)


def random_distribution(size: int, rng: np.random.Generator, scale: float = 3.0) -> DiscreteDistribution:
    pts = np.unique(np.round(rng.uniform(-scale, scale, size=size), 6))
    w = rng.dirichlet(np.ones(pts.size))
    w = w / w.sum()
    # push the float residue onto the largest weight so the sum is 1 to ~1e-16
    w[np.argmax(w)] += 1.0 - w.sum()
    return DiscreteDistribution(tuple(pts.tolist()), tuple(w.tolist()))
