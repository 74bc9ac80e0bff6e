"""Density matrices, observables and qubit geometry.

States on the full matrix algebra M_n are represented by density matrices
(Hermitian, positive semidefinite, unit trace). Purity is decided by the
Hilbert-Schmidt norm, which equals one exactly for rank-one projectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from purestates.errors import DimensionMismatchError, DomainError, ValidationError

HERMITIAN_TOL = 1e-12
EIGEN_TOL = 1e-12
TRACE_TOL = 1e-12
PURITY_TOL = 1e-9
WEIGHT_CUTOFF = 1e-12

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
IDENTITY2 = np.eye(2, dtype=complex)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _square(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(doc: Mapping) -> np.ndarray:
    extra = set(doc) - {"dim", "re", "im"}
    if extra:
        raise ValidationError(f"unknown keys in matrix document: {sorted(extra)}")
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ValidationError("re and im parts differ in shape")
    m = re + 1j * im
    if "dim" in doc and m.shape != (doc["dim"], doc["dim"]):
        raise ValidationError(f"declared dim {doc['dim']} does not match shape {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix observable."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = _square(self.entries)
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("observable is not Hermitian")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def to_json(self) -> str:
        return json.dumps(matrix_to_json(self.entries))

    @classmethod
    def from_json(cls, text) -> "Observable":
        doc = json.loads(text) if isinstance(text, str) else text
        return cls(matrix_from_json(doc))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = _square(self.entries)
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix has trace {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lo < -EIGEN_TOL:
            raise ValidationError(f"density matrix has negative eigenvalue {lo!r}")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def to_json(self) -> str:
        return json.dumps(matrix_to_json(self.entries))

    @classmethod
    def from_json(cls, text) -> "DensityMatrix":
        doc = json.loads(text) if isinstance(text, str) else text
        return cls(matrix_from_json(doc))


@dataclass(frozen=True, eq=False)
class BlochVector:
    a: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float).reshape(-1)
        if a.shape != (3,):
            raise ValidationError("Bloch vector must have three components")
        if np.linalg.norm(a) > 1.0 + 1e-12:
            raise DomainError(f"Bloch vector norm {np.linalg.norm(a)!r} exceeds 1")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.a))


def _entries(x) -> np.ndarray:
    return x.entries if isinstance(x, (DensityMatrix, Observable)) else np.asarray(x, dtype=complex)


def _check_dims(*mats: np.ndarray) -> None:
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {sorted(shapes)}")


def expectation(rho: DensityMatrix, A: Observable | np.ndarray) -> float:
    """Tr(rho A); the imaginary part must be below 1e-10 and is discarded."""
    r, a = _entries(rho), _entries(A)
    _check_dims(r, a)
    val = np.einsum("ij,ji->", r, a)
    if abs(val.imag) > 1e-10:
        raise ValidationError(f"expectation has imaginary part {val.imag!r}; observable not Hermitian?")
    return float(val.real)


def variance_observable(rho: DensityMatrix, A: Observable | np.ndarray) -> float:
    r, a = _entries(rho), _entries(A)
    _check_dims(r, a)
    m = expectation(rho, a)
    # Tr(rho (A - m)^2) is the numerically stable form of <A^2> - <A>^2
    c = a - m * np.eye(a.shape[0])
    return max(float(np.einsum("ij,jk,ki->", r, c, c).real), 0.0)


def hs_norm(rho: DensityMatrix | np.ndarray) -> float:
    """Hilbert-Schmidt norm sqrt(Tr(rho* rho))."""
    r = _entries(rho)
    return float(np.sqrt(np.sum(np.abs(r) ** 2)))


def is_pure(rho: DensityMatrix, tol: float = PURITY_TOL) -> bool:
    if tol <= 0:
        raise DomainError("purity tolerance must be positive")
    return hs_norm(rho) >= 1.0 - tol


def mix_states(rho1: DensityMatrix, rho2: DensityMatrix, lam: float) -> DensityMatrix:
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"mixing parameter must lie in [0, 1], got {lam!r}")
    _check_dims(rho1.entries, rho2.entries)
    return DensityMatrix(lam * rho1.entries + (1.0 - lam) * rho2.entries)


def vector_state(psi: Sequence[complex] | np.ndarray, normalize: bool = False) -> DensityMatrix:
    """Projector |psi><psi| onto a unit vector."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValidationError("zero vector does not define a state")
    if normalize:
        v = v / n
    elif abs(n - 1.0) > 1e-10:
        raise ValidationError(f"state vector has norm {n!r}; pass normalize=True")
    rho = np.outer(v, v.conj())
    # exact Hermitian symmetrisation removes roundoff asymmetry
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def density_from_bloch(a: BlochVector | Sequence[float]) -> DensityMatrix:
    """rho = (1 + a . sigma) / 2."""
    if not isinstance(a, BlochVector):
        a = BlochVector(np.asarray(a, dtype=float))
    rho = 0.5 * (IDENTITY2 + sum(c * s for c, s in zip(a.a, PAULI)))
    return DensityMatrix(rho)


def bloch_from_density(rho: DensityMatrix) -> BlochVector:
    if rho.dim != 2:
        raise DimensionMismatchError(f"Bloch vector needs a 2x2 density matrix, got dim {rho.dim}")
    a = np.array([np.trace(rho.entries @ s).real for s in PAULI])
    nrm = np.linalg.norm(a)
    if 1.0 < nrm <= 1.0 + 1e-12:
        a = a / nrm
    return BlochVector(a)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if idx.size == 0:
        return v
    c = v[idx[0]]
    return v * (abs(c) / c)


def _gram_schmidt(vs: np.ndarray) -> np.ndarray:
    out = np.array(vs, dtype=complex)
    for k in range(out.shape[1]):
        v = out[:, k]
        for j in range(k):
            v = v - np.vdot(out[:, j], v) * out[:, j]
        out[:, k] = v / np.linalg.norm(v)
    return out


def _sort_key(v: np.ndarray) -> tuple:
    return tuple(x for c in v for x in (round(c.real, 12), round(c.imag, 12)))


def extremal_decomposition(
    rho: DensityMatrix, cutoff: float = WEIGHT_CUTOFF
) -> list[tuple[float, np.ndarray]]:
    """Spectral decomposition of rho into pure components.

    Returns ``(weight, psi)`` pairs with weights above ``cutoff`` sorted in
    descending order. Degenerate eigenspaces are re-orthonormalised by
    Gram-Schmidt in eigensolver order; every vector is phase-fixed so its
    first non-negligible component is real positive, and equal weights are
    ordered by the lexicographically larger vector first.
    """
    w, v = np.linalg.eigh(rho.entries)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    # group degenerate eigenvalues and re-orthonormalise each group
    groups: list[list[int]] = []
    for k in range(len(w)):
        if groups and abs(w[groups[-1][0]] - w[k]) <= 1e-12:
            groups[-1].append(k)
        else:
            groups.append([k])
    terms: list[tuple[float, np.ndarray]] = []
    for g in groups:
        if w[g[0]] <= cutoff:
            continue
        basis = _gram_schmidt(v[:, g]) if len(g) > 1 else v[:, g]
        block = [(float(w[k]), _phase_fix(basis[:, i])) for i, k in enumerate(g)]
        block.sort(key=lambda t: _sort_key(t[1]), reverse=True)
        terms.extend(block)
    return terms


def reconstruct(terms: list[tuple[float, np.ndarray]]) -> np.ndarray:
    return sum(wk * np.outer(psi, psi.conj()) for wk, psi in terms)


def bloch_angles_state(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Unit vectors (cos(theta/2), e^{i phi} sin(theta/2)) on the Bloch sphere."""
    return np.stack([np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


def vector_state_gap(
    targets: Sequence[tuple[Observable | np.ndarray, float]], resolution: int = 200
) -> float:
    """Estimate min over unit psi of max_j |<psi, A_j psi> - target_j| for qubits.

    A uniform (theta, phi) grid with ``resolution**2`` points is searched and
    the best point refined by a bounded scalar search on each angle in turn.
    A clearly positive result certifies that no vector state reproduces all
    the targets.
    """
    if not targets:
        raise ValidationError("vector_state_gap needs at least one target")
    if resolution < 50:
        raise DomainError("resolution must be at least 50")
    obs = []
    vals = []
    for A, t in targets:
        a = _entries(A)
        if a.shape != (2, 2):
            raise DimensionMismatchError("vector_state_gap works on qubit observables")
        Observable(a)
        obs.append(a)
        vals.append(float(t))
    # <psi, A psi> = (Tr A + a . Tr(A sigma)) / 2 with a the Bloch vector
    offs = np.array([np.trace(a).real for a in obs])
    coef = np.array([[np.trace(a @ s).real for s in PAULI] for a in obs])
    vals_arr = np.array(vals)

    def objective(theta, phi):
        bloch = np.stack(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
        )
        ev = 0.5 * (offs + bloch @ coef.T)
        return np.max(np.abs(ev - vals_arr), axis=-1)

    thetas = np.linspace(0.0, np.pi, resolution)
    phis = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
    T, P = np.meshgrid(thetas, phis, indexing="ij")
    g = objective(T, P)
    i, j = np.unravel_index(np.argmin(g), g.shape)
    th, ph = thetas[i], phis[j]
    best = float(g[i, j])
    dth, dph = np.pi / (resolution - 1), 2 * np.pi / resolution
    lo_t, hi_t = max(th - dth, 0.0), min(th + dth, np.pi)
    r = minimize_scalar(lambda t: float(objective(np.array(t), np.array(ph))),
                        bounds=(lo_t, hi_t), method="bounded", options={"xatol": 1e-12})
    if r.fun < best:
        best, th = float(r.fun), float(r.x)
    r = minimize_scalar(lambda p: float(objective(np.array(th), np.array(p))),
                        bounds=(ph - dph, ph + dph), method="bounded", options={"xatol": 1e-12})
    if r.fun < best:
        best = float(r.fun)
    return best
