"""Finite-dimensional matrix *-algebras and the GNS construction.

An algebra is stored as a Hilbert-Schmidt orthonormal basis ``b_1..b_d`` of
ambient matrices. A state is a linear functional given by its values on the
basis. The GNS space is the quotient of the algebra by the left ideal of
null elements, with the inner product ``<A, B> = omega(A* B)``; a state is
pure exactly when the resulting cyclic representation has trivial
commutant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from purestates.errors import DimensionMismatchError, ValidationError
from purestates.states import DensityMatrix

SPAN_TOL = 1e-10
STATE_TOL = 1e-10
NULL_TOL = 1e-10
COMMUTANT_TOL = 1e-9


def _orthonormal_span(mats: Sequence[np.ndarray], tol: float = SPAN_TOL) -> list[np.ndarray]:
    """HS-orthonormal basis of span(mats), via SVD of the vectorised stack."""
    n = mats[0].shape[0]
    stack = np.array([m.reshape(-1) for m in mats], dtype=complex)
    _, s, vh = np.linalg.svd(stack, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return []
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return [vh[k].conj().reshape(n, n) for k in range(rank)]


@dataclass(frozen=True, eq=False)
class MatrixStarAlgebra:
    """Unital *-subalgebra of M_n with a Hilbert-Schmidt orthonormal basis."""

    ambient_dim: int
    basis: tuple
    contains_identity: bool = True

    def __post_init__(self) -> None:
        basis = tuple(np.array(b, dtype=complex) for b in self.basis)
        for b in basis:
            if b.shape != (self.ambient_dim, self.ambient_dim):
                raise DimensionMismatchError("basis element has wrong shape")
            b.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        # B[k] holds vec(b_k)^dagger, so coords(A) = B @ vec(A)
        object.__setattr__(
            self, "_dual", np.array([b.reshape(-1).conj() for b in basis])
        )
        gram = self._dual @ self._dual.conj().T
        if np.max(np.abs(gram - np.eye(len(basis)))) > 1e-8:
            raise ValidationError("algebra basis is not Hilbert-Schmidt orthonormal")
        residual = self.closure_residual()
        if residual > SPAN_TOL * 100:
            raise ValidationError(f"basis is not closed under product/adjoint (residual {residual:.2e})")
        if self.contains_identity and self.span_residual(np.eye(self.ambient_dim)) > SPAN_TOL * 100:
            raise ValidationError("identity does not lie in the algebra")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, A: np.ndarray) -> np.ndarray:
        return self._dual @ np.asarray(A, dtype=complex).reshape(-1)

    def element(self, c: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=complex), np.array(self.basis), axes=1)

    def span_residual(self, A: np.ndarray) -> float:
        A = np.asarray(A, dtype=complex)
        return float(np.linalg.norm(A - self.element(self.coords(A))))

    def closure_residual(self) -> float:
        worst = 0.0
        for bi in self.basis:
            worst = max(worst, self.span_residual(bi.conj().T))
            for bj in self.basis:
                worst = max(worst, self.span_residual(bi @ bj))
        return worst

    def left_mult(self, A: np.ndarray) -> np.ndarray:
        """Matrix of B -> A B in basis coordinates."""
        A = np.asarray(A, dtype=complex)
        return np.array([self.coords(A @ b) for b in self.basis]).T

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        c = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        return self.element(c)


def close_algebra(generators: Sequence[np.ndarray], include_identity: bool = True) -> MatrixStarAlgebra:
    """Smallest *-closed, product-closed subspace containing the generators.

    Adjoints and pairwise products are added to the span until its dimension
    stops growing.
    """
    if not generators:
        raise ValidationError("need at least one generator")
    gens = [np.asarray(g, dtype=complex) for g in generators]
    n = gens[0].shape[0]
    for g in gens:
        if g.ndim != 2 or g.shape != (n, n):
            raise DimensionMismatchError("generators must be square matrices of equal size")
    seed = list(gens) + [g.conj().T for g in gens]
    if include_identity:
        seed.append(np.eye(n, dtype=complex))
    basis = _orthonormal_span(seed)
    while True:
        cand = list(basis)
        for bi in basis:
            cand.append(bi.conj().T)
            for bj in basis:
                cand.append(bi @ bj)
        new = _orthonormal_span(cand)
        if len(new) == len(basis):
            break
        basis = new
    return MatrixStarAlgebra(n, tuple(basis), include_identity)


def full_matrix_algebra(n: int) -> MatrixStarAlgebra:
    basis = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            basis.append(e)
    return MatrixStarAlgebra(n, tuple(basis), True)


def diagonal_algebra(n: int) -> MatrixStarAlgebra:
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    return MatrixStarAlgebra(n, tuple(basis), True)


@dataclass(frozen=True, eq=False)
class StateFunctional:
    """Linear functional on an algebra, fixed by its values on the basis."""

    algebra: MatrixStarAlgebra
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=complex).reshape(-1)
        if v.shape != (self.algebra.dim,):
            raise DimensionMismatchError("one value per basis element expected")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, A: np.ndarray) -> complex:
        return complex(self.values @ self.algebra.coords(A))

    def gram(self) -> np.ndarray:
        """G_ij = omega(b_i* b_j)."""
        B = self.algebra.basis
        return np.array([[self(bi.conj().T @ bj) for bj in B] for bi in B])


def state_from_density(algebra: MatrixStarAlgebra, rho: DensityMatrix | np.ndarray) -> StateFunctional:
    r = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if r.shape != (algebra.ambient_dim, algebra.ambient_dim):
        raise DimensionMismatchError("density matrix does not match ambient dimension")
    return StateFunctional(algebra, np.array([np.trace(r @ b) for b in algebra.basis]))


def state_from_vector(algebra: MatrixStarAlgebra, psi: Sequence[complex] | np.ndarray) -> StateFunctional:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if v.shape != (algebra.ambient_dim,):
        raise DimensionMismatchError("vector does not match ambient dimension")
    return StateFunctional(algebra, np.array([np.vdot(v, b @ v) for b in algebra.basis]))


@dataclass(frozen=True)
class StateReport:
    normalization_residual: float
    gram_min_eigenvalue: float
    hermiticity_residual: float
    passed: bool

    def violations(self) -> list[str]:
        out = []
        if not self.normalization_residual <= STATE_TOL:
            out.append(f"normalisation: |omega(1) - 1| = {self.normalization_residual:.3e}")
        if not self.gram_min_eigenvalue >= -STATE_TOL:
            out.append(f"positivity: min Gram eigenvalue {self.gram_min_eigenvalue:.3e}")
        if not self.hermiticity_residual <= STATE_TOL:
            out.append(f"hermiticity: max |omega(A*) - conj omega(A)| = {self.hermiticity_residual:.3e}")
        return out


def validate_state(omega: StateFunctional) -> StateReport:
    alg = omega.algebra
    if not alg.contains_identity:
        raise ValidationError("state validation requires a unital algebra")
    norm_res = abs(omega(np.eye(alg.ambient_dim)) - 1.0)
    G = omega.gram()
    herm_gram = np.max(np.abs(G - G.conj().T))
    lo = float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[0])
    herm = max(
        max(abs(omega(b.conj().T) - np.conj(omega(b))) for b in alg.basis),
        herm_gram,
    )
    passed = norm_res <= STATE_TOL and lo >= -STATE_TOL and herm <= STATE_TOL
    return StateReport(float(norm_res), lo, float(herm), bool(passed))


@dataclass(frozen=True, eq=False)
class GNSRep:
    """Cyclic representation (pi, H, Omega) built from (algebra, omega)."""

    algebra: MatrixStarAlgebra
    rep_dim: int
    pi_basis: tuple
    omega_vec: np.ndarray
    embed: np.ndarray = field(repr=False)

    def quotient_map(self, A: np.ndarray) -> np.ndarray:
        """Vector psi_A in the GNS space representing the class of A."""
        return self.embed @ self.algebra.coords(A)

    def pi(self, A: np.ndarray) -> np.ndarray:
        c = self.algebra.coords(A)
        return np.tensordot(c, np.array(self.pi_basis), axes=1)


def gns(algebra: MatrixStarAlgebra, omega: StateFunctional, null_tol: float = NULL_TOL) -> GNSRep:
    """GNS representation of ``omega``.

    The Gram matrix G = V diag(lam) V^dagger is truncated to eigenvalues above
    ``null_tol * max(lam)``; coordinates ``psi_A = lam^{1/2} V^dagger c_A``
    realise the quotient by the null ideal isometrically, and pi(A) is left
    multiplication transported to those coordinates.
    """
    report = validate_state(omega)
    if not report.passed:
        raise ValidationError("state fails validation: " + "; ".join(report.violations()))
    G = omega.gram()
    G = 0.5 * (G + G.conj().T)
    lam, V = np.linalg.eigh(G)
    if lam[0] < -1e-8:
        raise ValidationError(f"Gram matrix indefinite (eigenvalue {lam[0]:.3e})")
    keep = lam > null_tol * lam[-1]
    lam_k, V_k = lam[keep], V[:, keep]
    W = np.sqrt(lam_k)[:, None] * V_k.conj().T
    W_pinv = V_k / np.sqrt(lam_k)[None, :]
    pis = tuple(W @ algebra.left_mult(b) @ W_pinv for b in algebra.basis)
    omega_vec = W @ algebra.coords(np.eye(algebra.ambient_dim))
    return GNSRep(algebra, int(keep.sum()), pis, omega_vec, W)


def gns_identity_residual(rep: GNSRep, omega: StateFunctional) -> float:
    """max_i |<Omega, pi(b_i) Omega> - omega(b_i)|."""
    return max(
        abs(np.vdot(rep.omega_vec, p @ rep.omega_vec) - w)
        for p, w in zip(rep.pi_basis, omega.values)
    )


def homomorphism_residual(rep: GNSRep) -> float:
    """Largest violation of pi(b_i) pi(b_j) = pi(b_i b_j) and pi(b_i*) = pi(b_i)^dagger."""
    alg = rep.algebra
    worst = 0.0
    for bi, pi_i in zip(alg.basis, rep.pi_basis):
        worst = max(worst, np.linalg.norm(rep.pi(bi.conj().T) - pi_i.conj().T))
        for bj, pi_j in zip(alg.basis, rep.pi_basis):
            worst = max(worst, np.linalg.norm(pi_i @ pi_j - rep.pi(bi @ bj)))
    return float(worst)


def cyclic_rank(rep: GNSRep) -> int:
    orbit = np.array([p @ rep.omega_vec for p in rep.pi_basis]).T
    if orbit.size == 0:
        return 0
    s = np.linalg.svd(orbit, compute_uv=False)
    return int(np.sum(s > 1e-9 * s[0]))


def commutant_dimension(rep: GNSRep, tol: float = COMMUTANT_TOL) -> int:
    """Dimension of {T : T pi(b) = pi(b) T for all basis b}.

    With column-major vec, vec(T P - P T) = (P^T kron 1 - 1 kron P) vec(T);
    the stacked system's null space is counted with a singular-value cutoff
    relative to the largest singular value.
    """
    r = rep.rep_dim
    if r == 0:
        return 0
    eye = np.eye(r)
    blocks = [np.kron(p.T, eye) - np.kron(eye, p) for p in rep.pi_basis]
    M = np.vstack(blocks)
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return r * r
    return int(r * r - np.sum(s > tol * s[0]))


def is_pure_via_gns(algebra: MatrixStarAlgebra, omega: StateFunctional, null_tol: float = NULL_TOL) -> bool:
    return commutant_dimension(gns(algebra, omega, null_tol)) == 1


def conjugate_algebra(algebra: MatrixStarAlgebra, U: np.ndarray) -> MatrixStarAlgebra:
    """Transport the algebra by A -> U A U^dagger (keeps the basis orthonormal)."""
    return MatrixStarAlgebra(
        algebra.ambient_dim,
        tuple(U @ b @ U.conj().T for b in algebra.basis),
        algebra.contains_identity,
    )
