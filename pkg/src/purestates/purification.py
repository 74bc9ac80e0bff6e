"""Purification of density matrices on a bipartite space.

Composite index convention: basis vector ``v_i (x) w_l`` of H_I (x) H_II sits
at flat position ``i * dim_II + l`` (row-major), so a bipartite vector is
stored as its ``dim_I x dim_II`` amplitude matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from purestates.errors import DimensionMismatchError, ValidationError
from purestates.states import DensityMatrix, Observable, hs_norm

EIGEN_CUTOFF = 1e-12


class DimensionConditionWarning(UserWarning):
    """dim(H_II) < dim(H_I): valid purification, but below the textbook condition."""


@dataclass(frozen=True, eq=False)
class BipartiteVector:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.amplitudes, dtype=complex)
        if m.ndim != 2:
            raise ValidationError("amplitudes must be a dim_I x dim_II matrix")
        nrm = np.linalg.norm(m)
        if abs(nrm - 1.0) > 1e-10:
            raise ValidationError(f"bipartite vector has norm {nrm!r}")
        m.setflags(write=False)
        object.__setattr__(self, "amplitudes", m)

    @property
    def dim_I(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def dim_II(self) -> int:
        return self.amplitudes.shape[1]

    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def projector(self) -> np.ndarray:
        v = self.flat()
        return np.outer(v, v.conj())


def purify(rho: DensityMatrix, dim_II: int, basis_II: np.ndarray | None = None) -> BipartiteVector:
    """Psi_rho = sum_k sqrt(p_k) v_k (x) w_k.

    ``basis_II`` is a unitary whose columns supply the orthonormal set w_k
    (standard basis by default). Eigenvalues at or below 1e-12 are dropped.
    """
    p, v = np.linalg.eigh(rho.entries)
    order = np.argsort(-p, kind="stable")
    p, v = p[order], v[:, order]
    keep = p > EIGEN_CUTOFF
    rank = int(keep.sum())
    if dim_II < rank:
        raise ValidationError(f"dim_II = {dim_II} is smaller than rank(rho) = {rank}")
    if dim_II < rho.dim:
        warnings.warn(
            f"dim_II = {dim_II} < dim_I = {rho.dim}; purification still exact since rank = {rank}",
            DimensionConditionWarning,
            stacklevel=2,
        )
    W = np.eye(dim_II, dtype=complex) if basis_II is None else np.asarray(basis_II, dtype=complex)
    if W.shape != (dim_II, dim_II):
        raise DimensionMismatchError("basis_II must be a dim_II x dim_II unitary")
    if np.max(np.abs(W.conj().T @ W - np.eye(dim_II))) > 1e-10:
        raise ValidationError("basis_II is not unitary")
    sq = np.sqrt(p[keep])
    amps = (v[:, keep] * sq[None, :]) @ W[:, :rank].T
    # renormalise away the mass of dropped eigenvalues
    amps = amps / np.linalg.norm(amps)
    return BipartiteVector(amps)


def purified_expectation(Psi: BipartiteVector, D: Observable | np.ndarray) -> float:
    """<Psi, (D (x) 1) Psi> = Tr(M^dagger D M)."""
    d = D.entries if isinstance(D, Observable) else np.asarray(D, dtype=complex)
    if d.shape != (Psi.dim_I, Psi.dim_I):
        raise DimensionMismatchError("observable does not act on H_I")
    M = Psi.amplitudes
    val = np.einsum("ai,ab,bi->", M.conj(), d, M)
    if abs(val.imag) > 1e-10:
        raise ValidationError(f"purified expectation has imaginary part {val.imag!r}")
    return float(val.real)


def partial_trace_II(M: DensityMatrix | np.ndarray, dim_I: int, dim_II: int) -> DensityMatrix:
    """(Ptr M)_{ab} = sum_l M_{(a,l),(b,l)}."""
    m = M.entries if isinstance(M, DensityMatrix) else np.asarray(M, dtype=complex)
    if m.shape != (dim_I * dim_II, dim_I * dim_II):
        raise DimensionMismatchError(f"shape {m.shape} does not match {dim_I} x {dim_II} composite")
    red = np.einsum("albl->ab", m.reshape(dim_I, dim_II, dim_I, dim_II))
    return DensityMatrix(0.5 * (red + red.conj().T))


@dataclass(frozen=True)
class PurityEscalationReport:
    upstairs_hs_norm: float
    downstairs_hs_norm: float
    original_hs_norm: float
    roundtrip_error: float
    verdict: str

    def as_dict(self) -> dict:
        return {
            "upstairs_hs_norm": self.upstairs_hs_norm,
            "downstairs_hs_norm": self.downstairs_hs_norm,
            "original_hs_norm": self.original_hs_norm,
            "roundtrip_error": self.roundtrip_error,
            "verdict": self.verdict,
        }


def purity_escalation_check(rho: DensityMatrix, dim_II: int | None = None) -> PurityEscalationReport:
    dim_II = rho.dim if dim_II is None else dim_II
    Psi = purify(rho, dim_II)
    P = Psi.projector()
    up = hs_norm(P)
    red = partial_trace_II(P, rho.dim, dim_II)
    down = hs_norm(red)
    err = float(np.linalg.norm(red.entries - rho.entries))
    ok = abs(up - 1.0) <= 1e-10 and abs(down - hs_norm(rho)) <= 1e-10
    verdict = (
        "purification is pure upstairs, original purity preserved downstairs"
        if ok
        else "purification check FAILED"
    )
    return PurityEscalationReport(up, down, hs_norm(rho), err, verdict)
