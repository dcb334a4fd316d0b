"""Trace-norm machinery: distances, purification, partial trace, contractivity.

All distances are reported as the unhalved trace norm ``||rho - sigma||_1``;
that is the quantity appearing in every inequality this package verifies.
The conventional trace distance is half of it and is exposed separately as
:func:`trace_distance`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ValidationError
from .fock import DensityOperator, PureState, TruncatedFockSpace, _freeze

DistanceMethod = Literal["eigen", "pure_overlap", "diagonal_series"]


@dataclass(frozen=True)
class DistanceReport:
    """Trace-norm difference with the algorithm used and a truncation bound.

    ``truncation_error`` is an upper bound on the discrepancy introduced by
    working on a truncated space; it is 0 when the inputs are exact on the
    space and the caller attributes no tail.
    """

    value: float
    method: DistanceMethod
    truncation_error: float = 0.0


def trace_norm(matrix: np.ndarray) -> float:
    """``||X||_1 = tr sqrt(X^dag X)``, the sum of singular values.

    Hermitian inputs dispatch to the absolute eigenvalue sum, which is the
    same number computed roughly twice as fast.
    """
    mat = np.asarray(matrix, dtype=complex)
    if not np.all(np.isfinite(mat)):
        raise ValidationError("trace norm of non-finite matrix")
    if mat.shape[0] == mat.shape[1] and np.max(np.abs(mat - mat.conj().T), initial=0.0) < 1e-13:
        return float(np.sum(np.abs(np.linalg.eigvalsh(mat))))
    return float(np.sum(np.linalg.svd(mat, compute_uv=False)))


def _support_restricted_abs_eigsum(delta: np.ndarray) -> float:
    # rows that are identically zero contribute nothing to the spectrum;
    # restricting to the exact support keeps the eigensolve small when the
    # difference lives on a few levels
    support = np.flatnonzero(np.any(delta != 0, axis=0) | np.any(delta != 0, axis=1))
    if support.size == 0:
        return 0.0
    block = delta[np.ix_(support, support)]
    return float(np.sum(np.abs(np.linalg.eigvalsh(block))))


def trace_norm_diff(rho: DensityOperator, sigma: DensityOperator) -> DistanceReport:
    """``||rho - sigma||_1`` via the Hermitian eigendecomposition.

    Purely diagonal inputs dispatch to the exact absolute sum of diagonal
    differences. The general path symmetrizes the difference first to keep
    roundoff from leaking into the eigenvalues.
    """
    if rho.space.dim != sigma.space.dim:
        raise ValidationError(
            f"dimension mismatch: {rho.space.dim} vs {sigma.space.dim}"
        )
    if rho.is_diagonal() and sigma.is_diagonal():
        value = float(np.sum(np.abs(rho.diagonal - sigma.diagonal)))
        return DistanceReport(value=value, method="diagonal_series")
    delta = rho.matrix - sigma.matrix
    delta = (delta + delta.conj().T) / 2.0
    return DistanceReport(value=_support_restricted_abs_eigsum(delta), method="eigen")


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Conventional trace distance, ``||rho - sigma||_1 / 2``."""
    return trace_norm_diff(rho, sigma).value / 2.0


def pure_diff(phi: PureState, chi: PureState) -> DistanceReport:
    """Rank-1 shortcut ``2 sqrt(1 - |<phi|chi>|^2)``."""
    fid = abs(phi.overlap(chi)) ** 2
    value = 2.0 * np.sqrt(max(0.0, 1.0 - fid))
    return DistanceReport(value=float(value), method="pure_overlap")


@dataclass(frozen=True)
class BipartitePureState:
    """Two-mode pure state; ``amplitudes[m, n]`` multiplies ``|m> (x) |n>``."""

    spaces: tuple[TruncatedFockSpace, TruncatedFockSpace]
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = _freeze(np.asarray(self.amplitudes, dtype=complex))
        expected = (self.spaces[0].dim, self.spaces[1].dim)
        if amp.shape != expected:
            raise ValidationError(f"amplitude shape {amp.shape}, expected {expected}")
        norm_dev = abs(float(np.linalg.norm(amp)) - 1.0)
        if norm_dev > self.spaces[0].trace_tol:
            raise ValidationError(f"bipartite norm deviates by {norm_dev:.3e}")
        object.__setattr__(self, "amplitudes", amp)

    def overlap(self, other: "BipartitePureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def purify(rho: DensityOperator) -> BipartitePureState:
    """Eigenbasis-doubled purification ``sum_i sqrt(p_i) |psi_i> (x) |psi_i>``.

    The second factor carries the same eigenvectors, not their conjugates;
    the overlap formulas downstream rely on exactly this form.
    """
    eigvals, eigvecs = np.linalg.eigh(rho.matrix)
    eigvals = np.clip(eigvals, 0.0, None)
    amp = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    amp = amp / np.linalg.norm(amp)
    return BipartitePureState((rho.space, rho.space), amp)


def partial_trace_second(psi: BipartitePureState) -> DensityOperator:
    """Reduced state of the first mode: ``(A A^dag)_{m m'}``."""
    amp = psi.amplitudes
    return DensityOperator.trusted(psi.spaces[0], amp @ amp.conj().T)


def apply_first(matrix: np.ndarray, psi: BipartitePureState) -> tuple[BipartitePureState, float]:
    """Act with ``matrix (x) identity`` and renormalize.

    Returns the normalized result together with the pre-normalization norm
    (the square root of the outcome probability for a Kraus matrix).
    """
    amp = np.asarray(matrix, dtype=complex) @ psi.amplitudes
    norm = float(np.linalg.norm(amp))
    if norm == 0.0:
        raise ValidationError("operator annihilates the bipartite state")
    return BipartitePureState(psi.spaces, amp / norm), norm


def contractivity_gap(psi1: BipartitePureState, psi2: BipartitePureState) -> float:
    """``|| |Psi1><Psi1| - |Psi2><Psi2| ||_1 - || tr_2 Psi1 - tr_2 Psi2 ||_1``.

    Nonnegative up to roundoff: the partial trace is a channel and channels
    never increase the trace norm. The rank-1 global norm is evaluated with
    the exact overlap identity rather than by materializing the dim^2 x dim^2
    outer products.
    """
    if psi1.amplitudes.shape != psi2.amplitudes.shape:
        raise ValidationError("bipartite shapes differ")
    fid = abs(psi1.overlap(psi2)) ** 2
    global_norm = 2.0 * np.sqrt(max(0.0, 1.0 - fid))
    local = trace_norm_diff(partial_trace_second(psi1), partial_trace_second(psi2))
    return float(global_norm - local.value)
