"""Truncated single-mode Fock space: states, ladder operators, energy moments.

Conventions used throughout the package:

* The space keeps the first ``dim`` number states ``|0>, ..., |dim-1>``.
* Operators are plain matrix restrictions of the infinite-dimensional
  definitions. No boundary corrections are applied; in particular the
  commutator ``[a, a^dag]`` equals the identity only on the subspace
  spanned by ``|0> .. |dim-2>`` and its top diagonal entry is ``1 - dim``.
* The photon-number operator ``n = a^dag a`` doubles as the Hamiltonian,
  so "energy" below always means photon number.
* Everything is immutable after construction and all functions are pure.

Matrices are stored dense (complex128). Ladder and damping operators also
carry their single-diagonal band so that repeated application can skip the
dense matmul.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import TailMassWarning, ValidationError


@dataclass(frozen=True)
class TruncatedFockSpace:
    """Cutoff dimension plus the tolerance policy for all matrix numerics.

    ``dim`` is the number of retained levels. The tolerances bound, in
    order: Hermiticity deviation, negative eigenvalue excursions, trace
    deviation, and probability mass allowed on the top retained level.
    """

    dim: int
    herm_tol: float = 1e-12
    psd_tol: float = 1e-10
    trace_tol: float = 1e-10
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.dim < 2:
            raise ValidationError(f"space needs dim >= 2, got {self.dim}")
        for name in ("herm_tol", "psd_tol", "trace_tol", "tail_tol"):
            tol = getattr(self, name)
            if not 0.0 < tol < 1e-3:
                raise ValidationError(f"{name} must lie in (0, 1e-3), got {tol}")

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.dim, dtype=float)


@dataclass(frozen=True)
class Band:
    """Single-diagonal structure: ``matrix == np.diag(values, offset)``."""

    offset: int
    values: np.ndarray

    def to_dense(self, dim: int) -> np.ndarray:
        mat = np.zeros((dim, dim), dtype=complex)
        mat += np.diag(self.values.astype(complex), self.offset)
        return mat


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on the truncated space, with optional band structure."""

    space: TruncatedFockSpace
    matrix: np.ndarray
    label: str
    band: Band | None = field(default=None, compare=False)

    def __post_init__(self):
        mat = _freeze(np.asarray(self.matrix, dtype=complex))
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValidationError(
                f"operator shape {mat.shape} does not match dim {self.space.dim}"
            )
        object.__setattr__(self, "matrix", mat)


def annihilation(space: TruncatedFockSpace) -> FockOperator:
    """Photon annihilation operator: ``a|n> = sqrt(n)|n-1>``."""
    values = np.sqrt(np.arange(1, space.dim, dtype=float))
    band = Band(offset=1, values=_freeze(values.astype(complex)))
    return FockOperator(space, band.to_dense(space.dim), "annihilation", band)


def creation(space: TruncatedFockSpace) -> FockOperator:
    """Photon creation operator: ``a^dag|n> = sqrt(n+1)|n+1>``.

    Equals the conjugate transpose of :func:`annihilation`; the top level
    is annihilated (``a^dag|dim-1> = 0``) because the image leaves the space.
    """
    values = np.sqrt(np.arange(1, space.dim, dtype=float))
    band = Band(offset=-1, values=_freeze(values.astype(complex)))
    return FockOperator(space, band.to_dense(space.dim), "creation", band)


def number_operator(space: TruncatedFockSpace) -> FockOperator:
    """Photon number operator ``n = a^dag a``, diagonal ``(0, 1, ..., dim-1)``."""
    band = Band(offset=0, values=_freeze(space.levels.astype(complex)))
    return FockOperator(space, band.to_dense(space.dim), "number", band)


def damping(space: TruncatedFockSpace, gamma: float) -> FockOperator:
    """Number damping ``exp(-gamma n)``, diagonal entries ``e^{-gamma n}``."""
    if gamma <= 0:
        raise ValidationError(f"damping needs gamma > 0, got {gamma}")
    values = np.exp(-gamma * space.levels)
    band = Band(offset=0, values=_freeze(values.astype(complex)))
    return FockOperator(space, band.to_dense(space.dim), f"damping({gamma})", band)


@dataclass(frozen=True)
class PureState:
    """Normalized state vector ``sum_n c_n |n>`` on the truncated space."""

    space: TruncatedFockSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = _freeze(np.asarray(self.amplitudes, dtype=complex))
        if amp.shape != (self.space.dim,):
            raise ValidationError(
                f"amplitude vector has shape {amp.shape}, expected ({self.space.dim},)"
            )
        norm_dev = abs(float(np.sum(np.abs(amp) ** 2)) - 1.0)
        if norm_dev > self.space.trace_tol:
            raise ValidationError(f"state norm deviates by {norm_dev:.3e}")
        tail = float(np.abs(amp[-1]) ** 2)
        if tail > self.space.tail_tol:
            warnings.warn(
                f"top-level mass {tail:.3e} exceeds tail_tol {self.space.tail_tol:.1e}",
                TailMassWarning,
                stacklevel=3,
            )
        object.__setattr__(self, "amplitudes", amp)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def fock_state(space: TruncatedFockSpace, n: int) -> PureState:
    """Number state ``|n>``."""
    if not 0 <= n < space.dim:
        raise ValidationError(f"level {n} outside 0..{space.dim - 1}")
    amp = np.zeros(space.dim, dtype=complex)
    amp[n] = 1.0
    return PureState(space, amp)


def superposition(
    space: TruncatedFockSpace, coefficients: Iterable[tuple[int, complex]]
) -> PureState:
    """Normalized superposition from (level, amplitude) pairs.

    Amplitudes at repeated levels add; the result is normalized explicitly,
    so only the relative weights matter.
    """
    amp = np.zeros(space.dim, dtype=complex)
    for idx, coeff in coefficients:
        if not 0 <= idx < space.dim:
            raise ValidationError(f"level {idx} outside 0..{space.dim - 1}")
        amp[idx] += coeff
    norm = float(np.linalg.norm(amp))
    if norm == 0.0:
        raise ValidationError("all coefficients vanish")
    return PureState(space, amp / norm)


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix on the space.

    The public constructor validates all invariants (Hermiticity, positive
    semidefiniteness, trace, tail mass). Library internals that produce
    matrices of the form ``K rho K^dag / tr`` use :meth:`trusted`, which
    skips the eigensolve; those outputs are positive by construction and
    can always be audited afterwards with :func:`validate`.
    """

    space: TruncatedFockSpace
    matrix: np.ndarray

    def __post_init__(self):
        mat = _freeze(np.asarray(self.matrix, dtype=complex))
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValidationError(
                f"matrix shape {mat.shape} does not match dim {self.space.dim}"
            )
        object.__setattr__(self, "matrix", mat)
        report = validate(self)
        failed = [c for c in report.checks if not c.passed and c.name != "tail"]
        if failed:
            worst = ", ".join(f"{c.name} (dev {c.deviation:.3e})" for c in failed)
            raise ValidationError(f"invalid density operator: {worst}")
        tail_check = report["tail"]
        if not tail_check.passed:
            warnings.warn(
                f"top-level population {tail_check.deviation + self.space.tail_tol:.3e} "
                f"exceeds tail_tol {self.space.tail_tol:.1e}",
                TailMassWarning,
                stacklevel=3,
            )

    @classmethod
    def trusted(cls, space: TruncatedFockSpace, matrix: np.ndarray) -> "DensityOperator":
        """Wrap a matrix that is Hermitian PSD with unit trace by construction."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "space", space)
        object.__setattr__(obj, "matrix", _freeze(np.asarray(matrix, dtype=complex)))
        return obj

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real

    def is_diagonal(self) -> bool:
        off = self.matrix - np.diag(self.matrix.diagonal())
        return not np.any(off)


def density_from_pure(psi: PureState) -> DensityOperator:
    """Rank-1 projector ``|psi><psi|``."""
    mat = np.outer(psi.amplitudes, psi.amplitudes.conj())
    return DensityOperator.trusted(psi.space, mat)


@dataclass(frozen=True)
class EnergyMoments:
    """First and second photon-number moments and their variance."""

    f1: float
    f2: float
    variance: float


def energy_moments(rho: DensityOperator) -> EnergyMoments:
    """Moments ``tr[rho n]`` and ``tr[rho n^2]``; diagonal entries suffice."""
    levels = rho.space.levels
    probs = rho.diagonal
    f1 = float(np.dot(probs, levels))
    f2 = float(np.dot(probs, levels**2))
    return EnergyMoments(f1=f1, f2=f2, variance=f2 - f1 * f1)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float


@dataclass(frozen=True)
class ValidationReport:
    """Per-invariant pass/fail with measured deviations. Never raises."""

    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


def validate(rho: DensityOperator) -> ValidationReport:
    """Measure every density-operator invariant without mutating anything."""
    space = rho.space
    mat = rho.matrix

    herm_dev = float(np.max(np.abs(mat - mat.conj().T)))

    if rho.is_diagonal():
        min_eig = float(np.min(mat.diagonal().real))
    else:
        min_eig = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)[0])
    psd_dev = max(0.0, -min_eig)

    trace_dev = abs(float(mat.trace().real) - 1.0)
    tail = float(mat[-1, -1].real)

    checks = (
        CheckResult("hermitian", herm_dev <= space.herm_tol, herm_dev, space.herm_tol),
        CheckResult("psd", min_eig >= -space.psd_tol, psd_dev, space.psd_tol),
        CheckResult("trace", trace_dev <= space.trace_tol, trace_dev, space.trace_tol),
        CheckResult("tail", tail <= space.tail_tol, max(0.0, tail - space.tail_tol), space.tail_tol),
    )
    return ValidationReport(checks)


def mixture(
    components: Sequence[tuple[float, PureState]], space: TruncatedFockSpace
) -> DensityOperator:
    """Convex combination of pure states; weights must sum to 1."""
    total = sum(w for w, _ in components)
    if abs(total - 1.0) > space.trace_tol:
        raise ValidationError(f"mixture weights sum to {total}, expected 1")
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for weight, psi in components:
        if weight < 0:
            raise ValidationError("mixture weights must be nonnegative")
        mat += weight * np.outer(psi.amplitudes, psi.amplitudes.conj())
    return DensityOperator.trusted(space, mat)
