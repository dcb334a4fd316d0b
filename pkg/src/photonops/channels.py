"""Single-Kraus photon subtraction and addition maps.

The exact transformations ``rho -> t a rho a^dag`` and ``rho -> t a^dag rho
a`` are linear and completely positive but not trace nonincreasing for any
``t > 0``, so they are representable here only as flagged Kraus maps whose
conditional outputs are meaningful while their traces are not probabilities.
The physically realizable counterparts damp the input through a beam
splitter of power transmittance ``e^{-2 gamma}``:

    subtract k photons:  K = sqrt((e^{2g}-1)^k / k!) a^k e^{-g n}
    add k photons:       K = sqrt(e^{2g}-1) e^{-g n} (a^dag)^k

The addition prefactor is written exactly as above in the default
"as-written" normalization. It lacks the ``(e^{2g}-1)^k / k!`` structure of
the subtraction family, and for ``k >= 2`` at small ``gamma`` the resulting
map can amplify traces; the constructor computes the actual gain and flags
the operation rather than renormalizing silently. The alternative
"instrument-consistent" mode applies the subtraction-style prefactor. Both
modes produce identical conditional outputs because scalar prefactors
cancel in the normalization.

All Kraus matrices here live on a single diagonal, which the band fast path
exploits: applying a map costs O(dim^2) instead of two dense matmuls.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    TraceIncreasingWarning,
    TruncationOverflowError,
    ValidationError,
    VanishingProbabilityError,
)
from .fock import Band, DensityOperator, TruncatedFockSpace, _freeze

# conditional outputs below this success probability are refused:
# normalizing them would amplify truncation noise past any tolerance
P_MIN = 1e-12


@dataclass(frozen=True)
class KrausOperation:
    """CP map ``rho -> K rho K^dag`` given by a single Kraus matrix.

    ``trace_nonincreasing`` records whether ``K^dag K <= 1`` holds on the
    space (ideal maps carry ``False`` regardless of the cutoff, since no
    scale makes them operations on the full space). ``max_gain`` is the
    largest eigenvalue of ``K^dag K``.
    """

    space: TruncatedFockSpace
    kraus: np.ndarray
    trace_nonincreasing: bool
    label: str
    band: Band | None = field(default=None, compare=False)
    max_gain: float = 0.0

    def __post_init__(self):
        mat = _freeze(np.asarray(self.kraus, dtype=complex))
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValidationError(
                f"Kraus shape {mat.shape} does not match dim {self.space.dim}"
            )
        object.__setattr__(self, "kraus", mat)


@dataclass(frozen=True)
class ConditionalOutput:
    """Normalized post-operation state with its outcome probability.

    For trace-nonincreasing maps the probability lies in ``(0, 1]``; for
    ideal maps it is the ``t``-scaled trace and may exceed 1.
    """

    state: DensityOperator
    probability: float


def _log_factorials(up_to: int) -> np.ndarray:
    # table[m] = log(m!)
    return np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, up_to + 1, dtype=float)))))


def _log_expm1(x: float) -> float:
    # log(e^x - 1), stable for both tiny and large x
    if x > 1.0:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def _band_operation(
    space: TruncatedFockSpace,
    offset: int,
    values: np.ndarray,
    label: str,
    ideal: bool = False,
) -> KrausOperation:
    band = Band(offset=offset, values=_freeze(values.astype(complex)))
    gain = float(np.max(np.abs(values) ** 2)) if values.size else 0.0
    tni = False if ideal else gain <= 1.0 + space.psd_tol
    return KrausOperation(
        space=space,
        kraus=band.to_dense(space.dim),
        trace_nonincreasing=tni,
        label=label,
        band=band,
        max_gain=gain,
    )


def ideal_subtract(space: TruncatedFockSpace, t: float = 1.0) -> KrausOperation:
    """Exact subtraction ``rho -> t a rho a^dag`` (not an operation).

    ``t`` scales reported traces only; conditional outputs never depend on
    it.
    """
    if t <= 0.0:
        raise ValidationError(f"t must be positive, got {t}")
    n = np.arange(1, space.dim, dtype=float)
    return _band_operation(space, 1, np.sqrt(t * n), f"ideal_sub({t:g})", ideal=True)


def ideal_add(space: TruncatedFockSpace, t: float = 1.0) -> KrausOperation:
    """Exact addition ``rho -> t a^dag rho a`` (not an operation)."""
    if t <= 0.0:
        raise ValidationError(f"t must be positive, got {t}")
    n = np.arange(1, space.dim, dtype=float)
    return _band_operation(space, -1, np.sqrt(t * n), f"ideal_add({t:g})", ideal=True)


def _subtract_band(gamma: float, k: int, dim: int) -> np.ndarray:
    i = np.arange(dim - k, dtype=float)
    logfact = _log_factorials(dim)
    log_coeff = k * _log_expm1(2.0 * gamma) - logfact[k]
    log_fall = logfact[k:dim] - logfact[: dim - k]
    return np.exp(0.5 * (log_coeff + log_fall) - gamma * (i + k))


def approx_subtract_k(space: TruncatedFockSpace, gamma: float, k: int) -> KrausOperation:
    """Damped subtraction of ``k`` photons.

    ``k = 0`` is pure damping, ``k = 1`` the single-photon map. The
    eigenvalues of ``K^dag K`` are the level-wise outcome weights of the
    subtraction instrument and never exceed 1.
    """
    if gamma <= 0.0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 0:
        raise ValidationError(f"k must be a nonnegative integer, got {k!r}")
    if k >= space.dim:
        raise ValidationError(
            f"k = {k} >= dim = {space.dim}: the map is identically zero on this space"
        )
    values = _subtract_band(gamma, k, space.dim)
    return _band_operation(space, k, values, f"approx_sub_k({gamma:g},{k})")


def approx_subtract(space: TruncatedFockSpace, gamma: float) -> KrausOperation:
    """Single-photon damped subtraction ``sqrt(e^{2g}-1) a e^{-g n}``."""
    if gamma <= 0.0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    values = _subtract_band(gamma, 1, space.dim)
    return _band_operation(space, 1, values, f"approx_sub({gamma:g})")


def _add_band(gamma: float, k: int, dim: int, mode: str) -> np.ndarray:
    n = np.arange(dim - k, dtype=float)
    logfact = _log_factorials(dim)
    if mode == "as-written":
        log_coeff = _log_expm1(2.0 * gamma)
    else:
        log_coeff = k * _log_expm1(2.0 * gamma) - logfact[k]
    log_rise = logfact[k:dim] - logfact[: dim - k]
    return np.exp(0.5 * (log_coeff + log_rise) - gamma * (n + k))


def approx_add_k(
    space: TruncatedFockSpace,
    gamma: float,
    k: int,
    normalization_mode: str = "as-written",
) -> KrausOperation:
    """Damped addition of ``k`` photons.

    ``normalization_mode`` selects the scalar prefactor (see module
    docstring); both modes agree at ``k = 1`` and always share conditional
    outputs. As-written maps with ``k >= 2`` can fail to be trace
    nonincreasing at small ``gamma``; that is detected and surfaced through
    the flag and a warning.
    """
    if gamma <= 0.0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    if k >= space.dim:
        raise ValidationError(f"k = {k} >= dim = {space.dim}: image leaves the space")
    if normalization_mode not in ("as-written", "instrument-consistent"):
        raise ValidationError(f"unknown normalization mode {normalization_mode!r}")
    values = _add_band(gamma, k, space.dim, normalization_mode)
    op = _band_operation(space, -k, values, f"approx_add_k({gamma:g},{k})")
    if not op.trace_nonincreasing:
        warnings.warn(
            f"{op.label} in mode {normalization_mode!r} has max gain "
            f"{op.max_gain:.4g} > 1 and is not a quantum operation",
            TraceIncreasingWarning,
            stacklevel=2,
        )
    return op


def approx_add(space: TruncatedFockSpace, gamma: float) -> KrausOperation:
    """Single-photon damped addition ``sqrt(e^{2g}-1) e^{-g n} a^dag``."""
    if gamma <= 0.0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    values = _add_band(gamma, 1, space.dim, "as-written")
    return _band_operation(space, -1, values, f"approx_add({gamma:g})")


def apply(op: KrausOperation, rho: DensityOperator) -> tuple[np.ndarray, float]:
    """Unnormalized output ``K rho K^dag`` and its trace.

    Creation-type maps refuse inputs whose top ``k`` levels carry more than
    ``tail_tol`` of mass, since that mass would silently leave the space and
    bias every trace downstream.
    """
    if op.space.dim != rho.space.dim:
        raise ValidationError(
            f"dimension mismatch: operation {op.space.dim}, state {rho.space.dim}"
        )
    dim = op.space.dim
    if op.band is not None:
        offset = op.band.offset
        if offset < 0:
            lost = float(np.sum(rho.diagonal[dim + offset :]))
            if lost > op.space.tail_tol:
                raise TruncationOverflowError(
                    f"{op.label} maps {lost:.3e} of input mass past the cutoff "
                    f"(tail_tol {op.space.tail_tol:.1e})"
                )
        values = op.band.values
        out = np.zeros((dim, dim), dtype=complex)
        if offset >= 0:
            scaled = values[:, None] * rho.matrix[offset:, offset:] * values.conj()[None, :]
            out[: dim - offset, : dim - offset] = scaled
        else:
            q = -offset
            scaled = values[:, None] * rho.matrix[: dim - q, : dim - q] * values.conj()[None, :]
            out[q:, q:] = scaled
    else:
        out = op.kraus @ rho.matrix @ op.kraus.conj().T
    return out, float(out.trace().real)


def conditional(op: KrausOperation, rho: DensityOperator) -> ConditionalOutput:
    """Normalized conditional output ``K rho K^dag / tr`` with its probability.

    Refused when the trace does not exceed ``P_MIN``; the quotient is
    undefined at zero and numerically meaningless just above it.
    """
    out, prob = apply(op, rho)
    if prob <= P_MIN:
        raise VanishingProbabilityError(
            f"{op.label} succeeds with probability {prob:.3e} <= {P_MIN:.0e}"
        )
    out = (out + out.conj().T) / (2.0 * prob)
    return ConditionalOutput(state=DensityOperator.trusted(op.space, out), probability=prob)


def compose(op: KrausOperation, k: int) -> KrausOperation:
    """``k``-fold composition, Kraus matrix ``K^k``.

    Used to check that repeated single-photon maps are proportional to the
    corresponding multi-photon maps at ``k`` times the damping rate.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    if k == 1:
        return op
    ideal = op.label.startswith("ideal")
    if op.band is None:
        power = np.linalg.matrix_power(op.kraus, k)
        gain = float(np.linalg.norm(power, 2) ** 2)
        return KrausOperation(
            space=op.space,
            kraus=power,
            trace_nonincreasing=False if ideal else gain <= 1.0 + op.space.psd_tol,
            label=f"composite({op.label}^{k})",
            band=None,
            max_gain=gain,
        )
    dim = op.space.dim
    offset, values = op.band.offset, op.band.values
    step = abs(offset)
    if step * k >= dim and step > 0:
        raise ValidationError(
            f"composite band offset {offset * k} leaves the {dim}-dimensional space"
        )
    length = dim - step * k if step > 0 else dim
    stacked = np.stack([values[j * step : j * step + length] for j in range(k)])
    composed = np.prod(stacked, axis=0)
    return _band_operation(
        op.space, offset * k, composed, f"composite({op.label}^{k})", ideal=ideal
    )


def completeness_defect(
    space: TruncatedFockSpace, gamma: float, k_max: int, max_level: int | None = None
) -> float:
    """Operator norm of ``I - sum_{k<=k_max} K_k^dag K_k`` for the
    subtraction instrument, optionally restricted to the lowest levels.

    Everything is diagonal: level ``n`` receives ``e^{-2 g n} sum_k C(n,k)
    (e^{2g}-1)^k``, a positive binomial sum that reaches 1 exactly once
    ``k_max >= n``. Sums are taken in log space so large cutoffs cannot
    overflow.
    """
    if gamma <= 0.0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if k_max < 0:
        raise ValidationError(f"k_max must be nonnegative, got {k_max}")
    levels = space.dim if max_level is None else min(max_level, space.dim)
    log_x = _log_expm1(2.0 * gamma)
    logfact = _log_factorials(levels + 1)
    defect = 0.0
    for n in range(levels):
        ks = np.arange(min(k_max, n) + 1)
        log_terms = (
            logfact[n]
            - logfact[ks]
            - logfact[n - ks]
            + ks * log_x
            - 2.0 * gamma * n
        )
        peak = float(np.max(log_terms))
        level_sum = math.exp(peak) * float(np.sum(np.exp(log_terms - peak)))
        defect = max(defect, abs(1.0 - level_sum))
    return defect


def subtraction_composition_constant(gamma: float, k: int) -> float:
    """Proportionality constant between the ``k``-fold single-photon
    subtraction and the ``k``-photon map at rate ``k gamma``:
    ``k! (e^{2g}-1)^k e^{g k (k-1)} / (e^{2kg}-1)^k``."""
    x = math.expm1(2.0 * gamma)
    xk = math.expm1(2.0 * k * gamma)
    return math.factorial(k) * x**k * math.exp(gamma * k * (k - 1)) / xk**k


def addition_composition_constant(
    gamma: float, k: int, normalization_mode: str = "as-written"
) -> float:
    """Proportionality constant on the addition side; depends on the
    prefactor convention of the multi-photon map."""
    x = math.expm1(2.0 * gamma)
    xk = math.expm1(2.0 * k * gamma)
    if normalization_mode == "as-written":
        return x**k * math.exp(gamma * k * (k - 1)) / xk
    return math.factorial(k) * x**k * math.exp(gamma * k * (k - 1)) / xk**k
