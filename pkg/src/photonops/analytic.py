"""Certified series evaluation and the closed-form convergence bounds.

Every series evaluator returns a :class:`SeriesValue` carrying a rigorous
upper bound on the neglected remainder, so downstream comparisons can state
how much disagreement the truncations themselves can account for.

The module also houses the package's claim catalog on the analytic side:
the split-sum distance for the zeta family (claim 1), the threshold
constants ``ln(e-1)/2`` and ``ln(e/(e-1))/2``, and the uniform-convergence
bounds for damped photon addition (claim 3) and subtraction (claim 5)
together with the transmittance selection rules that make them smaller
than a requested accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RegimeViolationError, ValidationError

# Bernoulli numbers B_2, B_4, ..., B_16 as exact double ratios; B_18 bounds
# the first omitted Euler-Maclaurin correction.
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)
_B18 = 43867.0 / 798.0

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class SeriesValue:
    """Numeric value plus a certified bound on the neglected remainder."""

    value: float
    tail_bound: float
    terms_used: int

    def __float__(self) -> float:
        return self.value


def zeta(s: float) -> SeriesValue:
    """Riemann zeta for real ``s > 1`` by Euler-Maclaurin summation.

    Direct sum over the first terms plus integral, half-term and Bernoulli
    corrections. Because ``x^-s`` is completely monotone the remainder is
    enveloped by the first omitted correction, which is what the returned
    tail bound reports (plus accumulated roundoff).
    """
    if s <= 1.0:
        raise ValidationError(f"zeta series diverges for s <= 1, got {s}")
    cut = 50
    n = np.arange(1, cut, dtype=float)
    total = float(np.sum(n ** (-s)))
    total += cut ** (1.0 - s) / (s - 1.0) + 0.5 * cut ** (-s)
    rising = s
    power = cut ** (-s - 1.0)
    for j, b2j in enumerate(_BERNOULLI, start=1):
        total += b2j / math.factorial(2 * j) * rising * power
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= cut * cut
    remainder = abs(_B18 / math.factorial(18) * rising * power)
    tail = remainder + 8.0 * _EPS * abs(total)
    return SeriesValue(value=total, tail_bound=tail, terms_used=cut + len(_BERNOULLI))


def polylog(s: float, z: float, tol: float = 1e-14, max_terms: int = 5_000_000) -> SeriesValue:
    """Polylogarithm ``Li_s(z) = sum_{n>=1} z^n / n^s`` for ``0 < z < 1``.

    Any real order is accepted. For ``s >= 0`` the remainder is bounded by a
    plain geometric tail; for negative orders the polynomial growth of
    ``n^-s`` is absorbed into the ratio via ``n^|s| <= (N+1)^|s|
    exp(|s|(n-N-1)/(N+1))``.
    """
    if not 0.0 < z < 1.0:
        raise ValidationError(f"polylog needs z in (0, 1), got {z}")
    total = 0.0
    n = 1
    zpow = z
    while True:
        total += zpow / n**s
        nxt = n + 1
        if s >= 0.0:
            bound = zpow * z / (nxt**s * (1.0 - z))
        else:
            ratio = z * math.exp(-s / nxt)
            bound = math.inf if ratio >= 1.0 else nxt ** (-s) * zpow * z / (1.0 - ratio)
        if bound <= tol or n >= max_terms:
            bound += 4.0 * _EPS * math.sqrt(n) * abs(total)
            return SeriesValue(value=total, tail_bound=bound, terms_used=n)
        n = nxt
        zpow *= z


def prop1_thresholds() -> tuple[float, float]:
    """The constants ``ln(e-1)/2`` and ``ln(e/(e-1))/2``.

    The first is the distance level that a zeta-family state can always
    realize between exact and damped subtraction; the second separates the
    large- and small-transmittance branches of that argument. They sum to
    exactly one half.
    """
    return 0.5 * math.log(math.e - 1.0), 0.5 * math.log(math.e / (math.e - 1.0))


def prop1_distance(s: float, gamma: float) -> SeriesValue:
    """Trace-norm gap for the zeta family, ``sum_n n^{1-s} |e^{-2 gamma n}/Li - 1/zeta|``.

    Both conditional outputs are diagonal with weights proportional to
    ``n^{1-s} e^{-2 gamma n}`` and ``n^{1-s}``; since both normalize to one,
    the absolute sum equals twice its positive part. The crossover level of
    the sign is located explicitly, which turns the slowly converging
    absolute-value series into two finite sums against the certified
    ``zeta(s-1)`` and ``Li_{s-1}(e^{-2 gamma})`` totals. The three splits
    adjacent to the estimated crossover are evaluated and the largest kept
    (every split underestimates, the correct one is exact).
    """
    if s <= 2.0:
        raise ValidationError(f"zeta family needs s > 2, got {s}")
    if gamma <= 0.0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    big = zeta(s - 1.0)
    small = polylog(s - 1.0, math.exp(-2.0 * gamma))
    a_val, b_val = big.value, small.value
    crossover = math.log(a_val / b_val) / (2.0 * gamma)
    base = max(0, math.floor(crossover))

    best = 0.0
    best_p = best_q = 0.0
    for split in {max(0, base - 1), base, base + 1}:
        n = np.arange(1, split + 1, dtype=float)
        weights = n ** (1.0 - s)
        p_sum = float(np.sum(weights * np.exp(-2.0 * gamma * n)))
        q_sum = float(np.sum(weights))
        candidate = 2.0 * (p_sum / b_val - q_sum / a_val)
        if candidate > best:
            best, best_p, best_q = candidate, p_sum, q_sum

    # propagate the certifications of the two normalizing totals, then a
    # roundoff allowance for the finite sums and final arithmetic
    prop = 2.0 * (
        best_p * small.tail_bound / (b_val * max(b_val - small.tail_bound, 1e-300))
        + best_q * big.tail_bound / (a_val * max(a_val - big.tail_bound, 1e-300))
    )
    slop = 16.0 * _EPS * (1.0 + math.sqrt(base + 1.0)) * (1.0 + best)
    return SeriesValue(
        value=best,
        tail_bound=prop + slop,
        terms_used=base + 1 + big.terms_used + small.terms_used,
    )


def prop1_truncation_bound(s: float, gamma: float, dim: int) -> float:
    """Bound on how far the cutoff-``dim`` matrix evaluation of the zeta-family
    gap can sit from the infinite-dimensional value.

    With ``R_A = sum_{n>=dim} n^{1-s}`` and ``R_B`` its damped counterpart,
    term-by-term comparison of the renormalized truncated sums gives
    ``2 (R_A / A_dim + R_B / B_dim)``.
    """
    if s <= 2.0:
        raise ValidationError(f"zeta family needs s > 2, got {s}")
    big = zeta(s - 1.0)
    small = polylog(s - 1.0, math.exp(-2.0 * gamma))
    z = math.exp(-2.0 * gamma)
    r_a = dim ** (1.0 - s) + dim ** (2.0 - s) / (s - 2.0)
    r_b = z**dim * dim ** (1.0 - s) / (1.0 - z)
    a_trunc = big.value - big.tail_bound - r_a
    b_trunc = small.value - small.tail_bound - r_b
    if a_trunc <= 0.0 or b_trunc <= 0.0:
        return 2.0
    return min(2.0, 2.0 * (r_a / a_trunc + r_b / b_trunc))


@dataclass(frozen=True)
class BoundResult:
    """Uniform-convergence bound: loose closed form plus the tighter
    intermediate expression it was relaxed from."""

    value: float
    intermediate: float


def addition_bound(gamma: float, f1: float, f2: float) -> BoundResult:
    """Distance bound ``sqrt(8 gamma (1 + 2 F1 + F2) / (F1 + 1))`` for damped
    photon addition on a state with moments ``(F1, F2)``.

    Also reports the intermediate form ``2 sqrt(1 - ((F1 + 1 - gamma (1 +
    2 F1 + F2)) / (F1 + 1))^2)`` from which the closed form is relaxed. The
    derivation linearizes ``e^-x >= 1 - x``; outside that regime (when the
    subtracted term exceeds ``F1 + 1``) the bound states nothing and a
    regime violation is raised instead of clamping.
    """
    _check_bound_args(gamma, f1, f2)
    shrink = gamma * (1.0 + 2.0 * f1 + f2)
    if shrink >= f1 + 1.0:
        raise RegimeViolationError(
            f"gamma (1 + 2 F1 + F2) = {shrink:.6g} >= F1 + 1 = {f1 + 1.0:.6g}; "
            "the linearized bound is vacuous here"
        )
    ratio = (f1 + 1.0 - shrink) / (f1 + 1.0)
    intermediate = 2.0 * math.sqrt(max(0.0, 1.0 - ratio * ratio))
    outer = math.sqrt(8.0 * shrink / (f1 + 1.0))
    return BoundResult(value=outer, intermediate=intermediate)


def subtraction_bound(gamma: float, f1: float, f2: float) -> BoundResult:
    """Distance bound ``sqrt(8 gamma F2 / F1)`` for damped photon subtraction,
    with the intermediate form ``2 sqrt(1 - ((F1 - gamma F2)/F1)^2)``.

    Requires strictly positive energy ``F1`` and the regime ``gamma F2 < F1``.
    """
    _check_bound_args(gamma, f1, f2)
    if f1 <= 0.0:
        raise ValidationError("subtraction bound needs F1 > 0")
    if gamma * f2 >= f1:
        raise RegimeViolationError(
            f"gamma F2 = {gamma * f2:.6g} >= F1 = {f1:.6g}; bound is vacuous here"
        )
    ratio = (f1 - gamma * f2) / f1
    intermediate = 2.0 * math.sqrt(max(0.0, 1.0 - ratio * ratio))
    outer = math.sqrt(8.0 * gamma * f2 / f1)
    return BoundResult(value=outer, intermediate=intermediate)


def _check_bound_args(gamma: float, f1: float, f2: float) -> None:
    if gamma <= 0.0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if f1 < 0.0 or f2 < f1:
        raise ValidationError(f"moments must satisfy 0 <= F1 <= F2, got ({f1}, {f2})")


def gamma_for_addition(epsilon: float, energy: float) -> float:
    """Transmittance parameter ``eps^2 / (8 (3 E + 2))`` guaranteeing the
    addition bound stays below ``eps`` whenever ``F2 <= E``."""
    _check_selection_args(epsilon, energy)
    return epsilon * epsilon / (8.0 * (3.0 * energy + 2.0))


def gamma_for_subtraction(epsilon: float, e1: float, e2: float) -> float:
    """Parameter ``E1 eps^2 / (8 E2)``; the subtraction bound equals ``eps``
    exactly at the constraint corner ``F1 = E1``, ``F2 = E2``."""
    _check_selection_args(epsilon, e1)
    if e2 < e1:
        raise ValidationError(f"need E2 >= E1, got E1={e1}, E2={e2}")
    return e1 * epsilon * epsilon / (8.0 * e2)


def _check_selection_args(epsilon: float, energy: float) -> None:
    if not 0.0 < epsilon < 2.0:
        raise ValidationError(f"epsilon must lie in (0, 2), got {epsilon}")
    if energy <= 0.0:
        raise ValidationError(f"energy parameter must be positive, got {energy}")


def variance_accuracy(kind: str, gamma: float, f: float, sigma_sq: float) -> float:
    """Halved-distance accuracy estimate in terms of energy and its variance.

    ``sqrt(2 gamma ((F+1)^2 + sigma^2) / (F+1))`` for addition and
    ``sqrt(2 gamma (F^2 + sigma^2) / F)`` for subtraction; substituting
    ``sigma^2 = F2 - F1^2`` recovers exactly half of the corresponding
    closed-form bound.
    """
    if gamma <= 0.0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if sigma_sq < 0.0:
        raise ValidationError(f"variance must be nonnegative, got {sigma_sq}")
    if kind == "addition":
        if f < 0.0:
            raise ValidationError("energy must be nonnegative")
        return math.sqrt(2.0 * gamma * ((f + 1.0) ** 2 + sigma_sq) / (f + 1.0))
    if kind == "subtraction":
        if f <= 0.0:
            raise ValidationError("subtraction accuracy needs F > 0")
        return math.sqrt(2.0 * gamma * (f * f + sigma_sq) / f)
    raise ValidationError(f"kind must be 'addition' or 'subtraction', got {kind!r}")
