"""State families, constrained sampling, and witness searches.

The families here are the extremal inputs of the package's claim catalog:

* the zeta family ``rho(s)``, diagonal weights ``n^-s / zeta(s)``, whose
  exact-subtraction trace diverges as ``s -> 2`` (claim 1 and the
  unboundedness of the exact maps);
* two-level states ``sqrt(1-E/N)|base> + sqrt(E/N)|N>`` that keep the
  energy bounded while the second moment grows without limit (claim 2);
* three-level states ``sqrt(1-E/N^2)|0> + sqrt(E/2N^2)(|1> + |N>)`` that
  keep the second moment bounded while the energy drains to zero
  (claim 4).

The sampler mixes random admissible states with these adversarial members
because the uniform-convergence claims are quantified over whole constraint
sets and the worst cases sit on their boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from . import analytic, channels, metrics
from .errors import (
    DimensionExhaustedError,
    EmptyConstraintError,
    TailToleranceError,
    ValidationError,
    WitnessNotFoundError,
)
from .fock import (
    DensityOperator,
    EnergyMoments,
    PureState,
    TruncatedFockSpace,
    density_from_pure,
    energy_moments,
    fock_state,
    mixture,
    superposition,
)

_CHECK_SLACK = 1e-9


@dataclass(frozen=True)
class EnergyConstraint:
    """States with ``0 < tr[rho n] <= bound``."""

    bound: float

    def __post_init__(self):
        if self.bound <= 0:
            raise ValidationError(f"energy bound must be positive, got {self.bound}")

    def check(self, moments: EnergyMoments) -> bool:
        return 0.0 < moments.f1 <= self.bound + _CHECK_SLACK

    def describe(self) -> str:
        return f"0 < F1 <= {self.bound:g}"


@dataclass(frozen=True)
class SecondMomentConstraint:
    """States with ``0 < tr[rho n^2] <= bound``."""

    bound: float

    def __post_init__(self):
        if self.bound <= 0:
            raise ValidationError(f"second-moment bound must be positive, got {self.bound}")

    def check(self, moments: EnergyMoments) -> bool:
        return 0.0 < moments.f2 <= self.bound + _CHECK_SLACK

    def describe(self) -> str:
        return f"0 < F2 <= {self.bound:g}"


@dataclass(frozen=True)
class EnergyAndSecondMomentConstraint:
    """States with ``tr[rho n] >= e1`` and ``tr[rho n^2] <= e2``.

    Nonempty only when ``e1^2 <= e2``, since ``F1 <= sqrt(F2)`` for every
    state.
    """

    e1: float
    e2: float

    def __post_init__(self):
        if self.e1 <= 0 or self.e2 <= 0:
            raise ValidationError("both moment parameters must be positive")
        if self.e1 * self.e1 > self.e2:
            raise EmptyConstraintError(
                f"E1^2 = {self.e1**2:g} > E2 = {self.e2:g}: no state satisfies "
                "F1 >= E1 and F2 <= E2"
            )

    def check(self, moments: EnergyMoments) -> bool:
        return (
            moments.f1 >= self.e1 - _CHECK_SLACK
            and moments.f2 <= self.e2 + _CHECK_SLACK
        )

    def describe(self) -> str:
        return f"F1 >= {self.e1:g} and F2 <= {self.e2:g}"


ConstraintSet = Union[EnergyConstraint, SecondMomentConstraint, EnergyAndSecondMomentConstraint]


class ZetaState(NamedTuple):
    """Truncated zeta-family state plus the neglected tail mass."""

    state: DensityOperator
    tail_mass: float


def zeta_state(s: float, space: TruncatedFockSpace) -> ZetaState:
    """Diagonal state with weights ``n^-s / zeta(s)`` on levels ``1..dim-1``.

    Weights are the raw truncated values (no renormalization); the state's
    trace falls short of one by exactly the reported tail mass, which must
    fit inside both ``tail_tol`` and ``trace_tol`` of the space.
    """
    if s <= 2.0:
        raise ValidationError(f"zeta family needs s > 2 for finite energy, got {s}")
    z = analytic.zeta(s)
    n = np.arange(1, space.dim, dtype=float)
    partial = float(np.sum(n ** (-s)))
    tail_mass = max(0.0, (z.value - partial) / z.value) + z.tail_bound / z.value

    budget = min(space.tail_tol, space.trace_tol)
    if tail_mass > budget:
        required = math.ceil(1.0 + ((s - 1.0) * z.value * budget) ** (-1.0 / (s - 1.0)))
        raise TailToleranceError(
            f"zeta family at s={s:g} leaves tail mass {tail_mass:.3e} past "
            f"dim={space.dim}; requires roughly dim >= {required} for "
            f"tolerance {budget:.1e} (tail and trace tolerances both apply "
            "because the truncated weights are not renormalized)",
            required_dim=required,
        )
    weights = np.zeros(space.dim, dtype=float)
    weights[1:] = n ** (-s) / z.value
    state = DensityOperator(space, np.diag(weights).astype(complex))
    return ZetaState(state=state, tail_mass=tail_mass)


def prop2_state(
    energy: float, n: int, space: TruncatedFockSpace, variant: str = "subtraction"
) -> PureState:
    """Two-level family ``sqrt(1-E/N)|base> + sqrt(E/N)|N>``.

    The base level is ``|1>`` for the subtraction variant and ``|0>`` for
    addition. Energy stays at most ``E + base``, while the second moment
    grows like ``E N``.
    """
    if energy <= 0:
        raise ValidationError(f"energy parameter must be positive, got {energy}")
    if variant not in ("subtraction", "addition"):
        raise ValidationError(f"unknown variant {variant!r}")
    base = 1 if variant == "subtraction" else 0
    n_min = max(math.ceil(energy), base + 1)
    if n < n_min:
        raise ValidationError(f"need N >= {n_min} for E={energy:g}, got {n}")
    if n >= space.dim - 1:
        raise ValidationError(f"N = {n} does not fit below the cutoff {space.dim}")
    w = energy / n
    return superposition(space, [(base, math.sqrt(1.0 - w)), (n, math.sqrt(w))])


def prop4_state(energy: float, n: int, space: TruncatedFockSpace) -> PureState:
    """Three-level family ``sqrt(1-E/N^2)|0> + sqrt(E/2N^2)(|1> + |N>)``.

    Second moment ``(E/2N^2)(1+N^2) <= E`` for every valid ``N`` while the
    energy ``(E/2N^2)(1+N)`` drains to zero as ``N`` grows.
    """
    if energy <= 0:
        raise ValidationError(f"energy parameter must be positive, got {energy}")
    n_min = max(math.ceil(math.sqrt(energy)), 2)
    if n < n_min:
        # N = 1 would merge the |1> and |N> components and change the moments
        raise ValidationError(f"need N >= {n_min} for E={energy:g}, got {n}")
    if n >= space.dim - 1:
        raise ValidationError(f"N = {n} does not fit below the cutoff {space.dim}")
    w = energy / (2.0 * n * n)
    return superposition(
        space,
        [(0, math.sqrt(1.0 - 2.0 * w)), (1, math.sqrt(w)), (n, math.sqrt(w))],
    )


def _fock_members(constraint: ConstraintSet, space: TruncatedFockSpace) -> list[PureState]:
    cap = space.dim - 3
    if isinstance(constraint, EnergyConstraint):
        levels = range(1, min(int(constraint.bound), cap) + 1)
    elif isinstance(constraint, SecondMomentConstraint):
        levels = range(1, min(int(math.sqrt(constraint.bound)), cap) + 1)
    else:
        lo = max(1, math.ceil(constraint.e1))
        hi = min(int(math.sqrt(constraint.e2)), cap)
        levels = range(lo, hi + 1)
    return [fock_state(space, n) for n in levels]


def _two_level_members(constraint: ConstraintSet, space: TruncatedFockSpace) -> list[PureState]:
    # widest admissible spike: weight on the highest level that still meets
    # the constraint with equality; one level of headroom is kept below the
    # cutoff so a subsequent photon addition stays inside the space
    cap = space.dim - 3
    members = []
    if isinstance(constraint, EnergyConstraint):
        for n in {cap, max(2, cap // 2)}:
            w = min(1.0, constraint.bound / n)
            members.append(superposition(space, [(0, math.sqrt(1 - w)), (n, math.sqrt(w))]))
    elif isinstance(constraint, SecondMomentConstraint):
        for n in {cap, max(2, cap // 2)}:
            w = min(1.0, constraint.bound / (n * n))
            members.append(superposition(space, [(0, math.sqrt(1 - w)), (n, math.sqrt(w))]))
    else:
        n_max = min(int(constraint.e2 / constraint.e1), cap)
        if n_max >= 1:
            w = min(1.0, constraint.e1 / n_max)
            members.append(
                superposition(space, [(0, math.sqrt(1 - w)), (n_max, math.sqrt(w))])
            )
    return members


def _family_members(constraint: ConstraintSet, space: TruncatedFockSpace) -> list[PureState]:
    cap = space.dim - 3
    members = []
    if isinstance(constraint, SecondMomentConstraint):
        for n in (max(2, math.ceil(math.sqrt(constraint.bound))), min(16, cap), cap):
            try:
                members.append(prop4_state(constraint.bound, n, space))
            except ValidationError:
                pass
    elif isinstance(constraint, EnergyConstraint) and constraint.bound > 1.0:
        for n in (max(2, math.ceil(constraint.bound - 1.0)), min(16, cap)):
            try:
                members.append(prop2_state(constraint.bound - 1.0, n, space))
            except ValidationError:
                pass
    return members


def _mixture_members(
    constraint: ConstraintSet, space: TruncatedFockSpace
) -> list[DensityOperator]:
    if isinstance(constraint, EnergyAndSecondMomentConstraint) and constraint.e1 <= 1.0:
        # rank-2 corner member with F1 = E1 exactly
        vac, one = fock_state(space, 0), fock_state(space, 1)
        return [mixture([(1.0 - constraint.e1, vac), (constraint.e1, one)], space)]
    return []


def _random_pure(
    constraint: ConstraintSet, space: TruncatedFockSpace, rng: np.random.Generator
) -> PureState:
    """Excited block scaled by a weight drawn inside the admissible budget."""
    cap = space.dim - 3
    if isinstance(constraint, EnergyConstraint):
        base_hi = max(4, int(constraint.bound) + 2)
    elif isinstance(constraint, SecondMomentConstraint):
        base_hi = max(4, int(math.sqrt(constraint.bound)) + 2)
    else:
        base_hi = max(4, int(math.sqrt(constraint.e2)) + 2)
    base_hi = min(base_hi, cap)

    for _ in range(200):
        pool = list(range(1, base_hi + 1))
        if cap > base_hi and rng.random() < 0.4:
            pool.append(int(rng.integers(base_hi + 1, cap + 1)))
        size = int(rng.integers(2, min(6, len(pool)) + 1))
        chosen = np.sort(rng.choice(pool, size=size, replace=False))
        vec = rng.normal(size=size) + 1j * rng.normal(size=size)
        vec /= np.linalg.norm(vec)
        m1 = float(np.sum(np.abs(vec) ** 2 * chosen))
        m2 = float(np.sum(np.abs(vec) ** 2 * chosen.astype(float) ** 2))

        if isinstance(constraint, EnergyConstraint):
            lo, hi = 0.0, min(1.0, constraint.bound / m1)
        elif isinstance(constraint, SecondMomentConstraint):
            lo, hi = 0.0, min(1.0, constraint.bound / m2)
        else:
            lo, hi = constraint.e1 / m1, min(1.0, constraint.e2 / m2)
        if lo > hi:
            continue
        weight = float(rng.uniform(max(lo, 0.05 * hi), hi))
        amps = [(0, math.sqrt(1.0 - weight))] + [
            (int(lvl), math.sqrt(weight) * c) for lvl, c in zip(chosen, vec)
        ]
        psi = superposition(space, amps)
        if constraint.check(energy_moments(density_from_pure(psi))):
            return psi
    raise ValidationError(f"could not sample a state with {constraint.describe()}")


def sample_constrained(
    constraint: ConstraintSet, space: TruncatedFockSpace, seed: int, count: int
) -> list[DensityOperator]:
    """Reproducible admissible states: boundary members first, then random
    pure and low-rank mixed fill.

    Every returned state is re-measured through :func:`energy_moments` and
    rejected loudly if it misses the constraint; the uniform-convergence
    checks downstream are only as strong as this guarantee.
    """
    if count < 1:
        raise ValidationError(f"count must be positive, got {count}")
    if space.dim < 6:
        raise EmptyConstraintError("sampling needs dim >= 6 for headroom")
    rng = np.random.default_rng(seed)

    adversarial: list[DensityOperator] = [
        density_from_pure(psi)
        for psi in (
            _fock_members(constraint, space)
            + _two_level_members(constraint, space)
            + _family_members(constraint, space)
        )
    ]
    adversarial.extend(_mixture_members(constraint, space))
    if not adversarial:
        raise EmptyConstraintError(
            f"no boundary member of {constraint.describe()} fits below dim={space.dim}"
        )

    states = adversarial[:count]
    while len(states) < count:
        if rng.random() < 0.3:
            parts = [_random_pure(constraint, space, rng) for _ in range(int(rng.integers(2, 5)))]
            weights = rng.dirichlet(np.ones(len(parts)))
            states.append(mixture(list(zip(weights, parts)), space))
        else:
            states.append(density_from_pure(_random_pure(constraint, space, rng)))

    for idx, state in enumerate(states):
        moments = energy_moments(state)
        if not constraint.check(moments):
            raise ValidationError(
                f"sampled state {idx} violates {constraint.describe()}: "
                f"F1={moments.f1:.6g}, F2={moments.f2:.6g}"
            )
    return states


@dataclass(frozen=True)
class Prop1Witness:
    """Result of the zeta-family witness search at fixed gamma."""

    s: float
    value: float
    tail_bound: float
    evaluations: tuple[tuple[float, float, float], ...]


_DEFAULT_S_GRID = (3.0, 2.5, 2.2, 2.1, 2.05, 2.02, 2.01, 2.005, 2.002, 2.001)


def find_prop1_witness(
    gamma: float,
    target: float | None = None,
    s_grid: tuple[float, ...] = _DEFAULT_S_GRID,
) -> Prop1Witness:
    """Search ``s > 2`` for a zeta-family state whose exact and damped
    subtraction outputs differ by at least ``target`` in trace norm.

    Scans the grid from large ``s`` toward 2 (the gap grows toward 2) and
    accepts only certified values, ``value - tail_bound >= target``. When a
    miss precedes the first hit, the boundary is refined by bisection and
    the witness reported from the certified side. Failure reports the best
    achieved value instead of extrapolating.
    """
    if gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if target is None:
        target = analytic.prop1_thresholds()[0]

    evaluations = []
    previous_miss: float | None = None
    for s in s_grid:
        sv = analytic.prop1_distance(s, gamma)
        evaluations.append((s, sv.value, sv.tail_bound))
        if sv.value - sv.tail_bound >= target:
            s_pass, pass_sv = s, sv
            if previous_miss is not None:
                lo, hi = s_pass, previous_miss
                for _ in range(40):
                    mid = 0.5 * (lo + hi)
                    mid_sv = analytic.prop1_distance(mid, gamma)
                    evaluations.append((mid, mid_sv.value, mid_sv.tail_bound))
                    if mid_sv.value - mid_sv.tail_bound >= target:
                        s_pass, pass_sv = mid, mid_sv
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo < 1e-6:
                        break
            return Prop1Witness(
                s=s_pass,
                value=pass_sv.value,
                tail_bound=pass_sv.tail_bound,
                evaluations=tuple(evaluations),
            )
        previous_miss = s
    best = max(v for _, v, _ in evaluations)
    raise WitnessNotFoundError(
        f"no s in {s_grid} certifies a gap >= {target:g} at gamma={gamma:g} "
        f"(best {best:.6g})",
        best=best,
        trend=evaluations,
    )


@dataclass(frozen=True)
class WitnessScan:
    """Increasing-N scan of the matrix pipeline against a target gap."""

    prop: int
    variant: str
    target: float
    limit: float
    witness_n: int | None
    witness_value: float | None
    trend: tuple[tuple[int, float], ...]
    decreases: tuple[int, ...]

    @property
    def final_gap(self) -> float:
        return abs(self.trend[-1][1] - self.limit)


def _scan_schedule(n_min: int, n_max: int) -> list[int]:
    dense_top = min(32, n_max)
    schedule = list(range(n_min, dense_top + 1))
    n = dense_top
    while n < n_max:
        n = min(max(n + 1, int(n * 1.3)), n_max)
        schedule.append(n)
    return schedule


def find_propN_witness(
    prop: int,
    energy: float,
    gamma: float,
    space: TruncatedFockSpace,
    target: float | None = None,
    variant: str = "subtraction",
    n_max: int | None = None,
) -> WitnessScan:
    """Scan the two- or three-level family through the full matrix pipeline
    until the exact/damped gap reaches ``target``.

    The scan always continues to the largest representable ``N`` so that
    the approach toward the limiting gap (``2 sqrt(E/(E+1))`` for the
    two-level family, 2 for the three-level family) is part of the result.
    ``N`` is stepped densely up to 32 and geometrically afterwards.
    Non-monotone steps are recorded, not smoothed away. Reaching the cutoff
    without a witness raises, carrying the trend.
    """
    if prop not in (2, 4):
        raise ValidationError(f"prop must be 2 or 4, got {prop}")
    if gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if prop == 2:
        default_target = math.sqrt(energy / (energy + 1.0))
        limit = 2.0 * math.sqrt(energy / (energy + 1.0))
        base = 1 if variant == "subtraction" else 0
        n_min = max(math.ceil(energy), base + 1)
    else:
        default_target = 1.0
        limit = 2.0
        variant = "subtraction"
        n_min = max(math.ceil(math.sqrt(energy)), 2)
    if target is None:
        target = default_target

    if variant == "subtraction":
        exact = channels.ideal_subtract(space)
        damped = channels.approx_subtract(space, gamma)
    else:
        exact = channels.ideal_add(space)
        damped = channels.approx_add(space, gamma)

    n_max = space.dim - 2 if n_max is None else min(n_max, space.dim - 2)
    if n_min > n_max:
        raise DimensionExhaustedError(
            f"family needs N >= {n_min} but the cutoff admits N <= {n_max}"
        )

    trend: list[tuple[int, float]] = []
    decreases: list[int] = []
    witness_n = None
    witness_value = None
    for n in _scan_schedule(n_min, n_max):
        psi = (
            prop2_state(energy, n, space, variant)
            if prop == 2
            else prop4_state(energy, n, space)
        )
        rho = density_from_pure(psi)
        out_exact = channels.conditional(exact, rho).state
        out_damped = channels.conditional(damped, rho).state
        value = metrics.trace_norm_diff(out_exact, out_damped).value
        if trend and value < trend[-1][1]:
            decreases.append(n)
        trend.append((n, value))
        if witness_n is None and value >= target:
            witness_n, witness_value = n, value

    if witness_n is None:
        raise DimensionExhaustedError(
            f"target {target:g} unreached up to N={n_max} "
            f"(best {max(v for _, v in trend):.6g})",
            best=max(v for _, v in trend),
            trend=trend,
        )
    return WitnessScan(
        prop=prop,
        variant=variant,
        target=target,
        limit=limit,
        witness_n=witness_n,
        witness_value=witness_value,
        trend=tuple(trend),
        decreases=tuple(decreases),
    )
