"""
Date: October 19th, 2026

This file contains the probe optimizer. At a fixed photon budget n_T on the
sample and a fixed transmissivity it searches the probe parameters that
minimize the estimation error of an observable, then fits power laws
Delta eps^2 ~ C / n_T^k over sweeps of n_T.

The search coordinate along the squeezing axis is the logit z of the seeded
share of the budget: the seed carries n_T * expit(z) photons and the
squeezed vacuum the remaining n_T * expit(-z) = 2 sinh^2 r. Both tails of
the split are then resolved on a uniform grid in z.

"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize as sciopt
from scipy import special, stats

from twinbeam.channel_model import (
    ProbeConfig,
    Scenario,
    total_photon_number,
    total_photon_number_batch,
)
from twinbeam.estimators import ErrorBudget, Observable, budget
from twinbeam.exceptions import (
    Infeasible,
    InsensitiveObservable,
    InvalidSpec,
    NoRoot,
    PoorFit,
    VarianceUnresolved,
    ZeroDenominator,
)
from twinbeam.moment_engine import MomentTable, compute_moments, compute_moments_batch

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
CONSTRAINT_RTOL = 1e-9
REFINE_RTOL = 1e-6
MAX_SWEEPS = 6
SINGLE_GRID = 48
DOUBLE_Z_GRID = 24
SPLIT_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
PHASE_GRID = 64
MIN_FIT_PHOTONS = 100.0
MIN_R_SQUARED = 0.999
SPLIT_SCAN = np.linspace(0.05, 0.5, 10)
# a phase landscape flatter than this, relative to its floor, has no preferred phase
PHASE_FLAT_RTOL = 1e-9
PHASE_TIE_RTOL = 1e-3


@dataclass(frozen=True)
class ConstraintSolve:
    """Probe parameters resolved so that the absorber sees exactly n_T photons."""

    scenario: Scenario
    n_T: float
    r: float
    seed_split: float
    """Fraction of the seed amplitude budget in mode 1 (NaN without a seed)."""
    phases: Tuple[float, float, float]
    """(phi1, phi2, theta)"""
    resolved_alphas: Tuple[float, float]

    def config(self, eta: float = 1.0) -> ProbeConfig:
        phi1, phi2, theta = self.phases
        alpha1, alpha2 = self.resolved_alphas
        return ProbeConfig(alpha1, alpha2, phi1, phi2, self.r, theta, eta, self.scenario)

    @property
    def squeezed_photons(self) -> float:
        return 2 * math.sinh(self.r) ** 2

    @property
    def seeded_photons(self) -> float:
        return self.n_T - self.squeezed_photons


class LandscapeSample(NamedTuple):
    r: float
    seed_split: float
    phase: float
    """Relative phase theta - (phi1 + phi2)."""
    delta_eps_sq: float


@dataclass(frozen=True)
class OptimizationResult:
    scenario: Scenario
    observable: Observable
    n_T: float
    eta: float
    cfg_star: ProbeConfig
    budget: ErrorBudget
    seed_split: float
    objective_evaluations: int
    converged: bool
    landscape_samples: Optional[Tuple[LandscapeSample, ...]] = None

    @property
    def delta_eps_sq_star(self) -> float:
        return self.budget.delta_eps_sq

    @property
    def optimal_phases(self) -> Tuple[float, ...]:
        """The optimal relative phase and its mirror image, which is equally optimal."""
        phase = self.cfg_star.relative_phase
        return tuple(sorted({round(phase, 12), round((TWO_PI - phase) % TWO_PI, 12)}))

    @property
    def phase(self) -> float:
        return self.optimal_phases[0]

    @property
    def flags(self) -> str:
        flags = [self.budget.flags] if self.budget.flags else []
        if not self.converged:
            flags.append("nonconverged")
        return ";".join(flags)


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    """k in Delta eps^2 ~ C / n_T^k."""
    prefactor: float
    """C in Delta eps^2 ~ C / n_T^k."""
    r_squared: float
    n_T_range: Tuple[float, float]
    points: Tuple[Tuple[float, float], ...] = ()


@dataclass(frozen=True)
class PhaseLandscape:
    """Estimation error of a double-seeded probe along the relative phase."""

    samples: Tuple[LandscapeSample, ...]
    minima: Tuple[float, ...]
    """Every relative phase reaching the global minimum, in [0, 2 pi). Empty when flat."""
    minimum: float
    seed_split: float = 0.5
    flat: bool = False
    """True when the error does not depend on the relative phase."""


@dataclass(frozen=True)
class PhaseMap:
    thetas: np.ndarray
    seed_phases: np.ndarray
    values: np.ndarray
    """values[i, j] is the error at thetas[i] and seed_phases[j]."""
    seed_split: float = 0.5


def _check_budget(n_T: float):
    if not (math.isfinite(n_T) and n_T > 0):
        raise InvalidSpec(f"The photon budget must be positive and finite, got {n_T}")


def _default_split(scenario: Scenario) -> float:
    return {Scenario.VACUUM: math.nan, Scenario.SINGLE: 1.0, Scenario.DOUBLE: 0.5, Scenario.CLASSICAL: 0.5}[scenario]


def _verify(solve: ConstraintSolve, achieved: float) -> ConstraintSolve:
    if not math.isclose(achieved, solve.n_T, rel_tol=CONSTRAINT_RTOL):
        raise NoRoot(f"Resolved probe carries {achieved:.12g} photons instead of {solve.n_T:.12g}")
    return solve


def solve_constraint(
    scenario,
    n_T: float,
    r: Optional[float] = None,
    seed_split: Optional[float] = None,
    phases: Tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> ConstraintSolve:
    """
    Resolves the seed amplitudes so that the probe carries n_T photons at
    the absorber, as counted by the operator algebra.
    """
    scenario = Scenario(scenario)
    _check_budget(n_T)
    split = _default_split(scenario) if seed_split is None else float(seed_split)
    phases = tuple(float(p) for p in phases)

    if scenario is Scenario.VACUUM:
        r_vac = math.asinh(math.sqrt(n_T / 2))
        if r is not None and not math.isclose(2 * math.sinh(r) ** 2, n_T, rel_tol=CONSTRAINT_RTOL):
            raise Infeasible(f"A squeezed vacuum with r = {r} does not carry {n_T} photons")
        solve = ConstraintSolve(scenario, n_T, r_vac, math.nan, phases, (0.0, 0.0))
        return _verify(solve, total_photon_number(solve.config()))

    if scenario is Scenario.CLASSICAL:
        if r:
            raise InvalidSpec("A classical probe is not squeezed")
        if not 0.0 <= split <= 1.0:
            raise InvalidSpec(f"Seed split must lie in [0, 1], got {split}")
        alphas = (math.sqrt(n_T * split), math.sqrt(n_T * (1 - split)))
        solve = ConstraintSolve(scenario, n_T, 0.0, split, phases, alphas)
        return _verify(solve, total_photon_number(solve.config()))

    if r is None or r < 0 or not math.isfinite(r):
        raise InvalidSpec(f"A seeded probe needs a squeezing amplitude, got {r}")
    floor = 2 * math.sinh(r) ** 2
    if floor > n_T * (1 + CONSTRAINT_RTOL):
        raise Infeasible(f"Squeezing r = {r} alone carries {floor:.6g} > {n_T:.6g} photons")
    seeded = max(n_T - floor, 0.0)

    if scenario is Scenario.SINGLE:
        alpha1 = math.sqrt(seeded / math.cosh(2 * r))
        solve = ConstraintSolve(scenario, n_T, r, 1.0, phases, (alpha1, 0.0))
        return _verify(solve, total_photon_number(solve.config()))

    if not 0.0 <= split <= 1.0:
        raise InvalidSpec(f"Seed split must lie in [0, 1], got {split}")

    def probe(w: float) -> ConstraintSolve:
        return ConstraintSolve(scenario, n_T, r, split, phases, (math.sqrt(w * split), math.sqrt(w * (1 - split))))

    def excess(w: float) -> float:
        return total_photon_number(probe(w).config()) - n_T

    if seeded == 0.0:
        return _verify(probe(0.0), total_photon_number(probe(0.0).config()))
    # the seed photon number is at least w * exp(-2 r)
    upper = seeded * math.exp(2 * r) * (1 + 1e-6)
    low, high = excess(0.0), excess(upper)
    if low > 0 or high < 0:
        raise NoRoot(f"Cannot bracket the seed amplitude for n_T = {n_T} at r = {r}")
    w = sciopt.brentq(excess, 0.0, upper, xtol=1e-14 * upper, rtol=4 * np.finfo(float).eps)
    solve = probe(w)
    return _verify(solve, total_photon_number(solve.config()))


def _resolve_grid(
    scenario: Scenario, n_T: float, r: np.ndarray, split: np.ndarray, phase: np.ndarray, seed_phase=0.0
) -> List[ConstraintSolve]:
    """
    solve_constraint over a whole grid. The photon number is affine in the
    squared seed amplitude w, so two batched counts at w = 0 and w = 1 fix w.
    """
    r, split, phase, seed = (
        np.ravel(x) for x in np.broadcast_arrays(*(np.asarray(v, float) for v in (r, split, phase, seed_phase)))
    )
    if np.any(2 * np.sinh(r) ** 2 > n_T * (1 + CONSTRAINT_RTOL)):
        raise Infeasible(f"Part of the squeezing grid exceeds n_T = {n_T}")

    def probes(w):
        w = np.broadcast_to(w, r.shape)
        if scenario is Scenario.SINGLE:
            return [ProbeConfig(math.sqrt(wi), 0.0, si, 0.0, ri, di, 1.0, scenario) for wi, ri, di, si in zip(w, r, phase, seed)]
        return [
            ProbeConfig(math.sqrt(wi * fi), math.sqrt(wi * (1 - fi)), si, 0.0, ri, di, 1.0, scenario)
            for wi, fi, ri, di, si in zip(w, split, r, phase, seed)
        ]

    floor = total_photon_number_batch(probes(0.0))
    unit = total_photon_number_batch(probes(1.0))
    w = np.maximum((n_T - floor) / (unit - floor), 0.0)
    resolved = probes(w)
    achieved = total_photon_number_batch(resolved)
    if not np.allclose(achieved, n_T, rtol=CONSTRAINT_RTOL, atol=0.0):
        raise NoRoot(f"Batched seed solve missed n_T = {n_T} by {np.max(np.abs(achieved / n_T - 1)):.3g}")
    return [
        ConstraintSolve(scenario, n_T, c.r, float(f), (c.phi1, 0.0, c.theta), (c.alpha1, c.alpha2))
        for c, f in zip(resolved, split)
    ]


def _squeezing_for(n_T: float, z) -> np.ndarray:
    return np.arcsinh(np.sqrt(n_T * special.expit(-np.asarray(z, float)) / 2))


def _z_bounds(n_T: float) -> Tuple[float, float]:
    return math.log(1e-3 / n_T), math.log(n_T / 1e-3)


def _rank(b: Optional[ErrorBudget]) -> float:
    return math.inf if b is None else b.delta_eps_sq


def _scored(table: MomentTable, observable: Observable) -> Optional[ErrorBudget]:
    # probes where the observable is undefined or unresolved take no part in the search
    try:
        return budget(table, observable)
    except ZeroDenominator:
        return None
    except VarianceUnresolved as e:
        logger.debug("Skipping probe %s: %s", table.cfg_hash[:8], e)
        return None


def _score(cfgs: Sequence[ProbeConfig], observable: Observable) -> List[Optional[ErrorBudget]]:
    return [_scored(table, observable) for table in compute_moments_batch(cfgs)]


def _score_one(cfg: ProbeConfig, observable: Observable) -> Optional[ErrorBudget]:
    return _scored(compute_moments(cfg), observable)


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = REFINE_RTOL, max_iter: int = 200):
    """
    Golden section search for the minimum of f on [a, b].

    Returns (x, f(x), evaluations, converged). Stops once the two interior
    values agree to `tol` relative and the bracket is below sqrt(tol).
    """
    invphi = (math.sqrt(5) - 1) / 2
    c = b - (b - a) * invphi
    d = a + (b - a) * invphi
    fc, fd = f(c), f(d)
    evaluations = 2
    converged = False
    for _ in range(max_iter):
        flat = math.isfinite(fc) and math.isfinite(fd) and abs(fc - fd) <= tol * min(abs(fc), abs(fd))
        if flat and (b - a) <= math.sqrt(tol) * max(1.0, abs(a), abs(b)):
            converged = True
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * invphi
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * invphi
            fd = f(d)
        evaluations += 1
    if fc < fd:
        return c, fc, evaluations, converged
    return d, fd, evaluations, converged


def _fixed_probe(scenario: Scenario, observable: Observable, n_T: float, eta: float) -> OptimizationResult:
    solve = solve_constraint(scenario, n_T)
    cfg = solve.config(eta)
    b = budget(compute_moments(cfg), observable)
    return OptimizationResult(scenario, observable, n_T, eta, cfg, b, solve.seed_split, 1, True)


def _optimize_single(observable: Observable, n_T: float, eta: float, landscape: bool) -> OptimizationResult:
    zlo, zhi = _z_bounds(n_T)
    zs = np.linspace(zlo, zhi, SINGLE_GRID)
    solves = _resolve_grid(Scenario.SINGLE, n_T, _squeezing_for(n_T, zs), 1.0, 0.0)
    scored = _score([s.config(eta) for s in solves], observable)
    values = np.array([_rank(b) for b in scored])
    best = int(np.argmin(values))
    logger.debug("Single-seed grid minimum %.6g at z = %.4g", values[best], zs[best])

    cache = {}

    def objective(z: float) -> float:
        solve = solve_constraint(Scenario.SINGLE, n_T, float(_squeezing_for(n_T, z)))
        b = _score_one(solve.config(eta), observable)
        cache[z] = (solve, b)
        return _rank(b)

    step = zs[1] - zs[0]
    z, fz, evaluations, converged = golden_section(objective, max(zlo, zs[best] - step), min(zhi, zs[best] + step))
    star, star_budget = solves[best], scored[best]
    if fz < values[best]:
        star, star_budget = cache[z]
    samples = None
    if landscape:
        samples = tuple(LandscapeSample(s.r, 1.0, 0.0, v) for s, v in zip(solves, values))
    if star_budget is None:
        raise ZeroDenominator(f"{observable} is undefined everywhere on the single-seed grid")
    return OptimizationResult(
        Scenario.SINGLE, observable, n_T, eta, star.config(eta), star_budget, 1.0,
        len(solves) + evaluations, converged, samples,
    )


def _double_grid(observable: Observable, n_T: float, eta: float):
    """
    Errors on the z x split x phase grid. Exchanging the modes maps split f
    to 1 - f and conjugation maps the phase d to -d, so only the half-grid
    f <= 1/2, d <= pi is evaluated and the rest is mirrored.
    """
    zlo, zhi = _z_bounds(n_T)
    zs = np.linspace(zlo, zhi, DOUBLE_Z_GRID)
    phases = TWO_PI * np.arange(PHASE_GRID) / PHASE_GRID
    half_splits = [i for i, f in enumerate(SPLIT_GRID) if f <= 0.5]
    half_phases = np.arange(PHASE_GRID // 2 + 1)
    Z, F, D = np.meshgrid(zs, [SPLIT_GRID[i] for i in half_splits], phases[half_phases], indexing="ij")
    solves = _resolve_grid(Scenario.DOUBLE, n_T, _squeezing_for(n_T, Z), F, D)
    scored = _score([s.config(eta) for s in solves], observable)
    half = np.array([_rank(b) for b in scored]).reshape(Z.shape)

    grid = np.empty((len(zs), len(SPLIT_GRID), PHASE_GRID))
    for i, f in enumerate(SPLIT_GRID):
        src = half_splits.index(SPLIT_GRID.index(min(f, 1 - f)))
        for k in range(PHASE_GRID):
            grid[:, i, k] = half[:, src, min(k, PHASE_GRID - k)]
    return zs, phases, grid, solves, scored, half.shape


def _optimize_double(observable: Observable, n_T: float, eta: float, landscape: bool) -> OptimizationResult:
    zs, phases, grid, solves, scored, half_shape = _double_grid(observable, n_T, eta)
    flat_best = int(np.argmin([_rank(b) for b in scored]))
    i, j, k = np.unravel_index(flat_best, half_shape)
    star, star_budget = solves[flat_best], scored[flat_best]
    best_value = _rank(star_budget)
    evaluations = len(solves)
    logger.debug("Double-seed grid minimum %.6g at z = %.4g, split = %.3g, phase = %.4g",
                 best_value, zs[i], star.seed_split, star.phases[2])

    zlo, zhi = _z_bounds(n_T)
    point = {"z": float(zs[i]), "split": star.seed_split, "phase": star.phases[2]}
    steps = {"z": zs[1] - zs[0], "split": 0.25, "phase": TWO_PI / PHASE_GRID}
    limits = {"z": (zlo, zhi), "split": (0.0, 1.0), "phase": (-math.inf, math.inf)}

    def evaluate(trial):
        try:
            solve = solve_constraint(
                Scenario.DOUBLE, n_T, float(_squeezing_for(n_T, trial["z"])), trial["split"], (0.0, 0.0, trial["phase"])
            )
        except (Infeasible, NoRoot):
            return None, None
        return solve, _score_one(solve.config(eta), observable)

    converged = False
    for sweep in range(MAX_SWEEPS):
        before = best_value
        for name in ("z", "split", "phase"):
            lo = max(limits[name][0], point[name] - steps[name])
            hi = min(limits[name][1], point[name] + steps[name])
            found = {}

            def objective(x, name=name, found=found):
                solve, b = evaluate({**point, name: x})
                found[x] = (solve, b)
                return _rank(b)

            x, fx, used, _ = golden_section(objective, lo, hi)
            evaluations += used
            if fx < best_value:
                best_value = fx
                star, star_budget = found[x]
                point[name] = x
            steps[name] /= 2
        change = (before - best_value) / best_value if math.isfinite(best_value) and best_value > 0 else 0.0
        logger.debug("Sweep %d: %.10g (relative change %.3g)", sweep, best_value, change)
        if change < REFINE_RTOL:
            converged = True
            break
    if star_budget is None:
        raise ZeroDenominator(f"{observable} is undefined everywhere on the double-seed grid")

    samples = None
    if landscape:
        r_axis = _squeezing_for(n_T, zs)
        samples = tuple(
            LandscapeSample(float(r_axis[a]), SPLIT_GRID[b], float(phases[c]), float(grid[a, b, c]))
            for a in range(len(zs)) for b in range(len(SPLIT_GRID)) for c in range(PHASE_GRID)
        )
    return OptimizationResult(
        Scenario.DOUBLE, observable, n_T, eta, star.config(eta), star_budget, star.seed_split, evaluations, converged, samples
    )


def optimize(scenario, observable, n_T: float, eta: float = 1.0, landscape: bool = False) -> OptimizationResult:
    """
    Minimizes the estimation error at a fixed photon budget. Squeezed-vacuum
    and classical probes are fixed by n_T; seeded probes go through a coarse
    grid followed by golden section refinement.
    """
    scenario, observable = Scenario(scenario), Observable(observable)
    _check_budget(n_T)
    if not 0.0 < eta <= 1.0:
        raise InvalidSpec(f"Transmissivity must lie in (0, 1], got {eta}")
    logger.debug("Optimizing %s / %s at n_T = %g, eta = %g", scenario, observable, n_T, eta)
    if scenario in (Scenario.VACUUM, Scenario.CLASSICAL):
        return _fixed_probe(scenario, observable, n_T, eta)
    if scenario is Scenario.SINGLE:
        return _optimize_single(observable, n_T, eta, landscape)
    return _optimize_double(observable, n_T, eta, landscape)


def fit_power_law(n_T: Sequence[float], delta_eps_sq: Sequence[float]) -> ScalingFit:
    """Least-squares line through log Delta eps^2 against log n_T."""
    n_T = np.asarray(n_T, float)
    delta = np.asarray(delta_eps_sq, float)
    if not np.all(np.isfinite(delta)):
        raise InsensitiveObservable("Cannot fit a scaling law through infinite errors")
    n_T_range = (float(n_T.min()), float(n_T.max()))
    points = tuple(zip(n_T.tolist(), delta.tolist()))
    if not np.all(delta > 0):
        unfitted = ScalingFit(math.nan, math.nan, math.nan, n_T_range, points)
        raise PoorFit("Cannot fit a scaling law through errors that are not positive", fit=unfitted)
    fit = stats.linregress(np.log(n_T), np.log(delta))
    result = ScalingFit(
        exponent=-fit.slope,
        prefactor=math.exp(fit.intercept),
        r_squared=fit.rvalue ** 2,
        n_T_range=n_T_range,
        points=points,
    )
    if not result.r_squared >= MIN_R_SQUARED:
        raise PoorFit(f"Scaling fit has r^2 = {result.r_squared:.6f} < {MIN_R_SQUARED}", fit=result)
    return result


def check_scaling_grid(n_T_grid: Sequence[float]):
    grid = np.asarray(n_T_grid, float)
    if grid.size < 2 or np.any(grid < MIN_FIT_PHOTONS):
        raise InvalidSpec(f"Scaling fits need at least two photon budgets, all >= {MIN_FIT_PHOTONS:g}")
    if grid.max() / grid.min() < 100:
        raise InvalidSpec("Scaling fits need a photon budget grid spanning two decades")


def fit_scaling(scenario, observable, eta: float, n_T_grid: Sequence[float]) -> ScalingFit:
    check_scaling_grid(n_T_grid)
    results = [optimize(scenario, observable, float(n), eta) for n in n_T_grid]
    return fit_power_law([r.n_T for r in results], [r.delta_eps_sq_star for r in results])


def optimized_normalized_error(scenario, observable, n_T: float, eta: float) -> float:
    """The optimum at eta over the optimum without loss, each optimized separately."""
    lossy = optimize(scenario, observable, n_T, eta)
    lossless = optimize(scenario, observable, n_T, 1.0)
    if lossy.budget.insensitive or lossless.budget.insensitive:
        raise InsensitiveObservable(f"{observable} does not respond to the absorbance for {scenario} probes")
    return lossy.delta_eps_sq_star / lossless.delta_eps_sq_star


def _periodic_minima(values: np.ndarray) -> List[int]:
    left, right = np.roll(values, 1), np.roll(values, -1)
    return [int(i) for i in np.flatnonzero((values <= left) & (values <= right) & np.isfinite(values))]


def best_seed_split(observable, n_T: float, eta: float, r: float, points: int = PHASE_GRID) -> float:
    """
    The seed split with the lowest error at fixed squeezing, minimized over
    the relative phase. Exchanging the modes maps the split f to 1 - f, so
    the search runs over (0, 1/2].
    """
    observable = Observable(observable)
    phases = TWO_PI * np.arange(points) / points
    F, D = np.meshgrid(SPLIT_SCAN, phases, indexing="ij")
    solves = _resolve_grid(Scenario.DOUBLE, n_T, np.full(F.shape, r), F, D)
    values = np.array([_rank(b) for b in _score([s.config(eta) for s in solves], observable)]).reshape(F.shape)
    i, k = np.unravel_index(int(np.argmin(values)), values.shape)
    if not math.isfinite(values[i, k]):
        raise InsensitiveObservable(f"{observable} has no finite error at r = {r}")

    def objective(f: float) -> float:
        solve = solve_constraint(Scenario.DOUBLE, n_T, r, f, (0.0, 0.0, phases[k]))
        return _rank(_score_one(solve.config(eta), observable))

    step = SPLIT_SCAN[1] - SPLIT_SCAN[0]
    f, fx, _, _ = golden_section(objective, max(SPLIT_SCAN[0], SPLIT_SCAN[i] - step), min(0.5, SPLIT_SCAN[i] + step))
    split = f if fx < values[i, k] else float(SPLIT_SCAN[i])
    logger.debug("Best seed split for %s at r = %.4g: %.4g", observable, r, split)
    return split


def phase_landscape(
    observable,
    n_T: float,
    eta: float,
    r: float,
    seed_split: Optional[float] = None,
    points: int = PHASE_GRID,
    refine: bool = True,
) -> PhaseLandscape:
    """
    Double-seeded errors at fixed squeezing along the relative phase, with
    refined minima. Without a seed split, best_seed_split picks one.
    """
    observable = Observable(observable)
    if seed_split is None:
        seed_split = best_seed_split(observable, n_T, eta, r, points)
    phases = TWO_PI * np.arange(points) / points
    solves = _resolve_grid(Scenario.DOUBLE, n_T, np.full(points, r), seed_split, phases)
    values = np.array([_rank(b) for b in _score([s.config(eta) for s in solves], observable)])
    samples = tuple(LandscapeSample(r, seed_split, float(d), float(v)) for d, v in zip(phases, values))
    finite = values[np.isfinite(values)]
    if not finite.size:
        raise InsensitiveObservable(f"{observable} has no finite error along the phase axis")
    span = float(finite.max() - finite.min())
    if span <= PHASE_FLAT_RTOL * abs(float(finite.min())):
        logger.debug("%s is flat along the phase at seed split %.4g", observable, seed_split)
        return PhaseLandscape(samples, (), float(finite.min()), seed_split, flat=True)

    def objective(d: float) -> float:
        solve = solve_constraint(Scenario.DOUBLE, n_T, r, seed_split, (0.0, 0.0, d))
        return _rank(_score_one(solve.config(eta), observable))

    candidates = []
    for i in _periodic_minima(values):
        if refine:
            step = TWO_PI / points
            d, fd, _, _ = golden_section(objective, phases[i] - step, phases[i] + step)
            candidates.append((d % TWO_PI, min(fd, values[i])))
        else:
            candidates.append((float(phases[i]), float(values[i])))
    minimum = min(v for _, v in candidates)
    minima: List[float] = []
    for d, v in sorted(candidates):
        # ties are judged against the depth of the landscape, not its floor
        if v > minimum + PHASE_TIE_RTOL * span:
            continue
        # conjugation maps the relative phase d to -d at equal error
        for m in (d, (TWO_PI - d) % TWO_PI):
            if not any(_circular_gap(m, x) < 1e-4 for x in minima):
                minima.append(m)
    return PhaseLandscape(samples, tuple(sorted(minima)), minimum, seed_split)


def _circular_gap(a: float, b: float) -> float:
    gap = abs(a - b) % TWO_PI
    return min(gap, TWO_PI - gap)


def phase_map(
    observable, n_T: float, eta: float, r: float, seed_split: Optional[float] = None, points: int = PHASE_GRID
) -> PhaseMap:
    """Errors over the squeezing phase and the summed seed phase, carried by mode 1."""
    observable = Observable(observable)
    if seed_split is None:
        seed_split = best_seed_split(observable, n_T, eta, r, points)
    axis = TWO_PI * np.arange(points) / points
    thetas, seeds = np.meshgrid(axis, axis, indexing="ij")
    solves = _resolve_grid(Scenario.DOUBLE, n_T, r, seed_split, thetas, seed_phase=seeds)
    values = np.array([_rank(b) for b in _score([s.config(eta) for s in solves], observable)]).reshape(points, points)
    return PhaseMap(axis, axis.copy(), values, seed_split)


def squeezing_landscape(scenario, observable, n_T: float, eta: float = 1.0, points: int = SINGLE_GRID) -> Tuple[LandscapeSample, ...]:
    """
    Errors along the squeezing axis at fixed n_T. Double-seeded probes take
    the best split and phase of the optimizer grid at each squeezing.
    """
    scenario, observable = Scenario(scenario), Observable(observable)
    if scenario is Scenario.DOUBLE:
        zs, phases, grid, _, _, _ = _double_grid(observable, n_T, eta)
        r_axis = _squeezing_for(n_T, zs)
        out = []
        for a in range(len(zs)):
            b, c = np.unravel_index(int(np.argmin(grid[a])), grid[a].shape)
            out.append(LandscapeSample(float(r_axis[a]), SPLIT_GRID[b], float(phases[c]), float(grid[a, b, c])))
        return tuple(out)
    if scenario is not Scenario.SINGLE:
        result = optimize(scenario, observable, n_T, eta)
        cfg = result.cfg_star
        return (LandscapeSample(cfg.r, result.seed_split, 0.0, result.delta_eps_sq_star),)
    zs = np.linspace(*_z_bounds(n_T), points)
    solves = _resolve_grid(Scenario.SINGLE, n_T, _squeezing_for(n_T, zs), 1.0, 0.0)
    values = [_rank(b) for b in _score([s.config(eta) for s in solves], observable)]
    return tuple(LandscapeSample(s.r, 1.0, 0.0, v) for s, v in zip(solves, values))
