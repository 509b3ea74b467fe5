"""
Date: October 19th, 2026

This file contains the three correlation observables (the noise reduction
factor, the intensity correlation G(1,1) and its normalized form g(1,1)) and
the error propagation that turns a moment table into the estimation error
of the absorbance,

    Delta eps^2 = Var(O) / (d<O>/d eps)^2,

with Var(O) = A M A^T for an observable that is a function of raw moments,
A its gradient and M the covariance of those moments. The noise reduction
factor is the exception: it is built from the centred moments of n1 - n2 and
n1 + n2 instead. Everything is taken at eps = 0.

"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from twinbeam.channel_model import ProbeConfig
from twinbeam.exceptions import InsensitiveObservable, InvalidSpec, VarianceUnresolved, ZeroDenominator
from twinbeam.moment_engine import MomentTable, compute_moments

logger = logging.getLogger(__name__)

# derivatives below this fraction of the chain-rule terms are roundoff
INSENSITIVITY_RTOL = 1e-10


class Observable(str, enum.Enum):
    NRF = "NRF"
    G11 = "G11"
    SMALL_G11 = "g11"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ErrorBudget:
    """Value, absorbance derivative, variance and estimation error of an observable."""

    observable: Observable
    value0: float
    """The observable at eps = 0."""
    dvalue: float
    """d<O>/d eps at eps = 0."""
    variance: float
    """Var(O) at eps = 0."""
    delta_eps_sq: float
    """The estimation error; +inf when the observable is insensitive."""
    insensitive: bool = False

    @property
    def flags(self) -> str:
        return "insensitive" if self.insensitive else ""


@dataclass(frozen=True)
class CovarianceMatrix:
    """Central co-moments <dx_i dx_j> of raw photon-number moments."""

    labels: Tuple[Tuple[int, int], ...]
    """The (p, q) exponents of each raw moment x_i = <n1^p n2^q>."""
    entries: np.ndarray

    @classmethod
    def from_moments(cls, m: MomentTable, labels: Sequence[Tuple[int, int]]) -> "CovarianceMatrix":
        labels = tuple(labels)
        size = len(labels)
        entries = np.empty((size, size))
        for i, (pi, qi) in enumerate(labels):
            for j, (pj, qj) in enumerate(labels[i:], start=i):
                c = m.value0(pi + pj, qi + qj) - m.value0(pi, qi) * m.value0(pj, qj)
                entries[i, j] = entries[j, i] = c
        return cls(labels, entries)

    def propagate(self, gradient: Sequence[float]) -> float:
        a = np.asarray(gradient, dtype=float)
        return float(a @ self.entries @ a)


SMALL_G11_LABELS = ((1, 1), (1, 0), (0, 1))


def _finish(observable: Observable, value0: float, terms: Sequence[float], variance: float, floor: float = 0.0) -> ErrorBudget:
    """
    Sums the chain-rule terms of d<O>/d eps and divides. `floor` is the
    smallest response the observable can resolve beyond its own terms.
    """
    dvalue = math.fsum(terms)
    scale = math.fsum(abs(t) for t in terms) + floor
    if dvalue == 0 or abs(dvalue) <= INSENSITIVITY_RTOL * scale:
        logger.debug("%s is insensitive: d<O>/d eps = %.3g against %.3g", observable, dvalue, scale)
        return ErrorBudget(observable, value0, 0.0, variance, math.inf, insensitive=True)
    if variance < 0:
        raise VarianceUnresolved(f"{observable} variance {variance:.3g} is negative at d<O>/d eps = {dvalue:.3g}")
    return ErrorBudget(observable, value0, dvalue, variance, variance / dvalue ** 2)


def nrf_budget(m: MomentTable) -> ErrorBudget:
    """
    The noise reduction factor Var(D) / <S>, with D = n1 - n2 and S = n1 + n2.

    Its variance is that of the linearized estimator
    (dD^2 - Var(D)) / <S> - Var(D) dS / <S>^2, built from the centred moments
    of D and S so that no large raw moments are subtracted.
    """
    t = m.twin_moments()
    total = float(t.mean_sum.value0)
    if not total > 0:
        raise ZeroDenominator("The noise reduction factor is undefined without photons")
    spread, dspread = float(t.var_diff.value0), float(t.var_diff.dvalue)
    dtotal = float(t.mean_sum.dvalue)
    value0 = spread / total
    variance = math.fsum(
        (
            (t.diff4 - spread ** 2) / total ** 2,
            -2 * spread * t.diff2_sum / total ** 3,
            spread ** 2 * t.var_sum / total ** 4,
        )
    )
    # measured in shot-noise units, so roundoff sits at |d<S>| / <S> even when Var(D) vanishes
    floor = abs(dtotal) / total
    return _finish(Observable.NRF, value0, (dspread / total, -value0 * dtotal / total), variance, floor)


def g11_budget(m: MomentTable) -> ErrorBudget:
    """The intensity correlation <n1 n2>; its variance needs no chain rule."""
    value0 = m.value0(1, 1)
    return _finish(Observable.G11, value0, (m.dvalue(1, 1),), m.value0(2, 2) - value0 ** 2)


def small_g11_budget(m: MomentTable) -> ErrorBudget:
    """The normalized correlation <n1 n2> / (<n1> <n2>)."""
    x3, x4, x5 = (m.value0(p, q) for p, q in SMALL_G11_LABELS)
    if not (x4 > 0 and x5 > 0):
        raise ZeroDenominator("g(1,1) is undefined when a mode carries no photons")
    gradient = (1 / (x4 * x5), -x3 / (x4 ** 2 * x5), -x3 / (x4 * x5 ** 2))
    terms = [a * m.dvalue(p, q) for a, (p, q) in zip(gradient, SMALL_G11_LABELS)]
    variance = CovarianceMatrix.from_moments(m, SMALL_G11_LABELS).propagate(gradient)
    return _finish(Observable.SMALL_G11, x3 / (x4 * x5), terms, variance)


_BUDGETS = {
    Observable.NRF: nrf_budget,
    Observable.G11: g11_budget,
    Observable.SMALL_G11: small_g11_budget,
}


def budget(m: MomentTable, observable: Observable) -> ErrorBudget:
    return _BUDGETS[Observable(observable)](m)


def all_budgets(m: MomentTable) -> Dict[Observable, ErrorBudget]:
    return {obs: fn(m) for obs, fn in _BUDGETS.items()}


def normalized_error(cfg_lossy: ProbeConfig, cfg_lossless: ProbeConfig, obs: Observable) -> float:
    """Ratio of the estimation errors of two probes that differ only in eta."""
    if cfg_lossy.with_eta(cfg_lossless.eta) != cfg_lossless:
        raise InvalidSpec("Probes for a normalized error may differ only in eta")
    lossy = budget(compute_moments(cfg_lossy), obs)
    lossless = budget(compute_moments(cfg_lossless), obs)
    if lossy.insensitive or lossless.insensitive:
        raise InsensitiveObservable(f"{obs} does not respond to the absorbance for this probe")
    return lossy.delta_eps_sq / lossless.delta_eps_sq


def squeezed_vacuum_nrf(eta):
    return 1 - eta


def squeezed_vacuum_g11_error(n_T, eta):
    """Closed-form G(1,1) estimation error of a squeezed-vacuum probe."""
    n, e = n_T, eta
    num = 2 + 5 * n ** 3 * e ** 2 + 2 * n ** 2 * e * (3 + 5 * e) + n * (2 + 8 * e + 3 * e ** 2)
    return num / (n * (1 + 5 * n + 3 * n ** 2) ** 2 * e ** 2)


def squeezed_vacuum_small_g11_error(n_T, eta):
    """Closed-form g(1,1) estimation error of a squeezed-vacuum probe."""
    n, e = n_T, eta
    num = 2 - 4 * e + 4 * e ** 2 + n ** 3 * e ** 2 + 2 * n ** 2 * e * (1 + e) + n * (2 + 3 * e ** 2)
    return num / (n * e ** 2 * (-1 + n + n ** 2) ** 2)


def classical_asymptote(observable: Observable, n_T, eta):
    """Leading large-n_T estimation error of a balanced coherent probe."""
    observable = Observable(observable)
    if observable is Observable.NRF:
        return 8 / (n_T ** 2 * eta ** 2)
    if observable is Observable.G11:
        return 4 / (n_T ** 3 * eta)
    return 4 / (n_T ** 2 * eta ** 2)
