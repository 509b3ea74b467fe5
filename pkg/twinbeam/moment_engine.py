"""
Date: October 19th, 2026

This file contains the moment engine, which turns a probe configuration into
the table of joint photon-number moments <n1^p n2^q>, p + q <= 4, together
with their first derivatives in the absorbance.

Moments are evolved through the absorber in the Heisenberg picture. For the
jump operator J = b1 b2, the adjoint dissipator acts on the factorial
moments F(k, l) = <b1†^k b2†^l b1^k b2^l> in closed form,

    dF(k, l)/d eps = -(l F(k+1, l) + k F(k, l+1) + k l F(k, l)),

and the detection loss thins them, F -> eta^(k+l) F. Raw moments follow
from Stirling numbers of the second kind. The factorial moments at eps = 0
are vacuum expectations taken by sweeping a bra through shared prefixes.

The photon-number difference D = n1 - n2 of a twin beam is nearly sharp
while n1 and n2 are broad, so the centred moments of D and S = n1 + n2 are
taken on their own, in the algebra, from the detected ports.

"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from twinbeam.bosonic_algebra import EpsJet, OperatorPoly, VacuumBra, multiply, normal_order
from twinbeam.channel_model import (
    MAX_MOMENT_ORDER,
    AbsorberFields,
    PortOperators,
    ProbeConfig,
    build_absorber_fields,
    build_absorber_fields_batch,
    build_port_operators,
    build_port_operators_batch,
)

logger = logging.getLogger(__name__)

ORDERS: Tuple[Tuple[int, int], ...] = tuple(
    (p, q) for p in range(MAX_MOMENT_ORDER + 1) for q in range(MAX_MOMENT_ORDER + 1 - p)
)

DEFAULT_CHUNK = 512


@dataclass(frozen=True)
class TwinMoments:
    """
    Moments of the difference D = n1 - n2 and the sum S = n1 + n2 of the
    detected photon numbers, with dD = D - <D> and dS = S - <S>.
    """

    mean_diff: EpsJet
    """<D>"""
    mean_sum: EpsJet
    """<S>"""
    var_diff: EpsJet
    """<dD^2>. Its eps part is d<D^2>/d eps - 2 <D> d<D>/d eps."""
    diff4: float
    """<dD^4>"""
    diff2_sum: float
    """<dD^2 dS>"""
    var_sum: float
    """<dS^2>"""

    def exchanged(self) -> "TwinMoments":
        return TwinMoments(-self.mean_diff, self.mean_sum, self.var_diff, self.diff4, self.diff2_sum, self.var_sum)

    @classmethod
    def from_table(cls, m: "MomentTable") -> "TwinMoments":
        """
        The same moments recovered from the raw table. Differences of large
        raw moments lose every digit once the beams carry many photons, so
        this is only meant for small tables such as the oracle's.
        """
        n1, n2 = m.entry(1, 0), m.entry(0, 1)
        mean_diff = n1 - n2
        second = m.entry(2, 0) + m.entry(0, 2) - m.entry(1, 1) * 2.0
        mu1, mu2 = m.value0(1, 0), m.value0(0, 1)

        def central(a: int, b: int) -> float:
            return math.fsum(
                math.comb(a, i) * math.comb(b, j) * (-mu1) ** (a - i) * (-mu2) ** (b - j) * m.value0(i, j)
                for i in range(a + 1) for j in range(b + 1)
            )

        c = {(a, b): central(a, b) for a in range(5) for b in range(5 - a) if a + b >= 2}
        return cls(
            mean_diff=mean_diff,
            mean_sum=n1 + n2,
            var_diff=second - mean_diff * mean_diff,
            diff4=c[4, 0] - 4 * c[3, 1] + 6 * c[2, 2] - 4 * c[1, 3] + c[0, 4],
            diff2_sum=c[3, 0] - c[2, 1] - c[1, 2] + c[0, 3],
            var_sum=c[2, 0] + 2 * c[1, 1] + c[0, 2],
        )


@dataclass(frozen=True)
class MomentTable:
    """Joint photon-number moments of the two detected modes, as eps-jets."""

    entries: Dict[Tuple[int, int], EpsJet] = field(repr=False)
    """Map from (p, q) to <n1^p n2^q>."""
    cfg_hash: str = ""
    """Digest of the generating probe configuration."""
    twin: Optional[TwinMoments] = field(default=None, repr=False)
    """Centred difference and sum moments, when the engine produced the table."""

    def __getitem__(self, key: Tuple[int, int]) -> EpsJet:
        return self.entries[key]

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(ORDERS)

    def entry(self, p: int, q: int) -> EpsJet:
        return self.entries[(p, q)]

    def value0(self, p: int, q: int) -> float:
        return float(self.entries[(p, q)].value0)

    def dvalue(self, p: int, q: int) -> float:
        return float(self.entries[(p, q)].dvalue)

    def exchanged(self) -> "MomentTable":
        """The table with the two modes relabelled."""
        twin = self.twin.exchanged() if self.twin is not None else None
        return MomentTable({(q, p): v for (p, q), v in self.entries.items()}, self.cfg_hash, twin)

    def twin_moments(self) -> TwinMoments:
        return self.twin if self.twin is not None else TwinMoments.from_table(self)

    def as_rows(self) -> List[Tuple[int, int, float, float]]:
        return [(p, q, self.value0(p, q), self.dvalue(p, q)) for p, q in ORDERS]


@functools.lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    return int(special.stirling2(n, k, exact=True))


def factorial_moments(fields: AbsorberFields) -> Dict[Tuple[int, int], np.ndarray]:
    """F(k, l) at eps = 0 for k + l <= MAX_MOMENT_ORDER + 1."""
    b1, b2 = fields
    b1d, b2d = b1.dagger(), b2.dagger()
    top = MAX_MOMENT_ORDER + 1
    out = {}
    creators = VacuumBra()
    for k in range(top + 1):
        if k:
            creators = creators.apply(b1d)
        bra = creators
        for l in range(top + 1 - k):
            if l:
                bra = bra.apply(b2d)
            closed = bra
            for factor in [b1] * k + [b2] * l:
                closed = closed.apply(factor)
            out[(k, l)] = np.real(closed.value().value0)
    return out


def _absorbed(F: Dict[Tuple[int, int], np.ndarray]) -> Dict[Tuple[int, int], EpsJet]:
    jets = {}
    for k, l in ORDERS:
        drift = l * F[(k + 1, l)] + k * F[(k, l + 1)] + k * l * F[(k, l)]
        jets[(k, l)] = EpsJet(F[(k, l)], -drift)
    return jets


def _detected(jets: Dict[Tuple[int, int], EpsJet], eta) -> Dict[Tuple[int, int], EpsJet]:
    out = {}
    for p, q in ORDERS:
        total = EpsJet(0.0, 0.0)
        for k in range(p + 1):
            for l in range(q + 1):
                weight = stirling2(p, k) * stirling2(q, l)
                if weight:
                    total = total + jets[(k, l)] * (weight * np.power(eta, k + l))
        out[(p, q)] = total
    out[(0, 0)] = EpsJet(1.0, 0.0)
    return out


@functools.lru_cache(maxsize=4096)
def _lossless_jets(cfg: ProbeConfig) -> Dict[Tuple[int, int], EpsJet]:
    return _absorbed(factorial_moments(build_absorber_fields(cfg.with_eta(1.0))))


def _centred(p: OperatorPoly) -> OperatorPoly:
    # the identity coefficient of a normal-ordered operator is its vacuum mean
    return OperatorPoly({w: c for w, c in p.items() if w}, canonical=True)


def twin_moments(ports: PortOperators) -> TwinMoments:
    """
    Centred moments of D and S from the detected ports. D and S are formed as
    operators before any expectation is taken, and their responses use the
    same Heisenberg walk as port_moments. Coefficients may be arrays.
    """
    n1, n2 = ports.number_operators()
    diff, total = n1 - n2, n1 + n2
    dd, ds = _centred(diff), _centred(total)
    jump = ports.pair_jump
    jdag = jump.dagger()
    jj = normal_order(multiply(jdag, jump))

    def response(sandwich: VacuumBra, anti: VacuumBra):
        return np.real(sandwich.apply(jump).value().value0) - np.real(anti.value().value0)

    def closed(bra: VacuumBra):
        return np.real(bra.value().value0)

    left, both = VacuumBra().apply(jdag), VacuumBra().apply(jj)
    left_d, both_d = left.apply(dd), both.apply(dd)
    squared = VacuumBra().apply(dd).apply(dd)
    return TwinMoments(
        mean_diff=EpsJet(np.real(diff.constant.value0), response(left_d, both_d)),
        mean_sum=EpsJet(np.real(total.constant.value0), response(left.apply(ds), both.apply(ds))),
        var_diff=EpsJet(closed(squared), response(left_d.apply(dd), both_d.apply(dd))),
        diff4=closed(squared.apply(dd).apply(dd)),
        diff2_sum=closed(squared.apply(ds)),
        var_sum=closed(VacuumBra().apply(ds).apply(ds)),
    )


def _pick(t: TwinMoments, i: int, size: int) -> TwinMoments:
    def num(x) -> float:
        return float(np.broadcast_to(x, (size,))[i])

    def jet(j: EpsJet) -> EpsJet:
        return EpsJet(num(j.value0), num(j.dvalue))

    return TwinMoments(jet(t.mean_diff), jet(t.mean_sum), jet(t.var_diff), num(t.diff4), num(t.diff2_sum), num(t.var_sum))


@functools.lru_cache(maxsize=4096)
def _twin(cfg: ProbeConfig) -> TwinMoments:
    return _pick(twin_moments(build_port_operators(cfg)), 0, 1)


def compute_moments(cfg: ProbeConfig) -> MomentTable:
    """The moment table of a single probe. Lossless factorial moments are memoized."""
    entries = _detected(_lossless_jets(cfg.with_eta(1.0)), cfg.eta)
    table = {k: EpsJet(float(v.value0), float(v.dvalue)) for k, v in entries.items()}
    return MomentTable(table, cfg.digest(), _twin(cfg))


def compute_moments_batch(cfgs: Sequence[ProbeConfig], chunk: int = DEFAULT_CHUNK) -> List[MomentTable]:
    """
    Moment tables for many probes. Each chunk shares one symbolic pass, with
    the probe parameters carried as numpy arrays in the coefficients.
    """
    cfgs = list(cfgs)
    tables: List[MomentTable] = []
    for start in range(0, len(cfgs), chunk):
        block = cfgs[start:start + chunk]
        logger.debug("Evaluating moments for probes %d to %d", start, start + len(block))
        size = len(block)
        eta = np.array([c.eta for c in block])
        jets = _detected(_absorbed(factorial_moments(build_absorber_fields_batch(block))), eta)
        twin = twin_moments(build_port_operators_batch(block))
        value0 = {k: np.broadcast_to(v.value0, (size,)) for k, v in jets.items()}
        dvalue = {k: np.broadcast_to(v.dvalue, (size,)) for k, v in jets.items()}
        for i, cfg in enumerate(block):
            entries = {k: EpsJet(float(value0[k][i]), float(dvalue[k][i])) for k in jets}
            tables.append(MomentTable(entries, cfg.digest(), _pick(twin, i, size)))
    return tables


def port_moments(ports: PortOperators) -> Dict[Tuple[int, int], EpsJet]:
    """
    The same moment jets taken directly from the detected ports, as
    <O> + eps (<J† O J> - Re <J† J O>) with O = n1^p n2^q. Slower, but shares
    nothing with the factorial route beyond the ports themselves.
    """
    n1, n2 = ports.number_operators()
    jump = ports.pair_jump
    jdag = jump.dagger()
    jj = normal_order(multiply(jdag, jump))

    # three bras share every prefix: <0|, <0|J† and <0|J†J
    column = (VacuumBra(), VacuumBra().apply(jdag), VacuumBra().apply(jj))
    out: Dict[Tuple[int, int], EpsJet] = {}
    for p in range(MAX_MOMENT_ORDER + 1):
        if p:
            column = tuple(b.apply(n1) for b in column)
        row = column
        for q in range(MAX_MOMENT_ORDER + 1 - p):
            if q:
                row = tuple(b.apply(n2) for b in row)
            plain, left, both = row
            sandwich = left.apply(jump).value().value0
            anti = both.value().value0
            out[(p, q)] = EpsJet(np.real(plain.value().value0), np.real(sandwich) - np.real(anti))
    out[(0, 0)] = EpsJet(1.0, 0.0)
    return out
