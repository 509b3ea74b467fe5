"""
Date: October 19th, 2026

This file contains the probe description and the output-port operators of
the twin-beam channel. The ports are built by displacing the vacuum inputs,
squeezing them in the parametric amplifier, applying the first-order
two-photon absorption correction and finally the loss beam splitter.

"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from twinbeam.bosonic_algebra import (
    EpsJet,
    Mode,
    OperatorPoly,
    multiply,
    normal_order,
    substitute_displacement,
    vacuum_expectation,
)
from twinbeam.exceptions import InvalidSpec

logger = logging.getLogger(__name__)

MAX_MOMENT_ORDER = 4


class Scenario(str, enum.Enum):
    """How the parametric amplifier is seeded."""

    VACUUM = "vacuum"
    SINGLE = "single"
    DOUBLE = "double"
    CLASSICAL = "classical"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ProbeConfig:
    """
    A complete probe: coherent seeds, squeezing, and the loss of the
    detection channel.
    """

    alpha1: float = 0.0
    """Seed amplitude of mode 1."""
    alpha2: float = 0.0
    """Seed amplitude of mode 2."""
    phi1: float = 0.0
    """Seed phase of mode 1, in radians."""
    phi2: float = 0.0
    """Seed phase of mode 2, in radians."""
    r: float = 0.0
    """Squeezing amplitude."""
    theta: float = 0.0
    """Squeezing phase, in radians."""
    eta: float = 1.0
    """Transmissivity of both detection arms."""
    scenario: Scenario = Scenario.DOUBLE
    """The seeding scenario, which constrains the other fields."""

    def __post_init__(self):
        try:
            object.__setattr__(self, "scenario", Scenario(self.scenario))
        except ValueError as err:
            raise InvalidSpec(f"Unknown scenario {self.scenario!r}") from err
        for name in ("alpha1", "alpha2", "phi1", "phi2", "r", "theta", "eta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidSpec(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise InvalidSpec("Seed amplitudes must be non-negative")
        if self.r < 0:
            raise InvalidSpec("Squeezing amplitude must be non-negative")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidSpec(f"Transmissivity must lie in [0, 1], got {self.eta}")
        if self.scenario is Scenario.VACUUM and (self.alpha1 or self.alpha2):
            raise InvalidSpec("A squeezed-vacuum probe carries no seed")
        if self.scenario is Scenario.SINGLE and self.alpha2:
            raise InvalidSpec("A single-seeded probe has alpha2 = 0")
        if self.scenario is Scenario.CLASSICAL and self.r:
            raise InvalidSpec("A classical probe has r = 0")

    @classmethod
    def squeezed_vacuum(cls, r: float, eta: float = 1.0, theta: float = 0.0) -> "ProbeConfig":
        return cls(r=r, theta=theta, eta=eta, scenario=Scenario.VACUUM)

    @classmethod
    def single_seeded(cls, alpha1: float, r: float, eta: float = 1.0, phi1: float = 0.0, theta: float = 0.0) -> "ProbeConfig":
        return cls(alpha1=alpha1, phi1=phi1, r=r, theta=theta, eta=eta, scenario=Scenario.SINGLE)

    @classmethod
    def classical(cls, alpha1: float, alpha2: float, eta: float = 1.0, phi1: float = 0.0, phi2: float = 0.0) -> "ProbeConfig":
        return cls(alpha1=alpha1, alpha2=alpha2, phi1=phi1, phi2=phi2, eta=eta, scenario=Scenario.CLASSICAL)

    @property
    def seed_phase(self) -> float:
        """The summed seed phase phi1 + phi2."""
        return self.phi1 + self.phi2

    @property
    def relative_phase(self) -> float:
        """theta minus the summed seed phase, wrapped to [0, 2 pi)."""
        return (self.theta - self.seed_phase) % (2 * math.pi)

    def with_eta(self, eta: float) -> "ProbeConfig":
        return dataclasses.replace(self, eta=eta)

    def exchanged(self) -> "ProbeConfig":
        """The same probe with the two modes swapped."""
        return dataclasses.replace(self, alpha1=self.alpha2, alpha2=self.alpha1, phi1=self.phi2, phi2=self.phi1)

    def digest(self) -> str:
        payload = ",".join(
            [self.scenario.value] + [float(getattr(self, f)).hex() for f in ("alpha1", "alpha2", "phi1", "phi2", "r", "theta", "eta")]
        )
        return hashlib.sha1(payload.encode()).hexdigest()


class PortOperators(NamedTuple):
    """The detected port operators expressed in the vacuum input and bath modes."""

    d1: OperatorPoly
    d2: OperatorPoly
    d1dag: OperatorPoly
    d2dag: OperatorPoly
    pair_jump: OperatorPoly
    """The two-photon jump operator b1 b2, at the absorber."""

    def number_operators(self) -> Tuple[OperatorPoly, OperatorPoly]:
        """The detected photon numbers with the absorption switched off."""
        n1 = normal_order(multiply(self.d1dag.at_eps_zero(), self.d1.at_eps_zero()))
        n2 = normal_order(multiply(self.d2dag.at_eps_zero(), self.d2.at_eps_zero()))
        return n1, n2


class AbsorberFields(NamedTuple):
    """The squeezed fields b1, b2 reaching the absorber, in the vacuum input modes."""

    b1: OperatorPoly
    b2: OperatorPoly


_PROBE_FIELDS = ("alpha1", "alpha2", "phi1", "phi2", "r", "theta", "eta")


def _stack(cfgs: Sequence[ProbeConfig]) -> Tuple[np.ndarray, ...]:
    if not cfgs:
        raise InvalidSpec("Cannot build operators for an empty batch")
    return tuple(np.array([getattr(c, f) for c in cfgs], dtype=float) for f in _PROBE_FIELDS)


def _amplifier(alpha1, alpha2, phi1, phi2, r, theta) -> AbsorberFields:
    # Accepts scalars or equally shaped arrays; arrays give batched coefficients.
    a1 = substitute_displacement(OperatorPoly.op(Mode.V1), Mode.V1, alpha1, phi1)
    a2 = substitute_displacement(OperatorPoly.op(Mode.V2), Mode.V2, alpha2, phi2)
    ch, sh = np.cosh(r), np.sinh(r)
    rot = np.exp(1j * np.asarray(theta)) * sh
    return AbsorberFields(a1 * ch + a2.dagger() * rot, a2 * ch + a1.dagger() * rot)


def build_absorber_fields(cfg: ProbeConfig) -> AbsorberFields:
    return _amplifier(cfg.alpha1, cfg.alpha2, cfg.phi1, cfg.phi2, cfg.r, cfg.theta)


def build_absorber_fields_batch(cfgs: Sequence[ProbeConfig]) -> AbsorberFields:
    return _amplifier(*_stack(cfgs)[:-1])


def _ports(alpha1, alpha2, phi1, phi2, r, theta, eta) -> PortOperators:
    b1, b2 = _amplifier(alpha1, alpha2, phi1, phi2, r, theta)

    half_eps = EpsJet.eps(-0.5)
    c1 = b1 + normal_order(multiply(multiply(b2.dagger(), b2), b1)) * half_eps
    c2 = b2 + normal_order(multiply(multiply(b1.dagger(), b1), b2)) * half_eps

    t = np.sqrt(eta)
    leak = np.sqrt(1.0 - np.asarray(eta))
    d1 = c1 * t + OperatorPoly.op(Mode.U1) * leak
    d2 = c2 * t + OperatorPoly.op(Mode.U2) * leak
    jump = normal_order(multiply(b1, b2))
    return PortOperators(d1, d2, d1.dagger(), d2.dagger(), jump)


def build_port_operators(cfg: ProbeConfig) -> PortOperators:
    return _ports(cfg.alpha1, cfg.alpha2, cfg.phi1, cfg.phi2, cfg.r, cfg.theta, cfg.eta)


def build_port_operators_batch(cfgs: Sequence[ProbeConfig]) -> PortOperators:
    """Ports for many probes at once, with numpy array coefficients."""
    return _ports(*_stack(cfgs))


def _check_order(p: int, q: int):
    if p < 0 or q < 0:
        raise InvalidSpec(f"Moment orders must be non-negative, got ({p}, {q})")
    if p + q > MAX_MOMENT_ORDER:
        raise InvalidSpec(f"Moment order {p + q} exceeds {MAX_MOMENT_ORDER}")


def _power_product(n1: OperatorPoly, n2: OperatorPoly, p: int, q: int) -> OperatorPoly:
    out = OperatorPoly.identity()
    for factor in [n1] * p + [n2] * q:
        out = normal_order(multiply(out, factor))
    return out


def substituted_monomial(ports: PortOperators, p: int, q: int) -> OperatorPoly:
    """
    (d1† d1)^p (d2† d2)^q with the eps-carrying ports substituted directly.
    Exact to first order only for p + q = 1.
    """
    _check_order(p, q)
    n1 = normal_order(multiply(ports.d1dag, ports.d1))
    n2 = normal_order(multiply(ports.d2dag, ports.d2))
    return _power_product(n1, n2, p, q)


def number_moment_monomial(ports: PortOperators, p: int, q: int) -> OperatorPoly:
    """
    The detected monomial n1^p n2^q evolved through the absorber to first
    order in eps: O + eps (J† O J - (J† J O + O J† J) / 2).
    """
    _check_order(p, q)
    n1, n2 = ports.number_operators()
    bare = _power_product(n1, n2, p, q)
    if p == q == 0:
        return bare
    jump = ports.pair_jump
    jdag = jump.dagger()
    jj = normal_order(multiply(jdag, jump))
    sandwich = normal_order(multiply(multiply(jdag, bare), jump))
    anti = normal_order(multiply(jj, bare)) + normal_order(multiply(bare, jj))
    return bare + (sandwich - anti * 0.5).scale(EpsJet.eps())


def total_photon_number(cfg: ProbeConfig) -> float:
    """The mean photon number reaching the absorber, <b1† b1 + b2† b2>."""
    return float(_photon_number(build_absorber_fields(cfg)))


def total_photon_number_batch(cfgs: Sequence[ProbeConfig]) -> np.ndarray:
    return np.broadcast_to(_photon_number(build_absorber_fields_batch(cfgs)), (len(cfgs),)).astype(float)


def _photon_number(fields: AbsorberFields):
    b1, b2 = fields
    total = multiply(b1.dagger(), b1) + multiply(b2.dagger(), b2)
    return np.real(vacuum_expectation(total).value0)


def expected_double_seed_photon_number(alpha1, alpha2, r, theta, seed_phase=0.0):
    """Photon number of a double-seeded probe as the operator algebra gives it."""
    return (
        (alpha1 ** 2 + alpha2 ** 2) * np.cosh(2 * r)
        + 2 * alpha1 * alpha2 * np.cos(theta - seed_phase) * np.sinh(2 * r)
        + 2 * np.sinh(r) ** 2
    )


def quoted_double_seed_photon_number(alpha1, alpha2, r, theta):
    """The double-seeding photon number as commonly quoted in the literature."""
    return (
        alpha1 ** 2
        - alpha2 ** 2
        + (1 + alpha1 ** 2 + alpha2 ** 2) * np.cosh(2 * r)
        + 2 * alpha1 * alpha2 * np.cos(theta) * np.sinh(2 * r)
        + 2 * np.sinh(r) ** 2
    )


def photon_number_discrepancy(cfg: ProbeConfig) -> float:
    """Quoted minus algebraic photon number for the probe."""
    algebra = float(total_photon_number(cfg))
    quoted = float(quoted_double_seed_photon_number(cfg.alpha1, cfg.alpha2, cfg.r, cfg.theta))
    if not math.isclose(algebra, quoted, rel_tol=1e-9, abs_tol=1e-12):
        logger.debug("Quoted double-seed photon number %.6g differs from algebra %.6g", quoted, algebra)
    return quoted - algebra
