import math

import numpy as np
import pytest

from twinbeam.bosonic_algebra import EpsJet, Mode, OperatorPoly, normal_order, vacuum_expectation
from twinbeam.channel_model import (
    ProbeConfig,
    Scenario,
    build_port_operators,
    build_port_operators_batch,
    expected_double_seed_photon_number,
    number_moment_monomial,
    photon_number_discrepancy,
    quoted_double_seed_photon_number,
    substituted_monomial,
    total_photon_number,
    total_photon_number_batch,
)
from twinbeam.exceptions import InvalidSpec


def same(p, q, tol=1e-12):
    diff = normal_order(p - q)
    return all(abs(c.value0) <= tol and abs(c.dvalue) <= tol for _, c in diff.items())


def moment(cfg, p, q) -> EpsJet:
    jet = vacuum_expectation(number_moment_monomial(build_port_operators(cfg), p, q))
    return EpsJet(float(np.real(jet.value0)), float(np.real(jet.dvalue)))


class TestProbeConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(alpha1=-1.0),
            dict(r=-0.1),
            dict(eta=1.5),
            dict(theta=math.inf),
            dict(alpha1=1.0, scenario=Scenario.VACUUM),
            dict(alpha2=1.0, scenario=Scenario.SINGLE),
            dict(r=0.3, scenario=Scenario.CLASSICAL),
            dict(scenario="entangled"),
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidSpec):
            ProbeConfig(**kwargs)

    def test_relative_phase_wraps(self):
        cfg = ProbeConfig(alpha1=1, alpha2=1, phi1=1.0, phi2=2.0, r=0.1, theta=0.5)
        assert math.isclose(cfg.relative_phase, 0.5 - 3.0 + 2 * math.pi)

    def test_digest_is_stable(self):
        a = ProbeConfig.single_seeded(1.2, 0.3)
        b = ProbeConfig.single_seeded(1.2, 0.3)
        assert a.digest() == b.digest()
        assert a.digest() != a.with_eta(0.5).digest()

    def test_exchanged(self):
        cfg = ProbeConfig(alpha1=1.0, alpha2=0.5, phi1=0.2, phi2=0.7, r=0.3)
        assert cfg.exchanged().exchanged() == cfg
        assert cfg.exchanged().alpha1 == 0.5


class TestPortOperators:
    def test_identity_channel(self):
        ports = build_port_operators(ProbeConfig())
        assert same(ports.d1.at_eps_zero(), OperatorPoly.op(Mode.V1))
        assert same(ports.d2.at_eps_zero(), OperatorPoly.op(Mode.V2))

    def test_single_seed_absorption_term(self):
        alpha = 1.3
        ports = build_port_operators(ProbeConfig(alpha1=alpha))
        v1, v2 = OperatorPoly.op(Mode.V1), OperatorPoly.op(Mode.V2)
        expected = (OperatorPoly.op(Mode.V2, True) * v2 * (v1 + alpha)).scale(-0.5)
        assert same(ports.d1.eps_part(), expected)

    def test_total_loss(self):
        ports = build_port_operators(ProbeConfig(r=0.4, alpha1=1.0, eta=0.0))
        assert same(ports.d1, OperatorPoly.op(Mode.U1))
        assert same(ports.d2, OperatorPoly.op(Mode.U2))

    def test_adjoints(self):
        ports = build_port_operators(ProbeConfig(alpha1=0.7, alpha2=0.2, phi1=0.3, r=0.25, theta=1.1, eta=0.8))
        assert same(ports.d1dag, ports.d1.dagger())
        assert same(ports.d2dag, ports.d2.dagger())

    def test_batch_matches_scalar(self):
        cfgs = [ProbeConfig(alpha1=0.5, r=0.2, theta=0.4), ProbeConfig(alpha2=1.0, r=0.1, eta=0.6)]
        batch = build_port_operators_batch(cfgs)
        for i, cfg in enumerate(cfgs):
            single = vacuum_expectation(normal_order(build_port_operators(cfg).d1dag * build_port_operators(cfg).d1))
            both = vacuum_expectation(normal_order(batch.d1dag * batch.d1))
            assert np.isclose(np.broadcast_to(both.value0, (2,))[i], single.value0)
            assert np.isclose(np.broadcast_to(both.dvalue, (2,))[i], single.dvalue)


class TestNumberMoments:
    def test_identity(self):
        ports = build_port_operators(ProbeConfig(alpha1=1.0, r=0.3))
        assert same(number_moment_monomial(ports, 0, 0), OperatorPoly.identity())

    def test_squeezed_vacuum_mean(self):
        r = 0.6
        assert math.isclose(moment(ProbeConfig.squeezed_vacuum(r), 1, 0).value0, math.sinh(r) ** 2)

    def test_classical_cross_moment(self):
        m = moment(ProbeConfig.classical(1.0, 1.0), 1, 1)
        assert math.isclose(m.value0, 1.0)
        # <n1 n2 (1 - n1 - n2)> for unit coherent seeds
        assert math.isclose(m.dvalue, -3.0)

    @pytest.mark.parametrize("p,q", [(1, 0), (0, 1)])
    def test_first_moments_match_substitution(self, p, q):
        ports = build_port_operators(ProbeConfig(alpha1=0.9, alpha2=0.4, phi2=0.5, r=0.3, theta=0.2, eta=0.7))
        a = vacuum_expectation(number_moment_monomial(ports, p, q))
        b = vacuum_expectation(substituted_monomial(ports, p, q))
        assert np.isclose(a.value0, b.value0)
        assert np.isclose(a.dvalue, b.dvalue)

    @pytest.mark.parametrize("p,q", [(5, 0), (2, 3), (-1, 0)])
    def test_rejects_orders(self, p, q):
        ports = build_port_operators(ProbeConfig())
        with pytest.raises(InvalidSpec):
            number_moment_monomial(ports, p, q)

    def test_loss_scales_means(self):
        cfg = ProbeConfig(alpha1=0.8, alpha2=0.3, phi1=0.1, r=0.35, theta=0.9)
        for p, q in [(1, 0), (0, 1)]:
            assert math.isclose(moment(cfg.with_eta(0.6), p, q).value0, 0.6 * moment(cfg, p, q).value0)

    def test_absorption_removes_photons(self, rng):
        for _ in range(5):
            cfg = ProbeConfig(
                alpha1=rng.uniform(0, 1.5),
                alpha2=rng.uniform(0, 1.5),
                phi1=rng.uniform(0, 6),
                r=rng.uniform(0, 0.6),
                theta=rng.uniform(0, 6),
                eta=rng.choice([1.0, 0.7]),
            )
            assert moment(cfg, 1, 0).dvalue + moment(cfg, 0, 1).dvalue <= 1e-12

    def test_adjoint_consistency(self):
        ports = build_port_operators(ProbeConfig(alpha1=1.1, phi1=2.0, r=0.2, theta=0.3))
        n1 = vacuum_expectation(normal_order(ports.d1dag * ports.d1)).value0
        assert abs(np.imag(n1)) < 1e-12
        assert np.real(n1) >= 0


class TestPhotonNumber:
    def test_squeezed_vacuum(self):
        r = 1.2
        assert math.isclose(total_photon_number(ProbeConfig.squeezed_vacuum(r)), 2 * math.sinh(r) ** 2)

    def test_single_seeded(self):
        alpha, r = 3.0, 0.7
        expected = alpha ** 2 * math.cosh(2 * r) + 2 * math.sinh(r) ** 2
        assert math.isclose(total_photon_number(ProbeConfig.single_seeded(alpha, r, theta=1.3)), expected)

    def test_double_seeded(self):
        cfg = ProbeConfig(alpha1=1.5, alpha2=0.5, phi1=0.3, phi2=0.4, r=0.8, theta=2.0)
        expected = expected_double_seed_photon_number(cfg.alpha1, cfg.alpha2, cfg.r, cfg.theta, cfg.seed_phase)
        assert math.isclose(total_photon_number(cfg), expected, rel_tol=1e-12)

    def test_quoted_expression_discrepancy(self):
        cfg = ProbeConfig(alpha1=1.0, alpha2=1.0)
        assert math.isclose(total_photon_number(cfg), 2.0)
        assert math.isclose(quoted_double_seed_photon_number(1.0, 1.0, 0.0, 0.0), 3.0)
        assert math.isclose(photon_number_discrepancy(cfg), 1.0)

    def test_batch(self):
        cfgs = [ProbeConfig.squeezed_vacuum(0.5), ProbeConfig.single_seeded(2.0, 0.1)]
        batch = total_photon_number_batch(cfgs)
        assert np.allclose(batch, [total_photon_number(c) for c in cfgs])
