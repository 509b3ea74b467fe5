import math

import numpy as np
import pytest

from twinbeam.bosonic_algebra import EpsJet
from twinbeam.channel_model import ProbeConfig
from twinbeam.estimators import (
    SMALL_G11_LABELS,
    CovarianceMatrix,
    Observable,
    all_budgets,
    budget,
    classical_asymptote,
    g11_budget,
    normalized_error,
    nrf_budget,
    small_g11_budget,
    squeezed_vacuum_g11_error,
    squeezed_vacuum_nrf,
    squeezed_vacuum_small_g11_error,
)
from twinbeam.exceptions import InsensitiveObservable, InvalidSpec, VarianceUnresolved, ZeroDenominator
from twinbeam.moment_engine import MomentTable, TwinMoments, compute_moments

GRID_N_T = np.geomspace(0.5, 50, 5)
GRID_ETA = np.linspace(0.2, 1.0, 5)


def squeezed_vacuum(n_T, eta=1.0, theta=0.0):
    return ProbeConfig.squeezed_vacuum(math.asinh(math.sqrt(n_T / 2)), eta=eta, theta=theta)


def balanced_classical(n_T, eta=1.0):
    alpha = math.sqrt(n_T / 2)
    return ProbeConfig.classical(alpha, alpha, eta=eta)


class TestSqueezedVacuum:
    @pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0])
    @pytest.mark.parametrize("eta", [0.1, 0.5, 0.7, 1.0])
    def test_nrf_is_insensitive(self, r, eta):
        b = nrf_budget(compute_moments(ProbeConfig.squeezed_vacuum(r, eta=eta)))
        assert abs(b.value0 - squeezed_vacuum_nrf(eta)) <= 1e-10
        assert abs(b.dvalue) <= 1e-12
        assert b.insensitive
        assert b.delta_eps_sq == math.inf
        assert b.flags == "insensitive"

    @pytest.mark.parametrize("n_T", GRID_N_T)
    @pytest.mark.parametrize("eta", GRID_ETA)
    def test_g11_closed_form(self, n_T, eta):
        b = g11_budget(compute_moments(squeezed_vacuum(n_T, eta)))
        assert math.isclose(b.delta_eps_sq, squeezed_vacuum_g11_error(n_T, eta), rel_tol=1e-9)

    @pytest.mark.parametrize("n_T", GRID_N_T)
    @pytest.mark.parametrize("eta", GRID_ETA)
    def test_small_g11_closed_form(self, n_T, eta):
        b = small_g11_budget(compute_moments(squeezed_vacuum(n_T, eta)))
        assert math.isclose(b.delta_eps_sq, squeezed_vacuum_small_g11_error(n_T, eta), rel_tol=1e-9)

    def test_spot_values(self):
        m = compute_moments(squeezed_vacuum(2.0))
        assert math.isclose(g11_budget(m).delta_eps_sq, 132 / 1058, rel_tol=1e-9)
        assert math.isclose(small_g11_budget(m).delta_eps_sq, 0.72, rel_tol=1e-9)

    def test_large_budget_prefactors(self):
        n_T = 1e5
        m = compute_moments(squeezed_vacuum(n_T))
        assert math.isclose(g11_budget(m).delta_eps_sq * n_T ** 2, 5 / 9, rel_tol=0.01)
        assert math.isclose(small_g11_budget(m).delta_eps_sq * n_T ** 2, 1.0, rel_tol=0.01)

    def test_bunching(self):
        for r in (0.2, 0.9, 1.6):
            assert small_g11_budget(compute_moments(ProbeConfig.squeezed_vacuum(r))).value0 >= 1.0


class TestClassical:
    @pytest.mark.parametrize("eta", [0.5, 1.0])
    @pytest.mark.parametrize("observable", list(Observable))
    def test_asymptotes(self, eta, observable):
        n_T = 1e4
        b = budget(compute_moments(balanced_classical(n_T, eta)), observable)
        assert math.isclose(b.delta_eps_sq, classical_asymptote(observable, n_T, eta), rel_tol=0.01)

    def test_asymptote_constants(self):
        assert classical_asymptote("NRF", 10.0, 1.0) == 8 / 100
        assert classical_asymptote("G11", 10.0, 0.5) == 4 / 500
        assert classical_asymptote("g11", 10.0, 0.5) == 4 / 25

    def test_shot_noise(self):
        b = nrf_budget(compute_moments(balanced_classical(6.0)))
        assert math.isclose(b.value0, 1.0, rel_tol=1e-12)

    @pytest.mark.parametrize("alphas", [(1.0, 1.0), (2.0, 0.5), (0.3, 1.7)])
    def test_no_sub_shot_noise(self, alphas):
        m = compute_moments(ProbeConfig.classical(*alphas, eta=0.8))
        assert nrf_budget(m).value0 >= 1 - 1e-12
        assert small_g11_budget(m).value0 >= 1 - 1e-12


class TestBudgets:
    PROBE = ProbeConfig(alpha1=1.1, alpha2=0.4, phi1=0.2, phi2=0.9, r=0.5, theta=1.7, eta=0.8)

    def test_error_propagation_identity(self):
        for b in all_budgets(compute_moments(self.PROBE)).values():
            assert not b.insensitive
            assert b.variance >= 0
            assert math.isclose(b.variance, b.delta_eps_sq * b.dvalue ** 2, rel_tol=1e-12)

    def test_g11_variance(self):
        m = compute_moments(self.PROBE)
        assert math.isclose(g11_budget(m).variance, m.value0(2, 2) - m.value0(1, 1) ** 2)

    def test_dispatch(self):
        m = compute_moments(self.PROBE)
        assert budget(m, "g11") == small_g11_budget(m)
        assert budget(m, Observable.NRF) == nrf_budget(m)
        assert set(all_budgets(m)) == set(Observable)

    def test_covariance(self):
        m = compute_moments(self.PROBE)
        cov = CovarianceMatrix.from_moments(m, SMALL_G11_LABELS)
        assert np.allclose(cov.entries, cov.entries.T)
        assert np.all(np.diag(cov.entries) > 0)
        assert math.isclose(cov.entries[1, 1], m.value0(2, 0) - m.value0(1, 0) ** 2)

    def test_nrf_from_raw_table(self):
        m = compute_moments(self.PROBE)
        raw = nrf_budget(MomentTable(m.entries, m.cfg_hash))
        twin = nrf_budget(m)
        assert math.isclose(raw.value0, twin.value0, rel_tol=1e-9)
        assert math.isclose(raw.dvalue, twin.dvalue, rel_tol=1e-8)
        assert math.isclose(raw.variance, twin.variance, rel_tol=1e-7)

    def test_negative_variance_is_reported(self):
        twin = TwinMoments(EpsJet(0.0, 0.0), EpsJet(10.0, -5.0), EpsJet(4.0, 1.0), 1.0, 0.0, 10.0)
        with pytest.raises(VarianceUnresolved):
            nrf_budget(MomentTable({}, "", twin))

    @pytest.mark.parametrize("cfg", [ProbeConfig.squeezed_vacuum(0.6, eta=0.9), ProbeConfig.single_seeded(1.3, 0.4)])
    def test_squeezing_phase_independence(self, cfg):
        from dataclasses import replace

        base = all_budgets(compute_moments(cfg))
        turned = all_budgets(compute_moments(replace(cfg, theta=cfg.theta + 1.234)))
        for obs, b in base.items():
            if b.insensitive:
                assert turned[obs].insensitive
            else:
                assert math.isclose(b.delta_eps_sq, turned[obs].delta_eps_sq, rel_tol=1e-10)

    def test_vacuum_has_no_denominator(self):
        m = compute_moments(ProbeConfig.squeezed_vacuum(0.0))
        with pytest.raises(ZeroDenominator):
            nrf_budget(m)
        with pytest.raises(ZeroDenominator):
            small_g11_budget(m)

    def test_empty_mode(self):
        m = compute_moments(ProbeConfig.single_seeded(1.0, 0.0))
        with pytest.raises(ZeroDivisionError):
            small_g11_budget(m)


class TestBrightTwinBeams:
    @pytest.mark.parametrize("alpha1,r", [(3.0, 2.5), (10.0, 2.0), (3.0, 3.8)])
    def test_single_seeded_nrf(self, alpha1, r):
        # the seed sets the spread of n1 - n2 and absorption leaves it alone
        m = compute_moments(ProbeConfig.single_seeded(alpha1, r))
        total = m.value0(1, 0) + m.value0(0, 1)
        assert total > 700
        b = nrf_budget(m)
        assert math.isclose(b.value0, alpha1 ** 2 / total, rel_tol=1e-9)
        assert math.isclose(b.dvalue, 2 * alpha1 ** 2 * m.value0(1, 1) / total ** 2, rel_tol=1e-6)
        assert b.variance > 0
        assert 0 < b.delta_eps_sq < math.inf

    @pytest.mark.parametrize("n_T", [1e3, 1e4])
    def test_faint_seed_is_no_better_than_its_photons(self, n_T):
        alpha1 = 0.034
        m = compute_moments(ProbeConfig.single_seeded(alpha1, math.asinh(math.sqrt(n_T / 2))))
        scaled = nrf_budget(m).delta_eps_sq * n_T ** 2
        assert 0.5 / alpha1 ** 2 < scaled < 2 / alpha1 ** 2

    @pytest.mark.parametrize("eta", [0.5, 0.9])
    def test_lossy_variance_stays_positive(self, eta):
        m = compute_moments(ProbeConfig.single_seeded(5.0, 3.0, eta=eta))
        b = nrf_budget(m)
        assert b.variance > 0
        assert b.delta_eps_sq > 0


class TestNormalizedError:
    def test_unit_ratio(self):
        cfg = ProbeConfig.single_seeded(2.0, 0.5)
        assert normalized_error(cfg, cfg, Observable.G11) == 1.0

    def test_mismatched_probes(self):
        with pytest.raises(InvalidSpec):
            normalized_error(ProbeConfig.single_seeded(2.0, 0.5), ProbeConfig.single_seeded(2.0, 0.4), "NRF")

    def test_insensitive(self):
        cfg = ProbeConfig.squeezed_vacuum(0.5)
        with pytest.raises(InsensitiveObservable):
            normalized_error(cfg.with_eta(0.7), cfg, "NRF")
