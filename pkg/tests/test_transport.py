"""Cone focusing integration, slab model, and trapped classification."""

import math

import numpy as np
import pytest

from horizonlab.errors import FocusingError, SlabDomainError
from horizonlab.regime import derive
from horizonlab.transport import (INDETERMINATE, TRAPPED_CERTIFIED,
                                  UNTRAPPED, SlabModel, detect_trapped,
                                  integrate_cone, integrate_data_cone,
                                  model_trchi, slab_bounds)


class FakeProfile:
    """Duck-typed stand-in: constant cumulative shear on the default grid."""

    def __init__(self, params, grid, I_const):
        self.params = params
        self.grid = grid
        self.derived = derive(params)
        self._I = I_const

    def I_at(self, ubar):
        return np.full((self.grid.n_theta, self.grid.n_phi), self._I)


def zero_amp(u):
    return 0.0


class TestRiccati:
    def test_zero_shear_closed_form(self, grid_small):
        state = integrate_cone(zero_amp, 1.0, 512, grid_small)
        exact = 2.0 / (1.0 + state.ubar_nodes)
        err = np.max(np.abs(state.trchi[:, 0, 0] - exact))
        assert err < 1e-10

    def test_fourth_order_convergence(self, grid_small):
        errs = []
        for n in (256, 512):
            state = integrate_cone(zero_amp, 1.0, n, grid_small)
            errs.append(abs(state.trchi_final[0, 0] - 1.0))
        ratio = errs[0] / errs[1]
        assert 12.0 < ratio < 20.0

    def test_step_error_estimate_reported(self, grid_small):
        state = integrate_cone(zero_amp, 1.0, 512, grid_small)
        assert 0.0 < state.step_error < 1e-9

    def test_default_profile_perturbative(self, profile_mid):
        # At these scales trchi(delta) = 2 - I(delta, omega) to within the
        # integrator's quadrature error (the Riccati self-interaction is
        # below float resolution).
        state = integrate_data_cone(profile_mid, n_steps=2048, n_store=65)
        d = profile_mid.derived
        k = int(np.argmin(np.abs(state.ubar_nodes - d.delta)))
        assert state.ubar_nodes[k] == pytest.approx(d.delta, rel=1e-12)
        expected = 2.0 - profile_mid.I_at(float(state.ubar_nodes[k]))
        err = np.max(np.abs(state.trchi[k] - expected))
        assert err < 1e-5 * 4 * profile_mid.m0

    def test_model_matches_integrator_at_cone(self, profile_mid):
        # At u = 1 the slab leading term 2 - I(ubar, .) must agree with
        # the integrated cone uniformly in omega to O(delta).
        state = integrate_data_cone(profile_mid, n_steps=1024, n_store=33)
        slab = SlabModel(profile_mid.params, profile_mid)
        d = profile_mid.derived
        worst = 0.0
        for k, ub in enumerate(state.ubar_nodes):
            if ub > d.delta:
                continue
            lead, _ = model_trchi(slab, 1.0, float(ub))
            worst = max(worst, float(np.max(np.abs(state.trchi[k]
                                                   - lead.values))))
        assert worst < 1e-5 * 4 * profile_mid.m0

    def test_monotone_focusing(self, grid_small):
        weak = integrate_cone(lambda u: 0.5, 1.0, 256, grid_small)
        strong = integrate_cone(lambda u: 1.0, 1.0, 256, grid_small)
        assert np.all(strong.trchi_final < weak.trchi_final)

    def test_blowup_detected(self, grid_small):
        with pytest.raises(FocusingError) as err:
            integrate_cone(lambda u: 50.0, 1.0, 2048, grid_small)
        assert 0.0 < err.value.ubar <= 1.0


class TestSlabModel:
    def test_zero_shear_leading(self, params, grid_small):
        prof = FakeProfile(params, grid_small, 0.0)
        slab = SlabModel(params, prof)
        lead, env = model_trchi(slab, 0.5, 0.0)
        assert np.all(lead.values == pytest.approx(4.0))
        assert env == 0.0

    def test_uniform_shear_flips_sign(self, params, grid_small):
        # I = 4 a^(1/2) b delta at u = a^(1/2) b delta: leading = -2/u.
        d = derive(params)
        u = d.u_trapped
        prof = FakeProfile(params, grid_small, 4.0 * u)
        slab = SlabModel(params, prof)
        lead, _ = model_trchi(slab, u, 0.5 * d.delta)
        assert np.max(np.abs(lead.values + 2.0 / u)) < 1e-12 * 2.0 / u

    def test_envelope_value(self, params, grid_small):
        d = derive(params)
        prof = FakeProfile(params, grid_small, 0.0)
        slab = SlabModel(params, prof)
        u = d.u_trapped
        env = slab.envelope(u, d.delta)
        expected = (params.b ** (-1.75) / math.sqrt(params.a) / d.delta)
        assert env == pytest.approx(expected, rel=1e-12)

    def test_envelope_multiplier(self, params, grid_small):
        d = derive(params)
        prof = FakeProfile(params, grid_small, 0.0)
        s1 = SlabModel(params, prof, envelope_multiplier=1.0)
        s2 = SlabModel(params, prof, envelope_multiplier=2.5)
        assert s2.envelope(0.5, d.delta) == \
            pytest.approx(2.5 * s1.envelope(0.5, d.delta))

    def test_domain_errors(self, params, grid_small):
        d = derive(params)
        prof = FakeProfile(params, grid_small, 0.0)
        slab = SlabModel(params, prof)
        with pytest.raises(SlabDomainError):
            slab.leading(1.5, 0.0)
        with pytest.raises(SlabDomainError):
            slab.leading(0.5 * d.u_trapped, 0.0)
        with pytest.raises(SlabDomainError):
            slab.leading(0.5, 2.0 * d.delta)

    def test_slab_bounds_structure(self, params):
        d = derive(params)
        b = slab_bounds(params, d.delta, 1.0)
        assert b["Omega_minus_1"] == pytest.approx(
            d.delta * math.sqrt(params.a) * params.b ** 0.25)
        assert b["eta"] == b["omegabar"]


class TestDetectTrapped:
    def test_certified_at_predicted_sphere(self, profile_mid):
        d = profile_mid.derived
        # hypothesis of the criterion: min_omega I(delta) >= 4 a^(1/2) b d
        lower = 4.0 * d.u_trapped
        assert np.min(profile_mid.I_at(d.delta)) >= lower
        slab = SlabModel(profile_mid.params, profile_mid)
        verdict = detect_trapped(slab, d.u_trapped, d.delta)
        assert verdict.status == TRAPPED_CERTIFIED

    def test_zero_shear_untrapped(self, params, grid_small):
        prof = FakeProfile(params, grid_small, 0.0)
        slab = SlabModel(params, prof)
        d = derive(params)
        assert detect_trapped(slab, d.u_trapped, 0.0).status == UNTRAPPED
        assert detect_trapped(slab, 1.0, 0.0).status == UNTRAPPED

    def test_outer_sphere_untrapped(self, profile_mid):
        slab = SlabModel(profile_mid.params, profile_mid)
        d = profile_mid.derived
        assert detect_trapped(slab, 1.0, d.delta).status == UNTRAPPED

    def test_indeterminate_band(self, params, grid_small):
        # leading crosses zero across the sphere -> indeterminate
        d = derive(params)

        class Mixed(FakeProfile):
            def I_at(self, ubar):
                vals = np.full((self.grid.n_theta, self.grid.n_phi),
                               2.0 * d.u_trapped)
                vals[: self.grid.n_theta // 2] = 0.0
                return vals

        slab = SlabModel(params, Mixed(params, grid_small, 0.0))
        verdict = detect_trapped(slab, d.u_trapped, 0.5 * d.delta)
        assert verdict.status == INDETERMINATE
