from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg

from control.baselines import (
    bias_compensation,
    ce_control,
    ce_epoch_update,
    init_ce,
    optimal_controller,
)
from control.control_math import dlqr, spectral_radius
from control.estimator import ParamSet, Regressor, init_wrls, wrls_update
from control.exceptions import SingularThetaB
from control.mrac import ReferenceModel, epoch_update, init_mrac
from control.systems import make_laplacian, make_quadrotor, plant_step

Q3, R3 = 10.0 * np.eye(3), np.eye(3)


@pytest.fixture
def laplacian():
    plant, matched, K0 = make_laplacian(stabilizing=False)
    ref = ReferenceModel(A_m0=matched.A_m, B_m=matched.B_m)
    return plant, matched, K0, ref


class TestOptimalController:

    def test_laplacian_oracle(self, laplacian):
        plant, matched, _, _ = laplacian
        optimal = optimal_controller(plant, matched, Q3, R3)
        P = scipy.linalg.solve_discrete_are(plant.A_star, plant.B_star, Q3, R3)
        assert optimal.J_star == pytest.approx(0.01 * np.trace(P), rel=1e-8)
        assert spectral_radius(plant.A_star + plant.B_star @ optimal.K) < 1.0
        assert optimal.bias_input is None
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(optimal.control(x), optimal.K @ x)

    def test_zero_noise_gives_zero_cost(self):
        plant, matched, _ = make_laplacian(stabilizing=False, sigma_w=0.0)
        assert optimal_controller(plant, matched, Q3, R3).J_star == 0.0

    def test_quadrotor_bias_keeps_hover(self):
        plant, matched = make_quadrotor(epsilon=(0.5, 1.0, 1.0, 1.0))
        optimal = optimal_controller(plant, matched, 10.0 * np.eye(12), np.eye(4), dare_method='scipy', dare_tol=1e-8)
        np.testing.assert_allclose(optimal.bias_input, plant.input_bias / np.array([0.5, 1.0, 1.0, 1.0]))
        u = optimal.control(np.zeros(12))
        np.testing.assert_allclose(plant_step(plant, np.zeros(12), u, np.zeros(12)), np.zeros(12), atol=1e-14)


class TestBiasCompensation:

    def test_none_without_bias(self):
        assert bias_compensation(np.eye(2), None) is None

    def test_solves_theta_b(self):
        np.testing.assert_allclose(bias_compensation(np.diag([2.0, 4.0]), np.array([1.0, 1.0])), [0.5, 0.25])

    def test_singular(self):
        with pytest.raises(SingularThetaB):
            bias_compensation(np.zeros((2, 2)), np.ones(2))


class TestCertaintyEquivalence:

    def test_initial_gain(self, laplacian):
        _, _, K0, ref = laplacian
        state = init_ce(init_wrls(np.hstack([K0, np.eye(3)])), ref, K0, C_T=300)
        assert state.epoch_len == 300
        x, r = np.ones(3), np.array([0.1, 0.2, 0.3])
        np.testing.assert_allclose(ce_control(state, x, r), K0 @ x + r, atol=1e-15)

    def test_bias_uses_estimated_theta_b(self, laplacian):
        _, _, K0, ref = laplacian
        state = init_ce(init_wrls(np.hstack([K0, 2.0 * np.eye(3)])), ref, K0)
        b = np.array([2.0, 4.0, 6.0])
        np.testing.assert_allclose(ce_control(state, np.zeros(3), np.zeros(3), input_bias=b), b / 2.0)

    def test_truth_estimate_recovers_optimal_gain(self, laplacian):
        plant, matched, K0, ref = laplacian
        state = init_ce(init_wrls(matched.Theta_star), ref, K0)
        updated = ce_epoch_update(state, Q3, R3)
        np.testing.assert_allclose(updated.K_hat, dlqr(plant.A_star, plant.B_star, Q3, R3), atol=1e-8)
        assert (updated.epoch_k, updated.epoch_start, updated.epoch_len) == (1, 500, 1000)
        assert updated.skipped_updates == 0

    def test_failed_update_keeps_previous_gain(self, laplacian):
        _, _, K0, ref = laplacian
        Theta_A = ref.A_m0 - 1.5 * np.eye(3)
        state = init_ce(init_wrls(np.hstack([Theta_A, np.zeros((3, 3))])), ref, K0)
        updated = ce_epoch_update(state, Q3, R3)
        np.testing.assert_array_equal(updated.K_hat, K0)
        assert updated.skipped_updates == 1
        assert updated.epoch_k == 1


class TestSharedEstimator:

    def test_same_regressors_give_same_estimates(self, laplacian):
        _, matched, K0, ref = laplacian
        wrls = init_wrls(np.hstack([K0, np.eye(3)]))
        param_set = ParamSet(a_center=matched.Theta_star[:, :3], a_max=10.0)
        ce = init_ce(wrls, ref, K0, C_T=50)
        mrac = init_mrac(wrls, ref, C_T=50)

        rng = np.random.default_rng(7)
        for t in range(300):
            phi = rng.standard_normal(6)
            reg = Regressor(phi=phi, y=matched.Theta_star @ phi + 0.01 * rng.standard_normal(3))
            ce = replace(ce, wrls=wrls_update(ce.wrls, reg, param_set))
            mrac = replace(mrac, wrls=wrls_update(mrac.wrls, reg, param_set))
            if t + 1 == ce.epoch_end:
                ce = ce_epoch_update(ce, Q3, R3)
            if t + 1 == mrac.epoch_end:
                mrac = epoch_update(mrac, Q3, R3)

            for field in ('Theta_hat', 'Sigma', 'Sigma_inv'):
                np.testing.assert_array_equal(getattr(ce.wrls, field), getattr(mrac.wrls, field))
            assert (ce.wrls.z, ce.wrls.alpha, ce.wrls.steps) == (mrac.wrls.z, mrac.wrls.alpha, mrac.wrls.steps)
        assert ce.epoch_k == mrac.epoch_k == 3
