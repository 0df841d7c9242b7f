import math

import numpy as np
import pytest

from control.control_math import dlqr, spectral_radius
from control.estimator import init_wrls
from control.exceptions import IdentityViolation, SingularThetaB, UnstableMatrix
from control.mrac import (
    ComparatorState,
    ExplorationConfig,
    ReferenceModel,
    channel_phases,
    comparator_step,
    control_input,
    default_frequencies,
    epoch_schedule,
    epoch_update,
    error_model_check,
    estimate_dynamics,
    exploration_signal,
    init_mrac,
    offset_identity_error,
)
from control.systems import NoiseStream, make_laplacian, plant_step

Q3, R3 = 10.0 * np.eye(3), np.eye(3)


@pytest.fixture
def laplacian():
    plant, matched, K0 = make_laplacian(stabilizing=False)
    ref = ReferenceModel(A_m0=matched.A_m, B_m=matched.B_m)
    return plant, matched, K0, ref


def broken_state(ref):
    """Θ̂ com Θ̂_B = 0 e Â = 1.5·I: DARE sem solução estabilizante"""
    Theta_A = (ref.A_m0 - 1.5 * np.eye(3))
    wrls = init_wrls(np.hstack([Theta_A, np.zeros((3, 3))]))
    return init_mrac(wrls, ref, C_T=500)


class TestFrequencies:

    def test_laplacian_defaults(self):
        assert default_frequencies(3, 3) == pytest.approx((math.pi / 7, 3 * math.pi / 7, 5 * math.pi / 7))

    def test_quadrotor_defaults(self):
        freqs = default_frequencies(12, 4)
        assert len(freqs) == 8
        assert freqs[0] == pytest.approx(math.pi / 17)
        assert all(0 < w < math.pi for w in freqs)

    @pytest.mark.parametrize('m, count', [(2, 2), (3, 3), (4, 8)])
    def test_channel_phases_span_input_space(self, m, count):
        directions = np.exp(1j * channel_phases(m, count))
        assert directions.shape == (m, count)
        assert np.linalg.matrix_rank(directions) == m

    def test_first_channel_has_zero_phase(self):
        np.testing.assert_array_equal(channel_phases(3, 4)[0], np.zeros(4))


class TestExplorationConfig:

    def test_default_is_valid(self):
        ExplorationConfig().validate(3, 3)

    @pytest.mark.parametrize('frequencies', [(0.5, 0.5, 1.0), (0.0, 1.0, 2.0), (1.0, 2.0, math.pi), (0.5, 1.0)])
    def test_invalid_frequencies(self, frequencies):
        with pytest.raises(ValueError):
            ExplorationConfig(frequencies=frequencies).validate(3, 3)

    def test_invalid_mode(self):
        with pytest.raises(ValueError):
            ExplorationConfig(mode='chirp').validate(3, 3)

    def test_gaussian_skips_frequency_checks(self):
        ExplorationConfig(mode='gaussian', frequencies=(0.5, 0.5)).validate(3, 3)


class TestEpochSchedule:

    def test_linear(self):
        assert [epoch_schedule('linear', 500, k) for k in range(3)] == [500, 1000, 1500]

    def test_exponential(self):
        assert [epoch_schedule('exponential', 500, k) for k in range(3)] == [500, 1000, 2000]

    def test_invalid(self):
        with pytest.raises(ValueError):
            epoch_schedule('linear', 0, 0)
        with pytest.raises(ValueError):
            epoch_schedule('quadratic', 500, 0)


class TestExplorationSignal:

    def test_off(self):
        cfg = ExplorationConfig(mode='off')
        np.testing.assert_array_equal(exploration_signal(cfg, 0, 10, None, 3), np.zeros(3))

    def test_sinusoid_at_origin(self):
        freqs = default_frequencies(3, 3)
        cfg = ExplorationConfig(C_r=0.2, frequencies=freqs)
        r = exploration_signal(cfg, 0, 0, None, 3)
        expected = [0.2 * sum(math.sin(2 * math.pi * i * j / 3) for i in range(1, 4)) for j in range(3)]
        np.testing.assert_allclose(r, expected, atol=1e-15)

    def test_sinusoid_formula(self):
        freqs = (0.4, 1.1, 2.3)
        cfg = ExplorationConfig(C_r=0.5, frequencies=freqs)
        t = 17
        r = exploration_signal(cfg, 0, t, None, 2)
        expected = [0.5 * sum(math.sin(w * t + math.pi * i * j) for i, w in enumerate(freqs, start=1))
                    for j in range(2)]
        np.testing.assert_allclose(r, expected, atol=1e-12)

    def test_sinusoid_decay(self):
        cfg = ExplorationConfig(C_r=0.3, frequencies=default_frequencies(3, 3))
        first = exploration_signal(cfg, 0, 5, None, 3)
        sixth = exploration_signal(cfg, 6, 5, None, 3)
        np.testing.assert_allclose(sixth, 0.5 * first, atol=1e-15)

    def test_default_frequencies_when_none_given(self):
        cfg = ExplorationConfig(C_r=0.2)
        cfg.validate(3, 3)
        explicit = ExplorationConfig(C_r=0.2, frequencies=default_frequencies(3, 3))
        signals = np.array([exploration_signal(cfg, 0, t, None, 3, n=3) for t in range(1, 50)])
        assert np.abs(signals).max() > 0
        expected = np.array([exploration_signal(explicit, 0, t, None, 3) for t in range(1, 50)])
        np.testing.assert_array_equal(signals, expected)

    def test_default_frequencies_need_state_dimension(self):
        with pytest.raises(ValueError):
            exploration_signal(ExplorationConfig(C_r=0.2), 0, 1, None, 3)

    def test_gaussian_uses_stream(self):
        cfg = ExplorationConfig(mode='gaussian', sigma_explore=0.1)
        r = exploration_signal(cfg, 6, 0, NoiseStream(seed=3, stream=1), 3)
        expected = 0.05 * NoiseStream(seed=3, stream=1).standard_normal(3)
        np.testing.assert_allclose(r, expected, atol=1e-15)


class TestControlLaw:

    def test_initial_epoch(self, laplacian):
        _, _, K0, ref = laplacian
        state = init_mrac(init_wrls(np.hstack([K0, np.eye(3)])), ref)
        x, r = np.array([1.0, -2.0, 0.5]), np.array([0.1, 0.0, -0.1])
        np.testing.assert_allclose(control_input(state, x, r), K0 @ x + r, atol=1e-14)

    def test_scaled_theta_b_and_bias(self, laplacian):
        _, _, K0, ref = laplacian
        state = init_mrac(init_wrls(np.hstack([K0, 2.0 * np.eye(3)])), ref)
        x, r, b = np.ones(3), np.zeros(3), np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(control_input(state, x, r, input_bias=b), (K0 @ x + b) / 2.0, atol=1e-14)

    def test_singular_theta_b(self, laplacian):
        _, _, K0, ref = laplacian
        state = init_mrac(init_wrls(np.hstack([K0, np.zeros((3, 3))])), ref)
        with pytest.raises(SingularThetaB):
            control_input(state, np.ones(3), np.zeros(3))

    def test_init_state(self, laplacian):
        _, _, K0, ref = laplacian
        state = init_mrac(init_wrls(np.hstack([K0, np.eye(3)])), ref, schedule_mode='exponential', C_T=200)
        assert (state.epoch_k, state.epoch_start, state.epoch_len) == (0, 0, 200)
        np.testing.assert_array_equal(state.theta_offset, np.zeros((3, 3)))
        np.testing.assert_array_equal(state.ref.A_mk, state.ref.A_m0)
        assert offset_identity_error(state) == 0.0


class TestReferenceModel:

    def test_requires_stable_reference(self):
        with pytest.raises(UnstableMatrix):
            ReferenceModel(A_m0=1.1 * np.eye(2), B_m=np.eye(2))


class TestEpochUpdate:

    def test_truth_estimate_gives_optimal_reference(self, laplacian):
        plant, matched, _, ref = laplacian
        state = init_mrac(init_wrls(matched.Theta_star), ref)
        A_hat, B_hat = estimate_dynamics(state.wrls, ref)
        np.testing.assert_allclose(A_hat, plant.A_star, atol=1e-12)
        np.testing.assert_allclose(B_hat, plant.B_star, atol=1e-12)

        updated = epoch_update(state, Q3, R3)
        K_star = dlqr(plant.A_star, plant.B_star, Q3, R3)
        np.testing.assert_allclose(updated.K_hat, K_star, atol=1e-8)
        np.testing.assert_allclose(updated.ref.A_mk, plant.A_star + plant.B_star @ K_star, atol=1e-8)
        assert spectral_radius(updated.ref.A_mk) < 1.0
        assert offset_identity_error(updated) <= 1e-10
        assert (updated.epoch_k, updated.epoch_start, updated.epoch_len) == (1, 500, 1000)
        np.testing.assert_array_equal(updated.ref.A_m0, ref.A_m0)

    def test_offset_identity_holds_for_any_estimate(self, laplacian):
        _, _, K0, ref = laplacian
        rng = np.random.default_rng(12)
        Theta = np.hstack([K0 + 0.05 * rng.standard_normal((3, 3)), np.diag(rng.uniform(0.8, 1.2, 3))])
        updated = epoch_update(init_mrac(init_wrls(Theta), ref), Q3, R3)
        assert updated.skipped_updates == 0
        assert offset_identity_error(updated) <= 1e-10

    def test_failed_update_keeps_reference(self, laplacian):
        _, _, _, ref = laplacian
        state = broken_state(ref)
        updated = epoch_update(state, Q3, R3)
        assert updated.skipped_updates == 1
        assert updated.K_hat is None
        np.testing.assert_array_equal(updated.theta_offset, state.theta_offset)
        np.testing.assert_array_equal(updated.ref.A_mk, state.ref.A_mk)
        assert (updated.epoch_k, updated.epoch_start, updated.epoch_len) == (1, 500, 1000)


class TestComparator:

    def test_identity_across_epochs(self, laplacian):
        plant, matched, K0, ref = laplacian
        state = init_mrac(init_wrls(np.hstack([K0, np.eye(3)])), ref)
        cstate = ComparatorState(x_c=np.array([0.5, -0.3, 0.2]))
        noise = NoiseStream(seed=4)
        for _ in range(20):
            cstate, _ = comparator_step(cstate, state.ref, np.full(3, 0.1), 0.1 * noise.standard_normal(3),
                                        plant, matched, state.theta_offset)

        state = epoch_update(state, Q3, R3)
        for _ in range(20):
            cstate, nu = comparator_step(cstate, state.ref, np.zeros(3), 0.1 * noise.standard_normal(3),
                                         plant, matched, state.theta_offset)
        assert nu.shape == (3,)

    def test_wrong_offset_is_detected(self, laplacian):
        plant, matched, K0, ref = laplacian
        state = init_mrac(init_wrls(np.hstack([K0, np.eye(3)])), ref)
        cstate = ComparatorState(x_c=np.ones(3))
        with pytest.raises(IdentityViolation) as excinfo:
            comparator_step(cstate, state.ref, np.zeros(3), np.zeros(3), plant, matched,
                            state.theta_offset + 0.1)
        assert excinfo.value.residual > 0

    def test_tolerance_scales_with_state(self, laplacian):
        plant, matched, K0, ref = laplacian
        state = init_mrac(init_wrls(np.hstack([K0, np.eye(3)])), ref)
        cstate = ComparatorState(x_c=np.array([1e9, -2e9, 5e8]))
        next_c, _ = comparator_step(cstate, state.ref, np.zeros(3), np.zeros(3), plant, matched,
                                    state.theta_offset, tol=1e-9)
        assert np.linalg.norm(next_c.x_c) > 1.0
        with pytest.raises(IdentityViolation):
            comparator_step(cstate, state.ref, np.zeros(3), np.zeros(3), plant, matched,
                            state.theta_offset + 1e-3, tol=1e-9)

    def test_error_model(self, laplacian):
        plant, matched, K0, ref = laplacian
        state = init_mrac(init_wrls(np.hstack([K0, np.eye(3)])), ref)
        rng = np.random.default_rng(6)
        x = rng.standard_normal(3)
        cstate = ComparatorState(x_c=rng.standard_normal(3))
        for _ in range(10):
            r, w = 0.1 * rng.standard_normal(3), 0.1 * rng.standard_normal(3)
            u = control_input(state, x, r)
            next_x = plant_step(plant, x, u, w)
            next_c, _ = comparator_step(cstate, state.ref, r, w, plant, matched, state.theta_offset)
            residual = error_model_check(x, cstate.x_c, next_x, next_c.x_c, state.ref, state.wrls,
                                         np.concatenate([-x, u]), matched.Theta_star)
            assert residual <= 1e-10
            x, cstate = next_x, next_c
