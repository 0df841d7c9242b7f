from dataclasses import replace
import json
import math

import pytest

from experiments.config import (
    EFFECTIVE_CONFIG_NAME,
    ExperimentConfig,
    echo_config,
    load_config,
    parse_config,
    parse_config_text,
)
from experiments.exceptions import ConfigError
from experiments.presets import PRESETS, get_preset, preset_names

MINIMAL = {'system': {'name': 'laplacian'}}


def config_error(raw):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(raw)
    return excinfo.value


class TestParseConfig:

    def test_minimal_laplacian_defaults(self):
        config = parse_config(MINIMAL)
        assert config.controllers == ('optimal', 'ce', 'mrac_lqr')
        assert config.sigma_w == 0.1
        assert config.harness.dare_method == 'iteration'
        assert config.harness.dare_tol == 1e-10
        assert config.horizon == 20_000
        assert config.trials == 100
        assert config.system.x0 == (0.0, 0.0, 0.0)
        assert config.exploration.frequencies == pytest.approx((math.pi / 7, 3 * math.pi / 7, 5 * math.pi / 7))
        assert config.exploration.C_r == pytest.approx(0.1 * math.sqrt(2.0 / 3.0))
        assert config.estimator.initial_estimate == 'nominal'

    def test_quadrotor_defaults(self):
        config = parse_config({'system': {'name': 'quadrotor'}})
        assert config.sigma_w == 0.01
        assert config.harness.dare_method == 'scipy'
        assert len(config.exploration.frequencies) == 8
        assert config.system.epsilon == (0.5, 1.0, 1.0, 1.0)

    def test_explicit_values_survive(self):
        raw = {
            'system': {'name': 'laplacian', 'stabilizing': False},
            'controllers': ['mrac_lqr'],
            'noise': {'sigma_w': 0.0},
            'exploration': {'mode': 'gaussian', 'sigma_explore': 0.01},
            'schedule': {'mode': 'exponential', 'C_T': 100},
            'horizon': 300,
            'seed': 7,
        }
        config = parse_config(raw)
        assert config.controllers == ('mrac_lqr',)
        assert config.sigma_w == 0.0
        assert config.system.stabilizing is False
        assert config.schedule.mode == 'exponential'
        assert (config.horizon, config.seed) == (300, 7)

    def test_unknown_top_level_key(self):
        error = config_error(dict(MINIMAL, bogus=1))
        assert error.fields == ['bogus']
        assert error.errors['bogus'] == ['Campo desconhecido.']

    def test_unknown_nested_key(self):
        error = config_error(dict(MINIMAL, exploration={'mode': 'gaussian', 'amplitude': 2}))
        assert error.fields == ['exploration.amplitude']

    def test_missing_system(self):
        assert 'system' in config_error({}).fields

    def test_invalid_values_are_named(self):
        error = config_error(dict(MINIMAL, horizon=0, estimator={'sigma0': -1}))
        assert set(error.fields) == {'horizon', 'estimator.sigma0'}
        assert error.errors['estimator.sigma0'] == ['Deve ser maior que zero.']
        assert 'estimator.sigma0' in error.format()
        assert error.format().startswith('Configuração inválida - ')

    def test_invalid_loe(self):
        error = config_error({'system': {'name': 'quadrotor', 'epsilon': [0.0, 1.0, 1.0, 1.0]}})
        assert error.fields == ['system.epsilon']

    def test_x0_dimension(self):
        error = config_error({'system': {'name': 'laplacian', 'x0': [1.0, 2.0]}})
        assert error.fields == ['system.x0']

    def test_too_few_frequencies(self):
        error = config_error(dict(MINIMAL, exploration={'frequencies': [0.5, 1.0]}))
        assert error.fields == ['exploration.frequencies']

    def test_frequencies_out_of_range(self):
        error = config_error(dict(MINIMAL, exploration={'frequencies': [0.5, 1.0, 4.0]}))
        assert error.fields == ['exploration.frequencies']

    def test_repeated_controllers(self):
        assert config_error(dict(MINIMAL, controllers=['ce', 'ce'])).fields == ['controllers']

    def test_unknown_controller(self):
        error = config_error(dict(MINIMAL, controllers=['lqg']))
        assert all(field.startswith('controllers') for field in error.fields)

    def test_frobenius_ball_needs_radius(self):
        error = config_error(dict(MINIMAL, estimator={'b_kind': 'frobenius_ball'}))
        assert error.fields == ['estimator.b_radius']

    def test_box_order(self):
        error = config_error(dict(MINIMAL, estimator={'b_min': 2.0, 'b_max': 1.0}))
        assert error.fields == ['estimator.b_min']

    def test_not_an_object(self):
        assert config_error([1, 2]).fields == ['(raiz)']


class TestConfigText:

    def test_json_error_reports_position(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config_text('{\n  "system": {"name": "laplacian"},\n  "horizon": \n}')
        assert excinfo.value.fields == ['(json)']
        assert excinfo.value.errors['(json)'][0].startswith('linha 4, coluna 1')

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as excinfo:
            load_config(tmp_path / 'ausente.json')
        assert excinfo.value.fields == ['(arquivo)']

    def test_load_from_file(self, tmp_path):
        path = tmp_path / 'exp.json'
        path.write_text(json.dumps(MINIMAL), encoding='utf-8')
        assert load_config(path) == parse_config(MINIMAL)


class TestEchoAndDigest:

    def test_echo_round_trip(self, tmp_path):
        config = parse_config({
            'system': {'name': 'quadrotor', 'epsilon': [0.5, 0.8, 1.0, 1.0]},
            'exploration': {'mode': 'sinusoidal', 'decay_exponent': 1.0 / 6.0},
            'horizon': 1234,
            'seed': 99,
        })
        target = echo_config(config, tmp_path / 'out')
        assert target.name == EFFECTIVE_CONFIG_NAME
        reloaded = load_config(target)
        assert reloaded == config
        assert reloaded.digest == config.digest

    def test_echo_has_no_nulls_left(self, tmp_path):
        data = json.loads(echo_config(parse_config(MINIMAL), tmp_path).read_text(encoding='utf-8'))
        assert data['noise']['sigma_w'] == 0.1
        assert data['exploration']['C_r'] is not None
        assert data['harness']['dare_method'] == 'iteration'

    def test_digest_ignores_output_dir(self):
        config = parse_config(MINIMAL)
        assert replace(config, output_dir='/tmp/a').digest == config.digest

    def test_digest_tracks_results_fields(self):
        config = parse_config(MINIMAL)
        assert replace(config, seed=1).digest != config.digest
        assert len(config.digest) == 64

    def test_defaults_and_resolved_share_digest(self):
        assert ExperimentConfig().digest == ExperimentConfig().resolve().digest


class TestPresets:

    def test_all_scenarios_present(self):
        names = set(preset_names())
        for init in ('stable', 'unstable'):
            for mode in ('gaussian', 'sinusoidal'):
                assert f"laplacian-{init}-{mode}" in names
                assert f"laplacian-{init}-{mode}-0.01" in names
        assert {'quadrotor-low-noise', 'quadrotor-high-noise'} <= names
        assert len(names) == len(PRESETS) == 10

    @pytest.mark.parametrize('name', sorted(PRESETS))
    def test_presets_validate(self, name):
        config = get_preset(name)
        assert config.cost.q_scale == 10.0
        assert config.schedule.C_T == 500

    def test_unstable_gaussian(self):
        config = get_preset('laplacian-unstable-gaussian')
        assert config.system.stabilizing is False
        assert config.exploration.mode == 'gaussian'
        assert config.exploration.sigma_explore == 0.1

    def test_small_exploration_variant(self):
        assert get_preset('laplacian-stable-sinusoidal-0.01').exploration.sigma_explore == 0.01

    def test_quadrotor_noise_levels(self):
        low, high = get_preset('quadrotor-low-noise'), get_preset('quadrotor-high-noise')
        assert (low.sigma_w, low.exploration.sigma_explore) == (0.01, 0.01)
        assert (high.sigma_w, high.exploration.sigma_explore) == (0.1, 0.1)

    def test_unknown_preset_lists_names(self):
        with pytest.raises(ConfigError) as excinfo:
            get_preset('cenario-inexistente')
        message = excinfo.value.errors['preset'][0]
        assert 'cenario-inexistente' in message
        assert 'laplacian-unstable-gaussian' in message
