from dataclasses import replace
import json
import math

import numpy as np
import pytest

from experiments.config import parse_config
from experiments.exceptions import ExportError
from experiments.export import (
    SUMMARY_HEADER,
    TRIAL_HEADER,
    export_results,
    export_summary,
    export_trial,
    import_results,
    read_trajectory,
    write_trajectory,
)
from experiments.harness import McSummary, run_monte_carlo, run_trial


@pytest.fixture(scope='module')
def config():
    return parse_config({
        'system': {'name': 'laplacian', 'stabilizing': False},
        'exploration': {'mode': 'gaussian'},
        'schedule': {'C_T': 50},
        'horizon': 120,
        'trials': 3,
        'seed': 5,
    })


@pytest.fixture(scope='module')
def mrac_trial(config):
    return run_trial(config, 'mrac_lqr', trial_index=1)


@pytest.fixture(scope='module')
def summary(config):
    return run_monte_carlo(config, 'ce')


def assert_same_trial(loaded, original):
    assert loaded.same_as(original)
    assert loaded.abort_reason == original.abort_reason
    np.testing.assert_array_equal(loaded.max_error_model_residual, original.max_error_model_residual)


class TestTrialFiles:

    @pytest.mark.parametrize('fmt', ['csv', 'json'])
    def test_round_trip(self, tmp_path, mrac_trial, fmt):
        path = export_results(mrac_trial, tmp_path / f"trial.{fmt}", fmt)
        assert_same_trial(import_results(path), mrac_trial)

    def test_round_trip_with_nan_columns(self, tmp_path, config):
        result = run_trial(config, 'optimal')
        loaded = import_results(export_trial(result, tmp_path / 'optimal.csv'))
        assert loaded.same_as(result)
        assert math.isnan(loaded.max_error_model_residual)

    def test_aborted_trial_round_trip(self, tmp_path, config):
        aborting = replace(config, harness=replace(config.harness, blowup_threshold=1e-3))
        result = run_trial(aborting, 'ce')
        loaded = import_results(export_trial(result, tmp_path / 'aborted.json', 'json'))
        assert loaded.aborted and loaded.abort_step == result.abort_step
        assert_same_trial(loaded, result)

    def test_csv_layout(self, tmp_path, mrac_trial):
        lines = export_trial(mrac_trial, tmp_path / 'trial.csv').read_text(encoding='utf-8').splitlines()
        assert lines[0] == '# kind="trial"'
        header_index = next(i for i, line in enumerate(lines) if not line.startswith('# '))
        assert lines[header_index] == ','.join(TRIAL_HEADER) == 't,cost,regret,state_norm,ec_norm,theta_err'
        assert len(lines) - header_index - 1 == len(mrac_trial)
        assert lines[header_index + 1].startswith('0,')

    def test_same_result_same_bytes(self, tmp_path, config):
        first = export_trial(run_trial(config, 'mrac_lqr'), tmp_path / 'a.csv').read_bytes()
        second = export_trial(run_trial(config, 'mrac_lqr'), tmp_path / 'b.csv').read_bytes()
        assert first == second


class TestSummaryFiles:

    @pytest.mark.parametrize('fmt', ['csv', 'json'])
    def test_round_trip(self, tmp_path, summary, fmt):
        loaded = import_results(export_summary(summary, tmp_path / f"summary.{fmt}", fmt))
        assert isinstance(loaded, McSummary)
        assert loaded.same_as(summary)
        assert loaded.J_star == summary.J_star

    def test_json_carries_digest_and_final_regret(self, tmp_path, summary, config):
        data = json.loads(export_summary(summary, tmp_path / 's.json', 'json').read_text(encoding='utf-8'))
        assert data['config_digest'] == config.digest
        assert data['median_final_regret'] == summary.median_final_regret

    def test_empty_summary_is_header_only(self, tmp_path):
        path = export_summary(McSummary.empty('ce', 'digest'), tmp_path / 'empty.csv')
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[-1] == ','.join(SUMMARY_HEADER)
        assert all(line.startswith('# ') for line in lines[:-1])
        loaded = import_results(path)
        assert loaded.horizon == 0
        assert loaded.same_as(McSummary.empty('ce', 'digest'))


class TestErrors:

    def test_unknown_format(self, tmp_path, mrac_trial):
        with pytest.raises(ValueError):
            export_results(mrac_trial, tmp_path / 'x.parquet', 'parquet')

    def test_unsupported_object(self, tmp_path):
        with pytest.raises(TypeError):
            export_results({'regret': [1.0]}, tmp_path / 'x.csv')

    def test_write_failure(self, tmp_path, mrac_trial):
        blocker = tmp_path / 'arquivo'
        blocker.write_text('x', encoding='utf-8')
        with pytest.raises(ExportError):
            export_results(mrac_trial, blocker / 'trial.csv')

    def test_missing_file(self, tmp_path):
        with pytest.raises(ExportError):
            import_results(tmp_path / 'ausente.csv')

    def test_foreign_csv(self, tmp_path):
        path = tmp_path / 'alheio.csv'
        path.write_text('a,b\n1,2\n', encoding='utf-8')
        with pytest.raises(ExportError):
            import_results(path)

    def test_wrong_header(self, tmp_path):
        path = tmp_path / 'cabecalho.csv'
        path.write_text('# kind="trial"\nt,cost\n0,1.0\n', encoding='utf-8')
        with pytest.raises(ExportError):
            import_results(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'quebrado.json'
        path.write_text('{"kind": ', encoding='utf-8')
        with pytest.raises(ExportError):
            import_results(path)


class TestTrajectories:

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        phi = rng.standard_normal((40, 4))
        meta = {'frequencies': [0.3, 0.9], 'gain': 'optimal'}
        data, loaded_meta = read_trajectory(write_trajectory(phi, tmp_path / 'trajectory.csv', meta))
        np.testing.assert_array_equal(data, phi)
        assert loaded_meta['frequencies'] == [0.3, 0.9]
        assert loaded_meta['kind'] == 'trajectory'

    def test_rejects_other_columns(self, tmp_path):
        path = tmp_path / 'x.csv'
        path.write_text('t,x_0\n0,1.0\n', encoding='utf-8')
        with pytest.raises(ExportError):
            read_trajectory(path)
