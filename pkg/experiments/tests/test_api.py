import pytest
from rest_framework.test import APIClient

from experiments.tests.factories import ControllerSummaryFactory, ExperimentRunFactory

pytestmark = pytest.mark.django_db

RUNS_URL = '/api/runs/'


@pytest.fixture
def api_client():
    return APIClient()


def result_ids(response):
    assert response.status_code == 200
    return {row['id'] for row in response.json()['results']}


class TestExperimentRunList:

    def test_paginated_list(self, api_client):
        ExperimentRunFactory.create_batch(25)
        data = api_client.get(RUNS_URL).json()
        assert data['count'] == 25
        assert len(data['results']) == 20
        assert data['next'] is not None

    def test_filter_by_command(self, api_client):
        compare = ExperimentRunFactory()
        ExperimentRunFactory(command='run', trials=1)
        assert result_ids(api_client.get(RUNS_URL, {'command': 'compare'})) == {compare.id}

    def test_filter_by_preset_ignores_case(self, api_client):
        quad = ExperimentRunFactory(preset='quadrotor-low-noise')
        ExperimentRunFactory()
        assert result_ids(api_client.get(RUNS_URL, {'preset': 'Quadrotor-Low-Noise'})) == {quad.id}

    def test_filter_by_controller(self, api_client):
        only_mrac = ExperimentRunFactory(controllers='mrac_lqr')
        everything = ExperimentRunFactory()
        ExperimentRunFactory(controllers='optimal')
        assert result_ids(api_client.get(RUNS_URL, {'controller': 'mrac_lqr'})) == {only_mrac.id, everything.id}

    def test_filter_by_digest_prefix(self, api_client):
        target = ExperimentRunFactory(config_digest='ab' * 32)
        ExperimentRunFactory(config_digest='cd' * 32)
        assert result_ids(api_client.get(RUNS_URL, {'digest': 'abab'})) == {target.id}

    def test_filter_by_status(self, api_client):
        failed = ExperimentRunFactory(status='failed')
        ExperimentRunFactory()
        assert result_ids(api_client.get(RUNS_URL, {'status': 'failed'})) == {failed.id}

    def test_filter_by_horizon_range(self, api_client):
        long_run = ExperimentRunFactory(horizon=100_000)
        ExperimentRunFactory(horizon=1_000)
        assert result_ids(api_client.get(RUNS_URL, {'horizon__gte': 50_000})) == {long_run.id}

    def test_search(self, api_client):
        quad = ExperimentRunFactory(preset='quadrotor-high-noise')
        ExperimentRunFactory()
        assert result_ids(api_client.get(RUNS_URL, {'search': 'quadrotor'})) == {quad.id}


class TestExperimentRunDetail:

    def test_detail_includes_summaries(self, api_client):
        run = ExperimentRunFactory()
        ControllerSummaryFactory(run=run, controller='ce', median_final_regret=900.0)
        ControllerSummaryFactory(run=run, controller='mrac_lqr', aborted_trials=2)

        data = api_client.get(f"{RUNS_URL}{run.id}/").json()
        assert data['config_digest'] == run.config_digest
        assert data['status_display'] == 'Finalizada'
        assert [row['controller'] for row in data['summaries']] == ['ce', 'mrac_lqr']
        assert data['summaries'][0]['median_final_regret'] == 900.0
        assert data['summaries'][1]['aborted_trials'] == 2

    def test_missing_run(self, api_client):
        assert api_client.get(f"{RUNS_URL}9999/").status_code == 404

    def test_read_only(self, api_client):
        run = ExperimentRunFactory()
        assert api_client.post(RUNS_URL, {'command': 'run'}).status_code == 405
        assert api_client.delete(f"{RUNS_URL}{run.id}/").status_code == 405
