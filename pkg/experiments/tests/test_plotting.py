import xml.etree.ElementTree as ET

import numpy as np
import pytest

from experiments.exceptions import ExportError
from experiments.harness import McSummary
from experiments.plotting import emit_plot

SVG_NS = '{http://www.w3.org/2000/svg}'


def flat_summary(controller='mrac_lqr', value=2.0, horizon=50, spread=0.0):
    flat = np.full(horizon, value)
    return McSummary(
        controller=controller,
        n_trials=1,
        aborted_trials=0,
        config_digest='digest',
        J_star=0.0,
        regret_median=flat,
        regret_p20=flat - spread,
        regret_p80=flat + spread,
        state_median=flat,
        state_p20=flat - spread,
        state_p80=flat + spread,
    )


def growing_summary(controller):
    t = np.arange(1, 201, dtype=float)
    median = 3.0 * t ** (2.0 / 3.0)
    return McSummary(controller, 10, 0, 'digest', 1.0, median, 0.8 * median, 1.2 * median,
                     1.0 / t, 0.5 / t, 2.0 / t)


def parse_svg(path):
    root = ET.parse(path).getroot()
    assert root.tag == f"{SVG_NS}svg"
    return root


class TestEmitPlot:

    @pytest.mark.parametrize('quantity', ['regret', 'state'])
    @pytest.mark.parametrize('scale', ['log', 'linear'])
    def test_valid_svg(self, tmp_path, quantity, scale):
        summaries = [growing_summary(name) for name in ('optimal', 'ce', 'mrac_lqr')]
        path = emit_plot(summaries, tmp_path / f"{quantity}_{scale}.svg", quantity=quantity, scale=scale,
                         title='laplacian')
        root = parse_svg(path)
        assert root.findall(f".//{SVG_NS}path")

    def test_flat_series_with_degenerate_band(self, tmp_path):
        path = emit_plot([flat_summary()], tmp_path / 'flat.svg', scale='linear')
        parse_svg(path)

    def test_band_with_spread(self, tmp_path):
        path = emit_plot([flat_summary(spread=0.5)], tmp_path / 'band.svg', scale='linear')
        parse_svg(path)

    def test_empty_summaries_are_skipped(self, tmp_path):
        path = emit_plot([McSummary.empty('ce'), flat_summary()], tmp_path / 'mixed.svg', scale='linear')
        parse_svg(path)

    def test_external_controller_name(self, tmp_path):
        path = emit_plot([flat_summary(controller='sls'), growing_summary('ce')], tmp_path / 'overlay.svg')
        parse_svg(path)

    def test_same_input_same_bytes(self, tmp_path):
        summaries = [growing_summary('ce'), growing_summary('mrac_lqr')]
        first = emit_plot(summaries, tmp_path / 'a.svg').read_bytes()
        second = emit_plot(summaries, tmp_path / 'b.svg').read_bytes()
        assert first == second

    def test_no_timestamp(self, tmp_path):
        text = emit_plot([growing_summary('ce')], tmp_path / 'p.svg').read_text(encoding='utf-8')
        assert '<dc:date>' not in text

    def test_creates_parent_directory(self, tmp_path):
        path = emit_plot([flat_summary()], tmp_path / 'novo' / 'dir' / 'p.svg', scale='linear')
        assert path.exists()

    def test_write_failure(self, tmp_path):
        blocker = tmp_path / 'arquivo'
        blocker.write_text('x', encoding='utf-8')
        with pytest.raises(ExportError):
            emit_plot([flat_summary()], blocker / 'p.svg', scale='linear')

    def test_invalid_quantity(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plot([flat_summary()], tmp_path / 'p.svg', quantity='cost')

    def test_invalid_scale(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plot([flat_summary()], tmp_path / 'p.svg', scale='semilog')
