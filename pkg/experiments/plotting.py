# experiments/plotting.py - GRÁFICOS DE MEDIANA COM FAIXA 20%-80%

import logging
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .exceptions import ExportError  # noqa: E402
from .harness import McSummary  # noqa: E402

logger = logging.getLogger('experiments.plotting')

PLOT_QUANTITIES = {
    'regret': ('regret_median', 'regret_p20', 'regret_p80', 'Regret'),
    'state': ('state_median', 'state_p20', 'state_p80', '‖x_t‖'),
}

CONTROLLER_STYLES = {
    'optimal': {'color': 'k', 'label': 'LQR ótimo'},
    'ce': {'color': 'tab:blue', 'label': 'CE nominal'},
    'mrac_lqr': {'color': 'tab:red', 'label': 'MRAC-LQR'},
}

# SVG sem data e com ids estáveis: mesmo resumo, mesmos bytes
SVG_RC = {'svg.hashsalt': 'alqr-lab', 'svg.fonttype': 'path'}


def emit_plot(summaries: Sequence[McSummary], path, quantity: str = 'regret', scale: str = 'log',
              title: str = '') -> Path:
    """
    Linhas de mediana e faixas p20-p80 de cada controlador num único SVG

    Raises:
        ExportError: falha ao gravar o arquivo
    """
    if quantity not in PLOT_QUANTITIES:
        raise ValueError(f"Grandeza desconhecida: {quantity}. Válidas: {tuple(PLOT_QUANTITIES)}")
    if scale not in ('log', 'linear'):
        raise ValueError(f"Escala desconhecida: {scale}")
    median_name, low_name, high_name, ylabel = PLOT_QUANTITIES[quantity]
    path = Path(path)

    with matplotlib.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(8, 5))
        try:
            for summary in summaries:
                if not summary.horizon:
                    continue
                style = CONTROLLER_STYLES.get(summary.controller, {'color': None, 'label': summary.controller})
                t = np.arange(1, summary.horizon + 1)
                median = getattr(summary, median_name)
                line, = ax.plot(t, median, color=style['color'], label=style['label'], linewidth=1.2)
                ax.fill_between(
                    t, getattr(summary, low_name), getattr(summary, high_name),
                    color=line.get_color(), alpha=0.2, linewidth=0,
                )

            if scale == 'log':
                ax.set_xscale('log')
                ax.set_yscale('symlog' if quantity == 'regret' else 'log')
            ax.set_xlabel('t')
            ax.set_ylabel(ylabel)
            if title:
                ax.set_title(title)
            if ax.get_legend_handles_labels()[0]:
                ax.legend(loc='best')
            ax.grid(True, which='both', alpha=0.3)
            fig.tight_layout()

            path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(path, format='svg', metadata={'Date': None})
        except OSError as e:
            raise ExportError(f"Falha ao gravar {path}: {e}") from e
        finally:
            plt.close(fig)

    logger.debug(f"Gráfico gravado: {path}")
    return path
