# experiments/management/commands/compare.py

import math
from pathlib import Path

from experiments.cli import ExperimentCommand
from experiments.config import echo_config
from experiments.exceptions import ConfigError
from experiments.export import export_summary, export_trial, import_results
from experiments.harness import McSummary, build_setup, run_monte_carlo
from experiments.plotting import emit_plot


class Command(ExperimentCommand):
    help = 'Comparar controladores por Monte Carlo com sementes compartilhadas'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--save-trials',
            action='store_true',
            help='Gravar também o CSV de cada ensaio',
        )
        parser.add_argument(
            '--overlay',
            nargs='+',
            default=[],
            metavar='RESUMO',
            help='Resumos externos (CSV/JSON de summary) sobrepostos aos gráficos',
        )

    def run_command(self, **options):
        config, preset = self.load_experiment(options)
        self.describe(config, preset)
        overlays = self.load_overlays(options['overlay'])

        setup = build_setup(config)
        self.stdout.write(f"  J* = {setup.J_star:.6g}, {config.trials} ensaio(s) por controlador")

        if options['dry_run']:
            self.stdout.write(self.style.WARNING('MODO DRY-RUN: configuração válida, nada foi simulado'))
            return

        out_dir = Path(config.output_dir)
        echo_config(config, out_dir)
        run = self.register_run('compare', preset, config, config.trials)
        save_trials = options['save_trials']

        summaries = []
        try:
            for controller in config.controllers:
                summary = run_monte_carlo(
                    config,
                    controller,
                    parallelism=options['parallelism'],
                    setup=setup,
                    keep_trials=save_trials,
                )
                export_summary(summary, out_dir / f"summary_{controller}.csv", 'csv')
                export_summary(summary, out_dir / f"summary_{controller}.json", 'json')
                for result in summary.trials:
                    export_trial(result, out_dir / 'trials' / f"{controller}_trial{result.trial_index:03d}.csv")
                summaries.append(summary)

                self.stdout.write(
                    f"  {controller}: regret final mediano {summary.median_final_regret:.6g}, "
                    f"{summary.aborted_trials}/{summary.n_trials} abortado(s)"
                )

            scale = config.harness.plot_scale
            title = preset or config.system.name
            plotted = summaries + overlays
            emit_plot(plotted, out_dir / 'regret.svg', quantity='regret', scale=scale, title=title)
            emit_plot(plotted, out_dir / 'state_norm.svg', quantity='state', scale=scale, title=title)
        except Exception:
            self.fail_run(run)
            raise

        self.finish_run(run, [
            {
                'controller': summary.controller,
                'median_final_regret': summary.median_final_regret if math.isfinite(summary.median_final_regret) else None,
                'aborted_trials': summary.aborted_trials,
                'n_trials': summary.n_trials,
            }
            for summary in summaries
        ])
        self.stdout.write(self.style.SUCCESS(f"\nResumo e gráficos gravados em {out_dir}"))

    def load_overlays(self, paths):
        """Resumos gravados por outra ferramenta ou execução, só para os gráficos"""
        overlays = []
        for path in paths:
            summary = import_results(path)
            if not isinstance(summary, McSummary):
                raise ConfigError({'--overlay': [f"{path} não é um resumo Monte Carlo."]})
            overlays.append(summary)
        return overlays
