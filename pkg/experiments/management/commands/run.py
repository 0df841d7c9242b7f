# experiments/management/commands/run.py

from pathlib import Path

from experiments.cli import ExperimentCommand
from experiments.config import echo_config
from experiments.export import export_trial
from experiments.harness import build_setup, run_trial


class Command(ExperimentCommand):
    help = 'Executar ensaios individuais e gravar as séries de cada um em CSV'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--format',
            choices=['csv', 'json'],
            default='csv',
            help='Formato dos arquivos de ensaio (padrão: csv)',
        )

    def run_command(self, **options):
        config, preset = self.load_experiment(options)
        # Sem --trials, um ensaio por controlador
        trials = options['trials'] or 1
        self.describe(config, preset)

        setup = build_setup(config)
        self.stdout.write(f"  J* = {setup.J_star:.6g}, {trials} ensaio(s) por controlador")

        if options['dry_run']:
            self.stdout.write(self.style.WARNING('MODO DRY-RUN: configuração válida, nada foi simulado'))
            return

        out_dir = Path(config.output_dir)
        echo_config(config, out_dir)
        run = self.register_run('run', preset, config, trials)
        fmt = options['format']

        try:
            for controller in config.controllers:
                for index in range(trials):
                    result = run_trial(config, controller, trial_index=index, setup=setup)
                    target = out_dir / 'trials' / f"{controller}_trial{index:03d}.{fmt}"
                    export_trial(result, target, fmt)

                    status = f"abortado no passo {result.abort_step}" if result.aborted else 'completo'
                    self.stdout.write(
                        f"  {controller} #{index} (semente {result.seed}): "
                        f"regret final {result.final_regret:.6g}, {status}"
                    )
        except Exception:
            self.fail_run(run)
            raise

        self.finish_run(run)
        self.stdout.write(self.style.SUCCESS(f"\nResultados gravados em {out_dir}"))
