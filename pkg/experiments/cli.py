# experiments/cli.py - BASE DOS COMANDOS run, compare E analyze

from dataclasses import replace
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError, transaction

from control.exceptions import WindowTooShort

from .config import ExperimentConfig, load_config
from .exceptions import ConfigError, ExportError
from .models import ControllerSummary, ExperimentRun
from .presets import get_preset

logger = logging.getLogger('experiments.cli')


class ExperimentCommand(BaseCommand):
    """
    Opções e tratamento de erros comuns

    ConfigError vira CommandError com returncode 2; WindowTooShort e falhas
    de arquivo viram returncode 1.
    """

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Arquivo JSON de configuração')
        parser.add_argument('--preset', help='Nome de um cenário pré-definido')
        parser.add_argument('--trials', type=int, help='Número de ensaios (sobrepõe a configuração)')
        parser.add_argument('--seed', type=int, help='Semente base (sobrepõe a configuração)')
        parser.add_argument('--out', help='Diretório de saída (padrão: ALQR_OUT_DIR)')
        parser.add_argument(
            '--parallelism',
            type=int,
            default=settings.ALQR_SETTINGS['DEFAULT_PARALLELISM'],
            help='Processos para os ensaios Monte Carlo',
        )
        parser.add_argument(
            '--dry-run',
            action='store_true',
            help='Validar a configuração sem simular nem gravar arquivos',
        )

    def handle(self, *args, **options):
        try:
            return self.run_command(**options)
        except ConfigError as e:
            raise CommandError(e.format(), returncode=2) from e
        except WindowTooShort as e:
            raise CommandError(f"Janela curta demais: {e}", returncode=1) from e
        except ExportError as e:
            raise CommandError(str(e), returncode=1) from e

    def run_command(self, **options):
        raise NotImplementedError

    # ===== CONFIGURAÇÃO =====

    def load_experiment(self, options, require_source: bool = True):
        """Devolve (config resolvida, nome do preset ou '')"""
        config_path, preset = options.get('config'), options.get('preset')
        if config_path and preset:
            raise ConfigError({'--config': ['Use --config ou --preset, não ambos.']})
        if preset:
            config = get_preset(preset)
        elif config_path:
            config = load_config(config_path)
        elif require_source:
            raise ConfigError({'--config': ['Informe --config ou --preset.']})
        else:
            return None, ''

        overrides = {}
        if options.get('trials') is not None:
            if options['trials'] < 1:
                raise ConfigError({'--trials': ['Deve ser >= 1.']})
            overrides['trials'] = options['trials']
        if options.get('seed') is not None:
            if options['seed'] < 0:
                raise ConfigError({'--seed': ['Deve ser >= 0.']})
            overrides['seed'] = options['seed']
        if options.get('parallelism') is not None and options['parallelism'] < 1:
            raise ConfigError({'--parallelism': ['Deve ser >= 1.']})

        config = replace(config, **overrides).resolve()
        out_dir = self.output_dir(config, preset or Path(config_path).stem, options.get('out'))
        return replace(config, output_dir=str(out_dir)), preset or ''

    def output_dir(self, config: ExperimentConfig, label: str, out=None) -> Path:
        """--out, depois output_dir da configuração, depois OUTPUT_ROOT/<rótulo>/<digest>"""
        if out:
            return Path(out)
        if config.output_dir:
            return Path(config.output_dir)
        return Path(settings.ALQR_SETTINGS['OUTPUT_ROOT']) / label / config.digest[:12]

    # ===== REGISTRO =====

    def register_run(self, command: str, preset: str, config: ExperimentConfig, trials: int):
        """Cria ExperimentRun; sem banco disponível segue sem registro"""
        try:
            return ExperimentRun.objects.create(
                command=command,
                preset=preset,
                config_digest=config.digest,
                controllers=','.join(config.controllers),
                trials=trials,
                horizon=config.horizon,
                seed=config.seed,
                output_dir=config.output_dir or '',
            )
        except DatabaseError as e:
            logger.warning(f"Registro indisponível, execução não registrada: {e}")
            return None

    def finish_run(self, run, summaries=()):
        if run is None:
            return
        try:
            with transaction.atomic():
                for summary in summaries:
                    ControllerSummary.objects.create(
                        run=run,
                        controller=summary['controller'],
                        median_final_regret=summary['median_final_regret'],
                        aborted_trials=summary['aborted_trials'],
                        n_trials=summary['n_trials'],
                    )
                run.mark_finished()
        except DatabaseError as e:
            logger.warning(f"Falha ao concluir o registro {run.pk}: {e}")

    def fail_run(self, run):
        if run is None:
            return
        try:
            run.mark_failed()
        except DatabaseError as e:
            logger.warning(f"Falha ao marcar o registro {run.pk}: {e}")

    def describe(self, config: ExperimentConfig, preset: str = ''):
        label = preset or config.system.name
        self.stdout.write(f"Experimento: {label} (digest {config.digest[:12]})")
        self.stdout.write(
            f"  sistema {config.system.name}, T = {config.horizon}, semente {config.seed}, "
            f"controladores {', '.join(config.controllers)}"
        )
