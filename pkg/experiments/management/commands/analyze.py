# experiments/management/commands/analyze.py

import json
from pathlib import Path

import numpy as np

from control.control_math import spectral_radius
from experiments.cli import ExperimentCommand
from experiments.config import echo_config
from experiments.exceptions import ConfigError, ExportError
from experiments.excitation import analyze_excitation, sinusoid_amplitudes
from experiments.export import read_trajectory, write_trajectory
from experiments.harness import build_setup, simulate_fixed_loop

REPORT_NAME = 'excitation_report.json'
TRAJECTORY_NAME = 'trajectory.csv'


class Command(ExperimentCommand):
    help = 'Analisar a excitação (linhas espectrais e matriz de informação) de uma trajetória φ_t'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--trajectory', help='CSV com colunas t,phi_0..phi_{d-1}')
        parser.add_argument(
            '--window',
            nargs=2,
            type=int,
            metavar=('T0_INICIO', 'T0'),
            help='Janela [início, início + T0) da análise',
        )
        parser.add_argument(
            '--frequencies',
            nargs='+',
            type=float,
            help='Frequências ωᵢ em rad/passo (padrão: as da exploração)',
        )
        parser.add_argument(
            '--simulate',
            action='store_true',
            help='Simular a malha fixa u = Kx + r a partir de --config/--preset',
        )
        parser.add_argument(
            '--gain',
            choices=['optimal', 'initial'],
            default='optimal',
            help='Ganho da malha simulada: K* ou K̂₀ (padrão: optimal)',
        )

    def run_command(self, **options):
        if options['trajectory'] and options['simulate']:
            raise ConfigError({'--trajectory': ['Use --trajectory ou --simulate, não ambos.']})
        if options['simulate']:
            phi, meta, out_dir = self.simulate(options)
        elif options['trajectory']:
            path = Path(options['trajectory'])
            phi, meta = read_trajectory(path)
            out_dir = Path(options['out']) if options['out'] else path.parent
        else:
            raise ConfigError({'--trajectory': ['Informe --trajectory ou --simulate.']})

        frequencies = options['frequencies'] or meta.get('frequencies')
        if not frequencies:
            raise ConfigError({'--frequencies': ['Nenhuma frequência informada nem presente na trajetória.']})
        window = tuple(options['window']) if options['window'] else (0, phi.shape[0])

        loop = meta.get('closed_loop') if not options['frequencies'] else None
        kwargs = {}
        if loop:
            kwargs = {
                'A_K': loop['A_K'],
                'B': loop['B'],
                'K': loop['K'],
                'r_amplitudes': np.asarray(loop['r_real']) + 1j * np.asarray(loop['r_imag']),
                'sigma_w': loop['sigma_w'],
            }

        report = analyze_excitation(phi, window, frequencies, **kwargs)
        self.stdout.write(
            f"Janela [{report.t0}, {report.t0 + report.T0}), d = {report.dimension}, "
            f"λ_min empírico = {report.lambda_min:.6g}"
        )
        if report.alpha is not None:
            self.stdout.write(
                f"  λ_min previsto = {report.predicted_lambda_min:.6g}, α/d = {report.lower_bound:.6g}, "
                f"maior erro de amplitude = {float(np.max(report.amplitude_errors)):.3g}"
            )

        if options['dry_run']:
            self.stdout.write(self.style.WARNING('MODO DRY-RUN: relatório não gravado'))
            return
        target = out_dir / REPORT_NAME
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            target.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + '\n', encoding='utf-8')
        except OSError as e:
            raise ExportError(f"Falha ao gravar {target}: {e}") from e
        self.stdout.write(self.style.SUCCESS(f"\nRelatório gravado em {target}"))

    def simulate(self, options):
        """Trajetória de malha fixa com os metadados necessários para a previsão"""
        config, preset = self.load_experiment(options)
        self.describe(config, preset)
        setup = build_setup(config)
        plant = setup.plant

        K = setup.optimal.K if options['gain'] == 'optimal' else setup.K0
        A_K = plant.A_star + plant.B_star @ K
        if spectral_radius(A_K) >= 1.0:
            raise ConfigError({'--gain': [f"Malha fechada instável com o ganho {options['gain']}."]})

        window = options['window']
        T0 = window[0] + window[1] if window else config.horizon
        trajectory = simulate_fixed_loop(
            plant, K, setup.exploration, T0, config.seed, x0=setup.x0, bias_input=setup.optimal.bias_input,
        )

        frequencies = list(setup.exploration.resolved_frequencies(plant.n, plant.m))
        meta = {'frequencies': frequencies, 'gain': options['gain']}
        if setup.exploration.mode == 'sinusoidal':
            r_bar = sinusoid_amplitudes(setup.exploration, plant.m, n=plant.n)
            meta['closed_loop'] = {
                'A_K': A_K.tolist(),
                'B': plant.B_star.tolist(),
                'K': K.tolist(),
                'r_real': r_bar.real.tolist(),
                'r_imag': r_bar.imag.tolist(),
                'sigma_w': plant.sigma_w,
            }
        else:
            self.stdout.write(self.style.WARNING('Exploração não senoidal: relatório sem previsão espectral'))

        out_dir = Path(config.output_dir)
        if not options['dry_run']:
            echo_config(config, out_dir)
            write_trajectory(trajectory.phi, out_dir / TRAJECTORY_NAME, meta)
        return trajectory.phi, meta, out_dir
