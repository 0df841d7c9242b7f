# experiments/config.py - CONFIGURAÇÃO TIPADA DE EXPERIMENTOS

from dataclasses import asdict, dataclass, field, replace
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Optional, Tuple

from control.mrac import default_frequencies

from .exceptions import ConfigError, ExportError

logger = logging.getLogger('experiments.config')

CONTROLLER_NAMES = ('optimal', 'ce', 'mrac_lqr')
SECTION_NAMES = ('system', 'cost', 'noise', 'exploration', 'schedule', 'estimator', 'harness')

# (n, m) de cada sistema de referência
SYSTEM_DIMENSIONS = {
    'laplacian': (3, 3),
    'quadrotor': (12, 4),
}

# Padrões dependentes do sistema, aplicados quando o campo vem nulo
SYSTEM_DEFAULTS = {
    'laplacian': {'sigma_w': 0.1, 'dare_method': 'iteration', 'dare_tol': 1e-10},
    'quadrotor': {'sigma_w': 0.01, 'dare_method': 'scipy', 'dare_tol': 1e-8},
}

EFFECTIVE_CONFIG_NAME = 'effective_config.json'


@dataclass(frozen=True)
class SystemConfig:
    name: str = 'laplacian'
    perturbation_scale: float = 0.5
    stabilizing: bool = True
    perturbation_seed: int = 0
    dt: float = 0.01
    epsilon: Tuple[float, ...] = (0.5, 1.0, 1.0, 1.0)
    x0: Optional[Tuple[float, ...]] = None

    @property
    def dimensions(self) -> Tuple[int, int]:
        return SYSTEM_DIMENSIONS[self.name]


@dataclass(frozen=True)
class CostConfig:
    q_scale: float = 10.0
    r_scale: float = 1.0


@dataclass(frozen=True)
class NoiseConfig:
    sigma_w: Optional[float] = None


@dataclass(frozen=True)
class ExplorationSection:
    mode: str = 'sinusoidal'
    sigma_explore: float = 0.1
    C_r: Optional[float] = None
    decay_exponent: float = 1.0 / 6.0
    frequencies: Tuple[float, ...] = ()


@dataclass(frozen=True)
class ScheduleConfig:
    mode: str = 'linear'
    C_T: int = 500


@dataclass(frozen=True)
class EstimatorConfig:
    sigma0: float = 10.0
    gamma: float = 0.5
    a_max: float = 1.0
    b_kind: str = 'diagonal_box'
    b_min: float = 0.25
    b_max: float = 1.75
    b_radius: Optional[float] = None
    initial_estimate: str = 'nominal'
    resync_every: int = 1000
    projection_tol: float = 1e-10
    projection_max_iter: int = 10_000


@dataclass(frozen=True)
class HarnessConfig:
    blowup_threshold: float = 1e7
    identity_tol: float = 1e-9
    check_error_model: bool = True
    record_diagnostics: bool = False
    dare_method: Optional[str] = None
    dare_tol: Optional[float] = None
    plot_scale: str = 'log'


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuração completa; resolve() preenche os padrões dependentes do sistema"""
    system: SystemConfig = field(default_factory=SystemConfig)
    controllers: Tuple[str, ...] = CONTROLLER_NAMES
    cost: CostConfig = field(default_factory=CostConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    exploration: ExplorationSection = field(default_factory=ExplorationSection)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)
    horizon: int = 20_000
    trials: int = 100
    seed: int = 0
    output_dir: Optional[str] = None

    @property
    def sigma_w(self) -> float:
        return self.noise.sigma_w

    def resolve(self) -> 'ExperimentConfig':
        """Configuração efetiva: nenhum campo calculável fica nulo"""
        defaults = SYSTEM_DEFAULTS[self.system.name]
        n, m = self.system.dimensions
        d = math.ceil((n + m) / 2)

        exploration = self.exploration
        if not exploration.frequencies:
            exploration = replace(exploration, frequencies=default_frequencies(n, m))
        if exploration.C_r is None:
            # RMS por canal igual ao caso gaussiano
            exploration = replace(exploration, C_r=exploration.sigma_explore * math.sqrt(2.0 / d))

        noise = self.noise
        if noise.sigma_w is None:
            noise = replace(noise, sigma_w=defaults['sigma_w'])

        harness = self.harness
        if harness.dare_method is None:
            harness = replace(harness, dare_method=defaults['dare_method'])
        if harness.dare_tol is None:
            harness = replace(harness, dare_tol=defaults['dare_tol'])

        system = self.system
        if system.x0 is None:
            system = replace(system, x0=tuple(0.0 for _ in range(n)))

        return replace(self, system=system, noise=noise, exploration=exploration, harness=harness)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['controllers'] = list(self.controllers)
        return _lists(data)

    def digest_payload(self) -> dict:
        """Campos que determinam resultados (output_dir fica de fora)"""
        data = self.to_dict()
        data.pop('output_dir', None)
        return data

    @property
    def digest(self) -> str:
        return config_digest(self)


def _lists(value):
    if isinstance(value, dict):
        return {key: _lists(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_lists(item) for item in value]
    return value


def _tuple(value):
    return None if value is None else tuple(value)


def from_validated(data: dict) -> ExperimentConfig:
    """Converte o dicionário validado pelos serializers em dataclasses"""
    system = dict(data['system'])
    system['epsilon'] = _tuple(system['epsilon'])
    system['x0'] = _tuple(system.get('x0'))
    exploration = dict(data['exploration'])
    exploration['frequencies'] = _tuple(exploration['frequencies'])
    return ExperimentConfig(
        system=SystemConfig(**system),
        controllers=tuple(data['controllers']),
        cost=CostConfig(**data['cost']),
        noise=NoiseConfig(**data['noise']),
        exploration=ExplorationSection(**exploration),
        schedule=ScheduleConfig(**data['schedule']),
        estimator=EstimatorConfig(**data['estimator']),
        harness=HarnessConfig(**data['harness']),
        horizon=data['horizon'],
        trials=data['trials'],
        seed=data['seed'],
        output_dir=data.get('output_dir'),
    )


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(',', ':'))


def config_digest(config: ExperimentConfig) -> str:
    """SHA-256 do JSON canônico da configuração efetiva"""
    return hashlib.sha256(canonical_json(config.resolve().digest_payload()).encode('utf-8')).hexdigest()


# ===== CARREGAMENTO E ECO =====

def parse_config(raw: dict) -> ExperimentConfig:
    """
    Valida um dicionário de configuração

    Raises:
        ConfigError: campos inválidos ou desconhecidos, com caminho pontuado
    """
    from .serializers import ExperimentConfigSerializer, flatten_errors

    if not isinstance(raw, dict):
        raise ConfigError({'(raiz)': ['Esperado um objeto JSON.']})
    serializer = ExperimentConfigSerializer(data=raw)
    if not serializer.is_valid():
        raise ConfigError(flatten_errors(serializer.errors))
    return from_validated(serializer.validated_data).resolve()


def parse_config_text(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError({'(json)': [f"linha {e.lineno}, coluna {e.colno}: {e.msg}"]}) from e
    return parse_config(raw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError({'(arquivo)': [f"Não foi possível ler {path}: {e.strerror}"]}) from e
    return parse_config_text(text)


def echo_config(config: ExperimentConfig, out_dir) -> Path:
    """Grava effective_config.json no diretório de saída"""
    out_dir = Path(out_dir)
    target = out_dir / EFFECTIVE_CONFIG_NAME
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(config.resolve().to_dict(), sort_keys=True, indent=2) + '\n', encoding='utf-8')
    except OSError as e:
        raise ExportError(f"Falha ao gravar {target}: {e}") from e
    logger.info(f"Configuração efetiva gravada em {target}")
    return target
