# experiments/presets.py - CENÁRIOS PRÉ-DEFINIDOS

from .config import CONTROLLER_NAMES, ExperimentConfig, parse_config
from .exceptions import ConfigError

COMMON = {
    'controllers': list(CONTROLLER_NAMES),
    'cost': {'q_scale': 10.0, 'r_scale': 1.0},
    'schedule': {'mode': 'linear', 'C_T': 500},
    'horizon': 20_000,
    'trials': 100,
}


def _laplacian(stabilizing: bool, mode: str, sigma_explore: float) -> dict:
    return dict(
        COMMON,
        system={'name': 'laplacian', 'stabilizing': stabilizing},
        noise={'sigma_w': 0.1},
        exploration={'mode': mode, 'sigma_explore': sigma_explore},
    )


def _quadrotor(sigma_w: float, sigma_explore: float) -> dict:
    return dict(
        COMMON,
        system={'name': 'quadrotor', 'epsilon': [0.5, 1.0, 1.0, 1.0]},
        noise={'sigma_w': sigma_w},
        exploration={'mode': 'gaussian', 'sigma_explore': sigma_explore},
    )


def _build_presets() -> dict:
    presets = {}
    for init, stabilizing in (('stable', True), ('unstable', False)):
        for mode in ('gaussian', 'sinusoidal'):
            presets[f"laplacian-{init}-{mode}"] = _laplacian(stabilizing, mode, 0.1)
            presets[f"laplacian-{init}-{mode}-0.01"] = _laplacian(stabilizing, mode, 0.01)
    presets['quadrotor-low-noise'] = _quadrotor(0.01, 0.01)
    presets['quadrotor-high-noise'] = _quadrotor(0.1, 0.1)
    return presets


PRESETS = _build_presets()


def preset_names():
    return sorted(PRESETS)


def get_preset(name: str) -> ExperimentConfig:
    """
    Configuração validada do cenário

    Raises:
        ConfigError: nome desconhecido (a mensagem lista os válidos)
    """
    if name not in PRESETS:
        raise ConfigError({'preset': [f"Preset desconhecido: {name}. Disponíveis: {', '.join(preset_names())}"]})
    return parse_config(PRESETS[name])
