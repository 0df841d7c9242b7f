# control/mrac.py - MRAC-LQR: CONTROLE POR MODELO DE REFERÊNCIA COM ATUALIZAÇÃO LQR

from dataclasses import dataclass, replace
import logging
import math
from typing import Optional, Tuple

import numpy as np

from .control_math import MAX_CONDITION, as_mat, dlqr, spectral_radius
from .estimator import WrlsState
from .exceptions import (
    ControlError,
    IdentityViolation,
    RankDeficient,
    SingularThetaB,
    UnstableMatrix,
)
from .systems import NoiseStream, PlantModel

logger = logging.getLogger('control.mrac')

EXPLORATION_MODES = ('sinusoidal', 'gaussian', 'off')
SCHEDULE_MODES = ('exponential', 'linear')


@dataclass(frozen=True, eq=False)
class ReferenceModel:
    """Referência fixa (A_m0, B_m) e dinâmica atual A_mk da época k"""
    A_m0: np.ndarray
    B_m: np.ndarray
    A_mk: Optional[np.ndarray] = None

    def __post_init__(self):
        A_m0 = as_mat(self.A_m0, name='A_m0')
        B_m = as_mat(self.B_m, rows=A_m0.shape[0], name='B_m')
        if np.linalg.cond(B_m.T @ B_m) > MAX_CONDITION:
            raise RankDeficient("B_m deve ter posto coluna completo")
        rho = spectral_radius(A_m0)
        if rho >= 1.0:
            raise UnstableMatrix(f"A_m0 deve ser Schur-estável (raio espectral {rho:.6f})")
        object.__setattr__(self, 'A_m0', A_m0)
        object.__setattr__(self, 'B_m', B_m)
        object.__setattr__(self, 'A_mk', A_m0.copy() if self.A_mk is None else as_mat(self.A_mk, name='A_mk'))


@dataclass(frozen=True)
class ExplorationConfig:
    """Sinal exploratório: senoidal (determinístico), gaussiano ou desligado"""
    mode: str = 'sinusoidal'
    C_r: float = 0.1
    decay_exponent: float = 1.0 / 6.0
    frequencies: Tuple[float, ...] = ()
    sigma_explore: float = 0.1
    seed: int = 0

    def validate(self, n: int, m: int) -> None:
        if self.mode not in EXPLORATION_MODES:
            raise ValueError(f"Modo de exploração inválido: {self.mode}. Válidos: {EXPLORATION_MODES}")
        if self.mode != 'sinusoidal':
            return
        freqs = self.resolved_frequencies(n, m)
        if len(set(freqs)) != len(freqs):
            raise ValueError("Frequências de exploração devem ser distintas")
        if any(not 0 < w < math.pi for w in freqs):
            raise ValueError("Frequências de exploração devem estar em (0, π)")
        if len(freqs) < math.ceil((n + m) / 2):
            raise ValueError(f"São necessárias ao menos {math.ceil((n + m) / 2)} frequências")

    def resolved_frequencies(self, n: int, m: int) -> Tuple[float, ...]:
        return tuple(self.frequencies) if self.frequencies else default_frequencies(n, m)


@dataclass
class ComparatorState:
    """Estado x_c do sistema comparador"""
    x_c: np.ndarray


@dataclass(frozen=True, eq=False)
class MracState:
    """Estado do MRAC-LQR entre épocas"""
    wrls: WrlsState
    ref: ReferenceModel
    theta_offset: np.ndarray
    epoch_k: int = 0
    epoch_start: int = 0
    epoch_len: int = 1
    schedule_mode: str = 'linear'
    C_T: int = 500
    K_hat: Optional[np.ndarray] = None
    skipped_updates: int = 0

    @property
    def epoch_end(self) -> int:
        return self.epoch_start + self.epoch_len


def default_frequencies(n: int, m: int) -> Tuple[float, ...]:
    """ωᵢ = π(2i − 1)/(2d + 1), d = ceil((n + m)/2)"""
    d = math.ceil((n + m) / 2)
    return tuple(math.pi * (2 * i - 1) / (2 * d + 1) for i in range(1, d + 1))


def channel_phases(m: int, count: int) -> np.ndarray:
    """Fase 2πij/m do canal j na frequência i (matriz m × count)"""
    return 2.0 * math.pi * np.outer(np.arange(m), np.arange(1, count + 1)) / m


def epoch_schedule(mode: str, C_T: int, k: int) -> int:
    """Duração da época k: C_T·2^k (exponencial) ou C_T·(k + 1) (linear)"""
    if C_T < 1:
        raise ValueError("C_T deve ser >= 1")
    if mode == 'exponential':
        return C_T * 2 ** k
    if mode == 'linear':
        return C_T * (k + 1)
    raise ValueError(f"Agenda de épocas inválida: {mode}. Válidas: {SCHEDULE_MODES}")


def init_mrac(wrls: WrlsState, ref: ReferenceModel, schedule_mode: str = 'linear', C_T: int = 500) -> MracState:
    """Época 0 com Θ_offset(0) = 0 e A_m0 = A_m"""
    m, n = wrls.m, wrls.n
    return MracState(
        wrls=wrls,
        ref=ref,
        theta_offset=np.zeros((m, n)),
        epoch_k=0,
        epoch_start=0,
        epoch_len=epoch_schedule(schedule_mode, C_T, 0),
        schedule_mode=schedule_mode,
        C_T=C_T,
    )


def sinusoid_frequencies(cfg: ExplorationConfig, n: Optional[int], m: int) -> Tuple[float, ...]:
    """Frequências efetivas do modo senoidal"""
    if cfg.frequencies:
        return tuple(cfg.frequencies)
    if n is None:
        raise ValueError("n é necessário para derivar as frequências padrão")
    return default_frequencies(n, m)


def exploration_signal(
    cfg: ExplorationConfig, k: int, t: int, stream: Optional[NoiseStream], m: int, n: Optional[int] = None,
) -> np.ndarray:
    """
    r_t da época k

    senoidal: C_r·2^{−k·decay}·Σᵢ sin(ωᵢt + 2πij/m) no canal j (i = 1..d).
    Os r̄(ωᵢ) resultantes geram todo o espaço de entrada (m >= 2).
    gaussiano: N(0, σ²·2^{−2k·decay}·I).

    Sem frequências explícitas, usa default_frequencies(n, m); n é então obrigatório.
    """
    if cfg.mode == 'off' or m == 0:
        return np.zeros(m)
    decay = 2.0 ** (-k * cfg.decay_exponent)
    if cfg.mode == 'gaussian':
        return cfg.sigma_explore * decay * stream.standard_normal(m)
    if cfg.mode != 'sinusoidal':
        raise ValueError(f"Modo de exploração inválido: {cfg.mode}")

    freqs = np.asarray(sinusoid_frequencies(cfg, n, m), dtype=float)
    angles = t * freqs + channel_phases(m, freqs.size)
    return cfg.C_r * decay * np.sin(angles).sum(axis=1)


def _solve_theta_B(Theta_B: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if np.linalg.cond(Theta_B) > MAX_CONDITION:
        raise SingularThetaB("Θ̂_B não inversível; verifique o conjunto S_B")
    return np.linalg.solve(Theta_B, rhs)


def control_input(state: MracState, x, r, input_bias=None) -> np.ndarray:
    """u_t = Θ̂_B⁻¹((Θ̂_A + Θ_offset(k))x_t + r_t), mais Θ̂_B⁻¹b com viés"""
    wrls = state.wrls
    rhs = (wrls.Theta_A + state.theta_offset) @ x + r
    if input_bias is not None:
        rhs = rhs + input_bias
    return _solve_theta_B(wrls.Theta_B, rhs)


def estimate_dynamics(wrls: WrlsState, ref: ReferenceModel):
    """Â = A_m0 − B_mΘ̂_A, B̂ = B_mΘ̂_B"""
    return ref.A_m0 - ref.B_m @ wrls.Theta_A, ref.B_m @ wrls.Theta_B


def epoch_update(state: MracState, Q, R, dare_method: str = 'iteration', dare_tol: float = 1e-10) -> MracState:
    """
    Fim da época k: estima (Â, B̂), K̂ = dlqr(Â, B̂, Q, R), A_m(k+1) = Â + B̂K̂ e
    Θ_offset(k+1) = Θ̂_BK̂ − Θ̂_A

    Se a DARE falhar, a referência anterior é mantida por mais uma época.
    """
    wrls = state.wrls
    next_k = state.epoch_k + 1
    advanced = replace(
        state,
        epoch_k=next_k,
        epoch_start=state.epoch_end,
        epoch_len=epoch_schedule(state.schedule_mode, state.C_T, next_k),
    )

    A_hat, B_hat = estimate_dynamics(wrls, state.ref)
    try:
        K_hat = dlqr(A_hat, B_hat, Q, R, tol=dare_tol, method=dare_method)
        A_mk = A_hat + B_hat @ K_hat
        rho = spectral_radius(A_mk)
        if rho >= 1.0:
            raise UnstableMatrix(f"A_m(k+1) não Schur-estável (raio espectral {rho:.6f})")
    except ControlError as e:
        logger.warning(f"Atualização da época {state.epoch_k} ignorada: {e}")
        return replace(advanced, skipped_updates=state.skipped_updates + 1)

    offset = wrls.Theta_B @ K_hat - wrls.Theta_A
    logger.debug(
        f"Época {next_k}: raio espectral de A_mk = {rho:.4f}, duração {advanced.epoch_len}"
    )
    return replace(
        advanced,
        ref=replace(state.ref, A_mk=A_mk),
        theta_offset=offset,
        K_hat=K_hat,
    )


def offset_identity_error(state: MracState) -> float:
    """‖A_mk − (A_m0 + B_mΘ_offset)‖_max"""
    ref = state.ref
    return float(np.max(np.abs(ref.A_mk - (ref.A_m0 + ref.B_m @ state.theta_offset))))


# ===== SISTEMA COMPARADOR =====

def comparator_step(
    cstate: ComparatorState,
    ref: ReferenceModel,
    r,
    w,
    plant: PlantModel,
    matched,
    theta_offset,
    tol: float = 1e-9,
) -> Tuple[ComparatorState, np.ndarray]:
    """
    x_c' = A_mk x_c + B_m r + w e ν = Θ_B*⁻¹((Θ_A* + Θ_offset(k))x_c + r)

    Verifica A*x_c + B*ν + w == A_mk x_c + B_m r + w com tolerância relativa:
    o resíduo deve ficar abaixo de tol·max(1, ‖x_c'‖).

    Raises:
        IdentityViolation: resíduo > tol·max(1, ‖x_c'‖)
    """
    x_c = cstate.x_c
    nu = np.linalg.solve(matched.Theta_B_star, (matched.Theta_A_star + theta_offset) @ x_c + r)
    x_next = ref.A_mk @ x_c + ref.B_m @ r + w
    via_plant = plant.A_star @ x_c + plant.B_star @ nu + w
    residual = float(np.linalg.norm(via_plant - x_next))
    if residual > tol * max(1.0, float(np.linalg.norm(x_next))):
        raise IdentityViolation(f"Comparador inconsistente (resíduo {residual:.3e})", residual=residual)
    return ComparatorState(x_c=x_next), nu


def error_model_check(x, x_c, next_x, next_x_c, ref: ReferenceModel, wrls: WrlsState, phi, Theta_star) -> float:
    """‖e_{c,t+1} − (A_mk e_ct − B_mΘ̃_tφ_t)‖ com Θ̃_t anterior à atualização"""
    e_c = np.asarray(x) - np.asarray(x_c)
    e_next = np.asarray(next_x) - np.asarray(next_x_c)
    Theta_tilde = wrls.Theta_hat - Theta_star
    predicted = ref.A_mk @ e_c - ref.B_m @ (Theta_tilde @ phi)
    return float(np.linalg.norm(e_next - predicted))
