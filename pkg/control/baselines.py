# control/baselines.py - CONTROLADORES DE REFERÊNCIA: ÓTIMO (ORÁCULO) E CERTEZA EQUIVALENTE

from dataclasses import dataclass, replace
import logging
from typing import Optional

import numpy as np

from .control_math import dlqr, solve_dare, spectral_radius
from .estimator import WrlsState
from .exceptions import ControlError, SingularThetaB
from .mrac import ReferenceModel, epoch_schedule, estimate_dynamics
from .systems import MatchedStructure, PlantModel

logger = logging.getLogger('control.baselines')


@dataclass(frozen=True, eq=False)
class OptimalController:
    """Oráculo: K* = dlqr(A*, B*, Q, R) e J* = σ_w²·Tr(P*)"""
    K: np.ndarray
    P: np.ndarray
    J_star: float
    bias_input: Optional[np.ndarray] = None

    def control(self, x) -> np.ndarray:
        u = self.K @ x
        if self.bias_input is not None:
            u = u + self.bias_input
        return u


@dataclass(frozen=True, eq=False)
class CeState:
    """Certeza equivalente: mesmo WRLS-PROJ, ganho K̂ = dlqr(Â, B̂) por época"""
    wrls: WrlsState
    ref: ReferenceModel
    K_hat: np.ndarray
    epoch_k: int = 0
    epoch_start: int = 0
    epoch_len: int = 1
    schedule_mode: str = 'linear'
    C_T: int = 500
    skipped_updates: int = 0

    @property
    def epoch_end(self) -> int:
        return self.epoch_start + self.epoch_len


def bias_compensation(Theta_B, input_bias) -> Optional[np.ndarray]:
    """Θ_B⁻¹b, termo que cancela o viés constante da planta"""
    if input_bias is None:
        return None
    try:
        return np.linalg.solve(Theta_B, input_bias)
    except np.linalg.LinAlgError as e:
        raise SingularThetaB("Θ_B singular na compensação de viés") from e


def optimal_controller(plant: PlantModel, matched: MatchedStructure, Q, R,
                       dare_method: str = 'iteration', dare_tol: float = 1e-10) -> OptimalController:
    """
    Raises:
        NonConvergence: DARE da planta verdadeira não convergiu
    """
    solution = solve_dare(plant.A_star, plant.B_star, Q, R, tol=dare_tol, method=dare_method)
    J_star = plant.sigma_w ** 2 * float(np.trace(solution.P))
    logger.debug(f"Controlador ótimo ({plant.name}): J* = {J_star:.6g}")
    return OptimalController(
        K=solution.K,
        P=solution.P,
        J_star=J_star,
        bias_input=bias_compensation(matched.Theta_B_star, plant.input_bias),
    )


def init_ce(wrls: WrlsState, ref: ReferenceModel, K0, schedule_mode: str = 'linear', C_T: int = 500) -> CeState:
    return CeState(
        wrls=wrls,
        ref=ref,
        K_hat=np.asarray(K0, dtype=float),
        epoch_len=epoch_schedule(schedule_mode, C_T, 0),
        schedule_mode=schedule_mode,
        C_T=C_T,
    )


def ce_control(state: CeState, x, r, input_bias=None) -> np.ndarray:
    """u_t = K̂x_t + r_t (+ Θ̂_B⁻¹b)"""
    u = state.K_hat @ x + r
    compensation = bias_compensation(state.wrls.Theta_B, input_bias)
    if compensation is not None:
        u = u + compensation
    return u


def ce_epoch_update(state: CeState, Q, R, dare_method: str = 'iteration', dare_tol: float = 1e-10) -> CeState:
    """Recalcula K̂ = dlqr(Â, B̂); mantém o ganho anterior se a DARE falhar"""
    next_k = state.epoch_k + 1
    advanced = replace(
        state,
        epoch_k=next_k,
        epoch_start=state.epoch_end,
        epoch_len=epoch_schedule(state.schedule_mode, state.C_T, next_k),
    )
    A_hat, B_hat = estimate_dynamics(state.wrls, state.ref)
    try:
        K_hat = dlqr(A_hat, B_hat, Q, R, tol=dare_tol, method=dare_method)
    except ControlError as e:
        logger.warning(f"CE: ganho da época {state.epoch_k} mantido: {e}")
        return replace(advanced, skipped_updates=state.skipped_updates + 1)

    logger.debug(
        f"CE época {next_k}: raio espectral estimado {spectral_radius(A_hat + B_hat @ K_hat):.4f}"
    )
    return replace(advanced, K_hat=K_hat)
