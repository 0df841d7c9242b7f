# control/systems.py - PLANTAS DE REFERÊNCIA E GERAÇÃO DE RUÍDO

from dataclasses import dataclass, field
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from .control_math import as_mat, dlqr, spectral_radius
from .exceptions import DimensionMismatch, InvalidLOE

logger = logging.getLogger('control.systems')

SYSTEM_NAMES = ('laplacian', 'quadrotor')

# Parâmetros físicos do quadrotor linearizado em hover
QUAD_G = 9.81
QUAD_MASS = 0.4
QUAD_ARM = 0.1143
QUAD_IX = 2.09e-3
QUAD_IY = 2.09e-3
QUAD_IZ = 4.18e-3
QUAD_DRAG = 0.01524

# Ordem do estado do quadrotor
QUAD_STATE_LABELS = ('x', 'y', 'z', 'theta', 'phi', 'psi', 'v_x', 'v_y', 'v_z', 'q', 'p', 'r')

# Etiquetas de fluxo do gerador contador (chave Philox = [seed, etiqueta])
STREAM_PROCESS_NOISE = 0
STREAM_EXPLORATION = 1
STREAM_PERTURBATION = 2

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class PlantModel:
    """Dinâmica verdadeira x' = A*x + B*u − B_bias·b + w"""
    A_star: np.ndarray
    B_star: np.ndarray
    sigma_w: float = 0.0
    input_bias: Optional[np.ndarray] = None
    bias_matrix: Optional[np.ndarray] = None
    name: str = 'custom'

    def __post_init__(self):
        A = as_mat(self.A_star, name='A_star')
        n = A.shape[0]
        if A.shape[1] != n:
            raise DimensionMismatch(f"A_star deve ser quadrada, recebido {A.shape}")
        B = as_mat(self.B_star, rows=n, name='B_star')
        if self.sigma_w < 0:
            raise ValueError("sigma_w deve ser >= 0")
        object.__setattr__(self, 'A_star', A)
        object.__setattr__(self, 'B_star', B)

        if self.input_bias is not None:
            bias = np.asarray(self.input_bias, dtype=float).reshape(-1)
            if bias.shape[0] != B.shape[1]:
                raise DimensionMismatch(f"input_bias deve ter {B.shape[1]} entradas")
            bias_matrix = B if self.bias_matrix is None else as_mat(
                self.bias_matrix, rows=n, cols=B.shape[1], name='bias_matrix'
            )
            object.__setattr__(self, 'input_bias', bias)
            object.__setattr__(self, 'bias_matrix', bias_matrix)
            drift = bias_matrix @ bias
        else:
            drift = np.zeros(n)
        object.__setattr__(self, '_drift', drift)

    @property
    def n(self) -> int:
        return self.A_star.shape[0]

    @property
    def m(self) -> int:
        return self.B_star.shape[1]

    @property
    def has_bias(self) -> bool:
        return self.input_bias is not None

    @property
    def drift(self) -> np.ndarray:
        """Termo constante B_bias·b subtraído a cada passo"""
        return self._drift


@dataclass(frozen=True, eq=False)
class MatchedStructure:
    """Par de referência (A_m, B_m) com A_m = A* + B_mΘ_A* e B* = B_mΘ_B*"""
    A_m: np.ndarray
    B_m: np.ndarray
    Theta_A_star: np.ndarray
    Theta_B_star: np.ndarray

    @property
    def Theta_star(self) -> np.ndarray:
        return np.hstack([self.Theta_A_star, self.Theta_B_star])

    def consistency_error(self, plant: PlantModel) -> float:
        """Maior desvio das duas identidades de casamento"""
        err_A = np.max(np.abs(self.A_m - (plant.A_star + self.B_m @ self.Theta_A_star)))
        err_B = np.max(np.abs(plant.B_star - self.B_m @ self.Theta_B_star))
        return float(max(err_A, err_B))


@dataclass
class NoiseStream:
    """
    Fluxo gaussiano reprodutível a partir de um gerador contador (Philox)

    A mesma (seed, etiqueta) gera a mesma sequência em qualquer host ou thread.
    """
    seed: int
    stream: int = STREAM_PROCESS_NOISE
    counter: int = 0
    _generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        key = np.array([self.seed & _SEED_MASK, self.stream & _SEED_MASK], dtype=np.uint64)
        self._generator = np.random.Generator(np.random.Philox(key=key))
        if self.counter:
            skip, self.counter = self.counter, 0
            self.standard_normal(skip)

    def standard_normal(self, size: int) -> np.ndarray:
        self.counter += size
        return self._generator.standard_normal(size)

    def uniform(self, low: float, high: float, size) -> np.ndarray:
        count = int(np.prod(size))
        self.counter += count
        return self._generator.uniform(low, high, size)


def derive_trial_seed(base_seed: int, trial_index: int) -> int:
    """Semente do ensaio: seed ⊕ índice (independe do paralelismo)"""
    return (int(base_seed) ^ int(trial_index)) & _SEED_MASK


def sample_noise(stream: NoiseStream, n: int, sigma_w: float) -> np.ndarray:
    """n amostras i.i.d. N(0, σ_w²); avança o contador do fluxo"""
    if sigma_w < 0:
        raise ValueError("sigma_w deve ser >= 0")
    return sigma_w * stream.standard_normal(n)


def plant_step(plant: PlantModel, x, u, w) -> np.ndarray:
    """x_{t+1} = A*x + B*u − B_bias·b + w"""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape != (plant.n,) or w.shape != (plant.n,):
        raise DimensionMismatch(f"x e w devem ter forma ({plant.n},)")
    if u.shape != (plant.m,):
        raise DimensionMismatch(f"u deve ter forma ({plant.m},)")
    return plant.A_star @ x + plant.B_star @ u - plant.drift + w


# ===== FÁBRICAS DE SISTEMAS =====

def laplacian_dynamics() -> Tuple[np.ndarray, np.ndarray]:
    """Laplaciano marginalmente instável: tridiag(0.01, 1.01, 0.01), B* = I₃"""
    A = np.array([
        [1.01, 0.01, 0.00],
        [0.01, 1.01, 0.01],
        [0.00, 0.01, 1.01],
    ])
    return A, np.eye(3)


def _matched_from_nominal(A_star, B_star, A_m, B_m) -> MatchedStructure:
    """Resolve Θ_A*, Θ_B* por mínimos quadrados em B_m (posto coluna completo)"""
    Theta_A = np.linalg.lstsq(B_m, A_m - A_star, rcond=None)[0]
    Theta_B = np.linalg.lstsq(B_m, B_star, rcond=None)[0]
    return MatchedStructure(A_m=A_m, B_m=B_m, Theta_A_star=Theta_A, Theta_B_star=Theta_B)


def make_laplacian(
    perturbation_scale: float = 0.5,
    seed: int = 0,
    stabilizing: bool = True,
    sigma_w: float = 0.1,
    Q=None,
    R=None,
    dare_method: str = 'iteration',
    dare_tol: float = 1e-10,
    max_attempts: int = 1000,
) -> Tuple[PlantModel, MatchedStructure, np.ndarray]:
    """
    Sistema Laplaciano com modelo inicial (Â₀, B̂₀) e ganho K̂₀ = dlqr(Â₀, B̂₀, Q, R)

    stabilizing=True: Â₀ = I + (1 − Δ)∘Θ com Δ uniforme em [−s, s] por entrada,
    rejeitado até K̂₀ estabilizar a planta verdadeira.
    stabilizing=False: Â₀ = B̂₀ = I₃.
    """
    if not 0.0 <= perturbation_scale <= 1.0:
        raise ValueError("perturbation_scale deve estar em [0, 1]")

    A_star, B_star = laplacian_dynamics()
    n = A_star.shape[0]
    Q = 10.0 * np.eye(n) if Q is None else as_mat(Q, rows=n, cols=n, name='Q')
    R = np.eye(n) if R is None else as_mat(R, rows=n, cols=n, name='R')
    B_hat0 = B_star.copy()

    if stabilizing:
        Theta_lap = A_star - np.eye(n)
        stream = NoiseStream(seed=seed, stream=STREAM_PERTURBATION)
        for attempt in range(1, max_attempts + 1):
            delta = stream.uniform(-perturbation_scale, perturbation_scale, (n, n))
            A_hat0 = np.eye(n) + (1.0 - delta) * Theta_lap
            K0 = dlqr(A_hat0, B_hat0, Q, R, tol=dare_tol, method=dare_method)
            if spectral_radius(A_star + B_star @ K0) < 1.0:
                logger.debug(f"Perturbação aceita após {attempt} tentativa(s)")
                break
        else:
            raise RuntimeError(
                f"Nenhuma perturbação estabilizante em {max_attempts} tentativas"
            )
    else:
        A_hat0 = np.eye(n)
        B_hat0 = np.eye(n)
        K0 = dlqr(A_hat0, B_hat0, Q, R, tol=dare_tol, method=dare_method)

    A_m = A_hat0 + B_hat0 @ K0
    matched = _matched_from_nominal(A_star, B_star, A_m, B_hat0)
    plant = PlantModel(A_star=A_star, B_star=B_star, sigma_w=sigma_w, name='laplacian')
    return plant, matched, K0


def quadrotor_matrices(dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """A = I₁₂ + Δt·A_c e B_m = Δt·B_c1·B_c2 (Euler)"""
    A_c = np.zeros((12, 12))
    # posições e ângulos integram velocidades
    for pos, vel in ((0, 6), (1, 7), (2, 8), (3, 9), (4, 10), (5, 11)):
        A_c[pos, vel] = 1.0
    A_c[6, 3] = QUAD_G       # v̇_x = gθ
    A_c[7, 4] = -QUAD_G      # v̇_y = −gφ

    # entradas [F, τ_y, τ_x, τ_z]
    B_c1 = np.zeros((12, 4))
    B_c1[8, 0] = 1.0 / QUAD_MASS
    B_c1[9, 1] = 1.0 / QUAD_IY
    B_c1[10, 2] = 1.0 / QUAD_IX
    B_c1[11, 3] = 1.0 / QUAD_IZ

    L, nu = QUAD_ARM, QUAD_DRAG
    B_c2 = np.array([
        [1.0, 1.0, 1.0, 1.0],
        [L, 0.0, -L, 0.0],
        [0.0, L, 0.0, -L],
        [nu, -nu, nu, -nu],
    ])
    return np.eye(12) + dt * A_c, dt * B_c1 @ B_c2


def make_quadrotor(
    dt: float = 0.01,
    epsilon: Sequence[float] = (0.5, 1.0, 1.0, 1.0),
    sigma_w: float = 0.01,
    Q=None,
    R=None,
    dare_method: str = 'scipy',
    dare_tol: float = 1e-8,
) -> Tuple[PlantModel, MatchedStructure]:
    """
    Quadrotor 6-DOF linearizado com perda de efetividade Θ_B* = diag(ε)

    A referência usa K̂₀ = dlqr(A, B_m, Q, R) e A_m = A + B_mK̂₀, logo Θ_A* = K̂₀.
    """
    if dt <= 0:
        raise ValueError("dt deve ser > 0")
    epsilon = np.asarray(epsilon, dtype=float).reshape(-1)
    if epsilon.shape != (4,):
        raise DimensionMismatch("epsilon deve ter 4 entradas")
    if np.any(epsilon <= 0):
        raise InvalidLOE(f"Entradas de LOE devem ser > 0: {epsilon.tolist()}")
    if np.any(epsilon > 1):
        logger.warning(f"LOE acima de 1 (ganho de efetividade): {epsilon.tolist()}")

    A, B_m = quadrotor_matrices(dt)
    Q = 10.0 * np.eye(12) if Q is None else as_mat(Q, rows=12, cols=12, name='Q')
    R = np.eye(4) if R is None else as_mat(R, rows=4, cols=4, name='R')
    K0 = dlqr(A, B_m, Q, R, tol=dare_tol, method=dare_method)

    Theta_B = np.diag(epsilon)
    hover = np.full(4, QUAD_MASS * QUAD_G / 4.0)
    plant = PlantModel(
        A_star=A,
        B_star=B_m @ Theta_B,
        sigma_w=sigma_w,
        input_bias=hover,
        bias_matrix=B_m,
        name='quadrotor',
    )
    matched = MatchedStructure(A_m=A + B_m @ K0, B_m=B_m, Theta_A_star=K0, Theta_B_star=Theta_B)
    return plant, matched
