# experiments/harness.py - EXECUÇÃO DE ENSAIOS, REGRET E AGREGAÇÃO MONTE CARLO

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from control.baselines import OptimalController, ce_control, ce_epoch_update, init_ce, optimal_controller
from control.control_math import solve_dare
from control.estimator import (
    ParamSet,
    init_wrls,
    lyapunov_diagnostic,
    regress_targets,
    wrls_update,
)
from control.exceptions import ControlError, IdentityViolation
from control.mrac import (
    ComparatorState,
    ExplorationConfig,
    ReferenceModel,
    comparator_step,
    control_input,
    epoch_update,
    error_model_check,
    exploration_signal,
    init_mrac,
)
from control.systems import (
    STREAM_EXPLORATION,
    STREAM_PROCESS_NOISE,
    MatchedStructure,
    NoiseStream,
    PlantModel,
    derive_trial_seed,
    make_laplacian,
    make_quadrotor,
    plant_step,
    sample_noise,
)

from .config import CONTROLLER_NAMES, ExperimentConfig, config_digest
from .exceptions import ConfigError

logger = logging.getLogger('experiments.harness')

TRIAL_COLUMNS = ('cost', 'regret', 'state_norm', 'ec_norm', 'theta_err')
SUMMARY_COLUMNS = ('regret_median', 'regret_p20', 'regret_p80', 'state_median', 'state_p20', 'state_p80')


# ===== PREPARAÇÃO =====

@dataclass(frozen=True, eq=False)
class ExperimentSetup:
    """Tudo que é comum aos ensaios de um experimento (sem estado aleatório)"""
    plant: PlantModel
    matched: MatchedStructure
    K0: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    param_set: ParamSet
    Theta0: np.ndarray
    optimal: OptimalController
    exploration: ExplorationConfig
    x0: np.ndarray

    @property
    def J_star(self) -> float:
        return self.optimal.J_star

    @property
    def ref(self) -> ReferenceModel:
        return ReferenceModel(A_m0=self.matched.A_m, B_m=self.matched.B_m)


def optimal_average_cost(plant: PlantModel, Q, R, dare_method: str = 'iteration', dare_tol: float = 1e-10) -> float:
    """J* = Tr(P*Σ_w) com Σ_w = σ_w²I"""
    P = solve_dare(plant.A_star, plant.B_star, Q, R, tol=dare_tol, method=dare_method).P
    return plant.sigma_w ** 2 * float(np.trace(P))


def build_setup(config: ExperimentConfig) -> ExperimentSetup:
    """
    Monta planta, estrutura casada, conjunto de parâmetros e controlador ótimo

    Raises:
        ConfigError: sistema não construível com os parâmetros dados
    """
    config = config.resolve()
    system, estimator, harness = config.system, config.estimator, config.harness
    n, m = system.dimensions
    Q = config.cost.q_scale * np.eye(n)
    R = config.cost.r_scale * np.eye(m)
    dare_kwargs = {'dare_method': harness.dare_method, 'dare_tol': harness.dare_tol}

    try:
        if system.name == 'laplacian':
            plant, matched, K0 = make_laplacian(
                perturbation_scale=system.perturbation_scale,
                seed=system.perturbation_seed,
                stabilizing=system.stabilizing,
                sigma_w=config.sigma_w,
                Q=Q,
                R=R,
                **dare_kwargs,
            )
        else:
            plant, matched = make_quadrotor(
                dt=system.dt, epsilon=system.epsilon, sigma_w=config.sigma_w, Q=Q, R=R, **dare_kwargs,
            )
            K0 = matched.Theta_A_star
        optimal = optimal_controller(plant, matched, Q, R, **dare_kwargs)
    except (ControlError, RuntimeError) as e:
        raise ConfigError({'system': [f"{type(e).__name__}: {e}"]}) from e

    param_set = ParamSet(
        a_center=K0,
        a_max=estimator.a_max,
        b_kind=estimator.b_kind,
        b_min=estimator.b_min,
        b_max=estimator.b_max,
        b_center=np.eye(m),
        b_radius=estimator.b_radius,
    )
    Theta_star = matched.Theta_star
    if not param_set.contains(Theta_star):
        logger.warning("Θ* fora de S_Θ: a projeção impede a convergência para os parâmetros verdadeiros")
    elif param_set.on_boundary(Theta_star):
        logger.warning("Θ* na fronteira de S_Θ: a projeção pode não parar de atuar")

    if estimator.initial_estimate == 'truth':
        Theta0 = Theta_star.copy()
    else:
        Theta0 = np.hstack([K0, np.eye(m)])

    exploration_cfg = config.exploration
    exploration = ExplorationConfig(
        mode=exploration_cfg.mode,
        C_r=exploration_cfg.C_r,
        decay_exponent=exploration_cfg.decay_exponent,
        frequencies=tuple(exploration_cfg.frequencies),
        sigma_explore=exploration_cfg.sigma_explore,
        seed=config.seed,
    )
    try:
        exploration.validate(n, m)
    except ValueError as e:
        raise ConfigError({'exploration': [str(e)]}) from e

    return ExperimentSetup(
        plant=plant,
        matched=matched,
        K0=K0,
        Q=Q,
        R=R,
        param_set=param_set,
        Theta0=Theta0,
        optimal=optimal,
        exploration=exploration,
        x0=np.asarray(system.x0, dtype=float),
    )


# ===== ENSAIO =====

@dataclass(eq=False)
class TrialResult:
    """
    Séries por passo de um ensaio

    regret[t] = Σ_{s≤t}(cost[s] − J*). Com aborto, as séries terminam no passo do aborto.
    ec_norm e theta_err são NaN quando não se aplicam ao controlador.
    """
    controller: str
    seed: int
    trial_index: int
    J_star: float
    cost: np.ndarray
    regret: np.ndarray
    state_norm: np.ndarray
    ec_norm: np.ndarray
    theta_err: np.ndarray
    aborted: bool = False
    abort_step: Optional[int] = None
    abort_reason: str = ''
    skipped_updates: int = 0
    epochs: int = 0
    max_error_model_residual: float = float('nan')
    diagnostics: Optional[Dict[str, np.ndarray]] = None

    def __len__(self):
        return len(self.cost)

    @property
    def final_regret(self) -> float:
        return float(self.regret[-1]) if len(self.regret) else 0.0

    def same_as(self, other: 'TrialResult') -> bool:
        """Igualdade bit a bit das séries e dos escalares"""
        scalars = ('controller', 'seed', 'trial_index', 'J_star', 'aborted', 'abort_step', 'skipped_updates', 'epochs')
        if any(getattr(self, name) != getattr(other, name) for name in scalars):
            return False
        return all(
            np.array_equal(getattr(self, name), getattr(other, name), equal_nan=True)
            for name in TRIAL_COLUMNS
        )


def run_trial(config: ExperimentConfig, controller: str, seed: Optional[int] = None,
              trial_index: int = 0, setup: Optional[ExperimentSetup] = None) -> TrialResult:
    """
    Simula um ensaio de config.horizon passos

    O ruído de processo e o sinal exploratório vêm de fluxos derivados da semente,
    então controladores diferentes com a mesma semente veem o mesmo w_t.

    As identidades usam tolerância relativa: o comparador aceita resíduo até
    identity_tol·max(1, ‖x_c,t+1‖) e o modelo de erro até
    identity_tol·max(1, ‖x_{t+1}‖, ‖x_c,t+1‖). max_error_model_residual guarda
    o maior resíduo já dividido por essa escala.

    Raises:
        ConfigError: controlador desconhecido
        IdentityViolation: comparador ou modelo de erro inconsistentes
    """
    if controller not in CONTROLLER_NAMES:
        raise ConfigError({'controllers': [f"Controlador desconhecido: {controller}. Válidos: {CONTROLLER_NAMES}"]})
    config = config.resolve()
    setup = setup or build_setup(config)
    if seed is None:
        seed = derive_trial_seed(config.seed, trial_index)

    plant, matched, harness = setup.plant, setup.matched, config.harness
    estimator = config.estimator
    n, m = plant.n, plant.m
    T = config.horizon
    Q, R = setup.Q, setup.R
    J_star = setup.J_star
    Theta_star = matched.Theta_star
    bias = plant.input_bias
    u_offset = setup.optimal.bias_input if setup.optimal.bias_input is not None else np.zeros(m)
    dare_kwargs = {'dare_method': harness.dare_method, 'dare_tol': harness.dare_tol}
    wrls_kwargs = {
        'projection_tol': estimator.projection_tol,
        'projection_max_iter': estimator.projection_max_iter,
        'resync_every': estimator.resync_every,
    }

    noise = NoiseStream(seed=seed, stream=STREAM_PROCESS_NOISE)
    explore_stream = NoiseStream(seed=seed, stream=STREAM_EXPLORATION)

    cost = np.full(T, np.nan)
    regret = np.full(T, np.nan)
    state_norm = np.full(T, np.nan)
    ec_norm = np.full(T, np.nan)
    theta_err = np.full(T, np.nan)
    diagnostics = None
    if harness.record_diagnostics:
        diagnostics = {'prediction_error': np.full(T, np.nan), 'lyapunov': np.full(T, np.nan)}
        if controller == 'mrac_lqr':
            diagnostics['comparator_norm'] = np.full(T, np.nan)

    adaptive = controller != 'optimal'
    state = None
    cstate = None
    if adaptive:
        wrls = init_wrls(setup.Theta0, sigma0=estimator.sigma0, gamma=estimator.gamma)
        if controller == 'ce':
            state = init_ce(wrls, setup.ref, setup.K0, config.schedule.mode, config.schedule.C_T)
        else:
            state = init_mrac(wrls, setup.ref, config.schedule.mode, config.schedule.C_T)
            cstate = ComparatorState(x_c=setup.x0.copy())

    x = setup.x0.copy()
    total = 0.0
    max_residual = 0.0 if controller == 'mrac_lqr' and harness.check_error_model else float('nan')
    aborted, abort_step, abort_reason = False, None, ''
    length = T

    for t in range(T):
        w = sample_noise(noise, n, plant.sigma_w)

        try:
            if controller == 'optimal':
                r = np.zeros(m)
                u = setup.optimal.control(x)
            else:
                r = exploration_signal(setup.exploration, state.epoch_k, t, explore_stream, m, n)
                if controller == 'ce':
                    u = ce_control(state, x, r, bias)
                else:
                    u = control_input(state, x, r, bias)
        except ControlError as e:
            aborted, abort_step, abort_reason, length = True, t, f"{type(e).__name__}: {e}", t
            break

        x_next = plant_step(plant, x, u, w)
        u_eff = u - u_offset
        step_cost = float(x @ Q @ x + u_eff @ R @ u_eff)
        total += step_cost - J_star
        cost[t] = step_cost
        regret[t] = total
        state_norm[t] = np.linalg.norm(x)

        if adaptive:
            try:
                wrls = state.wrls
                reg = regress_targets(x_next, x, u, state.ref, bias)
                theta_tilde = wrls.Theta_hat - Theta_star
                theta_err[t] = np.linalg.norm(theta_tilde, 'fro')
                if diagnostics is not None:
                    diagnostics['prediction_error'][t] = np.linalg.norm(theta_tilde @ reg.phi)
                    diagnostics['lyapunov'][t] = lyapunov_diagnostic(wrls, Theta_star)

                if cstate is not None:
                    ec_norm[t] = np.linalg.norm(x - cstate.x_c)
                    if diagnostics is not None:
                        diagnostics['comparator_norm'][t] = np.linalg.norm(cstate.x_c)
                    next_cstate, _ = comparator_step(
                        cstate, state.ref, r, w, plant, matched, state.theta_offset, tol=harness.identity_tol,
                    )
                    if harness.check_error_model:
                        residual = error_model_check(
                            x, cstate.x_c, x_next, next_cstate.x_c, state.ref, wrls, reg.phi, Theta_star,
                        )
                        scale = max(1.0, float(np.linalg.norm(x_next)), float(np.linalg.norm(next_cstate.x_c)))
                        if residual > harness.identity_tol * scale:
                            raise IdentityViolation(
                                f"Modelo de erro violado no passo {t} (resíduo {residual:.3e})",
                                residual=residual,
                                step=t,
                            )
                        max_residual = max(max_residual, residual / scale)
                    cstate = next_cstate

                state = replace(state, wrls=wrls_update(wrls, reg, setup.param_set, **wrls_kwargs))
                if t + 1 == state.epoch_end:
                    if controller == 'ce':
                        state = ce_epoch_update(state, Q, R, **dare_kwargs)
                    else:
                        state = epoch_update(state, Q, R, **dare_kwargs)
            except IdentityViolation:
                raise
            except ControlError as e:
                aborted, abort_step, abort_reason, length = True, t + 1, f"{type(e).__name__}: {e}", t + 1
                break

        x = x_next
        x_norm = float(np.linalg.norm(x))
        if not math.isfinite(x_norm) or x_norm > harness.blowup_threshold:
            aborted, abort_step, abort_reason, length = True, t + 1, f"‖x‖ = {x_norm:.3e}", t + 1
            break

    if aborted:
        logger.warning(f"Ensaio {trial_index} ({controller}, semente {seed}) abortado no passo {abort_step}: {abort_reason}")
        cost, regret, state_norm = cost[:length], regret[:length], state_norm[:length]
        ec_norm, theta_err = ec_norm[:length], theta_err[:length]
        if diagnostics is not None:
            diagnostics = {key: value[:length] for key, value in diagnostics.items()}

    return TrialResult(
        controller=controller,
        seed=seed,
        trial_index=trial_index,
        J_star=J_star,
        cost=cost,
        regret=regret,
        state_norm=state_norm,
        ec_norm=ec_norm,
        theta_err=theta_err,
        aborted=aborted,
        abort_step=abort_step,
        abort_reason=abort_reason,
        skipped_updates=state.skipped_updates if state is not None else 0,
        epochs=state.epoch_k if state is not None else 0,
        max_error_model_residual=max_residual,
        diagnostics=diagnostics,
    )


# ===== MONTE CARLO =====

@dataclass(eq=False)
class McSummary:
    """Mediana e percentis 20/80 por passo do regret e de ‖x‖"""
    controller: str
    n_trials: int
    aborted_trials: int
    config_digest: str
    J_star: float
    regret_median: np.ndarray
    regret_p20: np.ndarray
    regret_p80: np.ndarray
    state_median: np.ndarray
    state_p20: np.ndarray
    state_p80: np.ndarray
    trials: List[TrialResult] = field(default_factory=list, repr=False)

    @property
    def horizon(self) -> int:
        return len(self.regret_median)

    @property
    def median_final_regret(self) -> float:
        return float(self.regret_median[-1]) if self.horizon else float('nan')

    @classmethod
    def empty(cls, controller: str, config_digest: str = '', J_star: float = 0.0) -> 'McSummary':
        blank = np.zeros(0)
        return cls(controller, 0, 0, config_digest, J_star, blank, blank, blank, blank, blank, blank)

    def same_as(self, other: 'McSummary') -> bool:
        if (self.controller, self.n_trials, self.aborted_trials, self.config_digest) != (
            other.controller, other.n_trials, other.aborted_trials, other.config_digest
        ):
            return False
        return all(np.array_equal(getattr(self, name), getattr(other, name)) for name in SUMMARY_COLUMNS)


def _pad_forward(series: np.ndarray, length: int) -> np.ndarray:
    """Repete o último valor até o horizonte (ensaios abortados continuam contando)"""
    if len(series) >= length:
        return series[:length]
    fill = series[-1] if len(series) else 0.0
    return np.concatenate([series, np.full(length - len(series), fill)])


def summarize(results: Sequence[TrialResult], controller: str, config_digest: str, horizon: int,
              J_star: float, keep_trials: bool = False) -> McSummary:
    """Redução pura sobre ensaios concluídos; independe da ordem"""
    if not results:
        return McSummary.empty(controller, config_digest, J_star)
    regrets = np.vstack([_pad_forward(result.regret, horizon) for result in results])
    states = np.vstack([_pad_forward(result.state_norm, horizon) for result in results])
    regret_p20, regret_median, regret_p80 = np.percentile(regrets, [20, 50, 80], axis=0)
    state_p20, state_median, state_p80 = np.percentile(states, [20, 50, 80], axis=0)
    return McSummary(
        controller=controller,
        n_trials=len(results),
        aborted_trials=sum(1 for result in results if result.aborted),
        config_digest=config_digest,
        J_star=J_star,
        regret_median=regret_median,
        regret_p20=regret_p20,
        regret_p80=regret_p80,
        state_median=state_median,
        state_p20=state_p20,
        state_p80=state_p80,
        trials=sorted(results, key=lambda result: result.trial_index) if keep_trials else [],
    )


def _trial_job(args):
    config, controller, trial_index, setup = args
    return run_trial(config, controller, trial_index=trial_index, setup=setup)


def run_monte_carlo(config: ExperimentConfig, controller: str, n_trials: Optional[int] = None,
                    parallelism: int = 1, setup: Optional[ExperimentSetup] = None,
                    keep_trials: bool = False) -> McSummary:
    """
    n_trials ensaios com sementes seed ⊕ índice, agregados por passo

    O resultado não depende de parallelism nem da ordem de execução.
    """
    config = config.resolve()
    n_trials = config.trials if n_trials is None else n_trials
    if n_trials < 1:
        raise ConfigError({'trials': ['Deve ser >= 1.']})
    setup = setup or build_setup(config)
    jobs = [(config, controller, index, setup) for index in range(n_trials)]

    logger.info(f"Monte Carlo: {n_trials} ensaios de {controller} (paralelismo {parallelism})")
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as executor:
            results = list(executor.map(_trial_job, jobs))
    else:
        results = [_trial_job(job) for job in jobs]

    summary = summarize(results, controller, config_digest(config), config.horizon, setup.J_star, keep_trials)
    logger.info(
        f"{controller}: regret final mediano {summary.median_final_regret:.4g}, "
        f"{summary.aborted_trials} ensaio(s) abortado(s)"
    )
    return summary


# ===== AUXILIARES DE ANÁLISE =====

@dataclass(frozen=True, eq=False)
class FixedLoopTrajectory:
    """Trajetória de u = Kx + r com ganho fixo"""
    phi: np.ndarray
    r: np.ndarray
    x: np.ndarray


def simulate_fixed_loop(plant: PlantModel, K, exploration: ExplorationConfig, T0: int, seed: int,
                        x0=None, k: int = 0, bias_input=None) -> FixedLoopTrajectory:
    """Malha fixa para análise de excitação; φ_t = [−x_tᵀ, u_tᵀ]ᵀ"""
    K = np.asarray(K, dtype=float)
    n, m = plant.n, plant.m
    noise = NoiseStream(seed=seed, stream=STREAM_PROCESS_NOISE)
    explore_stream = NoiseStream(seed=seed, stream=STREAM_EXPLORATION)
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()

    phi = np.empty((T0, n + m))
    r_series = np.empty((T0, m))
    states = np.empty((T0, n))
    for t in range(T0):
        r = exploration_signal(exploration, k, t, explore_stream, m, n)
        u = K @ x + r
        if bias_input is not None:
            u = u + bias_input
        phi[t, :n] = -x
        phi[t, n:] = u
        r_series[t] = r
        states[t] = x
        x = plant_step(plant, x, u, sample_noise(noise, n, plant.sigma_w))
    return FixedLoopTrajectory(phi=phi, r=r_series, x=states)


def loglog_slope(series, start_fraction: float = 0.1) -> float:
    """Inclinação de mínimos quadrados de log(série) vs log(t) a partir de start_fraction·T"""
    series = np.asarray(series, dtype=float)
    t = np.arange(1, len(series) + 1, dtype=float)
    mask = (t >= start_fraction * len(series)) & (series > 0) & np.isfinite(series)
    if np.count_nonzero(mask) < 2:
        return float('nan')
    slope, _ = np.polyfit(np.log(t[mask]), np.log(series[mask]), 1)
    return float(slope)
