# experiments/excitation.py - ANÁLISE DE EXCITAÇÃO POR LINHAS ESPECTRAIS

from dataclasses import dataclass
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from control.control_math import solve_dlyap, symmetrize
from control.exceptions import DimensionMismatch, WindowTooShort
from control.mrac import ExplorationConfig, channel_phases, sinusoid_frequencies

logger = logging.getLogger('experiments.excitation')


@dataclass(eq=False)
class ExcitationReport:
    """
    Amplitudes empíricas e previstas de φ_t numa janela [t0, t0 + T0)

    As linhas espectrais incluem ±ωᵢ: um seno real tem amplitude nas duas.
    """
    t0: int
    T0: int
    frequencies: Tuple[float, ...]
    line_frequencies: Tuple[float, ...]
    empirical_amplitudes: np.ndarray
    information_matrix: np.ndarray
    lambda_min: float
    predicted_amplitudes: Optional[np.ndarray] = None
    predicted_information: Optional[np.ndarray] = None
    predicted_lambda_min: Optional[float] = None
    alpha: Optional[float] = None
    amplitude_errors: Optional[np.ndarray] = None

    @property
    def dimension(self) -> int:
        return self.information_matrix.shape[0]

    @property
    def lower_bound(self) -> Optional[float]:
        """α/d"""
        return None if self.alpha is None else self.alpha / self.dimension

    @property
    def bound_holds(self) -> Optional[bool]:
        return None if self.alpha is None else bool(self.lambda_min >= self.lower_bound)

    def to_dict(self) -> dict:
        data = {
            't0': self.t0,
            'T0': self.T0,
            'frequencies': list(self.frequencies),
            'line_frequencies': list(self.line_frequencies),
            'empirical_amplitudes': _complex_to_lists(self.empirical_amplitudes),
            'information_matrix': self.information_matrix.tolist(),
            'lambda_min': self.lambda_min,
        }
        if self.predicted_amplitudes is not None:
            data.update({
                'predicted_amplitudes': _complex_to_lists(self.predicted_amplitudes),
                'predicted_information': self.predicted_information.tolist(),
                'predicted_lambda_min': self.predicted_lambda_min,
                'alpha': self.alpha,
                'lower_bound': self.lower_bound,
                'bound_holds': self.bound_holds,
                'amplitude_errors': self.amplitude_errors.tolist(),
            })
        return data


def _complex_to_lists(values: np.ndarray) -> dict:
    return {'real': np.real(values).tolist(), 'imag': np.imag(values).tolist()}


def spectral_lines(frequencies: Sequence[float]) -> Tuple[float, ...]:
    """ω₁..ω_k seguidos de −ω₁..−ω_k (ω = 0 não se repete)"""
    positive = tuple(float(w) for w in frequencies)
    return positive + tuple(-w for w in positive if w != 0.0)


def dft_amplitude(segment: np.ndarray, times: np.ndarray, omega: float) -> np.ndarray:
    """(1/T0)Σ φ_t e^{−iωt} com ω em rad/passo"""
    return segment.T @ np.exp(-1j * omega * times) / len(times)


def sinusoid_amplitudes(exploration: ExplorationConfig, m: int, k: int = 0, n: Optional[int] = None) -> np.ndarray:
    """
    r̄(ωᵢ) em +ωᵢ para r_j(t) = A·Σᵢ sin(ωᵢt + θ_ji)

    Entrada (j, i): A·e^{iθ_ji}/(2i). Sem frequências explícitas, n define as padrão.
    """
    if exploration.mode != 'sinusoidal':
        raise ValueError("Amplitudes de linha só existem no modo senoidal")
    amplitude = exploration.C_r * 2.0 ** (-k * exploration.decay_exponent)
    return amplitude * np.exp(1j * channel_phases(m, len(sinusoid_frequencies(exploration, n, m)))) / 2j


def predicted_line(A_K, B, K, omega: float, r_bar) -> np.ndarray:
    """φ̄(ω) = [−G; KG + I]r̄ com G = (e^{iω}I − A_K)⁻¹B"""
    n = A_K.shape[0]
    G = np.linalg.solve(np.exp(1j * omega) * np.eye(n) - A_K, B)
    return np.concatenate([-G @ r_bar, (K @ G + np.eye(K.shape[0])) @ r_bar])


def noise_information(A_K, K, sigma_w: float) -> np.ndarray:
    """E[φφᵀ] do ruído: X = A_K X A_Kᵀ + σ_w²I e φ = [−x; Kx]"""
    n = A_K.shape[0]
    if sigma_w == 0:
        d = n + K.shape[0]
        return np.zeros((d, d))
    X = solve_dlyap(A_K.T, sigma_w ** 2 * np.eye(n))
    XKt = X @ K.T
    return np.block([[X, -XKt], [-XKt.T, K @ XKt]])


def analyze_excitation(
    phi,
    window: Tuple[int, int],
    frequencies: Sequence[float],
    A_K=None,
    B=None,
    K=None,
    r_amplitudes=None,
    sigma_w: float = 0.0,
) -> ExcitationReport:
    """
    Amplitudes DFT, matriz de informação e, com a malha fechada, a previsão

    r_amplitudes: m × len(frequencies) com r̄(ωᵢ) em +ωᵢ.

    Raises:
        WindowTooShort: T0 < 2·d ou janela além da trajetória
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    t0, T0 = int(window[0]), int(window[1])
    d = phi.shape[1]
    if T0 < 2 * d:
        raise WindowTooShort(f"Janela de {T0} passos; mínimo 2·d = {2 * d}")
    if t0 < 0 or t0 + T0 > phi.shape[0]:
        raise WindowTooShort(f"Janela [{t0}, {t0 + T0}) excede a trajetória de {phi.shape[0]} passos")

    segment = phi[t0:t0 + T0]
    times = np.arange(t0, t0 + T0, dtype=float)
    lines = spectral_lines(frequencies)
    empirical = np.column_stack([dft_amplitude(segment, times, w) for w in lines]) if lines else np.zeros((d, 0), complex)
    info = symmetrize(segment.T @ segment / T0)
    lambda_min = float(np.linalg.eigvalsh(info)[0])

    report = ExcitationReport(
        t0=t0,
        T0=T0,
        frequencies=tuple(float(w) for w in frequencies),
        line_frequencies=lines,
        empirical_amplitudes=empirical,
        information_matrix=info,
        lambda_min=lambda_min,
    )
    if A_K is None or B is None or K is None or r_amplitudes is None:
        return report

    A_K, B, K = (np.asarray(mat, dtype=float) for mat in (A_K, B, K))
    if A_K.shape[0] + K.shape[0] != d:
        raise DimensionMismatch(f"Malha fechada incompatível com φ de dimensão {d}")
    r_amplitudes = np.asarray(r_amplitudes, dtype=complex)

    positive = [predicted_line(A_K, B, K, w, r_amplitudes[:, i]) for i, w in enumerate(report.frequencies)]
    negative = [np.conj(line) for line, w in zip(positive, report.frequencies) if w != 0.0]
    Phi = np.column_stack(positive + negative)

    predicted_info = symmetrize(np.real(Phi @ Phi.conj().T)) + noise_information(A_K, K, sigma_w)
    singular = np.linalg.svd(Phi, compute_uv=False)
    alpha = float(singular[-1] ** 2) if Phi.shape[1] >= d else 0.0
    errors = np.linalg.norm(empirical - Phi, axis=0) / np.maximum(np.linalg.norm(Phi, axis=0), 1e-300)

    report.predicted_amplitudes = Phi
    report.predicted_information = predicted_info
    report.predicted_lambda_min = float(np.linalg.eigvalsh(predicted_info)[0])
    report.alpha = alpha
    report.amplitude_errors = errors
    logger.debug(
        f"Excitação: λ_min empírico {lambda_min:.4g}, previsto {report.predicted_lambda_min:.4g}, α/d {alpha / d:.4g}"
    )
    return report
