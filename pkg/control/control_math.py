# control/control_math.py - KERNELS DE ÁLGEBRA LINEAR PARA CONTROLE

from dataclasses import dataclass
import logging
from typing import Optional

import numpy as np
import scipy.linalg

from .exceptions import (
    DimensionMismatch,
    IllConditioned,
    NonConvergence,
    UnstableMatrix,
)

logger = logging.getLogger('control.control_math')

DARE_METHODS = ('iteration', 'scipy')

# Limite de condição para (R + BᵀPB) e demais sistemas lineares
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class DareSolution:
    """Solução da equação de Riccati discreta com o ganho LQR associado"""
    P: np.ndarray
    K: np.ndarray
    residual: float
    iterations: int


def as_mat(value, rows: Optional[int] = None, cols: Optional[int] = None, name: str = 'matriz') -> np.ndarray:
    """
    Converte para matriz densa float64 e valida forma e finitude

    Raises:
        DimensionMismatch: forma diferente da esperada
        ValueError: entradas não finitas
    """
    mat = np.atleast_2d(np.asarray(value, dtype=float))
    if mat.ndim != 2:
        raise DimensionMismatch(f"{name}: esperado 2D, recebido {mat.ndim}D")
    if rows is not None and mat.shape[0] != rows:
        raise DimensionMismatch(f"{name}: esperado {rows} linhas, recebido {mat.shape[0]}")
    if cols is not None and mat.shape[1] != cols:
        raise DimensionMismatch(f"{name}: esperado {cols} colunas, recebido {mat.shape[1]}")
    if not np.all(np.isfinite(mat)):
        raise ValueError(f"{name}: entradas não finitas")
    return mat


def symmetrize(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.T)


def spectral_radius(A) -> float:
    """Maior módulo de autovalor (Hessenberg + QR via LAPACK)"""
    A = as_mat(A, name='A')
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A deve ser quadrada, recebido {A.shape}")
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def dare_residual(A, B, Q, R, P) -> float:
    """‖AᵀPA − AᵀPB(R+BᵀPB)⁻¹BᵀPA + Q − P‖_F"""
    K = _gain_from_P(A, B, R, P)
    rhs = A.T @ P @ A + A.T @ P @ B @ K + Q
    return float(np.linalg.norm(rhs - P, 'fro'))


def _gain_from_P(A, B, R, P) -> np.ndarray:
    """K = −(R + BᵀPB)⁻¹BᵀPA, com o sinal negativo: u = Kx"""
    BtP = B.T @ P
    G = R + BtP @ B
    if np.linalg.cond(G) > MAX_CONDITION:
        raise IllConditioned("R + BᵀPB numericamente singular")
    return -np.linalg.solve(G, BtP @ A)


def _check_dims(A, B, Q, R):
    A = as_mat(A, name='A')
    n = A.shape[0]
    if A.shape[1] != n:
        raise DimensionMismatch(f"A deve ser quadrada, recebido {A.shape}")
    B = as_mat(B, rows=n, name='B')
    m = B.shape[1]
    Q = as_mat(Q, rows=n, cols=n, name='Q')
    R = as_mat(R, rows=m, cols=m, name='R')
    return A, B, Q, R


def solve_dare(A, B, Q, R, tol: float = 1e-10, max_iter: int = 100_000,
               method: str = 'iteration') -> DareSolution:
    """
    Resolve a DARE e devolve (P, K, resíduo, iterações)

    method='iteration': iteração de valor P₀ = Q, P_{k+1} = rhs(P_k).
    method='scipy': solve_discrete_are refinado por passos de Newton-Hewer.

    Raises:
        NonConvergence: resíduo > tol após max_iter, ou malha fechada instável
        IllConditioned: R + BᵀPB numericamente singular
    """
    A, B, Q, R = _check_dims(A, B, Q, R)
    if method == 'iteration':
        solution = _value_iteration(A, B, Q, R, tol, max_iter)
    elif method == 'scipy':
        solution = _scipy_newton(A, B, Q, R, tol)
    else:
        raise ValueError(f"Método DARE desconhecido: {method}. Válidos: {DARE_METHODS}")

    rho = spectral_radius(A + B @ solution.K)
    if rho >= 1.0:
        raise NonConvergence(
            f"Ganho da DARE não estabiliza a malha fechada (raio espectral {rho:.6f})",
            residual=solution.residual,
            iterations=solution.iterations,
        )
    return solution


def _value_iteration(A, B, Q, R, tol, max_iter) -> DareSolution:
    P = Q.copy()
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        K = _gain_from_P(A, B, R, P)
        P_next = symmetrize(A.T @ P @ A + A.T @ P @ B @ K + Q)
        if not np.all(np.isfinite(P_next)):
            raise NonConvergence("Iteração de valor divergiu", iterations=iteration)
        # resíduo de P é exatamente ‖rhs(P) − P‖
        residual = float(np.linalg.norm(P_next - P, 'fro'))
        if residual <= tol:
            return DareSolution(P=P, K=K, residual=residual, iterations=iteration)
        P = P_next

    raise NonConvergence(
        f"DARE não convergiu em {max_iter} iterações (resíduo {residual:.3e})",
        residual=residual,
        iterations=max_iter,
    )


def _scipy_newton(A, B, Q, R, tol, max_newton: int = 50) -> DareSolution:
    try:
        P = symmetrize(scipy.linalg.solve_discrete_are(A, B, Q, R))
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NonConvergence(f"solve_discrete_are falhou: {e}") from e

    residual = np.inf
    for iteration in range(1, max_newton + 1):
        K = _gain_from_P(A, B, R, P)
        residual = dare_residual(A, B, Q, R, P)
        if residual <= tol:
            return DareSolution(P=P, K=K, residual=residual, iterations=iteration)
        # passo de Hewer: Lyapunov da malha fechada com o ganho atual
        A_K = A + B @ K
        P = solve_dlyap(A_K, Q + K.T @ R @ K)

    raise NonConvergence(
        f"Refinamento de Newton não atingiu tol={tol:.1e} (resíduo {residual:.3e})",
        residual=residual,
        iterations=max_newton,
    )


def dlqr(A, B, Q, R, tol: float = 1e-10, max_iter: int = 100_000, method: str = 'iteration') -> np.ndarray:
    """Ganho ótimo K = dlqr(A, B, Q, R); delega para solve_dare"""
    return solve_dare(A, B, Q, R, tol=tol, max_iter=max_iter, method=method).K


def solve_dlyap(A, Qrhs) -> np.ndarray:
    """
    Resolve AᵀPA − P + Qrhs = 0 pelo sistema n²×n² da vetorização

    vec(AᵀPA) = (Aᵀ ⊗ Aᵀ) vec(P) com vec empilhando colunas.

    Raises:
        UnstableMatrix: raio espectral de A >= 1 − 1e-9
    """
    A = as_mat(A, name='A')
    n = A.shape[0]
    Qrhs = as_mat(Qrhs, rows=n, cols=n, name='Qrhs')

    rho = spectral_radius(A)
    if rho >= 1.0 - 1e-9:
        raise UnstableMatrix(f"Lyapunov discreto exige raio espectral < 1 (recebido {rho:.6f})")

    lhs = np.eye(n * n) - np.kron(A.T, A.T)
    vec_P = np.linalg.solve(lhs, Qrhs.flatten(order='F'))
    return symmetrize(vec_P.reshape((n, n), order='F'))


def lyapunov_residual(A, P, Qrhs) -> float:
    return float(np.linalg.norm(A.T @ P @ A - P + Qrhs, 'fro'))
