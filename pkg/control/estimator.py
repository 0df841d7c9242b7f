# control/estimator.py - ESTIMADOR WRLS-PROJ (MÍNIMOS QUADRADOS PONDERADOS COM PROJEÇÃO)

from dataclasses import dataclass, replace
import logging
import math
from typing import Optional

import numpy as np

from .control_math import symmetrize
from .exceptions import DimensionMismatch, NonConvergence, NumericalBreakdown, RankDeficient

logger = logging.getLogger('control.estimator')

B_SET_KINDS = ('diagonal_box', 'frobenius_ball')


@dataclass(frozen=True, eq=False)
class Regressor:
    """Par (φ, y) da forma de regressão y_{t+1} = Θ*φ_t + η_{t+1}"""
    phi: np.ndarray
    y: np.ndarray


@dataclass(frozen=True, eq=False)
class WrlsState:
    """Estado do WRLS-PROJ: Θ̂ = [Θ̂_A, Θ̂_B], Σ, Σ⁻¹, z e γ"""
    Theta_hat: np.ndarray
    Sigma: np.ndarray
    Sigma_inv: np.ndarray
    z: float
    gamma: float
    steps: int = 0
    alpha: Optional[float] = None

    @property
    def m(self) -> int:
        return self.Theta_hat.shape[0]

    @property
    def n(self) -> int:
        return self.Theta_hat.shape[1] - self.Theta_hat.shape[0]

    @property
    def Theta_A(self) -> np.ndarray:
        return self.Theta_hat[:, :self.n]

    @property
    def Theta_B(self) -> np.ndarray:
        return self.Theta_hat[:, self.n:]


@dataclass(frozen=True, eq=False)
class ParamSet:
    """
    Conjunto convexo e compacto S_Θ = S_A × S_B

    S_A: bola de Frobenius ‖Θ_A − a_center‖_F ≤ a_max.
    S_B: 'diagonal_box' (Θ_B diagonal, sinal_i·Θ_B[i,i] ∈ [b_min, b_max]) ou
    'frobenius_ball' (‖Θ_B − b_center‖_F ≤ b_radius).
    """
    a_center: np.ndarray
    a_max: float
    b_kind: str = 'diagonal_box'
    b_min: float = 0.25
    b_max: float = 1.75
    signs: Optional[np.ndarray] = None
    b_center: Optional[np.ndarray] = None
    b_radius: Optional[float] = None

    def __post_init__(self):
        a_center = np.atleast_2d(np.asarray(self.a_center, dtype=float))
        object.__setattr__(self, 'a_center', a_center)
        m = a_center.shape[0]
        if self.a_max <= 0:
            raise ValueError("a_max deve ser > 0")
        if self.b_kind not in B_SET_KINDS:
            raise ValueError(f"Tipo de S_B inválido: {self.b_kind}. Válidos: {B_SET_KINDS}")

        if self.b_kind == 'diagonal_box':
            if not 0 < self.b_min <= self.b_max:
                raise ValueError("Caixa diagonal exige 0 < b_min <= b_max")
            signs = np.ones(m) if self.signs is None else np.sign(np.asarray(self.signs, dtype=float))
            if signs.shape != (m,) or np.any(signs == 0):
                raise ValueError(f"signs deve ter {m} entradas ±1")
            object.__setattr__(self, 'signs', signs)
        else:
            if self.b_center is None or self.b_radius is None or self.b_radius <= 0:
                raise ValueError("Bola de Frobenius em S_B exige b_center e b_radius > 0")
            object.__setattr__(self, 'b_center', np.atleast_2d(np.asarray(self.b_center, dtype=float)))

    @property
    def m(self) -> int:
        return self.a_center.shape[0]

    @property
    def n(self) -> int:
        return self.a_center.shape[1]

    def box_bounds(self):
        """Limites (lo, hi) da diagonal de Θ_B por linha"""
        lo = np.where(self.signs > 0, self.b_min, -self.b_max)
        hi = np.where(self.signs > 0, self.b_max, -self.b_min)
        return lo, hi

    def center(self) -> np.ndarray:
        if self.b_kind == 'diagonal_box':
            B = np.diag(self.signs * 0.5 * (self.b_min + self.b_max))
        else:
            B = self.b_center.copy()
        return np.hstack([self.a_center, B])

    def contains(self, Theta, tol: float = 1e-12) -> bool:
        Theta_A, Theta_B = Theta[:, :self.n], Theta[:, self.n:]
        if np.linalg.norm(Theta_A - self.a_center, 'fro') > self.a_max * (1 + tol) + tol:
            return False
        if self.b_kind == 'diagonal_box':
            off_diag = Theta_B - np.diag(np.diag(Theta_B))
            if np.max(np.abs(off_diag), initial=0.0) > tol:
                return False
            lo, hi = self.box_bounds()
            diag = np.diag(Theta_B)
            return bool(np.all(diag >= lo - tol) and np.all(diag <= hi + tol))
        return bool(np.linalg.norm(Theta_B - self.b_center, 'fro') <= self.b_radius * (1 + tol) + tol)

    def euclidean_project(self, Theta) -> np.ndarray:
        """Projeção euclidiana no produto S_A × S_B (separável)"""
        out = np.array(Theta, dtype=float, copy=True)
        n = self.n
        dA = out[:, :n] - self.a_center
        norm_A = np.linalg.norm(dA, 'fro')
        if norm_A > self.a_max:
            out[:, :n] = self.a_center + dA * (self.a_max / norm_A)
        if self.b_kind == 'diagonal_box':
            lo, hi = self.box_bounds()
            out[:, n:] = np.diag(np.clip(np.diag(out[:, n:]), lo, hi))
        else:
            dB = out[:, n:] - self.b_center
            norm_B = np.linalg.norm(dB, 'fro')
            if norm_B > self.b_radius:
                out[:, n:] = self.b_center + dB * (self.b_radius / norm_B)
        return out

    def on_boundary(self, Theta, rel_margin: float = 1e-6) -> bool:
        """Θ fora do interior (margem relativa) do conjunto"""
        Theta_A, Theta_B = Theta[:, :self.n], Theta[:, self.n:]
        if np.linalg.norm(Theta_A - self.a_center, 'fro') >= self.a_max * (1 - rel_margin):
            return True
        if self.b_kind == 'diagonal_box':
            lo, hi = self.box_bounds()
            diag = np.diag(Theta_B)
            width = self.b_max - self.b_min
            margin = rel_margin * max(width, 1.0)
            return bool(np.any(diag <= lo + margin) or np.any(diag >= hi - margin))
        return bool(np.linalg.norm(Theta_B - self.b_center, 'fro') >= self.b_radius * (1 - rel_margin))


# ===== ESTADO INICIAL E REGRESSÃO =====

def init_wrls(Theta0, sigma0: float = 10.0, gamma: float = 0.5) -> WrlsState:
    """Σ₀ = σ₀²I e z₀ = ‖Σ₀⁻¹‖₂"""
    Theta0 = np.atleast_2d(np.asarray(Theta0, dtype=float))
    if sigma0 <= 0:
        raise ValueError("sigma0 deve ser > 0")
    if gamma <= 0:
        raise ValueError("gamma deve ser > 0")
    d = Theta0.shape[1]
    Sigma0 = (sigma0 ** 2) * np.eye(d)
    Sigma0_inv = np.eye(d) / (sigma0 ** 2)
    z0 = float(np.linalg.norm(Sigma0_inv, 2))
    if z0 <= math.e:
        logger.debug(f"z₀ = {z0:.3g} <= e; α limitado a 1 até z superar e")
    return WrlsState(Theta_hat=Theta0, Sigma=Sigma0, Sigma_inv=Sigma0_inv, z=z0, gamma=gamma)


def regress_targets(x_next, x, u, ref, input_bias=None) -> Regressor:
    """
    φ = [−xᵀ, uᵀ]ᵀ e y = (B_mᵀB_m)⁻¹B_mᵀ(x_next − A_m x) (+ b quando há viés)

    Usa a referência fixa A_m0. O viés b devolve ao alvo o termo −B_m b da planta.
    """
    B_m = ref.B_m
    gram = B_m.T @ B_m
    if np.linalg.cond(gram) > 1e12:
        raise RankDeficient("B_mᵀB_m numericamente singular")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    y = np.linalg.solve(gram, B_m.T @ (np.asarray(x_next, dtype=float) - ref.A_m0 @ x))
    if input_bias is not None:
        y = y + input_bias
    return Regressor(phi=np.concatenate([-x, u]), y=y)


def alpha_weight(z: float, gamma: float) -> float:
    """α = 1/log^{1+γ}(z), limitado a 1 para z <= e"""
    if z <= math.e:
        return 1.0
    return 1.0 / math.log(z) ** (1.0 + gamma)


# ===== ATUALIZAÇÃO =====

def wrls_update(
    state: WrlsState,
    reg: Regressor,
    param_set: ParamSet,
    projection_tol: float = 1e-10,
    projection_max_iter: int = 10_000,
    resync_every: int = 1000,
) -> WrlsState:
    """Um passo do WRLS-PROJ: peso, covariância, parâmetro e projeção"""
    phi = reg.phi
    if phi.shape != (state.Theta_hat.shape[1],) or reg.y.shape != (state.m,):
        raise DimensionMismatch("Regressor incompatível com Θ̂")

    z_next = state.z + float(phi @ phi)
    alpha = alpha_weight(z_next, state.gamma)

    Sigma_phi = state.Sigma @ phi
    denom = 1.0 / alpha + float(phi @ Sigma_phi)
    if not denom > 0:
        raise NumericalBreakdown(f"α⁻¹ + φᵀΣφ = {denom} <= 0")

    Sigma_next = symmetrize(state.Sigma - np.outer(Sigma_phi, Sigma_phi) / denom)
    Sigma_inv_next = state.Sigma_inv + alpha * np.outer(phi, phi)

    steps = state.steps + 1
    if resync_every and steps % resync_every == 0:
        Sigma_next = symmetrize(np.linalg.inv(Sigma_inv_next))

    innovation = reg.y - state.Theta_hat @ phi
    Theta_prime = state.Theta_hat + alpha * np.outer(innovation, Sigma_next @ phi)
    Theta_next = project(Theta_prime, Sigma_inv_next, param_set, projection_tol, projection_max_iter)

    return replace(
        state,
        Theta_hat=Theta_next,
        Sigma=Sigma_next,
        Sigma_inv=Sigma_inv_next,
        z=z_next,
        steps=steps,
        alpha=alpha,
    )


def sherman_morrison_error(state: WrlsState) -> float:
    """Erro relativo de Frobenius entre inv(Σ) e Σ⁻¹ mantidos"""
    return float(
        np.linalg.norm(np.linalg.inv(state.Sigma) - state.Sigma_inv, 'fro')
        / np.linalg.norm(state.Sigma_inv, 'fro')
    )


# ===== PROJEÇÃO PONDERADA =====

def projection_objective(Theta, Theta_prime, Sigma_inv) -> float:
    """Tr[(Θ − Θ′)Σ⁻¹(Θ − Θ′)ᵀ]"""
    D = Theta - Theta_prime
    return float(np.trace(D @ Sigma_inv @ D.T))


def project(Theta_prime, Sigma_inv, param_set: ParamSet, tol: float = 1e-10,
            max_iter: int = 10_000) -> np.ndarray:
    """
    proj_{S_Θ|Σ⁻¹}(Θ′) = argmin_{Θ ∈ S_Θ} Tr[(Θ − Θ′)Σ⁻¹(Θ − Θ′)ᵀ]

    Ordem: ponto já viável; solução exata por linha das restrições de S_B
    (caixa diagonal) se ela cair dentro de S_A; senão gradiente projetado
    acelerado com passo 1/λ_max(Σ⁻¹).

    Raises:
        NonConvergence: gradiente projetado excedeu max_iter
    """
    Theta_prime = np.asarray(Theta_prime, dtype=float)
    if param_set.contains(Theta_prime):
        return Theta_prime

    if param_set.b_kind == 'diagonal_box':
        candidate = _project_box_rows(Theta_prime, Sigma_inv, param_set)
        if param_set.contains(candidate):
            return candidate
        start = param_set.euclidean_project(candidate)
    else:
        start = param_set.euclidean_project(Theta_prime)

    return _projected_gradient(Theta_prime, Sigma_inv, param_set, start, tol, max_iter)


def _project_box_rows(Theta_prime, S, param_set: ParamSet) -> np.ndarray:
    """Mínimo exato por linha com Θ_B diagonal e caixa na diagonal, sem S_A"""
    m, n = param_set.m, param_set.n
    lo, hi = param_set.box_bounds()
    out = np.array(Theta_prime, copy=True)
    a_idx = np.arange(n)

    for i in range(m):
        diag_idx = n + i
        off_idx = np.array([n + j for j in range(m) if j != i], dtype=int)
        free = np.append(a_idx, diag_idx)
        row = _solve_row(Theta_prime[i], S, free, off_idx, np.zeros(off_idx.size))

        c = row[diag_idx]
        if c < lo[i] or c > hi[i]:
            fixed = np.append(off_idx, diag_idx)
            fixed_vals = np.append(np.zeros(off_idx.size), np.clip(c, lo[i], hi[i]))
            row = _solve_row(Theta_prime[i], S, a_idx, fixed, fixed_vals)
        out[i] = row
    return out


def _solve_row(theta_prime, S, free, fixed, fixed_vals) -> np.ndarray:
    """θ_U = θ′_U − S_UU⁻¹S_UF(θ_F − θ′_F) com θ_F fixado"""
    row = np.array(theta_prime, copy=True)
    row[fixed] = fixed_vals
    if fixed.size:
        shift = fixed_vals - theta_prime[fixed]
        row[free] = theta_prime[free] - np.linalg.solve(S[np.ix_(free, free)], S[np.ix_(free, fixed)] @ shift)
    return row


def _projected_gradient(Theta_prime, S, param_set, start, tol, max_iter) -> np.ndarray:
    step = 1.0 / float(np.linalg.eigvalsh(S)[-1])
    X = start
    Y = start
    t = 1.0
    f_X = projection_objective(X, Theta_prime, S)

    for _ in range(max_iter):
        X_next = param_set.euclidean_project(Y - step * (Y - Theta_prime) @ S)
        f_next = projection_objective(X_next, Theta_prime, S)
        if f_next > f_X:
            # reinício do momento quando o objetivo sobe
            t = 1.0
            X_next = param_set.euclidean_project(X - step * (X - Theta_prime) @ S)
            f_next = projection_objective(X_next, Theta_prime, S)

        move = np.linalg.norm(X_next - X, 'fro')
        if move <= tol * max(1.0, np.linalg.norm(X, 'fro')):
            return X_next

        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        Y = X_next + ((t - 1.0) / t_next) * (X_next - X)
        X, f_X, t = X_next, f_next, t_next

    raise NonConvergence(f"Projeção não convergiu em {max_iter} iterações")


def lyapunov_diagnostic(state: WrlsState, Theta_star) -> float:
    """V_t = Tr[Θ̃_tΣ_t⁻¹Θ̃_tᵀ] (exige Θ* conhecido)"""
    Theta_tilde = state.Theta_hat - np.asarray(Theta_star, dtype=float)
    return float(np.trace(Theta_tilde @ state.Sigma_inv @ Theta_tilde.T))
