# -*- coding: utf-8 -*-
"""
动力学模块 - 密度矩阵与一、二阶矩的时间演化

本模块提供：
1. propagate: ρ(t) = e^{tℒ}[ρ₀]，逐点校验迹与正定性并记录截断泄漏
2. moment_flow: (⟨x⟩, ⟨p⟩, Var x, Var p, Cov xp) 的闭合线性 ODE（伴随作用导出）
3. fit_relaxation: ⟨O⟩(t) = A·e^{−rt} + B 的最小二乘拟合
4. 初态工厂（基态、数态、热态、相干态、平移热态、格点高斯分布）
5. 轨迹的 CSV 行导出（17 位有效数字）

积分方式（按细化等级依次尝试）：
- expm: 稠密超算符矩阵指数（d ≤ 80，即 d² ≤ 6400），等间隔时间网格只求一次传播子
- krylov: scipy.sparse.linalg.expm_multiply（稀疏矩阵作用在向量上）
- ode: solve_ivp DOP853，相对容差 1e-10

校验：
- |tr ρ − 1| ≤ 1e-10
- 最小本征值 ≥ −1e-8；落在 [−1e-8, 0) 内的负值只报告不截断
- 超出容差时换下一等级重试，全部失败则抛出 NumericFailureError（携带最差诊断量）

矩方程（x-p 形式生成元的伴随作用，H0 = p²/2M + ½Mω²x²）：
    d⟨x⟩/dt   = (μ−γ)⟨x⟩ + ⟨p⟩/M
    d⟨p⟩/dt   = −Mω²⟨x⟩ − (μ+γ)⟨p⟩
    dVxx/dt   = 2(μ−γ)Vxx + (2/M)Cxp + 2D_xx
    dVpp/dt   = −2(μ+γ)Vpp − 2Mω²Cxp + 2D_pp
    dCxp/dt   = Vpp/M − Mω²Vxx − 2γCxp + 2D_px

Author: 约瑟夫.k && 白泽
"""
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

from .coefficients import BilinearCoefficients
from .errors import BasisMismatchError, InvalidArgumentError, NumericFailureError, retry_with_refinement
from .fock_core import (
    BasisOps,
    BasisSpec,
    DensityMatrix,
    MatrixOperator,
    Superoperator,
    fock_state,
    leakage,
    pure_state,
    thermal_state,
    unvec,
    vec,
)
from .logger import get_logger

logger = get_logger("dynamics")

DENSE_MAX_DIMENSION = 80  # 基矢维数上限（超算符 d² ≤ 6400），超过后改用 expm_multiply
ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
TRACE_LIMIT = 1e-10
POSITIVITY_LIMIT = 1e-8
FIT_FLAG_RESIDUAL = 1e-3
MIN_FIT_SAMPLES = 10

METHOD_LEVELS = {
    "expm": ("expm", "ode"),
    "krylov": ("krylov", "ode"),
    "ode": ("ode",),
}


@dataclass(frozen=True)
class MomentState:
    """一、二阶矩"""
    mean_x: float
    mean_p: float
    var_xx: float
    var_pp: float
    cov_xp: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.mean_x, self.mean_p, self.var_xx, self.var_pp, self.cov_xp], dtype=float)

    @classmethod
    def from_vector(cls, values: Sequence[float]) -> "MomentState":
        return cls(*(float(v) for v in values[:5]))

    @property
    def second_moment_p(self) -> float:
        """⟨p²⟩ = Var p + ⟨p⟩²"""
        return self.var_pp + self.mean_p ** 2

    @property
    def second_moment_x(self) -> float:
        return self.var_xx + self.mean_x ** 2

    def uncertainty_margin(self, hbar: float = 1.0) -> float:
        """Var x·Var p − Cov² − ħ²/4（对量子态应 ≥ 0）"""
        return self.var_xx * self.var_pp - self.cov_xp ** 2 - hbar ** 2 / 4.0

    def to_dict(self) -> Dict[str, float]:
        return {
            "mean_x": self.mean_x,
            "mean_p": self.mean_p,
            "var_xx": self.var_xx,
            "var_pp": self.var_pp,
            "cov_xp": self.cov_xp,
        }


@dataclass
class Trajectory:
    """时间轨迹

    states 为 DensityMatrix（propagate）或 MomentState（moment_flow）；
    leakage / min_eigenvalues / trace_errors 只对密度矩阵轨迹有意义。
    """
    times: np.ndarray
    states: List[Any]
    leakage: List[float] = field(default_factory=list)
    min_eigenvalues: List[float] = field(default_factory=list)
    trace_errors: List[float] = field(default_factory=list)
    method: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise InvalidArgumentError(f"时间点数 {len(self.times)} 与态个数 {len(self.states)} 不一致")

    def __len__(self) -> int:
        return len(self.states)

    def values(self, observable: Union[MatrixOperator, Callable[[Any], float]]) -> np.ndarray:
        """可观测量沿轨迹的取值（算符取期望，函数直接作用在态上）"""
        if isinstance(observable, MatrixOperator):
            return np.array([observable.expect(state) for state in self.states], dtype=float)
        return np.array([float(observable(state)) for state in self.states], dtype=float)

    @property
    def max_leakage(self) -> float:
        return max(self.leakage, default=0.0)

    @property
    def worst_min_eigenvalue(self) -> float:
        return min(self.min_eigenvalues, default=0.0)

    @property
    def positivity_violations(self) -> int:
        return sum(1 for value in self.min_eigenvalues if value < 0)


@dataclass
class FitResult:
    """⟨O⟩(t) = amplitude·e^{−rate·t} + asymptote 的拟合结果"""
    rate: float
    asymptote: float
    amplitude: float
    residual: float
    flagged: bool
    degenerate: bool = False
    e_foldings: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rate": self.rate,
            "asymptote": self.asymptote,
            "amplitude": self.amplitude,
            "residual": self.residual,
            "flagged": self.flagged,
            "degenerate": self.degenerate,
            "e_foldings": self.e_foldings,
        }


@dataclass(frozen=True)
class MomentHamiltonian:
    """moment_flow 所用的自由哈密顿量：free(M) 或 oscillator(M, ω)"""
    kind: str = "free"
    M: float = 1.0
    omega: float = 0.0

    def __post_init__(self):
        if self.kind not in ("free", "oscillator"):
            raise InvalidArgumentError(f"未知的哈密顿量类型: {self.kind}（可选 free / oscillator）")
        if not self.M > 0:
            raise InvalidArgumentError(f"M 必须为正数，实际为 {self.M}")

    @property
    def omega_sq(self) -> float:
        return self.omega ** 2 if self.kind == "oscillator" else 0.0


# ---------------------------------------------------------------------------
# 密度矩阵演化
# ---------------------------------------------------------------------------

def _check_times(times: Sequence[float]) -> np.ndarray:
    grid = np.asarray(times, dtype=float).ravel()
    if grid.size == 0:
        return grid
    if not np.all(np.isfinite(grid)):
        raise InvalidArgumentError("时间网格含非有限值")
    if grid[0] < 0:
        raise InvalidArgumentError(f"时间网格必须从 0 开始递增，首点为 {grid[0]}")
    if np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError("时间网格必须严格递增")
    return grid


def _is_uniform(grid: np.ndarray) -> bool:
    if grid.size < 3:
        return True
    steps = np.diff(grid)
    return bool(np.allclose(steps, steps[0], rtol=1e-12, atol=0.0))


def _integrate_expm(L: Superoperator, v0: np.ndarray, grid: np.ndarray) -> np.ndarray:
    dense = L.mat
    out = np.empty((grid.size, v0.size), dtype=complex)
    current = v0 if grid[0] == 0 else scipy.linalg.expm(grid[0] * dense) @ v0
    out[0] = current
    if grid.size == 1:
        return out
    if _is_uniform(grid):
        step = scipy.linalg.expm((grid[1] - grid[0]) * dense)
        for k in range(1, grid.size):
            current = step @ current
            out[k] = current
        return out
    for k in range(1, grid.size):
        current = scipy.linalg.expm((grid[k] - grid[k - 1]) * dense) @ current
        out[k] = current
    return out


def _integrate_krylov(L: Superoperator, v0: np.ndarray, grid: np.ndarray) -> np.ndarray:
    matrix = L.matrix.tocsc()
    if grid.size >= 2 and _is_uniform(grid):
        return np.asarray(spla.expm_multiply(matrix, v0, start=grid[0], stop=grid[-1],
                                             num=grid.size, endpoint=True))
    out = np.empty((grid.size, v0.size), dtype=complex)
    current = spla.expm_multiply(matrix * grid[0], v0) if grid[0] > 0 else v0
    out[0] = current
    for k in range(1, grid.size):
        current = spla.expm_multiply(matrix * (grid[k] - grid[k - 1]), current)
        out[k] = current
    return out


def _integrate_ode(L: Superoperator, v0: np.ndarray, grid: np.ndarray, rtol: float) -> np.ndarray:
    matrix = L.matrix
    if grid[-1] == 0:
        return v0[np.newaxis, :].copy()
    sol = solve_ivp(
        lambda _t, y: matrix @ y,
        (0.0, float(grid[-1])),
        v0.astype(complex),
        method="DOP853",
        t_eval=grid,
        rtol=rtol,
        atol=ODE_ATOL,
    )
    if not sol.success:
        raise NumericFailureError(f"DOP853 积分失败: {sol.message}", {"method": "ode", "rtol": rtol})
    return sol.y.T


def _collect(L: Superoperator, grid: np.ndarray, vectors: np.ndarray, method: str) -> Trajectory:
    basis = L.basis
    states: List[DensityMatrix] = []
    leaks: List[float] = []
    min_eigs: List[float] = []
    trace_errors: List[float] = []
    worst: Dict[str, Any] = {"method": method, "trace_error": 0.0, "min_eigenvalue": 0.0, "time": None}

    for t, vector in zip(grid, vectors):
        mat = unvec(vector, basis.dimension)
        mat = 0.5 * (mat + mat.conj().T)
        rho = DensityMatrix(MatrixOperator(basis, mat), check=False)
        trace_error = abs(np.real(np.trace(mat)) - 1.0)
        min_eig = rho.min_eigenvalue()
        if trace_error > worst["trace_error"] or min_eig < worst["min_eigenvalue"]:
            worst.update(trace_error=max(trace_error, worst["trace_error"]),
                         min_eigenvalue=min(min_eig, worst["min_eigenvalue"]), time=float(t))
        states.append(rho)
        leaks.append(leakage(rho))
        min_eigs.append(min_eig)
        trace_errors.append(trace_error)

    if worst["trace_error"] > TRACE_LIMIT or worst["min_eigenvalue"] < -POSITIVITY_LIMIT:
        raise NumericFailureError(
            f"演化校验失败: |tr−1|={worst['trace_error']:.3e}, λ_min={worst['min_eigenvalue']:.3e}",
            worst,
        )
    dips = sum(1 for value in min_eigs if value < 0)
    if dips:
        logger.warning(f"[Dynamics] {dips} 个时间点存在容差内的负本征值（最小 {min(min_eigs):.3e}）")
    return Trajectory(grid, states, leaks, min_eigs, trace_errors, method)


def propagate(L: Superoperator, rho0: DensityMatrix, times: Sequence[float], method: str = "auto",
              rtol: float = ODE_RTOL) -> Trajectory:
    """密度矩阵演化 ρ(t) = e^{tℒ}[ρ₀]

    Args:
        L: 生成元
        rho0: 初态
        times: 从 0 开始严格递增的时间网格（可为空）
        method: auto / expm / krylov / ode
        rtol: ODE 回退的相对容差

    Returns:
        Trajectory

    Raises:
        BasisMismatchError: 初态与生成元基矢不一致
        NumericFailureError: 所有细化等级均未满足迹/正定性容差
    """
    if rho0.basis != L.basis:
        raise BasisMismatchError(f"初态基矢 {rho0.basis} 与生成元基矢 {L.basis} 不一致")
    grid = _check_times(times)
    if grid.size == 0:
        return Trajectory(grid, [], method=method)

    if method == "auto":
        method = "expm" if L.dimension <= DENSE_MAX_DIMENSION else "krylov"
    if method not in METHOD_LEVELS:
        raise InvalidArgumentError(f"未知的积分方式: {method}（可选 auto / expm / krylov / ode）")

    v0 = vec(rho0.entries).astype(complex)

    def run(level: str) -> Trajectory:
        if level == "expm":
            vectors = _integrate_expm(L, v0, grid)
        elif level == "krylov":
            vectors = _integrate_krylov(L, v0, grid)
        else:
            vectors = _integrate_ode(L, v0, grid, rtol)
        return _collect(L, grid, vectors, level)

    def on_refine(level: str, error: Exception) -> None:
        logger.warning(f"[Dynamics] {level} 积分未达标，切换到 ODE 回退: {error}")

    trajectory = retry_with_refinement(run, METHOD_LEVELS[method], on_refine)
    logger.debug(
        f"[Dynamics] 演化完成: {len(trajectory)} 个时间点, 方法={trajectory.method}, "
        f"最大泄漏={trajectory.max_leakage:.3e}"
    )
    return trajectory


# ---------------------------------------------------------------------------
# 矩方程
# ---------------------------------------------------------------------------

def moment_matrix(c: BilinearCoefficients, h0: MomentHamiltonian) -> np.ndarray:
    """(⟨x⟩, ⟨p⟩, Vxx, Vpp, Cxp, 1) 上的 6×6 增广生成矩阵"""
    mu, gamma = c.mu, c.gamma
    inv_m = 1.0 / h0.M
    k = h0.M * h0.omega_sq
    A = np.zeros((6, 6), dtype=float)
    A[0, 0] = mu - gamma
    A[0, 1] = inv_m
    A[1, 0] = -k
    A[1, 1] = -(mu + gamma)
    A[2, 2] = 2.0 * (mu - gamma)
    A[2, 4] = 2.0 * inv_m
    A[2, 5] = 2.0 * c.D_xx
    A[3, 3] = -2.0 * (mu + gamma)
    A[3, 4] = -2.0 * k
    A[3, 5] = 2.0 * c.D_pp
    A[4, 2] = -k
    A[4, 3] = inv_m
    A[4, 4] = -2.0 * gamma
    A[4, 5] = 2.0 * c.D_px
    return A


def moment_flow(c: BilinearCoefficients, h0: MomentHamiltonian, m0: MomentState, times: Sequence[float]
                ) -> List[MomentState]:
    """矩方程的精确解（增广矩阵指数）"""
    grid = _check_times(times)
    A = moment_matrix(c, h0)
    y0 = np.append(m0.as_vector(), 1.0)
    return [MomentState.from_vector(scipy.linalg.expm(t * A) @ y0) for t in grid]


def moment_trajectory(c: BilinearCoefficients, h0: MomentHamiltonian, m0: MomentState,
                      times: Sequence[float]) -> Trajectory:
    grid = _check_times(times)
    return Trajectory(grid, moment_flow(c, h0, m0, grid), method="moment_flow")


def moments_from_state(rho: Union[DensityMatrix, np.ndarray], ops: BasisOps) -> MomentState:
    """从密度矩阵提取一、二阶矩（Fock 基）"""
    if ops.x is None:
        raise BasisMismatchError("矩提取需要 x 算符（Fock 基）")
    mat = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    x, p = ops.x, ops.p
    mean_x = x.expect(mat)
    mean_p = p.expect(mat)
    var_xx = (x @ x).expect(mat) - mean_x ** 2
    var_pp = (p @ p).expect(mat) - mean_p ** 2
    sym = (x @ p + p @ x) * 0.5
    cov_xp = sym.expect(mat) - mean_x * mean_p
    return MomentState(mean_x, mean_p, var_xx, var_pp, cov_xp)


# ---------------------------------------------------------------------------
# 弛豫拟合
# ---------------------------------------------------------------------------

def _decay(t: np.ndarray, amplitude: float, rate: float, asymptote: float) -> np.ndarray:
    return amplitude * np.exp(-rate * t) + asymptote


def fit_relaxation(traj: Trajectory, observable: Union[MatrixOperator, Callable[[Any], float]]) -> FitResult:
    """拟合 ⟨O⟩(t) = A·e^{−rt} + B

    至少 10 个采样点；残差超过信号幅度的 1e-3、或覆盖不足 2 个 e 倍时间时标记 flagged；
    常数信号返回 r = 0 并标记 degenerate。

    Raises:
        InvalidArgumentError: 采样点不足
    """
    if len(traj) < MIN_FIT_SAMPLES:
        raise InvalidArgumentError(f"拟合至少需要 {MIN_FIT_SAMPLES} 个采样点，实际为 {len(traj)}")
    t = traj.times - traj.times[0]
    y = traj.values(observable)
    span = float(np.max(y) - np.min(y))
    scale = max(1.0, float(np.max(np.abs(y))))

    if span <= 1e-12 * scale:
        logger.warning("[Dynamics] 信号近似为常数，弛豫拟合退化")
        return FitResult(0.0, float(np.mean(y)), 0.0, 0.0, True, True, 0.0)

    amplitude0 = float(y[0] - y[-1])
    rate0 = 3.0 / float(t[-1]) if t[-1] > 0 else 1.0
    try:
        params, _ = curve_fit(_decay, t, y, p0=(amplitude0, rate0, float(y[-1])), maxfev=20000)
    except RuntimeError as e:
        logger.warning(f"[Dynamics] 弛豫拟合未收敛: {e}")
        return FitResult(float("nan"), float("nan"), float("nan"), float("inf"), True)

    amplitude, rate, asymptote = (float(v) for v in params)
    residual = float(np.max(np.abs(_decay(t, amplitude, rate, asymptote) - y))) / span
    e_foldings = rate * float(t[-1])
    flagged = residual > FIT_FLAG_RESIDUAL or e_foldings < 2.0
    if flagged:
        logger.warning(f"[Dynamics] 拟合被标记: residual={residual:.3e}, e 倍数={e_foldings:.2f}")
    return FitResult(rate, asymptote, amplitude, residual, flagged, False, e_foldings)


# ---------------------------------------------------------------------------
# 初态
# ---------------------------------------------------------------------------

def coherent_state(basis: BasisSpec, alpha: complex) -> DensityMatrix:
    """截断相干态（振幅 e^{−|α|²/2}αⁿ/√n! 归一化）"""
    n = np.arange(basis.dimension)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        amplitudes = (n == 0).astype(complex)
    else:
        amplitudes = np.exp(n * np.log(complex(alpha)) - 0.5 * log_fact - 0.5 * abs(alpha) ** 2)
    return pure_state(basis, amplitudes)


def displaced_thermal_state(ops: BasisOps, alpha: complex, n_mean: float) -> DensityMatrix:
    """D(α)·ρ_th·D(α)†，ρ_th 为平均占据数 n_mean 的几何分布"""
    basis = ops.basis
    if n_mean < 0:
        raise InvalidArgumentError(f"平均占据数必须非负，实际为 {n_mean}")
    n = np.arange(basis.dimension, dtype=float)
    if n_mean == 0:
        weights = (n == 0).astype(float)
    else:
        ratio = n_mean / (n_mean + 1.0)
        weights = ratio ** n
    weights = weights / weights.sum()
    generator = alpha * ops.a_dag.entries - np.conj(alpha) * ops.a.entries
    displacement = scipy.linalg.expm(generator)
    entries = displacement @ np.diag(weights).astype(complex) @ displacement.conj().T
    return DensityMatrix.from_array(basis, entries, normalize=True)


def lattice_gaussian_state(basis: BasisSpec, p0: float, sigma: float) -> DensityMatrix:
    """格点上动量对角的高斯分布 f(p) ∝ exp(−(p−p0)²/2σ²)"""
    if not basis.is_lattice:
        raise BasisMismatchError("格点高斯态需要动量格点")
    if not sigma > 0:
        raise InvalidArgumentError(f"σ 必须为正数，实际为 {sigma}")
    weights = np.exp(-0.5 * ((basis.momenta() - p0) / sigma) ** 2)
    weights = weights / weights.sum()
    return DensityMatrix(MatrixOperator.diagonal(basis, weights))


def initial_state(kind: str, ops: BasisOps, params: Optional[Dict[str, Any]] = None,
                  H0: Optional[MatrixOperator] = None) -> DensityMatrix:
    """初态工厂

    kind:
    - ground: |0⟩（格点上为 p = 0）
    - fock: |n⟩，参数 n
    - thermal: e^{−βH0}/Z，参数 beta，需要 H0
    - coherent: 参数 alpha_re, alpha_im
    - displaced_thermal: 参数 alpha_re, alpha_im, n_mean
    - lattice_gaussian: 参数 p0, sigma
    """
    params = params or {}
    basis = ops.basis
    logger.debug(f"[Dynamics] 初态: {kind} {params}")
    if kind == "ground":
        index = basis.size if basis.is_lattice else 0
        return fock_state(basis, index)
    if kind == "fock":
        return fock_state(basis, int(params.get("n", 0)))
    if kind == "thermal":
        if H0 is None:
            raise InvalidArgumentError("thermal 初态需要 H0")
        return thermal_state(H0, float(params.get("beta", 1.0)))
    alpha = complex(float(params.get("alpha_re", 0.0)), float(params.get("alpha_im", 0.0)))
    if kind == "coherent":
        return coherent_state(basis, alpha)
    if kind == "displaced_thermal":
        return displaced_thermal_state(ops, alpha, float(params.get("n_mean", 0.0)))
    if kind == "lattice_gaussian":
        return lattice_gaussian_state(basis, float(params.get("p0", 0.0)), float(params.get("sigma", 1.0)))
    raise InvalidArgumentError(f"未知的初态类型: {kind}")


# ---------------------------------------------------------------------------
# CSV 导出
# ---------------------------------------------------------------------------

def trajectory_rows(traj: Trajectory, observables: Dict[str, Union[MatrixOperator, Callable[[Any], float]]]
                    ) -> Tuple[List[str], List[List[float]]]:
    """CSV 表头与数据行：time, 各可观测量, leakage, min_eigenvalue"""
    names = list(observables)
    header = ["time"] + names + ["leakage", "min_eigenvalue"]
    columns = [traj.values(observables[name]) for name in names]
    rows: List[List[float]] = []
    for index, t in enumerate(traj.times):
        leak = traj.leakage[index] if traj.leakage else 0.0
        min_eig = traj.min_eigenvalues[index] if traj.min_eigenvalues else 0.0
        rows.append([float(t)] + [float(col[index]) for col in columns] + [leak, min_eig])
    return header, rows
