# -*- coding: utf-8 -*-
"""
分析模块 - 协变性、稳态与 Gibbs 态检验

本模块对构建好的生成元做数值检验：
1. 群协变性：ℒ[UρU†] = Uℒ[ρ]U†，U = e^{iφN}（U(1)）或 e^{−ibp/ħ}（平移）
2. 稳态求解：超算符矩阵的奇异值分解，给出核维数与核元素
3. Gibbs 态残差：‖ℒ[e^{−βH0}/Z]‖₁
4. 非唯一性见证：协变生成元的稳态沿群轨道平移后仍是稳态

主要类：
- GroupKind / GroupElement: 群元素（Phase(φ) 或 Shift(b)）
- CovarianceReport: 协变性检验报告
- StationaryReport: 稳态报告
- OrbitWitnessReport: 非唯一性见证报告

主要函数：
- check_covariance: 随机厄米矩阵上的最大等变偏差
- stationary_states: 核维数与稳态
- verify_gibbs: Gibbs 态残差
- orbit_nonuniqueness_witness: 群轨道上的稳态

检验模式：
- Fock 基上的 Phase、格点上的 Shift 为精确检验（U 为对角相位）
- Fock 基上的 Shift 为近似检验（截断位移算符有泄漏），容差 1e-4：
  |b| 截断到 0.1·λ（λ 缺省取生成元的长度尺度 l），随机样本只占据下半截断能级，
  偏差也只在下半块上比较，远离截断边界
- 格点上的 Phase 没有定义，抛出 BasisMismatchError

Author: 约瑟夫.k && 白泽
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import BasisMismatchError, InvalidArgumentError, PreconditionError
from .fock_core import (
    DensityMatrix,
    MatrixOperator,
    Superoperator,
    build_basis_ops,
    random_hermitian,
    spectral_unitary,
    thermal_state,
    trace_norm,
    unvec,
    vec,
)
from .logger import get_logger

logger = get_logger("analysis")

KERNEL_THRESHOLD = 1e-8
INDEPENDENCE_THRESHOLD = 1e-8
STATIONARY_PRECONDITION = 1e-8
COVARIANCE_PRECONDITION = 1e-10

# 各检验模式的通过容差
MODE_TOLERANCES = {
    "exact": 1e-10,
    "approximate": 1e-4,
}

# 近似平移检验：|b| 上限与长度尺度之比
APPROXIMATE_SHIFT_FRACTION = 0.1


class GroupKind(Enum):
    PHASE = "phase"  # e^{iφN}
    SHIFT = "shift"  # e^{−ibp/ħ}


@dataclass(frozen=True)
class GroupElement:
    """群元素"""
    kind: GroupKind
    param: float

    def __post_init__(self):
        if not isinstance(self.kind, GroupKind):
            object.__setattr__(self, "kind", GroupKind(self.kind))
        if not math.isfinite(self.param):
            raise InvalidArgumentError(f"群参数必须有限，实际为 {self.param}")

    @classmethod
    def phase(cls, phi: float) -> "GroupElement":
        return cls(GroupKind.PHASE, float(phi))

    @classmethod
    def shift(cls, b: float) -> "GroupElement":
        return cls(GroupKind.SHIFT, float(b))

    def mode(self, L: Superoperator) -> str:
        """exact / approximate；不支持的组合抛出 BasisMismatchError"""
        basis = L.basis
        if self.kind is GroupKind.PHASE:
            if not basis.is_fock:
                raise BasisMismatchError(f"Phase 群元素需要 Fock 基，实际为 {basis.kind.value}")
            return "exact"
        if basis.is_lattice:
            return "exact"
        if basis.is_fock:
            return "approximate"
        raise BasisMismatchError(f"Shift 群元素不支持 {basis.kind.value} 基")

    def unitary(self, L: Superoperator) -> MatrixOperator:
        """U_g（谱分解求指数）"""
        self.mode(L)
        basis = L.basis
        if self.kind is GroupKind.PHASE:
            levels = np.arange(basis.dimension, dtype=float)
            return MatrixOperator.diagonal(basis, np.exp(1j * self.param * levels))
        if basis.is_lattice:
            return MatrixOperator.diagonal(basis, np.exp(-1j * self.param * basis.momenta() / basis.hbar))
        ops = build_basis_ops(basis, float(L.meta.get("l", 1.0)))
        return spectral_unitary(ops.p, -1j * self.param / basis.hbar)

    def act(self, L: Superoperator, rho: np.ndarray) -> np.ndarray:
        u = self.unitary(L).entries
        return u @ np.asarray(rho) @ u.conj().T

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "param": self.param}


@dataclass
class CovarianceReport:
    group: GroupElement
    max_equivariance_defect: float
    mode: str
    samples: int
    tolerance: float
    support: Optional[int] = None
    requested_param: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.max_equivariance_defect <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group": self.group.to_dict(),
            "max_equivariance_defect": self.max_equivariance_defect,
            "mode": self.mode,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "support_levels": self.support,
            "requested_param": self.requested_param,
            "status": "ok" if self.passed else "violated",
        }


@dataclass
class StationaryReport:
    """稳态报告

    near_null_singular_values 为按最大奇异值归一化后的最小若干个奇异值（升序）；
    kernel_elements 为厄米投影后的核元素，states 为其中可归一化为密度矩阵的部分。
    """
    kernel_dimension: int
    near_null_singular_values: List[float]
    kernel_elements: List[MatrixOperator] = field(default_factory=list)
    states: List[DensityMatrix] = field(default_factory=list)
    positive: List[bool] = field(default_factory=list)
    threshold: float = KERNEL_THRESHOLD

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kernel_dimension": self.kernel_dimension,
            "near_null_singular_values": list(self.near_null_singular_values),
            "threshold": self.threshold,
            "positive": list(self.positive),
            "state_count": len(self.states),
        }


@dataclass
class OrbitWitnessReport:
    group: GroupElement
    base_residual: float
    orbit_state_residual: float
    orbit_defect: float
    covariance_defect: float
    overlap: float
    linear_independence: bool

    @property
    def within_bound(self) -> bool:
        """‖ℒ[ρ_g]‖₁ ≤ ‖ℒ[ρ₀]‖₁ + 2·‖ℒ[ρ_g] − U ℒ[ρ₀] U†‖₁"""
        return self.orbit_state_residual <= self.base_residual + 2.0 * self.orbit_defect + 1e-14

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group": self.group.to_dict(),
            "base_residual": self.base_residual,
            "orbit_state_residual": self.orbit_state_residual,
            "orbit_defect": self.orbit_defect,
            "covariance_defect": self.covariance_defect,
            "overlap": self.overlap,
            "linear_independence": self.linear_independence,
            "within_bound": self.within_bound,
        }


def approximate_shift_bound(L: Superoperator, length: Optional[float] = None) -> float:
    """Fock 基近似平移检验允许的最大 |b|：0.1·λ（λ 缺省为生成元的长度尺度 l）"""
    reference = float(length) if length is not None else float(L.meta.get("l", 1.0))
    return APPROXIMATE_SHIFT_FRACTION * reference


def _low_level_hermitian(dimension: int, cutoff: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.normal(size=(cutoff, cutoff)) + 1j * rng.normal(size=(cutoff, cutoff))
    rho = np.zeros((dimension, dimension), dtype=complex)
    rho[:cutoff, :cutoff] = 0.5 * (raw + raw.conj().T)
    return rho


def check_covariance(L: Superoperator, g: GroupElement, samples: int = 20, seed: int = 0,
                     length: Optional[float] = None) -> CovarianceReport:
    """等变偏差 max_ρ ‖ℒ[UρU†] − Uℒ[ρ]U†‖_max（ρ 为随机厄米矩阵）

    近似模式下 ρ 只占据最低 d/2 个能级，偏差只取左上 d/2 × d/2 块。
    |b| 超过 approximate_shift_bound 时截断到上限（报告中保留 requested_param）。

    Args:
        L: 生成元
        g: 群元素
        samples: 随机样本数（≥ 1）
        seed: 随机种子
        length: 近似平移检验的参考长度（通常为 λ_th），缺省为 L.meta["l"]

    Raises:
        BasisMismatchError: 群元素与基矢不匹配
        InvalidArgumentError: samples < 1
    """
    if samples < 1:
        raise InvalidArgumentError(f"samples 必须 ≥ 1，实际为 {samples}")
    mode = g.mode(L)
    dimension = L.dimension
    cutoff = dimension
    requested = None
    if mode == "approximate":
        bound = approximate_shift_bound(L, length)
        if abs(g.param) > bound:
            logger.warning(f"[Analysis] Fock 基平移检验要求 |b| ≤ {bound:g}（0.1·λ），b={g.param:g} 截断为 {bound:g}")
            requested = g.param
            g = GroupElement.shift(math.copysign(bound, g.param))
        cutoff = max(1, dimension // 2)
    u = g.unitary(L).entries
    u_dag = u.conj().T
    rng = np.random.default_rng(seed)

    worst = 0.0
    for _ in range(samples):
        if cutoff == dimension:
            rho = random_hermitian(L.basis, rng)
        else:
            rho = _low_level_hermitian(dimension, cutoff, rng)
        lhs = L.apply(u @ rho @ u_dag)
        rhs = u @ L.apply(rho) @ u_dag
        diff = (lhs - rhs)[:cutoff, :cutoff]
        worst = max(worst, float(np.max(np.abs(diff))))

    tolerance = MODE_TOLERANCES[mode]
    logger.debug(f"[Analysis] 协变性检验 {g.kind.value}({g.param:g}): defect={worst:.3e}, mode={mode}, "
                 f"support={cutoff}")
    return CovarianceReport(g, worst, mode, samples, tolerance, support=cutoff, requested_param=requested)


def _hermitian_kernel_element(vector: np.ndarray, dimension: int) -> np.ndarray:
    mat = unvec(vector, dimension)
    herm = 0.5 * (mat + mat.conj().T)
    if np.max(np.abs(herm)) < 1e-12:
        herm = 0.5j * (mat.conj().T - mat)
    trace = np.real(np.trace(herm))
    if abs(trace) > 1e-10:
        return herm / trace
    return herm / np.linalg.norm(herm)


def stationary_states(L: Superoperator, threshold: float = KERNEL_THRESHOLD, tail: int = 5
                      ) -> StationaryReport:
    """稳态求解

    对 ℒ 的稠密矩阵做奇异值分解，奇异值按最大值归一化；低于 threshold 的个数即核维数。
    核向量反向量化后取厄米部分，迹非零时归一化为单位迹。

    Args:
        L: 生成元
        threshold: 归一化奇异值阈值
        tail: 报告中额外给出的近零奇异值个数
    """
    _, values, vh = np.linalg.svd(L.mat)
    largest = values[0] if values.size and values[0] > 0 else 1.0
    normalized = values[::-1] / largest
    kernel_dimension = int(np.sum(normalized < threshold))
    kernel_vectors = vh[::-1][:kernel_dimension].conj()

    elements: List[MatrixOperator] = []
    states: List[DensityMatrix] = []
    positive: List[bool] = []
    for vector in kernel_vectors:
        herm = _hermitian_kernel_element(vector, L.dimension)
        op = MatrixOperator(L.basis, herm)
        elements.append(op)
        trace = np.real(np.trace(herm))
        min_eig = float(np.linalg.eigvalsh(0.5 * (herm + herm.conj().T))[0])
        is_state = abs(trace - 1.0) < 1e-8 and min_eig >= -1e-8
        positive.append(is_state)
        if is_state:
            states.append(DensityMatrix(op, check=False))

    shown = min(len(normalized), kernel_dimension + tail)
    logger.info(f"[Analysis] 稳态求解: kernel_dimension={kernel_dimension}, 正定稳态 {len(states)} 个")
    return StationaryReport(
        kernel_dimension=kernel_dimension,
        near_null_singular_values=[float(v) for v in normalized[:shown]],
        kernel_elements=elements,
        states=states,
        positive=positive,
        threshold=threshold,
    )


def verify_gibbs(L: Superoperator, H0: MatrixOperator, beta: float) -> float:
    """Gibbs 态残差 ‖ℒ[e^{−βH0}/Z]‖₁"""
    if not H0.is_hermitian():
        raise InvalidArgumentError(f"H0 不厄米（偏差 {H0.hermiticity_defect():.3e}）")
    if H0.basis != L.basis:
        raise BasisMismatchError(f"H0 基矢 {H0.basis} 与生成元基矢 {L.basis} 不一致")
    rho = thermal_state(H0, beta)
    residual = trace_norm(L.apply(rho))
    logger.debug(f"[Analysis] Gibbs 残差: β={beta:g}, residual={residual:.3e}")
    return residual


def orbit_nonuniqueness_witness(L: Superoperator, g: GroupElement, rho0: DensityMatrix,
                                samples: int = 5, seed: int = 0,
                                length: Optional[float] = None) -> OrbitWitnessReport:
    """群轨道上的稳态见证

    前置条件：‖ℒ[ρ₀]‖₁ ≤ 1e-8，且 check_covariance(L, g) 的偏差 ≤ 1e-10。
    计算 ρ_g = U ρ₀ U†，返回其残差，并用 Gram 行列式 1 − |⟨ρ₀,ρ_g⟩|²（归一化后）
    判断 ρ_g 是否与 ρ₀ 线性独立（阈值 1e-8）。

    Raises:
        PreconditionError: 前置条件不满足（消息中指明哪一条）
    """
    if rho0.basis != L.basis:
        raise BasisMismatchError(f"初态基矢 {rho0.basis} 与生成元基矢 {L.basis} 不一致")
    base_residual = trace_norm(L.apply(rho0))
    if base_residual > STATIONARY_PRECONDITION:
        raise PreconditionError(
            f"ρ₀ 不是稳态: ‖ℒ[ρ₀]‖₁ = {base_residual:.3e} > {STATIONARY_PRECONDITION:g}",
            precondition="stationary",
        )
    covariance = check_covariance(L, g, samples=samples, seed=seed, length=length)
    if covariance.max_equivariance_defect > COVARIANCE_PRECONDITION:
        raise PreconditionError(
            f"生成元在 {g.kind.value}({g.param:g}) 下不协变: defect = "
            f"{covariance.max_equivariance_defect:.3e} > {COVARIANCE_PRECONDITION:g}",
            precondition="covariance",
        )
    g = covariance.group

    u = g.unitary(L).entries
    rho_g = u @ rho0.entries @ u.conj().T
    out_g = L.apply(rho_g)
    orbit_residual = trace_norm(out_g)
    orbit_defect = trace_norm(out_g - u @ L.apply(rho0) @ u.conj().T)

    v0 = vec(rho0.entries)
    vg = vec(rho_g)
    overlap = abs(np.vdot(v0, vg)) / (np.linalg.norm(v0) * np.linalg.norm(vg))
    gram_det = 1.0 - overlap ** 2
    independent = bool(gram_det > INDEPENDENCE_THRESHOLD)

    logger.info(
        f"[Analysis] 轨道见证: residual={orbit_residual:.3e}, overlap={overlap:.12f}, independent={independent}"
    )
    return OrbitWitnessReport(g, base_residual, orbit_residual, orbit_defect,
                              covariance.max_equivariance_defect, float(overlap), independent)
