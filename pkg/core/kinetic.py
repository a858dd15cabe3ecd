# -*- coding: utf-8 -*-
"""
动理学模块 - Maxwell-Boltzmann 动态结构因子、摩擦系数求积与一维 QLBE 格点实现

本模块负责由气体参数导出量子布朗运动系数，并在动量格点上构建量子线性 Boltzmann 方程：

主要类：
- TMatrixProfile: T 矩阵傅里叶变换 t̃(q)（constant / gaussian / tabulated）
- GasModel: 气体参数 (m, z, n, β, t̃)
- LatticeQLBESpec: 格点 QLBE 描述（动量格点、最大转移下标 K、测试粒子质量 M）
- FrictionResult: 摩擦系数及求积误差
- BrownianLimitReport: 小动量转移极限的比较报告

主要函数：
- s_mb: Maxwell-Boltzmann 动态结构因子
- friction_gamma: 三维摩擦系数 γ（自适应求积）
- friction_gamma_1d: 一维格点约化下的摩擦系数
- derived_diffusion: (D_xx, D_pp) = (βħ²γ/8M, 2Mγ/β)
- qlbe_jump_operators / build_qlbe_lattice: 格点 QLBE 生成元
- qbm_momentum_action: 动理学 QBM 在动量对角态上的作用 2γ∂_p(pf) + D_pp∂²_p f
- brownian_limit_check: QLBE 与 Fokker-Planck 作用的相对偏差
- load_tmatrix_csv: 读取两列 (q, t) CSV

格点约定：
- 转移 q = kΔ，1 ≤ |k| ≤ K，q = 0 被排除（结构因子含 1/q）
- J_q = c(q)·Shift_k·diag(√S(|q|, E(q, p_j)))，E(q,p) = ((p+q)²−p²)/2M
- c(q)² = (2π/ħ)(2πħ)³·n·|t̃(|q|)|²·Δ
- 截断的平移矩阵在边界丢失振幅，反对易子使用实际的 J†J，严格保迹；
  丢失的速率占比作为 boundary_weight 报告
- 细致平衡使 Gibbs 对角态在格点上严格稳定（成对平衡）

求积：
- 标度变量 u = q/√(8m/β) 上使用 scipy.integrate.quad，相对容差 1e-10
- 子区间上限依次取 60 / 250 / 1000，均未达标时抛出 QuadratureError

Author: 约瑟夫.k && 白泽
"""
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.integrate import IntegrationWarning, quad

from .coefficients import ThermalContext
from .errors import (
    ConfigError,
    InvalidArgumentError,
    PreconditionError,
    QuadratureError,
    with_refinement,
)
from .fock_core import BasisSpec, Superoperator, assemble_lindblad, lindblad_action
from .logger import get_logger

logger = get_logger("kinetic")

QUAD_RTOL = 1e-10
QUAD_LIMITS = (60, 250, 1000)
BROWNIAN_MASS_RATIO = 0.1
TMATRIX_KINDS = ("constant", "gaussian", "tabulated")


@dataclass(frozen=True)
class TMatrixProfile:
    """t̃(q)，q ≥ 0

    - constant: t̃ = t0
    - gaussian: t̃ = t0·exp(−q²/2σ²)
    - tabulated: 在 (q_k, t_k) 上线性插值，支撑集外为 0
    """
    kind: str = "constant"
    t0: float = 1.0
    sigma: float = 1.0
    q_table: Tuple[float, ...] = ()
    t_table: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in TMATRIX_KINDS:
            raise InvalidArgumentError(f"未知的 T 矩阵类型: {self.kind}（可选 {'/'.join(TMATRIX_KINDS)}）")
        if not math.isfinite(self.t0):
            raise InvalidArgumentError(f"t0 必须有限，实际为 {self.t0}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise InvalidArgumentError(f"σ 必须为正数，实际为 {self.sigma}")
        if self.kind == "tabulated":
            q = np.asarray(self.q_table, dtype=float)
            t = np.asarray(self.t_table, dtype=float)
            if q.size < 2 or q.shape != t.shape:
                raise InvalidArgumentError("表格 T 矩阵至少需要两行，且 q、t 长度一致")
            if np.any(q < 0) or np.any(np.diff(q) <= 0):
                raise InvalidArgumentError("表格 T 矩阵的 q 必须非负且严格递增")
            object.__setattr__(self, "q_table", tuple(float(v) for v in q))
            object.__setattr__(self, "t_table", tuple(float(v) for v in t))

    @classmethod
    def constant(cls, t0: float) -> "TMatrixProfile":
        return cls("constant", float(t0))

    @classmethod
    def gaussian(cls, t0: float, sigma: float) -> "TMatrixProfile":
        return cls("gaussian", float(t0), float(sigma))

    @classmethod
    def tabulated(cls, q: Sequence[float], t: Sequence[float]) -> "TMatrixProfile":
        return cls("tabulated", 0.0, 1.0, tuple(q), tuple(t))

    def value(self, q):
        q = np.asarray(q, dtype=float)
        if self.kind == "constant":
            return np.full_like(q, self.t0)
        if self.kind == "gaussian":
            return self.t0 * np.exp(-0.5 * (q / self.sigma) ** 2)
        return np.interp(q, self.q_table, self.t_table, left=0.0, right=0.0)

    @property
    def support(self) -> Tuple[float, float]:
        if self.kind == "tabulated":
            return self.q_table[0], self.q_table[-1]
        return 0.0, math.inf

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "constant":
            return {"kind": "constant", "params": {"t0": self.t0}}
        if self.kind == "gaussian":
            return {"kind": "gaussian", "params": {"t0": self.t0, "sigma": self.sigma}}
        return {"kind": "tabulated", "params": {"q": list(self.q_table), "t": list(self.t_table)}}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], prefix: str = "gas.t_matrix") -> "TMatrixProfile":
        kind = data.get("kind", "constant")
        params = data.get("params", {})
        try:
            if kind == "constant":
                return cls.constant(float(params.get("t0", 1.0)))
            if kind == "gaussian":
                return cls.gaussian(float(params.get("t0", 1.0)), float(params.get("sigma", 1.0)))
            if kind == "tabulated":
                if "csv" in params:
                    return load_tmatrix_csv(params["csv"])
                return cls.tabulated(params["q"], params["t"])
        except KeyError as e:
            raise ConfigError(f"{prefix}.params.{e.args[0]}", "缺少表格数据")
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{prefix}.params", str(e))
        raise ConfigError(f"{prefix}.kind", f"未知的 T 矩阵类型: {kind}")


def load_tmatrix_csv(path: str) -> TMatrixProfile:
    """读取两列 (q, t) CSV，允许一行表头"""
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError("gas.t_matrix.params.csv", f"文件不存在: {path}")
    table = np.genfromtxt(file_path, delimiter=",", comments="#")
    table = np.atleast_2d(table)
    if table.shape[1] < 2:
        raise ConfigError("gas.t_matrix.params.csv", "CSV 至少需要两列 (q, t)")
    table = table[~np.isnan(table[:, :2]).any(axis=1)]
    logger.debug(f"[Kinetic] 读取 T 矩阵表格: {file_path}, {len(table)} 行")
    return TMatrixProfile.tabulated(table[:, 0], table[:, 1])


@dataclass(frozen=True)
class GasModel:
    """气体参数"""
    m: float
    z: float
    n: float
    beta: float
    t_matrix: TMatrixProfile = field(default_factory=TMatrixProfile)

    def __post_init__(self):
        for name in ("m", "z", "n", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InvalidArgumentError(f"气体参数 {name} 必须为正有限数，实际为 {value}")

    def to_dict(self) -> Dict[str, Any]:
        return {"m": self.m, "z": self.z, "n": self.n, "beta": self.beta, "t_matrix": self.t_matrix.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], prefix: str = "gas") -> "GasModel":
        values = {}
        for key in ("m", "z", "n", "beta"):
            if key not in data:
                raise ConfigError(f"{prefix}.{key}", "缺少必填气体参数")
            value = data[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{prefix}.{key}", f"应为数值，实际为 {value!r}")
            values[key] = float(value)
        profile = TMatrixProfile.from_dict(data.get("t_matrix", {}), f"{prefix}.t_matrix")
        try:
            return cls(t_matrix=profile, **values)
        except InvalidArgumentError as e:
            raise ConfigError(prefix, str(e))


@dataclass(frozen=True)
class LatticeQLBESpec:
    """格点 QLBE 描述"""
    grid: BasisSpec
    q_max_index: int
    M: float = 1.0

    def __post_init__(self):
        if not self.grid.is_lattice:
            raise InvalidArgumentError(f"QLBE 需要动量格点，实际为 {self.grid.kind.value}")
        if self.q_max_index < 1:
            raise InvalidArgumentError(f"最大转移下标 K 必须 ≥ 1，实际为 {self.q_max_index}")
        if self.q_max_index >= 2 * self.grid.size:
            raise InvalidArgumentError(
                f"最大转移下标 K={self.q_max_index} 必须小于 2J={2 * self.grid.size}"
            )
        if not self.M > 0:
            raise InvalidArgumentError(f"测试粒子质量 M 必须为正数，实际为 {self.M}")

    @property
    def transfers(self) -> List[int]:
        """转移下标，固定顺序 −K..−1, 1..K"""
        K = self.q_max_index
        return list(range(-K, 0)) + list(range(1, K + 1))

    def to_dict(self) -> Dict[str, Any]:
        return {"grid": self.grid.to_dict(), "q_max_index": self.q_max_index, "M": self.M}


@dataclass(frozen=True)
class FrictionResult:
    gamma: float
    error: float
    integral: float

    def to_dict(self) -> Dict[str, float]:
        return {"gamma": self.gamma, "quadrature_error": self.error, "integral": self.integral}


@dataclass
class BrownianLimitReport:
    mass_ratio: float
    in_regime: bool
    gamma_1d: float
    D_pp: float
    defects: List[float]
    warnings: List[str] = field(default_factory=list)

    @property
    def defect(self) -> float:
        return max(self.defects, default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mass_ratio": self.mass_ratio,
            "in_regime": self.in_regime,
            "gamma_1d": self.gamma_1d,
            "D_pp": self.D_pp,
            "defect": self.defect,
            "defects": list(self.defects),
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# 结构因子与求积
# ---------------------------------------------------------------------------

def s_mb(q, E, gas: GasModel, hbar: float = 1.0):
    """Maxwell-Boltzmann 动态结构因子

    S(q,E) = (2πħ)⁻³·(2πm²/(nβq))·z·exp[−(β/8m)(2mE+q²)²/q²]

    q、E 可以是数组（按 numpy 广播）。

    Raises:
        InvalidArgumentError: q ≤ 0
    """
    q = np.asarray(q, dtype=float)
    E = np.asarray(E, dtype=float)
    if np.any(q <= 0):
        raise InvalidArgumentError("结构因子要求动量转移 q > 0")
    m, beta = gas.m, gas.beta
    prefactor = (2.0 * math.pi * m ** 2 / (gas.n * beta * q)) * gas.z / (2.0 * math.pi * hbar) ** 3
    value = prefactor * np.exp(-(beta / (8.0 * m)) * (2.0 * m * E + q ** 2) ** 2 / q ** 2)
    return float(value) if value.ndim == 0 else value


@with_refinement(QUAD_LIMITS, keyword="limit")
def _quad_at_limit(integrand, lower: float, upper: float, breakpoints: Sequence[float] = (),
                   *, limit: int) -> Tuple[float, float]:
    kwargs: Dict[str, Any] = {"epsabs": 0.0, "epsrel": QUAD_RTOL, "limit": limit}
    if breakpoints and math.isfinite(upper):
        kwargs["points"] = list(breakpoints)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, error = quad(integrand, lower, upper, **kwargs)
    problems = [w for w in caught if issubclass(w.category, IntegrationWarning)]
    if problems or (value != 0 and error > QUAD_RTOL * abs(value) * 10):
        raise QuadratureError(
            f"求积未达到相对容差 {QUAD_RTOL:g}（limit={limit}）",
            estimate=value,
            error=error,
        )
    return value, error


def _adaptive_integral(integrand, lower: float, upper: float, breakpoints: Sequence[float] = ()
                       ) -> Tuple[float, float]:
    """quad + 子区间上限细化；误差估计超过相对容差时视为未收敛"""
    return _quad_at_limit(integrand, lower, upper, tuple(breakpoints))


def _scaled_moment(profile: TMatrixProfile, scale: float, power: int) -> Tuple[float, float]:
    """∫₀^∞ q^power |t̃(q)|² e^{−(q/scale)²} dq，在 u = q/scale 上积分"""
    lower, upper = profile.support
    u_lower = lower / scale
    u_upper = upper / scale if math.isfinite(upper) else math.inf
    breakpoints = ()
    if profile.kind == "tabulated":
        breakpoints = tuple(q / scale for q in profile.q_table[1:-1])[:100]

    def integrand(u: float) -> float:
        t = float(profile.value(u * scale))
        return u ** power * t * t * math.exp(-u * u)

    value, error = _adaptive_integral(integrand, u_lower, u_upper, breakpoints)
    factor = scale ** (power + 1)
    return value * factor, error * factor


def friction_gamma(gas: GasModel, hbar: float = 1.0) -> FrictionResult:
    """三维摩擦系数

    γ = (1/3)·z·π²m²/(βħ)·4π∫₀^∞ q³|t̃(q)|² e^{−βq²/8m} dq；
    t̃ 为常数时等于 (128/3)π³·z·t0²·m⁴/(ħβ³)。

    Raises:
        QuadratureError: 所有细化等级均未收敛
    """
    scale = math.sqrt(8.0 * gas.m / gas.beta)
    integral, error = _scaled_moment(gas.t_matrix, scale, 3)
    prefactor = (1.0 / 3.0) * gas.z * math.pi ** 2 * gas.m ** 2 / (gas.beta * hbar) * 4.0 * math.pi
    gamma = prefactor * integral
    logger.info(f"[Kinetic] 摩擦系数 γ={gamma:.10g}（求积误差 {prefactor * error:.3e}）")
    return FrictionResult(gamma, prefactor * error, integral)


def friction_gamma_1d(gas: GasModel, M: float, hbar: float = 1.0) -> FrictionResult:
    """一维格点约化下的摩擦系数（⟨p⟩ 以 2γ 衰减）

    γ₁ = (βr(1+r)/(2m))∫₀^∞ q·K(q)·e^{−β(1+r)²q²/8m} dq，
    K(q) = (2π/ħ)|t̃(q)|²(2πm²z/β)，r = m/M；t̃ 为常数时 γ₁ = 2K·r/(1+r)。
    """
    if not M > 0:
        raise InvalidArgumentError(f"M 必须为正数，实际为 {M}")
    r = gas.m / M
    scale = math.sqrt(8.0 * gas.m / gas.beta) / (1.0 + r)
    integral, error = _scaled_moment(gas.t_matrix, scale, 1)
    kernel = (2.0 * math.pi / hbar) * (2.0 * math.pi * gas.m ** 2 * gas.z / gas.beta)
    prefactor = gas.beta * r * (1.0 + r) / (2.0 * gas.m) * kernel
    return FrictionResult(prefactor * integral, prefactor * error, integral)


def derived_diffusion(gamma: float, ctx: ThermalContext) -> Tuple[float, float]:
    """(D_xx, D_pp) = (βħ²γ/8M, 2Mγ/β)"""
    if gamma < 0 or not math.isfinite(gamma):
        raise InvalidArgumentError(f"γ 必须为非负有限数，实际为 {gamma}")
    if math.isinf(ctx.beta):
        raise InvalidArgumentError("导出扩散系数需要有限的 β")
    d_xx = ctx.beta * ctx.hbar ** 2 * gamma / (8.0 * ctx.M)
    d_pp = 2.0 * ctx.M * gamma / ctx.beta
    return d_xx, d_pp


# ---------------------------------------------------------------------------
# 格点 QLBE
# ---------------------------------------------------------------------------

def _shift_matrix(dimension: int, k: int, values: np.ndarray) -> sp.csr_matrix:
    """Σ_j values_j |j+k⟩⟨j|（越界项丢弃）"""
    cols = np.arange(dimension)
    rows = cols + k
    keep = (rows >= 0) & (rows < dimension)
    return sp.csr_matrix((values[keep].astype(complex), (rows[keep], cols[keep])), shape=(dimension, dimension))


def qlbe_rates(spec: LatticeQLBESpec, gas: GasModel, hbar: float) -> List[Tuple[int, np.ndarray]]:
    """每个转移 k 的跃迁速率 c(q)²·S(|q|, E(q, p_j))（对所有 j，含越界项）"""
    grid = spec.grid
    momenta = grid.momenta()
    delta = grid.spacing
    rates: List[Tuple[int, np.ndarray]] = []
    for k in spec.transfers:
        q = k * delta
        energy = ((momenta + q) ** 2 - momenta ** 2) / (2.0 * spec.M)
        t = float(gas.t_matrix.value(abs(q)))
        c_sq = (2.0 * math.pi / hbar) * (2.0 * math.pi * hbar) ** 3 * gas.n * t * t * delta
        rates.append((k, c_sq * np.asarray(s_mb(abs(q), energy, gas, hbar))))
    return rates


def qlbe_jump_operators(spec: LatticeQLBESpec, gas: GasModel, hbar: Optional[float] = None
                        ) -> Tuple[List[Tuple[float, sp.csr_matrix]], float]:
    """格点 QLBE 跳跃算符 J_q = Shift_k·diag(√(c²S))（稀疏）

    Returns:
        ((1.0, J_q) 列表, boundary_weight)，boundary_weight 为越界速率占总速率的比例
    """
    hbar = spec.grid.hbar if hbar is None else float(hbar)
    dimension = spec.grid.dimension
    jumps: List[Tuple[float, sp.csr_matrix]] = []
    total = 0.0
    lost = 0.0
    for k, rate in qlbe_rates(spec, gas, hbar):
        jumps.append((1.0, _shift_matrix(dimension, k, np.sqrt(rate))))
        targets = np.arange(dimension) + k
        outside = (targets < 0) | (targets >= dimension)
        total += float(np.sum(rate))
        lost += float(np.sum(rate[outside]))
    boundary_weight = lost / total if total > 0 else 0.0
    return jumps, boundary_weight


def lattice_hamiltonian(spec: LatticeQLBESpec) -> sp.csr_matrix:
    """p²/2M（格点对角）"""
    return sp.diags(spec.grid.momenta() ** 2 / (2.0 * spec.M)).astype(complex).tocsr()


def build_qlbe_lattice(spec: LatticeQLBESpec, gas: GasModel, hbar: Optional[float] = None) -> Superoperator:
    """一维动量格点上的量子线性 Boltzmann 生成元

    ℒ = −(i/ħ)[p²/2M, ·] + Σ_q (J_q ρ J_q† − ½{J_q†J_q, ρ})
    """
    hbar = spec.grid.hbar if hbar is None else float(hbar)
    jumps, boundary_weight = qlbe_jump_operators(spec, gas, hbar)
    matrix = assemble_lindblad(lattice_hamiltonian(spec), jumps, hbar, spec.grid.dimension)
    logger.info(
        f"[Kinetic] QLBE 格点生成元: d={spec.grid.dimension}, K={spec.q_max_index}, "
        f"boundary_weight={boundary_weight:.3e}"
    )
    return Superoperator(spec.grid, matrix, "qlbe_1d", {
        "family": "qlbe_1d",
        "q_max_index": spec.q_max_index,
        "M": spec.M,
        "boundary_weight": boundary_weight,
        "mass_ratio": gas.m / spec.M,
    })


def qbm_momentum_action(f: np.ndarray, momenta: np.ndarray, gamma: float, D_pp: float) -> np.ndarray:
    """动理学 QBM 在动量对角态上的作用：2γ∂_p(p·f) + D_pp·∂²_p f（二阶中心差分）"""
    f = np.asarray(f, dtype=float)
    momenta = np.asarray(momenta, dtype=float)
    drift = np.gradient(momenta * f, momenta)
    curvature = np.gradient(np.gradient(f, momenta), momenta)
    return 2.0 * gamma * drift + D_pp * curvature


def _default_test_states(momenta: np.ndarray, p_th: float) -> List[np.ndarray]:
    states = []
    for center, width in ((0.5, 0.8), (0.0, 1.3), (-0.3, 1.0)):
        f = np.exp(-0.5 * ((momenta - center * p_th) / (width * p_th)) ** 2)
        states.append(f / f.sum())
    return states


def brownian_limit_check(spec: LatticeQLBESpec, gas: GasModel, ctx: Optional[ThermalContext] = None,
                         test_states: Optional[Sequence[np.ndarray]] = None,
                         hbar: Optional[float] = None) -> BrownianLimitReport:
    """小动量转移极限检验

    在若干非热的动量对角高斯态上比较格点 QLBE 的作用与
    2γ₁∂_p(pf) + D_pp∂²_p f（γ₁ 来自 friction_gamma_1d，D_pp = 2Mγ₁/β），
    只比较远离边界的体内格点，返回相对 L2 偏差。
    m/M > 0.1 时标记 in_regime=False 并给出警告。

    Raises:
        PreconditionError: 格点未能分辨热动量 p_th = √(M/β)（要求 Δ ≤ p_th/4 且 JΔ ≥ 3p_th）
    """
    hbar = spec.grid.hbar if hbar is None else float(hbar)
    beta = ctx.beta if ctx is not None else gas.beta
    grid = spec.grid
    mass_ratio = gas.m / spec.M
    p_th = math.sqrt(spec.M / beta)

    if grid.spacing > 0.25 * p_th:
        raise PreconditionError(f"格点间距 Δ={grid.spacing:g} 大于 p_th/4={0.25 * p_th:g}", precondition="spacing")
    if grid.size * grid.spacing < 3.0 * p_th:
        raise PreconditionError(
            f"格点半宽 JΔ={grid.size * grid.spacing:g} 小于 3p_th={3.0 * p_th:g}", precondition="extent"
        )

    notes: List[str] = []
    in_regime = mass_ratio <= BROWNIAN_MASS_RATIO
    if not in_regime:
        notes.append(f"m/M={mass_ratio:g} 超出小质量比假设（≤ {BROWNIAN_MASS_RATIO:g}）")
        logger.warning(f"[Kinetic] 布朗极限检验超出适用范围: m/M={mass_ratio:g}")

    gamma_1d = friction_gamma_1d(gas, spec.M, hbar).gamma
    d_pp = 2.0 * spec.M * gamma_1d / beta
    momenta = grid.momenta()
    jumps, _ = qlbe_jump_operators(spec, gas, hbar)
    hamiltonian = lattice_hamiltonian(spec)

    bulk_half = grid.size - spec.q_max_index - 2
    if bulk_half < 1:
        raise PreconditionError(f"体内格点为空（J={grid.size}, K={spec.q_max_index}）", precondition="bulk")
    bulk = slice(grid.size - bulk_half, grid.size + bulk_half + 1)

    states = list(test_states) if test_states is not None else _default_test_states(momenta, p_th)
    defects: List[float] = []
    for f in states:
        f = np.asarray(f, dtype=float)
        lattice_out = np.real(np.diagonal(lindblad_action(hamiltonian, jumps, np.diag(f).astype(complex), hbar)))
        fp_out = qbm_momentum_action(f, momenta, gamma_1d, d_pp)
        reference = np.linalg.norm(fp_out[bulk])
        defects.append(float(np.linalg.norm(lattice_out[bulk] - fp_out[bulk]) / reference))

    logger.info(f"[Kinetic] 布朗极限: m/M={mass_ratio:g}, γ₁={gamma_1d:.6g}, defect={max(defects):.3e}")
    return BrownianLimitReport(mass_ratio, in_regime, gamma_1d, d_pp, defects, notes)
