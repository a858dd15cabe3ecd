# -*- coding: utf-8 -*-
"""
生成元工厂模块 - 构建各类量子 Fokker-Planck 生成元

本模块把系数空间与有限维算符代数连接起来，在给定基矢上构建超算符：

生成元族：
- general_xp: 嵌套对易子/反对易子形式（七项）
- kraus: 由 Kraus 分解得到的 Lindblad 形式（与 general_xp 严格相等）
- aa_form: 以 a、a† 表示的 Lindblad 形式（任意长度 l）
- quantum_optical: 量子光学主方程 η(N_β+1)D[a] + ηN_β D[a†]
- m_photon: 相位扩散 + m 光子过程
- holevo_shift: 平移协变生成元的一般结构（W 幂次 + N 的函数）
- qbm: 平移协变量子布朗运动（x-p 形式或阶梯算符形式）
- kinetic_qbm: 动理学极限下 D_px = 0 的量子布朗运动
- qlbe_1d: 一维动量格点上的量子线性 Boltzmann 方程（见 kinetic 模块）

主要类：
- GeneratorFamily: 生成元族枚举
- GeneratorSpec: 生成元描述（族 + 参数 + 基矢）
- LadderWeights: 阶梯算符形式中的各项权重

主要函数：
- build_general_xp / build_kraus_form / build_aa_form
- build_quantum_optical / build_m_photon / build_holevo_shift
- build_qbm / build_kinetic_qbm / qbm_ladder_weights
- qo_holevo_functions / m_photon_holevo_functions
- build_generator: 按 GeneratorSpec 分派
- default_hamiltonian: 各族的自由哈密顿量

截断约定：
- 所有生成元直接由截断算符构建，反对易子使用实际的 L†L，因而严格保迹
- [x,[p,·]] 与 [p,[x,·]] 在截断基上不相等，两项都保留
- Fock 基上的构建会在 meta 中报告最高两个能级上的跳跃权重（泄漏估计）

Author: 约瑟夫.k && 白泽
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .coefficients import (
    BilinearCoefficients,
    ThermalContext,
    is_completely_positive,
    kraus_from_coefficients,
    qbm_constrained,
)
from .errors import BasisMismatchError, InvalidArgumentError
from .fock_core import (
    BasisOps,
    BasisSpec,
    MatrixOperator,
    Superoperator,
    anticommutator_superop,
    build_basis_ops,
    commutator_superop,
    dissipator_superop,
    function_of_hermitian,
    lindblad_superoperator,
    sprepost,
    spre,
    spost,
    top_level_weight,
)
from .logger import get_logger

logger = get_logger("generator_factory")

DiagonalFunction = Union[Callable[[np.ndarray], np.ndarray], Sequence[float], np.ndarray]


class GeneratorFamily(Enum):
    """生成元族"""
    GENERAL_XP = "general_xp"
    AA_FORM = "aa_form"
    QUANTUM_OPTICAL = "quantum_optical"
    M_PHOTON = "m_photon"
    QBM = "qbm"
    KINETIC_QBM = "kinetic_qbm"
    QLBE_1D = "qlbe_1d"


@dataclass(frozen=True)
class GeneratorSpec:
    """生成元描述

    params 中按族使用的键：
    - general_xp / aa_form: hamiltonian（free / oscillator / number / none）
    - quantum_optical: eta
    - m_photon: gamma_0, gamma_m
    - qbm: gamma, D_px, form（xp / ladder）
    - kinetic_qbm: gamma（缺省时由 gas 计算摩擦系数）, form
    - qlbe_1d: q_max_index
    """
    family: GeneratorFamily
    basis: BasisSpec
    coefficients: Optional[BilinearCoefficients] = None
    thermal: Optional[ThermalContext] = None
    params: Dict[str, Any] = field(default_factory=dict)
    gas: Any = None

    def __post_init__(self):
        if not isinstance(self.family, GeneratorFamily):
            object.__setattr__(self, "family", GeneratorFamily(self.family))

    def param(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"family": self.family.value, "basis": self.basis.to_dict(),
                                "params": dict(self.params)}
        if self.coefficients is not None:
            data["coefficients"] = self.coefficients.to_dict()
        if self.thermal is not None:
            data["thermal"] = self.thermal.to_dict()
        if self.gas is not None and hasattr(self.gas, "to_dict"):
            data["gas"] = self.gas.to_dict()
        return data


@dataclass(frozen=True)
class LadderWeights:
    """阶梯算符形式的权重

    ℒ = −(i/ħ)[H0,·] − (hamiltonian_coefficient/2)[a² − a†², ·]
        + d_a·D[a] + d_a_dag·D[a†] + (aa_block·(aρa − ½{a²,ρ}) + h.c.)
    """
    hamiltonian_coefficient: float
    d_a: float
    d_a_dag: float
    aa_block: complex

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hamiltonian_coefficient": self.hamiltonian_coefficient,
            "d_a": self.d_a,
            "d_a_dag": self.d_a_dag,
            "aa_block_re": float(np.real(self.aa_block)),
            "aa_block_im": float(np.imag(self.aa_block)),
        }


# ---------------------------------------------------------------------------
# 哈密顿量
# ---------------------------------------------------------------------------

def _diagonal_values(func: Optional[DiagonalFunction], grid: np.ndarray) -> np.ndarray:
    if func is None:
        return np.zeros_like(grid, dtype=float)
    if callable(func):
        values = np.asarray(func(grid), dtype=float)
    else:
        values = np.asarray(func, dtype=float)
    if values.shape != grid.shape:
        raise InvalidArgumentError(f"对角函数长度 {values.shape} 与基矢维数 {grid.shape} 不一致")
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("对角函数含非有限值")
    return values


def free_hamiltonian(ops: BasisOps, M: float) -> MatrixOperator:
    """p²/2M（截断 p 的平方）"""
    return (ops.p @ ops.p) / (2.0 * M)


def oscillator_hamiltonian(ops: BasisOps, M: float, omega: float) -> MatrixOperator:
    """p²/2M + ½Mω²x²"""
    if ops.x is None:
        raise BasisMismatchError("振子哈密顿量需要 Fock 基")
    return free_hamiltonian(ops, M) + (ops.x @ ops.x) * (0.5 * M * omega ** 2)


def number_hamiltonian(ops: BasisOps, omega: float, energy_shift: Optional[DiagonalFunction] = None
                       ) -> MatrixOperator:
    """ħω(N + ½)，可附加频移函数 f(N)"""
    if ops.n_op is None:
        raise BasisMismatchError("数算符哈密顿量需要 Fock 基")
    levels = np.arange(ops.basis.dimension, dtype=float)
    values = ops.basis.hbar * omega * (levels + 0.5) + _diagonal_values(energy_shift, levels)
    return MatrixOperator.diagonal(ops.basis, values)


def momentum_function_hamiltonian(ops: BasisOps, func: Callable[[np.ndarray], np.ndarray]) -> MatrixOperator:
    """H0(p)：函数作用在截断 p 的谱分解上"""
    return function_of_hermitian(ops.p, lambda values: np.asarray(func(values), dtype=float))


def default_hamiltonian(spec: GeneratorSpec, ops: Optional[BasisOps] = None) -> MatrixOperator:
    """各生成元族对应的自由哈密顿量（用于 Gibbs 态与 verify_gibbs）"""
    ctx = spec.thermal
    if ops is None:
        ops = build_basis_ops(spec.basis, family_length(spec))
    family = spec.family
    if family in (GeneratorFamily.QUANTUM_OPTICAL, GeneratorFamily.M_PHOTON):
        return number_hamiltonian(ops, ctx.omega)
    mass = ctx.M if ctx is not None else 1.0
    if family in (GeneratorFamily.QBM, GeneratorFamily.KINETIC_QBM, GeneratorFamily.QLBE_1D):
        return free_hamiltonian(ops, mass)
    kind = spec.param("hamiltonian", "free")
    if kind == "none":
        return MatrixOperator.zeros(spec.basis)
    if kind == "number":
        return number_hamiltonian(ops, ctx.omega)
    if kind == "oscillator":
        return oscillator_hamiltonian(ops, mass, ctx.omega)
    if kind == "free":
        return free_hamiltonian(ops, mass)
    raise InvalidArgumentError(f"未知的哈密顿量类型: {kind}")


def family_length(spec: GeneratorSpec) -> float:
    """各族默认长度：显式 l > 振子长度（ω > 0）> 热波长 > 1"""
    ctx = spec.thermal
    if ctx is None:
        return 1.0
    if ctx.l is not None:
        return ctx.l
    if spec.family in (GeneratorFamily.QBM, GeneratorFamily.KINETIC_QBM) and math.isfinite(ctx.beta):
        return ctx.thermal_wavelength
    if ctx.omega > 0:
        return ctx.oscillator_length
    if math.isfinite(ctx.beta):
        return ctx.thermal_wavelength
    return 1.0


# ---------------------------------------------------------------------------
# 通用构建辅助
# ---------------------------------------------------------------------------

def _require_fock(basis: BasisSpec, what: str) -> None:
    if not basis.is_fock:
        raise BasisMismatchError(f"{what} 需要 Fock 基，实际为 {basis.kind.value}")


def _check_hamiltonian(H0: MatrixOperator, basis: BasisSpec) -> None:
    if H0.basis != basis:
        raise BasisMismatchError(f"H0 基矢 {H0.basis} 与目标基矢 {basis} 不一致")
    if not H0.is_hermitian():
        raise InvalidArgumentError(f"H0 不厄米（偏差 {H0.hermiticity_defect():.3e}）")


def _with_correction(H0: MatrixOperator, correction: Optional[DiagonalFunction]) -> MatrixOperator:
    if correction is None:
        return H0
    levels = np.arange(H0.dimension, dtype=float)
    return H0 + MatrixOperator.diagonal(H0.basis, _diagonal_values(correction, levels))


def _pair_term(k: complex, op: np.ndarray) -> sp.csr_matrix:
    """k(XρX − ½{X²,ρ}) + k*(X†ρX† − ½{X†²,ρ})"""
    op = sp.csr_matrix(op)
    op_dag = op.conj().T.tocsr()
    sq = (op @ op).tocsr()
    sq_dag = (op_dag @ op_dag).tocsr()
    term = k * (sprepost(op, op) - 0.5 * (spre(sq) + spost(sq)))
    term = term + np.conj(k) * (sprepost(op_dag, op_dag) - 0.5 * (spre(sq_dag) + spost(sq_dag)))
    return term.tocsr()


def _finish(basis: BasisSpec, matrix: sp.spmatrix, label: str, jumps: Sequence[Tuple[float, Any]] = (),
            **meta: Any) -> Superoperator:
    if basis.is_fock and jumps:
        meta.setdefault("leakage_estimate", top_level_weight(jumps, basis))
    meta.setdefault("family", label)
    warnings = meta.get("warnings") or []
    for message in warnings:
        logger.warning(f"[GeneratorFactory] {label}: {message}")
    logger.debug(f"[GeneratorFactory] 构建完成: {label}, d={basis.dimension}")
    return Superoperator(basis, matrix, label, meta)


# ---------------------------------------------------------------------------
# 一般双线性形式
# ---------------------------------------------------------------------------

def build_general_xp(c: BilinearCoefficients, H0: MatrixOperator, basis: BasisSpec, l: float = 1.0,
                     diagonal_correction: Optional[DiagonalFunction] = None) -> Superoperator:
    """嵌套对易子形式的一般双线性生成元

    ℒ = −(i/ħ)[H0,·] − (i/ħ)((μ−γ)/2)[{x,p},·] − (i/ħ)γ[x,{p,·}]
        − (D_pp/ħ²)[x,[x,·]] − (D_xx/ħ²)[p,[p,·]]
        + (D_px/ħ²)[x,[p,·]] + (D_px/ħ²)[p,[x,·]]

    Args:
        c: 系数（可以不满足完全正定，用于 lint）
        H0: 自由哈密顿量
        basis: Fock 基
        l: x、p 的长度尺度
        diagonal_correction: 可选的 H0 对角修正（频移/能移）
    """
    _require_fock(basis, "build_general_xp")
    _check_hamiltonian(H0, basis)
    ops = build_basis_ops(basis, l)
    H0 = _with_correction(H0, diagonal_correction)
    hbar = basis.hbar

    x, p = ops.x.entries, ops.p.entries
    cx, cp = commutator_superop(x), commutator_superop(p)
    xp_anti = x @ p + p @ x

    matrix = (-1j / hbar) * commutator_superop(H0.entries)
    matrix = matrix + (-1j / hbar) * (0.5 * (c.mu - c.gamma)) * commutator_superop(xp_anti)
    matrix = matrix + (-1j / hbar) * c.gamma * (cx @ anticommutator_superop(p))
    matrix = matrix - (c.D_pp / hbar ** 2) * (cx @ cx)
    matrix = matrix - (c.D_xx / hbar ** 2) * (cp @ cp)
    matrix = matrix + (c.D_px / hbar ** 2) * (cx @ cp + cp @ cx)

    jumps: List[Tuple[float, Any]] = []
    warnings: List[str] = []
    if is_completely_positive(c):
        kv = kraus_from_coefficients(c)
        jumps = [(1.0 / hbar, alpha * ops.p.entries + beta * ops.x.entries) for alpha, beta in kv.pairs]
    else:
        warnings.append("系数不满足完全正定条件，生成元仅用于 lint")

    return _finish(basis, matrix, "general_xp", jumps, l=l, warnings=warnings,
                   coefficients=c.to_dict())


def build_kraus_form(c: BilinearCoefficients, H0: MatrixOperator, basis: BasisSpec, l: float = 1.0
                     ) -> Superoperator:
    """Kraus 分解得到的 Lindblad 形式

    ℒ = −(i/ħ)[H0 + (μ/2){x,p}, ·] + (1/ħ) Σ D[α_i p + β_i x]

    Raises:
        NotCompletelyPositiveError: 系数不满足完全正定条件
    """
    _require_fock(basis, "build_kraus_form")
    _check_hamiltonian(H0, basis)
    ops = build_basis_ops(basis, l)
    kv = kraus_from_coefficients(c)

    anti = ops.x @ ops.p + ops.p @ ops.x
    H = H0 + anti * (0.5 * c.mu)
    jumps = [(1.0 / basis.hbar, ops.p * alpha + ops.x * beta) for alpha, beta in kv.pairs]
    gen = lindblad_superoperator(H, jumps, label="kraus")
    return gen.with_meta(family="kraus", l=l, kraus_rank=len(kv),
                         leakage_estimate=top_level_weight(jumps, basis))


def aa_form_weights(c: BilinearCoefficients, l: float) -> LadderWeights:
    """任意长度 l 下 a-a† 形式的权重

    d_a = D_xx/l² + D_pp l²/ħ² + γ，d_a_dag = D_xx/l² + D_pp l²/ħ² − γ，
    aa_block = −(D_xx/l² − D_pp l²/ħ² − 2iD_px/ħ)
    """
    if l <= 0:
        raise InvalidArgumentError(f"l 必须为正数，实际为 {l}")
    hbar = c.hbar
    sym = c.D_xx / l ** 2 + c.D_pp * l ** 2 / hbar ** 2
    aa_block = -(c.D_xx / l ** 2 - c.D_pp * l ** 2 / hbar ** 2 - 2j * c.D_px / hbar)
    return LadderWeights(c.mu, sym + c.gamma, sym - c.gamma, complex(aa_block))


def _assemble_ladder(weights: LadderWeights, H0: MatrixOperator, ops: BasisOps) -> sp.csr_matrix:
    basis = ops.basis
    a = ops.a.entries
    a_dag = ops.a_dag.entries
    squeeze = a @ a - a_dag @ a_dag

    matrix = (-1j / basis.hbar) * commutator_superop(H0.entries)
    matrix = matrix - (0.5 * weights.hamiltonian_coefficient) * commutator_superop(squeeze)
    matrix = matrix + weights.d_a * dissipator_superop(a)
    matrix = matrix + weights.d_a_dag * dissipator_superop(a_dag)
    if weights.aa_block != 0:
        matrix = matrix + _pair_term(weights.aa_block, a)
    return matrix.tocsr()


def build_aa_form(c: BilinearCoefficients, l: float, H0: MatrixOperator, basis: BasisSpec) -> Superoperator:
    """a-a† 形式的一般双线性生成元（与 build_general_xp 在相同 l 下严格相等）"""
    _require_fock(basis, "build_aa_form")
    _check_hamiltonian(H0, basis)
    ops = build_basis_ops(basis, l)
    weights = aa_form_weights(c, l)
    matrix = _assemble_ladder(weights, H0, ops)
    return _finish(basis, matrix, "aa_form", l=l, weights=weights.to_dict())


# ---------------------------------------------------------------------------
# 平移协变（U(1)）族
# ---------------------------------------------------------------------------

def build_quantum_optical(ctx: ThermalContext, eta: float, basis: BasisSpec,
                          energy_shift: Optional[DiagonalFunction] = None) -> Superoperator:
    """量子光学主方程

    ℒ = −(i/ħ)[ħω(N+½) + f(N), ·] + η(N_β+1)D[a] + ηN_β D[a†]，N_β = 1/(e^{βħω}−1)
    """
    _require_fock(basis, "build_quantum_optical")
    if ctx.omega <= 0:
        raise InvalidArgumentError(f"量子光学主方程需要 ω > 0，实际为 {ctx.omega}")
    if not eta > 0:
        raise InvalidArgumentError(f"η 必须为正数，实际为 {eta}")

    ops = build_basis_ops(basis, ctx.length(ctx.oscillator_length))
    n_beta = ctx.n_beta
    H0 = number_hamiltonian(ops, ctx.omega, energy_shift)
    jumps = [(eta * (n_beta + 1.0), ops.a), (eta * n_beta, ops.a_dag)]
    gen = lindblad_superoperator(H0, jumps, label="quantum_optical")
    return gen.with_meta(family="quantum_optical", n_beta=n_beta, eta=eta, l=ops.l,
                         leakage_estimate=top_level_weight(jumps, basis))


def build_m_photon(ctx: ThermalContext, gamma_0: float, gamma_m: Sequence[float], basis: BasisSpec
                   ) -> Superoperator:
    """相位扩散 + m 光子过程

    ℒ = −(i/ħ)[H0(N),·] − γ_0[N,[N,·]]
        + Σ_m γ_m {(coth+1)^m D[a^m] + (coth−1)^m D[a†^m]}，coth = coth(βħω/2)

    m_max 超过 N_t/4 或 m ≥ 2 之后速率不单调递减时给出警告。
    """
    _require_fock(basis, "build_m_photon")
    if ctx.omega <= 0:
        raise InvalidArgumentError(f"m 光子生成元需要 ω > 0，实际为 {ctx.omega}")
    rates = [float(g) for g in gamma_m]
    if gamma_0 < 0 or any(g < 0 for g in rates):
        raise InvalidArgumentError(f"速率必须非负: gamma_0={gamma_0}, gamma_m={rates}")

    dim = basis.dimension
    warnings: List[str] = []
    if len(rates) > dim / 4:
        warnings.append(f"m_max={len(rates)} 超过截断维数的四分之一（N_t={dim}）")
    for m in range(2, len(rates)):
        if rates[m] > rates[m - 1]:
            warnings.append(f"γ_{m + 1}={rates[m]} 大于 γ_{m}={rates[m - 1]}，高阶速率应迅速趋于零")

    ops = build_basis_ops(basis, ctx.length(ctx.oscillator_length))
    coth = ctx.coth_half
    H0 = number_hamiltonian(ops, ctx.omega)

    jumps: List[Tuple[float, MatrixOperator]] = []
    if gamma_0 > 0:
        jumps.append((2.0 * gamma_0, ops.n_op))
    for m, rate in enumerate(rates, start=1):
        if rate == 0:
            continue
        jumps.append((rate * (coth + 1.0) ** m, ops.a.power(m)))
        jumps.append((rate * (coth - 1.0) ** m, ops.a_dag.power(m)))

    gen = lindblad_superoperator(H0, jumps, label="m_photon")
    return gen.with_meta(family="m_photon", gamma_0=gamma_0, gamma_m=rates, warnings=warnings, l=ops.l,
                         leakage_estimate=top_level_weight(jumps, basis))


def build_holevo_shift(A: Mapping[int, DiagonalFunction], H: Optional[DiagonalFunction],
                       basis: BasisSpec) -> Superoperator:
    """平移协变生成元的一般结构

    ℒ = −(i/ħ)[H(N),·] + D[A_0(N)] + Σ_{m≥1} D[W^m A_m(N)] + Σ_{m≥1} D[W†^m A_{−m}(N)]

    D[L] 使用实际的 L†L 作为反对易子。

    Args:
        A: m ↦ A_m，在 n = 0..N_t−1 上的表值或可调用对象
        H: 实函数 H(n)（表值或可调用对象），None 表示零
        basis: Fock 基

    Raises:
        InvalidArgumentError: max|m| ≥ N_t
    """
    _require_fock(basis, "build_holevo_shift")
    dim = basis.dimension
    levels = np.arange(dim, dtype=float)
    m_max = max((abs(int(m)) for m in A), default=0)
    if m_max >= dim:
        raise InvalidArgumentError(f"m_max={m_max} 必须小于截断维数 N_t={dim}")

    w = build_basis_ops(basis).w_shift.entries
    H_op = MatrixOperator.diagonal(basis, _diagonal_values(H, levels))

    jumps: List[Tuple[float, MatrixOperator]] = []
    for m in sorted(A, key=lambda k: (abs(int(k)), int(k))):
        values = np.asarray(A[m](levels) if callable(A[m]) else A[m], dtype=complex)
        if values.shape != levels.shape:
            raise InvalidArgumentError(f"A_{m} 的表值长度 {values.shape} 与 N_t={dim} 不一致")
        diag = np.diag(values)
        m = int(m)
        if m > 0:
            jump = np.linalg.matrix_power(w, m) @ diag
        elif m < 0:
            jump = np.linalg.matrix_power(w.conj().T, -m) @ diag
        else:
            jump = diag
        if np.any(jump != 0):
            jumps.append((1.0, MatrixOperator(basis, jump)))

    gen = lindblad_superoperator(H_op, jumps, label="holevo_shift")
    return gen.with_meta(family="holevo_shift", m_max=m_max,
                         leakage_estimate=top_level_weight(jumps, basis))


def _falling_factorial_sqrt(levels: np.ndarray, m: int, rising: bool) -> np.ndarray:
    """√((n+m)!/n!)（rising）或 √(n!/(n−m)!)（n < m 时为 0）"""
    out = np.ones_like(levels, dtype=float)
    for k in range(m):
        factor = levels + 1 + k if rising else levels - k
        out = out * np.clip(factor, 0.0, None)
    return np.sqrt(out)


def m_photon_holevo_functions(ctx: ThermalContext, gamma_0: float, gamma_m: Sequence[float], dimension: int
                              ) -> Tuple[Dict[int, np.ndarray], np.ndarray]:
    """m 光子生成元对应的 A 函数表与 H(n)

    A_0(n) = √(2γ_0)·n（对应 −γ_0[N,[N,·]]）
    A_m(n) = √γ_m(β)·√((n+m)!/n!)
    A_{−m}(n) = e^{mβħω/2}·√γ_m(β)·√(n!/(n−m)!)，γ_m(β) = γ_m(coth − 1)^m
    """
    if ctx.omega <= 0:
        raise InvalidArgumentError(f"需要 ω > 0，实际为 {ctx.omega}")
    levels = np.arange(dimension, dtype=float)
    coth = ctx.coth_half
    x = ctx.beta_hbar_omega

    table: Dict[int, np.ndarray] = {}
    if gamma_0 > 0:
        table[0] = math.sqrt(2.0 * gamma_0) * levels
    for m, rate in enumerate(gamma_m, start=1):
        if rate == 0:
            continue
        rate_beta = rate * (coth - 1.0) ** m
        boost = math.exp(0.5 * m * x) if math.isfinite(x) and 0.5 * m * x < 700 else math.inf
        lowering = boost * math.sqrt(rate_beta)
        if not math.isfinite(lowering):
            lowering = math.sqrt(rate * (coth + 1.0) ** m)
        table[m] = math.sqrt(rate_beta) * _falling_factorial_sqrt(levels, m, rising=True)
        table[-m] = lowering * _falling_factorial_sqrt(levels, m, rising=False)

    energies = ctx.hbar * ctx.omega * (levels + 0.5)
    return table, energies


def qo_holevo_functions(ctx: ThermalContext, gamma: float, dimension: int
                        ) -> Tuple[Dict[int, np.ndarray], np.ndarray]:
    """量子光学主方程对应的 A 函数表（A_1 = √γ(β)√(n+1)，A_{−1} = e^{βħω/2}√γ(β)√n）"""
    return m_photon_holevo_functions(ctx, 0.0, [gamma], dimension)


# ---------------------------------------------------------------------------
# 平移协变（R）族
# ---------------------------------------------------------------------------

def qbm_ladder_weights(ctx: ThermalContext, gamma: float, D_px: float, l: float) -> LadderWeights:
    """量子布朗运动阶梯算符形式的权重（任意 l，r = λ_th²/l²）

    d_a     = (γ/2)(r + 1/r + 2) + (2/(γħ²))·r·D_px²
    d_a_dag = (γ/2)(r + 1/r − 2) + (2/(γħ²))·r·D_px²
    aa_block = −[(γ/2)(r − 1/r) + 2(D_px/ħ)(r·D_px/(γħ) − i)]

    l = λ_th 时 d_a = 2γ + 2D_px²/(γħ²)，D_px = 0 时 aa_block = 0。
    """
    if not gamma > 0:
        raise InvalidArgumentError(f"量子布朗运动需要 γ > 0，实际为 {gamma}")
    if l <= 0:
        raise InvalidArgumentError(f"l 必须为正数，实际为 {l}")
    hbar = ctx.hbar
    r = ctx.thermal_wavelength ** 2 / l ** 2
    cross = (2.0 / (gamma * hbar ** 2)) * r * D_px ** 2
    d_a = 0.5 * gamma * (r + 1.0 / r + 2.0) + cross
    d_a_dag = 0.5 * gamma * (r + 1.0 / r - 2.0) + cross
    aa_block = -(0.5 * gamma * (r - 1.0 / r) + 2.0 * (D_px / hbar) * (r * D_px / (gamma * hbar) - 1j))
    return LadderWeights(gamma, d_a, d_a_dag, complex(aa_block))


def build_qbm(ctx: ThermalContext, gamma: float, D_px: float, basis: BasisSpec,
              H0: Optional[Union[MatrixOperator, Callable[[np.ndarray], np.ndarray]]] = None,
              form: str = "xp", l: Optional[float] = None) -> Superoperator:
    """平移协变量子布朗运动

    form="xp"：build_general_xp + qbm_constrained 系数；
    form="ladder"：阶梯算符形式，l = λ_th 时即最简形式。
    H0 缺省为 p²/2M；也可以给出 p 的实函数（作用在 p 的谱分解上）。

    Args:
        ctx: 热环境（β、M）
        gamma: 摩擦系数 γ > 0
        D_px: 自由系数
        basis: Fock 基
        H0: 自由哈密顿量
        form: "xp" 或 "ladder"
        l: 长度尺度，缺省为 ctx.l，再缺省为 λ_th
    """
    _require_fock(basis, "build_qbm")
    c = qbm_constrained(ctx, gamma, D_px)
    length = l if l is not None else ctx.length(ctx.thermal_wavelength)
    ops = build_basis_ops(basis, length)

    if H0 is None:
        H0 = free_hamiltonian(ops, ctx.M)
    elif callable(H0):
        H0 = momentum_function_hamiltonian(ops, H0)

    if form == "xp":
        gen = build_general_xp(c, H0, basis, length)
        weights = qbm_ladder_weights(ctx, gamma, D_px, length)
    elif form == "ladder":
        _check_hamiltonian(H0, basis)
        weights = qbm_ladder_weights(ctx, gamma, D_px, length)
        gen = _finish(basis, _assemble_ladder(weights, H0, ops), "qbm")
    else:
        raise InvalidArgumentError(f"未知的 QBM 形式: {form}（可选 xp / ladder）")

    return gen.with_meta(family="qbm", form=form, l=length, coefficients=c.to_dict(),
                         weights=weights.to_dict())


def build_kinetic_qbm(ctx: ThermalContext, gamma: float, basis: BasisSpec, form: str = "xp",
                      l: Optional[float] = None) -> Superoperator:
    """动理学极限的量子布朗运动：D_px = 0，D_xx = βħ²γ/8M，D_pp = 2Mγ/β"""
    gen = build_qbm(ctx, gamma, 0.0, basis, form=form, l=l)
    return gen.with_meta(family="kinetic_qbm")


# ---------------------------------------------------------------------------
# 分派
# ---------------------------------------------------------------------------

def _require(value: Any, what: str) -> Any:
    if value is None:
        raise InvalidArgumentError(f"GeneratorSpec 缺少 {what}")
    return value


def build_generator(spec: GeneratorSpec) -> Superoperator:
    """按 GeneratorSpec 构建生成元"""
    family = spec.family
    basis = spec.basis
    logger.info(f"[GeneratorFactory] 构建生成元: family={family.value}, d={basis.dimension}")

    if family is GeneratorFamily.QLBE_1D:
        from .kinetic import LatticeQLBESpec, build_qlbe_lattice

        ctx = _require(spec.thermal, "thermal")
        lattice = LatticeQLBESpec(basis, int(spec.param("q_max_index", 1)), ctx.M)
        return build_qlbe_lattice(lattice, _require(spec.gas, "gas"), basis.hbar)

    if family is GeneratorFamily.QUANTUM_OPTICAL:
        return build_quantum_optical(_require(spec.thermal, "thermal"), float(spec.param("eta", 1.0)), basis)

    if family is GeneratorFamily.M_PHOTON:
        return build_m_photon(_require(spec.thermal, "thermal"), float(spec.param("gamma_0", 0.0)),
                              spec.param("gamma_m", []), basis)

    if family is GeneratorFamily.QBM:
        return build_qbm(_require(spec.thermal, "thermal"), float(_require(spec.param("gamma"), "gamma")),
                         float(spec.param("D_px", 0.0)), basis, form=spec.param("form", "xp"))

    if family is GeneratorFamily.KINETIC_QBM:
        ctx = _require(spec.thermal, "thermal")
        gamma = spec.param("gamma")
        if gamma is None:
            from .kinetic import friction_gamma

            gamma = friction_gamma(_require(spec.gas, "gas 或 gamma"), ctx.hbar).gamma
        return build_kinetic_qbm(ctx, float(gamma), basis, form=spec.param("form", "xp"))

    c = _require(spec.coefficients, "coefficients")
    l = family_length(spec)
    H0 = default_hamiltonian(spec, build_basis_ops(basis, l))
    if family is GeneratorFamily.GENERAL_XP:
        return build_general_xp(c, H0, basis, l)
    if family is GeneratorFamily.AA_FORM:
        return build_aa_form(c, l, H0, basis)
    raise InvalidArgumentError(f"未知的生成元族: {family}")
