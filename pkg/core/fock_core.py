# -*- coding: utf-8 -*-
"""
有限维算符代数模块 - 截断 Fock 基 / 动量格点、超算符组装、Choi 矩阵

本模块是所有生成元构建的底层：
1. 基矢描述（截断 Fock 基或对称动量格点）
2. 基本算符 a、a†、x、p、N、W（或格点上的动量平移矩阵）
3. 密度矩阵及其校验
4. Lindblad 超算符组装（列堆叠向量化）
5. Choi 矩阵与完全正定性见证

向量化约定（全局唯一）：
    vec(X) 为列堆叠，vec(A X B) = (Bᵀ ⊗ A) vec(X)
    左乘 A  ->  I ⊗ A
    右乘 B  ->  Bᵀ ⊗ I

主要类：
- BasisSpec: 基矢描述（Fock 截断维数或格点半宽/间距，ħ）
- MatrixOperator: 基矢上的稠密复方阵
- DensityMatrix: 经过校验的密度矩阵
- Superoperator: 作用在向量化矩阵上的线性映射（内部稀疏存储）
- BasisOps: build_basis_ops 的返回记录

主要函数：
- build_basis_ops: 构建基本算符
- lindblad_superoperator: ρ ↦ −(i/ħ)[H,ρ] + Σ rate (LρL† − ½{L†L,ρ})
- choi_matrix: 超算符的 Choi 矩阵
- propagator_superoperator: e^{tℒ}
- thermal_state / fock_state / random_density_matrix: 常用态
- leakage: 截断边界上的权重

使用示例：
    basis = BasisSpec.fock(20)
    ops = build_basis_ops(basis, l=1.0)
    gen = lindblad_superoperator(ops.n_op * 1.0, [(0.5, ops.a)])
    rho = fock_state(basis, 1)
    out = gen.apply(rho)

截断策略：
- 生成元直接由截断算符构建，不做任何修正
- 泄漏通过 tr(ρ·|N_t−1⟩⟨N_t−1|)（格点上为两端动量的权重）监控并报告

Author: 约瑟夫.k && 白泽
"""
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import BasisMismatchError, InvalidArgumentError
from .logger import get_logger

logger = get_logger("fock_core")

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10

ArrayLike = Union[np.ndarray, sp.spmatrix]


class BasisKind(Enum):
    """基矢类型"""
    FOCK = "fock"  # 截断 Fock 基，维数 N_t
    LATTICE = "lattice"  # 对称动量格点 p_j = jΔ, j = −J..J
    DOUBLED = "doubled"  # 系统 ⊗ 辅助系统（Choi 矩阵所在空间）


@dataclass(frozen=True)
class BasisSpec:
    """基矢描述

    Fock 基时 size 为截断维数 N_t；格点时 size 为半宽 J，spacing 为 Δ。
    """
    kind: BasisKind
    size: int
    spacing: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not isinstance(self.kind, BasisKind):
            object.__setattr__(self, "kind", BasisKind(self.kind))
        if not np.isfinite(self.hbar) or self.hbar <= 0:
            raise InvalidArgumentError(f"hbar 必须为正数，实际为 {self.hbar}")
        if self.kind is BasisKind.FOCK and self.size < 2:
            raise InvalidArgumentError(f"Fock 截断维数必须 ≥ 2，实际为 {self.size}")
        if self.kind is BasisKind.LATTICE:
            if self.size < 1:
                raise InvalidArgumentError(f"格点半宽 J 必须 ≥ 1，实际为 {self.size}")
            if not np.isfinite(self.spacing) or self.spacing <= 0:
                raise InvalidArgumentError(f"格点间距 Δ 必须为正数，实际为 {self.spacing}")
        if self.kind is BasisKind.DOUBLED and self.size < 4:
            raise InvalidArgumentError(f"双系统维数必须 ≥ 4，实际为 {self.size}")

    @classmethod
    def fock(cls, dimension: int, hbar: float = 1.0) -> "BasisSpec":
        return cls(BasisKind.FOCK, int(dimension), 1.0, float(hbar))

    @classmethod
    def lattice(cls, half_width: int, spacing: float, hbar: float = 1.0) -> "BasisSpec":
        return cls(BasisKind.LATTICE, int(half_width), float(spacing), float(hbar))

    def doubled(self) -> "BasisSpec":
        """系统 ⊗ 辅助系统的基矢"""
        return BasisSpec(BasisKind.DOUBLED, self.dimension ** 2, 1.0, self.hbar)

    @property
    def dimension(self) -> int:
        if self.kind is BasisKind.LATTICE:
            return 2 * self.size + 1
        return self.size

    @property
    def is_fock(self) -> bool:
        return self.kind is BasisKind.FOCK

    @property
    def is_lattice(self) -> bool:
        return self.kind is BasisKind.LATTICE

    def momenta(self) -> np.ndarray:
        """格点动量值 jΔ"""
        if not self.is_lattice:
            raise BasisMismatchError("只有动量格点才有离散动量值")
        return self.spacing * np.arange(-self.size, self.size + 1, dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        if self.is_lattice:
            return {"kind": "lattice", "half_width": self.size, "spacing": self.spacing, "hbar": self.hbar}
        return {"kind": self.kind.value, "dimension": self.size, "hbar": self.hbar}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BasisSpec":
        kind = BasisKind(data.get("kind", "fock"))
        hbar = float(data.get("hbar", 1.0))
        if kind is BasisKind.LATTICE:
            return cls.lattice(int(data["half_width"]), float(data["spacing"]), hbar)
        return cls(kind, int(data["dimension"]), 1.0, hbar)


def _require_same_basis(*bases: BasisSpec) -> BasisSpec:
    first = bases[0]
    for other in bases[1:]:
        if other != first:
            raise BasisMismatchError(f"{first} 与 {other} 不一致")
    return first


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    """基矢上的稠密复方阵"""
    basis: BasisSpec
    entries: np.ndarray

    def __post_init__(self):
        entries = self.entries
        if sp.issparse(entries):
            entries = entries.toarray()
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidArgumentError(f"算符必须是方阵，实际形状 {entries.shape}")
        if entries.shape[0] != self.basis.dimension:
            raise BasisMismatchError(
                f"算符维数 {entries.shape[0]} 与基矢维数 {self.basis.dimension} 不一致"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def dag(self) -> "MatrixOperator":
        return MatrixOperator(self.basis, self.entries.conj().T)

    def hermiticity_defect(self) -> float:
        if self.entries.size == 0:
            return 0.0
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.entries))))
        return self.hermiticity_defect() <= tol * scale

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def expect(self, rho: Union["DensityMatrix", "MatrixOperator", np.ndarray]) -> float:
        """期望值 Re tr(ρ O)"""
        mat = _as_array(rho)
        return float(np.real(np.sum(mat.T * self.entries)))

    def _coerce(self, other: Any) -> np.ndarray:
        if isinstance(other, MatrixOperator):
            _require_same_basis(self.basis, other.basis)
            return other.entries
        raise TypeError(f"不支持的操作数类型: {type(other).__name__}")

    def __matmul__(self, other: "MatrixOperator") -> "MatrixOperator":
        return MatrixOperator(self.basis, self.entries @ self._coerce(other))

    def __add__(self, other: "MatrixOperator") -> "MatrixOperator":
        return MatrixOperator(self.basis, self.entries + self._coerce(other))

    def __sub__(self, other: "MatrixOperator") -> "MatrixOperator":
        return MatrixOperator(self.basis, self.entries - self._coerce(other))

    def __mul__(self, scalar: complex) -> "MatrixOperator":
        if isinstance(scalar, MatrixOperator):
            raise TypeError("算符乘法请使用 @")
        return MatrixOperator(self.basis, self.entries * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "MatrixOperator":
        return MatrixOperator(self.basis, self.entries / scalar)

    def __neg__(self) -> "MatrixOperator":
        return MatrixOperator(self.basis, -self.entries)

    def power(self, k: int) -> "MatrixOperator":
        return MatrixOperator(self.basis, np.linalg.matrix_power(self.entries, k))

    @classmethod
    def identity(cls, basis: BasisSpec) -> "MatrixOperator":
        return cls(basis, np.eye(basis.dimension))

    @classmethod
    def zeros(cls, basis: BasisSpec) -> "MatrixOperator":
        return cls(basis, np.zeros((basis.dimension, basis.dimension)))

    @classmethod
    def diagonal(cls, basis: BasisSpec, values: Sequence[complex]) -> "MatrixOperator":
        return cls(basis, np.diag(np.asarray(values, dtype=complex)))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """密度矩阵

    check=True 时校验：厄米（1e-12）、迹为 1（1e-12）、最小本征值 ≥ −1e-10。
    演化轨迹中的态以 check=False 构造，诊断量另行记录。
    """
    op: MatrixOperator
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not self.check:
            return
        if not self.op.is_hermitian(HERMITIAN_TOL):
            raise InvalidArgumentError(f"密度矩阵不厄米（偏差 {self.op.hermiticity_defect():.3e}）")
        trace = self.op.trace()
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidArgumentError(f"密度矩阵迹不为 1（tr={trace:.15g}）")
        min_eig = self.min_eigenvalue()
        if min_eig < -POSITIVITY_TOL:
            raise InvalidArgumentError(f"密度矩阵非正定（最小本征值 {min_eig:.3e}）")

    @classmethod
    def from_array(cls, basis: BasisSpec, entries: np.ndarray, normalize: bool = False,
                   check: bool = True) -> "DensityMatrix":
        entries = np.array(entries, dtype=complex)
        if normalize:
            entries = 0.5 * (entries + entries.conj().T)
            trace = np.real(np.trace(entries))
            if trace == 0:
                raise InvalidArgumentError("无法归一化迹为零的矩阵")
            entries = entries / trace
        return cls(MatrixOperator(basis, entries), check)

    @property
    def basis(self) -> BasisSpec:
        return self.op.basis

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries

    def eigenvalues(self) -> np.ndarray:
        herm = 0.5 * (self.entries + self.entries.conj().T)
        return np.linalg.eigvalsh(herm)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def purity(self) -> float:
        return float(np.real(np.sum(self.entries * self.entries.T)))

    def expect(self, observable: MatrixOperator) -> float:
        return observable.expect(self)


@dataclass(frozen=True, eq=False)
class Superoperator:
    """超算符：列堆叠向量化矩阵上的 d²×d² 线性映射

    内部以 CSR 稀疏矩阵存储；mat 属性给出等价的稠密矩阵。
    meta 记录构建信息（family、泄漏估计、边界权重、警告等）。
    """
    basis: BasisSpec
    matrix: sp.csr_matrix
    label: str = ""
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        matrix = sp.csr_matrix(self.matrix, dtype=complex)
        d2 = self.basis.dimension ** 2
        if matrix.shape != (d2, d2):
            raise BasisMismatchError(f"超算符形状 {matrix.shape} 与基矢 d²={d2} 不一致")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @cached_property
    def mat(self) -> np.ndarray:
        """稠密等价矩阵"""
        return self.matrix.toarray()

    def apply(self, rho: Union[DensityMatrix, MatrixOperator, np.ndarray]) -> np.ndarray:
        """作用在矩阵上，返回 d×d 数组"""
        mat = _as_array(rho)
        if mat.shape != (self.dimension, self.dimension):
            raise BasisMismatchError(f"输入形状 {mat.shape} 与基矢维数 {self.dimension} 不一致")
        return unvec(self.matrix @ vec(mat), self.dimension)

    def with_meta(self, **meta: Any) -> "Superoperator":
        merged = dict(self.meta)
        merged.update(meta)
        return Superoperator(self.basis, self.matrix, self.label, merged)

    def _coerce(self, other: "Superoperator") -> sp.csr_matrix:
        _require_same_basis(self.basis, other.basis)
        return other.matrix

    def __add__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.basis, self.matrix + self._coerce(other), self.label, dict(self.meta))

    def __sub__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.basis, self.matrix - self._coerce(other), self.label, dict(self.meta))

    def __mul__(self, scalar: complex) -> "Superoperator":
        return Superoperator(self.basis, self.matrix * scalar, self.label, dict(self.meta))

    __rmul__ = __mul__

    def max_difference(self, other: "Superoperator") -> float:
        """与另一超算符的最大元素差"""
        diff = (self.matrix - self._coerce(other)).tocoo()
        if diff.nnz == 0:
            return 0.0
        return float(np.max(np.abs(diff.data)))

    @classmethod
    def zeros(cls, basis: BasisSpec, label: str = "zero") -> "Superoperator":
        d2 = basis.dimension ** 2
        return cls(basis, sp.csr_matrix((d2, d2), dtype=complex), label)

    @classmethod
    def identity(cls, basis: BasisSpec) -> "Superoperator":
        return cls(basis, sp.identity(basis.dimension ** 2, dtype=complex, format="csr"), "identity")


@dataclass(frozen=True)
class BasisOps:
    """build_basis_ops 的返回记录

    格点基上只有 p 与 w_shift（单位动量平移）有定义，其余为 None。
    """
    basis: BasisSpec
    l: float
    a: Optional[MatrixOperator]
    a_dag: Optional[MatrixOperator]
    x: Optional[MatrixOperator]
    p: MatrixOperator
    n_op: Optional[MatrixOperator]
    w_shift: MatrixOperator


# ---------------------------------------------------------------------------
# 向量化工具
# ---------------------------------------------------------------------------

def _as_array(rho: Union[DensityMatrix, MatrixOperator, np.ndarray]) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.entries
    if isinstance(rho, MatrixOperator):
        return rho.entries
    return np.asarray(rho, dtype=complex)


def vec(matrix: np.ndarray) -> np.ndarray:
    """列堆叠向量化"""
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray, dimension: int) -> np.ndarray:
    """vec 的逆"""
    return np.asarray(vector).reshape((dimension, dimension), order="F")


def _csr(matrix: ArrayLike) -> sp.csr_matrix:
    if isinstance(matrix, MatrixOperator):
        matrix = matrix.entries
    return sp.csr_matrix(matrix, dtype=complex)


def spre(a: ArrayLike) -> sp.csr_matrix:
    """X ↦ A X"""
    a = _csr(a)
    return sp.kron(sp.identity(a.shape[0], format="csr"), a, format="csr")


def spost(b: ArrayLike) -> sp.csr_matrix:
    """X ↦ X B"""
    b = _csr(b)
    return sp.kron(b.T, sp.identity(b.shape[0], format="csr"), format="csr")


def sprepost(a: ArrayLike, b: ArrayLike) -> sp.csr_matrix:
    """X ↦ A X B"""
    return sp.kron(_csr(b).T, _csr(a), format="csr")


def commutator_superop(a: ArrayLike) -> sp.csr_matrix:
    """X ↦ [A, X]"""
    return spre(a) - spost(a)


def anticommutator_superop(a: ArrayLike) -> sp.csr_matrix:
    """X ↦ {A, X}"""
    return spre(a) + spost(a)


def dissipator_superop(jump: ArrayLike) -> sp.csr_matrix:
    """X ↦ L X L† − ½{L†L, X}，使用实际截断的 L†L"""
    jump = _csr(jump)
    jump_dag = jump.conj().T.tocsr()
    ldl = (jump_dag @ jump).tocsr()
    return sprepost(jump, jump_dag) - 0.5 * (spre(ldl) + spost(ldl))


# ---------------------------------------------------------------------------
# 基本算符
# ---------------------------------------------------------------------------

def build_basis_ops(basis: BasisSpec, l: float = 1.0) -> BasisOps:
    """构建基本算符

    Fock 基：
        a = Σ √n |n−1⟩⟨n|，W = Σ |n+1⟩⟨n|（截断），N = diag(n)
        x = (l/√2)(a + a†)，p = −i(ħ/(√2 l))(a − a†)
        a† = W√(N+1)，a = W†√N 在截断基上严格成立
    格点基：
        p = diag(jΔ)，w_shift 为单位动量平移 Σ |j+1⟩⟨j|

    Args:
        basis: 基矢
        l: 长度尺度（Fock 基上 x、p 的换算）

    Returns:
        BasisOps

    Raises:
        InvalidArgumentError: l 非正
    """
    if not np.isfinite(l) or l <= 0:
        raise InvalidArgumentError(f"长度尺度 l 必须为正数，实际为 {l}")

    dim = basis.dimension
    shift = np.diag(np.ones(dim - 1), k=-1).astype(complex)

    if basis.is_lattice:
        p = MatrixOperator.diagonal(basis, basis.momenta())
        return BasisOps(basis, float(l), None, None, None, p, None, MatrixOperator(basis, shift))

    if not basis.is_fock:
        raise BasisMismatchError(f"不支持的基矢类型: {basis.kind.value}")

    hbar = basis.hbar
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    a_dag = a.conj().T
    x = (l / np.sqrt(2.0)) * (a + a_dag)
    p = -1j * (hbar / (np.sqrt(2.0) * l)) * (a - a_dag)
    n_op = np.diag(np.arange(dim, dtype=float)).astype(complex)

    return BasisOps(
        basis=basis,
        l=float(l),
        a=MatrixOperator(basis, a),
        a_dag=MatrixOperator(basis, a_dag),
        x=MatrixOperator(basis, x),
        p=MatrixOperator(basis, p),
        n_op=MatrixOperator(basis, n_op),
        w_shift=MatrixOperator(basis, shift),
    )


def function_of_hermitian(op: MatrixOperator, func) -> MatrixOperator:
    """谱分解作用函数：f(O) = V f(λ) V†"""
    herm = 0.5 * (op.entries + op.entries.conj().T)
    if np.count_nonzero(herm - np.diag(np.diagonal(herm))) == 0:
        return MatrixOperator.diagonal(op.basis, func(np.real(np.diagonal(herm))))
    values, vectors = np.linalg.eigh(herm)
    return MatrixOperator(op.basis, (vectors * func(values)) @ vectors.conj().T)


def spectral_unitary(generator: MatrixOperator, coefficient: complex) -> MatrixOperator:
    """U = exp(coefficient · G)，G 厄米，coefficient 纯虚时 U 为幺正"""
    return function_of_hermitian(generator, lambda values: np.exp(coefficient * values))


# ---------------------------------------------------------------------------
# Lindblad 超算符
# ---------------------------------------------------------------------------

JumpTerm = Tuple[float, Union[MatrixOperator, ArrayLike]]


def assemble_lindblad(hamiltonian: Optional[ArrayLike], jumps: Iterable[JumpTerm], hbar: float,
                      dimension: int) -> sp.csr_matrix:
    """底层组装：接受稠密或稀疏数组，按固定顺序求和"""
    d2 = dimension * dimension
    total = sp.csr_matrix((d2, d2), dtype=complex)
    if hamiltonian is not None:
        total = total + (-1j / hbar) * commutator_superop(hamiltonian)
    for rate, jump in jumps:
        if rate == 0:
            continue
        total = total + rate * dissipator_superop(jump)
    return total.tocsr()


def lindblad_superoperator(H: Optional[MatrixOperator], jumps: Sequence[JumpTerm] = (),
                           hbar: Optional[float] = None, basis: Optional[BasisSpec] = None,
                           label: str = "lindblad") -> Superoperator:
    """组装 Lindblad 生成元

    ρ ↦ −(i/ħ)[H,ρ] + Σ rateᵢ (LᵢρLᵢ† − ½{Lᵢ†Lᵢ,ρ})

    Args:
        H: 哈密顿量（None 表示零）
        jumps: (rate ≥ 0, L) 序列
        hbar: 约化普朗克常数，默认取基矢的 ħ
        basis: H 为 None 且无跳跃算符时必须给出
        label: 超算符标签

    Raises:
        BasisMismatchError: 算符基矢不一致
        InvalidArgumentError: H 不厄米或速率为负
    """
    operators = [op for _, op in jumps]
    if H is not None:
        operators = [H] + operators
    bases = [op.basis for op in operators]
    if basis is not None:
        bases.append(basis)
    if not bases:
        raise InvalidArgumentError("无法推断基矢：请提供 H、跳跃算符或 basis")
    basis = _require_same_basis(*bases)
    hbar = basis.hbar if hbar is None else float(hbar)

    if H is not None and not H.is_hermitian(HERMITIAN_TOL):
        raise InvalidArgumentError(f"H 不厄米（偏差 {H.hermiticity_defect():.3e}）")
    for rate, _ in jumps:
        if rate < 0 or not np.isfinite(rate):
            raise InvalidArgumentError(f"跳跃速率必须为非负有限数，实际为 {rate}")

    matrix = assemble_lindblad(
        None if H is None else H.entries,
        [(rate, op.entries) for rate, op in jumps],
        hbar,
        basis.dimension,
    )
    return Superoperator(basis, matrix, label)


def lindblad_action(hamiltonian: Optional[ArrayLike], jumps: Iterable[JumpTerm], rho: np.ndarray,
                    hbar: float) -> np.ndarray:
    """直接计算 ℒ[ρ]，不组装超算符（跳跃算符可为稀疏矩阵）"""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    if hamiltonian is not None:
        h_rho = hamiltonian @ rho
        rho_h = (hamiltonian.T @ rho.T).T if sp.issparse(hamiltonian) else rho @ hamiltonian
        out += (-1j / hbar) * (np.asarray(h_rho) - np.asarray(rho_h))
    for rate, jump in jumps:
        if rate == 0:
            continue
        jump = _csr(jump)
        jump_dag = jump.conj().T.tocsr()
        ldl = (jump_dag @ jump).tocsr()
        l_rho = np.asarray(jump @ rho)
        sandwich = np.asarray((jump_dag.T @ l_rho.T).T)
        ldl_rho = np.asarray(ldl @ rho)
        rho_ldl = np.asarray((ldl.T @ rho.T).T)
        out += rate * (sandwich - 0.5 * (ldl_rho + rho_ldl))
    return out


# ---------------------------------------------------------------------------
# Choi 矩阵与传播子
# ---------------------------------------------------------------------------

def choi_matrix(S: Superoperator, normalized: bool = False) -> MatrixOperator:
    """超算符的 Choi 矩阵 J = Σ_ij E_ij ⊗ Φ(E_ij)

    列堆叠约定下 S[k + l·d, i + j·d] = Φ(E_ij)[k, l]。
    恒等映射给出 d·|Ω⟩⟨Ω|（秩 1）；normalized=True 时整体除以 d。
    """
    d = S.dimension
    tensor = S.mat.reshape((d, d, d, d), order="F")
    choi = tensor.transpose(2, 0, 3, 1).reshape(d * d, d * d)
    if normalized:
        choi = choi / d
    return MatrixOperator(S.basis.doubled(), choi)


def choi_min_eigenvalue(S: Superoperator) -> float:
    """Choi 矩阵（厄米部分）的最小本征值"""
    choi = choi_matrix(S).entries
    herm = 0.5 * (choi + choi.conj().T)
    return float(np.linalg.eigvalsh(herm)[0])


def propagator_superoperator(L: Superoperator, t: float) -> Superoperator:
    """稠密 e^{tℒ}（缩放平方法）"""
    return Superoperator(L.basis, scipy.linalg.expm(t * L.mat), f"exp({t:g}·{L.label})", dict(L.meta))


def transpose_map(basis: BasisSpec) -> Superoperator:
    """转置映射 X ↦ Xᵀ（非完全正定的标准反例）"""
    d = basis.dimension
    rows: List[int] = []
    cols: List[int] = []
    for i in range(d):
        for j in range(d):
            rows.append(j + i * d)
            cols.append(i + j * d)
    matrix = sp.csr_matrix((np.ones(len(rows), dtype=complex), (rows, cols)), shape=(d * d, d * d))
    return Superoperator(basis, matrix, "transpose")


# ---------------------------------------------------------------------------
# 常用态与诊断
# ---------------------------------------------------------------------------

def fock_state(basis: BasisSpec, n: int) -> DensityMatrix:
    """基矢态 |n⟩⟨n|（格点上 n 为数组下标）"""
    if not 0 <= n < basis.dimension:
        raise InvalidArgumentError(f"态下标 {n} 超出维数 {basis.dimension}")
    entries = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    entries[n, n] = 1.0
    return DensityMatrix(MatrixOperator(basis, entries))


def pure_state(basis: BasisSpec, amplitudes: Sequence[complex]) -> DensityMatrix:
    psi = np.asarray(amplitudes, dtype=complex)
    norm = np.linalg.norm(psi)
    if psi.shape != (basis.dimension,) or norm == 0:
        raise InvalidArgumentError("态矢量维数不符或为零向量")
    psi = psi / norm
    return DensityMatrix(MatrixOperator(basis, np.outer(psi, psi.conj())))


def thermal_state(H0: MatrixOperator, beta: float) -> DensityMatrix:
    """Gibbs 态 e^{−βH0}/Z（谱分解，能量平移保证数值稳定）"""
    if beta < 0 or not np.isfinite(beta):
        raise InvalidArgumentError(f"β 必须为非负有限数，实际为 {beta}")
    herm = 0.5 * (H0.entries + H0.entries.conj().T)
    values, vectors = np.linalg.eigh(herm)
    weights = np.exp(-beta * (values - values[0]))
    weights = weights / np.sum(weights)
    entries = (vectors * weights) @ vectors.conj().T
    entries = 0.5 * (entries + entries.conj().T)
    return DensityMatrix(MatrixOperator(H0.basis, entries))


def random_hermitian(basis: BasisSpec, rng: np.random.Generator) -> np.ndarray:
    """高斯随机厄米矩阵"""
    d = basis.dimension
    raw = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (raw + raw.conj().T)


def random_density_matrix(basis: BasisSpec, rng: np.random.Generator,
                          rank: Optional[int] = None) -> DensityMatrix:
    """Ginibre 随机密度矩阵"""
    d = basis.dimension
    rank = d if rank is None else int(rank)
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    entries = g @ g.conj().T
    entries = entries / np.real(np.trace(entries))
    entries = 0.5 * (entries + entries.conj().T)
    return DensityMatrix(MatrixOperator(basis, entries))


def boundary_indices(basis: BasisSpec) -> Tuple[int, ...]:
    """截断边界：Fock 基的最高能级；格点的两端动量"""
    if basis.is_lattice:
        return (0, basis.dimension - 1)
    return (basis.dimension - 1,)


def leakage(rho: Union[DensityMatrix, np.ndarray], basis: Optional[BasisSpec] = None) -> float:
    """截断泄漏 tr(ρ·P_boundary)"""
    if isinstance(rho, DensityMatrix):
        basis = rho.basis
    if basis is None:
        raise InvalidArgumentError("计算泄漏需要基矢信息")
    mat = _as_array(rho)
    return float(sum(np.real(mat[i, i]) for i in boundary_indices(basis)))


def trace_norm(matrix: np.ndarray) -> float:
    """迹范数 ‖X‖₁"""
    return float(np.sum(np.linalg.svd(np.asarray(matrix), compute_uv=False)))


def top_level_weight(jumps: Iterable[JumpTerm], basis: BasisSpec, levels: int = 2) -> float:
    """跳跃项在最高 levels 个 Fock 能级上的算符范数权重（泄漏估计）"""
    if not basis.is_fock:
        return 0.0
    top = slice(basis.dimension - levels, basis.dimension)
    worst = 0.0
    for rate, jump in jumps:
        mat = _as_array(jump) if not sp.issparse(jump) else jump.toarray()
        block = np.concatenate([mat[top, :], mat[:, top].T], axis=0)
        worst = max(worst, float(rate) * float(np.linalg.norm(block, 2)) ** 2)
    return worst
