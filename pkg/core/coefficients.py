# -*- coding: utf-8 -*-
"""
系数空间模块 - Kraus 向量 ↔ 扩散系数映射、完全正定判据、协变性谓词与热约束

本模块描述至多双线性的量子 Fokker-Planck 生成元的系数空间 (D_xx, D_pp, D_px, γ, μ)：

Kraus 映射（V_i = α_i p + β_i x，耗散项速率 1/ħ）：
    D_xx = (ħ/2) Σ|α_i|²        D_pp = (ħ/2) Σ|β_i|²
    D_px = −(ħ/2) Re Σ α_i*β_i  γ    = Im Σ α_i β_i*
Gram 矩阵 Σ v_i v_i†（v_i = (α_i, β_i)）等于
    (2/ħ)·[[D_xx, −D_px + iħγ/2], [−D_px − iħγ/2, D_pp]]
其行列式为 (4/ħ²)·det D，故 Gram 半正定 ⇔ 完全正定不等式成立。

主要类：
- BilinearCoefficients: 系数元组 (D_xx, D_pp, D_px, γ, μ, ħ)
- KrausVectors: Kraus 向量对 (α_i, β_i)
- DiffusionMatrix: 2×2 厄米扩散矩阵
- ThermalContext: β、M、ω、l、ħ
- Verdict: 谓词结果（ok / 违反的条件 + 带符号 margin）

主要函数：
- coefficients_from_kraus / kraus_from_coefficients
- is_completely_positive / is_shift_covariant / is_translation_covariant
- qo_coefficients / qbm_constrained / qbm_residual_inequality
- coefficients_to_dict / coefficients_from_dict / load_coefficients

容差策略：
- 所有谓词使用相对容差 1e-12，尺度为 max(1, ‖系数‖²)
- 非完全正定的系数可以表示（用于 lint），完全正定性是谓词而不是不变量

Author: 约瑟夫.k && 白泽
"""
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, InvalidArgumentError, NotCompletelyPositiveError
from .logger import get_logger

logger = get_logger("coefficients")

PREDICATE_TOL = 1e-12
RANK_ONE_TOL = 1e-14

COEFFICIENT_KEYS = ("D_xx", "D_pp", "D_px", "gamma", "mu", "hbar")
THERMAL_KEYS = ("beta", "M", "omega", "l")


@dataclass(frozen=True)
class BilinearCoefficients:
    """双线性系数 (D_xx, D_pp, D_px, γ, μ)

    γ 取带符号实数：任意 Kraus 集合可能给出 γ < 0，需要 γ > 0 的构建器自行校验。
    """
    D_xx: float
    D_pp: float
    D_px: float = 0.0
    gamma: float = 0.0
    mu: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in COEFFICIENT_KEYS:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"系数 {name} 必须是有限实数，实际为 {value}")
            object.__setattr__(self, name, value)
        if self.hbar <= 0:
            raise InvalidArgumentError(f"hbar 必须为正数，实际为 {self.hbar}")

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.D_xx, self.D_pp, self.D_px, self.gamma, self.mu)

    @property
    def scale(self) -> float:
        """容差尺度 max(1, ‖系数‖²)"""
        norm_sq = (self.D_xx ** 2 + self.D_pp ** 2 + self.D_px ** 2
                   + (0.5 * self.hbar * self.gamma) ** 2 + self.mu ** 2)
        return max(1.0, norm_sq)

    def diffusion_matrix(self) -> "DiffusionMatrix":
        return DiffusionMatrix.from_coefficients(self)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class KrausVectors:
    """Kraus 向量对 (α_i, β_i)，对应 V_i = α_i p + β_i x"""
    pairs: Tuple[Tuple[complex, complex], ...]

    def __post_init__(self):
        pairs = tuple((complex(a), complex(b)) for a, b in self.pairs)
        if not pairs:
            raise InvalidArgumentError("Kraus 向量至少需要一对")
        for alpha, beta in pairs:
            if not (np.isfinite(alpha) and np.isfinite(beta)):
                raise InvalidArgumentError(f"Kraus 向量含非有限值: ({alpha}, {beta})")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_arrays(cls, alpha: Sequence[complex], beta: Sequence[complex]) -> "KrausVectors":
        if len(alpha) != len(beta):
            raise InvalidArgumentError("α 与 β 长度不一致")
        return cls(tuple(zip(alpha, beta)))

    @property
    def alpha(self) -> np.ndarray:
        return np.array([a for a, _ in self.pairs], dtype=complex)

    @property
    def beta(self) -> np.ndarray:
        return np.array([b for _, b in self.pairs], dtype=complex)

    def __len__(self) -> int:
        return len(self.pairs)

    def gram(self) -> np.ndarray:
        """Σ v_i v_i†"""
        vectors = np.array(self.pairs, dtype=complex)
        return vectors.T @ vectors.conj()


@dataclass(frozen=True)
class DiffusionMatrix:
    """扩散矩阵 [[D_xx, D_px + iħγ/2], [D_px − iħγ/2, D_pp]]"""
    matrix: np.ndarray = field(repr=False)

    @classmethod
    def from_coefficients(cls, c: BilinearCoefficients) -> "DiffusionMatrix":
        off = c.D_px + 0.5j * c.hbar * c.gamma
        matrix = np.array([[c.D_xx, off], [np.conj(off), c.D_pp]], dtype=complex)
        matrix.setflags(write=False)
        return cls(matrix)

    @property
    def determinant(self) -> float:
        return float(np.real(np.linalg.det(self.matrix)))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class ThermalContext:
    """热环境参数

    beta 可以取 inf（零温极限，coth → 1，N_β → 0）。
    l 为 None 时由各构建器取自然长度（振子长度或热波长）。
    """
    beta: float
    M: float = 1.0
    omega: float = 0.0
    l: Optional[float] = None
    hbar: float = 1.0

    def __post_init__(self):
        if math.isnan(self.beta) or self.beta <= 0:
            raise InvalidArgumentError(f"β 必须为正数，实际为 {self.beta}")
        if not math.isfinite(self.M) or self.M <= 0:
            raise InvalidArgumentError(f"M 必须为正数，实际为 {self.M}")
        if not math.isfinite(self.omega) or self.omega < 0:
            raise InvalidArgumentError(f"ω 必须非负，实际为 {self.omega}")
        if self.l is not None and (not math.isfinite(self.l) or self.l <= 0):
            raise InvalidArgumentError(f"l 必须为正数，实际为 {self.l}")
        if not math.isfinite(self.hbar) or self.hbar <= 0:
            raise InvalidArgumentError(f"hbar 必须为正数，实际为 {self.hbar}")

    @property
    def beta_hbar_omega(self) -> float:
        return self.beta * self.hbar * self.omega

    @property
    def thermal_wavelength(self) -> float:
        """λ_th = √(βħ²/4M)"""
        return math.sqrt(self.beta * self.hbar ** 2 / (4.0 * self.M))

    @property
    def oscillator_length(self) -> float:
        """√(ħ/Mω)"""
        if self.omega <= 0:
            raise InvalidArgumentError("振子长度需要 ω > 0")
        return math.sqrt(self.hbar / (self.M * self.omega))

    @property
    def coth_half(self) -> float:
        """coth(βħω/2)"""
        x = 0.5 * self.beta_hbar_omega
        if math.isinf(x):
            return 1.0
        if x == 0:
            return math.inf
        return 1.0 / math.tanh(x)

    @property
    def n_beta(self) -> float:
        """N_β = 1/(e^{βħω} − 1)"""
        x = self.beta_hbar_omega
        if math.isinf(x):
            return 0.0
        if x == 0:
            return math.inf
        return 1.0 / math.expm1(x)

    def length(self, fallback: float) -> float:
        return self.l if self.l is not None else fallback

    def to_dict(self) -> Dict[str, Any]:
        return {"beta": self.beta, "M": self.M, "omega": self.omega, "l": self.l, "hbar": self.hbar}


@dataclass(frozen=True)
class Verdict:
    """谓词结果，bool(verdict) 即是否满足"""
    ok: bool
    violated: Optional[str] = None
    margin: float = 0.0
    details: Dict[str, float] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    @property
    def status(self) -> str:
        return "ok" if self.ok else "violated"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"status": self.status, "margin": self.margin}
        if self.violated:
            data["violated"] = self.violated
        if self.details:
            data["details"] = dict(self.details)
        return data


# ---------------------------------------------------------------------------
# Kraus ↔ 系数
# ---------------------------------------------------------------------------

def coefficients_from_kraus(kv: KrausVectors, mu: float = 0.0, hbar: float = 1.0) -> BilinearCoefficients:
    """由 Kraus 向量计算系数，结果总满足完全正定不等式"""
    alpha, beta = kv.alpha, kv.beta
    half_hbar = 0.5 * hbar
    return BilinearCoefficients(
        D_xx=half_hbar * float(np.sum(np.abs(alpha) ** 2)),
        D_pp=half_hbar * float(np.sum(np.abs(beta) ** 2)),
        D_px=-half_hbar * float(np.real(np.sum(alpha.conj() * beta))),
        gamma=float(np.imag(np.sum(alpha * beta.conj()))),
        mu=mu,
        hbar=hbar,
    )


def coefficient_gram(c: BilinearCoefficients) -> np.ndarray:
    """系数对应的 Kraus Gram 矩阵 (2/ħ)·[[D_xx, −D_px + iħγ/2], [·, D_pp]]"""
    off = -c.D_px + 0.5j * c.hbar * c.gamma
    return (2.0 / c.hbar) * np.array([[c.D_xx, off], [np.conj(off), c.D_pp]], dtype=complex)


def kraus_from_coefficients(c: BilinearCoefficients) -> KrausVectors:
    """完全正定系数的 Kraus 分解（k ≤ 2）

    对 2×2 Gram 矩阵做本征分解；det D ≤ 1e-14·‖D‖² 时丢弃小本征值（k = 1）。

    Raises:
        NotCompletelyPositiveError: 系数违反完全正定不等式
    """
    verdict = is_completely_positive(c)
    if not verdict:
        raise NotCompletelyPositiveError(verdict.violated or "det D ≥ 0", verdict.margin)

    diffusion = c.diffusion_matrix()
    values, vectors = np.linalg.eigh(coefficient_gram(c))
    values = np.clip(values, 0.0, None)

    rank_one = diffusion.determinant <= RANK_ONE_TOL * diffusion.norm ** 2
    keep = [1] if rank_one else [1, 0]
    pairs = []
    for index in keep:
        v = math.sqrt(values[index]) * vectors[:, index]
        pairs.append((complex(v[0]), complex(v[1])))

    logger.debug(f"[Coefficients] Kraus 分解完成: k={len(pairs)}, det D={diffusion.determinant:.3e}")
    return KrausVectors(tuple(pairs))


# ---------------------------------------------------------------------------
# 谓词
# ---------------------------------------------------------------------------

def is_completely_positive(c: BilinearCoefficients, tol: float = PREDICATE_TOL) -> Verdict:
    """完全正定判据：D_xx ≥ 0，D_pp ≥ 0，D_xx·D_pp − D_px² − γ²ħ²/4 ≥ 0"""
    scale = c.scale
    det = c.D_xx * c.D_pp - c.D_px ** 2 - (c.gamma * c.hbar) ** 2 / 4.0
    details = {"D_xx": c.D_xx, "D_pp": c.D_pp, "det": det}

    if c.D_xx < -tol:
        return Verdict(False, "D_xx >= 0", c.D_xx, details)
    if c.D_pp < -tol:
        return Verdict(False, "D_pp >= 0", c.D_pp, details)
    if det < -tol * scale:
        return Verdict(False, "D_xx*D_pp - D_px^2 >= gamma^2*hbar^2/4", det, details)
    return Verdict(True, None, det, details)


def is_shift_covariant(c: BilinearCoefficients, l: float, tol: float = PREDICATE_TOL) -> Verdict:
    """U(1) 平移协变：D_xx = D_pp l⁴/ħ²，D_px = 0，μ = 0"""
    if l <= 0:
        raise InvalidArgumentError(f"l 必须为正数，实际为 {l}")
    bound = tol * c.scale
    checks = (
        ("D_xx = D_pp*l^4/hbar^2", abs(c.D_xx - c.D_pp * l ** 4 / c.hbar ** 2)),
        ("D_px = 0", abs(c.D_px)),
        ("mu = 0", abs(c.mu)),
    )
    details = {name: defect for name, defect in checks}
    worst = max(defect for _, defect in checks)
    for name, defect in checks:
        if defect > bound:
            return Verdict(False, name, -defect, details)
    return Verdict(True, None, -worst, details)


def is_translation_covariant(c: BilinearCoefficients, tol: float = PREDICATE_TOL) -> Verdict:
    """平移协变：μ = γ"""
    defect = abs(c.mu - c.gamma)
    if defect > tol * c.scale:
        return Verdict(False, "mu = gamma", -defect, {"mu - gamma": c.mu - c.gamma})
    return Verdict(True, None, -defect, {"mu - gamma": c.mu - c.gamma})


# ---------------------------------------------------------------------------
# 热约束系数
# ---------------------------------------------------------------------------

def qo_coefficients(ctx: ThermalContext, gamma: float) -> BilinearCoefficients:
    """量子光学主方程的系数

    D_pp = (ħ²/2l²)·γ·coth(βħω/2)，D_xx = D_pp l⁴/ħ²，D_px = 0，μ = 0；
    l 缺省为振子长度 √(ħ/Mω)。
    """
    if ctx.omega <= 0:
        raise InvalidArgumentError(f"量子光学系数需要 ω > 0，实际为 {ctx.omega}")
    if gamma < 0:
        raise InvalidArgumentError(f"γ 必须非负，实际为 {gamma}")

    natural = ctx.oscillator_length
    l = ctx.length(natural)
    if abs(l - natural) > 1e-9 * natural:
        logger.warning(f"[Coefficients] l={l:.6g} 与振子长度 {natural:.6g} 不一致，按给定 l 计算")

    hbar = ctx.hbar
    d_pp = (hbar ** 2 / (2.0 * l ** 2)) * gamma * ctx.coth_half
    d_xx = d_pp * l ** 4 / hbar ** 2
    return BilinearCoefficients(D_xx=d_xx, D_pp=d_pp, D_px=0.0, gamma=gamma, mu=0.0, hbar=hbar)


def qbm_constrained(ctx: ThermalContext, gamma: float, D_px: float = 0.0) -> BilinearCoefficients:
    """量子布朗运动的约束系数（det D = 0 边界）

    D_pp = 2Mγ/β，D_xx = γβħ²/(8M) + βD_px²/(2γM)，μ = γ
    """
    if not gamma > 0:
        raise InvalidArgumentError(f"量子布朗运动需要 γ > 0，实际为 {gamma}")
    if math.isinf(ctx.beta):
        raise InvalidArgumentError("量子布朗运动需要有限的 β")

    beta, mass, hbar = ctx.beta, ctx.M, ctx.hbar
    d_pp = 2.0 * mass * gamma / beta
    d_xx = gamma * beta * hbar ** 2 / (8.0 * mass) + beta * D_px ** 2 / (2.0 * gamma * mass)
    return BilinearCoefficients(D_xx=d_xx, D_pp=d_pp, D_px=D_px, gamma=gamma, mu=gamma, hbar=hbar)


def qbm_residual_inequality(c: BilinearCoefficients, ctx: ThermalContext) -> float:
    """γ(2M/β)D_xx − D_px² − γ²ħ²/4（约束系数时为 0）"""
    return c.gamma * (2.0 * ctx.M / ctx.beta) * c.D_xx - c.D_px ** 2 - (c.gamma * c.hbar) ** 2 / 4.0


# ---------------------------------------------------------------------------
# 序列化
# ---------------------------------------------------------------------------

def coefficients_to_dict(c: BilinearCoefficients, ctx: Optional[ThermalContext] = None) -> Dict[str, Any]:
    """扁平键值：D_xx, D_pp, D_px, gamma, mu, hbar[, beta, M, omega, l]"""
    data: Dict[str, Any] = c.to_dict()
    if ctx is not None:
        data.update({"beta": ctx.beta, "M": ctx.M, "omega": ctx.omega, "l": ctx.l})
    return data


def coefficients_from_dict(data: Dict[str, Any], prefix: str = "coefficients"
                           ) -> Tuple[BilinearCoefficients, Optional[ThermalContext]]:
    """从扁平键值解析系数（以及可选的热环境）

    Raises:
        ConfigError: 缺少必填键或值不是数值
    """
    def number(key: str, default: Optional[float] = None) -> Optional[float]:
        value = data.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{prefix}.{key}", f"应为数值，实际为 {value!r}")
        return float(value)

    for key in ("D_xx", "D_pp"):
        if key not in data:
            raise ConfigError(f"{prefix}.{key}", "缺少必填系数")

    hbar = number("hbar", 1.0)
    try:
        c = BilinearCoefficients(
            D_xx=number("D_xx"), D_pp=number("D_pp"), D_px=number("D_px", 0.0),
            gamma=number("gamma", 0.0), mu=number("mu", 0.0), hbar=hbar,
        )
    except InvalidArgumentError as e:
        raise ConfigError(prefix, str(e))

    ctx = None
    if "beta" in data:
        try:
            ctx = ThermalContext(beta=number("beta"), M=number("M", 1.0), omega=number("omega", 0.0),
                                 l=number("l"), hbar=hbar)
        except InvalidArgumentError as e:
            raise ConfigError(prefix, str(e))
    return c, ctx


def load_coefficients(path: str) -> Tuple[BilinearCoefficients, Optional[ThermalContext]]:
    """从 JSON 文件读取扁平系数对象"""
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError("coefficients", f"系数文件不存在: {path}")
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError("coefficients", f"JSON 解析失败: {e.msg}")
    if not isinstance(data, dict):
        raise ConfigError("coefficients", "系数文件顶层必须是 JSON 对象")
    return coefficients_from_dict(data)
