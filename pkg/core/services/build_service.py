# -*- coding: utf-8 -*-
"""
生成元构建服务模块 - 由运行配置构建生成元及其配套对象

本模块把运行配置中的 generator / thermal / coefficients / gas 段落翻译为
GeneratorSpec，并构建生成元、自由哈密顿量与基本算符，供各命令处理器共用。

主要类：
- GeneratorService: 生成元构建服务
- BuildResult: 构建结果数据类

BuildResult 字段：
- spec: GeneratorSpec
- generator: 构建好的超算符
- hamiltonian: 该族的自由哈密顿量（Gibbs 态与初态使用）
- ops: 基本算符
- length: 使用的长度尺度 l
- coefficients: 该族对应的双线性系数（m 光子与 QLBE 为 None）

配置读取：
- generator.family / generator.basis.* / generator.hamiltonian / generator.form
- generator.params（自由键：eta, gamma, gamma_0, gamma_m, D_px, q_max_index）
- thermal.*（zero_temperature=true 时 β = ∞）
- coefficients.*（general_xp / aa_form 必填）
- gas.*（qlbe_1d 必填；kinetic_qbm 未给 gamma 时使用）

使用示例：
    service = GeneratorService(config.get_config)
    build = service.build()
    residual = verify_gibbs(build.generator, build.hamiltonian, build.spec.thermal.beta)

Author: 约瑟夫.k && 白泽
"""
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

from ..coefficients import (
    BilinearCoefficients,
    ThermalContext,
    coefficients_from_dict,
    qbm_constrained,
    qo_coefficients,
)
from ..errors import ConfigError, InvalidArgumentError
from ..fock_core import BasisOps, BasisSpec, MatrixOperator, Superoperator, build_basis_ops
from ..generator_factory import (
    GeneratorFamily,
    GeneratorSpec,
    family_length,
    build_generator,
    default_hamiltonian,
)
from ..kinetic import GasModel, friction_gamma
from ..logger import get_logger

logger = get_logger("build_service")


@dataclass
class BuildResult:
    """生成元构建结果"""
    spec: GeneratorSpec
    generator: Superoperator
    hamiltonian: MatrixOperator
    ops: BasisOps
    length: float
    coefficients: Optional[BilinearCoefficients] = None

    @property
    def basis(self) -> BasisSpec:
        return self.spec.basis


class GeneratorService:
    """生成元构建服务"""

    def __init__(self, get_config: Callable[[str, Any], Any]):
        """初始化构建服务

        Args:
            get_config: 配置获取函数，签名为 get_config(key, default)
        """
        self.get_config = get_config

    def family(self) -> GeneratorFamily:
        name = self.get_config("generator.family", "quantum_optical")
        try:
            return GeneratorFamily(name)
        except ValueError:
            choices = ", ".join(f.value for f in GeneratorFamily)
            raise ConfigError("generator.family", f"未知的生成元族 {name!r}（可选 {choices}）")

    def thermal_context(self) -> ThermalContext:
        beta = math.inf if self.get_config("thermal.zero_temperature", False) else self.get_config("thermal.beta", 1.0)
        try:
            return ThermalContext(
                beta=beta,
                M=self.get_config("thermal.M", 1.0),
                omega=self.get_config("thermal.omega", 1.0),
                l=self.get_config("thermal.l", None),
                hbar=self.get_config("thermal.hbar", 1.0),
            )
        except InvalidArgumentError as e:
            raise ConfigError("thermal", str(e))

    def basis(self) -> BasisSpec:
        kind = self.get_config("generator.basis.kind", "fock")
        hbar = self.get_config("thermal.hbar", 1.0)
        try:
            if kind == "lattice":
                return BasisSpec.lattice(self.get_config("generator.basis.half_width", 20),
                                         self.get_config("generator.basis.spacing", 0.1), hbar)
            if kind == "fock":
                return BasisSpec.fock(self.get_config("generator.basis.dimension", 20), hbar)
        except InvalidArgumentError as e:
            raise ConfigError("generator.basis", str(e))
        raise ConfigError("generator.basis.kind", f"未知的基矢类型 {kind!r}（可选 fock / lattice）")

    def params(self) -> Dict[str, Any]:
        params = self.get_config("generator.params", {}) or {}
        if not isinstance(params, dict):
            raise ConfigError("generator.params", "应为 JSON 对象")
        merged = dict(params)
        merged.setdefault("hamiltonian", self.get_config("generator.hamiltonian", "free"))
        merged.setdefault("form", self.get_config("generator.form", "xp"))
        return merged

    def user_coefficients(self) -> Optional[BilinearCoefficients]:
        section = self.get_config("coefficients", None)
        if not section:
            return None
        if not isinstance(section, dict):
            raise ConfigError("coefficients", "应为 JSON 对象")
        data = dict(section)
        data.setdefault("hbar", self.get_config("thermal.hbar", 1.0))
        c, _ = coefficients_from_dict(data)
        return c

    def gas(self) -> Optional[GasModel]:
        section = self.get_config("gas", None)
        if not section:
            return None
        if not isinstance(section, dict):
            raise ConfigError("gas", "应为 JSON 对象")
        return GasModel.from_dict(section)

    def generator_spec(self) -> GeneratorSpec:
        family = self.family()
        spec = GeneratorSpec(
            family=family,
            basis=self.basis(),
            coefficients=self.user_coefficients(),
            thermal=self.thermal_context(),
            params=self.params(),
            gas=self.gas(),
        )
        if family in (GeneratorFamily.GENERAL_XP, GeneratorFamily.AA_FORM) and spec.coefficients is None:
            raise ConfigError("coefficients", f"{family.value} 需要 coefficients 段")
        if family is GeneratorFamily.QLBE_1D:
            if spec.gas is None:
                raise ConfigError("gas", "qlbe_1d 需要 gas 段")
            if not spec.basis.is_lattice:
                raise ConfigError("generator.basis.kind", "qlbe_1d 需要动量格点（--lattice J,DELTA）")
        elif not spec.basis.is_fock:
            raise ConfigError("generator.basis.kind", f"{family.value} 需要 Fock 基")
        return spec

    def family_coefficients(self, spec: GeneratorSpec) -> Optional[BilinearCoefficients]:
        """该族对应的双线性系数（用于谓词检验）"""
        family = spec.family
        ctx = spec.thermal
        if family in (GeneratorFamily.GENERAL_XP, GeneratorFamily.AA_FORM):
            return spec.coefficients
        if family is GeneratorFamily.QUANTUM_OPTICAL:
            return qo_coefficients(ctx, 0.5 * float(spec.param("eta", 1.0)))
        if family is GeneratorFamily.QBM:
            return qbm_constrained(ctx, float(spec.param("gamma", 1.0)), float(spec.param("D_px", 0.0)))
        if family is GeneratorFamily.KINETIC_QBM:
            gamma = spec.param("gamma")
            if gamma is None:
                gamma = friction_gamma(spec.gas, ctx.hbar).gamma
            return qbm_constrained(ctx, float(gamma), 0.0)
        if family is GeneratorFamily.M_PHOTON:
            rates = list(spec.param("gamma_m", []))
            if float(spec.param("gamma_0", 0.0)) == 0 and all(float(g) == 0 for g in rates[1:]) and rates:
                return qo_coefficients(ctx, float(rates[0]))
        return None

    def build(self) -> BuildResult:
        """构建生成元

        Raises:
            ConfigError: 配置缺失或不合法
            NotCompletelyPositiveError / InvalidArgumentError: 构建器前置条件不满足
        """
        spec = self.generator_spec()
        length = family_length(spec)
        ops = build_basis_ops(spec.basis, length)
        generator = build_generator(spec)
        hamiltonian = default_hamiltonian(spec, ops)
        logger.info(
            f"[GeneratorService] 已构建 {spec.family.value}: d={spec.basis.dimension}, l={length:.6g}"
        )
        return BuildResult(spec, generator, hamiltonian, ops, length, self.family_coefficients(spec))
