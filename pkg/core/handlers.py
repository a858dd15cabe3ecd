# -*- coding: utf-8 -*-
"""
命令处理器模块 - check / evolve / steady / covariance / gamma / qlbe

本模块实现命令行的六个子命令。每个处理器读取运行配置，调用服务层与核心模块，
把报告交给 ReportStore 落盘，并返回 (退出码, 报告)。

主要类：
- BaseCommandHandler: 处理器基类（配置、种子、配置哈希、报告落盘）
- CheckHandler: 系数谓词、对称性检验、稳态与 Gibbs 残差
- EvolveHandler: 密度矩阵演化，输出 CSV 轨迹与 JSON 摘要
- SteadyHandler: 稳态求解
- CovarianceHandler: 数值协变检验与群轨道稳态见证
- GammaHandler: 由气体模型计算摩擦系数与导出扩散系数
- QLBEHandler: 格点 QLBE 构建与布朗极限检验

退出码：
- 0: 成功
- 1: analysis.require 中列出的谓词不满足（默认只要求 cp）
- 2: 配置错误（由 main 根据异常类型决定）

谓词名（analysis.require）：
- cp: 完全正定
- shift_covariant / translation_covariant: 系数层面的协变性
- equivariance: analysis.groups 中所有群元素的数值协变检验
- gibbs: Gibbs 残差 ≤ analysis.gibbs_tol

Author: 约瑟夫.k && 白泽
"""
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .analysis import (
    GroupElement,
    approximate_shift_bound,
    check_covariance,
    orbit_nonuniqueness_witness,
    stationary_states,
    verify_gibbs,
)
from .coefficients import (
    PREDICATE_TOL,
    ThermalContext,
    is_completely_positive,
    is_shift_covariant,
    is_translation_covariant,
)
from .config import RunConfig
from .errors import ConfigError, PreconditionError
from .fock_core import thermal_state, trace_norm
from .generator_factory import GeneratorFamily
from .kinetic import (
    LatticeQLBESpec,
    brownian_limit_check,
    derived_diffusion,
    friction_gamma,
    friction_gamma_1d,
)
from .logger import get_logger
from .report_store import ReportStore, config_hash
from .services import BuildResult, EvolveService, GeneratorService

logger = get_logger("handlers")

PREDICATES = ("cp", "shift_covariant", "translation_covariant", "equivariance", "gibbs")


class BaseCommandHandler:
    """命令处理器基类

    子类实现 run()，返回报告字典与未满足的谓词列表。
    """

    command_name = ""

    def __init__(self, config: RunConfig, store: ReportStore):
        self.config = config
        self.get_config = config.get_config
        self.store = store
        self.seed = int(self.get_config("run.seed", 0))
        self.config_hash = config_hash(config.effective())

    def required_predicates(self) -> List[str]:
        required = self.get_config("analysis.require", ["cp"]) or []
        unknown = [name for name in required if name not in PREDICATES]
        if unknown:
            raise ConfigError("analysis.require", f"未知的谓词 {unknown}（可选 {', '.join(PREDICATES)}）")
        return list(required)

    def run(self) -> Tuple[Dict[str, Any], List[str]]:
        raise NotImplementedError

    def execute(self) -> Tuple[int, Dict[str, Any]]:
        """执行命令

        Returns:
            Tuple[int, Dict]: (退出码, 报告)
        """
        logger.info(f"[{type(self).__name__}] 开始执行 {self.command_name}（seed={self.seed}）")
        report, violated = self.run()
        required = set(self.required_predicates())
        failing = [name for name in violated if name in required]
        report["violated"] = sorted(violated)
        report["exit_code"] = 1 if failing else 0
        self.store.save_json(self.command_name, report, self.config_hash, self.seed)
        if failing:
            logger.error(f"[{type(self).__name__}] 谓词不满足: {', '.join(failing)}")
        else:
            logger.info(f"[{type(self).__name__}] {self.command_name} 完成")
        return report["exit_code"], report

    # ---- 共用片段 ----

    def build(self) -> BuildResult:
        return GeneratorService(self.get_config).build()

    @staticmethod
    def shift_length(build: BuildResult) -> Optional[float]:
        """Fock 基近似平移检验的参考长度：有限温度取 λ_th，否则取生成元的长度尺度"""
        if build.basis.is_lattice:
            return None
        ctx = build.spec.thermal
        if ctx is not None and math.isfinite(ctx.beta):
            return ctx.thermal_wavelength
        return build.length

    def groups(self, build: BuildResult) -> List[GroupElement]:
        entries = self.get_config("analysis.groups", None)
        if not entries:
            if build.basis.is_lattice:
                return [GroupElement.shift(0.7)]
            b = approximate_shift_bound(build.generator, self.shift_length(build))
            return [GroupElement.phase(1.234), GroupElement.shift(b)]
        groups = []
        for index, entry in enumerate(entries):
            try:
                groups.append(GroupElement(entry["kind"], float(entry["param"])))
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"analysis.groups[{index}]", f"应为 {{kind, param}}: {e}")
        return groups

    def covariance_reports(self, build: BuildResult) -> Tuple[List[Dict[str, Any]], bool]:
        samples = int(self.get_config("analysis.samples", 20))
        reports = []
        passed = True
        for g in self.groups(build):
            report = check_covariance(build.generator, g, samples=samples, seed=self.seed,
                                      length=self.shift_length(build))
            reports.append(report.to_dict())
            passed = passed and report.passed
        return reports, passed

    def gibbs_entry(self, build: BuildResult) -> Optional[Dict[str, Any]]:
        beta = build.spec.thermal.beta
        if build.spec.family is GeneratorFamily.QLBE_1D:
            # 格点 QLBE 的平衡温度由气体给出
            beta = build.spec.gas.beta
        if not math.isfinite(beta):
            return None
        tol = float(self.get_config("analysis.gibbs_tol", 1e-8))
        residual = verify_gibbs(build.generator, build.hamiltonian, beta)
        return {"beta": beta, "residual": residual, "tolerance": tol, "status": "ok" if residual <= tol else "violated"}

    def stationary_entry(self, build: BuildResult) -> Optional[Dict[str, Any]]:
        limit = int(self.get_config("analysis.stationary_max_dimension", 40))
        if build.basis.dimension > limit:
            logger.info(f"[{type(self).__name__}] 维数 {build.basis.dimension} > {limit}，跳过稳态求解")
            return None
        threshold = float(self.get_config("analysis.kernel_threshold", 1e-8))
        return stationary_states(build.generator, threshold=threshold).to_dict()

    @staticmethod
    def header(build: BuildResult) -> Dict[str, Any]:
        return {
            "family": build.spec.family.value,
            "generator": build.spec.to_dict(),
            "length": build.length,
            "build_meta": {k: v for k, v in build.generator.meta.items() if k != "weights"},
        }


class CheckHandler(BaseCommandHandler):
    """系数谓词与数值性质检验"""

    command_name = "check"

    def run(self) -> Tuple[Dict[str, Any], List[str]]:
        build = self.build()
        tol = float(self.get_config("analysis.tol", PREDICATE_TOL))
        report = self.header(build)
        violated: List[str] = []

        c = build.coefficients
        if c is not None:
            verdicts = {
                "cp": is_completely_positive(c, tol),
                "shift_covariant": is_shift_covariant(c, build.length, tol),
                "translation_covariant": is_translation_covariant(c, tol),
            }
            report["coefficients"] = c.to_dict()
            report["predicates"] = {name: verdict.to_dict() for name, verdict in verdicts.items()}
            report["diffusion_eigenvalues"] = c.diffusion_matrix().eigenvalues().tolist()
            violated.extend(name for name, verdict in verdicts.items() if not verdict)
        else:
            logger.info("[CheckHandler] 该生成元族没有双线性系数，跳过系数谓词")

        covariance, passed = self.covariance_reports(build)
        report["equivariance"] = covariance
        if not passed:
            violated.append("equivariance")

        stationary = self.stationary_entry(build)
        if stationary is not None:
            report["stationary"] = stationary

        gibbs = self.gibbs_entry(build)
        if gibbs is not None:
            report["gibbs"] = gibbs
            if gibbs["status"] != "ok":
                violated.append("gibbs")
        return report, violated


class EvolveHandler(BaseCommandHandler):
    """演化：CSV 轨迹 + JSON 摘要"""

    command_name = "evolve"

    def run(self) -> Tuple[Dict[str, Any], List[str]]:
        build = self.build()
        result = EvolveService(self.get_config).run(build)
        self.store.save_csv(self.command_name, result.header, result.rows, self.config_hash)
        report = self.header(build)
        report["summary"] = result.summary
        return report, []


class SteadyHandler(BaseCommandHandler):
    """稳态求解"""

    command_name = "steady"

    def run(self) -> Tuple[Dict[str, Any], List[str]]:
        build = self.build()
        threshold = float(self.get_config("analysis.kernel_threshold", 1e-8))
        result = stationary_states(build.generator, threshold=threshold)
        report = self.header(build)
        report["stationary"] = result.to_dict()

        beta = build.spec.thermal.beta
        gibbs = thermal_state(build.hamiltonian, beta) if math.isfinite(beta) else None
        states = []
        for state in result.states:
            entry = {"p2": float((build.ops.p @ build.ops.p).expect(state))}
            if build.ops.n_op is not None:
                entry["number"] = float(build.ops.n_op.expect(state))
            if gibbs is not None:
                entry["distance_to_gibbs"] = 0.5 * trace_norm(state.entries - gibbs.entries)
            states.append(entry)
        report["states"] = states
        violated = []
        gibbs_entry = self.gibbs_entry(build)
        if gibbs_entry is not None:
            report["gibbs"] = gibbs_entry
            if gibbs_entry["status"] != "ok":
                violated.append("gibbs")
        return report, violated


class CovarianceHandler(BaseCommandHandler):
    """数值协变检验，稳态存在时附带群轨道见证"""

    command_name = "covariance"

    def run(self) -> Tuple[Dict[str, Any], List[str]]:
        build = self.build()
        report = self.header(build)
        covariance, passed = self.covariance_reports(build)
        report["equivariance"] = covariance

        witnesses = []
        limit = int(self.get_config("analysis.stationary_max_dimension", 40))
        if build.basis.dimension <= limit:
            threshold = float(self.get_config("analysis.kernel_threshold", 1e-8))
            stationary = stationary_states(build.generator, threshold=threshold)
            if stationary.states:
                rho0 = stationary.states[0]
                samples = int(self.get_config("analysis.samples", 20))
                for g in self.groups(build):
                    try:
                        witness = orbit_nonuniqueness_witness(build.generator, g, rho0, samples, self.seed,
                                                           length=self.shift_length(build))
                        witnesses.append(witness.to_dict())
                    except PreconditionError as e:
                        witnesses.append({"group": g.to_dict(), "precondition": e.details.get("precondition"),
                                          "message": str(e)})
        report["orbit_witnesses"] = witnesses
        return report, [] if passed else ["equivariance"]


class GammaHandler(BaseCommandHandler):
    """摩擦系数与导出扩散系数"""

    command_name = "gamma"

    def run(self) -> Tuple[Dict[str, Any], List[str]]:
        service = GeneratorService(self.get_config)
        gas = service.gas()
        if gas is None:
            raise ConfigError("gas", "gamma 命令需要 gas 段")
        ctx = service.thermal_context()
        gas_ctx = ThermalContext(beta=gas.beta, M=ctx.M, omega=ctx.omega, l=ctx.l, hbar=ctx.hbar)
        result = friction_gamma(gas, ctx.hbar)
        d_xx, d_pp = derived_diffusion(result.gamma, gas_ctx)
        lattice = friction_gamma_1d(gas, ctx.M, ctx.hbar)
        report: Dict[str, Any] = {
            "gas": gas.to_dict(),
            "gamma": result.gamma,
            "quadrature_error": result.error,
            "D_xx": d_xx,
            "D_pp": d_pp,
            "gamma_1d": lattice.gamma,
            "gamma_1d_quadrature_error": lattice.error,
        }
        return report, []


class QLBEHandler(BaseCommandHandler):
    """格点 QLBE：构建信息、Gibbs 残差与布朗极限检验"""

    command_name = "qlbe"

    def run(self) -> Tuple[Dict[str, Any], List[str]]:
        build = self.build()
        if build.spec.family is not GeneratorFamily.QLBE_1D:
            raise ConfigError("generator.family", f"qlbe 命令需要 qlbe_1d，实际为 {build.spec.family.value}")
        report = self.header(build)
        ctx = build.spec.thermal
        lattice = LatticeQLBESpec(build.basis, int(build.spec.param("q_max_index", 1)), ctx.M)
        try:
            report["brownian_limit"] = brownian_limit_check(lattice, build.spec.gas, hbar=ctx.hbar).to_dict()
        except PreconditionError as e:
            logger.warning(f"[QLBEHandler] 跳过布朗极限检验: {e}")
            report["brownian_limit"] = {"precondition": e.details.get("precondition"), "message": str(e)}

        violated = []
        gibbs = self.gibbs_entry(build)
        if gibbs is not None:
            report["gibbs"] = gibbs
            if gibbs["status"] != "ok":
                violated.append("gibbs")
        momenta = build.basis.momenta()
        report["momenta"] = np.asarray(momenta).tolist()
        return report, violated


HANDLERS = {
    handler.command_name: handler
    for handler in (CheckHandler, EvolveHandler, SteadyHandler, CovarianceHandler, GammaHandler, QLBEHandler)
}
