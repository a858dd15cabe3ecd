# -*- coding: utf-8 -*-
"""
演化服务模块 - 封装密度矩阵演化、弛豫拟合与轨迹导出

主要类：
- EvolveService: 演化服务
- EvolveResult: 演化结果数据类

处理流程：
1. 由 dynamics.t_max / dynamics.steps 生成等间距时间网格（steps = 0 时为空网格）
2. 由 dynamics.initial.{kind, params} 构建初态
3. propagate 积分（expm / krylov，失败时回退到 ODE）
4. 计算可观测量并生成 CSV 行
5. 采样点足够时对 dynamics.fit_observable 做指数弛豫拟合
6. 汇总终态的矩、动能、泄漏与正定性诊断
7. Fock 基上的双线性族额外与矩方程的解对照（summary.moment_oracle）

可观测量：
- Fock 基: number, x, p, x2, p2
- 动量格点: p, p2

EvolveResult 字段：
- trajectory: Trajectory
- header / rows: CSV 表
- summary: JSON 报告中的 summary 段

使用示例：
    build = GeneratorService(config.get_config).build()
    result = EvolveService(config.get_config).run(build)
    store.save_csv("evolve", result.header, result.rows)

Author: 约瑟夫.k && 白泽
"""
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..dynamics import (
    MIN_FIT_SAMPLES,
    FitResult,
    MomentHamiltonian,
    Trajectory,
    fit_relaxation,
    initial_state,
    moment_trajectory,
    moments_from_state,
    propagate,
    trajectory_rows,
)
from ..errors import ConfigError
from ..fock_core import MatrixOperator
from ..generator_factory import GeneratorFamily
from ..logger import get_logger
from .build_service import BuildResult

logger = get_logger("evolve_service")


@dataclass
class EvolveResult:
    """演化结果"""
    trajectory: Trajectory
    header: List[str] = field(default_factory=list)
    rows: List[List[float]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    fit: Optional[FitResult] = None


class EvolveService:
    """演化服务"""

    def __init__(self, get_config: Callable[[str, Any], Any]):
        """初始化演化服务

        Args:
            get_config: 配置获取函数，签名为 get_config(key, default)
        """
        self.get_config = get_config

    def times(self) -> np.ndarray:
        t_max = float(self.get_config("dynamics.t_max", 5.0))
        steps = int(self.get_config("dynamics.steps", 51))
        if steps < 0:
            raise ConfigError("dynamics.steps", f"必须非负，实际为 {steps}")
        if steps > 1 and not t_max > 0:
            raise ConfigError("dynamics.t_max", f"必须为正数，实际为 {t_max}")
        if steps == 1:
            return np.zeros(1)
        return np.linspace(0.0, t_max, steps)

    def observables(self, build: BuildResult) -> Dict[str, MatrixOperator]:
        ops = build.ops
        p2 = ops.p @ ops.p
        if build.basis.is_lattice:
            return {"p": ops.p, "p2": p2}
        return {"number": ops.n_op, "x": ops.x, "p": ops.p, "x2": ops.x @ ops.x, "p2": p2}

    def initial(self, build: BuildResult):
        section = self.get_config("dynamics.initial", {}) or {}
        if not isinstance(section, dict):
            raise ConfigError("dynamics.initial", "应为 JSON 对象")
        default_kind = "lattice_gaussian" if build.basis.is_lattice else "ground"
        kind = section.get("kind", default_kind)
        params = dict(section.get("params", {}) or {})
        if kind == "thermal":
            params.setdefault("beta", build.spec.thermal.beta)
        return initial_state(kind, build.ops, params, build.hamiltonian)

    def moment_hamiltonian(self, build: BuildResult) -> Optional[MomentHamiltonian]:
        """与生成元自由哈密顿量一致的矩方程哈密顿量，无法用 free / oscillator 表示时返回 None"""
        if not build.basis.is_fock or build.coefficients is None:
            return None
        spec = build.spec
        ctx = spec.thermal
        mass = ctx.M if ctx is not None else 1.0
        family = spec.family
        if family in (GeneratorFamily.QBM, GeneratorFamily.KINETIC_QBM):
            return MomentHamiltonian("free", M=mass)
        if family in (GeneratorFamily.GENERAL_XP, GeneratorFamily.AA_FORM):
            kind = spec.param("hamiltonian", "free")
            if kind == "free":
                return MomentHamiltonian("free", M=mass)
            if kind == "oscillator":
                return MomentHamiltonian("oscillator", M=mass, omega=ctx.omega)
            return None
        if family in (GeneratorFamily.QUANTUM_OPTICAL, GeneratorFamily.M_PHOTON):
            # ωN 与振子哈密顿量只差常数，要求 l 为振子长度
            if ctx.omega > 0 and math.isclose(build.length, ctx.oscillator_length, rel_tol=1e-12):
                return MomentHamiltonian("oscillator", M=mass, omega=ctx.omega)
        return None

    def moment_oracle(self, build: BuildResult, trajectory: Trajectory) -> Optional[Dict[str, Any]]:
        h0 = self.moment_hamiltonian(build)
        if h0 is None or len(trajectory) == 0:
            return None
        measured = [moments_from_state(state, build.ops) for state in trajectory.states]
        oracle = moment_trajectory(build.coefficients, h0, measured[0], trajectory.times)
        deviation = max(
            float(np.max(np.abs(m.as_vector() - expected.as_vector())))
            for m, expected in zip(measured, oracle.states)
        )
        logger.info(f"[EvolveService] 矩方程对照: hamiltonian={h0.kind}, max_deviation={deviation:.3e}")
        return {"hamiltonian": h0.kind, "max_deviation": deviation}

    def run(self, build: BuildResult) -> EvolveResult:
        """执行演化

        Raises:
            ConfigError: dynamics 段不合法
            NumericFailureError: 所有积分方式均未满足诊断容差
        """
        grid = self.times()
        rho0 = self.initial(build)
        method = self.get_config("dynamics.method", "auto")
        logger.info(f"[EvolveService] 开始演化: {len(grid)} 个时间点, 方法={method}")
        trajectory = propagate(build.generator, rho0, grid, method=method)

        observables = self.observables(build)
        header, rows = trajectory_rows(trajectory, observables)
        summary: Dict[str, Any] = {
            "method": trajectory.method,
            "samples": len(trajectory),
            "max_leakage": trajectory.max_leakage,
            "worst_min_eigenvalue": trajectory.worst_min_eigenvalue,
            "positivity_violations": trajectory.positivity_violations,
            "max_trace_error": max(trajectory.trace_errors, default=0.0),
        }
        if len(trajectory) == 0:
            logger.info("[EvolveService] 空时间网格，跳过拟合")
            return EvolveResult(trajectory, header, rows, summary)

        final = trajectory.states[-1]
        summary["final"] = {name: float(op.expect(final)) for name, op in observables.items()}
        summary["final"]["kinetic_energy"] = summary["final"]["p2"] / (2.0 * build.spec.thermal.M)
        if build.basis.is_fock:
            summary["final_moments"] = moments_from_state(final, build.ops).to_dict()
        oracle = self.moment_oracle(build, trajectory)
        if oracle is not None:
            summary["moment_oracle"] = oracle

        fit = None
        fit_name = self.get_config("dynamics.fit_observable", None) or ("p" if build.basis.is_lattice else "number")
        if fit_name not in observables:
            raise ConfigError("dynamics.fit_observable", f"未知的可观测量 {fit_name!r}（可选 {', '.join(observables)}）")
        if len(trajectory) >= MIN_FIT_SAMPLES:
            fit = fit_relaxation(trajectory, observables[fit_name])
            summary["fit"] = dict(fit.to_dict(), observable=fit_name)
            logger.info(f"[EvolveService] 弛豫拟合 {fit_name}: rate={fit.rate:.6g}, flagged={fit.flagged}")
        else:
            logger.info(f"[EvolveService] 采样点少于 {MIN_FIT_SAMPLES}，跳过拟合")
        return EvolveResult(trajectory, header, rows, summary, fit)
