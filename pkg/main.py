# -*- coding: utf-8 -*-
"""
量子 Fokker-Planck 生成元工具包 - 命令行主入口模块

本模块是工具包的命令行入口，负责：
1. 运行配置 Schema 的定义
2. 加载 JSON 配置并应用命令行覆盖
3. 分派子命令到 core.handlers 中的处理器
4. 把异常翻译为友好提示与退出码

子命令：
- check: 系数谓词、数值协变、稳态与 Gibbs 残差
- evolve: 密度矩阵演化（CSV 轨迹 + JSON 摘要）
- steady: 稳态求解
- covariance: 数值协变检验与群轨道稳态见证
- gamma: 由气体模型计算摩擦系数
- qlbe: 格点 QLBE 与布朗极限检验

配置节：
- run: 随机种子
- logging: 日志级别
- generator: 生成元族、基矢、哈密顿量、自由参数
- thermal: β、M、ω、l、ħ
- coefficients: 双线性系数（general_xp / aa_form 使用）
- gas: 气体模型（qlbe_1d / kinetic_qbm / gamma 使用）
- analysis: 容差、采样数、群元素、要求的谓词
- dynamics: 时间网格、积分方式、初态、拟合可观测量
- output: 输出目录

退出码：0 成功，1 性质违反/数值失败，2 用法/配置错误

使用示例：
    python main.py check --config qo.json --fock-dim 40
    python main.py evolve --config qbm.json --out runs/qbm --seed 3
    python main.py qlbe --config gas.json --lattice 50,0.1

Author: 约瑟夫.k && 白泽
Version: 1.0.0
"""
import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from core.config import ConfigField, RunConfig, load_config
from core.errors import ConfigError, ToolkitError, describe_error, exit_code_for, is_refinable
from core.generator_factory import GeneratorFamily
from core.handlers import HANDLERS
from core.logger import configure_logging, get_logger
from core.report_store import ReportStore

logger = get_logger("qfp_toolkit")


class QuantumFokkerPlanckToolkit:
    """工具包主类：配置 Schema + 命令分派"""

    config_section_descriptions = {
        "run": "运行控制",
        "logging": "日志配置",
        "generator": "生成元配置",
        "generator.basis": "基矢配置（Fock 截断或动量格点）",
        "thermal": "热力学参数",
        "coefficients": "双线性系数（D_xx, D_pp, D_px, gamma, mu）",
        "gas": "气体模型（m, z, n, beta, t_matrix）",
        "analysis": "分析配置",
        "dynamics": "演化配置",
        "output": "输出配置",
    }

    # 配置Schema定义
    config_schema: dict = {
        "run": {
            "seed": ConfigField(
                type=int,
                default=0,
                description="随机采样种子（协变检验的随机厄米样本等）"
            ),
        },
        "logging": {
            "level": ConfigField(
                type=str,
                default="INFO",
                description="日志级别",
                choices=("DEBUG", "INFO", "WARNING", "ERROR"),
            ),
        },
        "generator": {
            "family": ConfigField(
                type=str,
                default="quantum_optical",
                description="生成元族",
                choices=tuple(f.value for f in GeneratorFamily),
            ),
            "hamiltonian": ConfigField(
                type=str,
                default="free",
                description="general_xp / aa_form 的自由哈密顿量",
                choices=("free", "oscillator", "number", "none"),
            ),
            "form": ConfigField(
                type=str,
                default="xp",
                description="qbm / kinetic_qbm 的构建形式",
                choices=("xp", "ladder"),
            ),
            "basis": {
                "kind": ConfigField(
                    type=str,
                    default="fock",
                    description="基矢类型",
                    choices=("fock", "lattice"),
                ),
                "dimension": ConfigField(
                    type=int,
                    default=20,
                    description="Fock 截断维数 N_t"
                ),
                "half_width": ConfigField(
                    type=int,
                    default=20,
                    description="动量格点半宽 J（共 2J+1 个点）"
                ),
                "spacing": ConfigField(
                    type=float,
                    default=0.1,
                    description="动量格点间距 Δ"
                ),
            },
        },
        "thermal": {
            "beta": ConfigField(
                type=float,
                default=1.0,
                description="逆温度 β"
            ),
            "zero_temperature": ConfigField(
                type=bool,
                default=False,
                description="为 true 时使用 β = ∞"
            ),
            "M": ConfigField(
                type=float,
                default=1.0,
                description="测试粒子质量"
            ),
            "omega": ConfigField(
                type=float,
                default=1.0,
                description="振子频率 ω"
            ),
            "l": ConfigField(
                type=float,
                default=None,
                description="长度尺度 l（缺省时按生成元族选择）"
            ),
            "hbar": ConfigField(
                type=float,
                default=1.0,
                description="约化普朗克常数"
            ),
        },
        "analysis": {
            "tol": ConfigField(
                type=float,
                default=1e-12,
                description="系数谓词的相对容差"
            ),
            "samples": ConfigField(
                type=int,
                default=20,
                description="协变检验的随机样本数"
            ),
            "kernel_threshold": ConfigField(
                type=float,
                default=1e-8,
                description="稳态求解的归一化奇异值阈值"
            ),
            "gibbs_tol": ConfigField(
                type=float,
                default=1e-8,
                description="Gibbs 残差通过阈值"
            ),
            "stationary_max_dimension": ConfigField(
                type=int,
                default=40,
                description="check / covariance 中做稠密稳态求解的最大维数"
            ),
            "groups": ConfigField(
                type=list,
                default=None,
                description="协变检验的群元素列表 [{kind, param}]"
            ),
            "require": ConfigField(
                type=list,
                default=["cp"],
                description="不满足时退出码为 1 的谓词"
            ),
        },
        "dynamics": {
            "t_max": ConfigField(
                type=float,
                default=5.0,
                description="演化终止时间"
            ),
            "steps": ConfigField(
                type=int,
                default=51,
                description="时间网格点数（含 t=0，0 表示空网格）"
            ),
            "method": ConfigField(
                type=str,
                default="auto",
                description="积分方式",
                choices=("auto", "expm", "krylov", "ode"),
            ),
            "fit_observable": ConfigField(
                type=str,
                default=None,
                description="弛豫拟合的可观测量（缺省 Fock 为 number，格点为 p）"
            ),
            "initial": ConfigField(
                type=dict,
                default=None,
                description="初态 {kind, params}"
            ),
        },
        "output": {
            "dir": ConfigField(
                type=str,
                default="out",
                description="报告输出目录"
            ),
        },
    }

    def __init__(self, config: RunConfig):
        self.config = config

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "QuantumFokkerPlanckToolkit":
        """加载配置并应用命令行覆盖"""
        config = load_config(args.config, cls.config_schema)
        for key, value in cls.overrides(args):
            config.set_override(key, value)
        return cls(config)

    @staticmethod
    def overrides(args: argparse.Namespace) -> List[Tuple[str, Any]]:
        items: List[Tuple[str, Any]] = []
        if args.seed is not None:
            items.append(("run.seed", args.seed))
        if args.fock_dim is not None:
            items.append(("generator.basis.kind", "fock"))
            items.append(("generator.basis.dimension", args.fock_dim))
        if args.lattice is not None:
            half_width, spacing = parse_lattice(args.lattice)
            items.append(("generator.basis.kind", "lattice"))
            items.append(("generator.basis.half_width", half_width))
            items.append(("generator.basis.spacing", spacing))
        if args.tol is not None:
            items.append(("analysis.tol", args.tol))
        if args.out is not None:
            items.append(("output.dir", args.out))
        if args.log_level is not None:
            items.append(("logging.level", args.log_level.upper()))
        return items

    def run(self, command: str) -> Tuple[int, Dict[str, Any]]:
        configure_logging(self.config.get_config("logging.level", "INFO"))
        handler_class = HANDLERS.get(command)
        if handler_class is None:
            raise ConfigError("command", f"未知的子命令 {command!r}")
        store = ReportStore(self.config.get_config("output.dir", "out"))
        handler = handler_class(self.config, store)
        return handler.execute()


def parse_lattice(text: str) -> Tuple[int, float]:
    """解析 --lattice J,DELTA"""
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError("--lattice", f"格式应为 J,DELTA，实际为 {text!r}")
    try:
        return int(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError("--lattice", f"无法解析 {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfp-toolkit",
        description="量子 Fokker-Planck 生成元：构建、检验、分析与演化",
    )
    parser.add_argument("command", choices=sorted(HANDLERS), help="子命令")
    parser.add_argument("--config", default=None, help="JSON 运行配置路径")
    parser.add_argument("--out", default=None, help="输出目录（覆盖 output.dir）")
    parser.add_argument("--seed", type=int, default=None, help="随机种子（覆盖 run.seed）")
    parser.add_argument("--fock-dim", type=int, default=None, help="Fock 截断维数")
    parser.add_argument("--lattice", default=None, help="动量格点 J,DELTA")
    parser.add_argument("--tol", type=float, default=None, help="谓词容差（覆盖 analysis.tol）")
    parser.add_argument("--log-level", default=None, help="日志级别（覆盖 logging.level）")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """命令行入口，返回进程退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        toolkit = QuantumFokkerPlanckToolkit.from_args(args)
        exit_code, _ = toolkit.run(args.command)
        return exit_code
    except ToolkitError as e:
        logger.error(f"[Toolkit] {args.command} 失败: {e}")
        print(describe_error(e), file=sys.stderr)
        if is_refinable(e):
            logger.info("[Toolkit] 数值步骤已用尽全部细化等级，可增大截断维数或放宽容差后重试")
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
