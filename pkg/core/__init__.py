# -*- coding: utf-8 -*-
"""
量子 Fokker-Planck 生成元工具包核心模块

本模块是核心功能的统一导出入口，汇集了所有核心组件的公开接口。

模块结构：
├── fock_core.py          - 基矢、算符、超算符与 Lindblad 组装
├── coefficients.py       - 双线性系数、Kraus 分解、CP 与协变谓词、热约束
├── generator_factory.py  - 各生成元族的构建器
├── analysis.py           - 数值协变、稳态、Gibbs 残差、群轨道见证
├── dynamics.py           - 密度矩阵演化、矩方程、弛豫拟合、初态
├── kinetic.py            - 气体模型、摩擦系数、格点 QLBE、布朗极限
├── report_store.py       - 报告落盘（原子写入、索引、配置哈希）
├── handlers.py           - 子命令处理器
├── config.py             - 运行配置（ConfigField Schema）
├── errors.py             - 错误分类、友好提示、细化重试
├── logger.py             - structlog 日志
└── services/             - 服务层
    ├── build_service.py  - 生成元构建服务
    └── evolve_service.py - 演化服务

使用示例：
    from core import BasisSpec, ThermalContext, build_quantum_optical, stationary_states

    ctx = ThermalContext(beta=1.0, M=1.0, omega=1.0)
    L = build_quantum_optical(ctx, eta=1.0, basis=BasisSpec.fock(30))
    report = stationary_states(L)

Author: 约瑟夫.k && 白泽
"""
from .fock_core import (
    BasisKind,
    BasisOps,
    BasisSpec,
    DensityMatrix,
    MatrixOperator,
    Superoperator,
    build_basis_ops,
    choi_min_eigenvalue,
    commutator_superop,
    dissipator_superop,
    fock_state,
    leakage,
    lindblad_superoperator,
    thermal_state,
    trace_norm,
)
from .coefficients import (
    BilinearCoefficients,
    KrausVectors,
    ThermalContext,
    Verdict,
    coefficients_from_kraus,
    is_completely_positive,
    is_shift_covariant,
    is_translation_covariant,
    kraus_from_coefficients,
    load_coefficients,
    qbm_constrained,
    qo_coefficients,
)
from .generator_factory import (
    GeneratorFamily,
    GeneratorSpec,
    build_aa_form,
    build_general_xp,
    build_generator,
    build_holevo_shift,
    build_kinetic_qbm,
    build_kraus_form,
    build_m_photon,
    build_qbm,
    build_quantum_optical,
)
from .analysis import (
    GroupElement,
    approximate_shift_bound,
    check_covariance,
    orbit_nonuniqueness_witness,
    stationary_states,
    verify_gibbs,
)
from .dynamics import (
    MomentHamiltonian,
    MomentState,
    Trajectory,
    fit_relaxation,
    initial_state,
    moment_flow,
    propagate,
)
from .kinetic import (
    GasModel,
    LatticeQLBESpec,
    TMatrixProfile,
    brownian_limit_check,
    build_qlbe_lattice,
    friction_gamma,
    friction_gamma_1d,
)
from .errors import (
    ErrorType,
    ToolkitError,
    RefinableError,
    NonRefinableError,
    describe_error,
    exit_code_for,
    get_friendly_error_message,
)
from .report_store import ReportStore
from .services import GeneratorService, BuildResult, EvolveService, EvolveResult

__all__ = [
    # 基矢与算符
    'BasisKind',
    'BasisOps',
    'BasisSpec',
    'DensityMatrix',
    'MatrixOperator',
    'Superoperator',
    'build_basis_ops',
    'choi_min_eigenvalue',
    'commutator_superop',
    'dissipator_superop',
    'fock_state',
    'leakage',
    'lindblad_superoperator',
    'thermal_state',
    'trace_norm',
    # 系数
    'BilinearCoefficients',
    'KrausVectors',
    'ThermalContext',
    'Verdict',
    'coefficients_from_kraus',
    'is_completely_positive',
    'is_shift_covariant',
    'is_translation_covariant',
    'kraus_from_coefficients',
    'load_coefficients',
    'qbm_constrained',
    'qo_coefficients',
    # 生成元
    'GeneratorFamily',
    'GeneratorSpec',
    'build_aa_form',
    'build_general_xp',
    'build_generator',
    'build_holevo_shift',
    'build_kinetic_qbm',
    'build_kraus_form',
    'build_m_photon',
    'build_qbm',
    'build_quantum_optical',
    # 分析
    'GroupElement',
    'approximate_shift_bound',
    'check_covariance',
    'orbit_nonuniqueness_witness',
    'stationary_states',
    'verify_gibbs',
    # 演化
    'MomentHamiltonian',
    'MomentState',
    'Trajectory',
    'fit_relaxation',
    'initial_state',
    'moment_flow',
    'propagate',
    # 动理学
    'GasModel',
    'LatticeQLBESpec',
    'TMatrixProfile',
    'brownian_limit_check',
    'build_qlbe_lattice',
    'friction_gamma',
    'friction_gamma_1d',
    # 错误
    'ErrorType',
    'ToolkitError',
    'RefinableError',
    'NonRefinableError',
    'describe_error',
    'exit_code_for',
    'get_friendly_error_message',
    # 存储与服务
    'ReportStore',
    'GeneratorService',
    'BuildResult',
    'EvolveService',
    'EvolveResult',
]
