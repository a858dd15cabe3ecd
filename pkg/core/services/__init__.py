# -*- coding: utf-8 -*-
"""
服务层模块

本模块是服务层的统一导出入口，把运行配置翻译为对核心数值模块的调用。

模块结构：
├── build_service.py   - 生成元构建服务
└── evolve_service.py  - 演化服务

导出的类：
- GeneratorService, BuildResult: 生成元构建
- EvolveService, EvolveResult: 密度矩阵演化与弛豫拟合

使用示例：
    from .core.services import GeneratorService, EvolveService

    build = GeneratorService(get_config).build()
    result = EvolveService(get_config).run(build)

Author: 约瑟夫.k && 白泽
"""
from .build_service import BuildResult, GeneratorService
from .evolve_service import EvolveResult, EvolveService

__all__ = ['GeneratorService', 'BuildResult', 'EvolveService', 'EvolveResult']
