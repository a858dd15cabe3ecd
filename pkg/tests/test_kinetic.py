# -*- coding: utf-8 -*-
"""kinetic：结构因子、摩擦系数求积、格点 QLBE 与布朗极限"""
import math

import numpy as np
import pytest

from core.analysis import GroupElement, check_covariance, stationary_states, verify_gibbs
from core.coefficients import ThermalContext
from core.dynamics import fit_relaxation, initial_state, propagate
from core.errors import ConfigError, InvalidArgumentError, PreconditionError
from core.fock_core import BasisSpec, MatrixOperator, build_basis_ops, vec
from core.kinetic import (
    GasModel,
    LatticeQLBESpec,
    TMatrixProfile,
    brownian_limit_check,
    build_qlbe_lattice,
    derived_diffusion,
    friction_gamma,
    friction_gamma_1d,
    load_tmatrix_csv,
    qlbe_jump_operators,
    s_mb,
)


def _gas(m=0.5, t0=1.0, beta=1.0):
    return GasModel(m=m, z=1.0, n=1.0, beta=beta, t_matrix=TMatrixProfile.constant(t0))


def _lattice_hamiltonian(spec):
    return MatrixOperator.diagonal(spec.grid, spec.grid.momenta() ** 2 / (2.0 * spec.M))


def test_structure_factor_value():
    gas = _gas(m=0.5)
    q, E = 0.7, 0.2
    expected = (2 * math.pi * 0.25 / (1.0 * 1.0 * q)) / (2 * math.pi) ** 3 * math.exp(
        -(1.0 / 4.0) * (2 * 0.5 * E + q * q) ** 2 / (q * q)
    )
    assert s_mb(q, E, gas) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        s_mb(0.0, 0.1, gas)


def test_structure_factor_detailed_balance():
    gas = _gas(m=0.3, beta=1.7)
    q, E = 0.9, 0.4
    assert s_mb(q, E, gas) / s_mb(q, -E, gas) == pytest.approx(math.exp(-gas.beta * E), rel=1e-12)


@pytest.mark.parametrize("m, beta, t0", [(0.5, 1.0, 1.0), (0.05, 2.0, 10.0), (1.3, 0.4, 0.2)])
def test_friction_constant_closed_form(m, beta, t0):
    gas = GasModel(m=m, z=0.8, n=1.0, beta=beta, t_matrix=TMatrixProfile.constant(t0))
    expected = (128.0 / 3.0) * math.pi ** 3 * 0.8 * t0 ** 2 * m ** 4 / beta ** 3
    result = friction_gamma(gas)
    assert result.gamma == pytest.approx(expected, rel=1e-9)
    assert result.error <= 1e-8 * result.gamma


def test_gaussian_tmatrix_reduces_friction():
    constant = friction_gamma(_gas(t0=1.0)).gamma
    gaussian = friction_gamma(GasModel(0.5, 1.0, 1.0, 1.0, TMatrixProfile.gaussian(1.0, 0.5))).gamma
    assert 0.0 < gaussian < constant


def test_friction_1d_closed_form():
    gas = _gas(m=0.05, t0=10.0)
    kernel = (2 * math.pi) * 100.0 * (2 * math.pi * 0.05 ** 2)
    r = 0.05
    assert friction_gamma_1d(gas, 1.0).gamma == pytest.approx(2 * kernel * r / (1 + r), rel=1e-9)
    with pytest.raises(InvalidArgumentError):
        friction_gamma_1d(gas, 0.0)


def test_tabulated_profile_matches_constant_inside_support():
    table = TMatrixProfile.tabulated([0.0, 20.0], [10.0, 10.0])
    gas = GasModel(0.05, 1.0, 1.0, 1.0, table)
    assert friction_gamma_1d(gas, 1.0).gamma == pytest.approx(friction_gamma_1d(_gas(0.05, 10.0), 1.0).gamma,
                                                              rel=1e-8)


def test_tabulated_profile_validation():
    with pytest.raises(InvalidArgumentError):
        TMatrixProfile.tabulated([0.0, 2.0, 1.0], [1.0, 1.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        TMatrixProfile.tabulated([0.0], [1.0])
    with pytest.raises(InvalidArgumentError):
        TMatrixProfile("lorentzian")


def test_load_tmatrix_csv(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("q,t\n0.0,2.0\n1.0,1.0\n2.0,0.0\n", encoding="utf-8")
    profile = load_tmatrix_csv(str(path))
    assert profile.q_table == (0.0, 1.0, 2.0)
    assert float(profile.value(0.5)) == pytest.approx(1.5)
    assert float(profile.value(3.0)) == 0.0
    with pytest.raises(ConfigError):
        load_tmatrix_csv(str(tmp_path / "missing.csv"))


def test_derived_diffusion():
    ctx = ThermalContext(beta=2.0, M=0.5, hbar=1.0)
    d_xx, d_pp = derived_diffusion(0.4, ctx)
    assert d_xx == pytest.approx(2.0 * 0.4 / 4.0)
    assert d_pp == pytest.approx(2.0 * 0.5 * 0.4 / 2.0)
    with pytest.raises(InvalidArgumentError):
        derived_diffusion(0.4, ThermalContext(beta=math.inf))
    with pytest.raises(InvalidArgumentError):
        derived_diffusion(-1.0, ctx)


def test_gas_model_from_dict_names_fields():
    gas = GasModel.from_dict({"m": 1, "z": 1, "n": 2, "beta": 0.5,
                              "t_matrix": {"kind": "gaussian", "params": {"t0": 2.0, "sigma": 0.3}}})
    assert gas.t_matrix.kind == "gaussian"
    assert gas.to_dict()["t_matrix"]["params"]["sigma"] == 0.3

    with pytest.raises(ConfigError) as info:
        GasModel.from_dict({"z": 1, "n": 1, "beta": 1})
    assert info.value.field == "gas.m"
    with pytest.raises(ConfigError) as info:
        GasModel.from_dict({"m": "heavy", "z": 1, "n": 1, "beta": 1})
    assert info.value.field == "gas.m"
    with pytest.raises(ConfigError) as info:
        GasModel.from_dict({"m": -1, "z": 1, "n": 1, "beta": 1})
    assert info.value.field == "gas"
    with pytest.raises(ConfigError) as info:
        GasModel.from_dict({"m": 1, "z": 1, "n": 1, "beta": 1, "t_matrix": {"kind": "tabulated", "params": {}}})
    assert info.value.field == "gas.t_matrix.params.q"
    with pytest.raises(ConfigError) as info:
        GasModel.from_dict({"m": 1, "z": 1, "n": 1, "beta": 1, "t_matrix": {"kind": "yukawa"}})
    assert info.value.field == "gas.t_matrix.kind"


def test_lattice_spec_validation():
    with pytest.raises(InvalidArgumentError):
        LatticeQLBESpec(BasisSpec.fock(10), 1)
    with pytest.raises(InvalidArgumentError):
        LatticeQLBESpec(BasisSpec.lattice(3, 0.1), 6)
    with pytest.raises(InvalidArgumentError):
        LatticeQLBESpec(BasisSpec.lattice(3, 0.1), 0)
    assert LatticeQLBESpec(BasisSpec.lattice(3, 0.1), 2).transfers == [-2, -1, 1, 2]


def test_qlbe_is_trace_preserving_and_reports_boundary():
    spec = LatticeQLBESpec(BasisSpec.lattice(8, 0.25), 3)
    L = build_qlbe_lattice(spec, _gas())
    identity = vec(np.eye(L.dimension))
    assert np.max(np.abs(identity.conj() @ L.mat)) < 1e-10
    assert 0.0 < L.meta["boundary_weight"] < 1.0
    assert L.meta["mass_ratio"] == pytest.approx(0.5)
    _, weight = qlbe_jump_operators(spec, _gas())
    assert weight == pytest.approx(L.meta["boundary_weight"])


def test_qlbe_three_point_lattice_balances_boltzmann_weights():
    spec = LatticeQLBESpec(BasisSpec.lattice(1, 1.0), 1)
    L = build_qlbe_lattice(spec, _gas())
    report = stationary_states(L)
    assert report.kernel_dimension == 1
    weights = np.real(np.diagonal(report.states[0].entries))
    assert weights[2] / weights[1] == pytest.approx(math.exp(-0.5), rel=1e-8)
    assert weights[0] == pytest.approx(weights[2], rel=1e-8)


def test_qlbe_gibbs_state_is_stationary():
    spec = LatticeQLBESpec(BasisSpec.lattice(6, 0.5), 2, M=1.5)
    gas = _gas(m=0.4, beta=0.8)
    L = build_qlbe_lattice(spec, gas)
    assert verify_gibbs(L, _lattice_hamiltonian(spec), gas.beta) <= 1e-10


def test_qlbe_is_shift_covariant():
    spec = LatticeQLBESpec(BasisSpec.lattice(5, 0.3), 2)
    L = build_qlbe_lattice(spec, _gas())
    report = check_covariance(L, GroupElement.shift(0.9), samples=5)
    assert report.mode == "exact"
    assert report.passed


@pytest.mark.slow
def test_qlbe_momentum_decay_matches_friction():
    gas = _gas(m=0.05, t0=10.0)
    spec = LatticeQLBESpec(BasisSpec.lattice(50, 0.1), 20, M=1.0)
    L = build_qlbe_lattice(spec, gas)
    ops = build_basis_ops(spec.grid)
    rho0 = initial_state("lattice_gaussian", ops, {"p0": 1.0, "sigma": 0.3})
    traj = propagate(L, rho0, np.linspace(0.0, 3.0, 31))
    fit = fit_relaxation(traj, ops.p)
    expected = 2.0 * friction_gamma_1d(gas, spec.M).gamma
    assert expected == pytest.approx(1.88, rel=0.01)
    assert fit.rate == pytest.approx(expected, rel=0.2)


@pytest.mark.slow
def test_brownian_limit_improves_with_smaller_mass_ratio():
    spec = LatticeQLBESpec(BasisSpec.lattice(160, 0.05), 80, M=1.0)
    light = brownian_limit_check(spec, _gas(m=0.02))
    heavier = brownian_limit_check(spec, _gas(m=0.1))
    assert light.in_regime and heavier.in_regime
    assert light.defect < heavier.defect
    assert light.D_pp == pytest.approx(2.0 * light.gamma_1d)


def test_brownian_limit_flags_large_mass_ratio():
    spec = LatticeQLBESpec(BasisSpec.lattice(80, 0.1), 30, M=1.0)
    report = brownian_limit_check(spec, _gas(m=1.0))
    assert not report.in_regime
    assert report.warnings
    assert report.to_dict()["in_regime"] is False


@pytest.mark.parametrize("grid, K, precondition", [
    (BasisSpec.lattice(40, 0.5), 5, "spacing"),
    (BasisSpec.lattice(10, 0.1), 5, "extent"),
    (BasisSpec.lattice(40, 0.1), 39, "bulk"),
])
def test_brownian_limit_preconditions(grid, K, precondition):
    with pytest.raises(PreconditionError) as info:
        brownian_limit_check(LatticeQLBESpec(grid, K), _gas(m=0.05))
    assert info.value.details["precondition"] == precondition


def test_adaptive_integral_refines_subdivision_limit(monkeypatch):
    import warnings

    from scipy.integrate import IntegrationWarning

    import core.kinetic as kinetic

    limits = []
    real_quad = kinetic.quad

    def flaky_quad(f, a, b, **kwargs):
        limits.append(kwargs["limit"])
        if kwargs["limit"] == kinetic.QUAD_LIMITS[0]:
            warnings.warn("子区间不足", IntegrationWarning)
        return real_quad(f, a, b, **kwargs)

    monkeypatch.setattr(kinetic, "quad", flaky_quad)
    value, _ = kinetic._adaptive_integral(lambda x: math.exp(-x * x), 0.0, math.inf)
    assert limits == list(kinetic.QUAD_LIMITS[:2])
    assert value == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-8)


def test_adaptive_integral_raises_after_last_limit(monkeypatch):
    import warnings

    from scipy.integrate import IntegrationWarning

    import core.kinetic as kinetic
    from core.errors import QuadratureError

    limits = []

    def failing_quad(f, a, b, **kwargs):
        limits.append(kwargs["limit"])
        warnings.warn("不收敛", IntegrationWarning)
        return 1.0, 1.0

    monkeypatch.setattr(kinetic, "quad", failing_quad)
    with pytest.raises(QuadratureError):
        kinetic._adaptive_integral(lambda x: x, 0.0, 1.0)
    assert limits == list(kinetic.QUAD_LIMITS)
