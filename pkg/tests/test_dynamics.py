# -*- coding: utf-8 -*-
"""dynamics：密度矩阵演化、矩方程对照、弛豫拟合与初态"""
import math

import numpy as np
import pytest

from core.coefficients import ThermalContext, qbm_constrained
from core.dynamics import (
    DENSE_MAX_DIMENSION,
    MomentHamiltonian,
    MomentState,
    Trajectory,
    fit_relaxation,
    initial_state,
    moment_flow,
    moments_from_state,
    propagate,
    trajectory_rows,
)
from core.errors import BasisMismatchError, InvalidArgumentError
from core.fock_core import BasisSpec, build_basis_ops, fock_state
from core.generator_factory import build_kinetic_qbm, build_qbm, build_quantum_optical


@pytest.fixture
def qo_small():
    return build_quantum_optical(ThermalContext(beta=1.0, omega=1.0), 1.0, BasisSpec.fock(10))


def test_empty_time_grid_gives_empty_trajectory(qo_small):
    traj = propagate(qo_small, fock_state(qo_small.basis, 0), [])
    assert len(traj) == 0
    assert traj.max_leakage == 0.0


@pytest.mark.parametrize("times", [[0.0, 0.5, 0.5], [0.0, 1.0, 0.2], [-0.1, 0.3], [0.0, math.nan]])
def test_invalid_time_grid_rejected(qo_small, times):
    with pytest.raises(InvalidArgumentError):
        propagate(qo_small, fock_state(qo_small.basis, 0), times)


def test_propagate_rejects_basis_mismatch(qo_small):
    with pytest.raises(BasisMismatchError):
        propagate(qo_small, fock_state(BasisSpec.fock(11), 0), [0.0, 1.0])


def test_propagate_rejects_unknown_method(qo_small):
    with pytest.raises(InvalidArgumentError):
        propagate(qo_small, fock_state(qo_small.basis, 0), [0.0, 1.0], method="euler")


def test_integrators_agree(qo_small):
    rho0 = fock_state(qo_small.basis, 3)
    times = np.linspace(0.0, 2.0, 9)
    dense = propagate(qo_small, rho0, times, method="expm")
    ode = propagate(qo_small, rho0, times, method="ode")
    krylov = propagate(qo_small, rho0, times, method="krylov")
    assert dense.method == "expm"
    for other in (ode, krylov):
        for a, b in zip(dense.states, other.states):
            np.testing.assert_allclose(a.entries, b.entries, atol=1e-7)
    assert max(dense.trace_errors) <= 1e-10


def test_zero_temperature_relaxation_rate():
    eta = 0.8
    basis = BasisSpec.fock(30)
    L = build_quantum_optical(ThermalContext(beta=math.inf, omega=1.0), eta, basis)
    times = np.linspace(0.0, 5.0, 51)
    traj = propagate(L, fock_state(basis, 1), times)
    n_op = build_basis_ops(basis).n_op
    np.testing.assert_allclose(traj.values(n_op), np.exp(-eta * times), atol=1e-9)
    fit = fit_relaxation(traj, n_op)
    assert fit.rate == pytest.approx(eta, rel=1e-3)
    assert not fit.flagged


def test_quantum_optics_relaxes_to_mean_occupation():
    eta = 1.0
    basis = BasisSpec.fock(30)
    ctx = ThermalContext(beta=math.log(2.0), omega=1.0)
    assert ctx.n_beta == pytest.approx(1.0)
    L = build_quantum_optical(ctx, eta, basis)
    traj = propagate(L, fock_state(basis, 0), np.linspace(0.0, 5.0, 51))
    fit = fit_relaxation(traj, build_basis_ops(basis).n_op)
    assert fit.rate == pytest.approx(eta, rel=1e-3)
    assert fit.asymptote == pytest.approx(1.0, rel=1e-3)
    assert fit.e_foldings >= 2.0


@pytest.mark.slow
def test_moment_flow_matches_density_matrix_evolution():
    ctx = ThermalContext(beta=1.0, M=1.0)
    gamma, l = 2.0, 1.5
    basis = BasisSpec.fock(60)
    ops = build_basis_ops(basis, l)
    L = build_qbm(ctx, gamma, 0.0, basis, l=l)
    rho0 = initial_state("coherent", ops, {"alpha_re": 0.5})
    times = np.linspace(0.0, 5.0, 11)

    traj = propagate(L, rho0, times)
    assert traj.method == "expm"
    assert traj.max_leakage <= 1e-8
    oracle = moment_flow(qbm_constrained(ctx, gamma), MomentHamiltonian("free", M=1.0),
                         moments_from_state(rho0, ops), times)
    for state, expected in zip(traj.states, oracle):
        measured = moments_from_state(state, ops)
        np.testing.assert_allclose(measured.as_vector(), expected.as_vector(), atol=1e-6)


@pytest.mark.slow
def test_kinetic_brownian_motion_reaches_equipartition():
    ctx = ThermalContext(beta=1.0, M=1.0)
    gamma = 2.0
    basis = BasisSpec.fock(60)
    L = build_kinetic_qbm(ctx, gamma, basis)
    ops = build_basis_ops(basis, L.meta["l"])
    times = [0.0, 0.625, 5.0 / (2.0 * gamma)]
    traj = propagate(L, fock_state(basis, 0), times)
    assert traj.method == "expm"
    p2 = ops.p @ ops.p
    kinetic = traj.values(p2) / (2.0 * ctx.M)
    # 基态 ⟨p²⟩/2M = 1/β，是目标值的两倍
    assert kinetic[0] == pytest.approx(1.0)
    assert kinetic[-1] == pytest.approx(0.5 / ctx.beta, rel=0.01)
    assert traj.max_leakage <= 1e-6


def test_moment_flow_keeps_uncertainty_relation():
    ctx = ThermalContext(beta=0.5, M=1.0, omega=1.0)
    c = qbm_constrained(ctx, 0.7, 0.1)
    vacuum = MomentState(0.0, 0.0, 0.5, 0.5, 0.0)
    states = moment_flow(c, MomentHamiltonian("oscillator", M=1.0, omega=1.0), vacuum,
                         np.linspace(0.0, 4.0, 41))
    assert all(state.uncertainty_margin() >= -1e-12 for state in states)


def test_moment_hamiltonian_validation():
    with pytest.raises(InvalidArgumentError):
        MomentHamiltonian("anharmonic")
    with pytest.raises(InvalidArgumentError):
        MomentHamiltonian("free", M=0.0)
    assert MomentHamiltonian("free", omega=3.0).omega_sq == 0.0


def test_moments_need_position_operator():
    with pytest.raises(BasisMismatchError):
        moments_from_state(np.eye(5) / 5.0, build_basis_ops(BasisSpec.lattice(2, 0.5)))


def test_fit_needs_enough_samples():
    traj = Trajectory(np.linspace(0.0, 1.0, 5), [1.0, 0.8, 0.6, 0.5, 0.4])
    with pytest.raises(InvalidArgumentError):
        fit_relaxation(traj, lambda value: value)


def test_fit_constant_signal_is_degenerate():
    traj = Trajectory(np.linspace(0.0, 1.0, 12), [0.3] * 12)
    fit = fit_relaxation(traj, lambda value: value)
    assert fit.degenerate and fit.flagged
    assert fit.rate == 0.0
    assert fit.asymptote == pytest.approx(0.3)


def test_fit_flags_short_window():
    times = np.linspace(0.0, 0.5, 20)
    traj = Trajectory(times, list(2.0 * np.exp(-1.0 * times) + 1.0))
    fit = fit_relaxation(traj, lambda value: value)
    assert fit.rate == pytest.approx(1.0, rel=1e-4)
    assert fit.flagged


def test_trajectory_length_mismatch():
    with pytest.raises(InvalidArgumentError):
        Trajectory([0.0, 1.0], [1.0])


def test_initial_states():
    basis = BasisSpec.fock(30)
    ops = build_basis_ops(basis)
    coherent = initial_state("coherent", ops, {"alpha_re": 0.6, "alpha_im": -0.2})
    assert ops.a.expect(coherent) == pytest.approx(0.6, abs=1e-10)
    assert coherent.purity() == pytest.approx(1.0)

    shifted = initial_state("displaced_thermal", ops, {"alpha_re": 0.5, "n_mean": 0.3})
    assert ops.n_op.expect(shifted) == pytest.approx(0.25 + 0.3, abs=1e-8)

    assert initial_state("fock", ops, {"n": 2}).entries[2, 2] == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        initial_state("thermal", ops, {"beta": 1.0})
    with pytest.raises(InvalidArgumentError):
        initial_state("squeezed", ops)
    with pytest.raises(BasisMismatchError):
        initial_state("lattice_gaussian", ops, {"p0": 0.0, "sigma": 1.0})


def test_lattice_initial_states():
    lattice = BasisSpec.lattice(20, 0.1)
    ops = build_basis_ops(lattice)
    ground = initial_state("ground", ops)
    assert ops.p.expect(ground) == 0.0
    gaussian = initial_state("lattice_gaussian", ops, {"p0": 0.5, "sigma": 0.3})
    assert ops.p.expect(gaussian) == pytest.approx(0.5, abs=1e-3)


def test_trajectory_rows_layout(qo_small):
    n_op = build_basis_ops(qo_small.basis).n_op
    traj = propagate(qo_small, fock_state(qo_small.basis, 2), [0.0, 0.5, 1.0])
    header, rows = trajectory_rows(traj, {"number": n_op})
    assert header == ["time", "number", "leakage", "min_eigenvalue"]
    assert len(rows) == 3
    assert rows[0][:2] == [0.0, pytest.approx(2.0)]


def test_auto_method_switches_to_krylov_above_dense_limit():
    assert DENSE_MAX_DIMENSION == 80
    basis = BasisSpec.fock(DENSE_MAX_DIMENSION + 1)
    L = build_quantum_optical(ThermalContext(beta=1.0, omega=1.0), 1.0, basis)
    traj = propagate(L, fock_state(basis, 1), [0.0, 0.01])
    assert traj.method == "krylov"
    assert abs(traj.trace_errors[-1]) < 1e-8
