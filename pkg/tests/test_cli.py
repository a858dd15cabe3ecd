# -*- coding: utf-8 -*-
"""命令行：子命令、退出码、报告落盘与确定性"""
import json
import math

import pytest

from main import QuantumFokkerPlanckToolkit, build_parser, main, parse_lattice
from core.errors import ConfigError, QuadratureError
from core.handlers import HANDLERS

QO_CONFIG = {
    "generator": {"family": "quantum_optical", "params": {"eta": 1.0}, "basis": {"dimension": 15}},
    "thermal": {"beta": 1.0, "omega": 1.0},
    "analysis": {"samples": 5},
}

GAS = {"m": 0.05, "z": 1.0, "n": 1.0, "beta": 1.0, "t_matrix": {"kind": "constant", "params": {"t0": 10.0}}}


def _write(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _report(out_dir, command):
    with open(f"{out_dir}/{command}.json", "r", encoding="utf-8") as f:
        return json.load(f)


def test_parser_lists_all_commands():
    parser = build_parser()
    args = parser.parse_args(["check", "--fock-dim", "12", "--seed", "4"])
    assert args.command == "check"
    assert sorted(HANDLERS) == ["check", "covariance", "evolve", "gamma", "qlbe", "steady"]
    overrides = dict(QuantumFokkerPlanckToolkit.overrides(args))
    assert overrides["generator.basis.dimension"] == 12
    assert overrides["run.seed"] == 4


def test_parse_lattice():
    assert parse_lattice("50,0.1") == (50, 0.1)
    with pytest.raises(ConfigError):
        parse_lattice("50")
    with pytest.raises(ConfigError):
        parse_lattice("a,b")


def test_check_quantum_optics(tmp_path):
    out = str(tmp_path / "out")
    assert main(["check", "--config", _write(tmp_path, QO_CONFIG), "--out", out]) == 0
    report = _report(out, "check")
    assert report["command"] == "check"
    assert report["family"] == "quantum_optical"
    assert report["predicates"]["cp"]["status"] == "ok"
    assert report["predicates"]["shift_covariant"]["status"] == "ok"
    assert report["stationary"]["kernel_dimension"] == 1
    assert report["gibbs"]["status"] == "ok"
    phase = [entry for entry in report["equivariance"] if entry["group"]["kind"] == "phase"]
    assert phase[0]["status"] == "ok"
    assert report["exit_code"] == 0
    assert (tmp_path / "out" / "index.json").exists()


def _strict_load(path):
    def reject(constant):
        raise ValueError(f"非法 JSON 常量 {constant}")

    return json.loads(path.read_text(encoding="utf-8"), parse_constant=reject)


def test_check_reports_clamped_fock_shift(tmp_path):
    out = str(tmp_path / "out")
    assert main(["check", "--config", _write(tmp_path, QO_CONFIG), "--out", out]) == 0
    shift = [entry for entry in _report(out, "check")["equivariance"] if entry["group"]["kind"] == "shift"]
    assert len(shift) == 1
    assert shift[0]["mode"] == "approximate"
    # λ_th = √(β/4M) = 0.5
    assert shift[0]["group"]["param"] == pytest.approx(0.05)
    assert shift[0]["support_levels"] == 7
    assert shift[0]["status"] == "violated"


def test_check_required_equivariance_fails_for_position_shift(tmp_path):
    config = dict(QO_CONFIG, analysis={"samples": 5, "require": ["cp", "equivariance"]})
    out = str(tmp_path / "out")
    assert main(["check", "--config", _write(tmp_path, config), "--out", out]) == 1
    assert "equivariance" in _report(out, "check")["violated"]


def test_check_non_cp_coefficients_exit_one(tmp_path):
    config = {
        "generator": {"family": "general_xp", "basis": {"dimension": 10}},
        "coefficients": {"D_xx": 0.1, "D_pp": 0.1, "D_px": 0.0, "gamma": 1.0},
        "analysis": {"samples": 2},
    }
    out = str(tmp_path / "out")
    assert main(["check", "--config", _write(tmp_path, config), "--out", out]) == 1
    report = _report(out, "check")
    assert "cp" in report["violated"]
    assert report["predicates"]["cp"]["violated"] == "D_xx*D_pp - D_px^2 >= gamma^2*hbar^2/4"
    assert report["build_meta"]["warnings"]


def test_missing_coefficients_is_config_error(tmp_path, capsys):
    config = {"generator": {"family": "general_xp", "basis": {"dimension": 10}}}
    code = main(["check", "--config", _write(tmp_path, config), "--out", str(tmp_path / "out")])
    assert code == 2
    assert "coefficients" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["check", "--lattice", "3"],
    ["check", "--fock-dim", "1"],
    ["check", "--log-level", "chatty"],
])
def test_usage_errors_exit_two(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path / "out")]) == 2


def test_bad_config_files_exit_two(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert main(["check", "--config", str(broken), "--out", str(tmp_path / "o1")]) == 2
    assert main(["check", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "o2")]) == 2
    typed = _write(tmp_path, {"thermal": {"beta": "cold"}}, "typed.json")
    assert main(["check", "--config", typed, "--out", str(tmp_path / "o3")]) == 2
    unknown = _write(tmp_path, dict(QO_CONFIG, analysis={"require": ["ergodic"]}), "unknown.json")
    assert main(["check", "--config", unknown, "--out", str(tmp_path / "o4")]) == 2


def test_family_basis_mismatch_exit_two(tmp_path):
    assert main(["check", "--config", _write(tmp_path, QO_CONFIG), "--lattice", "5,0.1",
                 "--out", str(tmp_path / "out")]) == 2


def test_reports_are_deterministic(tmp_path):
    path = _write(tmp_path, QO_CONFIG)
    first, second, other = (str(tmp_path / name) for name in ("a", "b", "c"))
    assert main(["check", "--config", path, "--out", first, "--seed", "5"]) == 0
    assert main(["check", "--config", path, "--out", second, "--seed", "5"]) == 0
    assert main(["check", "--config", path, "--out", other, "--seed", "6"]) == 0
    a = (tmp_path / "a" / "check.json").read_bytes()
    b = (tmp_path / "b" / "check.json").read_bytes()
    assert a == b
    assert _report(first, "check")["config_hash"] != _report(other, "check")["config_hash"]


def test_evolve_zero_temperature_rate(tmp_path):
    config = {
        "generator": {"family": "quantum_optical", "params": {"eta": 0.8}, "basis": {"dimension": 30}},
        "thermal": {"zero_temperature": True, "omega": 1.0},
        "dynamics": {"t_max": 5.0, "steps": 51, "initial": {"kind": "fock", "params": {"n": 1}}},
    }
    out = str(tmp_path / "out")
    assert main(["evolve", "--config", _write(tmp_path, config), "--out", out]) == 0
    summary = _report(out, "evolve")["summary"]
    assert summary["fit"]["observable"] == "number"
    assert summary["fit"]["rate"] == pytest.approx(0.8, rel=1e-3)
    assert summary["final"]["number"] == pytest.approx(math.exp(-4.0), abs=1e-9)
    lines = (tmp_path / "out" / "evolve.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "time,number,x,p,x2,p2,leakage,min_eigenvalue"
    assert len(lines) == 52
    oracle = summary["moment_oracle"]
    assert oracle["hamiltonian"] == "oscillator"
    assert oracle["max_deviation"] < 1e-7
    report = _strict_load(tmp_path / "out" / "evolve.json")
    assert report["generator"]["thermal"]["beta"] == "inf"
    assert "Infinity" not in (tmp_path / "out" / "evolve.json").read_text(encoding="utf-8")
    _strict_load(tmp_path / "out" / "index.json")


def test_evolve_empty_grid(tmp_path):
    config = dict(QO_CONFIG, dynamics={"steps": 0})
    out = str(tmp_path / "out")
    assert main(["evolve", "--config", _write(tmp_path, config), "--out", out]) == 0
    assert _report(out, "evolve")["summary"]["samples"] == 0
    lines = (tmp_path / "out" / "evolve.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1


def test_evolve_rejects_negative_steps(tmp_path):
    config = dict(QO_CONFIG, dynamics={"steps": -3})
    assert main(["evolve", "--config", _write(tmp_path, config), "--out", str(tmp_path / "out")]) == 2


def test_steady_reports_gibbs_distance(tmp_path):
    out = str(tmp_path / "out")
    assert main(["steady", "--config", _write(tmp_path, QO_CONFIG), "--out", out]) == 0
    report = _report(out, "steady")
    assert report["stationary"]["kernel_dimension"] == 1
    assert report["states"][0]["distance_to_gibbs"] < 1e-8
    assert report["states"][0]["number"] == pytest.approx(1.0 / (math.e - 1.0), rel=1e-4)


def test_gamma_command(tmp_path):
    out = str(tmp_path / "out")
    assert main(["gamma", "--config", _write(tmp_path, {"gas": GAS}), "--out", out]) == 0
    report = _report(out, "gamma")
    expected = (128.0 / 3.0) * math.pi ** 3 * 100.0 * 0.05 ** 4
    assert report["gamma"] == pytest.approx(expected, rel=1e-9)
    assert report["D_pp"] == pytest.approx(2.0 * report["gamma"])
    assert report["gamma_1d"] == pytest.approx(0.94, rel=0.01)


def test_gamma_requires_gas(tmp_path):
    assert main(["gamma", "--out", str(tmp_path / "out")]) == 2


def test_qlbe_command(tmp_path):
    config = {
        "generator": {"family": "qlbe_1d", "params": {"q_max_index": 3}},
        "gas": GAS,
        "analysis": {"require": ["gibbs"]},
    }
    out = str(tmp_path / "out")
    assert main(["qlbe", "--config", _write(tmp_path, config), "--lattice", "12,0.25", "--out", out]) == 0
    report = _report(out, "qlbe")
    assert report["gibbs"]["status"] == "ok"
    assert report["brownian_limit"]["in_regime"] is True
    assert len(report["momenta"]) == 25


def test_qlbe_command_needs_lattice_family(tmp_path):
    assert main(["qlbe", "--config", _write(tmp_path, QO_CONFIG), "--out", str(tmp_path / "out")]) == 2


def test_covariance_on_lattice(tmp_path):
    config = {"generator": {"family": "qlbe_1d", "params": {"q_max_index": 2}}, "gas": GAS,
              "analysis": {"samples": 3}}
    out = str(tmp_path / "out")
    assert main(["covariance", "--config", _write(tmp_path, config), "--lattice", "6,0.25", "--out", out]) == 0
    report = _report(out, "covariance")
    assert report["equivariance"][0]["mode"] == "exact"
    assert report["equivariance"][0]["status"] == "ok"
    assert report["orbit_witnesses"]


def test_exhausted_quadrature_exits_one(tmp_path, monkeypatch, capsys):
    def fail(self, command):
        raise QuadratureError("求积未达到相对容差", estimate=1.0, error=0.5)

    monkeypatch.setattr(QuantumFokkerPlanckToolkit, "run", fail)
    code = main(["gamma", "--config", _write(tmp_path, {"gas": GAS}), "--out", str(tmp_path / "out")])
    assert code == 1
    assert capsys.readouterr().err
