# -*- coding: utf-8 -*-
"""coefficients：Kraus ↔ 系数、CP 与协变谓词、热约束系数、序列化"""
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.coefficients import (
    BilinearCoefficients,
    KrausVectors,
    ThermalContext,
    coefficients_from_dict,
    coefficients_from_kraus,
    coefficients_to_dict,
    is_completely_positive,
    is_shift_covariant,
    is_translation_covariant,
    kraus_from_coefficients,
    load_coefficients,
    qbm_constrained,
    qbm_residual_inequality,
    qo_coefficients,
)
from core.errors import ConfigError, InvalidArgumentError, NotCompletelyPositiveError

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)
complex_numbers = st.builds(complex, finite, finite)
kraus_pairs = st.lists(st.tuples(complex_numbers, complex_numbers), min_size=1, max_size=4)


def test_single_kraus_pair():
    c = coefficients_from_kraus(KrausVectors(((1.0, -1j),)))
    assert c.as_tuple()[:4] == pytest.approx((0.5, 0.5, 0.0, 1.0))
    verdict = is_completely_positive(c)
    assert verdict.ok
    assert verdict.margin == pytest.approx(0.0, abs=1e-14)


def test_kraus_vectors_reject_empty_and_mismatched():
    with pytest.raises(InvalidArgumentError):
        KrausVectors(())
    with pytest.raises(InvalidArgumentError):
        KrausVectors.from_arrays([1.0, 2.0], [1.0])


@settings(max_examples=60, deadline=None)
@given(kraus_pairs, st.floats(min_value=0.2, max_value=3.0))
def test_coefficients_from_any_kraus_set_are_completely_positive(pairs, hbar):
    c = coefficients_from_kraus(KrausVectors(tuple(pairs)), hbar=hbar)
    assert is_completely_positive(c).ok


@settings(max_examples=60, deadline=None)
@given(kraus_pairs)
def test_kraus_decomposition_reproduces_coefficients(pairs):
    c = coefficients_from_kraus(KrausVectors(tuple(pairs)))
    again = coefficients_from_kraus(kraus_from_coefficients(c))
    np.testing.assert_allclose(again.as_tuple(), c.as_tuple(), atol=1e-9 * max(1.0, c.scale))


def test_rank_one_on_boundary():
    ctx = ThermalContext(beta=1.0, M=1.0)
    c = qbm_constrained(ctx, gamma=0.8, D_px=0.3)
    assert len(kraus_from_coefficients(c)) == 1
    interior = BilinearCoefficients(D_xx=2.0, D_pp=2.0, D_px=0.0, gamma=1.0)
    assert len(kraus_from_coefficients(interior)) == 2


def test_kraus_from_non_cp_raises():
    c = BilinearCoefficients(D_xx=0.1, D_pp=0.1, D_px=0.0, gamma=1.0)
    with pytest.raises(NotCompletelyPositiveError) as info:
        kraus_from_coefficients(c)
    assert info.value.margin < 0
    assert "gamma" in info.value.inequality


@pytest.mark.parametrize("coefficients, violated", [
    (BilinearCoefficients(D_xx=-0.1, D_pp=1.0), "D_xx >= 0"),
    (BilinearCoefficients(D_xx=1.0, D_pp=-0.1), "D_pp >= 0"),
    (BilinearCoefficients(D_xx=1.0, D_pp=1.0, D_px=1.2), "D_xx*D_pp - D_px^2 >= gamma^2*hbar^2/4"),
])
def test_cp_names_violated_inequality(coefficients, violated):
    verdict = is_completely_positive(coefficients)
    assert not verdict
    assert verdict.violated == violated
    assert verdict.margin < 0


def test_qbm_boundary_flips_under_small_perturbation():
    ctx = ThermalContext(beta=1.3, M=0.7, hbar=1.0)
    c = qbm_constrained(ctx, gamma=1.1, D_px=0.2)
    assert abs(c.diffusion_matrix().determinant) <= 1e-12 * c.scale
    assert is_completely_positive(c).ok
    assert qbm_residual_inequality(c, ctx) == pytest.approx(0.0, abs=1e-12)
    perturbed = BilinearCoefficients(c.D_xx - 1e-6, c.D_pp, c.D_px, c.gamma, c.mu, c.hbar)
    assert not is_completely_positive(perturbed).ok


def test_qbm_constrained_values():
    ctx = ThermalContext(beta=2.0, M=0.5, hbar=1.0)
    c = qbm_constrained(ctx, gamma=0.4)
    assert c.D_pp == pytest.approx(2.0 * 0.5 * 0.4 / 2.0)
    assert c.D_xx == pytest.approx(0.4 * 2.0 / (8.0 * 0.5))
    assert c.mu == c.gamma
    assert is_translation_covariant(c).ok


@pytest.mark.parametrize("gamma, beta", [(0.0, 1.0), (-1.0, 1.0), (1.0, math.inf)])
def test_qbm_constrained_rejects(gamma, beta):
    with pytest.raises(InvalidArgumentError):
        qbm_constrained(ThermalContext(beta=beta), gamma)


def test_qo_coefficients_are_shift_covariant():
    ctx = ThermalContext(beta=1.0, M=1.0, omega=1.0)
    c = qo_coefficients(ctx, 0.5)
    assert is_shift_covariant(c, ctx.oscillator_length).ok
    assert not is_translation_covariant(c).ok
    assert is_completely_positive(c).ok
    assert c.D_pp == pytest.approx(0.5 * 0.5 / math.tanh(0.5))


def test_qo_zero_temperature_saturates_cp():
    ctx = ThermalContext(beta=math.inf, M=1.0, omega=2.0)
    c = qo_coefficients(ctx, 0.3)
    assert ctx.n_beta == 0.0
    assert c.diffusion_matrix().determinant == pytest.approx(0.0, abs=1e-14)


def test_shift_covariance_names_failing_condition():
    c = BilinearCoefficients(D_xx=1.0, D_pp=1.0, D_px=0.1)
    verdict = is_shift_covariant(c, 1.0)
    assert verdict.violated == "D_px = 0"
    with pytest.raises(InvalidArgumentError):
        is_shift_covariant(c, 0.0)


def test_thermal_context_limits():
    ctx = ThermalContext(beta=math.inf, omega=1.0)
    assert ctx.coth_half == 1.0
    assert ThermalContext(beta=1.0, omega=0.0).n_beta == math.inf
    with pytest.raises(InvalidArgumentError):
        ThermalContext(beta=0.0)
    with pytest.raises(InvalidArgumentError):
        ThermalContext(beta=1.0, l=-1.0)


def test_coefficients_dict_roundtrip_with_thermal():
    ctx = ThermalContext(beta=0.5, M=2.0, omega=1.5, l=0.8)
    c = BilinearCoefficients(D_xx=0.3, D_pp=0.4, D_px=0.1, gamma=0.2, mu=0.2)
    parsed, parsed_ctx = coefficients_from_dict(coefficients_to_dict(c, ctx))
    assert parsed == c
    assert parsed_ctx == ctx


def test_coefficients_from_dict_names_missing_field():
    with pytest.raises(ConfigError) as info:
        coefficients_from_dict({"D_xx": 1.0})
    assert info.value.field == "coefficients.D_pp"
    with pytest.raises(ConfigError) as info:
        coefficients_from_dict({"D_xx": 1.0, "D_pp": "one"})
    assert info.value.field == "coefficients.D_pp"


def test_load_coefficients(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"D_xx": 0.5, "D_pp": 0.5, "gamma": 1.0}), encoding="utf-8")
    c, ctx = load_coefficients(str(path))
    assert c.gamma == 1.0 and ctx is None
    with pytest.raises(ConfigError):
        load_coefficients(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_coefficients(str(bad))
