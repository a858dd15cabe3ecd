# -*- coding: utf-8 -*-
"""config / errors / logger：Schema 校验、覆盖、退出码与细化重试"""
import json

import pytest

from core.config import ConfigField, RunConfig, canonical_json, load_config
from core.errors import (
    BasisMismatchError,
    ConfigError,
    ErrorType,
    InvalidArgumentError,
    NotCompletelyPositiveError,
    NumericFailureError,
    PreconditionError,
    QuadratureError,
    describe_error,
    exit_code_for,
    is_refinable,
    retry_with_refinement,
    with_refinement,
)
from core.logger import configure_logging, get_logger

SCHEMA = {
    "run": {"seed": ConfigField(type=int, default=0)},
    "thermal": {
        "beta": ConfigField(type=float, default=1.0),
        "l": ConfigField(type=float, default=None),
    },
    "logging": {"level": ConfigField(type=str, default="INFO", choices=("DEBUG", "INFO"))},
    "analysis": {"require": ConfigField(type=list, default=["cp"])},
}


def test_config_field_check():
    field = ConfigField(type=float, default=1.0)
    assert field.check("thermal.beta", 2) == 2.0
    assert isinstance(field.check("thermal.beta", 2), float)
    with pytest.raises(ConfigError) as info:
        field.check("thermal.beta", True)
    assert info.value.field == "thermal.beta"
    with pytest.raises(ConfigError):
        ConfigField(type=int).check("run.seed", 1.5)
    with pytest.raises(ConfigError):
        ConfigField(type=str, choices=("a", "b")).check("x", "c")


def test_get_config_prefers_values_then_schema_defaults():
    config = RunConfig({"thermal": {"beta": 3}}, SCHEMA)
    assert config.get_config("thermal.beta") == 3.0
    assert config.get_config("run.seed", 99) == 0
    assert config.get_config("thermal.l", 0.5) == 0.5
    assert config.get_config("generator.params.eta", 1.0) == 1.0


def test_free_keys_pass_through():
    config = RunConfig({"generator": {"params": {"gamma_m": [0.1, 0.2]}}}, SCHEMA)
    assert config.get_config("generator.params.gamma_m") == [0.1, 0.2]
    assert config.get_config("generator.params") == {"gamma_m": [0.1, 0.2]}


def test_validation_names_the_field():
    with pytest.raises(ConfigError) as info:
        RunConfig({"thermal": {"beta": "hot"}}, SCHEMA)
    assert info.value.field == "thermal.beta"


def test_require_missing():
    config = RunConfig({}, SCHEMA)
    with pytest.raises(ConfigError) as info:
        config.require("thermal.l")
    assert info.value.field == "thermal.l"


def test_set_override_creates_sections_and_checks_type():
    config = RunConfig({}, SCHEMA)
    config.set_override("run.seed", 7)
    config.set_override("output.dir", "runs/a")
    assert config.get_config("run.seed") == 7
    assert config.raw["output"]["dir"] == "runs/a"
    with pytest.raises(ConfigError):
        config.set_override("logging.level", "TRACE")


def test_effective_config_is_order_independent():
    first = RunConfig({"thermal": {"beta": 2.0}, "gas": {"m": 1.0, "z": 1.0}}, SCHEMA)
    second = RunConfig({"gas": {"z": 1.0, "m": 1.0}, "thermal": {"beta": 2.0}}, SCHEMA)
    assert canonical_json(first.effective()) == canonical_json(second.effective())
    effective = first.effective()
    assert effective["run"]["seed"] == 0
    assert effective["analysis"]["require"] == ["cp"]
    assert "l" not in effective["thermal"]


def test_load_config_errors(tmp_path):
    assert load_config(None, SCHEMA).get_config("thermal.beta") == 1.0
    with pytest.raises(ConfigError) as info:
        load_config(str(tmp_path / "missing.json"), SCHEMA)
    assert info.value.field == "--config"

    broken = tmp_path / "broken.json"
    broken.write_text("{\"thermal\": ", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(broken), SCHEMA)

    listed = tmp_path / "list.json"
    listed.write_text("[]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(listed), SCHEMA)

    good = tmp_path / "good.json"
    good.write_text(json.dumps({"thermal": {"beta": 0.5}}), encoding="utf-8")
    config = load_config(str(good), SCHEMA)
    assert config.source == str(good)
    assert config.get_config("thermal.beta") == 0.5


@pytest.mark.parametrize("error, code", [
    (InvalidArgumentError("bad"), 2),
    (ConfigError("thermal.beta", "bad"), 2),
    (BasisMismatchError("bad"), 2),
    (NotCompletelyPositiveError("D_xx >= 0", -0.1), 1),
    (PreconditionError("bad", precondition="stationary"), 1),
    (NumericFailureError("bad"), 1),
    (QuadratureError("bad"), 1),
    (RuntimeError("bad"), 1),
])
def test_exit_codes(error, code):
    assert exit_code_for(error) == code


def test_describe_error():
    message = describe_error(ConfigError("analysis.groups[0]", "应为 {kind, param}"))
    assert "analysis.groups[0]" in message
    message = describe_error(NotCompletelyPositiveError("D_pp >= 0", -0.25))
    assert "D_pp >= 0" in message and "-0.25" in message
    assert NotCompletelyPositiveError("D_pp >= 0", -0.25).error_type is ErrorType.NOT_COMPLETELY_POSITIVE


def test_refinable_classification():
    assert is_refinable(NumericFailureError("x"))
    assert is_refinable(QuadratureError("x"))
    assert not is_refinable(InvalidArgumentError("x"))
    assert not is_refinable(ValueError("x"))


def test_retry_with_refinement_moves_to_next_level():
    seen = []
    refined = []

    def attempt(level):
        seen.append(level)
        if level < 3:
            raise NumericFailureError(f"level {level}")
        return level * 10

    result = retry_with_refinement(attempt, (1, 2, 3), on_refine=lambda level, e: refined.append(level))
    assert result == 30
    assert seen == [1, 2, 3]
    assert refined == [1, 2]


def test_retry_with_refinement_stops_on_non_refinable():
    seen = []

    def attempt(level):
        seen.append(level)
        raise InvalidArgumentError("bad")

    with pytest.raises(InvalidArgumentError):
        retry_with_refinement(attempt, ("a", "b"))
    assert seen == ["a"]


def test_retry_with_refinement_raises_last_error():
    def attempt(level):
        raise QuadratureError(f"limit {level}", estimate=1.0, error=0.5)

    with pytest.raises(QuadratureError) as info:
        retry_with_refinement(attempt, (60, 250))
    assert "250" in str(info.value)


def test_with_refinement_decorator():
    calls = []

    @with_refinement(levels=(1e-8, 1e-10), keyword="tol")
    def solve(x, tol):
        calls.append(tol)
        if tol > 1e-9:
            raise NumericFailureError("loose")
        return x + tol

    assert solve(1.0) == pytest.approx(1.0)
    assert calls == [1e-8, 1e-10]
    assert solve(1.0, tol=0.5) == 1.5


def test_logger_levels_are_reconfigurable(capsys):
    configure_logging("WARNING")
    logger = get_logger("test")
    logger.info("[Test] 不应输出")
    logger.warning("[Test] 应输出")
    captured = capsys.readouterr()
    assert "应输出" in captured.err
    assert "不应输出" not in captured.err
    assert captured.out == ""
    configure_logging("INFO")
