import logging

import pytest

from runner.config import AppConfig, config


def test_defaults():
    cfg = AppConfig(_env_file=None)
    assert cfg.DEFAULT_TOLERANCE == 1e-10
    assert cfg.FLOAT_FORMAT == "%.17g"
    assert cfg.DEFAULT_WORKERS == 1


def test_log_level_is_normalised():
    cfg = AppConfig(_env_file=None, LOG_LEVEL="debug")
    assert cfg.LOG_LEVEL == "DEBUG"
    assert cfg.log_level == logging.DEBUG


def test_unknown_log_level_is_rejected():
    with pytest.raises(ValueError, match="no reconocido"):
        AppConfig(_env_file=None, LOG_LEVEL="chatty")


def test_tolerances_must_be_positive():
    with pytest.raises(ValueError, match="DEFAULT_TOLERANCE"):
        AppConfig(_env_file=None, DEFAULT_TOLERANCE=0.0)
    with pytest.raises(ValueError, match="DEFAULT_WORKERS"):
        AppConfig(_env_file=None, DEFAULT_WORKERS=0)


def test_output_dir_for():
    assert config.output_dir_for("sticky", "somewhere") == "somewhere"
    assert config.output_dir_for("sticky").endswith("/sticky")
