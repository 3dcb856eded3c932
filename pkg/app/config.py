"""
Configuration loading: JSON run files, PRICER_ environment overrides and log setup.
"""

import json
import logging
import os
from pathlib import Path
from typing import Mapping, Optional, Union

from app import constants
from app.errors import ValidationError

logger = logging.getLogger(__name__)

SECTIONS = ("model", "option", "grid", "run")


def configure_logging(level: Optional[str] = None) -> None:
    """Install a single stderr handler at the level named by LOG_LEVEL."""
    level_name = (level or os.environ.get("LOG_LEVEL", "INFO")).upper()
    root = logging.getLogger()
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s")
        )
        root.addHandler(handler)
    root.setLevel(getattr(logging, level_name, logging.INFO))


def read_config_file(path: Union[str, Path]) -> dict:
    """
    Read a JSON run configuration

    :param path: location of the configuration file
    :return: dict with one entry per section
    """
    try:
        with open(path, "r", encoding="utf-8") as config_file:
            data = json.loads(config_file.read())
    except FileNotFoundError:
        logger.error("Configuration file %s was not found", path)
        raise ValidationError(f"file {path} not found", field_path="config")
    except json.JSONDecodeError as e:
        logger.error("Configuration file %s is not valid JSON: %s", path, e)
        raise ValidationError(f"invalid JSON: {e}", field_path="config")

    if not isinstance(data, dict):
        raise ValidationError("top level must be an object", field_path="config")
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ValidationError(f"unknown sections {sorted(unknown)}", field_path="config")
    return {section: dict(data.get(section) or {}) for section in SECTIONS}


def apply_env_overrides(config: dict, environ: Optional[Mapping[str, str]] = None) -> dict:
    """
    Override config values from PRICER_<section>__<key> variables.

    Values are parsed as JSON and fall back to the raw string.
    """
    environ = os.environ if environ is None else environ
    prefix = constants.ENV_OVERRIDE_PREFIX
    for key, value in environ.items():
        if not key.startswith(prefix):
            continue
        section, sep, field = key[len(prefix) :].lower().partition("__")
        if not sep or section not in SECTIONS or not field:
            logger.warning("Ignoring malformed override variable %s", key)
            continue
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        config.setdefault(section, {})[field] = parsed
        logger.info("Override %s.%s from environment", section, field)
    return config


def load_config(path: Optional[Union[str, Path]] = None) -> dict:
    """Read the file (or start empty) and layer the environment on top."""
    config = read_config_file(path) if path else {section: {} for section in SECTIONS}
    return apply_env_overrides(config)
