# config.py
import logging
import os

import yaml
from dotenv import load_dotenv

load_dotenv()

FORMAT_ENV_VAR = "TIMING_REPORT_FORMAT"
OUTPUT_FORMATS = ("text", "csv", "json")
CONFIG_SECTIONS = ("simulate", "columns")

_LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def default_format():
    value = os.getenv(FORMAT_ENV_VAR)
    if not value:
        return "text"
    value = value.strip().lower()
    if value not in OUTPUT_FORMATS:
        raise ValueError(
            f"{FORMAT_ENV_VAR}={value!r} is not one of {', '.join(OUTPUT_FORMATS)}"
        )
    return value


def load_config_file(path):
    with open(path, "r", encoding="utf-8") as f:
        document = yaml.safe_load(f)

    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ValueError(f"Config file {path} must hold a mapping at the top level")

    unknown = sorted(set(document) - set(CONFIG_SECTIONS))
    if unknown:
        raise ValueError(f"Unknown config sections in {path}: {', '.join(unknown)}")

    for section in CONFIG_SECTIONS:
        value = document.get(section)
        if value is not None and not isinstance(value, dict):
            raise ValueError(f"Config section '{section}' in {path} must be a mapping")
    return document


def configure_logging(verbosity=0):
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    else:
        level = logging.INFO

    root = logging.getLogger()
    # repeated CLI invocations in one process (tests) reuse the handler
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        root.addHandler(handler)
    root.setLevel(level)
