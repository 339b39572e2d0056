# ===========================================================================
# File: app/storage/config_file.py
# ===========================================================================
from pathlib import Path
from typing import Any, Dict, Union
from pydantic import ValidationError

from app.core.config import logger
from app.core.exceptions import ConfigError
from app.models.experiment import ExperimentConfig, parse_complex


def _parse_scalar(text: str) -> Any:
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text[-1:] in ("i", "j") and any(ch.isdigit() for ch in text):
        try:
            return parse_complex(text)
        except ValueError:
            pass
    return text


def parse_config_text(text: str) -> Dict[str, Any]:
    """key=value lines; `[a, b]` lists; everything after `#` is a comment."""
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected key=value, got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {number}: empty key or value in '{line}'")
        if key in values:
            raise ConfigError(f"line {number}: duplicate key '{key}'")
        if value.startswith("["):
            if not value.endswith("]"):
                raise ConfigError(f"line {number}: unterminated list for '{key}'")
            inner = value[1:-1].strip()
            values[key] = [_parse_scalar(item.strip()) for item in inner.split(",")] if inner else []
        else:
            values[key] = _parse_scalar(value)
    return values


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = parse_config_text(text)
    try:
        config = ExperimentConfig(**values)
    except ValidationError as exc:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in exc.errors(include_url=False, include_input=False)
        )
        raise ConfigError(f"invalid configuration in {path}: {details}") from exc
    logger.info(f"Loaded {config.experiment} configuration from {path}")
    return config
