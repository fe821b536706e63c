import os
from pathlib import Path

from .exceptions import ConfigFileError

ENV_PREFIX = "FLOWSKETCH_"

defaults = dict(
    SEED=1,
    DEPTH=3,
    ALPHA=0.7,
    LAYOUT="pipelined", # pipelined or multihash
    DIGEST_WIDTH=8,
    ANCILLARY_COUNTER_WIDTH=8,
    ELASTIC_LAMBDA=8.0,
    ELASTIC_LIGHT_COUNTER_WIDTH=8,
    HEAVY_HITTER_THRESHOLDS=(50, 100, 200, 400, 800),
    PARALLELISM=1,
    LOG_LEVEL="INFO",
)


def _coerce(raw: str, like):
    if isinstance(like, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    if isinstance(like, tuple):
        return tuple(int(v) for v in raw.split(",") if v.strip())
    return raw


def get_settings(overrides: dict | None = None) -> dict:
    env_defined = {}
    for key, value in defaults.items():
        raw = os.environ.get(ENV_PREFIX + key)
        if raw is not None and raw.strip():
            env_defined[key] = _coerce(raw, value)

    return {**defaults, **env_defined, **(overrides or {})}


def env_seed() -> int | None:
    raw = os.environ.get(ENV_PREFIX + "SEED")
    if raw is None or not raw.strip():
        return None
    return int(raw)


def load_config(path) -> dict:
    """
    Parse a flat key-value config file.

        # comment
        algorithm = hashflow
        budget_bytes = 1048576
        thresholds = 50, 100, 200

    Values containing a comma become lists of stripped strings; everything
    else stays a string and is typed later by the pydantic schema.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigFileError("config file not found", path=path)

    values: dict[str, str | list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigFileError(f"expected 'key = value', got {line!r}", path=path, line=lineno)
        key, _, value = stripped.partition("=")
        key = key.strip().lower().replace("-", "_")
        value = value.strip()
        if not key:
            raise ConfigFileError("empty key", path=path, line=lineno)
        if key in values:
            raise ConfigFileError(f"duplicate key '{key}'", path=path, line=lineno)
        if "," in value:
            values[key] = [v.strip() for v in value.split(",") if v.strip()]
        else:
            values[key] = value

    return values
