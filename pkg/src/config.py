# Copyright 2024 Canonical Ltd.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Load satlab settings from config.yaml."""

import dataclasses
import functools
import logging
import os
from pathlib import Path
from typing import Optional

import yaml

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config.yaml"
CONFIG_ENV = "SATLAB_CONFIG"
THREADS_ENV = "SATLAB_THREADS"

# set by override(), cleared by reset(); takes precedence over the environment
_overrides: dict = {}


@dataclasses.dataclass(frozen=True)
class Settings:
    """Tunable options, one field per config.yaml option."""

    max_vertices: int = 4096
    exact_limit: int = 24
    packing_time_budget: float = 60.0
    restarts: int = 64
    max_iters: int = 400
    tolerance: float = 1e-9
    support_threshold: float = 1e-9
    required_floor: float = 1e-6
    seed: int = 0
    threads: int = 1
    oracle_max_vertices: int = 9


def _read_options(path: Path) -> dict:
    """Read the `options` mapping of a config file into field/value pairs."""
    with open(path, "r") as conf_file:
        data = yaml.safe_load(conf_file) or {}

    fields = {f.name for f in dataclasses.fields(Settings)}
    values = {}
    for key, option in (data.get("options") or {}).items():
        name = key.replace("-", "_")
        if name not in fields:
            logger.warning(f"Ignoring unknown option {key} in {path}")
            continue
        if "default" in option:
            values[name] = option["default"]
    return values


def _coerce(values: dict) -> dict:
    casts = {f.name: f.type for f in dataclasses.fields(Settings)}
    return {name: casts[name](value) for name, value in values.items()}


@functools.lru_cache()
def get_settings(path: Optional[str] = None) -> Settings:
    """Return settings from `path`, $SATLAB_CONFIG or the bundled config.yaml."""
    config_path = Path(
        path or _overrides.get("path") or os.environ.get(CONFIG_ENV) or DEFAULT_CONFIG_PATH
    )
    values = {}
    if config_path.exists():
        values = _read_options(config_path)
        logger.debug(f"Loaded options {sorted(values)} from {config_path}")
    else:
        logger.debug(f"No config at {config_path}, using built-in defaults")

    threads = _overrides.get("threads") or os.environ.get(THREADS_ENV)
    if threads:
        values["threads"] = threads

    settings = Settings(**_coerce(values))
    if settings.threads < 1:
        raise ValueError(f"threads must be positive, got {settings.threads}")
    return settings


def override(path: Optional[str] = None, threads: Optional[int] = None) -> Settings:
    """Point later get_settings() calls at another config file and/or worker count.

    The process environment is left untouched; call reset() to drop the override.
    """
    if path:
        _overrides["path"] = str(path)
    if threads:
        _overrides["threads"] = threads
    get_settings.cache_clear()
    return get_settings()


def reset() -> None:
    """Forget any override() and reload settings on next use."""
    _overrides.clear()
    get_settings.cache_clear()
