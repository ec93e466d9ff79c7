"""
Configuration loading for the PC-LS library.

Runtime defaults (tolerances, grid cap, worker threads) come from built-in
values, optionally overridden by a config.json in the project root or by the
file named in PCLS_CONFIG, and finally by the PCLS_THREADS environment variable.
"""

import collections
import json
import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)

DEFAULTS = {
    "tol_psd": 1e-8,
    "tol_spec_atomic": 1e-8,
    "tol_spec_density": 1e-4,
    "z": 4.0,
    "grid_cap": 8192,
    "threads": os.cpu_count() or 1,
    "mc_max_pairs": 500,
    "silverman_floor": 1e-14,
    "endpoint_rtol": 1e-12,
    "spectral_tail_tol": 1e-6,
}


def find_project_root() -> Optional[Path]:
    """Find the project root directory (where config.json lives), if any."""
    current = Path(__file__).resolve().parent

    for _ in range(10):  # Safety limit
        if (current / "config.json").exists():
            return current
        parent = current.parent
        if parent == current:
            break
        current = parent

    return None


def _config_path() -> Optional[Path]:
    override = os.environ.get("PCLS_CONFIG")
    if override:
        return Path(override)
    root = find_project_root()
    return root / "config.json" if root else None


@lru_cache(maxsize=1)
def get_config() -> dict:
    """
    Load configuration, merged over the built-in defaults.

    Returns:
        dict: The configuration dictionary

    Raises:
        json.JSONDecodeError: If the config file is invalid
    """
    config = collections.OrderedDict(DEFAULTS)

    path = _config_path()
    if path is not None and path.exists():
        with open(path, 'r') as f:
            overrides = json.load(f, object_pairs_hook=collections.OrderedDict)
        # Keys starting with "_" are comments, as in config.example.json
        config.update({k: v for k, v in overrides.items() if not k.startswith("_")})
        logger.debug(f"Loaded config overrides from {path}")

    threads = os.environ.get("PCLS_THREADS")
    if threads:
        try:
            config["threads"] = max(1, int(threads))
        except ValueError:
            logger.warning(f"Ignoring non-integer PCLS_THREADS={threads!r}")

    return config


def reload_config() -> dict:
    """Force reload of configuration (clears cache)."""
    get_config.cache_clear()
    return get_config()
