"""Utility/helper functions for solid-dewetting."""
import logging
import os
import platform
from importlib import metadata
from pathlib import Path
from typing import Dict, Optional

from . import __version__, default_settings


logger = logging.getLogger(__name__)

VERSIONED_PACKAGES = ("numpy", "scipy", "pandas", "pydantic", "PyYAML", "Jinja2")


def get_output_root(cli_value: Optional[str] = None, config_value: Optional[str] = None) -> Path:
    """Output root: CLI flag, then the environment variable, then the config file, then the default."""
    env_name = default_settings["output_root_env"]
    for source, value in (("--output-dir", cli_value), (env_name, os.environ.get(env_name)), ("config", config_value)):
        if value:
            logger.debug("Output root %s taken from %s", value, source)
            return Path(value)
    return Path(default_settings["output_root"])


def version_info() -> Dict[str, str]:
    """Versions of this package, Python and the numerical stack, for manifests."""
    versions = {"solid-dewetting": __version__, "python": platform.python_version()}
    for package in VERSIONED_PACKAGES:
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            logger.warning("Unable to determine the version of %s", package)
            versions[package] = "unknown"
    return versions
