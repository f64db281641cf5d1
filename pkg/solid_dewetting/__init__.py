"""Solid-state dewetting of thin films with a wetting potential."""
from importlib import metadata

try:
    __version__ = metadata.version("solid-dewetting")
except metadata.PackageNotFoundError:
    # Running from a source checkout that was never installed.
    __version__ = "0.1.0"


default_settings = {
    "output_root": "runs",
    "output_root_env": "SOLID_DEWETTING_OUTPUT_ROOT",
    "float_format": "%.17g",
}
