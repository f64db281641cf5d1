"""Run configuration files: Jinja2-templated YAML validated into a RunConfig.

A configuration is rendered with Jinja2 first (so presets can take variables such as
``{{ epsilon | default(0.05) }}``), then parsed with ``yaml.safe_load`` and validated.
"""
import itertools
import logging
import math
import os
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import yaml
from jinja2 import Environment, FileSystemLoader, TemplateError
from pydantic import ValidationError

from .exceptions import ConfigError
from .models import RunConfig


logger = logging.getLogger(__name__)

DATA_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "data"))
PRESET_DIR = os.path.join(DATA_DIR, "presets")
MANIFEST_KIND = "solid-dewetting-manifest"
SWEEP_AXES = ("epsilon", "sigma", "theta_i", "length")


def _environment(directory: Optional[str] = None) -> Environment:
    loader = FileSystemLoader(directory) if directory else None
    return Environment(loader=loader, autoescape=True, keep_trailing_newline=True)


def render_template(text: str, context: Optional[dict] = None, source: str = "<config>") -> str:
    """Render configuration text through Jinja2."""
    try:
        return _environment().from_string(text).render(context or {})
    except TemplateError as exc:
        raise ConfigError([(getattr(exc, "lineno", None), f"template error: {exc}")], source) from exc


def _line_index(text: str) -> Dict[tuple, int]:
    """Map key paths of a YAML document to 1-based line numbers."""
    index: Dict[tuple, int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                here = path + (key_node.value,)
                index[here] = key_node.start_mark.line + 1
                walk(value_node, here)
        elif isinstance(node, yaml.SequenceNode):
            for position, item in enumerate(node.value):
                here = path + (position,)
                index[here] = item.start_mark.line + 1
                walk(item, here)

    root = yaml.compose(text, Loader=yaml.SafeLoader)
    if root is not None:
        walk(root, ())
    return index


def _locate(index: Dict[tuple, int], loc: tuple) -> Optional[int]:
    loc = tuple(loc)
    while loc:
        if loc in index:
            return index[loc]
        loc = loc[:-1]
    return None


def parse_config(text: str, context: Optional[dict] = None, source: str = "<config>") -> RunConfig:
    """Render, parse and validate configuration text.

    Raises ConfigError listing every problem with its YAML line number.
    """
    rendered = render_template(text, context, source)
    try:
        data = yaml.safe_load(rendered)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError([(line, f"YAML syntax error: {getattr(exc, 'problem', exc)}")], source) from exc
    if not isinstance(data, dict):
        raise ConfigError([(1, "configuration must be a mapping of sections")], source)
    if data.get("kind") == MANIFEST_KIND:
        # re-executing a run from its manifest
        data = data.get("config") or {}
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        index = _line_index(rendered)
        problems = []
        for error in exc.errors():
            where = ".".join(str(part) for part in error["loc"]) or "<root>"
            problems.append((_locate(index, error["loc"]), f"{where}: {error['msg']}"))
        raise ConfigError(problems, source) from exc


def serialize_config(config: RunConfig) -> str:
    """YAML text that parses back to an equal RunConfig."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False, default_flow_style=None)


def list_presets() -> List[str]:
    """Names of the bundled presets."""
    return sorted(Path(name).stem for name in os.listdir(PRESET_DIR) if name.endswith(".yaml"))


def load_preset(name: str, context: Optional[dict] = None) -> RunConfig:
    """Render and validate a bundled preset."""
    filename = f"{name}.yaml"
    file_path = os.path.join(PRESET_DIR, filename)
    if not os.path.isfile(file_path):
        raise ConfigError([(None, f"no preset named {name!r}; available: {', '.join(list_presets())}")], name)
    with open(file_path, encoding="utf-8") as handle:
        return parse_config(handle.read(), context, source=f"preset:{name}")


def load_config(reference: str, context: Optional[dict] = None) -> RunConfig:
    """Load a configuration file, or a bundled preset when no such file exists."""
    path = Path(reference)
    if path.is_file():
        return parse_config(path.read_text(encoding="utf-8"), context, source=str(path))
    name = reference[len("preset:") :] if reference.startswith("preset:") else reference
    return load_preset(name, context)


def _format_axis(value: float) -> str:
    return f"{value:.6g}"


def expand_sweep(config: RunConfig) -> List[Tuple[str, RunConfig]]:
    """One (label, config) per point of the cartesian product of the sweep axes.

    Without a sweep the single entry is ``(config.name, config)``. When h_bar equals epsilon it
    follows an epsilon sweep; a length sweep keeps the island centre fixed.
    """
    if config.sweep is None:
        return [(config.name, config)]
    axes = [(name, getattr(config.sweep, name)) for name in SWEEP_AXES if getattr(config.sweep, name)]
    base = config.model_dump(mode="python")
    h_bar_follows = config.wetting.h_bar == config.wetting.epsilon
    points = []
    for combo in itertools.product(*(values for _, values in axes)):
        data = {**base, "sweep": None, "wetting": dict(base["wetting"]), "profile": dict(base["profile"])}
        parts = []
        for (name, _), value in zip(axes, combo):
            parts.append(f"{name}={_format_axis(value)}")
            if name == "epsilon":
                data["wetting"]["epsilon"] = value
                if h_bar_follows:
                    data["wetting"]["h_bar"] = value
            elif name == "sigma":
                data["wetting"]["sigma"] = value
            elif name == "theta_i":
                data["wetting"]["sigma"] = math.cos(value)
            else:
                centre = 0.5 * (data["profile"]["x1"] + data["profile"]["x2"])
                data["profile"]["x1"] = centre - 0.5 * value
                data["profile"]["x2"] = centre + 0.5 * value
        label = "_".join(parts)
        data["name"] = label
        try:
            points.append((label, RunConfig.model_validate(data)))
        except ValidationError as exc:
            raise ConfigError([(None, f"sweep point {label}: {exc}")], config.name) from exc
    logger.info("Sweep %s expands to %d runs", config.name, len(points))
    return points
