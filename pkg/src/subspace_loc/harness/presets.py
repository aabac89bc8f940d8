"""Bundled scenario presets."""

from __future__ import annotations

from importlib import resources

from ..errors import ConfigError
from .config import loads_config


def _files():
    return resources.files(__package__).joinpath("presets")


def preset_names():
    return sorted(p.name[:-5] for p in _files().iterdir() if p.name.endswith(".yaml"))


def preset_text(name):
    path = _files().joinpath(f"{name}.yaml")
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}",
                          "preset")
    return path.read_text()


def load_preset(name):
    return loads_config(preset_text(name), name=name)
