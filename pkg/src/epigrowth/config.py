"""Load and save model configurations.

Config files are INI-style: flat ``key = value`` pairs inside the sections
``[params]``, ``[beta]``, ``[gamma]``, ``[knowledge]``, ``[production]`` and
``[utility]``.  An optional ``[unused]`` section records listed-but-unused
constants; they are carried along for the assumption report only.
"""

from __future__ import annotations

import configparser
import dataclasses
from importlib import resources
from pathlib import Path

from .forms import (
    KnowledgeSpec,
    Model,
    ModelParams,
    ProductionSpec,
    RecoverySpec,
    TransmissionSpec,
    UtilitySpec,
)

SECTIONS = {
    "params": ModelParams,
    "beta": TransmissionSpec,
    "gamma": RecoverySpec,
    "knowledge": KnowledgeSpec,
    "production": ProductionSpec,
    "utility": UtilitySpec,
}
_MODEL_FIELD = {"params": "params", "beta": "beta", "gamma": "gamma",
                "knowledge": "knowledge", "production": "production", "utility": "utility"}
_STRING_KEYS = {"variant", "form"}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def available_presets() -> list[str]:
    files = resources.files("epigrowth").joinpath("presets")
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".ini"))


def _parse(parser: configparser.ConfigParser) -> tuple[Model, dict]:
    parts = {}
    for section, cls in SECTIONS.items():
        names = {f.name.lower(): f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        if parser.has_section(section):
            for key, raw in parser.items(section):
                if key not in names:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                if key in _STRING_KEYS:
                    kwargs[names[key]] = raw.strip().lower()
                else:
                    try:
                        kwargs[names[key]] = float(raw)
                    except ValueError as exc:
                        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from exc
        try:
            parts[_MODEL_FIELD[section]] = cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc
    extras = {}
    for section in parser.sections():
        if section == "unused":
            extras = dict(parser.items(section))
        elif section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
    return Model(**parts), extras


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str.lower
    return parser


def load_config(path) -> tuple[Model, dict]:
    """Read a config file; returns the model and the ``[unused]`` entries."""
    parser = _parser()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return _parse(parser)


def load_preset(name: str = "section6") -> tuple[Model, dict]:
    res = resources.files("epigrowth").joinpath("presets", f"{name}.ini")
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(available_presets())}")
    parser = _parser()
    parser.read_string(res.read_text())
    return _parse(parser)


def preset_model(name: str = "section6") -> Model:
    return load_preset(name)[0]


def dump_config(model: Model, path, extras: dict | None = None) -> None:
    """Write ``model`` in the format read by :func:`load_config`."""
    parser = _parser()
    for section in SECTIONS:
        obj = getattr(model, _MODEL_FIELD[section])
        parser[section] = {f.name: repr(getattr(obj, f.name)) if not isinstance(getattr(obj, f.name), str)
                           else getattr(obj, f.name) for f in dataclasses.fields(obj)}
    if extras:
        parser["unused"] = extras
    with open(path, "w") as fh:
        parser.write(fh)
