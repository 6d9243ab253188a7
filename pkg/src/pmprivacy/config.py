"""Pipeline configuration files.

INI-style, one numbered section per step::

    [pipeline]
    seed = 7

    [step 1]
    op = substitute_activities
    sensitive = f
    substitutes = g, k
    meta.desired_analyses = process discovery

    [step 2]
    op = generalize_time
    level = minutes

Keys starting with ``meta.`` become optional metadata of the step's layer
(``operation_parameters``, ``statistics``, ``desired_analyses``); list
values are comma-separated, ``name=value`` pairs semicolon-separated.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass

from .anonymizers import PipelineStep, prepare_step
from .metadata import OPTIONAL_FIELDS

_STEP_RE = re.compile(r"^step\s+(\d+)$")


class ConfigError(ValueError):
    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(f"step {step}: {message}" if step is not None else message)


@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    steps: tuple[PipelineStep, ...]


def _optional_value(field_name: str, text: str):
    if field_name == "desired_analyses":
        return [v.strip() for v in text.split(",") if v.strip()]
    return [v.strip() for v in text.split(";") if v.strip()]


def parse_config(text: str) -> PipelineConfig:
    """Parse and check a pipeline config; raises :class:`ConfigError` or ``PipelineError``."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse pipeline config: {exc}") from None

    seed = 0
    numbered: dict[int, configparser.SectionProxy] = {}
    for name in parser.sections():
        if name == "pipeline":
            section = parser[name]
            unknown = set(section) - {"seed"}
            if unknown:
                raise ConfigError(f"unknown [pipeline] keys: {', '.join(sorted(unknown))}")
            if "seed" in section:
                try:
                    seed = int(section["seed"])
                except ValueError:
                    raise ConfigError(f"seed must be an integer, got {section['seed']!r}") from None
                if not 0 <= seed < 2**64:
                    raise ConfigError("seed must be an unsigned 64-bit integer")
            continue
        m = _STEP_RE.match(name)
        if not m:
            raise ConfigError(f"unexpected section [{name}]; expected [pipeline] or [step N]")
        numbered[int(m.group(1))] = parser[name]

    indices = sorted(numbered)
    if indices != list(range(1, len(indices) + 1)):
        raise ConfigError(f"steps must be numbered 1..n without gaps, got {indices}")

    steps = []
    for index in indices:
        section = numbered[index]
        if "op" not in section:
            raise ConfigError("missing 'op'", index)
        params, optionals = {}, {}
        for key, value in section.items():
            if key == "op":
                continue
            if key.startswith("meta."):
                field_name = key[len("meta."):]
                if field_name not in OPTIONAL_FIELDS:
                    raise ConfigError(f"unknown metadata field {field_name!r}", index)
                optionals[field_name] = _optional_value(field_name, value)
            else:
                params[key] = value
        step = PipelineStep(section["op"].strip(), params, optionals)
        prepare_step(step, index)
        steps.append(step)
    return PipelineConfig(seed, tuple(steps))
