"""Run configuration: an INI-style file of ``[section]`` headers and ``key = value`` lines.

Numbers may be written as decimals or as rationals ``a/b``; vectors are comma
separated and lists of vectors are separated by ``;``.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError

# section -> key -> (kind, default); default None means optional with no value
SCHEMA = {
    "pair": {"p": ("ints", None), "s": ("rationals", None), "offsets": ("vectors", None)},
    "run": {"seed": ("int", 0), "threads": ("int", 1)},
    "approximate": {"level": ("int", 6), "budget": ("int", 2_000_000), "exact": ("bool", False)},
    "iterate": {"depth": ("int", 3), "grid": ("int", 11), "eps": ("rational", None), "u": ("vectors", None)},
    "verify": {
        "checks": ("names", ("injectivity", "height", "convergence")),
        "depth": ("int", 4),
        "pairs": ("int", 100_000),
        "delta": ("float", 1e-3),
        "height_depth": ("int", 14),
        "samples": ("int", 1000),
        "stabilize_by": ("int", 12),
        "level": ("int", 6),
        "grid": ("int", 46),
        "tolerance": ("float", 0.1),
    },
    "raster": {"width": ("int", 512), "height": ("int", None)},
}
CHECKS = ("injectivity", "height", "convergence")


def _parse(kind: str, raw: str):
    raw = raw.strip()
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(Fraction(raw))
    if kind == "rational":
        return Fraction(raw)
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "ints":
        return tuple(int(v) for v in raw.split(","))
    if kind == "rationals":
        return tuple(Fraction(v.strip()) for v in raw.split(",")) if raw else ()
    if kind == "vectors":
        return tuple(tuple(Fraction(v.strip()) for v in row.split(",")) for row in raw.split(";"))
    if kind == "names":
        return tuple(v.strip() for v in raw.split(",") if v.strip())
    raise AssertionError(kind)


def _render(v) -> str:
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return "; ".join(_render(r) for r in v)
        return ",".join(_render(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _line_of(text: str, section: str, key: str):
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip().lower()
            if current == section and not key:
                return n
        elif key and current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line, re.I):
            return n
    return None


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def echo(self) -> list[str]:
        """``section.key=value`` lines for every set value, in schema order."""
        out = []
        for section, keys in SCHEMA.items():
            for key in keys:
                v = self.values[section][key]
                if v is not None:
                    out.append(f"{section}.{key}={_render(v)}")
        return out


def load_config(text: str = "", overrides=()) -> RunConfig:
    """Parse config text, then apply ``section.key=value`` overrides."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str.lower
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], line) from None
    raw = {sec: dict(parser[sec]) for sec in parser.sections()}
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().lower().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        raw.setdefault(section, {})[name] = value

    values = {sec: {k: default for k, (_, default) in keys.items()} for sec, keys in SCHEMA.items()}
    for section, entries in raw.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", _line_of(text, section, ""))
        for key, value in entries.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}", _line_of(text, section, key))
            kind = SCHEMA[section][key][0]
            try:
                values[section][key] = _parse(kind, value)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"bad value for {section}.{key}: {exc}", _line_of(text, section, key)) from None
    for name in values["verify"]["checks"]:
        if name not in CHECKS:
            raise ConfigError(f"unknown check {name!r}; expected one of {', '.join(CHECKS)}",
                              _line_of(text, "verify", "checks"))
    return RunConfig(values)
