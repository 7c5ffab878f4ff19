"""Flat ``key = value`` scenario files.

Grammar: one ``key = value`` per line, UTF-8; blank lines and lines whose
first non-blank character is ``#`` are ignored; a ``#`` after a value starts
a trailing comment.  Keys are case-sensitive; unknown or repeated keys are
errors.  Lists are comma-separated.  ``auto`` selects the documented default
computed from other keys.  A JSON run report is accepted too: its ``config``
object is read back as if it were a scenario file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ReputationError
from .model import ModelParams


class ConfigError(Exception):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


def _float(s: str) -> float:
    return float(s)


def _int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        f = float(s)  # accepts 1e5
        if not math.isfinite(f) or f != int(f):
            raise
        return int(f)


def _bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(s)


def _float_list(s: str) -> tuple[float, ...]:
    s = s.strip()
    if s in ("", "[]"):
        return ()
    return tuple(float(x) for x in s.strip("[]").split(","))


def _int_list(s: str) -> tuple[int, ...]:
    return tuple(_int(x.strip()) for x in s.strip("[]").split(",") if x.strip())


def _auto(parse):
    def inner(s: str):
        return None if s.strip().lower() == "auto" else parse(s)
    return inner


def _choice(*options):
    def inner(s: str):
        if s not in options:
            raise ValueError(s)
        return s
    return inner


# key -> (parser, default text, help)
SCHEMA: dict[str, tuple] = {
    "theta": (_float, "0.8", "probability of positive subject behaviour"),
    "p": (_auto(_float), "auto", "probability of a direct observation (auto: 1 - pbar)"),
    "pbar": (_auto(_float), "0.2", "probability of an indirect report (ignored when p is set)"),
    "d": (_float, "0.4", "deviation-test threshold"),
    "omega": (_float, "1", "weight of an accepted indirect report"),
    "u": (_float, "0.99", "discount factor"),
    "R0": (_float, "0", "initial reputation"),
    "n_steps": (_int, "100000", "events per simulated path"),
    "seed": (_int, "1", "seed of the single-path commands"),
    "scaling_N": (_int, "1", "scaling index of the sped-up process"),
    "timestamps": (_bool, "false", "record Poisson event times"),
    "epsilon": (_float, "0.05", "occupancy neighbourhood half-width"),
    "burn_in": (_auto(_int), "auto", "discarded steps (auto: 20% of n_steps)"),
    "targets": (_auto(_float_list), "auto", "occupancy targets (auto: pi, theta)"),
    "n_runs": (_int, "100", "Monte Carlo runs"),
    "base_seed": (_int, "1", "Monte Carlo base seed"),
    "workers": (_int, "1", "Monte Carlo worker processes"),
    "per_run_csv": (_bool, "false", "write one trajectory CSV per Monte Carlo run"),
    "band_low": (_float, "0.75", "lower edge of the mean-reputation band"),
    "band_high": (_float, "0.85", "upper edge of the mean-reputation band"),
    "occupancy_threshold": (_float, "0.01", "occupancy cut for the per-target counts"),
    "sweep": (_choice("d", "pbar"), "d", "swept parameter"),
    "grid": (_auto(_float_list), "auto", "sweep grid (auto: 0.01..0.99 for d, 0..1 for pbar)"),
    "t_end": (_float, "2000", "ODE horizon"),
    "ode_samples": (_int, "2001", "sampled ODE points"),
    "overlay": (_bool, "true", "overlay a simulated path on the ODE plot"),
}

# Keys that only place files; never part of a scenario.
NON_ECHO = ("out",)
# Execution-only keys: parsed, but left out of the echo since they cannot change results.
EXECUTION_ONLY = ("workers",)


@dataclass(frozen=True)
class Scenario:
    values: dict
    lines: dict

    def __getitem__(self, key):
        return self.values[key]

    def params(self) -> ModelParams:
        v = self.values
        p = v["p"] if v["p"] is not None else 1.0 - v["pbar"]
        try:
            return ModelParams(v["theta"], p, v["d"], v["omega"], v["u"])
        except ReputationError as exc:
            field = getattr(exc, "field", None)
            key = "pbar" if field == "p" and self.values["p"] is None else field
            raise ConfigError(f"invalid value for key '{key}': {exc}", key, self.lines.get(key)) from None

    def fail(self, key: str, message: str) -> ConfigError:
        return ConfigError(f"invalid value for key '{key}': {message}", key, self.lines.get(key))


def parse_text(text: str) -> dict[str, tuple[str, int]]:
    """Raw ``{key: (value_text, line_number)}`` from a scenario document."""
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {line.strip()!r}", line=lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in raw:
            raise ConfigError(f"duplicate key '{key}' (first on line {raw[key][1]})", key, lineno)
        raw[key] = (value, lineno)
    return raw


def _json_value_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "auto"
    if isinstance(value, list):
        return ",".join(_json_value_text(x) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_document(path: str | Path) -> dict[str, tuple[str, int | None]]:
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON report: {exc.msg}", line=exc.lineno) from None
        cfg = doc.get("config") if isinstance(doc, dict) else None
        if not isinstance(cfg, dict):
            raise ConfigError("JSON document has no 'config' object")
        return {k: (_json_value_text(v), None) for k, v in cfg.items()}
    return parse_text(text)


def parse_overrides(items) -> dict[str, tuple[str, None]]:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        out[key] = (value, None)
    return out


def resolve(raw: dict[str, tuple[str, int | None]]) -> Scenario:
    """Type-check raw key/value text against the schema, filling defaults."""
    values = {}
    lines = {}
    for key, (text, lineno) in raw.items():
        if key in NON_ECHO:
            continue
        if key not in SCHEMA:
            raise ConfigError(f"unknown key '{key}'", key, lineno)
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(text)
        except (ValueError, OverflowError):
            raise ConfigError(f"invalid value for key '{key}': {text!r}", key, lineno) from None
        lines[key] = lineno
    for key, (parser, default, _) in SCHEMA.items():
        if key not in values:
            values[key] = parser(default)
    if "p" in raw and "pbar" in raw and values["p"] is not None and values["pbar"] is not None:
        raise ConfigError("set either 'p' or 'pbar', not both", "p", lines.get("p"))
    return Scenario(values, lines)


def load(path=None, overrides=None) -> Scenario:
    raw = dict(read_document(path)) if path is not None else {}
    over = parse_overrides(overrides)
    if "p" in over and "pbar" in raw:
        del raw["pbar"]
    if "pbar" in over and "p" in raw:
        del raw["p"]
    raw.update(over)
    return resolve(raw)
