"""Sweep configuration: parsing, defaults and the canonical text form embedded in CSV headers."""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, RangeError
from .model import Regime, SystemParams

QUANTITIES = ("fisher", "qfi", "spectrum", "current")

# Config key -> SystemParams field.
PARAM_KEYS = {
    "omega0": "omega0",
    "thop": "t_hop",
    "g": "g",
    "kappa_ph": "kappa_ph",
    "eta": "eta",
    "sites": "n_sites",
}
AXIS_NAMES = tuple(PARAM_KEYS) + ("phi", "s")

DEFAULT_PARAMS = {
    "omega0": 1.0,
    "thop": 1.0,
    "g": 0.88,
    "kappa_ph": 0.1,
    "eta": 2.41,
    "sites": 400,
}


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple
    spec: str

    @classmethod
    def range(cls, name: str, lo: float, hi: float, count: int, spacing: str = "linear") -> "Axis":
        return cls.parse(f"{name}:{_fmt(lo)}:{_fmt(hi)}:{int(count)}:{spacing}")

    @classmethod
    def explicit(cls, name: str, values) -> "Axis":
        return cls.parse(f"{name}=" + ",".join(_fmt(v) for v in values))

    @classmethod
    def parse(cls, text: str) -> "Axis":
        text = text.strip()
        try:
            if "=" in text:
                name, rest = (t.strip() for t in text.split("=", 1))
                raw = [float(v) for v in rest.split(",") if v.strip()]
                if not raw:
                    raise ConfigError(f"axis {name!r} has no values")
                spec = f"{name}=" + ",".join(_fmt(v) for v in raw)
            else:
                parts = [t.strip() for t in text.split(":")]
                if len(parts) not in (4, 5):
                    raise ConfigError(f"axis {text!r}: expected name:min:max:count[:linear|log]")
                name = parts[0]
                lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
                spacing = parts[4] if len(parts) == 5 else "linear"
                if count < 2:
                    raise ConfigError(f"axis {name!r}: count must be >= 2")
                if spacing == "linear":
                    raw = np.linspace(lo, hi, count).tolist()
                elif spacing == "log":
                    if lo <= 0 or hi <= 0:
                        raise ConfigError(f"axis {name!r}: log spacing needs positive bounds")
                    raw = np.geomspace(lo, hi, count).tolist()
                else:
                    raise ConfigError(f"axis {name!r}: unknown spacing {spacing!r}")
                spec = f"{name}:{_fmt(lo)}:{_fmt(hi)}:{count}:{spacing}"
        except ValueError as exc:
            raise ConfigError(f"cannot parse axis {text!r}: {exc}") from None
        if name not in AXIS_NAMES:
            raise ConfigError(f"unknown axis {name!r}; choose from {', '.join(AXIS_NAMES)}")
        if name == "sites":
            values = tuple(_even_int(v) for v in raw)
        else:
            values = tuple(float(v) for v in raw)
        return cls(name=name, values=values, spec=spec)


def _even_int(v: float) -> int:
    n = int(round(v / 2.0)) * 2
    return max(n, 2)


def parse_phi_list(text: str) -> tuple[float, ...]:
    """Comma list of phases; entries may be numbers or multiples like 0.25pi."""
    out = []
    for item in text.split(","):
        item = item.strip().lower()
        if not item:
            continue
        try:
            if item.endswith("pi"):
                coef = item[:-2].rstrip("*") or "1"
                out.append(float(coef) * math.pi)
            else:
                out.append(float(item))
        except ValueError:
            raise ConfigError(f"cannot parse phase {item!r}") from None
    if not out:
        raise ConfigError("empty phase list")
    return tuple(out)


@dataclass(frozen=True)
class SweepConfig:
    quantity: str = "fisher"
    regime: Regime = Regime.LOSSLESS
    params: dict = field(default_factory=lambda: dict(DEFAULT_PARAMS))
    axes: tuple = ()
    phi: tuple = (0.0,)
    nmax: int | None = None
    oracle: bool = False
    # Run-time options; not part of the reproducibility header.
    name: str = "sweep"
    out: str = "."
    svg: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ConfigError(f"unknown quantity {self.quantity!r}")
        object.__setattr__(self, "regime", Regime.parse(self.regime))
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate axis names {names}")
        if self.quantity == "spectrum" and "s" not in names:
            raise ConfigError("the spectrum quantity needs an 's' axis")
        if self.quantity != "spectrum" and "s" in names:
            raise ConfigError("the 's' axis only applies to the spectrum quantity")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.nmax is not None and self.nmax < 4:
            raise ConfigError(f"nmax must be >= 4, got {self.nmax}")

    def with_(self, **changes) -> "SweepConfig":
        return replace(self, **changes)

    @property
    def grid_axes(self) -> tuple:
        """Axes actually iterated, the phase list appended for the fisher quantity."""
        axes = list(self.axes)
        if self.quantity == "fisher" and "phi" not in [a.name for a in axes]:
            axes.append(Axis.explicit("phi", self.phi))
        return tuple(axes)

    def system_params(self, overrides: dict | None = None) -> SystemParams:
        merged = dict(self.params)
        if overrides:
            merged.update(overrides)
        kwargs = {}
        for key, fname in PARAM_KEYS.items():
            if key in merged and merged[key] is not None:
                kwargs[fname] = merged[key]
        kwargs["n_sites"] = int(kwargs.get("n_sites", 400))
        try:
            return SystemParams(**kwargs)
        except RangeError as exc:
            raise ConfigError(str(exc)) from exc

    def header_lines(self) -> list[str]:
        lines = ["[sweep]"]
        lines.append(f"quantity = {self.quantity}")
        lines.append(f"regime = {self.regime.value}")
        lines.append("axes = " + "; ".join(a.spec for a in self.axes))
        lines.append("phi = " + ", ".join(_fmt(v) for v in self.phi))
        lines.append(f"nmax = {'auto' if self.nmax is None else self.nmax}")
        lines.append(f"oracle = {'true' if self.oracle else 'false'}")
        lines.append("[params]")
        for key in PARAM_KEYS:
            v = self.params.get(key)
            if v is None:
                continue
            lines.append(f"{key} = {int(v) if key == 'sites' else _fmt(v)}")
        return lines


_BOOL = {"true": True, "yes": True, "on": True, "1": True, "false": False, "no": False, "off": False, "0": False}


def read_config_text(path: str) -> str:
    """Config text from a config file or from the header of a CSV written by a sweep."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    if any(ln.startswith("# [") for ln in raw):
        # A CSV written by a sweep: only the comment header carries configuration.
        return "\n".join(ln[1:].strip() for ln in raw if ln.startswith("#"))
    return "\n".join(raw)


def apply_config_text(base: SweepConfig, text: str, *, sweep_keys: bool = True) -> SweepConfig:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    known = {"sweep", "params", "provenance"}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown config section [{section}]")

    cfg = base
    if parser.has_section("params"):
        params = dict(cfg.params)
        phi = cfg.phi
        for key, value in parser.items("params"):
            k = key.replace("-", "_")
            if k == "phi":
                phi = parse_phi_list(value)
            elif k in PARAM_KEYS:
                params[k] = _parse_number(k, value)
            else:
                raise ConfigError(f"unknown parameter {key!r}")
        cfg = cfg.with_(params=params, phi=phi)

    if parser.has_section("sweep"):
        updates = {}
        for key, value in parser.items("sweep"):
            value = value.strip()
            if key == "phi":
                updates["phi"] = parse_phi_list(value)
            elif key == "nmax":
                updates["nmax"] = None if value in ("", "auto") else _parse_int(key, value)
            elif key == "oracle":
                updates["oracle"] = _parse_bool(key, value)
            elif key == "svg":
                updates["svg"] = _parse_bool(key, value)
            elif key == "jobs":
                updates["jobs"] = _parse_int(key, value)
            elif key == "out":
                updates["out"] = value
            elif key == "name":
                updates["name"] = value
            elif key in ("quantity", "regime", "axes"):
                if not sweep_keys:
                    continue
                if key == "axes":
                    updates["axes"] = tuple(Axis.parse(t) for t in value.split(";") if t.strip())
                elif key == "regime":
                    try:
                        updates["regime"] = Regime.parse(value)
                    except RangeError as exc:
                        raise ConfigError(str(exc)) from None
                else:
                    updates["quantity"] = value
            else:
                raise ConfigError(f"unknown sweep option {key!r}")
        cfg = cfg.with_(**updates)
    return cfg


def _parse_number(key: str, value: str):
    try:
        return int(value) if key == "sites" else float(value)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {value!r}") from None


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {value!r}") from None


def _parse_bool(key: str, value: str) -> bool:
    try:
        return _BOOL[value.lower()]
    except KeyError:
        raise ConfigError(f"{key}: not a boolean: {value!r}") from None
