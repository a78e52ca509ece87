"""Plain-text run configuration: one ``key = value`` per line, ``#`` starts a comment."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields

from .domain import Grid, Params
from .errors import ParseError, ValidationError
from .timestepper import SCHEMES, StepControls

PRESETS = ("heat_mode", "taylor_green_like", "random_bandlimited", "snapshot")


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    nx: int = 32
    ny: int = 32
    nz: int = 32
    h: float = 1.0
    f0: float = 1.0
    eps: float = 1e-3
    cfl: float = 0.5
    dt_max: float = 1e-3
    dt_min: float = 1e-9
    t_end: float = 0.1
    seed: int = 0
    scheme: str = "cnab2"
    initial: str = "random_bandlimited"
    amplitude: float = 1.0
    kmax: int = 4
    decay: float = 2.0
    snapshot: str = ""
    cadence: int = 10
    monitor: bool = True
    out: str = "out"

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            n = getattr(self, name)
            if n < 4 or n % 2:
                raise ValidationError(name, "must be an even integer >= 4")
        checks = {
            "h": self.h > 0,
            "eps": self.eps >= 0,
            "cfl": 0 < self.cfl <= 1,
            "dt_max": self.dt_max > 0,
            "dt_min": 0 < self.dt_min < self.dt_max,
            "t_end": self.t_end > 0,
            "cadence": self.cadence >= 1,
            "kmax": self.kmax >= 1,
            "amplitude": self.amplitude >= 0,
            "scheme": self.scheme in SCHEMES,
            "initial": self.initial in PRESETS,
        }
        for name, ok in checks.items():
            if not ok:
                raise ValidationError(name, f"invalid value {getattr(self, name)!r}")
        if self.initial == "snapshot":
            if not self.snapshot:
                raise ValidationError("snapshot", "initial = snapshot needs a snapshot path")
            if not os.path.isfile(self.snapshot):
                raise ValidationError("snapshot", f"no such file {self.snapshot!r}")

    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.nz, self.h)

    def params(self) -> Params:
        return Params(self.h, self.f0, self.eps, self.cfl, self.dt_max, self.t_end, self.seed)

    def controls(self) -> StepControls:
        return StepControls(self.scheme, self.cfl, self.dt_max, self.dt_min)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {str(value).lower() if f.type == 'bool' else value}")
        return "\n".join(lines) + "\n"


_CONVERTERS = {"int": int, "float": float, "str": str, "bool": _parse_bool}


def parse_config(text: str) -> RunConfig:
    """Parse and validate; unknown or repeated keys are errors."""
    known = {f.name: _CONVERTERS[f.type] for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not value and known[key] is not str:
            raise ParseError(f"missing value for {key!r}", lineno)
        try:
            values[key] = known[key](value)
        except ValueError as err:
            raise ValidationError(key, str(err)) from None
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
