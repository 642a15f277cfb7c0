"""Analysis configuration shared by the library entry points and the CLI.

Config files are plain ``key = value`` lines; ``#`` starts a comment.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .engine import COEF_FLOOR, OrderGrid, diagonal_analysis
from .errors import InvalidGrid, ParseError
from .wavelet import KernelSpec, ScaleGrid, cwt


@dataclass(frozen=True)
class AnalysisConfig:
    order_max: float = 10.0
    order_step: float = 0.5
    diag_max: float = 10.0
    diag_step: float = 0.25
    scale_min: float = 4.0
    scale_max: float | None = None  # None -> n / 8
    scale_count: int = 30
    kernel_order: int = 2
    kernel_half_width: float = 8.0
    fit_min: float | None = None
    fit_max: float | None = None
    floor: float = COEF_FLOOR
    exclude_edges: bool = False
    seed: int | None = None

    def __post_init__(self):
        if self.order_max <= 0 or self.order_step <= 0 or self.diag_max <= 0 or self.diag_step <= 0:
            raise InvalidGrid("order bounds and steps must be positive")
        if self.scale_min <= 0 or self.scale_count < 1:
            raise InvalidGrid("scale bounds must be positive")
        if self.scale_max is not None and self.scale_max <= self.scale_min:
            raise InvalidGrid("scale_max must exceed scale_min")
        if self.fit_min is not None and self.fit_max is not None and self.fit_max <= self.fit_min:
            raise InvalidGrid("fit_max must exceed fit_min")
        if self.floor < 0:
            raise InvalidGrid("floor must be non-negative")
        KernelSpec(self.kernel_order, self.kernel_half_width)

    @property
    def kernel(self):
        return KernelSpec(self.kernel_order, self.kernel_half_width)

    @property
    def order_grid(self):
        return OrderGrid.uniform(self.order_max, self.order_step)

    @property
    def diag_orders(self):
        return self.diag_step * np.arange(int(round(self.diag_max / self.diag_step)) + 1)

    @property
    def scaling_range(self):
        if self.fit_min is None and self.fit_max is None:
            return None
        return (self.fit_min, self.fit_max)

    def scale_grid(self, n):
        s_max = n / 8 if self.scale_max is None else self.scale_max
        return ScaleGrid.logspaced(self.scale_min, s_max, self.scale_count)

    def transform(self, series):
        x = np.asarray(series, dtype=float)
        return cwt(x, self.scale_grid(x.size), self.kernel)

    def diagonal(self, x, y):
        return diagonal_analysis(
            self.transform(x), self.transform(y), self.diag_orders,
            self.scaling_range, self.exclude_edges, self.floor,
        )

    def width(self, x, y):
        return self.diagonal(x, y).width

    def to_dict(self):
        return asdict(self)

    def updated(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _coerce(name, raw, line):
    types = {f.name: f.type for f in fields(AnalysisConfig)}
    if name not in types:
        raise ParseError(f"unknown config key {name!r}", line)
    kind = types[name]
    text = raw.strip()
    if "None" in kind and text.lower() in ("", "none"):
        return None
    try:
        if kind.startswith("bool"):
            return _BOOL[text.lower()]
        if kind.startswith("int"):
            return int(text)
        return float(text)
    except (KeyError, ValueError):
        raise ParseError(f"bad value {raw!r} for {name}", line) from None


def parse_config_text(text):
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key = value, got {line!r}", lineno)
        key, raw = line.split("=", 1)
        key = key.strip()
        values[key] = _coerce(key, raw, lineno)
    return values


def load_config(path=None, **overrides):
    base = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            base = parse_config_text(fh.read())
    base.update({k: v for k, v in overrides.items() if v is not None})
    return AnalysisConfig(**base)


def format_config(cfg):
    lines = []
    for k, v in asdict(cfg).items():
        lines.append(f"{k} = {'none' if v is None else v}")
    return "\n".join(lines) + "\n"
