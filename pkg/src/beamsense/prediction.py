"""Next-sector predictors for the AP beam.

Sector coordinates follow the floor grid: ``x`` grows east, ``y`` grows
north. Device azimuth is a compass bearing, 0 pointing to +y and
increasing clockwise towards +x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .propagation import Scenario, SectorId, received_power

TWO_PI = 2.0 * math.pi


class PredictorKind(Enum):
    NONE = "none"
    SIMPLE = "simple"
    SENSOR = "sensor"

    @classmethod
    def from_name(cls, name: str) -> "PredictorKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = "|".join(k.value for k in cls)
            raise ValueError(f"unknown predictor {name!r}, expected one of {choices}") from None


def wrap_angle(phi: float) -> float:
    """Wrap an angle into ``[0, 2*pi)``."""
    out = math.fmod(phi, TWO_PI)
    if out < 0:
        out += TWO_PI
    return 0.0 if out >= TWO_PI else out


@dataclass(frozen=True)
class PredictionContext:
    current: SectorId
    previous: SectorId | None = None
    azimuth: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.azimuth):
            raise ValueError("azimuth must be finite")
        object.__setattr__(self, "azimuth", wrap_angle(float(self.azimuth)))


def sgn(v: float) -> int:
    return (v > 0) - (v < 0)


def nint(v: float) -> int:
    """Nearest integer, halves rounded away from zero."""
    return int(math.copysign(math.floor(abs(v) + 0.5), v))


def predict_simple(ctx: PredictionContext, grid_n: int) -> SectorId:
    """Extrapolate the last sector change by one cell."""
    cur = ctx.current
    prev = ctx.previous if ctx.previous is not None else cur
    nxt = SectorId(cur.x + sgn(cur.x - prev.x), cur.y + sgn(cur.y - prev.y))
    return nxt.clamp(grid_n)


def predict_sensor(ctx: PredictionContext, grid_n: int) -> SectorId:
    """Step one cell along the device heading.

    sin/cos are snapped to 12 decimals so that headings such as pi/6 land
    on the exact half and round deterministically regardless of how the
    angle was wrapped.
    """
    east = round(math.sin(ctx.azimuth), 12)
    north = round(math.cos(ctx.azimuth), 12)
    cur = ctx.current
    return SectorId(cur.x + nint(east), cur.y + nint(north)).clamp(grid_n)


def predict(kind: PredictorKind, ctx: PredictionContext, grid_n: int) -> SectorId | None:
    """Dispatch on ``kind``; ``None`` means "no prediction, search the beam"."""
    if kind is PredictorKind.NONE:
        return None
    if kind is PredictorKind.SIMPLE:
        return predict_simple(ctx, grid_n)
    if kind is PredictorKind.SENSOR:
        return predict_sensor(ctx, grid_n)
    raise ValueError(f"unsupported predictor {kind!r}")


def validate_pair(scenario: Scenario, position, candidate: SectorId, current_power: float) -> bool:
    """Beam-pair test: does ``candidate`` beat the power currently received?"""
    return received_power(scenario, position, candidate) > current_power
