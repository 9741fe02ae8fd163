"""Line-of-sight 60 GHz power model for a ceiling AP with a sectorized beam.

The AP steers one of ``n x n`` beams, each aimed at the centre of a floor
cell evaluated at the user's device height. Received power combines a
Gaussian transmit main lobe (with a sidelobe floor), an omnidirectional
receiver and Friis free-space loss.

All scalar helpers are thin wrappers over the vectorized
:func:`power_matrix`, which the simulation harness uses directly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import BoundsError, ConfigError, DomainError, FormatError

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_PER_HZ = -174.0
# 802.11ad channel width
CHANNEL_BANDWIDTH_HZ = 2.16e9


@dataclass(frozen=True, order=True)
class SectorId:
    """1-based (x, y) index of a beam sector in the floor grid.

    Ordering compares ``x`` first; use :meth:`Scenario.sector_index` when
    the (y, x) row-major order is needed.
    """

    x: int
    y: int

    def clamp(self, grid_n: int) -> "SectorId":
        return SectorId(min(max(self.x, 1), grid_n), min(max(self.y, 1), grid_n))

    def in_grid(self, grid_n: int) -> bool:
        return 1 <= self.x <= grid_n and 1 <= self.y <= grid_n

    def __str__(self) -> str:
        return f"({self.x},{self.y})"


@dataclass(frozen=True)
class PowerSample:
    position: tuple[float, float]
    sector: SectorId
    rx_power: float


def _triple(name, value):
    try:
        out = tuple(float(v) for v in value)
    except TypeError:
        raise ConfigError(f"{name} must be a sequence of 3 numbers") from None
    if len(out) != 3:
        raise ConfigError(f"{name} must have exactly 3 components, got {len(out)}")
    return out


@dataclass(frozen=True)
class Scenario:
    """Room geometry, RF parameters and tracking thresholds.

    Defaults reproduce the reference indoor setup: a 10 x 10 x 4 m room,
    AP in the middle of the ceiling, 60 GHz carrier, 30 deg HPBW, 10 dBm
    transmit power, 14 dBi peak TX gain and an omni 0 dBi receiver.

    ``p_dth`` is the *magnitude* of the relative power drop (dB) that
    triggers prediction; ``p_rth`` is the absolute floor (dBm) that
    forces a full re-beamforming.
    """

    room_dims: tuple[float, float, float] = (10.0, 10.0, 4.0)
    ap_position: tuple[float, float, float] = (5.0, 5.0, 4.0)
    eval_height: float = 1.5
    grid_resolution: int = 100
    sector_grid_n: int = 5
    carrier_freq: float = 60e9
    tx_power: float = 10.0
    tx_gain_max: float = 14.0
    rx_gain: float = 0.0
    hpbw: float = 30.0
    noise_figure: float = 10.0
    sidelobe_floor: float = 20.0
    p_dth: float = 3.0
    p_rth: float = -65.0
    # metadata only; the power model is polarization-agnostic
    polarization: str = field(default="left-hand circular", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "room_dims", _triple("room_dims", self.room_dims))
        object.__setattr__(self, "ap_position", _triple("ap_position", self.ap_position))
        for name in ("eval_height", "carrier_freq", "tx_power", "tx_gain_max", "rx_gain",
                     "hpbw", "noise_figure", "sidelobe_floor", "p_dth", "p_rth"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        for name in ("grid_resolution", "sector_grid_n"):
            value = getattr(self, name)
            if int(value) != value:
                raise ConfigError(f"{name} must be an integer")
            object.__setattr__(self, name, int(value))

        width, depth, height = self.room_dims
        if min(self.room_dims) <= 0 or not all(map(math.isfinite, self.room_dims)):
            raise ConfigError("room dimensions must be positive and finite")
        if self.carrier_freq <= 0:
            raise ConfigError("carrier_freq must be positive")
        if not 0 < self.eval_height < height:
            raise ConfigError("eval_height must lie strictly between floor and ceiling")
        ax, ay, az = self.ap_position
        if not (0 <= ax <= width and 0 <= ay <= depth and 0 <= az <= height):
            raise ConfigError("ap_position must lie inside the room")
        if az == self.eval_height:
            raise ConfigError("ap_position must not lie on the evaluation plane")
        if not 0 < self.hpbw < 180:
            raise ConfigError("hpbw must lie in (0, 180) degrees")
        if self.sector_grid_n < 1:
            raise ConfigError("sector_grid_n must be >= 1")
        if self.grid_resolution < self.sector_grid_n:
            raise ConfigError("grid_resolution must be >= sector_grid_n")
        if self.sidelobe_floor < 0:
            raise ConfigError("sidelobe_floor must be >= 0")
        if self.p_dth <= 0:
            raise ConfigError("p_dth is a drop magnitude and must be > 0")

    # -- sector bookkeeping -------------------------------------------------

    @property
    def n_sectors(self) -> int:
        return self.sector_grid_n ** 2

    def sectors(self) -> Iterator[SectorId]:
        """All sectors in row-major (y, then x) order."""
        n = self.sector_grid_n
        for y in range(1, n + 1):
            for x in range(1, n + 1):
                yield SectorId(x, y)

    def check_sector(self, sector: SectorId) -> None:
        if not sector.in_grid(self.sector_grid_n):
            raise BoundsError(f"sector {sector} outside {self.sector_grid_n}x{self.sector_grid_n} grid")

    def sector_index(self, sector: SectorId) -> int:
        self.check_sector(sector)
        return (sector.y - 1) * self.sector_grid_n + (sector.x - 1)

    def sector_at(self, index: int) -> SectorId:
        n = self.sector_grid_n
        if not 0 <= index < n * n:
            raise BoundsError(f"sector index {index} outside [0, {n * n})")
        return SectorId(index % n + 1, index // n + 1)

    def sector_center(self, sector: SectorId) -> tuple[float, float, float]:
        """Centre of the sector's floor cell, lifted to ``eval_height``."""
        self.check_sector(sector)
        cell_w = self.room_dims[0] / self.sector_grid_n
        cell_d = self.room_dims[1] / self.sector_grid_n
        return ((sector.x - 0.5) * cell_w, (sector.y - 0.5) * cell_d, self.eval_height)

    def cell_of(self, position) -> SectorId:
        """Sector whose floor cell contains ``position`` (upper edges inclusive)."""
        x, y = self._checked_position(position)
        n = self.sector_grid_n
        ix = min(int(x / self.room_dims[0] * n) + 1, n)
        iy = min(int(y / self.room_dims[1] * n) + 1, n)
        return SectorId(ix, iy)

    @property
    def noise_floor(self) -> float:
        """Thermal noise plus noise figure over the 2.16 GHz channel, dBm."""
        return THERMAL_NOISE_DBM_PER_HZ + 10 * math.log10(CHANNEL_BANDWIDTH_HZ) + self.noise_figure

    def eval_grid(self) -> np.ndarray:
        """Centres of the ``grid_resolution``-squared evaluation grid, shape (R*R, 2)."""
        r = self.grid_resolution
        xs = (np.arange(r) + 0.5) * self.room_dims[0] / r
        ys = (np.arange(r) + 0.5) * self.room_dims[1] / r
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])

    def contains(self, position) -> bool:
        x, y = position
        return 0 <= x <= self.room_dims[0] and 0 <= y <= self.room_dims[1]

    def _checked_position(self, position):
        x, y = (float(v) for v in position)
        if not (math.isfinite(x) and math.isfinite(y)) or not self.contains((x, y)):
            raise DomainError(f"position ({x}, {y}) outside the {self.room_dims[0]}x{self.room_dims[1]} m room")
        return x, y

    # -- config file --------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ", ".join(repr(v) for v in value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return asdict(self)


_TRIPLE_KEYS = {"room_dims", "ap_position"}
_INT_KEYS = {"grid_resolution", "sector_grid_n"}
_STR_KEYS = {"polarization"}


def parse_scenario(text: str, source=None) -> Scenario:
    """Parse ``key = value`` lines into a :class:`Scenario`.

    Blank lines and ``#`` comments are ignored; missing keys keep their
    defaults. Triples are comma separated.
    """
    known = {f.name for f in fields(Scenario)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError("expected 'key = value'", line=lineno, path=source)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise FormatError(f"unknown scenario key {key!r}", line=lineno, path=source)
        if key in values:
            raise FormatError(f"duplicate key {key!r}", line=lineno, path=source)
        try:
            if key in _TRIPLE_KEYS:
                values[key] = tuple(float(v) for v in value.split(","))
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _STR_KEYS:
                values[key] = value
            else:
                values[key] = float(value)
        except ValueError:
            raise FormatError(f"bad value for {key!r}: {value!r}", line=lineno, path=source) from None
    return Scenario(**values)


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), source=str(path))


# -- vectorized model --------------------------------------------------------


def boresights(scenario: Scenario) -> np.ndarray:
    """Unit boresight vectors for every sector, row-major (y, x), shape (n*n, 3)."""
    n = scenario.sector_grid_n
    cell_w = scenario.room_dims[0] / n
    cell_d = scenario.room_dims[1] / n
    iy, ix = np.divmod(np.arange(n * n), n)
    targets = np.column_stack([
        (ix + 0.5) * cell_w,
        (iy + 0.5) * cell_d,
        np.full(n * n, scenario.eval_height),
    ])
    vec = targets - np.asarray(scenario.ap_position)
    return vec / np.linalg.norm(vec, axis=1, keepdims=True)


def _gain_db(scenario: Scenario, theta) -> np.ndarray:
    lobe = scenario.tx_gain_max - 12.0 * (np.asarray(theta, dtype=float) / scenario.hpbw) ** 2
    return np.maximum(lobe, scenario.tx_gain_max - scenario.sidelobe_floor)


def _path_loss_db(scenario: Scenario, distance) -> np.ndarray:
    return 20.0 * np.log10(4.0 * np.pi * np.asarray(distance, dtype=float) * scenario.carrier_freq / SPEED_OF_LIGHT)


def power_matrix(scenario: Scenario, positions) -> np.ndarray:
    """Received power (dBm) for every position and every sector.

    Parameters
    ----------
    positions : array_like, shape (N, 2)
        Floor-plane user positions; the device sits at ``eval_height``.

    Returns
    -------
    ndarray, shape (N, n*n)
        Column ``j`` is sector ``scenario.sector_at(j)``.
    """
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise DomainError(f"positions must have shape (N, 2), got {pos.shape}")
    w, d, _ = scenario.room_dims
    bad = ~(np.isfinite(pos).all(axis=1)
            & (pos[:, 0] >= 0) & (pos[:, 0] <= w) & (pos[:, 1] >= 0) & (pos[:, 1] <= d))
    if bad.any():
        i = int(np.argmax(bad))
        raise DomainError(f"position {tuple(pos[i])} outside the {w}x{d} m room", step_index=i if len(pos) > 1 else None)

    rays = np.column_stack([pos, np.full(len(pos), scenario.eval_height)]) - np.asarray(scenario.ap_position)
    dist = np.linalg.norm(rays, axis=1)
    unit = rays / dist[:, None]
    bs = boresights(scenario)
    cos = unit @ bs.T
    sin = np.linalg.norm(np.cross(unit[:, None, :], bs[None, :, :]), axis=2)
    theta = np.degrees(np.arctan2(sin, cos))
    gain = _gain_db(scenario, theta)
    loss = _path_loss_db(scenario, dist)
    return scenario.tx_power + gain + scenario.rx_gain - loss[:, None]


def best_sector_indices(power: np.ndarray) -> np.ndarray:
    """Argmax over sectors; first maximum wins, which is the lowest (y, x)."""
    return np.argmax(power, axis=1)


# -- scalar operations -----------------------------------------------------


def sector_boresight(scenario: Scenario, sector: SectorId) -> np.ndarray:
    """Unit vector from the AP towards the sector's cell centre."""
    return boresights(scenario)[scenario.sector_index(sector)]


def tx_gain(scenario: Scenario, off_boresight_angle):
    """Transmit gain in dBi at ``off_boresight_angle`` degrees.

    Gaussian main lobe ``G_max - 12 (theta / HPBW)^2`` clamped at
    ``G_max - sidelobe_floor``. Accepts scalars or arrays.
    """
    theta = np.asarray(off_boresight_angle, dtype=float)
    if np.any(~np.isfinite(theta)) or np.any(theta < 0) or np.any(theta > 180):
        raise DomainError("off-boresight angle must lie in [0, 180] degrees")
    gain = _gain_db(scenario, theta)
    return float(gain) if gain.ndim == 0 else gain


def path_loss(scenario: Scenario, distance):
    """Friis free-space loss in dB at the scenario carrier frequency."""
    d = np.asarray(distance, dtype=float)
    if np.any(~np.isfinite(d)) or np.any(d <= 0):
        raise DomainError("distance must be positive and finite")
    loss = _path_loss_db(scenario, d)
    return float(loss) if loss.ndim == 0 else loss


def received_power(scenario: Scenario, position, sector: SectorId) -> float:
    index = scenario.sector_index(sector)
    x, y = scenario._checked_position(position)
    return float(power_matrix(scenario, [(x, y)])[0, index])


def best_sector(scenario: Scenario, position) -> SectorId:
    x, y = scenario._checked_position(position)
    row = power_matrix(scenario, [(x, y)])[0]
    return scenario.sector_at(int(np.argmax(row)))


def snr(scenario: Scenario, rx_power_dbm):
    """Signal-to-noise ratio in dB; informational only."""
    return np.asarray(rx_power_dbm, dtype=float) - scenario.noise_floor


def power_field(scenario: Scenario, sector: SectorId | None = None) -> list[PowerSample]:
    """Power over the evaluation grid, for one sector or the best sector per point."""
    grid = scenario.eval_grid()
    power = power_matrix(scenario, grid)
    if sector is None:
        idx = best_sector_indices(power)
    else:
        idx = np.full(len(grid), scenario.sector_index(sector))
    values = power[np.arange(len(grid)), idx]
    return [
        PowerSample((float(x), float(y)), scenario.sector_at(int(i)), float(p))
        for (x, y), i, p in zip(grid, idx, values)
    ]
