"""Homogeneous Poisson point processes on cubical windows.

Points carry stable integer ids, uniform birth times and positions.  An
experiment samples once on its largest window; every smaller window is
obtained through :func:`restrict`, which preserves ids and birth times so
that graphs built on nested windows are coupled realizations of the same
process.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

# Reserved id for the inserted origin point; never produced by sampling.
ORIGIN_ID = 2**62


class PointProcessError(ValueError):
    """Raised on invalid windows, intensities or restriction requests."""


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Window:
    """Axis-aligned half-open cube ``prod_i [corner_i, corner_i + side)``."""

    corner: np.ndarray
    side: float

    def __post_init__(self):
        corner = _as_readonly(np.asarray(self.corner, dtype=float))
        if corner.ndim != 1 or corner.size == 0:
            raise PointProcessError("window corner must be a 1-d vector")
        if not np.isfinite(corner).all():
            raise PointProcessError("window corner must be finite")
        side = float(self.side)
        if not (side > 0.0) or not np.isfinite(side):
            raise PointProcessError(f"window side must be positive, got {self.side}")
        object.__setattr__(self, "corner", corner)
        object.__setattr__(self, "side", side)

    @property
    def dim(self) -> int:
        return self.corner.size

    def volume(self) -> float:
        return self.side ** self.dim

    def contains(self, positions: np.ndarray) -> np.ndarray:
        """Half-open membership mask for an ``(n, d)`` position array."""
        pos = np.atleast_2d(np.asarray(positions, dtype=float))
        if pos.shape[1] != self.dim:
            raise PointProcessError("position dimension mismatch")
        lo = self.corner
        hi = self.corner + self.side
        return np.all((pos >= lo) & (pos < hi), axis=1)

    def contains_window(self, sub: "Window") -> bool:
        if sub.dim != self.dim:
            return False
        eps = 1e-12 * max(1.0, self.side)
        return bool(
            np.all(sub.corner >= self.corner - eps)
            and np.all(sub.corner + sub.side <= self.corner + self.side + eps)
        )


def centered_cube(dim: int, volume: float) -> Window:
    """Cube of the given volume centered at the origin."""
    if volume <= 0:
        raise PointProcessError("volume must be positive")
    side = float(volume) ** (1.0 / dim)
    return Window(corner=np.full(dim, -side / 2.0), side=side)


def nested_windows(dim: int, volumes: list[float]) -> list[Window]:
    """Centered cubes with the given strictly increasing volumes, each nested in the next."""
    if len(volumes) == 0:
        raise PointProcessError("need at least one volume")
    vols = [float(v) for v in volumes]
    if any(b <= a for a, b in zip(vols, vols[1:])):
        raise PointProcessError("volumes must be strictly increasing")
    return [centered_cube(dim, v) for v in vols]


@dataclass(frozen=True)
class PointRecord:
    """One point of a configuration."""

    id: int
    position: np.ndarray
    birth_time: float
    is_origin: bool = False


@dataclass(frozen=True)
class Configuration:
    """Finite point set with stable ids, stored columnar.

    ``ids`` are assigned in generation order within the window they were
    sampled on and are never reused; edge randomness downstream is keyed on
    them, which is what makes restriction a coupling.
    """

    ids: np.ndarray          # (n,) int64
    positions: np.ndarray    # (n, d) float64
    birth_times: np.ndarray  # (n,) float64 in [0, 1]
    is_origin: np.ndarray    # (n,) bool
    window: Window
    intensity: float
    seed: int | None = None

    def __post_init__(self):
        ids = _as_readonly(np.asarray(self.ids, dtype=np.int64))
        pos = np.asarray(self.positions, dtype=float)
        pos = pos.reshape(0, self.window.dim) if pos.size == 0 else pos.reshape(ids.size, -1)
        pos = _as_readonly(pos)
        bt = _as_readonly(np.asarray(self.birth_times, dtype=float))
        org = _as_readonly(np.asarray(self.is_origin, dtype=bool))
        if not (ids.size == pos.shape[0] == bt.size == org.size):
            raise PointProcessError("configuration column lengths differ")
        if ids.size and len(np.unique(ids)) != ids.size:
            raise PointProcessError("point ids must be unique")
        if ids.size and not self.window.contains(pos).all():
            raise PointProcessError("all points must lie in the window")
        if self.intensity <= 0:
            raise PointProcessError("intensity must be positive")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "birth_times", bt)
        object.__setattr__(self, "is_origin", org)

    @property
    def n_points(self) -> int:
        return int(self.ids.size)

    @property
    def dim(self) -> int:
        return self.window.dim

    def index_of(self, point_id: int) -> int:
        idx = np.flatnonzero(self.ids == point_id)
        if idx.size != 1:
            raise KeyError(f"no point with id {point_id}")
        return int(idx[0])

    def records(self) -> list[PointRecord]:
        return [
            PointRecord(int(i), self.positions[k].copy(), float(self.birth_times[k]),
                        bool(self.is_origin[k]))
            for k, i in enumerate(self.ids)
        ]

    def has_origin(self) -> bool:
        return bool(self.is_origin.any())


def sample_poisson(window: Window, intensity: float, seed: int) -> Configuration:
    """Sample a homogeneous Poisson point process on ``window``.

    The point count is Poisson(intensity * volume), positions are i.i.d.
    uniform on the window and birth times i.i.d. uniform on [0, 1].  Fully
    deterministic given ``seed``.  Birth-time collisions (a measure-zero
    event that floating point can nevertheless produce) are re-drawn.
    """
    if intensity <= 0:
        raise PointProcessError(f"intensity must be positive, got {intensity}")
    rng = np.random.default_rng(seed)
    n = int(rng.poisson(intensity * window.volume()))
    positions = window.corner + window.side * rng.random((n, window.dim))
    birth = rng.random(n)
    while n > 1 and len(np.unique(birth)) != n:
        dup = np.ones(n, dtype=bool)
        dup[np.unique(birth, return_index=True)[1]] = False
        birth[dup] = rng.random(int(dup.sum()))
    return Configuration(
        ids=np.arange(n, dtype=np.int64),
        positions=positions,
        birth_times=birth,
        is_origin=np.zeros(n, dtype=bool),
        window=window,
        intensity=float(intensity),
        seed=int(seed),
    )


def restrict(config: Configuration, sub: Window) -> Configuration:
    """Points of ``config`` lying in ``sub``; ids and birth times preserved."""
    if not config.window.contains_window(sub):
        raise PointProcessError("sub-window is not contained in the configuration window")
    keep = sub.contains(config.positions) if config.n_points else np.zeros(0, dtype=bool)
    return Configuration(
        ids=config.ids[keep],
        positions=config.positions[keep],
        birth_times=config.birth_times[keep],
        is_origin=config.is_origin[keep],
        window=sub,
        intensity=config.intensity,
        seed=config.seed,
    )


def add_origin(config: Configuration) -> Configuration:
    """Append the origin point (position 0, birth time 1, reserved id)."""
    if config.has_origin():
        raise PointProcessError("configuration already contains an origin point")
    if not config.window.contains(np.zeros((1, config.dim)))[0]:
        raise PointProcessError("window does not contain the origin")
    return replace(
        config,
        ids=np.concatenate([config.ids, [ORIGIN_ID]]),
        positions=np.vstack([config.positions, np.zeros((1, config.dim))]),
        birth_times=np.concatenate([config.birth_times, [1.0]]),
        is_origin=np.concatenate([config.is_origin, [True]]),
    )


# --- columnar CSV serialization (id, x_1..x_d, birth_time, is_origin) ----

def configuration_to_csv(config: Configuration) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["id"] + [f"x_{i + 1}" for i in range(config.dim)] + ["birth_time", "is_origin"]
    )
    for k in range(config.n_points):
        writer.writerow(
            [int(config.ids[k])]
            + [repr(float(v)) for v in config.positions[k]]
            + [repr(float(config.birth_times[k])), int(config.is_origin[k])]
        )
    return buf.getvalue()


def configuration_from_csv(text: str, window: Window, intensity: float,
                           seed: int | None = None) -> Configuration:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    d = len(header) - 3
    if d != window.dim:
        raise PointProcessError("CSV dimension does not match window")
    ids = np.array([int(r[0]) for r in body], dtype=np.int64)
    pos = np.array([[float(v) for v in r[1:1 + d]] for r in body], dtype=float)
    birth = np.array([float(r[1 + d]) for r in body], dtype=float)
    origin = np.array([bool(int(r[2 + d])) for r in body], dtype=bool)
    return Configuration(ids=ids, positions=pos.reshape(len(body), d), birth_times=birth,
                         is_origin=origin, window=window, intensity=intensity, seed=seed)
