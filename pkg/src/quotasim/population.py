"""Synthetic worlds with two correlated binary attributes.

A population holds ``2n`` entities: ``n`` stars and ``n`` circles, ``n`` green
and ``n`` orange. The two attributes are tied together by the mixing fraction
``f``: only ``round(f*n)`` stars are orange and only ``round(f*n)`` circles are
green. True quality ``q`` is standard normal and independent of both
attributes; the perceived score subtracts a fixed penalty per indicator::

    q_hat = q - d_color * I_green - d_shape * I_star

Entities are laid out in fixed blocks (orange stars, green stars, orange
circles, green circles), so the attribute arrays are a pure function of
``(n, f)`` and the quality draws a pure function of ``(seed, n)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError


class Color(str, enum.Enum):
    GREEN = "green"
    ORANGE = "orange"


class Shape(str, enum.Enum):
    STAR = "star"
    CIRCLE = "circle"


# Group codes index this tuple: code = 2 * I(orange) + I(circle).
GROUPS: tuple[str, ...] = ("green_star", "green_circle", "orange_star", "orange_circle")

UINT64_MAX = 2**64 - 1


def group_code(is_green, is_star):
    """Vectorised group code for indicator arrays (or scalars)."""
    return 2 * (1 - np.asarray(is_green, dtype=np.int8)) + (1 - np.asarray(is_star, dtype=np.int8))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class BiasParams:
    d_color: float = 0.0
    d_shape: float = 0.0

    def __post_init__(self):
        for name in ("d_color", "d_shape"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigurationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Entity:
    id: int
    q: float
    color: Color
    shape: Shape

    @property
    def group(self) -> str:
        return group_of(self)


@dataclass(frozen=True)
class PopulationConfig:
    """Generative parameters of a synthetic world.

    ``f`` must lie in ``(0, 0.5]``; ``f = 0.5`` is the uncorrelated special
    case. ``round(f*n)`` (half up) must be strictly between 0 and ``n``.
    """

    n: int
    f: float
    bias: BiasParams = BiasParams()
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n <= 0:
            raise ConfigurationError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 < self.f <= 0.5):
            raise ConfigurationError(f"f must lie in (0, 0.5], got {self.f!r}")
        if not (0 <= int(self.seed) <= UINT64_MAX):
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        minority = round_half_up(self.f * self.n)
        if minority <= 0 or minority >= self.n:
            raise ConfigurationError(
                f"f*n rounds to {minority}; need 0 < round(f*n) < n (n={self.n}, f={self.f})"
            )

    @property
    def minority(self) -> int:
        """Count of orange stars, equal to the count of green circles."""
        return round_half_up(self.f * self.n)

    @property
    def n_total(self) -> int:
        return 2 * self.n

    def subgroup_counts(self) -> dict[str, int]:
        r = self.minority
        return {
            "green_star": self.n - r,
            "green_circle": r,
            "orange_star": r,
            "orange_circle": self.n - r,
        }


class Population:
    """Immutable synthetic population; arrays are read-only views."""

    def __init__(self, config: PopulationConfig, q: np.ndarray, is_green: np.ndarray, is_star: np.ndarray):
        self.config = config
        self.q = _frozen(np.asarray(q, dtype=np.float64))
        self.is_green = _frozen(np.asarray(is_green, dtype=bool))
        self.is_star = _frozen(np.asarray(is_star, dtype=bool))
        self.codes = _frozen(group_code(self.is_green, self.is_star))

    def __len__(self) -> int:
        return len(self.q)

    @property
    def n_total(self) -> int:
        return len(self.q)

    @cached_property
    def entities(self) -> list[Entity]:
        return [self[i] for i in range(len(self))]

    def __getitem__(self, i: int) -> Entity:
        return Entity(
            id=int(i),
            q=float(self.q[i]),
            color=Color.GREEN if self.is_green[i] else Color.ORANGE,
            shape=Shape.STAR if self.is_star[i] else Shape.CIRCLE,
        )

    def perceived(self, bias: BiasParams) -> np.ndarray:
        """Perceived scores of every entity under ``bias`` (never cached)."""
        return self.q - bias.d_color * self.is_green - bias.d_shape * self.is_star

    def group_sizes(self) -> dict[str, int]:
        counts = np.bincount(self.codes, minlength=4)
        return dict(zip(GROUPS, (int(c) for c in counts)))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def quality_stream(seed: int, size: int) -> np.ndarray:
    """Standard normal draws from PCG64 seeded with ``seed``."""
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    return rng.standard_normal(size)


def attribute_layout(n: int, minority: int) -> tuple[np.ndarray, np.ndarray]:
    """Indicator arrays for the fixed block order of a population."""
    r, rest = minority, n - minority
    is_green = np.concatenate([
        np.zeros(r, bool), np.ones(rest, bool), np.zeros(rest, bool), np.ones(r, bool),
    ])
    is_star = np.concatenate([np.ones(n, bool), np.zeros(n, bool)])
    return is_green, is_star


def generate_population(config: PopulationConfig) -> Population:
    is_green, is_star = attribute_layout(config.n, config.minority)
    q = quality_stream(config.seed, config.n_total)
    return Population(config, q, is_green, is_star)


def perceived_quality(entity: Entity, bias: BiasParams) -> float:
    i_color = 1.0 if entity.color == Color.GREEN else 0.0
    i_shape = 1.0 if entity.shape == Shape.STAR else 0.0
    return entity.q - bias.d_color * i_color - bias.d_shape * i_shape


def group_of(entity: Entity) -> str:
    return f"{Color(entity.color).value}_{Shape(entity.shape).value}"
