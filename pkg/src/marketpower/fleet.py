"""Seeded synthetic fleets and the demand, weather and price series that go with them.

Real plant registers and weather data are not shipped. These generators build a
fleet whose per-GenCo capacities and plant counts hit configured targets, plus
eight representative days of hourly demand and renewable availability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from marketpower.market import Fuel, GenCo, PowerPlant

HOURS_PER_DAY = 24
N_REPRESENTATIVE_DAYS = 8
STEPS_PER_YEAR = HOURS_PER_DAY * N_REPRESENTATIVE_DAYS
N_SEGMENTS = 20

# tCO2 per MWh of fuel burned
EMISSION_FACTORS = {"gas": 0.184, "coal": 0.341, "other": 0.04}


@dataclass(frozen=True)
class Technology:
    efficiency: tuple[float, float]
    om: tuple[float, float]
    availability: float
    unit_mw: float  # median unit size


TECHNOLOGIES = {
    "gas": Technology((0.49, 0.58), (2.0, 4.0), 0.90, 500.0),
    "coal": Technology((0.33, 0.40), (3.0, 5.0), 0.85, 1000.0),
    "nuclear": Technology((0.33, 0.36), (5.0, 8.0), 0.85, 1100.0),
    "wind": Technology((1.0, 1.0), (0.0, 2.0), 1.00, 80.0),
    "solar": Technology((1.0, 1.0), (0.0, 1.0), 1.00, 20.0),
    "hydro": Technology((1.0, 1.0), (2.0, 4.0), 0.50, 60.0),
    "other": Technology((0.30, 0.38), (3.0, 6.0), 0.85, 200.0),
}


class InfeasibleFleetError(ValueError):
    pass


@dataclass(frozen=True)
class GencoTarget:
    id: str
    name: str
    capacity_mw: float
    n_plants: int
    mix: dict = field(default_factory=dict)  # fuel -> weight


def _allocate_counts(n: int, mix: dict) -> list[str]:
    """Largest-remainder split of ``n`` plants over fuels, in a stable fuel order."""
    fuels = sorted(mix)
    total = sum(mix[f] for f in fuels)
    quotas = [n * mix[f] / total for f in fuels]
    counts = [int(math.floor(q)) for q in quotas]
    order = sorted(range(len(fuels)), key=lambda i: (-(quotas[i] - counts[i]), fuels[i]))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return [f for f, c in zip(fuels, counts) for _ in range(c)]


def _split_capacity(target: float, weights: np.ndarray, max_unit_mw: float) -> np.ndarray:
    """Scale ``weights`` to sum to ``target`` with no unit above ``max_unit_mw``."""
    sizes = np.zeros(len(weights))
    free = np.ones(len(weights), dtype=bool)
    remaining = target
    while True:
        share = weights * free
        sizes = np.where(free, remaining * share / share.sum(), sizes)
        over = free & (sizes > max_unit_mw)
        if not over.any():
            return sizes
        sizes[over] = max_unit_mw
        free &= ~over
        remaining = target - sizes[~free].sum()


def generate_synthetic_fleet(targets, seed: int, max_unit_mw: float = 4000.0):
    """Build plants and GenCos hitting each target's capacity and plant count.

    Fuels are assigned by a largest-remainder split of the target's mix; unit
    sizes scatter log-normally around technology-typical sizes and are scaled so
    every GenCo total matches its target to 0.1 MW.
    """
    rng = np.random.default_rng(seed)
    plants, gencos = [], []
    for t in targets:
        if t.capacity_mw <= 0 or t.n_plants <= 0:
            raise InfeasibleFleetError(f"{t.name}: capacity and plant count must be positive")
        if t.n_plants * max_unit_mw < t.capacity_mw:
            raise InfeasibleFleetError(
                f"{t.name}: {t.n_plants} plants x {max_unit_mw} MW cannot reach {t.capacity_mw} MW"
            )
        fuels = _allocate_counts(t.n_plants, t.mix or {"gas": 1.0})
        fuels = [fuels[i] for i in rng.permutation(len(fuels))]
        weights = np.array([TECHNOLOGIES[f].unit_mw for f in fuels]) * rng.lognormal(0.0, 0.4, len(fuels))
        sizes = np.round(_split_capacity(t.capacity_mw, weights, max_unit_mw), 1)
        # push the rounding residual onto the largest unit that can take it
        residual = round(t.capacity_mw - sizes.sum(), 1)
        k = int(np.argmax(sizes))
        sizes[k] = round(sizes[k] + residual, 1)

        ids = []
        for j, (fuel, size) in enumerate(zip(fuels, sizes)):
            tech = TECHNOLOGIES[fuel]
            eff = round(float(rng.uniform(*tech.efficiency)), 3)
            om = round(float(rng.uniform(*tech.om)), 2)
            ci = round(EMISSION_FACTORS.get(fuel, 0.0) / eff, 4)
            pid = f"{t.id}-{j:03d}"
            plants.append(PowerPlant(pid, t.id, Fuel(fuel), float(size), eff, ci, om, tech.availability))
            ids.append(pid)
        gencos.append(GenCo(t.id, t.name, tuple(ids)))
    return plants, gencos


# representative days: (label, demand level relative to the annual mean, wind level, solar level)
REPRESENTATIVE_DAYS = (
    ("winter-peak", 1.10, 0.30, 0.10),
    ("winter-weekday", 1.06, 0.55, 0.15),
    ("winter-weekend", 1.00, 0.45, 0.15),
    ("spring", 0.98, 0.40, 0.45),
    ("summer-weekday", 0.94, 0.25, 0.80),
    ("summer-weekend", 0.90, 0.30, 0.75),
    ("autumn", 1.01, 0.50, 0.35),
    ("autumn-still", 1.01, 0.12, 0.30),
)


def _daily_shape() -> np.ndarray:
    """Normalised hourly load shape: night trough, mild morning rise, flat-topped evening peak."""
    h = np.arange(HOURS_PER_DAY)
    shape = (0.85
             + 0.06 * np.exp(-0.5 * ((h - 10.0) / 3.0) ** 2)
             + 0.67 * np.exp(-(((h - 18.0) / 2.2) ** 4))
             - 0.08 * np.exp(-0.5 * ((h - 4.0) / 2.0) ** 2))
    return shape / shape.mean()


def demand_profile(mean_mw: float, seed: int) -> np.ndarray:
    """192 hourly demands averaging ``mean_mw``."""
    rng = np.random.default_rng(seed)
    shape = _daily_shape()
    days = [level * shape * (1 + 0.02 * rng.standard_normal(HOURS_PER_DAY))
            for _, level, _, _ in REPRESENTATIVE_DAYS]
    series = np.concatenate(days)
    return np.round(series / series.mean() * mean_mw, 1)


def wind_profile(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = []
    for _, _, level, _ in REPRESENTATIVE_DAYS:
        walk = np.cumsum(rng.normal(0.0, 0.04, HOURS_PER_DAY))
        out.append(np.clip(level + walk - walk.mean(), 0.02, 0.95))
    return np.round(np.concatenate(out), 4)


def solar_profile() -> np.ndarray:
    h = np.arange(HOURS_PER_DAY)
    bell = np.clip(np.sin(np.pi * (h - 5.0) / 14.0), 0.0, None)
    return np.round(np.concatenate([level * bell for _, _, _, level in REPRESENTATIVE_DAYS]), 4)


def seasonal_series(mean: float, seed: int, swing: float = 0.10, noise: float = 0.02) -> np.ndarray:
    """Constant mean with a sinusoidal swing across the days plus hourly noise."""
    rng = np.random.default_rng(seed)
    day = np.repeat(np.arange(N_REPRESENTATIVE_DAYS), HOURS_PER_DAY)
    season = 1 + swing * np.cos(2 * np.pi * day / N_REPRESENTATIVE_DAYS)
    return np.round(mean * season * (1 + noise * rng.standard_normal(STEPS_PER_YEAR)), 3)


def segment_multipliers(n: int = N_SEGMENTS, low: float = 0.6, high: float = 1.2) -> list[float]:
    """Demand fractions at evenly spaced quantile levels of a linear load-duration curve."""
    q = (np.arange(n) + 0.5) / n
    return [round(float(high - (high - low) * x), 4) for x in q]
