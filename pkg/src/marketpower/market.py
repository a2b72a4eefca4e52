"""Day-ahead power exchange: SRMC bidding and uniform-price merit-order clearing.

Every hourly step is split into load segments that clear independently against
the same bid stack. Bids are sorted from cheapest to dearest and accepted until
the segment demand is met; the last (marginal) bid is accepted partially and its
price is paid to every accepted MW.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

# fuels whose SRMC carries no fuel-price term
ZERO_FUEL = frozenset({"wind", "solar", "hydro"})
RENEWABLE = frozenset({"wind", "solar"})

# relative tolerance below which supply is treated as meeting demand
SHORTFALL_RTOL = 1e-12


class ConfigurationError(ValueError):
    """Raised when prices or fleet data cannot support a calculation."""


class Fuel(str, enum.Enum):
    GAS = "gas"
    COAL = "coal"
    NUCLEAR = "nuclear"
    WIND = "wind"
    SOLAR = "solar"
    HYDRO = "hydro"
    OTHER = "other"


@dataclass(frozen=True)
class PowerPlant:
    id: str
    genco_id: str
    fuel: Fuel
    capacity_mw: float
    efficiency: float = 1.0
    carbon_intensity_t_per_mwh: float = 0.0
    variable_om_gbp_per_mwh: float = 0.0
    availability_factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "fuel", Fuel(self.fuel))
        if not self.capacity_mw > 0:
            raise ValueError(f"plant {self.id}: capacity_mw must be > 0, got {self.capacity_mw}")
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"plant {self.id}: efficiency must be in (0, 1], got {self.efficiency}")
        if not 0 <= self.availability_factor <= 1:
            raise ValueError(
                f"plant {self.id}: availability_factor must be in [0, 1], got {self.availability_factor}"
            )
        if self.carbon_intensity_t_per_mwh < 0 or self.variable_om_gbp_per_mwh < 0:
            raise ValueError(f"plant {self.id}: carbon intensity and O&M must be >= 0")
        if self.fuel.value in RENEWABLE and self.carbon_intensity_t_per_mwh != 0:
            raise ValueError(f"plant {self.id}: {self.fuel.value} plants carry no carbon intensity")


@dataclass(frozen=True)
class GenCo:
    id: str
    name: str
    plant_ids: tuple[str, ...] = ()
    strategic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "plant_ids", tuple(self.plant_ids))


@dataclass(frozen=True)
class Bid:
    plant_id: str
    price_gbp_per_mwh: float
    quantity_mw: float

    def __post_init__(self):
        if not (math.isfinite(self.price_gbp_per_mwh) and self.price_gbp_per_mwh >= 0):
            raise ValueError(f"bid for {self.plant_id}: price must be finite and >= 0")
        if not (math.isfinite(self.quantity_mw) and self.quantity_mw > 0):
            raise ValueError(f"bid for {self.plant_id}: quantity must be finite and > 0")


@dataclass(frozen=True)
class ClearingResult:
    segment_index: int
    demand_mw: float
    clearing_price_gbp_per_mwh: float
    accepted: tuple[tuple[str, float], ...]
    shortfall_mw: float = 0.0

    @property
    def accepted_mw(self) -> float:
        return math.fsum(mw for _, mw in self.accepted)

    def payments(self) -> dict[str, float]:
        """Revenue per accepted plant; every MW earns the clearing price."""
        return {pid: self.clearing_price_gbp_per_mwh * mw for pid, mw in self.accepted}


@dataclass(frozen=True)
class HourResult:
    step_index: int
    segment_results: tuple[ClearingResult, ...] = field(default_factory=tuple)

    @property
    def prices(self) -> list[float]:
        return [r.clearing_price_gbp_per_mwh for r in self.segment_results]

    @property
    def average_price(self) -> float:
        prices = self.prices
        return math.fsum(prices) / len(prices)


def srmc(plant: PowerPlant, fuel_prices: Mapping[str, float], carbon_price: float) -> float:
    """Short-run marginal cost in £/MWh.

    Fuel cost per MWh of output (fuel price over efficiency) plus the carbon
    cost of the emissions plus variable O&M. Wind, solar and hydro burn no fuel.
    """
    fuel = plant.fuel.value
    if fuel in ZERO_FUEL:
        fuel_cost = 0.0
    else:
        try:
            fuel_cost = fuel_prices[fuel] / plant.efficiency
        except KeyError:
            raise ConfigurationError(
                f"plant {plant.id}: no fuel price for {fuel!r}"
            ) from None
    cost = fuel_cost + plant.carbon_intensity_t_per_mwh * carbon_price + plant.variable_om_gbp_per_mwh
    return max(cost, 0.0)


def available_mw(plant: PowerPlant, profile_value: float | None = None) -> float:
    """Offerable MW; renewables are additionally scaled by the hourly profile."""
    avail = plant.availability_factor
    if profile_value is not None and plant.fuel.value in RENEWABLE:
        avail *= profile_value
    return plant.capacity_mw * avail


def make_srmc_bids(
    genco: GenCo,
    plants: Mapping[str, PowerPlant],
    fuel_prices: Mapping[str, float],
    carbon_price: float,
    availability: Mapping[str, float] | None = None,
    market_cap: float | None = None,
) -> list[Bid]:
    """One cost-based bid per available plant of a non-strategic GenCo.

    ``availability`` optionally overrides the offerable MW per plant (hourly
    renewable output). Prices above ``market_cap`` are truncated to the cap.
    """
    if genco.strategic:
        raise ValueError(f"GenCo {genco.id} is strategic; its bids come from the agent")
    bids = []
    for pid in genco.plant_ids:
        plant = plants[pid]
        qty = availability[pid] if availability is not None else available_mw(plant)
        if qty <= 0:
            continue
        price = srmc(plant, fuel_prices, carbon_price)
        if market_cap is not None:
            price = min(price, market_cap)
        bids.append(Bid(pid, price, qty))
    return bids


def merit_order(bids: Sequence[Bid], tie_break_seed: int = 0) -> list[int]:
    """Indices of ``bids`` from cheapest to dearest.

    Equal prices are ordered by a permutation drawn from ``tie_break_seed``
    over the plant-id-sorted bids, then by plant id, so the result does not
    depend on the order bids were submitted in.
    """
    n = len(bids)
    canonical = sorted(range(n), key=lambda i: str(bids[i].plant_id))
    ranks = np.random.default_rng(tie_break_seed).permutation(n)
    rank_of = [0] * n
    for pos, i in enumerate(canonical):
        rank_of[i] = int(ranks[pos])
    return sorted(
        range(n), key=lambda i: (bids[i].price_gbp_per_mwh, rank_of[i], str(bids[i].plant_id))
    )


def _clear_ordered(
    ordered: Sequence[Bid], demand_mw: float, market_cap: float, segment_index: int
) -> ClearingResult:
    total = math.fsum(b.quantity_mw for b in ordered)
    if total < demand_mw * (1 - SHORTFALL_RTOL):
        accepted = tuple((b.plant_id, b.quantity_mw) for b in ordered)
        return ClearingResult(segment_index, demand_mw, market_cap, accepted, demand_mw - total)

    if demand_mw <= 0:
        price = ordered[0].price_gbp_per_mwh if ordered else 0.0
        return ClearingResult(segment_index, demand_mw, price, ())

    accepted = []
    remaining = demand_mw
    price = 0.0
    for b in ordered:
        if remaining <= 0:
            break
        take = min(b.quantity_mw, remaining)
        accepted.append((b.plant_id, take))
        remaining -= take
        price = b.price_gbp_per_mwh
    return ClearingResult(segment_index, demand_mw, price, tuple(accepted))


def clear_segment(
    bids: Sequence[Bid],
    demand_mw: float,
    market_cap: float,
    tie_break_seed: int = 0,
    segment_index: int = 0,
) -> ClearingResult:
    """Uniform-price clearing of one load segment.

    When offered MW fall short of demand every bid is accepted, the gap is
    reported as shortfall and the segment clears at ``market_cap``.
    """
    if not math.isfinite(demand_mw) or demand_mw < 0:
        raise ValueError(f"demand must be finite and >= 0, got {demand_mw}")
    for b in bids:
        if b.price_gbp_per_mwh > market_cap:
            raise ValueError(
                f"bid for {b.plant_id} at {b.price_gbp_per_mwh} exceeds the market cap {market_cap}"
            )
    ordered = [bids[i] for i in merit_order(bids, tie_break_seed)]
    return _clear_ordered(ordered, demand_mw, market_cap, segment_index)


def clear_hour(
    bid_stack: Sequence[Bid],
    step_demand_mw: float,
    segment_multipliers: Sequence[float],
    market_cap: float,
    tie_break_seed: int = 0,
    step_index: int = 0,
) -> HourResult:
    """Clear every load segment of an hour against one bid stack."""
    if len(segment_multipliers) == 0 or any(m <= 0 for m in segment_multipliers):
        raise ValueError("segment multipliers must be non-empty and positive")
    if not math.isfinite(step_demand_mw) or step_demand_mw < 0:
        raise ValueError(f"demand must be finite and >= 0, got {step_demand_mw}")
    for b in bid_stack:
        if b.price_gbp_per_mwh > market_cap:
            raise ValueError(
                f"bid for {b.plant_id} at {b.price_gbp_per_mwh} exceeds the market cap {market_cap}"
            )
    # the stack is shared by all segments, so sort it once
    ordered = [bid_stack[i] for i in merit_order(bid_stack, tie_break_seed)]
    results = tuple(
        _clear_ordered(ordered, step_demand_mw * m, market_cap, k)
        for k, m in enumerate(segment_multipliers)
    )
    return HourResult(step_index, results)


def total_capacity(plants: Iterable[PowerPlant]) -> float:
    return math.fsum(p.capacity_mw for p in plants)
