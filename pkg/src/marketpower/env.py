"""Strategic bidding environment on top of the power exchange.

The strategic group's plants all bid the same price each hour, chosen by the
agent; every other GenCo bids its SRMC. The agent observes only the hour,
demand, carbon, gas and coal prices and the previous hour's average price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from marketpower.ddpg import BufferNotReady, DdpgAgent, ReplayBuffer, Transition, train_step
from marketpower.market import Bid, GenCo, HourResult, available_mw, clear_hour, make_srmc_bids
from marketpower.scenario import STATE_FEATURES, ScenarioConfig, StrategicGroup


class EpisodeDone(RuntimeError):
    """step() was called after the final step of the episode."""


@dataclass(frozen=True)
class MarketState:
    segment_hour: int
    demand_mw: float
    carbon_price: float
    gas_price: float
    coal_price: float
    prev_clearing_price: float

    def as_tuple(self):
        return (self.segment_hour, self.demand_mw, self.carbon_price, self.gas_price,
                self.coal_price, self.prev_clearing_price)


@dataclass(frozen=True)
class EnvConfig:
    market_cap: float
    strategic_group: frozenset = frozenset()
    steps_per_episode: int = 192
    normalization_bounds: dict = field(default_factory=dict)
    reward: str = "average_price"

    def __post_init__(self):
        if not self.market_cap > 0:
            raise ValueError("market_cap must be > 0")
        for feat, (lo, hi) in self.normalization_bounds.items():
            if not lo < hi:
                raise ValueError(f"bounds for {feat}: min must be below max")


@dataclass
class EpisodeStats:
    per_step_rewards: list = field(default_factory=list)
    bid_log: list = field(default_factory=list)  # (step, plant_id, price)
    average_prices: list = field(default_factory=list)
    accepted_bids: int = 0
    offered_bids: int = 0
    critic_losses: list = field(default_factory=list)

    @property
    def mean_reward(self) -> float:
        return math.fsum(self.per_step_rewards) / len(self.per_step_rewards) if self.per_step_rewards else 0.0

    @property
    def mean_price(self) -> float:
        return math.fsum(self.average_prices) / len(self.average_prices) if self.average_prices else 0.0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted_bids / self.offered_bids if self.offered_bids else 0.0


def build_state(raw: MarketState, bounds: dict) -> np.ndarray:
    """Min-max scale the six observed features to [0, 1] in a fixed order."""
    values = raw.as_tuple()
    out = np.empty(len(STATE_FEATURES))
    for k, (feat, v) in enumerate(zip(STATE_FEATURES, values)):
        if not math.isfinite(v):
            raise ValueError(f"state feature {feat} is not finite: {v}")
        lo, hi = bounds[feat]
        out[k] = min(max((v - lo) / (hi - lo), 0.0), 1.0)
    return out


def scale_action(raw_action: float, cap: float) -> float:
    """Map an actor output in [-1, 1] onto a bid price in [0, cap]."""
    raw = min(max(float(raw_action), -1.0), 1.0)
    return (raw + 1.0) / 2.0 * cap


def default_bounds(scenario: ScenarioConfig, market_cap: float) -> dict:
    def span(series):
        lo, hi = float(min(series)), float(max(series))
        return (lo, hi) if lo < hi else (lo - 1.0, hi + 1.0)

    fp = scenario.fuel_price_series
    return {
        "hour": (0.0, float(scenario.steps - 1)),
        "demand": span(scenario.demand_series),
        "carbon_price": span(scenario.carbon_price_series),
        "gas_price": span(fp["gas"]),
        "coal_price": span(fp["coal"]),
        "clearing_price": (0.0, float(market_cap)),
    }


def tie_break_seed(seed: int, step: int) -> int:
    return (seed * 1_000_003 + step) % (2 ** 63)


class MarketEnv:
    """One simulated year of hourly day-ahead auctions.

    Parameters
    ----------
    scenario : ScenarioConfig
    group : StrategicGroup, str or None
        The colluding GenCos, merged into one strategic GenCo. ``None`` runs
        the all-SRMC baseline; :meth:`step` then ignores its action.
    market_cap : float, optional
        Overrides the scenario's cap.
    """

    def __init__(self, scenario: ScenarioConfig, group=None, market_cap: float | None = None,
                 reward: str | None = None, initial_price: float | None = None):
        self.scenario = scenario
        if isinstance(group, str):
            group = scenario.group(group)
        self.group: StrategicGroup | None = group
        cap = float(market_cap if market_cap is not None else scenario.market_cap)
        members = frozenset(group.genco_ids) if group is not None else frozenset()
        bounds = dict(scenario.normalization_bounds or default_bounds(scenario, cap))
        bounds["clearing_price"] = bounds.get("clearing_price", (0.0, cap))
        self.config = EnvConfig(cap, members, scenario.steps, bounds, reward or scenario.reward)

        plants = scenario.plant_map()
        self.strategic_plants = [pid for g in scenario.gencos if g.id in members for pid in g.plant_ids]
        self.strategic_genco = GenCo("strategic", group.name if group else "", tuple(self.strategic_plants), True)
        others = [g for g in scenario.gencos if g.id not in members]

        # SRMC bids and strategic availability depend only on the step
        self._srmc_bids = []
        self._strategic_mw = []
        for t in range(scenario.steps):
            avail = {p.id: available_mw(p, self._profile(p, t)) for p in scenario.plants}
            fuel = scenario.fuel_prices_at(t)
            bids = []
            for g in others:
                bids.extend(make_srmc_bids(g, plants, fuel, scenario.carbon_price_series[t], avail, cap))
            self._srmc_bids.append(bids)
            self._strategic_mw.append([(pid, avail[pid]) for pid in self.strategic_plants if avail[pid] > 0])

        if initial_price is not None:
            self.initial_price = float(initial_price)
        elif scenario.initial_clearing_price is not None:
            self.initial_price = float(scenario.initial_clearing_price)
        else:
            self.initial_price = min(baseline_mean_price(scenario, cap), cap)
        self.t = 0
        self.prev_price = self.initial_price
        self.done = False

    def _profile(self, plant, t):
        return self.scenario.renewable_profiles.get(plant.fuel.value, [None] * (t + 1))[t]

    @property
    def market_cap(self) -> float:
        return self.config.market_cap

    def raw_state(self) -> MarketState:
        s, t = self.scenario, min(self.t, self.scenario.steps - 1)
        return MarketState(t, s.demand_series[t], s.carbon_price_series[t],
                           s.fuel_price_series["gas"][t], s.fuel_price_series["coal"][t], self.prev_price)

    def observe(self) -> np.ndarray:
        return build_state(self.raw_state(), self.config.normalization_bounds)

    def reset(self) -> np.ndarray:
        self.t = 0
        self.prev_price = self.initial_price
        self.done = False
        return self.observe()

    def bids_for(self, price: float, t: int | None = None) -> list[Bid]:
        t = self.t if t is None else t
        strategic = [Bid(pid, price, mw) for pid, mw in self._strategic_mw[t]]
        return self._srmc_bids[t] + strategic

    def clear(self, price: float, t: int) -> HourResult:
        s = self.scenario
        return clear_hour(self.bids_for(price, t), s.demand_series[t], s.segment_multipliers,
                          self.market_cap, tie_break_seed(s.seed, t), t)

    def step(self, action):
        """Clear the current hour with the strategic bid implied by ``action``.

        Returns ``(next_state, reward, done, hour_result, bid_price)``.
        """
        if self.done:
            raise EpisodeDone("episode finished; call reset()")
        price = scale_action(np.ravel(action)[0], self.market_cap)
        result = self.clear(price, self.t)
        reward = self.reward(result)
        self.prev_price = result.average_price
        self.t += 1
        self.done = self.t >= self.config.steps_per_episode
        return self.observe(), reward, self.done, result, price

    def reward(self, result: HourResult) -> float:
        if self.config.reward == "average_price":
            return result.average_price
        # revenue per MW of strategic capacity offered, averaged over segments
        offered = math.fsum(mw for _, mw in self._strategic_mw[result.step_index])
        if offered <= 0:
            return 0.0
        strategic = set(self.strategic_plants)
        revenue = math.fsum(r.clearing_price_gbp_per_mwh * mw
                            for r in result.segment_results for pid, mw in r.accepted if pid in strategic)
        return revenue / (offered * len(result.segment_results))


_BASELINE_CACHE: dict = {}


def baseline_prices(scenario: ScenarioConfig, market_cap: float | None = None) -> list[float]:
    """Hourly average prices with every GenCo bidding SRMC."""
    cap = float(market_cap if market_cap is not None else scenario.market_cap)
    key = (id(scenario), cap)
    hit = _BASELINE_CACHE.get(key)
    if hit is not None and hit[0] is scenario:
        return list(hit[1])
    env = MarketEnv(scenario, None, cap, initial_price=0.0)
    prices = [env.clear(0.0, t).average_price for t in range(scenario.steps)]
    _BASELINE_CACHE[key] = (scenario, tuple(prices))
    return prices


def baseline_mean_price(scenario: ScenarioConfig, market_cap: float | None = None) -> float:
    prices = baseline_prices(scenario, market_cap)
    return math.fsum(prices) / len(prices)


def run_episode(env: MarketEnv, agent: DdpgAgent, training: bool, rng: np.random.Generator,
                buffer: ReplayBuffer | None = None, log_bids: bool = True) -> EpisodeStats:
    """Play one year. When ``training``, explore, store transitions and update every step.

    Rewards enter the replay buffer divided by the market cap so the critic
    sees values of order one whatever the cap.
    """
    if training and buffer is None:
        raise ValueError("training needs a replay buffer")
    stats = EpisodeStats()
    state = env.reset()
    agent.noise.reset()
    strategic = set(env.strategic_plants)
    while not env.done:
        action = agent.select_action(state, explore=training, rng=rng)
        next_state, reward, done, result, price = env.step(action)
        stats.per_step_rewards.append(reward)
        stats.average_prices.append(result.average_price)
        for pid, _ in env._strategic_mw[result.step_index]:
            if log_bids:
                stats.bid_log.append((result.step_index, pid, price))
        for seg in result.segment_results:
            stats.offered_bids += len(env._strategic_mw[result.step_index])
            stats.accepted_bids += sum(1 for pid, _ in seg.accepted if pid in strategic)
        if training:
            buffer.push(Transition(state, np.atleast_1d(action), reward / env.market_cap, next_state, done))
            if len(buffer) >= agent.config.batch_size:
                try:
                    loss, _ = train_step(agent, buffer, rng)
                    stats.critic_losses.append(loss)
                except BufferNotReady:
                    pass
        state = next_state
    return stats
