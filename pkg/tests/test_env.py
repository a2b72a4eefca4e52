import math
from dataclasses import replace

import numpy as np
import pytest

from marketpower.ddpg import DdpgAgent, DdpgConfig, ReplayBuffer
from marketpower.env import (
    EpisodeDone, MarketEnv, MarketState, baseline_prices, build_state, default_bounds, run_episode,
    scale_action,
)
from marketpower.market import ClearingResult, HourResult
from marketpower.scenario import StrategicGroup

LARGEST = "edf+rwe+sse+uniper+scottish-power+drax"

BOUNDS = {"hour": (0, 191), "demand": (1000, 3000), "carbon_price": (10, 30), "gas_price": (15, 25),
          "coal_price": (5, 15), "clearing_price": (0, 600)}


def test_state_endpoints_midpoint_and_clamp():
    lo = build_state(MarketState(0, 1000, 10, 15, 5, 0), BOUNDS)
    hi = build_state(MarketState(191, 3000, 30, 25, 15, 600), BOUNDS)
    assert np.array_equal(lo, np.zeros(6)) and np.array_equal(hi, np.ones(6))
    mid = build_state(MarketState(0, 2000, 10, 15, 5, 720), BOUNDS)
    assert mid[1] == 0.5
    assert mid[5] == 1.0


def test_state_rejects_non_finite():
    with pytest.raises(ValueError, match="demand"):
        build_state(MarketState(0, float("nan"), 10, 15, 5, 0), BOUNDS)


@pytest.mark.parametrize("raw,cap,price", [(-1, 600, 0), (1, 600, 600), (0, 150, 75), (3, 150, 150)])
def test_scale_action(raw, cap, price):
    assert scale_action(raw, cap) == price


def test_default_bounds_cover_the_series(desk):
    b = default_bounds(desk, 600)
    assert b["hour"] == (0, 191)
    assert b["clearing_price"] == (0, 600)
    assert b["demand"] == (min(desk.demand_series), max(desk.demand_series))


def test_episode_length_and_done(desk):
    env = MarketEnv(desk, "orsted")
    env.reset()
    steps = 0
    while not env.done:
        env.step(np.zeros(1))
        steps += 1
    assert steps == 192
    with pytest.raises(EpisodeDone):
        env.step(np.zeros(1))


def test_inert_group_earns_the_baseline_price(desk):
    env = MarketEnv(desk, StrategicGroup("none", frozenset(), 0.0, 0))
    base = baseline_prices(desk)
    env.reset()
    for t in range(192):
        _, reward, _, _, _ = env.step(np.array([0.9]))
        assert reward == base[t]


def test_next_state_carries_this_steps_price(desk):
    env = MarketEnv(desk, "edf")
    env.reset()
    s1, reward, _, result, _ = env.step(np.array([0.2]))
    assert s1[5] == pytest.approx(result.average_price / 600)
    assert reward == result.average_price


def test_pivotal_group_bidding_cap_sets_the_price(desk):
    env = MarketEnv(desk, LARGEST)
    found = 0
    for t in range(192):
        others = math.fsum(b.quantity_mw for b in env._srmc_bids[t])
        result = env.clear(600.0, t)
        for seg in result.segment_results:
            if others < seg.demand_mw:
                assert seg.clearing_price_gbp_per_mwh == 600.0
                found += 1
    assert found > 0


def test_strategic_plants_leave_the_srmc_stack(desk):
    env = MarketEnv(desk, "edf")
    strategic = set(env.strategic_plants)
    assert len(strategic) == 3
    assert all(b.plant_id not in strategic for bids in env._srmc_bids for b in bids)
    bids = env.bids_for(123.0, 0)
    assert {b.price_gbp_per_mwh for b in bids if b.plant_id in strategic} == {123.0}


def test_uniform_hour_reward(desk):
    env = MarketEnv(desk, "edf")
    hour = HourResult(0, tuple(ClearingResult(k, 100.0, 70.0, ()) for k in range(20)))
    assert env.reward(hour) == 70.0


def test_profit_reward_is_zero_when_nothing_is_accepted(desk):
    env = MarketEnv(replace(desk, reward="profit"), "orsted")
    hour = HourResult(0, tuple(ClearingResult(k, 100.0, 70.0, (("other-000", 100.0),)) for k in range(20)))
    assert env.reward(hour) == 0.0
    env.reset()
    _, r, _, result, _ = env.step(np.array([-1.0]))
    # a zero bid from wind is always dispatched and paid the segment price
    assert r == pytest.approx(result.average_price)


def test_zero_actor_bids_half_the_cap(desk):
    agent = DdpgAgent.create(DdpgConfig(), np.random.default_rng(0), zero_actor=True)
    env = MarketEnv(desk, "sse", market_cap=150)
    stats = run_episode(env, agent, False, np.random.default_rng(0))
    assert {p for _, _, p in stats.bid_log} == {75.0}
    assert len(stats.per_step_rewards) == 192
    assert stats.mean_reward == pytest.approx(np.mean(stats.per_step_rewards))


def test_episode_determinism_with_training(desk):
    def once():
        rng = np.random.default_rng(11)
        cfg = DdpgConfig(hidden_sizes=(8, 8), batch_size=16)
        agent = DdpgAgent.create(cfg, rng)
        env = MarketEnv(desk, "edf+rwe")
        return run_episode(env, agent, True, rng, ReplayBuffer(1000)), agent.dumps()

    (a, wa), (b, wb) = once(), once()
    assert a == b and wa == wb
    assert len(a.critic_losses) == 192 - 16 + 1
    assert all(0 <= p <= 600 for _, _, p in a.bid_log)


def test_training_needs_a_buffer(desk):
    agent = DdpgAgent.create(DdpgConfig(), np.random.default_rng(0))
    with pytest.raises(ValueError):
        run_episode(MarketEnv(desk, "edf"), agent, True, np.random.default_rng(0))


def test_acceptance_rate_in_unit_interval(desk):
    agent = DdpgAgent.create(DdpgConfig(), np.random.default_rng(0))
    stats = run_episode(MarketEnv(desk, "edf"), agent, False, np.random.default_rng(0))
    assert 0 < stats.acceptance_rate <= 1
