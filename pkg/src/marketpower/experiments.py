"""Training runs, sweeps and their CSV/SVG outputs."""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from marketpower.ddpg import DdpgAgent, ReplayBuffer, Transition, train_step
from marketpower.env import MarketEnv, baseline_prices, run_episode
from marketpower.scenario import BanditScenario, ScenarioConfig

HISTOGRAM_BINS = 20
WORKERS_ENV = "MARKETPOWER_WORKERS"


@dataclass
class ExperimentResult:
    scenario_id: str
    group_name: str
    group_capacity_mw: float
    market_cap: float
    seed: int
    run_seed: int = 0
    episodes: int = 0
    reward_series: list = field(default_factory=list)  # (episode, step, reward)
    eval_prices: list = field(default_factory=list)  # mean price per evaluation episode
    bids: list = field(default_factory=list)  # strategic bid prices from evaluation episodes
    bid_histogram: list = field(default_factory=list)  # (lower, upper, count)
    ecdf_points: list = field(default_factory=list)  # (bid, cumulative fraction)
    checkpoint: str | None = None
    fleet_capacity_mw: float = 0.0

    @property
    def final_mean_price(self) -> float:
        return math.fsum(self.eval_prices) / len(self.eval_prices) if self.eval_prices else 0.0

    @property
    def capacity_share(self) -> float:
        return self.group_capacity_mw / self.fleet_capacity_mw if self.fleet_capacity_mw else 0.0


def derive_seed(master: int, *parts) -> int:
    """Stable 63-bit seed from a master seed and run coordinates."""
    text = "|".join([str(int(master))] + [str(p) for p in parts])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") >> 1


def bid_histogram(bids, cap: float, bins: int = HISTOGRAM_BINS):
    counts, edges = np.histogram(np.asarray(bids, dtype=float), bins=bins, range=(0.0, cap))
    return [(float(edges[k]), float(edges[k + 1]), int(counts[k])) for k in range(bins)]


def ecdf(bids):
    """Distinct sorted bid values and the fraction of bids at or below each."""
    values, counts = np.unique(np.asarray(bids, dtype=float), return_counts=True)
    if len(values) == 0:
        return []
    cum = np.cumsum(counts)
    n = int(cum[-1])
    return [(float(v), int(c) / n) for v, c in zip(values, cum)]


def baseline_run(scenario: ScenarioConfig, market_cap: float | None = None, seed: int | None = None) -> ExperimentResult:
    """All-SRMC year; the control run for every comparison."""
    cap = float(market_cap if market_cap is not None else scenario.market_cap)
    prices = baseline_prices(scenario, cap)
    res = ExperimentResult(scenario.name, "", 0.0, cap, scenario.seed if seed is None else seed,
                           episodes=1)
    res.reward_series = [(0, t, p) for t, p in enumerate(prices)]
    res.eval_prices = [math.fsum(prices) / len(prices)]
    res.bid_histogram = bid_histogram([], cap)
    return res


def train_run(scenario: ScenarioConfig, group_name: str, market_cap: float | None = None,
              episodes: int | None = None, seed: int = 0, eval_episodes: int | None = None,
              checkpoint_path=None) -> ExperimentResult:
    """Train one strategic group and evaluate it greedily over the last episodes.

    After each of the final ``eval_episodes`` training episodes the policy
    plays a full year with exploration switched off; ``final_mean_price`` is
    the average price over those evaluation years.
    """
    cap = float(market_cap if market_cap is not None else scenario.market_cap)
    episodes = int(episodes if episodes is not None else scenario.episodes)
    eval_episodes = int(eval_episodes if eval_episodes is not None else scenario.eval_episodes)
    group = scenario.group(group_name)
    run_seed = derive_seed(seed, group.name, repr(cap))
    rng = np.random.default_rng(run_seed)

    env = MarketEnv(scenario, group, cap)
    cfg = scenario.rl_hyperparameters
    agent = DdpgAgent.create(cfg, rng)
    buffer = ReplayBuffer(cfg.buffer_capacity)

    res = ExperimentResult(scenario.name, group.name, group.capacity_mw, cap, seed, run_seed, episodes,
                           fleet_capacity_mw=scenario.total_capacity_mw)
    first_eval = max(episodes - eval_episodes, 0)
    for ep in range(episodes):
        agent.set_noise_scale(ep / max(episodes - 1, 1))
        stats = run_episode(env, agent, True, rng, buffer, log_bids=False)
        res.reward_series.extend((ep, t, r) for t, r in enumerate(stats.per_step_rewards))
        if ep >= first_eval:
            ev = run_episode(env, agent, False, rng)
            res.eval_prices.append(ev.mean_price)
            res.bids.extend(price for _, _, price in ev.bid_log)
    res.bid_histogram = bid_histogram(res.bids, cap)
    res.ecdf_points = ecdf(res.bids)
    if checkpoint_path is not None:
        agent.save(checkpoint_path)
        res.checkpoint = str(checkpoint_path)
    return res


def replay_checkpoint(scenario: ScenarioConfig, group_name: str, checkpoint_path,
                      market_cap: float | None = None, seed: int = 0) -> ExperimentResult:
    """One greedy evaluation year of a saved agent."""
    cap = float(market_cap if market_cap is not None else scenario.market_cap)
    group = scenario.group(group_name)
    agent = DdpgAgent.load(checkpoint_path)
    env = MarketEnv(scenario, group, cap)
    ev = run_episode(env, agent, False, np.random.default_rng(seed))
    res = ExperimentResult(scenario.name, group.name, group.capacity_mw, cap, seed, episodes=0,
                           checkpoint=str(checkpoint_path))
    res.reward_series = [(0, t, r) for t, r in enumerate(ev.per_step_rewards)]
    res.eval_prices = [ev.mean_price]
    res.bids = [p for _, _, p in ev.bid_log]
    res.bid_histogram = bid_histogram(res.bids, cap)
    res.ecdf_points = ecdf(res.bids)
    return res


def train_bandit(bandit: BanditScenario, seed: int | None = None, steps: int | None = None):
    """Train on the one-state bandit r(a) = -(a - optimum)^2.

    Every step is terminal, so the critic regresses the immediate reward.
    Returns the greedy action after each step.
    """
    steps = int(steps if steps is not None else bandit.steps)
    rng = np.random.default_rng(bandit.seed if seed is None else seed)
    cfg = bandit.rl_hyperparameters
    agent = DdpgAgent.create(cfg, rng)
    buffer = ReplayBuffer(cfg.buffer_capacity)
    state = np.ones(cfg.state_dim)
    trace = []
    for t in range(steps):
        agent.set_noise_scale(t / max(steps - 1, 1))
        action = agent.select_action(state, explore=True, rng=rng)
        reward = -float((action[0] - bandit.optimum) ** 2)
        buffer.push(Transition(state, action, reward, state, True))
        if len(buffer) >= cfg.batch_size:
            train_step(agent, buffer, rng)
        trace.append(float(agent.act(state)[0]))
    return trace


def _run_job(job):
    scenario, group, cap, episodes, seed, eval_episodes = job
    return train_run(scenario, group, cap, episodes, seed, eval_episodes)


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(int(workers), 1)


def run_jobs(jobs, workers: int | None = None) -> list[ExperimentResult]:
    """Run independent training jobs, serially or on a process pool.

    Results come back in job order either way.
    """
    workers = resolve_workers(workers)
    if workers == 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs))


def sweep_capacity(scenario: ScenarioConfig, group_names, market_cap: float | None = None,
                   episodes: int | None = None, seeds=(0,), workers: int | None = None,
                   eval_episodes: int | None = None) -> list[ExperimentResult]:
    """One trained run per (group, seed), ordered by group capacity then seed."""
    cap = float(market_cap if market_cap is not None else scenario.market_cap)
    names = [scenario.group(g).name for g in group_names]
    jobs = [(scenario, g, cap, episodes, s, eval_episodes) for g in names for s in seeds]
    results = run_jobs(jobs, workers)
    return sorted(results, key=lambda r: (r.group_capacity_mw, r.group_name, r.seed))


def cap_sensitivity(scenario: ScenarioConfig, group_name: str, caps, episodes: int | None = None,
                    seeds=(0,), workers: int | None = None,
                    eval_episodes: int | None = None) -> list[ExperimentResult]:
    """One trained run per (cap, seed), ordered by cap then seed."""
    caps = [float(c) for c in caps]
    if any(c <= 0 for c in caps) or caps != sorted(caps):
        raise ValueError("cap grid must be positive and ascending")
    name = scenario.group(group_name).name
    jobs = [(scenario, name, c, episodes, s, eval_episodes) for c in caps for s in seeds]
    results = run_jobs(jobs, workers)
    return sorted(results, key=lambda r: (r.market_cap, r.seed))


def sensitivity_table(results) -> list[tuple[float, float]]:
    """(cap, final mean price averaged over seeds), sorted by cap."""
    by_cap = {}
    for r in results:
        by_cap.setdefault(r.market_cap, []).append(r.final_mean_price)
    return [(c, math.fsum(v) / len(v)) for c, v in sorted(by_cap.items())]


# outputs ------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def tables(results) -> dict:
    """The CSV tables as (header, rows) pairs."""
    reward_rows, cap_rows, hist_rows, ecdf_rows = [], [], [], []
    for r in results:
        key = (r.scenario_id, r.group_name, r.market_cap, r.seed)
        reward_rows.extend((*key, ep, t, rew) for ep, t, rew in r.reward_series)
        cap_rows.append((*key, r.group_capacity_mw, r.final_mean_price))
        hist_rows.extend((*key, lo, hi, c) for lo, hi, c in r.bid_histogram)
        ecdf_rows.extend((*key, b, f) for b, f in r.ecdf_points)
    base = ["scenario", "group", "market_cap_gbp_per_mwh", "seed"]
    out = {
        "reward_series.csv": (base + ["episode", "step", "reward_gbp_per_mwh"], reward_rows),
        "capacity_vs_price.csv": (base + ["group_capacity_mw", "final_mean_price_gbp_per_mwh"], cap_rows),
        "bid_histogram.csv": (base + ["bin_lower_gbp_per_mwh", "bin_upper_gbp_per_mwh", "count"], hist_rows),
        "ecdf.csv": (base + ["bid_gbp_per_mwh", "cumulative_fraction"], ecdf_rows),
    }
    sens = {}
    for r in results:
        sens.setdefault((r.scenario_id, r.group_name), []).append(r)
    sens_rows = []
    for (sid, g), rs in sens.items():
        for cap, price in sensitivity_table(rs):
            sens_rows.append((sid, g, cap, price))
    out["sensitivity.csv"] = (["scenario", "group", "market_cap_gbp_per_mwh", "final_mean_price_gbp_per_mwh"],
                              sens_rows)
    return out


def emit_outputs(results, out_dir) -> list[Path]:
    """Write the CSV tables and one SVG plot per table into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from exc
    written = []
    for name, (header, rows) in tables(results).items():
        path = out / name
        svg_path = path.with_suffix(".svg")
        try:
            path.write_text(_csv_text(header, rows), encoding="utf-8")
            svg_path.write_text(_svg_for(name, header, rows), encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc
        written.extend([path, svg_path])
    return written


def read_csv(path):
    """Parse an emitted CSV back into (header, rows) with numbers restored."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [tuple(_parse(v) for v in row) for row in reader]
    return header, rows


def _parse(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


# minimal SVG plotting ------------------------------------------------------

def _svg_plot(title, xlabel, ylabel, series, kind="line", width=640, height=400) -> str:
    """Scatter or line chart of named (x, y) series."""
    pad_l, pad_r, pad_t, pad_b = 70, 20, 40, 50
    xs = [x for _, pts in series for x, _ in pts] or [0.0, 1.0]
    ys = [y for _, pts in series for _, y in pts] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(min(ys), 0.0), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x):
        return pad_l + (x - x0) / (x1 - x0) * pw

    def py(y):
        return pad_t + ph - (y - y0) / (y1 - y0) * ph

    colours = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
               "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<line x1="{pad_l}" y1="{pad_t + ph}" x2="{pad_l + pw}" y2="{pad_t + ph}" stroke="black"/>',
        f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + ph}" stroke="black"/>',
        f'<text x="{pad_l + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>',
        f'<text x="15" y="{pad_t + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {pad_t + ph / 2:.1f})">{_esc(ylabel)}</text>',
    ]
    for k in range(5):
        xv = x0 + (x1 - x0) * k / 4
        yv = y0 + (y1 - y0) * k / 4
        parts.append(f'<text x="{px(xv):.1f}" y="{pad_t + ph + 15}" text-anchor="middle">{xv:.4g}</text>')
        parts.append(f'<text x="{pad_l - 5}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.4g}</text>')
    for i, (label, pts) in enumerate(series):
        c = colours[i % len(colours)]
        if kind == "line" and len(pts) > 1:
            d = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in pts)
            parts.append(f'<polyline fill="none" stroke="{c}" stroke-width="1" points="{d}"/>')
        elif kind == "bar":
            bw = pw / max(len(pts), 1) * 0.9
            for x, y in pts:
                parts.append(f'<rect x="{px(x) - bw / 2:.1f}" y="{py(y):.1f}" width="{bw:.1f}" '
                             f'height="{py(y0) - py(y):.1f}" fill="{c}" fill-opacity="0.5"/>')
        else:
            for x, y in pts:
                parts.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="{c}"/>')
        if len(series) > 1 and i < 10:
            parts.append(f'<text x="{pad_l + pw - 5}" y="{pad_t + 12 * (i + 1)}" text-anchor="end" '
                         f'fill="{c}">{_esc(label)[:60]}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _esc(s) -> str:
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _by_run(rows, x_idx, y_idx):
    out = {}
    for r in rows:
        label = f"{r[1] or 'baseline'} cap {r[2]:g} seed {r[3]}"
        out.setdefault(label, []).append((float(r[x_idx]), float(r[y_idx])))
    return list(out.items())


def _svg_for(name, header, rows) -> str:
    if name == "reward_series.csv":
        series = []
        for label, pts in _by_run(rows, 4, 6):
            per_ep = {}
            for ep, rew in pts:
                per_ep.setdefault(ep, []).append(rew)
            series.append((label, [(ep, math.fsum(v) / len(v)) for ep, v in sorted(per_ep.items())]))
        return _svg_plot("Mean reward per episode", "episode", "reward (GBP/MWh)", series)
    if name == "capacity_vs_price.csv":
        pts = [(float(r[4]), float(r[5])) for r in rows]
        return _svg_plot("Strategic capacity vs average price", "capacity (MW)", "price (GBP/MWh)",
                         [("runs", pts)], kind="scatter")
    if name == "bid_histogram.csv":
        mids = [(r[:4], (float(r[4]) + float(r[5])) / 2, float(r[6])) for r in rows]
        rows = [(*k, m, 0, c) for k, m, c in mids]
        return _svg_plot("Strategic bid histogram", "bid (GBP/MWh)", "count", _by_run(rows, 4, 6), kind="bar")
    if name == "ecdf.csv":
        return _svg_plot("Empirical CDF of strategic bids", "bid (GBP/MWh)", "cumulative fraction",
                         _by_run(rows, 4, 5))
    series = {}
    for r in rows:
        series.setdefault(r[1] or "baseline", []).append((float(r[2]), float(r[3])))
    return _svg_plot("Cap sensitivity", "market cap (GBP/MWh)", "price (GBP/MWh)", list(series.items()))
