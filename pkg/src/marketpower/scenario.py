"""Scenario files: fleets, price and demand series, GenCo groups and RL settings.

Scenarios are YAML documents with a ``schema_version`` field. Bundled scenarios
live in ``marketpower/data/scenarios`` and can be referred to by name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from marketpower import fleet
from marketpower.ddpg import DdpgConfig
from marketpower.market import ZERO_FUEL, Fuel, GenCo, PowerPlant, available_mw

SCHEMA_VERSION = 1
BUNDLED = ("uk2018-full", "desk-small", "toy-bandit")
REWARDS = ("average_price", "profit")
STATE_FEATURES = ("hour", "demand", "carbon_price", "gas_price", "coal_price", "clearing_price")
DEFAULT_SEGMENT_SCHEME = "ldc-quantiles-linear-0.6-1.2"


class ScenarioError(ValueError):
    """Invalid scenario content; the message starts with the offending field."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


GROUP_MEMBERS = {
    "orsted": "Orsted",
    "drax": "Drax Power Ltd",
    "scottish-power": "Scottish Power",
    "uniper": "Uniper UK Limited",
    "sse": "SSE",
    "rwe": "RWE Generation SE",
    "edf": "EDF Energy",
}
# (member slugs, capacity MW, number of plants) for the twelve GenCo groups
GENCO_GROUPS = (
    (("orsted",), 2738.7, 11),
    (("drax",), 4035.0, 3),
    (("scottish-power",), 4471.5, 49),
    (("uniper",), 6605.0, 9),
    (("sse",), 8390.7, 130),
    (("rwe",), 8664.0, 11),
    (("edf",), 14763.0, 14),
    (("edf", "rwe"), 23427.0, 25),
    (("edf", "rwe", "sse"), 31817.7, 155),
    (("edf", "rwe", "sse", "uniper"), 38422.7, 164),
    (("edf", "rwe", "sse", "uniper", "scottish-power"), 42894.2, 213),
    (("edf", "rwe", "sse", "uniper", "scottish-power", "drax"), 46929.2, 216),
)


@dataclass(frozen=True)
class GroupRow:
    name: str
    slug: str
    members: tuple[str, ...]
    capacity_mw: float
    n_plants: int


@dataclass(frozen=True)
class StrategicGroup:
    name: str
    genco_ids: frozenset
    capacity_mw: float
    n_plants: int


def _group_name(members):
    names = [GROUP_MEMBERS.get(m, m) for m in members]
    return names[0] if len(names) == 1 else "{" + ", ".join(names) + "}"


def genco_group_rows(capacity_scale: float = 1.0, plant_counts: dict | None = None) -> tuple[GroupRow, ...]:
    """The twelve GenCo groups, optionally rescaled for a smaller fleet."""
    rows = []
    for members, cap, n in GENCO_GROUPS:
        if plant_counts is not None:
            n = sum(plant_counts[m] for m in members)
        rows.append(GroupRow(_group_name(members), "+".join(members), members,
                             round(cap * capacity_scale, 1), n))
    return tuple(rows)


@dataclass(frozen=True)
class GencoGroupCatalog:
    rows: tuple[GroupRow, ...]
    member_names: dict = field(default_factory=lambda: dict(GROUP_MEMBERS))

    def names(self) -> list[str]:
        return [r.name for r in self.rows]

    def find(self, name: str) -> GroupRow:
        """Look a group up by row name, slug, or a braced list of member names.

        Member tokens match case-insensitively on a prefix of the member's
        name or on its first word, so ``"{EDF, RWE}"`` and ``"{EDF Energy, Uniper UK Ltd}"``
        both resolve.
        """
        key = name.strip()
        for r in self.rows:
            if key == r.name or key == r.slug:
                return r
        tokens = [t.strip().lower() for t in key.strip("{}").split(",") if t.strip()]
        wanted = set()
        for tok in tokens:
            hits = [gid for gid, nm in self.member_names.items()
                    if nm.lower().startswith(tok) or tok.startswith(nm.lower().split()[0]) or gid == tok]
            if len(hits) != 1:
                raise KeyError(f"unknown group {name!r}")
            wanted.add(hits[0])
        for r in self.rows:
            if set(r.members) == wanted:
                return r
        raise KeyError(f"unknown group {name!r}")


def build_group(catalog: GencoGroupCatalog, name: str, plants=None, gencos=None) -> StrategicGroup:
    """Member GenCo ids of a catalog group.

    With a fleet supplied the aggregate capacity and plant count are taken from
    the fleet and checked against the catalog row (0.5% capacity tolerance).
    """
    row = catalog.find(name)
    if plants is None:
        return StrategicGroup(row.name, frozenset(row.members), row.capacity_mw, row.n_plants)
    by_id = {g.id: g for g in gencos}
    missing = [m for m in row.members if m not in by_id]
    if missing:
        raise ScenarioError("groups", f"{row.name} refers to unknown GenCos {missing}")
    cap_of = {p.id: p.capacity_mw for p in plants}
    pids = [pid for m in row.members for pid in by_id[m].plant_ids]
    capacity = math.fsum(cap_of[p] for p in pids)
    if abs(capacity - row.capacity_mw) > 0.005 * row.capacity_mw:
        raise ScenarioError("groups", f"{row.name} holds {capacity:.1f} MW, catalog says {row.capacity_mw}")
    if len(pids) != row.n_plants:
        raise ScenarioError("groups", f"{row.name} holds {len(pids)} plants, catalog says {row.n_plants}")
    return StrategicGroup(row.name, frozenset(row.members), round(capacity, 6), len(pids))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    plants: tuple[PowerPlant, ...]
    gencos: tuple[GenCo, ...]
    groups: tuple[GroupRow, ...]
    demand_series: tuple[float, ...]
    carbon_price_series: tuple[float, ...]
    fuel_price_series: dict
    renewable_profiles: dict
    segment_multipliers: tuple[float, ...]
    market_cap: float = 600.0
    strategic_group_name: str | None = None
    reward: str = "average_price"
    segment_scheme: str = DEFAULT_SEGMENT_SCHEME
    normalization_bounds: dict | None = None
    initial_clearing_price: float | None = None
    episodes: int = 200
    eval_episodes: int = 20
    rl_hyperparameters: DdpgConfig = field(default_factory=DdpgConfig)
    seed: int = 0
    schema_version: int = SCHEMA_VERSION

    @property
    def steps(self) -> int:
        return len(self.demand_series)

    @property
    def catalog(self) -> GencoGroupCatalog:
        return GencoGroupCatalog(self.groups, {g.id: g.name for g in self.gencos})

    @property
    def total_capacity_mw(self) -> float:
        return math.fsum(p.capacity_mw for p in self.plants)

    def plant_map(self) -> dict:
        return {p.id: p for p in self.plants}

    def group(self, name: str) -> StrategicGroup:
        return build_group(self.catalog, name, self.plants, self.gencos)

    def fuel_prices_at(self, t: int) -> dict:
        return {fuel: series[t] for fuel, series in self.fuel_price_series.items()}

    def with_overrides(self, **changes) -> "ScenarioConfig":
        cfg = replace(self, **changes)
        validate(cfg)
        return cfg


@dataclass(frozen=True)
class BanditScenario:
    """Single-state continuous bandit with reward -(a - optimum)^2."""

    name: str
    optimum: float = 0.3
    steps: int = 5000
    rl_hyperparameters: DdpgConfig = field(default_factory=lambda: DdpgConfig(state_dim=1))
    seed: int = 0
    schema_version: int = SCHEMA_VERSION


# validation ---------------------------------------------------------------

def _series(d, key, n=None, positive=False):
    if key not in d:
        raise ScenarioError(key, "missing")
    try:
        values = tuple(float(x) for x in d[key])
    except (TypeError, ValueError):
        raise ScenarioError(key, "expected a list of numbers") from None
    if n is not None and len(values) != n:
        raise ScenarioError(key, f"expected {n} values, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise ScenarioError(key, "values must be finite")
    if positive and not all(v > 0 for v in values):
        raise ScenarioError(key, "values must be > 0")
    return values


def validate(cfg: ScenarioConfig) -> None:
    n = fleet.STEPS_PER_YEAR
    if len(cfg.demand_series) != n:
        raise ScenarioError("series.demand_mw", f"expected {n} values, got {len(cfg.demand_series)}")
    if any(not d > 0 for d in cfg.demand_series):
        raise ScenarioError("series.demand_mw", "demand must be > 0 everywhere")
    if len(cfg.carbon_price_series) != n:
        raise ScenarioError("series.carbon_price", f"expected {n} values, got {len(cfg.carbon_price_series)}")
    for fuel_name, s in cfg.fuel_price_series.items():
        if len(s) != n:
            raise ScenarioError(f"series.fuel_prices.{fuel_name}", f"expected {n} values, got {len(s)}")
    for fuel_name in ("gas", "coal"):
        if fuel_name not in cfg.fuel_price_series:
            raise ScenarioError(f"series.fuel_prices.{fuel_name}", "missing (part of the agent's state)")
    for tech, s in cfg.renewable_profiles.items():
        if len(s) != n:
            raise ScenarioError(f"series.renewable_profiles.{tech}", f"expected {n} values, got {len(s)}")
        if any(not 0 <= v <= 1 for v in s):
            raise ScenarioError(f"series.renewable_profiles.{tech}", "availability must lie in [0, 1]")
    if len(cfg.segment_multipliers) != fleet.N_SEGMENTS:
        raise ScenarioError("market.segment_multipliers",
                            f"expected {fleet.N_SEGMENTS} values, got {len(cfg.segment_multipliers)}")
    if any(not m > 0 for m in cfg.segment_multipliers):
        raise ScenarioError("market.segment_multipliers", "values must be > 0")
    if not cfg.market_cap > 0:
        raise ScenarioError("market.cap", f"must be > 0, got {cfg.market_cap}")
    if cfg.reward not in REWARDS:
        raise ScenarioError("market.reward", f"must be one of {REWARDS}, got {cfg.reward!r}")
    if cfg.episodes <= 0 or cfg.eval_episodes <= 0:
        raise ScenarioError("training", "episodes and eval_episodes must be positive")

    plant_ids = [p.id for p in cfg.plants]
    if len(set(plant_ids)) != len(plant_ids):
        raise ScenarioError("plants", "duplicate plant ids")
    genco_ids = {g.id for g in cfg.gencos}
    if len(genco_ids) != len(cfg.gencos):
        raise ScenarioError("gencos", "duplicate GenCo ids")
    owner = {}
    for g in cfg.gencos:
        for pid in g.plant_ids:
            if pid in owner:
                raise ScenarioError("gencos", f"plant {pid} belongs to both {owner[pid]} and {g.id}")
            owner[pid] = g.id
    for p in cfg.plants:
        if p.genco_id not in genco_ids:
            raise ScenarioError(f"plants.{p.id}.genco", f"unknown GenCo {p.genco_id!r}")
        if owner.get(p.id) != p.genco_id:
            raise ScenarioError(f"plants.{p.id}", "not listed by its GenCo")
        if p.fuel.value not in ZERO_FUEL and p.fuel.value not in cfg.fuel_price_series:
            raise ScenarioError(f"series.fuel_prices.{p.fuel.value}", f"missing, needed by plant {p.id}")
        if p.fuel.value in ("wind", "solar") and p.fuel.value not in cfg.renewable_profiles:
            raise ScenarioError(f"series.renewable_profiles.{p.fuel.value}", f"missing, needed by plant {p.id}")

    names = set()
    for r in cfg.groups:
        if r.name in names:
            raise ScenarioError("groups", f"duplicate group {r.name!r}")
        names.add(r.name)
        build_group(cfg.catalog, r.name, cfg.plants, cfg.gencos)
    if cfg.strategic_group_name is not None:
        try:
            cfg.catalog.find(cfg.strategic_group_name)
        except KeyError:
            raise ScenarioError("strategic_group", f"unknown group {cfg.strategic_group_name!r}") from None

    if cfg.normalization_bounds is not None:
        for feat in STATE_FEATURES:
            if feat not in cfg.normalization_bounds:
                raise ScenarioError(f"normalization_bounds.{feat}", "missing")
            lo, hi = cfg.normalization_bounds[feat]
            if not lo < hi:
                raise ScenarioError(f"normalization_bounds.{feat}", f"min {lo} must be below max {hi}")

    # the full fleet must cover every segment without strategic withholding
    peak_mult = max(cfg.segment_multipliers)
    for t in range(n):
        avail = math.fsum(
            available_mw(p, cfg.renewable_profiles[p.fuel.value][t] if p.fuel.value in cfg.renewable_profiles else None)
            for p in cfg.plants
        )
        if avail < cfg.demand_series[t] * peak_mult:
            raise ScenarioError("series.demand_mw",
                                f"step {t}: peak segment demand exceeds available capacity {avail:.1f} MW")


# (de)serialization --------------------------------------------------------

def _plant_to_dict(p: PowerPlant) -> dict:
    return {
        "id": p.id, "genco": p.genco_id, "fuel": p.fuel.value, "capacity_mw": p.capacity_mw,
        "efficiency": p.efficiency, "carbon_intensity": p.carbon_intensity_t_per_mwh,
        "variable_om": p.variable_om_gbp_per_mwh, "availability": p.availability_factor,
    }


def to_dict(cfg) -> dict:
    if isinstance(cfg, BanditScenario):
        return {
            "schema_version": cfg.schema_version, "kind": "bandit", "name": cfg.name, "seed": cfg.seed,
            "bandit": {"optimum": cfg.optimum, "steps": cfg.steps},
            "rl_hyperparameters": cfg.rl_hyperparameters.to_dict(),
        }
    return {
        "schema_version": cfg.schema_version,
        "kind": "market",
        "name": cfg.name,
        "seed": cfg.seed,
        "strategic_group": cfg.strategic_group_name,
        "market": {
            "cap": cfg.market_cap,
            "reward": cfg.reward,
            "segment_scheme": cfg.segment_scheme,
            "segment_multipliers": list(cfg.segment_multipliers),
            "initial_clearing_price": cfg.initial_clearing_price,
        },
        "normalization_bounds": (None if cfg.normalization_bounds is None
                                 else {k: list(v) for k, v in cfg.normalization_bounds.items()}),
        "training": {"episodes": cfg.episodes, "eval_episodes": cfg.eval_episodes},
        "rl_hyperparameters": cfg.rl_hyperparameters.to_dict(),
        "series": {
            "demand_mw": list(cfg.demand_series),
            "carbon_price": list(cfg.carbon_price_series),
            "fuel_prices": {k: list(v) for k, v in cfg.fuel_price_series.items()},
            "renewable_profiles": {k: list(v) for k, v in cfg.renewable_profiles.items()},
        },
        "gencos": [{"id": g.id, "name": g.name} for g in cfg.gencos],
        "groups": [{"name": r.name, "slug": r.slug, "members": list(r.members),
                    "capacity_mw": r.capacity_mw, "plants": r.n_plants} for r in cfg.groups],
        "plants": [_plant_to_dict(p) for p in cfg.plants],
    }


def _rl(d):
    try:
        return DdpgConfig.from_dict(d.get("rl_hyperparameters"))
    except (TypeError, ValueError) as exc:
        raise ScenarioError("rl_hyperparameters", str(exc)) from None


def from_dict(d: dict):
    if not isinstance(d, dict):
        raise ScenarioError("<root>", "expected a mapping")
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    kind = d.get("kind", "market")
    if kind == "bandit":
        b = d.get("bandit", {})
        return BanditScenario(str(d.get("name", "bandit")), float(b.get("optimum", 0.3)),
                              int(b.get("steps", 5000)), _rl(d), int(d.get("seed", 0)))
    if kind != "market":
        raise ScenarioError("kind", f"expected 'market' or 'bandit', got {kind!r}")

    market = d.get("market") or {}
    series = d.get("series") or {}
    training = d.get("training") or {}
    n = fleet.STEPS_PER_YEAR

    plants = []
    for k, pd in enumerate(d.get("plants") or []):
        try:
            plants.append(PowerPlant(
                str(pd["id"]), str(pd["genco"]), Fuel(pd["fuel"]), float(pd["capacity_mw"]),
                float(pd.get("efficiency", 1.0)), float(pd.get("carbon_intensity", 0.0)),
                float(pd.get("variable_om", 0.0)), float(pd.get("availability", 1.0)),
            ))
        except KeyError as exc:
            raise ScenarioError(f"plants[{k}]", f"missing field {exc}") from None
        except ValueError as exc:
            raise ScenarioError(f"plants[{k}]", str(exc)) from None
    members = {}
    for p in plants:
        members.setdefault(p.genco_id, []).append(p.id)
    gencos = []
    for k, gd in enumerate(d.get("gencos") or []):
        if "id" not in gd:
            raise ScenarioError(f"gencos[{k}]", "missing field 'id'")
        gencos.append(GenCo(str(gd["id"]), str(gd.get("name", gd["id"])), tuple(members.get(str(gd["id"]), ()))))
    groups = []
    for k, gd in enumerate(d.get("groups") or []):
        try:
            groups.append(GroupRow(str(gd["name"]), str(gd.get("slug", gd["name"])),
                                   tuple(str(m) for m in gd["members"]), float(gd["capacity_mw"]),
                                   int(gd["plants"])))
        except KeyError as exc:
            raise ScenarioError(f"groups[{k}]", f"missing field {exc}") from None

    fuel_prices = {str(k): _series(series.get("fuel_prices", {}), k, n)
                   for k in (series.get("fuel_prices") or {})}
    profiles = {str(k): _series(series.get("renewable_profiles", {}), k, n)
                for k in (series.get("renewable_profiles") or {})}
    bounds = d.get("normalization_bounds")
    if bounds is not None:
        bounds = {str(k): (float(v[0]), float(v[1])) for k, v in bounds.items()}
    init_price = market.get("initial_clearing_price")

    try:
        demand = _series(series, "demand_mw")
    except ScenarioError as exc:
        raise ScenarioError("series.demand_mw", str(exc).split(": ", 1)[1]) from None
    try:
        carbon = _series(series, "carbon_price")
    except ScenarioError as exc:
        raise ScenarioError("series.carbon_price", str(exc).split(": ", 1)[1]) from None
    try:
        multipliers = _series(market, "segment_multipliers")
    except ScenarioError as exc:
        raise ScenarioError("market.segment_multipliers", str(exc).split(": ", 1)[1]) from None

    cfg = ScenarioConfig(
        name=str(d.get("name", "scenario")),
        plants=tuple(plants),
        gencos=tuple(gencos),
        groups=tuple(groups),
        demand_series=demand,
        carbon_price_series=carbon,
        fuel_price_series=fuel_prices,
        renewable_profiles=profiles,
        segment_multipliers=multipliers,
        market_cap=float(market.get("cap", 600.0)),
        strategic_group_name=d.get("strategic_group"),
        reward=str(market.get("reward", "average_price")),
        segment_scheme=str(market.get("segment_scheme", DEFAULT_SEGMENT_SCHEME)),
        normalization_bounds=bounds,
        initial_clearing_price=None if init_price is None else float(init_price),
        episodes=int(training.get("episodes", 200)),
        eval_episodes=int(training.get("eval_episodes", 20)),
        rl_hyperparameters=_rl(d),
        seed=int(d.get("seed", 0)),
    )
    validate(cfg)
    return cfg


def resolve_path(path_or_name) -> Path:
    p = Path(path_or_name)
    if p.exists() or str(path_or_name) not in BUNDLED:
        return p
    return Path(str(resources.files("marketpower") / "data" / "scenarios" / f"{path_or_name}.yaml"))


def load_scenario(path_or_name):
    """Load and validate a scenario file, or a bundled scenario by name."""
    path = resolve_path(path_or_name)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(str(path), f"cannot read: {exc.strerror or exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(str(path), f"parse error: {exc}") from None
    return from_dict(data)


def dumps(cfg) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, default_flow_style=None, width=100)


def save_scenario(cfg, path) -> None:
    Path(path).write_text(dumps(cfg), encoding="utf-8")


def representative_profiles(cfg: ScenarioConfig) -> dict:
    """The 192-step demand and renewable availability series as arrays."""
    n = fleet.STEPS_PER_YEAR
    if len(cfg.demand_series) != n:
        raise ScenarioError("series.demand_mw", f"expected {n} values, got {len(cfg.demand_series)}")
    out = {"demand_mw": np.array(cfg.demand_series)}
    for tech in ("wind", "solar"):
        if tech not in cfg.renewable_profiles:
            raise ScenarioError(f"series.renewable_profiles.{tech}", "missing")
        s = cfg.renewable_profiles[tech]
        if len(s) != n:
            raise ScenarioError(f"series.renewable_profiles.{tech}", f"expected {n} values, got {len(s)}")
        out[tech] = np.array(s)
    return out


# bundled scenario recipes -------------------------------------------------

UK_TOTAL_CAPACITY_MW = 85714.3  # 30,000 MW is ~35% of the fleet
MEAN_DEMAND_FRACTION = 0.34
NAMED_MIXES = {
    "orsted": {"wind": 1.0},
    "drax": {"coal": 0.34, "other": 0.66},
    "scottish-power": {"wind": 0.5, "gas": 0.45, "hydro": 0.05},
    "uniper": {"gas": 0.7, "coal": 0.3},
    "sse": {"wind": 0.4, "gas": 0.4, "hydro": 0.2},
    "rwe": {"gas": 0.75, "coal": 0.25},
    "edf": {"nuclear": 0.7, "coal": 0.2, "gas": 0.1},
}
FILLER_MIX = {"gas": 0.45, "wind": 0.2, "solar": 0.15, "nuclear": 0.05, "coal": 0.05,
              "other": 0.05, "hydro": 0.05}
DESK_PLANT_COUNTS = {"orsted": 2, "drax": 1, "scottish-power": 4, "uniper": 2, "sse": 5,
                     "rwe": 2, "edf": 3}
FULL_PLANT_COUNTS = {members[0]: n for members, _, n in GENCO_GROUPS[:7]}
MEAN_PRICES = {"gas": 20.0, "coal": 9.0, "nuclear": 5.0, "other": 18.0}
MEAN_CARBON = 25.0


def _named_capacity():
    return {members[0]: cap for members, cap, _ in GENCO_GROUPS[:7]}


def _series_block(total_capacity, seed):
    return dict(
        demand_series=tuple(float(x) for x in fleet.demand_profile(MEAN_DEMAND_FRACTION * total_capacity, seed + 1)),
        carbon_price_series=tuple(float(x) for x in fleet.seasonal_series(MEAN_CARBON, seed + 2, swing=0.05)),
        fuel_price_series={
            "gas": tuple(float(x) for x in fleet.seasonal_series(MEAN_PRICES["gas"], seed + 3)),
            "coal": tuple(float(x) for x in fleet.seasonal_series(MEAN_PRICES["coal"], seed + 4)),
            "nuclear": (MEAN_PRICES["nuclear"],) * fleet.STEPS_PER_YEAR,
            "other": (MEAN_PRICES["other"],) * fleet.STEPS_PER_YEAR,
        },
        renewable_profiles={
            "wind": tuple(float(x) for x in fleet.wind_profile(seed + 5)),
            "solar": tuple(float(x) for x in fleet.solar_profile()),
        },
        segment_multipliers=tuple(fleet.segment_multipliers()),
    )


def desk_small(seed: int = 2018) -> ScenarioConfig:
    """40 plants, 8 GenCos, group capacity shares at one tenth of the UK fleet."""
    scale = 0.1
    caps = _named_capacity()
    targets = [fleet.GencoTarget(gid, GROUP_MEMBERS[gid], round(caps[gid] * scale, 1),
                                 DESK_PLANT_COUNTS[gid], NAMED_MIXES[gid]) for gid in GROUP_MEMBERS]
    filler = round((UK_TOTAL_CAPACITY_MW - sum(caps.values())) * scale, 1)
    targets.append(fleet.GencoTarget("other", "Other GenCos", filler, 21, FILLER_MIX))
    plants, gencos = fleet.generate_synthetic_fleet(targets, seed)
    total = math.fsum(p.capacity_mw for p in plants)
    cfg = ScenarioConfig(
        name="desk-small", plants=tuple(plants), gencos=tuple(gencos),
        groups=genco_group_rows(scale, DESK_PLANT_COUNTS), seed=seed, **_series_block(total, seed),
        episodes=40, rl_hyperparameters=DdpgConfig(optimizer="adam"),
    )
    validate(cfg)
    return cfg


def uk2018_full(seed: int = 2018) -> ScenarioConfig:
    """60 GenCos and 1085 plants at full group scale."""
    caps = _named_capacity()
    targets = [fleet.GencoTarget(gid, GROUP_MEMBERS[gid], caps[gid], FULL_PLANT_COUNTS[gid],
                                 NAMED_MIXES[gid]) for gid in GROUP_MEMBERS]
    n_filler_gencos = 60 - len(targets)
    n_filler_plants = 1085 - sum(FULL_PLANT_COUNTS.values())
    filler_total = round(UK_TOTAL_CAPACITY_MW - sum(caps.values()), 1)
    rng = np.random.default_rng(seed)
    counts = 1 + rng.multinomial(n_filler_plants - n_filler_gencos, rng.dirichlet(np.ones(n_filler_gencos)))
    weights = counts * rng.lognormal(0.0, 0.3, n_filler_gencos)
    shares = np.round(filler_total * weights / weights.sum(), 1)
    shares[-1] = round(filler_total - shares[:-1].sum(), 1)
    for k in range(n_filler_gencos):
        targets.append(fleet.GencoTarget(f"other-{k + 1:02d}", f"Other GenCo {k + 1}", float(shares[k]),
                                         int(counts[k]), FILLER_MIX))
    plants, gencos = fleet.generate_synthetic_fleet(targets, seed)
    total = math.fsum(p.capacity_mw for p in plants)
    cfg = ScenarioConfig(
        name="uk2018-full", plants=tuple(plants), gencos=tuple(gencos), groups=genco_group_rows(),
        seed=seed, **_series_block(total, seed),
    )
    validate(cfg)
    return cfg


def toy_bandit(seed: int = 7) -> BanditScenario:
    rl = DdpgConfig(state_dim=1, action_dim=1, hidden_sizes=(16, 16), hidden_activation="tanh",
                    gamma=0.0, tau=0.05, actor_lr=1e-3, critic_lr=1e-2, batch_size=32, buffer_capacity=5000,
                    optimizer="adam", ou_theta=0.15, ou_sigma=0.3, ou_sigma_final=0.05)
    return BanditScenario("toy-bandit", 0.3, 5000, rl, seed)


def write_bundled(out_dir=None) -> list[Path]:
    """Regenerate the bundled scenario files."""
    out = Path(out_dir) if out_dir else Path(str(resources.files("marketpower") / "data" / "scenarios"))
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, make in (("uk2018-full", uk2018_full), ("desk-small", desk_small), ("toy-bandit", toy_bandit)):
        path = out / f"{name}.yaml"
        save_scenario(make(), path)
        written.append(path)
    return written
