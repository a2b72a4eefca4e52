import copy
import math
from dataclasses import replace

import numpy as np
import pytest
import yaml

from marketpower import fleet
from marketpower.scenario import (
    BanditScenario, GencoGroupCatalog, ScenarioError, build_group, desk_small, dumps, from_dict, load_scenario,
    representative_profiles, save_scenario, genco_group_rows, to_dict, toy_bandit, validate,
)

# capacity (MW) and plant count per GenCo group
GROUP_TABLE = [
    ("Orsted", 2738.7, 11),
    ("Drax Power Ltd", 4035.0, 3),
    ("Scottish Power", 4471.5, 49),
    ("Uniper UK Limited", 6605.0, 9),
    ("SSE", 8390.7, 130),
    ("RWE Generation SE", 8664.0, 11),
    ("EDF Energy", 14763.0, 14),
    ("{EDF Energy, RWE Generation SE}", 23427.0, 25),
    ("{EDF Energy, RWE Generation SE, SSE}", 31817.7, 155),
    ("{EDF Energy, RWE Generation SE, SSE, Uniper UK Ltd}", 38422.7, 164),
    ("{EDF Energy, RWE Generation SE, SSE, Uniper UK Ltd, Scottish Power}", 42894.2, 213),
    ("{EDF Energy, RWE Generation SE, SSE, Uniper UK Ltd, Scottish Power, Drax Power Ltd}", 46929.2, 216),
]


def test_full_scenario_fleet_size(uk_full):
    assert len(uk_full.plants) == 1085
    assert len(uk_full.gencos) == 60


@pytest.mark.parametrize("name,capacity,n_plants", GROUP_TABLE)
def test_full_scenario_groups_match_table(uk_full, name, capacity, n_plants):
    g = uk_full.group(name)
    assert g.capacity_mw == pytest.approx(capacity, abs=0.05)
    assert g.n_plants == n_plants


def test_group_additivity(uk_full):
    pair = uk_full.group("{EDF, RWE}")
    assert pair.capacity_mw == pytest.approx(uk_full.group("EDF Energy").capacity_mw
                                             + uk_full.group("RWE Generation SE").capacity_mw)
    assert pair.capacity_mw == pytest.approx(23427.0, abs=0.05)


def test_group_lookup_by_slug_and_unknown(uk_full):
    assert uk_full.group("edf+rwe").name == "{EDF Energy, RWE Generation SE}"
    with pytest.raises(KeyError):
        uk_full.group("{EDF, Nobody}")


def test_capacity_share_levels(uk_full):
    total = uk_full.total_capacity_mw
    assert 30_000 / total == pytest.approx(0.35, abs=0.01)
    assert 10_000 / total == pytest.approx(0.11, abs=0.01)


def test_desk_scenario_shape_and_shares(desk, uk_full):
    assert len(desk.plants) == 40
    assert len(desk.gencos) == 8
    for row in desk.groups:
        full_share = uk_full.group(row.name).capacity_mw / uk_full.total_capacity_mw
        desk_share = desk.group(row.name).capacity_mw / desk.total_capacity_mw
        assert desk_share == pytest.approx(full_share, rel=2e-3)


def test_catalog_group_check_catches_wrong_capacity(desk):
    rows = list(desk.groups)
    rows[0] = replace(rows[0], capacity_mw=rows[0].capacity_mw * 1.1)
    with pytest.raises(ScenarioError, match="groups"):
        validate(replace(desk, groups=tuple(rows)))


def test_build_group_without_fleet_uses_catalog():
    g = build_group(GencoGroupCatalog(genco_group_rows()), "EDF Energy")
    assert g.capacity_mw == 14763.0 and g.n_plants == 14 and g.genco_ids == {"edf"}


def test_profiles_have_192_points(desk):
    prof = representative_profiles(desk)
    assert fleet.STEPS_PER_YEAR == 192
    for series in prof.values():
        assert len(series) == 192


def test_constant_demand_profile(desk):
    flat = desk.with_overrides(demand_series=(3000.0,) * 192)
    d = representative_profiles(flat)["demand_mw"]
    assert np.all(d == d[0])


def test_bundled_peak_to_mean_ratio(desk, uk_full):
    for sc in (desk, uk_full):
        d = np.asarray(sc.demand_series)
        assert 1.2 <= d.max() / d.mean() <= 1.8


def test_segment_multipliers_descend_around_point_nine():
    m = fleet.segment_multipliers()
    assert len(m) == 20
    assert m == sorted(m, reverse=True)
    assert math.fsum(m) / 20 == pytest.approx(0.9)
    assert m[0] < 1.2 and m[-1] > 0.6


def test_nineteen_multipliers_rejected(desk):
    d = to_dict(desk)
    d["market"]["segment_multipliers"] = d["market"]["segment_multipliers"][:19]
    with pytest.raises(ScenarioError) as err:
        from_dict(d)
    assert err.value.field == "market.segment_multipliers"


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d["series"].__setitem__("demand_mw", d["series"]["demand_mw"][:100]), "series.demand_mw"),
    (lambda d: d["market"].__setitem__("cap", -5), "market.cap"),
    (lambda d: d["market"].__setitem__("reward", "utility"), "market.reward"),
    (lambda d: d.__setitem__("schema_version", 99), "schema_version"),
    (lambda d: d["series"]["fuel_prices"].pop("gas"), "series.fuel_prices.gas"),
    (lambda d: d["series"].__setitem__("demand_mw", [50000.0] * 192), "series.demand_mw"),
])
def test_validation_names_the_field(desk, mutate, field):
    d = copy.deepcopy(to_dict(desk))
    mutate(d)
    with pytest.raises(ScenarioError) as err:
        from_dict(d)
    assert err.value.field == field


def test_yaml_round_trip(desk, tmp_path):
    path = tmp_path / "s.yaml"
    save_scenario(desk, path)
    again = load_scenario(path)
    assert again == desk
    assert dumps(again) == dumps(desk)


def test_bundled_files_match_their_recipes(desk):
    assert dumps(desk) == dumps(desk_small())
    assert load_scenario("toy-bandit") == toy_bandit()


def test_bandit_scenario_loads():
    b = load_scenario("toy-bandit")
    assert isinstance(b, BanditScenario)
    assert b.optimum == 0.3 and b.steps == 5000


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("market: [unclosed")
    with pytest.raises(ScenarioError):
        load_scenario(bad)
    bad.write_text(yaml.safe_dump([1, 2]))
    with pytest.raises(ScenarioError):
        load_scenario(bad)


# synthetic fleets --------------------------------------------------------------

def test_fleet_hits_capacity_and_count():
    t = fleet.GencoTarget("orsted", "Orsted", 2738.7, 11, {"wind": 1.0})
    plants, gencos = fleet.generate_synthetic_fleet([t], seed=1)
    assert len(plants) == 11 and len(gencos[0].plant_ids) == 11
    assert math.fsum(p.capacity_mw for p in plants) == pytest.approx(2738.7, rel=5e-3)


def test_single_plant_fleet():
    plants, _ = fleet.generate_synthetic_fleet([fleet.GencoTarget("a", "A", 100.0, 1, {"gas": 1.0})], seed=0)
    assert len(plants) == 1 and plants[0].capacity_mw == 100.0


def test_fleet_is_deterministic():
    targets = [fleet.GencoTarget("a", "A", 5000.0, 9, {"gas": 0.5, "coal": 0.5}),
               fleet.GencoTarget("b", "B", 800.0, 4, {"wind": 1.0})]
    assert fleet.generate_synthetic_fleet(targets, 3) == fleet.generate_synthetic_fleet(targets, 3)
    assert fleet.generate_synthetic_fleet(targets, 3) != fleet.generate_synthetic_fleet(targets, 4)


def test_infeasible_fleet():
    with pytest.raises(fleet.InfeasibleFleetError):
        fleet.generate_synthetic_fleet([fleet.GencoTarget("a", "A", 10_000.0, 2)], 0, max_unit_mw=4000)
