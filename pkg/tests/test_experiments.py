import numpy as np
import pytest

from marketpower import cli
from marketpower import experiments as ex
from marketpower.env import MarketEnv, baseline_mean_price
from marketpower.scenario import load_scenario


@pytest.fixture(scope="module")
def quick(desk):
    """A short training run used by several output checks."""
    return ex.train_run(desk, "edf", 600, episodes=3, seed=1, eval_episodes=2)


def test_result_contents(quick):
    assert quick.group_capacity_mw == pytest.approx(1476.3, abs=0.05)
    assert len(quick.reward_series) == 3 * 192
    assert len(quick.eval_prices) == 2
    assert 0 <= quick.final_mean_price <= quick.market_cap
    assert sum(c for _, _, c in quick.bid_histogram) == len(quick.bids)
    assert 0 < quick.capacity_share < 1


def test_histogram_spans_zero_to_cap(quick):
    assert quick.bid_histogram[0][0] == 0.0
    assert quick.bid_histogram[-1][1] == 600.0
    assert len(quick.bid_histogram) == ex.HISTOGRAM_BINS


def test_ecdf_shape():
    pts = ex.ecdf([3.0, 1.0, 3.0, 2.0])
    assert pts == [(1.0, 0.25), (2.0, 0.5), (3.0, 1.0)]
    assert ex.ecdf([]) == []


def test_baseline_result_is_the_srmc_average(desk):
    r = ex.baseline_run(desk)
    assert r.final_mean_price == pytest.approx(baseline_mean_price(desk))
    assert r.group_name == "" and len(r.reward_series) == 192
    assert ex.baseline_run(desk) == r


def test_train_run_is_reproducible(desk, quick):
    again = ex.train_run(desk, "edf", 600, episodes=3, seed=1, eval_episodes=2)
    assert again == quick
    other = ex.train_run(desk, "edf", 600, episodes=3, seed=2, eval_episodes=2)
    assert other.reward_series != quick.reward_series


def test_derived_seeds_are_stable_and_distinct():
    assert ex.derive_seed(0, "a", 600.0) == ex.derive_seed(0, "a", 600.0)
    seeds = {ex.derive_seed(s, g, c) for s in range(3) for g in "ab" for c in (150.0, 600.0)}
    assert len(seeds) == 12


def test_emitted_files_round_trip(quick, desk, tmp_path):
    results = [ex.baseline_run(desk), quick]
    written = ex.emit_outputs(results, tmp_path)
    names = {p.name for p in written}
    for table in ("reward_series", "capacity_vs_price", "bid_histogram", "ecdf", "sensitivity"):
        assert f"{table}.csv" in names and f"{table}.svg" in names
        assert (tmp_path / f"{table}.svg").read_text().startswith("<svg")
    for name, (header, rows) in ex.tables(results).items():
        got_header, got_rows = ex.read_csv(tmp_path / name)
        assert got_header == header
        assert got_rows == [tuple(r) for r in rows]
        assert any("gbp" in h or h in ("count", "cumulative_fraction") for h in header)
    _, ecdf_rows = ex.read_csv(tmp_path / "ecdf.csv")
    assert ecdf_rows[-1][-1] == 1.0


def test_emit_reports_the_path_on_failure(quick, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        ex.emit_outputs([quick], blocker / "sub")


def test_sweep_orders_by_capacity_and_seed(desk):
    rs = ex.sweep_capacity(desk, ["edf", "orsted"], 600, episodes=1, seeds=[2, 0, 1], eval_episodes=1)
    assert [(r.group_name, r.seed) for r in rs] == [
        ("Orsted", 0), ("Orsted", 1), ("Orsted", 2), ("EDF Energy", 0), ("EDF Energy", 1), ("EDF Energy", 2)]
    assert len({r.group_capacity_mw for r in rs if r.group_name == "Orsted"}) == 1


def test_cap_sensitivity_rows_and_bounds(desk):
    rs = ex.cap_sensitivity(desk, "sse", [150, 300, 450, 600], episodes=1, eval_episodes=1)
    table = ex.sensitivity_table(rs)
    assert [c for c, _ in table] == [150, 300, 450, 600]
    assert all(p <= c for c, p in table)
    with pytest.raises(ValueError):
        ex.cap_sensitivity(desk, "sse", [600, 150], episodes=1)


def test_parallel_outputs_identical_to_serial(desk, tmp_path):
    args = dict(group_names=["orsted", "drax"], market_cap=600, episodes=1, seeds=[0, 1], eval_episodes=1)
    serial = ex.sweep_capacity(desk, workers=1, **args)
    parallel = ex.sweep_capacity(desk, workers=2, **args)
    ex.emit_outputs(serial, tmp_path / "s")
    ex.emit_outputs(parallel, tmp_path / "p")
    for f in sorted((tmp_path / "s").iterdir()):
        assert f.read_bytes() == (tmp_path / "p" / f.name).read_bytes()


def test_workers_env_override(monkeypatch):
    monkeypatch.setenv(ex.WORKERS_ENV, "3")
    assert ex.resolve_workers(None) == 3
    assert ex.resolve_workers(2) == 2


def test_replay_checkpoint_reproduces_greedy_year(desk, tmp_path):
    path = tmp_path / "agent.json"
    trained = ex.train_run(desk, "edf", 600, episodes=2, seed=0, eval_episodes=1, checkpoint_path=path)
    replay = ex.replay_checkpoint(desk, "edf", path)
    assert replay.final_mean_price == pytest.approx(trained.final_mean_price, abs=1e-9)


def test_bandit_trace_moves_toward_the_optimum():
    bandit = load_scenario("toy-bandit")
    trace = ex.train_bandit(bandit, seed=0, steps=1500)
    assert len(trace) == 1500
    assert abs(trace[-1] - 0.3) < abs(trace[40] - 0.3) + 0.05


# command line --------------------------------------------------------------------

def test_cli_baseline_and_train(tmp_path, capsys):
    assert cli.main(["baseline", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "b" / "capacity_vs_price.csv").exists()
    code = cli.main(["train", "--group", "orsted", "--episodes", "1", "--seeds", "0,1",
                     "--checkpoint", "--out", str(tmp_path / "t")])
    assert code == 0
    assert (tmp_path / "t" / "checkpoint-seed1.json").exists()
    code = cli.main(["replay-checkpoint", "--group", "orsted", "--checkpoint",
                     str(tmp_path / "t" / "checkpoint-seed0.json"), "--out", str(tmp_path / "r")])
    assert code == 0
    assert "final_mean_price" in capsys.readouterr().out


def test_cli_rerun_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["sweep-capacity", "--group", "orsted", "--group", "uniper", "--episodes", "1",
                         "--seeds", "4", "--out", str(tmp_path / d)]) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


@pytest.mark.parametrize("argv", [
    ["train", "--group", "nobody", "--episodes", "1"],
    ["train", "--episodes", "1"],
    ["baseline", "--scenario", "/nonexistent.yaml"],
    ["baseline", "--cap", "-1"],
    ["cap-sensitivity", "--group", "edf", "--caps", "600,150", "--episodes", "1"],
    ["baseline", "--scenario", "toy-bandit"],
])
def test_cli_validation_errors_exit_nonzero(argv, tmp_path, capsys):
    assert cli.main(argv + ["--out", str(tmp_path)]) != 0
    assert "error" in capsys.readouterr().err


def test_cli_rejects_bad_seed_list():
    with pytest.raises(SystemExit) as exc:
        cli.main(["baseline", "--seeds", "a,b"])
    assert exc.value.code != 0


def test_cli_bandit_training(tmp_path):
    assert cli.main(["train", "--scenario", "toy-bandit", "--episodes", "100", "--out", str(tmp_path)]) == 0
    header, rows = ex.read_csv(tmp_path / "bandit_trace.csv")
    assert header == ["seed", "step", "greedy_action"] and len(rows) == 100


def test_baseline_prices_depend_only_on_cap(desk):
    env = MarketEnv(desk, None, 150)
    assert all(0 <= env.clear(0.0, t).average_price <= 150 for t in range(0, 192, 7))
    assert np.isclose(ex.baseline_run(desk, 600).final_mean_price, baseline_mean_price(desk, 600))
