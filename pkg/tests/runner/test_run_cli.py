import json
from pathlib import Path

import pytest

from runner.commands import get_command, list_commands
from runner.run import EXIT_BAD_CONFIG, EXIT_FAILED, EXIT_OK, main

SCENARIOS = Path(__file__).resolve().parents[2] / "config" / "scenarios"
FOUR = str(SCENARIOS / "four_particles.yaml")
FOUR_TEXT = Path(FOUR).read_text(encoding="utf-8")


@pytest.fixture(autouse=True)
def _in_tmp(tmp_path, monkeypatch):
    # logs/ and outputs/ are relative to the working directory
    monkeypatch.chdir(tmp_path)


def _manifest(out: Path) -> dict:
    return json.loads((out / "manifest.json").read_text(encoding="utf-8"))


def test_registry():
    assert set(list_commands()) == {
        "sticky", "hopflax", "flowmap", "genpot", "fronttrack", "mc-stats", "fm-shocks", "crosscheck",
    }
    with pytest.raises(ValueError, match="Available"):
        get_command("nope")


def test_unknown_command_is_an_argparse_error():
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2


def test_crosscheck_passes_on_four_particles(tmp_path):
    out = tmp_path / "cc"
    assert main(["crosscheck", "--config", FOUR, "--out", str(out)]) == EXIT_OK
    manifest = _manifest(out)
    assert manifest["command"] == "crosscheck"
    assert manifest["status"]["passed"] is True
    assert manifest["artifacts"] == ["crosscheck.csv", "crosscheck.json"]
    assert manifest["seed"] == 7
    assert (tmp_path / "logs" / "runs_log.csv").exists()


@pytest.mark.parametrize("command, expected", [
    ("sticky", {"worldlines.csv", "state.csv"}),
    ("hopflax", {"hull_knots.csv", "hull_pieces.csv"}),
    ("flowmap", {"partition.csv", "gvp.csv"}),
    ("genpot", {"profile.csv", "branches.csv"}),
])
def test_exact_solver_commands(tmp_path, command, expected):
    out = tmp_path / command
    assert main([command, "--config", FOUR, "--out", str(out)]) == EXIT_OK
    assert expected <= set(_manifest(out)["artifacts"])


def test_fronttrack_on_burgers_blocks(tmp_path):
    out = tmp_path / "ft"
    code = main(["fronttrack", "--config", str(SCENARIOS / "burgers_blocks.yaml"), "--out", str(out)])
    assert code == EXIT_OK
    status = _manifest(out)["status"]
    assert status["first_interaction_time"] == pytest.approx(1.0)
    assert status["samples"]["3"] == [3, 0]
    assert {"worldlines.csv", "fronts.csv"} <= set(_manifest(out)["artifacts"])


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sticky", "--config", FOUR, "--out", str(a)]) == EXIT_OK
    assert main(["sticky", "--config", FOUR, "--out", str(b)]) == EXIT_OK
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_missing_config_exits_with_bad_config(tmp_path):
    assert main(["sticky", "--config", str(tmp_path / "missing.yaml")]) == EXIT_BAD_CONFIG


def test_malformed_yaml_exits_with_bad_config(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("name: bad\ntimes: [1, 2\n", encoding="utf-8")
    assert main(["sticky", "--config", str(path)]) == EXIT_BAD_CONFIG


def test_missing_section_exits_with_bad_config(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("name: empty\n", encoding="utf-8")
    assert main(["fronttrack", "--config", str(path), "--out", str(tmp_path / "o")]) == EXIT_BAD_CONFIG


def test_bad_workers_exits_with_bad_config():
    assert main(["sticky", "--config", FOUR, "--workers", "0"]) == EXIT_BAD_CONFIG


def test_zero_tolerance_is_not_replaced_by_the_default(tmp_path):
    out = tmp_path / "strict"
    main(["genpot", "--config", FOUR, "--tolerance", "0", "--out", str(out)])
    manifest = _manifest(out)
    assert manifest["tolerance"] == 0.0
    assert manifest["scenario"]["tolerance"] == 0.0


def test_zero_tolerance_from_the_scenario(tmp_path):
    path = tmp_path / "strict.yaml"
    path.write_text(FOUR_TEXT + "tolerance: 0\n", encoding="utf-8")
    out = tmp_path / "strict"
    main(["genpot", "--config", str(path), "--out", str(out)])
    assert _manifest(out)["tolerance"] == 0.0


def test_negative_tolerance_exits_with_bad_config():
    assert main(["sticky", "--config", FOUR, "--tolerance", "-1"]) == EXIT_BAD_CONFIG


def test_mc_stats_without_hierarchy(tmp_path):
    path = tmp_path / "single.yaml"
    path.write_text(
        "name: single\nseed: 1\nlaw:\n  kind: riemann\n  location_spread: 1.0\n"
        "flux:\n  kind: burgers\n  n: 2\nensemble:\n  n: 1\n  t: 0.5\n",
        encoding="utf-8",
    )
    assert main(["mc-stats", "--config", str(path), "--out", str(tmp_path / "mc")]) == EXIT_OK
    assert (tmp_path / "mc" / "estimate.json").exists()


def test_mc_stats_small_ensemble(tmp_path):
    path = tmp_path / "riemann.yaml"
    path.write_text(
        "name: small\nseed: 11\n"
        "flux:\n  kind: burgers\n  n: 2\n"
        "law:\n  kind: riemann\n  u_l: 1.0\n  u_r: 0.0\n  location_spread: 1.0\n"
        "ensemble:\n  n: 400\n  t: 0.5\n  xs: [0.0]\n  window: 0.2\n"
        "hierarchy:\n  order: first\n  k: 0\n  x: 0.0\n  t: 0.5\n  dt: 0.1\n  w: 0.2\n",
        encoding="utf-8",
    )
    out = tmp_path / "mc"
    code = main(["mc-stats", "--config", str(path), "--out", str(out)])
    assert code in (EXIT_OK, EXIT_FAILED)
    hierarchy = json.loads((out / "hierarchy.json").read_text(encoding="utf-8"))
    assert hierarchy["oracle"][0]["x"] == 0.0
    assert "first" in hierarchy
    assert _manifest(out)["seed"] == 11


def test_mc_stats_reports_both_hierarchies(tmp_path):
    path = tmp_path / "merging.yaml"
    path.write_text(
        "name: merging\nseed: 5\n"
        "flux:\n  kind: burgers\n  n: 3\n"
        "law:\n  kind: blocks\n  states: [2.0, 1.0, 0.0]\n  location_spread: 2.0\n  gap_range: [0.5, 1.5]\n"
        "ensemble:\n  n: 300\n  t: 1.0\n  xs: [0.0]\n  window: 0.2\n"
        "hierarchy:\n  order: both\n  k: 0\n  pair: [2, 0]\n  x: 0.0\n  t: 1.0\n  dt: 0.1\n  w: 0.2\n  eps: 0.2\n",
        encoding="utf-8",
    )
    out = tmp_path / "mc"
    code = main(["mc-stats", "--config", str(path), "--out", str(out)])
    hierarchy = json.loads((out / "hierarchy.json").read_text(encoding="utf-8"))
    assert {"first", "second"} <= set(hierarchy)
    assert hierarchy["first"]["interaction_crossed"] is True
    first_breaks = abs(hierarchy["first"]["residual"]) > 3.0 * hierarchy["first"]["stderr"]
    second_holds = abs(hierarchy["second"]["residual"]) <= 3.0 * hierarchy["second"]["stderr"]
    assert (code == EXIT_OK) == (first_breaks and second_holds)


def test_seed_flag_overrides_scenario(tmp_path):
    out = tmp_path / "seeded"
    assert main(["sticky", "--config", FOUR, "--seed", "123", "--out", str(out)]) == EXIT_OK
    manifest = _manifest(out)
    assert manifest["seed"] == 123
    assert manifest["scenario"]["seed"] == 123


def test_fm_shocks_small_grid(tmp_path):
    path = tmp_path / "brownian.yaml"
    path.write_text(
        "name: small_brownian\nseed: 2024\n"
        "law:\n  kind: brownian_potential\n  domain: [-10.0, 10.0]\n  variance: 1.0\n  grid_step: 0.05\n"
        "contacts:\n  t: 1.0\n  x_grid: {lo: -2.0, hi: 2.0, n: 41}\n  paths: 1\n  bins: 5\n",
        encoding="utf-8",
    )
    out = tmp_path / "fm"
    assert main(["fm-shocks", "--config", str(path), "--out", str(out)]) == EXIT_OK
    assert {"shocks.csv", "histogram.json", "mu_hist.csv", "nu_hist.csv"} <= set(_manifest(out)["artifacts"])
