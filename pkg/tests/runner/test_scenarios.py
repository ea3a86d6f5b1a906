from pathlib import Path

import pytest

from montecarlo.laws import LawKind
from runner.scenarios import ScenarioError, load_scenario, parse_scenario
from solvers.measures import Orientation

SCENARIOS = Path(__file__).resolve().parents[2] / "config" / "scenarios"


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.yaml")), ids=lambda p: p.stem)
def test_bundled_scenarios_load(path):
    cfg = load_scenario(str(path))
    assert cfg.name == path.stem


def test_four_particle_scenario_sections():
    cfg = load_scenario(str(SCENARIOS / "four_particles.yaml"))
    sys = cfg.particles.to_system()
    assert len(sys) == 4
    assert sys.total_mass == pytest.approx(1.0)
    assert cfg.genpot.orientation is Orientation.TABLE
    assert len(cfg.flowmap.y_grid.points()) == 121
    assert cfg.resolved_seed() == 7
    assert cfg.resolved_seed(99) == 99


def test_law_section_builds_the_law():
    cfg = load_scenario(str(SCENARIOS / "merging_shocks.yaml"))
    law = cfg.law.to_law(cfg.resolved_seed())
    assert law.kind is LawKind.BLOCKS
    assert law.gap_range == (0.5, 1.5)
    assert cfg.flux.to_table().states == (0.0, 1.0, 2.0)
    assert cfg.hierarchy.pair == (2, 0)
    assert cfg.hierarchy.order == "both"


def test_blocks_section_builds_fronts():
    cfg = load_scenario(str(SCENARIOS / "burgers_blocks.yaml"))
    fl = cfg.blocks.to_front_list(cfg.flux.to_table())
    assert len(fl) == 3


def test_yaml_syntax_error_reports_the_line():
    with pytest.raises(ScenarioError, match=r"line \d+"):
        parse_scenario("name: broken\ntimes: [1, 2\n", "broken.yaml")


def test_validation_error_reports_the_field_path():
    text = "particles:\n  masses: [1.0, oops]\n  positions: [0.0, 1.0]\n  velocities: [0.0, 0.0]\n"
    with pytest.raises(ScenarioError, match=r"particles\.masses\.1"):
        parse_scenario(text)


def test_mismatched_particle_lengths():
    text = "particles:\n  masses: [1.0]\n  positions: [0.0, 1.0]\n  velocities: [0.0, 0.0]\n"
    with pytest.raises(ScenarioError, match="same length"):
        parse_scenario(text)


def test_top_level_must_be_a_mapping():
    with pytest.raises(ScenarioError, match="mapping"):
        parse_scenario("- 1\n- 2\n")


def test_empty_file_is_an_empty_scenario():
    cfg = parse_scenario("")
    with pytest.raises(ScenarioError, match="missing section"):
        cfg.require("particles")
    with pytest.raises(ScenarioError, match="seed"):
        cfg.resolved_seed()


def test_missing_file():
    with pytest.raises(ScenarioError, match="not found"):
        load_scenario("does/not/exist.yaml")
