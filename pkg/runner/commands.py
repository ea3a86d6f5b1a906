"""
CLI command registry. Each command reads the sections it needs from the
RunConfig, writes its artifacts through the ArtifactWriter and reports whether
its tolerance checks passed.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from montecarlo.hierarchy import hierarchy_verdict
from runner.config import config
from runner.plotting import branches_figure, histogram_figure, hull_figure
from runner.scenarios import RunConfig, ScenarioError
from runner.writers import ArtifactWriter
from services.crosscheck_service import CrosscheckService
from services.statistics_service import StatisticsService, shock_statistics
from solvers.flowmap import inverse_partition
from solvers.fronttrack import evolve as evolve_fronts
from solvers.fronttrack import rh_residual, total_variation
from solvers.genpot import (
    branch_table,
    entropy_check,
    monotonicity_scan,
    profile,
    sticky_velocity_field,
)
from solvers.hopflax import (
    conjugate_phi0,
    flux_A,
    hopf_potential,
    hull_positions,
    initial_potential_phi0,
    velocity_profile_a,
)
from solvers.measures import lower_convex_hull
from solvers.sticky import evolve, evolve_with_history, rankine_hugoniot_residual

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    writer:    ArtifactWriter
    tolerance: float
    seed:      Optional[int] = None
    workers:   int = 1


@dataclass
class CommandResult:
    passed: bool
    status: dict = field(default_factory=dict)


def _times(cfg: RunConfig) -> list[float]:
    cfg.require("times")
    return sorted(cfg.times)


# =============================================================================
# EXACT SOLVERS
# =============================================================================

def run_sticky(cfg: RunConfig, ctx: RunContext) -> CommandResult:
    cfg.require("particles")
    sys0 = cfg.particles.to_system()
    times = _times(cfg)
    _, history = evolve_with_history(sys0, times[-1])
    ctx.writer.csv("worldlines.csv", history.to_rows(), ["t", "x", "mass", "velocity", "cluster_id"])
    ctx.writer.csv(
        "collisions.csv", history.collision_rows(),
        ["t", "x", "mass", "velocity", "cluster_id", "members"],
    )
    state_rows = []
    for t in times:
        for p in evolve(sys0, t).particles:
            state_rows.append({
                "t": t, "cluster_id": p.cluster_id, "mass": p.mass, "position": p.position,
                "velocity": p.velocity, "members": " ".join(str(i) for i in p.members),
            })
    ctx.writer.csv("state.csv", state_rows)

    rh = rankine_hugoniot_residual(history, flux_A(velocity_profile_a(sys0))) if len(sys0) else 0.0
    return CommandResult(rh <= ctx.tolerance, {"collisions": len(history.events), "rh_residual": rh})


def run_hopflax(cfg: RunConfig, ctx: RunContext) -> CommandResult:
    cfg.require("particles")
    sys0 = cfg.particles.to_system()
    knot_rows, piece_rows = [], []
    for t in _times(cfg):
        potential = hopf_potential(sys0, t)
        hull = lower_convex_hull(potential)
        knots = [{"t": t, "m": m, "value": v, "hull": hull.evaluate(m)} for m, v in potential.knots]
        knot_rows.extend(knots)
        for piece in hull_positions(sys0, t, config.HULL_SLOPE_TOL):
            piece_rows.append({
                "t": t, "mass_lo": piece.mass_lo, "mass_hi": piece.mass_hi,
                "mass": piece.mass, "position": piece.position,
            })
        ctx.writer.figure(f"hull_t{t:g}.svg", hull_figure(knots, knots, t))
    ctx.writer.csv("hull_knots.csv", knot_rows, ["t", "m", "value", "hull"])
    ctx.writer.csv("hull_pieces.csv", piece_rows, ["t", "mass_lo", "mass_hi", "mass", "position"])

    closed, dual = initial_potential_phi0(sys0), conjugate_phi0(sys0)
    if len(dual.knots) != len(closed.knots):
        legendre_gap = math.inf
    else:
        legendre_gap = max(
            max(abs(a[0] - b[0]), abs(a[1] - b[1])) for a, b in zip(closed.knots, dual.knots)
        )
    return CommandResult(legendre_gap <= ctx.tolerance, {"legendre_gap": legendre_gap})


def run_flowmap(cfg: RunConfig, ctx: RunContext) -> CommandResult:
    cfg.require("particles")
    data = cfg.particles.to_initial_data()
    sys0 = cfg.particles.to_system()
    ys = (cfg.flowmap.y_grid if cfg.flowmap else None)
    partition_rows, gvp_rows = [], []
    worst = 0.0
    for t in _times(cfg):
        partition = inverse_partition(data, t)
        for e in partition.elements:
            partition_rows.append({
                "t": t, "kind": "regular" if e.regular else "cluster",
                "lo": e.interval.lo, "hi": e.interval.hi,
                "lo_closed": e.interval.lo_closed, "hi_closed": e.interval.hi_closed,
                "image": e.image, "mass": e.mass, "velocity": e.velocity,
                "members": " ".join(str(i) for i in e.members),
            })
        for g in partition.gaps:
            partition_rows.append({
                "t": t, "kind": "gap", "lo": g.lo, "hi": g.hi,
                "lo_closed": g.lo_closed, "hi_closed": g.hi_closed,
            })
        if ys is not None:
            for y in ys.points():
                e = partition.element_of(y)
                gvp_rows.append({
                    "t": t, "y": y, "image": partition.image(y),
                    "velocity": None if e.regular else e.velocity,
                })
        reference = evolve(sys0, t).particles
        clusters = partition.clusters
        if len(clusters) != len(reference):
            worst = math.inf
        else:
            worst = max([worst] + [
                max(abs(c.image - p.position), abs(c.velocity - p.velocity))
                for c, p in zip(clusters, reference)
            ])
    ctx.writer.csv(
        "partition.csv", partition_rows,
        ["t", "kind", "lo", "hi", "lo_closed", "hi_closed", "image", "mass", "velocity", "members"],
    )
    ctx.writer.csv("gvp.csv", gvp_rows, ["t", "y", "image", "velocity"])
    return CommandResult(worst <= ctx.tolerance, {"max_diff_vs_sticky": worst})


def run_genpot(cfg: RunConfig, ctx: RunContext) -> CommandResult:
    cfg.require("particles", "genpot")
    section = cfg.genpot
    data = cfg.particles.to_initial_data()
    xs = section.x_grid.points()
    rows = [{"t": section.t, **r} for r in profile(data, section.t, xs, section.orientation)]
    ctx.writer.csv("profile.csv", rows, ["t", "x", "v", "y_star", "y_star_upper"])
    branches = branch_table(data, section.x, section.t, section.orientation)
    ctx.writer.csv("branches.csv", branches, ["branch", "y_lo", "y_hi", "F"])
    ctx.writer.figure("branches.svg", branches_figure(branches, section.x, section.t))

    status: dict = {"v": min(r["F"] for r in branches)}
    passed = True
    if section.t > 0:
        status["monotone"] = monotonicity_scan(data, section.t, xs)
        status["entropy"] = entropy_check(
            sticky_velocity_field(evolve(cfg.particles.to_system(), section.t)), section.t
        )
        passed = status["monotone"] and status["entropy"] <= ctx.tolerance
    return CommandResult(passed, status)


def run_fronttrack(cfg: RunConfig, ctx: RunContext) -> CommandResult:
    cfg.require("flux", "blocks")
    flux = cfg.flux.to_table()
    fl0 = cfg.blocks.to_front_list(flux)
    fl = evolve_fronts(fl0, flux, cfg.blocks.t_end)
    ctx.writer.csv("worldlines.csv", fl.to_rows(), ["t", "x", "u_l", "u_r", "front_id"])
    ctx.writer.csv("fronts.csv", [
        {"t": fl.time, "x": f.position_at(fl.time), "u_l": f.left, "u_r": f.right,
         "speed": f.speed, "front_id": f.id}
        for f in fl.fronts
    ], ["t", "x", "u_l", "u_r", "speed", "front_id"])
    residual = rh_residual(fl, flux)
    status = {
        "fronts": len(fl),
        "rh_residual": residual,
        "total_variation": [total_variation(fl0, flux), total_variation(fl, flux)],
        "first_interaction_time": fl.first_interaction_time,
        "samples": {f"{x:g}": list(fl.sample(x)) for x in cfg.blocks.sample_at},
    }
    return CommandResult(residual <= ctx.tolerance, status)


def run_crosscheck(cfg: RunConfig, ctx: RunContext) -> CommandResult:
    cfg.require("particles")
    service = CrosscheckService(
        cfg.particles.to_system(), cfg.particles.far_field, config.HULL_SLOPE_TOL
    )
    report = service.run(cfg.times)
    ctx.writer.csv("crosscheck.csv", report.rows)
    summary = report.summary(ctx.tolerance)
    ctx.writer.json("crosscheck.json", summary)
    return CommandResult(summary["passed"], summary)


# =============================================================================
# MONTE CARLO
# =============================================================================

def run_mc_stats(cfg: RunConfig, ctx: RunContext) -> CommandResult:
    cfg.require("law", "flux", "ensemble")
    seed = cfg.resolved_seed(ctx.seed)
    flux = cfg.flux.to_table()
    service = StatisticsService(cfg.law.to_law(seed), flux, cfg.ensemble.n, seed, ctx.workers)

    estimate = service.estimate(cfg.ensemble.t, cfg.ensemble.xs, cfg.ensemble.window)
    ctx.writer.json("estimate.json", estimate.model_dump(mode="json"))
    ctx.writer.csv("estimate.csv", estimate.to_rows(), ["x", "kind", "u_l", "u_m", "count", "value", "stderr"])

    payload: dict = {"oracle": service.oracle(cfg.ensemble.t, cfg.ensemble.xs, cfg.ensemble.window)}
    passed = True
    h = cfg.hierarchy
    if h is not None:
        target = config.MC_TARGET_STDERR
        first = second = None
        if h.order in ("first", "both"):
            first = service.first_hierarchy(h.k, h.x, h.t, h.dt, h.w, target)
            payload["first"] = first.to_dict()
        if h.order in ("second", "both"):
            if h.pair is None:
                raise ScenarioError("hierarchy.pair is required for the second hierarchy")
            second = service.second_hierarchy(h.pair, h.x, h.t, h.dt, h.w, h.eps, target)
            payload["second"] = second.to_dict()
        passed = hierarchy_verdict(first, second)
    ctx.writer.json("hierarchy.json", payload)
    return CommandResult(passed, {"n": estimate.n, "window": estimate.window, **{
        k: v for k, v in payload.items() if k in ("first", "second")
    }})


def run_fm_shocks(cfg: RunConfig, ctx: RunContext) -> CommandResult:
    cfg.require("law", "contacts")
    seed = cfg.resolved_seed(ctx.seed)
    section = cfg.contacts
    result = shock_statistics(
        cfg.law.to_law(seed), section.t, section.x_grid.points(), section.paths, section.bins
    )
    shocks = result["shocks"]
    ctx.writer.csv("shocks.csv", [
        {"x_star": s.x_star, "xi_minus": s.xi_minus, "xi_plus": s.xi_plus, "mu": s.mu, "nu": s.nu}
        for s in shocks
    ], ["x_star", "xi_minus", "xi_plus", "mu", "nu"])
    ctx.writer.json("histogram.json", {"mu": result["mu_hist"], "nu": result["nu_hist"]})
    for name in ("mu", "nu"):
        hist = result[f"{name}_hist"]
        ctx.writer.csv(f"{name}_hist.csv", [
            {"lo": lo, "hi": hi, "count": c}
            for lo, hi, c in zip(hist["edges"], hist["edges"][1:], hist["counts"])
        ], ["lo", "hi", "count"])
        ctx.writer.figure(f"{name}_hist.svg", histogram_figure(hist, name))
    return CommandResult(all(s.mu > 0 for s in shocks), {"shocks": len(shocks)})


# =============================================================================
# REGISTRY
# =============================================================================

_REGISTRY: dict[str, Callable[[RunConfig, RunContext], CommandResult]] = {
    "sticky":     run_sticky,
    "hopflax":    run_hopflax,
    "flowmap":    run_flowmap,
    "genpot":     run_genpot,
    "fronttrack": run_fronttrack,
    "mc-stats":   run_mc_stats,
    "fm-shocks":  run_fm_shocks,
    "crosscheck": run_crosscheck,
}


def get_command(name: str) -> Callable[[RunConfig, RunContext], CommandResult]:
    command = _REGISTRY.get(name)
    if command is None:
        available = list(_REGISTRY.keys())
        raise ValueError(f"Unknown command '{name}'. Available: {available}")
    return command


def list_commands() -> list[str]:
    return list(_REGISTRY.keys())
