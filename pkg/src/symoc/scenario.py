"""Aerial firefighting mission: water drop over a burning area, then landing.

The mission is posed as two worst-case optimal control problems solved in
succession on one grid cover:

* the homing problem (empty tank) charges ``tau + bank^2`` per step,
  forbids obstacles and the no-fly block over the runway, and terminates
  free of charge only inside runway x landing-envelope cells;
* the drop problem (loaded tank) runs the same stage cost but pays a
  reward of ``-reward_rate * tau`` on every transition whose head cell
  lies entirely inside fire x release-envelope, and charges the homing
  problem's value map as its terminal cost, so handing over at a cell
  costs exactly the guaranteed trip home from there.

The closed loop flies the loaded aircraft under the drop controller until
it commands hand-over (water release, mass drops), then the empty
aircraft under the homing controller until touchdown configuration.

``paper_scale_regions`` carries the reference scenario geometry of the
original study area (2.5 km arena); ``desk_regions``/``desk_plan`` define
the reduced arena used by the test suite, sized so both problems solve in
minutes in pure numpy.  Fire and hill placements are approximate by
construction in both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .abstraction import CostModel, GridProblem
from .aircraft import DEG, AircraftParams, aircraft_field
from .flow import SampledSystem, integrate
from .grid import GridCover
from .problem import FULL_SET, INF

# full-resolution synthesis grid of the reference scenario (~141.7M cells,
# far beyond this package's in-memory solver budget; kept for context)
FULL_RESOLUTION_CELLS = (200, 70, 75, 135)
FULL_RESOLUTION_INPUT_SUBDIV = (4, 6)


class SimulationViolationError(RuntimeError):
    """Closed-loop trajectory left the operating range or hit an obstacle."""


class SimulationLimitError(RuntimeError):
    """Sample cap reached before the final hand-over."""


class GridMismatchError(ValueError):
    """A value/controller artifact does not match the scenario grid."""


@dataclass(frozen=True)
class ScenarioRegions:
    """Mission geometry.  Boxes are ((lo...), (hi...)) pairs.

    ``arena`` is the spatial extent of the operating range and
    ``speed_range`` its speed interval; heading is unconstrained.
    ``nofly_heading`` is the forbidden heading interval over the runway
    block (the allowed corridor is its complement).
    """

    arena: tuple = ((0.0, 0.0), (2500.0, 800.0))
    speed_range: tuple = (50.0, 85.0)
    runway: tuple = ((300.0, 100.0), (900.0, 180.0))
    landing_heading: tuple = (-10.0 * DEG, 10.0 * DEG)
    landing_speed: tuple = (50.0, 55.0)
    drop_speed: tuple = (53.0, 56.0)
    nofly: tuple = ((320.0, 120.0), (880.0, 160.0))
    nofly_heading: tuple = (12.0 * DEG, 348.0 * DEG)
    fire_boxes: tuple = (((2050.0, 300.0), (2400.0, 550.0)),)
    hill_boxes: tuple = (
        ((450.0, 620.0), (650.0, 800.0)),
        ((1350.0, 430.0), (1600.0, 610.0)),
        ((1700.0, 0.0), (2000.0, 150.0)),
    )

    # -- four-dimensional region boxes ------------------------------------

    def avoid_boxes_4d(self) -> list:
        boxes = [
            (
                np.array([self.nofly[0][0], self.nofly[0][1],
                          self.nofly_heading[0], -np.inf]),
                np.array([self.nofly[1][0], self.nofly[1][1],
                          self.nofly_heading[1], np.inf]),
            )
        ]
        for lo, hi in self.hill_boxes:
            boxes.append(
                (
                    np.array([lo[0], lo[1], -np.inf, -np.inf]),
                    np.array([hi[0], hi[1], np.inf, np.inf]),
                )
            )
        return boxes

    def target_boxes_4d(self) -> list:
        return [
            (
                np.array([self.runway[0][0], self.runway[0][1],
                          self.landing_heading[0], self.landing_speed[0]]),
                np.array([self.runway[1][0], self.runway[1][1],
                          self.landing_heading[1], self.landing_speed[1]]),
            )
        ]

    def reward_boxes_4d(self) -> list:
        return [
            (
                np.array([lo[0], lo[1], -np.inf, self.drop_speed[0]]),
                np.array([hi[0], hi[1], np.inf, self.drop_speed[1]]),
            )
            for lo, hi in self.fire_boxes
        ]

    # -- concrete membership tests ----------------------------------------

    def in_arena(self, x) -> bool:
        (alo, ahi) = self.arena
        return bool(
            alo[0] <= x[0] <= ahi[0]
            and alo[1] <= x[1] <= ahi[1]
            and self.speed_range[0] <= x[3] <= self.speed_range[1]
        )

    def in_avoid(self, x) -> bool:
        for lo, hi in self.hill_boxes:
            if lo[0] <= x[0] <= hi[0] and lo[1] <= x[1] <= hi[1]:
                return True
        (nlo, nhi) = self.nofly
        if nlo[0] <= x[0] <= nhi[0] and nlo[1] <= x[1] <= nhi[1]:
            if _angle_in(x[2], self.nofly_heading):
                return True
        return False

    def in_fire_drop(self, x) -> bool:
        if not (self.drop_speed[0] <= x[3] <= self.drop_speed[1]):
            return False
        return any(
            lo[0] <= x[0] <= hi[0] and lo[1] <= x[1] <= hi[1]
            for lo, hi in self.fire_boxes
        )

    def in_target(self, x) -> bool:
        (rlo, rhi) = self.runway
        return bool(
            rlo[0] <= x[0] <= rhi[0]
            and rlo[1] <= x[1] <= rhi[1]
            and _angle_in(x[2], self.landing_heading)
            and self.landing_speed[0] <= x[3] <= self.landing_speed[1]
        )


def _angle_in(theta: float, interval: tuple) -> bool:
    lo, hi = interval
    width = hi - lo
    if width >= 2 * math.pi:
        return True
    return math.fmod(theta - lo, 2 * math.pi) % (2 * math.pi) <= width


def paper_scale_regions() -> ScenarioRegions:
    """Reference-scale geometry (2.5 km arena); fire/hills approximate."""
    return ScenarioRegions()


@dataclass(frozen=True)
class MissionPlan:
    """Discretisation and mission constants."""

    tau: float = 0.45
    substeps: int = 5
    reward_rate: float = 5.0
    cells_per_dim: tuple = (56, 24, 36, 14)
    thrusts: tuple = (0.0, 5400.0, 9600.0)
    banks: tuple = (-40.0 * DEG, 0.0, 40.0 * DEG)
    start: tuple = (840.0, 140.0, 0.0, 53.0)
    max_samples: int = 3000
    max_sweeps: Optional[int] = 2000
    speed_margin: float = 2.0

    def __post_init__(self):
        if min(self.cells_per_dim) < 2:
            raise ValueError("need at least 2 cells per dimension")

    def input_grid(self) -> np.ndarray:
        return np.array([(t, b) for t in self.thrusts for b in self.banks])


def desk_regions() -> ScenarioRegions:
    """Reduced arena for desk-scale synthesis.

    Same structure as the reference scenario with shorter distances: the
    runway is shortened so the start state sits airborne east of the
    touchdown zone, the fire straddles the direct line home at release
    altitude band, and one hill decorates the southern flank.
    """
    return ScenarioRegions(
        arena=((0.0, 0.0), (1120.0, 480.0)),
        speed_range=(50.0, 60.0),
        runway=((120.0, 100.0), (480.0, 180.0)),
        fire_boxes=(((560.0, 190.0), (760.0, 290.0)),),
        hill_boxes=(((640.0, 20.0), (760.0, 100.0)),),
    )


def desk_plan() -> MissionPlan:
    return MissionPlan()


def build_cover(regions: ScenarioRegions, plan: MissionPlan) -> GridCover:
    (alo, ahi) = regions.arena
    return GridCover(
        lower=[alo[0], alo[1], -math.pi, regions.speed_range[0]],
        upper=[ahi[0], ahi[1], math.pi, regions.speed_range[1]],
        cells_per_dim=plan.cells_per_dim,
        periodic=[False, False, True, False],
    )


def build_system(
    params: AircraftParams, sigma: int, regions: ScenarioRegions, plan: MissionPlan
) -> SampledSystem:
    field = aircraft_field(
        params, sigma, speed_range=regions.speed_range,
        speed_margin=plan.speed_margin,
    )
    return SampledSystem(field, tau=plan.tau, substeps=plan.substeps)


def build_pi1(regions: ScenarioRegions, plan: MissionPlan) -> CostModel:
    """Homing cost model: time plus bank penalty, land on the runway."""
    tau = plan.tau
    return CostModel(
        stage=lambda u: tau + u[1] ** 2,
        avoid=regions.avoid_boxes_4d(),
        target=regions.target_boxes_4d(),
        target_value=0.0,
    )


def build_pi2(
    regions: ScenarioRegions, plan: MissionPlan, v1: np.ndarray,
    reward: bool = True,
) -> CostModel:
    """Drop cost model: homing stage costs, release reward, terminal = v1.

    ``v1`` must be the converged value map of the homing problem on the
    same cover (length n_cells or n_cells + 1).
    """
    tau = plan.tau
    return CostModel(
        stage=lambda u: tau + u[1] ** 2,
        avoid=regions.avoid_boxes_4d(),
        terminal=np.asarray(v1, dtype=np.float64),
        reward=regions.reward_boxes_4d() if reward else (),
        reward_value=-plan.reward_rate * tau,
    )


def mission_problems(
    regions: ScenarioRegions,
    plan: MissionPlan,
    params: Optional[AircraftParams] = None,
):
    """Cover, input grid, and the homing-problem GridProblem.

    The drop problem needs the homing value map first; build it with
    :func:`drop_problem` once that solve has converged.
    """
    params = params or AircraftParams()
    cover = build_cover(regions, plan)
    inputs = plan.input_grid()
    sys1 = build_system(params, 1, regions, plan)
    gp1 = GridProblem(sys1, cover, inputs, build_pi1(regions, plan))
    return cover, inputs, gp1


def drop_problem(
    regions: ScenarioRegions,
    plan: MissionPlan,
    cover: GridCover,
    inputs: np.ndarray,
    v1: np.ndarray,
    params: Optional[AircraftParams] = None,
    reward: bool = True,
) -> GridProblem:
    params = params or AircraftParams()
    if len(v1) not in (cover.n_cells, cover.n_states):
        raise GridMismatchError(
            f"homing value map has {len(v1)} entries, cover has "
            f"{cover.n_cells} cells"
        )
    sys2 = build_system(params, 2, regions, plan)
    return GridProblem(
        sys2, cover, inputs, build_pi2(regions, plan, v1, reward=reward)
    )


# -- closed-loop simulation -----------------------------------------------


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray        # (k+1, 4)
    inputs: np.ndarray        # (k, 2)
    phases: np.ndarray        # (k,) 2 while loaded, 1 after release
    stage_costs: np.ndarray   # (k,)
    cumulative: np.ndarray    # (k,) running cost sums (terminal excluded)
    handover_samples: list    # sample indices of the release / final hand-over
    terminal_cost: float

    @property
    def total_cost(self) -> float:
        running = self.cumulative[-1] if len(self.cumulative) else 0.0
        return float(running + self.terminal_cost)

    def dwell_samples(self, regions: ScenarioRegions) -> int:
        return sum(1 for x in self.states if regions.in_fire_drop(x))


def simulate_mission(
    controllers: tuple,
    regions: ScenarioRegions,
    plan: MissionPlan,
    x0,
    cover: Optional[GridCover] = None,
    params: Optional[AircraftParams] = None,
    reward: bool = True,
) -> Trajectory:
    """Fly (drop controller, homing controller) from x0 sample by sample.

    Phase 2 integrates the loaded dynamics under the drop controller; its
    hand-over releases the water and switches to phase 1 (empty dynamics,
    homing controller) whose hand-over ends the run on final approach.
    Stage costs are the concrete ones: reward when the *next* state is in
    fire x release envelope (if enabled), ``tau + bank^2`` otherwise; the
    homing terminal cost is charged at the final state.
    """
    mu2, mu1 = controllers
    params = params or AircraftParams()
    cover = cover or build_cover(regions, plan)
    if len(mu1) != cover.n_states or len(mu2) != cover.n_states:
        raise GridMismatchError(
            f"controllers sized {len(mu2)}/{len(mu1)} do not match the "
            f"cover ({cover.n_states} states)"
        )
    inputs = plan.input_grid()
    systems = {
        2: build_system(params, 2, regions, plan),
        1: build_system(params, 1, regions, plan),
    }

    x = np.asarray(x0, dtype=np.float64)
    if not regions.in_arena(x):
        raise SimulationViolationError(f"start state {x} outside operating range")

    states = [x.copy()]
    times = [0.0]
    used_inputs, phases, stages, cum = [], [], [], []
    handovers = []
    running = 0.0
    phase = 2
    controller = mu2

    for k in range(plan.max_samples):
        cell = cover.quantize(x)
        if cell == cover.overflow_index:
            raise SimulationViolationError(f"sample {k}: state left the range")
        choice = controller[cell]
        if choice == FULL_SET:
            handovers.append(k)
            if phase == 2:
                phase = 1
                controller = mu1
                continue
            g1_terminal = 0.0 if regions.in_target(x) else INF
            return Trajectory(
                times=np.asarray(times),
                states=np.asarray(states),
                inputs=np.asarray(used_inputs).reshape(-1, 2),
                phases=np.asarray(phases, dtype=np.int64),
                stage_costs=np.asarray(stages),
                cumulative=np.asarray(cum),
                handover_samples=handovers,
                terminal_cost=g1_terminal,
            )
        u = inputs[int(choice)]
        y = integrate(systems[phase], x, u)
        if not regions.in_arena(y):
            raise SimulationViolationError(f"sample {k}: trajectory left the range")
        if regions.in_avoid(y):
            raise SimulationViolationError(f"sample {k}: trajectory hit the avoid set")
        if reward and regions.in_fire_drop(y):
            stage = -plan.reward_rate * plan.tau
        else:
            stage = plan.tau + u[1] ** 2
        running += stage
        x = y
        states.append(x.copy())
        times.append(times[-1] + plan.tau)
        used_inputs.append(u)
        phases.append(phase)
        stages.append(stage)
        cum.append(running)

    raise SimulationLimitError(
        f"no final hand-over within {plan.max_samples} samples"
    )


def write_trajectory_csv(traj: Trajectory, path) -> None:
    lines = ["t,x1,x2,x3,x4,u1,u2,phase,stage_cost,cumulative_J,handover_flag"]
    handover = set(traj.handover_samples)
    for k in range(len(traj.inputs)):
        x = traj.states[k]
        u = traj.inputs[k]
        lines.append(
            f"{traj.times[k]:.6g},{x[0]:.6g},{x[1]:.6g},{x[2]:.6g},{x[3]:.6g},"
            f"{u[0]:.6g},{u[1]:.6g},{traj.phases[k]},{traj.stage_costs[k]:.6g},"
            f"{traj.cumulative[k]:.6g},{int(k in handover)}"
        )
    xf = traj.states[-1]
    lines.append(
        f"{traj.times[-1]:.6g},{xf[0]:.6g},{xf[1]:.6g},{xf[2]:.6g},{xf[3]:.6g},"
        f"0,0,0,0,{traj.total_cost:.6g},1"
    )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_region_outlines(regions: ScenarioRegions, path) -> None:
    """Polyline CSV of the named spatial regions for external plotting."""
    lines = ["region,x1,x2"]

    def outline(name, lo, hi):
        for px, py in [
            (lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]),
            (lo[0], hi[1]), (lo[0], lo[1]),
        ]:
            lines.append(f"{name},{px:.6g},{py:.6g}")

    outline("arena", regions.arena[0], regions.arena[1])
    outline("runway", regions.runway[0], regions.runway[1])
    outline("nofly", regions.nofly[0], regions.nofly[1])
    for i, (lo, hi) in enumerate(regions.fire_boxes):
        outline(f"fire{i}", lo, hi)
    for i, (lo, hi) in enumerate(regions.hill_boxes):
        outline(f"hill{i}", lo, hi)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
