"""Gas-electric interaction: GFPP off-takes, fuel constraints, fixed point.

GFPP dispatch translates into gas off-takes through M = P / (eta * HHV).
When the gas day shows minimum-pressure violations, the linepack deficit of
the violated zone is converted into a gas curtailment quantity and emitted
as a linear cap on the zone's GFPP gas draw over the violation window; the
commitment problem is then re-solved.  The loop ends on a clean gas day,
when no curtailable customer is left in the violated zones, or at the
iteration cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gastransient import (
    DayTrajectory,
    GasSimulator,
    PressureViolation,
    allocate_injections,
    injections_by_node,
    simulate_day_with_reallocation,
)
from .system import CoupledSystem
from .uc import DispatchResult, FuelRow, UcInputs, UcOptions, build_uc, solve_uc
from .units import MW, SECONDS_PER_DAY, SECONDS_PER_HOUR, kg_to_m3


class NoGfppInZone(Exception):
    """A violated zone has no curtailable gas customer."""


class IterationCapExceeded(Exception):
    """The electric-gas loop did not settle within its iteration budget."""


@dataclass
class FuelConstraint:
    """Eq-style gas curtailment requirement for one violated zone."""

    zone: str
    onset_s: float                 # T0
    duration_s: float              # T*
    curtailment_kg: float          # G^C
    members: list[str]             # GFPP generator ids in the zone
    reference_dispatch: dict[str, np.ndarray]


@dataclass
class IterationRecord:
    iteration: int
    objective: float
    min_violations: int
    max_violations: int
    reallocation_rounds: int
    constraints_emitted: int
    zones: list[str]
    curtailment_kg: float


@dataclass
class CoupledSolution:
    dispatch: DispatchResult
    trajectory: DayTrajectory
    iterations: int
    converged: bool
    residual_violations: list[PressureViolation]
    fuel_rows: list[FuelRow]
    gas_curtailed_kg: float
    gas_curtailed_m3: float        # at standard conditions (declared density)
    iteration_log: list[IterationRecord] = field(default_factory=list)
    injection_schedule: dict[str, float] = field(default_factory=dict)
    shed_at_electric_compressor_bus: bool = False


@dataclass
class GasScenario:
    """Gas-side boundary data for one balancing day."""

    firm_offtakes_kg_s: dict[str, np.ndarray]   # node -> 24 hourly rates


def gfpp_offtakes(dispatch: DispatchResult, sys: CoupledSystem) -> dict[str, np.ndarray]:
    """Hourly gas off-take per gas node implied by GFPP dispatch (Eq-inverse).

    Off-takes are held piecewise constant over each hour for the gas solver.
    """
    horizon = len(next(iter(dispatch.output_mw.values()))) if dispatch.output_mw else 0
    out: dict[str, np.ndarray] = {}
    for e in sys.coupling.entries:
        p_mw = dispatch.output_mw[e.generator]
        m = p_mw * MW / (e.efficiency * e.hhv_j_kg)
        out[e.gas_node] = out.get(e.gas_node, np.zeros(horizon)) + m
    return out


def violated_zone(violations: list[PressureViolation], sys: CoupledSystem,
                  zone_id: str) -> tuple[list[str], float, float]:
    """Members and violation window envelope for one violated zone.

    Returns (GFPP generator ids, onset, duration) where the window is the
    union envelope of all min violations in the zone.  Raises NoGfppInZone
    when the zone holds no curtailable customer.
    """
    zones = sys.zones()
    in_zone = [v for v in violations
               if v.kind == "min" and zones[v.node] == zone_id]
    if not in_zone:
        raise ValueError(f"no min-pressure violation recorded in zone {zone_id}")
    onset = min(v.onset_s for v in in_zone)
    end = max(v.onset_s + v.duration_s for v in in_zone)
    members = [e.generator for e in sys.gfpps_in_zone(zone_id)]
    if not members:
        raise NoGfppInZone(f"zone {zone_id} has no GFPP to curtail")
    return members, onset, end - onset


def size_curtailment(sys: CoupledSystem, sim: GasSimulator, traj: DayTrajectory,
                     zone_id: str, safety_factor: float = 1.1) -> FuelConstraint:
    """Quantify the gas shortfall of a violated zone from its trajectory.

    The curtailment is the zone's linepack deficit relative to a uniform
    minimum-pressure floor, evaluated at the instant the deficit is worst,
    scaled by the safety factor.  The window runs from the earliest onset
    to the end of the balancing day (linepack must be restored by then).
    """
    members, onset, _ = violated_zone(traj.violations, sys, zone_id)
    c2 = sim.props.sound_speed**2
    zones = sim.zones
    nodes = {n.id: n for n in sim.net.nodes}
    pipes = {p.id: p for p in sim.net.pipes}

    in_window = traj.times_s >= onset
    steps = np.flatnonzero(in_window)
    deficits = np.zeros(len(traj.times_s))
    for g in sim.grids:
        pipe = pipes[g.pipe_id]
        if zones[pipe.from_node] != zone_id:
            continue
        p_grid = traj.pipe_pressure[g.pipe_id]          # (S, N+1)
        p_cell = 0.5 * (p_grid[:, :-1] + p_grid[:, 1:])  # (S, N)
        # Per-segment floor interpolated between the end nodes' minima.
        lo = nodes[pipe.from_node].p_min_pa
        hi = nodes[pipe.to_node].p_min_pa
        centers = (np.arange(g.n_segments) + 0.5) / g.n_segments
        p_floor = lo + (hi - lo) * centers
        short = np.clip(p_floor[None, :] - p_cell, 0.0, None)
        deficits += (short / c2 * pipe.cross_section_m2 * g.dx_m).sum(axis=1)
    worst = int(steps[np.argmax(deficits[steps])]) if len(steps) else int(np.argmax(deficits))
    deficit = float(deficits[worst])

    if deficit <= 0.0:
        # Violation confined to a node boundary: charge the adjacent segment
        # with the node's own pressure shortfall.
        node_pos = {n: i for i, n in enumerate(traj.node_ids)}
        for v in traj.violations:
            if v.kind != "min" or zones[v.node] != zone_id:
                continue
            p_node = traj.node_pressure[worst, node_pos[v.node]]
            short = max(0.0, nodes[v.node].p_min_pa - p_node)
            if short <= 0:
                continue
            for g in sim.grids:
                pipe = pipes[g.pipe_id]
                if v.node in (pipe.from_node, pipe.to_node):
                    deficit += short / c2 * pipe.cross_section_m2 * g.dx_m
                    break
    duration = SECONDS_PER_DAY - onset
    return FuelConstraint(
        zone=zone_id,
        onset_s=onset,
        duration_s=duration,
        curtailment_kg=safety_factor * deficit,
        members=members,
        reference_dispatch={},
    )


def emit_fuel_constraint(fc: FuelConstraint, sys: CoupledSystem,
                         reference: DispatchResult, dt_h: float = 1.0,
                         min_cut_fraction: float = 0.0) -> FuelRow:
    """Linearize the curtailment requirement against the reference dispatch.

    The row demands that the zone's aggregate gas draw over the window drop
    by at least the curtailment quantity relative to the reference run.
    `min_cut_fraction` floors the cut at that share of the reference draw
    (hairline violations otherwise shrink the deficit asymptotically).  If
    the requirement exceeds the entire reference draw, the row is clipped
    to a full shutdown of the member GFPPs over the window.
    """
    first_hour = int(fc.onset_s // SECONDS_PER_HOUR)
    horizon = len(next(iter(reference.output_mw.values())))
    last_hour = min(horizon, int(math.ceil((fc.onset_s + fc.duration_s) / SECONDS_PER_HOUR)))
    entries = {e.generator: e for e in sys.coupling.entries}
    coeffs: dict[tuple[str, int], float] = {}
    reference_draw = 0.0
    for gid in fc.members:
        e = entries[gid]
        kg_per_mw = dt_h * SECONDS_PER_HOUR * MW / (e.efficiency * e.hhv_j_kg)
        for t in range(first_hour, last_hour):
            coeffs[(gid, t)] = kg_per_mw
            reference_draw += kg_per_mw * float(reference.output_mw[gid][t])
    fc.reference_dispatch = {
        gid: reference.output_mw[gid][first_hour:last_hour].copy() for gid in fc.members
    }
    cut = max(fc.curtailment_kg, min_cut_fraction * reference_draw)
    rhs = reference_draw - cut
    clipped = rhs < 0.0
    if clipped:
        rhs = 0.0
    return FuelRow(
        zone=fc.zone,
        coeffs=coeffs,
        rhs_kg=rhs,
        onset_s=fc.onset_s,
        duration_s=fc.duration_s,
        curtailment_kg=cut,
        reference_draw_kg=reference_draw,
        clipped=clipped,
    )


def fuel_row_draw(row: FuelRow, dispatch: DispatchResult) -> float:
    """Gas mass (kg) the row's members draw over its window under a dispatch."""
    return float(sum(
        coeff * dispatch.output_mw[gid][t] for (gid, t), coeff in row.coeffs.items()
    ))


@dataclass
class CoupleOptions:
    uc: UcOptions = field(default_factory=UcOptions)
    dt_s: float = 60.0
    dx_m: float = 10000.0
    iteration_cap: int = 10
    safety_factor: float = 1.1
    min_cut_fraction: float = 0.05
    reallocation_rounds: int = 5
    raise_on_cap: bool = False
    # Optional anchor for the steady start (node id, pressure in Pa); used to
    # begin the balancing day from a prescribed linepack operating point.
    init_ref_node: str | None = None
    init_ref_pressure_pa: float | None = None


def coupled_solve(sys: CoupledSystem, inputs: UcInputs, gas: GasScenario,
                  options: CoupleOptions | None = None,
                  sim: GasSimulator | None = None) -> CoupledSolution:
    """Run the interleaved commitment / gas-day fixed point.

    Fuel rows accumulate across iterations (the feasible set only tightens),
    maximum-pressure violations are handled inside the gas stage through
    injection reallocation, and the loop terminates on a clean gas day, on
    exhaustion of curtailable customers, or at the iteration cap.
    """
    options = options or CoupleOptions()
    sim = sim or GasSimulator(sys.gas, options.dx_m)
    horizon = inputs.horizon
    fuel_rows: list[FuelRow] = []
    log: list[IterationRecord] = []
    converged = False
    dispatch = trajectory = None
    schedule: dict[str, float] = {}
    iteration = 0

    while iteration < options.iteration_cap:
        iteration += 1
        problem = build_uc(sys.electric, inputs, options.uc, fuel_rows)
        dispatch = solve_uc(problem)

        electric_off = gfpp_offtakes(dispatch, sys)
        offtakes: dict[str, np.ndarray] = {
            n: np.asarray(s, dtype=float).copy() for n, s in gas.firm_offtakes_kg_s.items()
        }
        for node, series in electric_off.items():
            offtakes[node] = offtakes.get(node, np.zeros(horizon)) + series
        total_avg = float(sum(s.mean() for s in offtakes.values()))
        schedule = allocate_injections(sys.gas, total_avg)
        trajectory, schedule, realloc_rounds = simulate_day_with_reallocation(
            sim, schedule, offtakes, options.dt_s, options.reallocation_rounds,
            ref_node=options.init_ref_node,
            ref_pressure_pa=options.init_ref_pressure_pa,
        )

        min_violations = trajectory.min_violations()
        zones_hit = sorted({sim.zones[v.node] for v in min_violations})
        new_rows: list[FuelRow] = []
        emitted_kg = 0.0
        for zid in zones_hit:
            try:
                fc = size_curtailment(sys, sim, trajectory, zid, options.safety_factor)
            except NoGfppInZone:
                continue
            row = emit_fuel_constraint(fc, sys, dispatch, options.uc.dt_h,
                                       options.min_cut_fraction)
            if row.clipped and fuel_row_draw(row, dispatch) <= 1e-9:
                # Members already shut over the window: nothing left to shed.
                continue
            new_rows.append(row)
            emitted_kg += row.curtailment_kg

        log.append(IterationRecord(
            iteration=iteration,
            objective=dispatch.objective,
            min_violations=len(min_violations),
            max_violations=len(trajectory.max_violations()),
            reallocation_rounds=realloc_rounds,
            constraints_emitted=len(new_rows),
            zones=zones_hit,
            curtailment_kg=emitted_kg,
        ))

        if not min_violations:
            converged = True
            break
        if not new_rows:
            # Only uncurtailable (firm-driven) violations remain; flagged.
            break
        fuel_rows.extend(new_rows)

    if not converged and iteration >= options.iteration_cap and options.raise_on_cap:
        raise IterationCapExceeded(f"no fixed point after {iteration} iterations")

    residual = list(trajectory.max_violations())
    if not converged:
        residual.extend(trajectory.min_violations())
    curtailed_kg = 0.0
    for row in fuel_rows:
        realized = row.reference_draw_kg - fuel_row_draw(row, dispatch)
        curtailed_kg += max(0.0, realized)
    density = sys.gas.properties.standard_density
    shed_at_comp_bus = _shed_touches_electric_compressor(sys, dispatch)
    return CoupledSolution(
        dispatch=dispatch,
        trajectory=trajectory,
        iterations=iteration,
        converged=converged,
        residual_violations=residual,
        fuel_rows=fuel_rows,
        gas_curtailed_kg=curtailed_kg,
        gas_curtailed_m3=kg_to_m3(curtailed_kg, density),
        iteration_log=log,
        injection_schedule=schedule,
        shed_at_electric_compressor_bus=shed_at_comp_bus,
    )


def _shed_touches_electric_compressor(sys: CoupledSystem,
                                      dispatch: DispatchResult) -> bool:
    """Flag shed load at a bus hosting an electric-driven compressor.

    The electric-compressor feedback itself is out of scope; the flag makes
    the omission visible in study records.
    """
    comp_buses = {c.electric_bus for c in sys.gas.compressors
                  if c.drive == "electric" and c.electric_bus}
    if not comp_buses:
        return False
    return any(
        bus in comp_buses and float(series.sum()) > 1e-9
        for bus, series in dispatch.shed_mw.items()
    )
