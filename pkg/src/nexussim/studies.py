"""Adequacy and N-1 security studies over the coupled system.

A contingency removes one line, derates one conventional plant or RES
cluster (capped per class), or bypasses one compressor station.  Every
contingency is evaluated by a full coupled solve in security mode (no
spinning-reserve requirement); records are gathered in enumeration order
so sweeps are reproducible regardless of worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .coupling import CoupleOptions, CoupledSolution, GasScenario, coupled_solve
from .gastransient import PressureViolation
from .network import CONVENTIONAL_TECHS, Bus, ElectricNetwork
from .scenario import ScenarioBundle, build_study_inputs
from .system import CoupledSystem
from .uc import UcInputs
from .units import kg_to_mcm


class ZeroPeak(Exception):
    """Peak demand of zero makes the adequacy ratio undefined."""


CONTINGENCY_CLASSES = (
    "compressor", "conventional-plant", "line", "solar-cluster", "wind-cluster"
)


@dataclass(frozen=True)
class Contingency:
    id: str
    klass: str
    element: str
    capacity_lost_mw: float


@dataclass
class ContingencyConfig:
    generator_cap_mw: float = 3960.0   # largest single generating unit
    wind_cap_mw: float = 2000.0
    solar_cap_mw: float = 2000.0       # no paper value; wind cap reused
    classes: tuple[str, ...] = CONTINGENCY_CLASSES


@dataclass
class SystemView:
    """Copy-on-write view of the system under one contingency."""

    sys: CoupledSystem
    contingency: Contingency
    islanded: bool = False
    cluster_derate_mw: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


@dataclass
class ContingencyRecord:
    id: str
    klass: str
    element: str
    capacity_lost_mw: float
    ens_mwh: float
    gas_curtailed_kg: float
    residual_violations: int
    iterations: int
    wall_s: float
    converged: bool = True
    islanded: bool = False
    shed_at_electric_compressor_bus: bool = False
    error: str | None = None

    def key(self) -> tuple:
        """Comparison key: everything that must be identical across reruns."""
        return (self.id, self.klass, self.element, round(self.capacity_lost_mw, 9),
                round(self.ens_mwh, 9), round(self.gas_curtailed_kg, 6),
                self.residual_violations, self.iterations, self.converged,
                self.islanded, self.error)


def enumerate_contingencies(sys: CoupledSystem,
                            config: ContingencyConfig | None = None) -> list[Contingency]:
    """One contingency per line, conventional plant, RES cluster, compressor."""
    config = config or ContingencyConfig()
    out: list[Contingency] = []
    if "line" in config.classes:
        for ln in sys.electric.lines:
            out.append(Contingency(f"line:{ln.id}", "line", ln.id, 0.0))
    if "conventional-plant" in config.classes:
        for g in sys.electric.generators:
            if g.tech in CONVENTIONAL_TECHS:
                lost = min(g.p_max_mw, config.generator_cap_mw)
                out.append(Contingency(f"conventional-plant:{g.id}",
                                       "conventional-plant", g.id, lost))
    if "solar-cluster" in config.classes:
        for c in sys.electric.clusters:
            if c.kind == "solar":
                lost = min(c.capacity_mw, config.solar_cap_mw)
                out.append(Contingency(f"solar-cluster:{c.id}", "solar-cluster", c.id, lost))
    if "wind-cluster" in config.classes:
        for c in sys.electric.clusters:
            if c.kind == "wind":
                lost = min(c.capacity_mw, config.wind_cap_mw)
                out.append(Contingency(f"wind-cluster:{c.id}", "wind-cluster", c.id, lost))
    if "compressor" in config.classes:
        for comp in sys.gas.compressors:
            out.append(Contingency(f"compressor:{comp.id}", "compressor", comp.id, 0.0))
    out.sort(key=lambda c: (c.klass, c.element))
    return out


def apply_contingency(sys: CoupledSystem, c: Contingency) -> SystemView:
    """Produce the modified system view; the original system is untouched.

    A line loss that splits the grid is reported through `islanded` (the
    study proceeds per island, each with its own slack).  Cluster losses
    are recorded as availability derates to be applied to the hourly
    inputs.  A compressor loss becomes a pass-through station (ratio 1).
    """
    if c.klass == "line":
        net = sys.electric
        before = len(net.islands())
        lines = tuple(ln for ln in net.lines if ln.id != c.element)
        if len(lines) == len(net.lines):
            raise KeyError(f"unknown line {c.element}")
        new_net = replace(net, lines=lines)
        islands = new_net.islands()
        islanded = len(islands) > before
        notes = []
        if islanded:
            # Give every orphaned island a slack at its smallest bus.
            flagged = {b.id for b in new_net.buses if b.reference}
            extra_refs = set()
            for island in islands:
                if not island & flagged:
                    extra_refs.add(min(island))
            if extra_refs:
                buses = tuple(
                    Bus(b.id, True) if b.id in extra_refs else b for b in new_net.buses
                )
                new_net = replace(new_net, buses=buses)
                notes.append(f"islanded; new slack at {', '.join(sorted(extra_refs))}")
        return SystemView(sys.replace_electric(new_net), c, islanded=islanded, notes=notes)

    if c.klass == "conventional-plant":
        net = sys.electric
        gens = []
        found = False
        for g in net.generators:
            if g.id == c.element:
                found = True
                factor = max(0.0, (g.p_max_mw - c.capacity_lost_mw) / g.p_max_mw) \
                    if g.p_max_mw > 0 else 0.0
                gens.append(g.scaled(factor))
            else:
                gens.append(g)
        if not found:
            raise KeyError(f"unknown generator {c.element}")
        return SystemView(sys.replace_electric(replace(net, generators=tuple(gens))), c)

    if c.klass in ("solar-cluster", "wind-cluster"):
        if all(cl.id != c.element for cl in sys.electric.clusters):
            raise KeyError(f"unknown cluster {c.element}")
        return SystemView(sys, c, cluster_derate_mw={c.element: c.capacity_lost_mw})

    if c.klass == "compressor":
        if all(comp.id != c.element for comp in sys.gas.compressors):
            raise KeyError(f"unknown compressor {c.element}")
        return SystemView(sys.replace_gas(sys.gas.with_compressor_bypassed(c.element)), c)

    raise ValueError(f"unknown contingency class {c.klass}")


def derate_availability(inputs: UcInputs, view: SystemView) -> UcInputs:
    """Clip cluster availability by the contingency's lost capacity."""
    if not view.cluster_derate_mw:
        return inputs
    availability = dict(inputs.availability_mw)
    for cid, lost in view.cluster_derate_mw.items():
        if cid in availability:
            availability[cid] = np.clip(availability[cid] - lost, 0.0, None)
    return replace(inputs, availability_mw=availability)


def evaluate_contingency(sys: CoupledSystem, inputs: UcInputs, gas: GasScenario,
                         c: Contingency, options: CoupleOptions) -> ContingencyRecord:
    """One coupled solve under one contingency; failures become records."""
    start = time.perf_counter()
    try:
        view = apply_contingency(sys, c)
        local_inputs = derate_availability(inputs, view)
        solution = coupled_solve(view.sys, local_inputs, gas, options)
        wall = time.perf_counter() - start
        return ContingencyRecord(
            id=c.id, klass=c.klass, element=c.element,
            capacity_lost_mw=c.capacity_lost_mw,
            ens_mwh=solution.dispatch.total_shed_mwh(options.uc.dt_h),
            gas_curtailed_kg=solution.gas_curtailed_kg,
            residual_violations=len(solution.residual_violations),
            iterations=solution.iterations,
            wall_s=wall,
            converged=solution.converged,
            islanded=view.islanded,
            shed_at_electric_compressor_bus=solution.shed_at_electric_compressor_bus,
        )
    except Exception as exc:  # never abort the sweep on one contingency
        wall = time.perf_counter() - start
        return ContingencyRecord(
            id=c.id, klass=c.klass, element=c.element,
            capacity_lost_mw=c.capacity_lost_mw,
            ens_mwh=0.0, gas_curtailed_kg=0.0, residual_violations=0,
            iterations=0, wall_s=wall, converged=False,
            error=f"{type(exc).__name__}: {exc}",
        )


def _security_options(options: CoupleOptions) -> CoupleOptions:
    # Security mode drops the spinning-reserve requirement.
    uc = replace(options.uc, reserve_mw=0.0)
    return replace(options, uc=uc)


def _worker(payload):
    sys, inputs, gas, c, options = payload
    return evaluate_contingency(sys, inputs, gas, c, options)


def run_security(sys: CoupledSystem, inputs: UcInputs, gas: GasScenario,
                 contingencies: list[Contingency],
                 options: CoupleOptions | None = None,
                 jobs: int = 1) -> list[ContingencyRecord]:
    """Evaluate every contingency; records come back in enumeration order."""
    options = _security_options(options or CoupleOptions())
    payloads = [(sys, inputs, gas, c, options) for c in contingencies]
    if jobs <= 1 or len(contingencies) <= 1:
        return [_worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_worker, payloads))


# --- adequacy ---------------------------------------------------------------------

SHARE_COLUMNS = ("Hydro", "PS", "Nuclear", "OCGT", "CCGT", "Coal",
                 "Bio/Lignite", "Oil", "Wind", "Solar", "Import", "LS")

_TECH_COLUMN = {
    "hydro": "Hydro",
    "RoR": "Hydro",              # run-of-river reported under Hydro
    "pumped-storage": "PS",
    "nuclear": "Nuclear",
    "OCGT": "OCGT",
    "CCGT": "CCGT",
    "coal": "Coal",
    "bio/lignite": "Bio/Lignite",
    "oil": "Oil",
    "wind": "Wind",
    "solar": "Solar",
}


@dataclass
class AdequacyReport:
    shares_pct: dict[str, float]
    shed_mwh: float
    wind_curtailment_gwh: float
    solar_curtailment_gwh: float
    linepack_min_mcm: float
    linepack_max_mcm: float
    linepack_swing_mcm: float
    violations: list[PressureViolation]
    adequacy_without_res_pct: float
    gas_curtailed_kg: float
    gas_curtailed_m3: float
    solution: CoupledSolution


def adequacy_without_res(conventional_capacity_mw: float,
                         peak_demand_mw: float) -> float:
    """Conventional capacity over peak demand, in percent."""
    if peak_demand_mw <= 0:
        raise ZeroPeak("peak demand must be positive")
    return 100.0 * conventional_capacity_mw / peak_demand_mw


def conventional_capacity(net: ElectricNetwork) -> float:
    return float(sum(g.p_max_mw for g in net.generators if g.tech in CONVENTIONAL_TECHS))


def generation_shares(sys: CoupledSystem, inputs: UcInputs,
                      solution: CoupledSolution, dt_h: float = 1.0) -> dict[str, float]:
    """Energy contribution per Tables-style column, in percent of total supply."""
    energy = {col: 0.0 for col in SHARE_COLUMNS}
    d = solution.dispatch
    for g in sys.electric.generators:
        energy[_TECH_COLUMN[g.tech]] += float(d.output_mw[g.id].sum()) * dt_h
    clusters = {c.id: c for c in sys.electric.clusters}
    for cid, avail in inputs.availability_mw.items():
        kind = clusters[cid].kind
        delivered = float(np.sum(avail) - d.curtailment_mw[cid].sum()) * dt_h
        energy[_TECH_COLUMN[kind]] += delivered
    for series in inputs.net_import_mw.values():
        energy["Import"] += float(np.clip(series, 0.0, None).sum()) * dt_h
    energy["LS"] += d.total_shed_mwh(dt_h)
    total = sum(energy.values())
    if total <= 0:
        return {col: 0.0 for col in SHARE_COLUMNS}
    return {col: 100.0 * v / total for col, v in energy.items()}


def run_adequacy(sys: CoupledSystem, bundle: ScenarioBundle,
                 options: CoupleOptions | None = None,
                 reserve_mw: float | None = None) -> AdequacyReport:
    """Single coupled solve under extreme-day inputs, with reserve held.

    The reserve requirement comes from `reserve_mw` if given, else from the
    bundle; the aggregation mirrors the generation-share table layout.
    """
    options = options or CoupleOptions()
    scaled, inputs, gas = build_study_inputs(sys, bundle)
    reserve = bundle.reserve_mw if reserve_mw is None else reserve_mw
    options = replace(options, uc=replace(options.uc, reserve_mw=reserve))
    solution = coupled_solve(scaled, inputs, gas, options)

    dt_h = options.uc.dt_h
    shares = generation_shares(scaled, inputs, solution, dt_h)
    clusters = {c.id: c for c in scaled.electric.clusters}
    wind_curt = sum(float(s.sum()) for cid, s in solution.dispatch.curtailment_mw.items()
                    if clusters[cid].kind == "wind") * dt_h
    solar_curt = sum(float(s.sum()) for cid, s in solution.dispatch.curtailment_mw.items()
                     if clusters[cid].kind == "solar") * dt_h
    lp = [r.total_mcm for r in solution.trajectory.linepack]
    lp_min, lp_max = float(min(lp)), float(max(lp))
    peak = float(np.max(bundle.load_mw))
    return AdequacyReport(
        shares_pct=shares,
        shed_mwh=solution.dispatch.total_shed_mwh(dt_h),
        wind_curtailment_gwh=wind_curt / 1000.0,
        solar_curtailment_gwh=solar_curt / 1000.0,
        linepack_min_mcm=lp_min,
        linepack_max_mcm=lp_max,
        linepack_swing_mcm=lp_max - lp_min,
        violations=list(solution.trajectory.violations),
        adequacy_without_res_pct=adequacy_without_res(
            conventional_capacity(scaled.electric), peak),
        gas_curtailed_kg=solution.gas_curtailed_kg,
        gas_curtailed_m3=solution.gas_curtailed_m3,
        solution=solution,
    )
