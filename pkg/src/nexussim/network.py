"""Electric network description: buses, lines, generators, RES clusters.

All types are frozen dataclasses; a network is immutable after construction
and safe to share across concurrent study workers.  Validation never raises,
it reports every violated invariant with the offending element id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .validation import ValidationReport

CONVENTIONAL_TECHS = (
    "hydro",
    "pumped-storage",
    "nuclear",
    "OCGT",
    "CCGT",
    "coal",
    "bio/lignite",
    "oil",
)
RES_TECHS = ("wind", "solar", "RoR")
TECHS = CONVENTIONAL_TECHS + RES_TECHS
GFPP_TECHS = ("OCGT", "CCGT")
CLUSTER_KINDS = ("wind", "solar", "RoR")


@dataclass(frozen=True)
class Bus:
    id: str
    reference: bool = False


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    rating_mw: float
    reactance_pu: float


@dataclass(frozen=True)
class Generator:
    id: str
    bus: str
    tech: str
    p_max_mw: float
    p_min_stable_mw: float = 0.0
    ramp_up_mw_h: float = math.inf
    ramp_down_mw_h: float = math.inf
    min_up_h: int = 1
    min_down_h: int = 1
    cost_energy: float = 0.0      # currency/MWh
    cost_startup: float = 0.0     # currency per start
    cost_shutdown: float = 0.0    # currency per stop
    gfpp: bool = False

    def scaled(self, factor: float) -> "Generator":
        """Capacity-rescaled copy; min stable level and ramps follow p_max."""
        ru = self.ramp_up_mw_h * factor if math.isfinite(self.ramp_up_mw_h) else self.ramp_up_mw_h
        rd = self.ramp_down_mw_h * factor if math.isfinite(self.ramp_down_mw_h) else self.ramp_down_mw_h
        return replace(
            self,
            p_max_mw=self.p_max_mw * factor,
            p_min_stable_mw=self.p_min_stable_mw * factor,
            ramp_up_mw_h=ru,
            ramp_down_mw_h=rd,
        )


@dataclass(frozen=True)
class RenewableCluster:
    id: str
    bus: str
    kind: str                 # wind | solar | RoR
    capacity_mw: float
    curtailment_cost: float   # currency/MWh

    def scaled(self, capacity_mw: float) -> "RenewableCluster":
        return replace(self, capacity_mw=capacity_mw)


@dataclass(frozen=True)
class ElectricNetwork:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    clusters: tuple[RenewableCluster, ...] = ()
    boundary_buses: tuple[tuple[str, str], ...] = ()  # (interconnector id, bus id)

    def bus_ids(self) -> list[str]:
        return [b.id for b in self.buses]

    def bus(self, bus_id: str) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(bus_id)

    def generators_at(self, bus_id: str) -> list[Generator]:
        return [g for g in self.generators if g.bus == bus_id]

    def islands(self) -> list[set[str]]:
        """Connected components over (buses, lines), sorted by smallest bus id."""
        adjacency: dict[str, set[str]] = {b.id: set() for b in self.buses}
        for ln in self.lines:
            if ln.from_bus in adjacency and ln.to_bus in adjacency:
                adjacency[ln.from_bus].add(ln.to_bus)
                adjacency[ln.to_bus].add(ln.from_bus)
        seen: set[str] = set()
        comps: list[set[str]] = []
        for bus in sorted(adjacency):
            if bus in seen:
                continue
            stack, comp = [bus], set()
            while stack:
                node = stack.pop()
                if node in comp:
                    continue
                comp.add(node)
                stack.extend(adjacency[node] - comp)
            comps.append(comp)
            seen |= comp
        return sorted(comps, key=min)


def validate_electric_network(net: ElectricNetwork) -> ValidationReport:
    """Check every electric-side invariant; findings instead of exceptions."""
    report = ValidationReport()
    bus_ids = [b.id for b in net.buses]
    bus_set = set(bus_ids)
    if len(bus_ids) != len(bus_set):
        dupes = sorted({b for b in bus_ids if bus_ids.count(b) > 1})
        report.add("topology", "", f"duplicate bus ids: {', '.join(dupes)}")

    seen_lines: set[str] = set()
    for ln in net.lines:
        if ln.id in seen_lines:
            report.add("line", ln.id, "duplicate line id")
        seen_lines.add(ln.id)
        for end in (ln.from_bus, ln.to_bus):
            if end not in bus_set:
                report.add("line", ln.id, f"unknown endpoint {end}")
        if ln.from_bus == ln.to_bus:
            report.add("line", ln.id, "self-loop")
        if ln.rating_mw <= 0:
            report.add("line", ln.id, "nonpositive rating")
        if ln.reactance_pu <= 0:
            report.add("line", ln.id, "nonpositive reactance")

    seen_gens: set[str] = set()
    for g in net.generators:
        if g.id in seen_gens:
            report.add("generator", g.id, "duplicate generator id")
        seen_gens.add(g.id)
        if g.bus not in bus_set:
            report.add("generator", g.id, f"unknown bus {g.bus}")
        if g.tech not in TECHS:
            report.add("generator", g.id, f"unknown tech {g.tech}")
        if not 0 <= g.p_min_stable_mw <= g.p_max_mw:
            report.add("generator", g.id, "requires 0 <= p_min_stable <= p_max")
        if g.ramp_up_mw_h < 0 or g.ramp_down_mw_h < 0:
            report.add("generator", g.id, "negative ramp limit")
        if g.min_up_h < 1 or g.min_down_h < 1:
            report.add("generator", g.id, "min up/down times must be >= 1 h")
        if g.gfpp != (g.tech in GFPP_TECHS):
            report.add("generator", g.id, "gfpp flag must match tech in {OCGT, CCGT}")

    seen_clusters: set[str] = set()
    for c in net.clusters:
        if c.id in seen_clusters:
            report.add("cluster", c.id, "duplicate cluster id")
        seen_clusters.add(c.id)
        if c.bus not in bus_set:
            report.add("cluster", c.id, f"unknown bus {c.bus}")
        if c.kind not in CLUSTER_KINDS:
            report.add("cluster", c.id, f"unknown kind {c.kind}")
        if c.capacity_mw <= 0:
            report.add("cluster", c.id, "nonpositive capacity")
        if c.curtailment_cost < 0:
            report.add("cluster", c.id, "negative curtailment cost")

    for ic, bus in net.boundary_buses:
        if bus not in bus_set:
            report.add("interconnector", ic, f"unknown boundary bus {bus}")

    # Exactly one reference bus per island.
    for island in net.islands():
        refs = [b.id for b in net.buses if b.id in island and b.reference]
        if not refs:
            report.add("topology", min(island), "island without a reference bus")
        elif len(refs) > 1:
            report.add("topology", min(island), f"multiple slack buses: {', '.join(sorted(refs))}")
    return report
