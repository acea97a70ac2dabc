"""Gas network description: nodes, pipes, compressors, injectors, demands.

Compressor stations impose a constant pressure ratio between their end
nodes and partition the network into zones (maximal pipe-connected
subgraphs).  Zones scope both area linepack accounting and curtailment
sizing when pressure violations occur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .validation import ValidationReport


@dataclass(frozen=True)
class GasProperties:
    sound_speed: float = 350.0          # m/s
    gas_constant_b: float = 0.0         # m3/kg, only enters the temperature term
    gravity: float = 9.81               # m/s2
    temperature: float = 288.15         # K (isothermal closure: held constant)
    standard_density: float = 0.7165    # kg per standard m3, for mcm conversions


@dataclass(frozen=True)
class GasNode:
    id: str
    p_min_pa: float
    p_max_pa: float
    elevation_m: float = 0.0


@dataclass(frozen=True)
class Pipe:
    id: str
    from_node: str
    to_node: str
    length_m: float
    diameter_m: float
    friction: float = 0.01          # hydraulic resistance coefficient, constant
    height_change_m: float = 0.0    # to_node minus from_node elevation along the run
    cross_section_m2: float = 0.0   # derived from diameter when left at 0

    def __post_init__(self):
        if self.cross_section_m2 == 0.0 and self.diameter_m > 0:
            object.__setattr__(
                self, "cross_section_m2", math.pi * self.diameter_m**2 / 4.0
            )


@dataclass(frozen=True)
class Compressor:
    id: str
    from_node: str
    to_node: str
    pressure_ratio: float
    rated_power_mw: float = 50.0
    drive: str = "gas"              # gas | electric
    electric_bus: str | None = None

    def bypassed(self) -> "Compressor":
        """Outage view: station passes flow through without boosting."""
        return replace(self, pressure_ratio=1.0)


@dataclass(frozen=True)
class Injector:
    id: str
    node: str
    kind: str                       # terminal | storage
    nominal_capacity_kg_s: float
    scheduled_rate_kg_s: float = 0.0


@dataclass(frozen=True)
class GasDemand:
    """Hourly mass off-take at a node; firm demand cannot be curtailed."""

    node: str
    profile_kg_s: tuple[float, ...]
    firm: bool = True


@dataclass(frozen=True)
class GasNetwork:
    nodes: tuple[GasNode, ...]
    pipes: tuple[Pipe, ...]
    compressors: tuple[Compressor, ...] = ()
    injectors: tuple[Injector, ...] = ()
    demands: tuple[GasDemand, ...] = ()
    properties: GasProperties = GasProperties()

    def node(self, node_id: str) -> GasNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def with_compressor_bypassed(self, compressor_id: str) -> "GasNetwork":
        comps = tuple(
            c.bypassed() if c.id == compressor_id else c for c in self.compressors
        )
        return replace(self, compressors=comps)


def compute_zones(net: GasNetwork) -> dict[str, str]:
    """Map node id -> zone id; zones are pipe-connected components.

    Compressor edges delimit zones regardless of their current ratio, so a
    bypassed station does not relabel zones mid-study.  Zone ids are stable:
    Z01, Z02, ... ordered by the smallest node id they contain.
    """
    adjacency: dict[str, set[str]] = {n.id: set() for n in net.nodes}
    for p in net.pipes:
        if p.from_node in adjacency and p.to_node in adjacency:
            adjacency[p.from_node].add(p.to_node)
            adjacency[p.to_node].add(p.from_node)
    comps: list[set[str]] = []
    seen: set[str] = set()
    for node in sorted(adjacency):
        if node in seen:
            continue
        stack, comp = [node], set()
        while stack:
            cur = stack.pop()
            if cur in comp:
                continue
            comp.add(cur)
            stack.extend(adjacency[cur] - comp)
        comps.append(comp)
        seen |= comp
    comps.sort(key=min)
    zones: dict[str, str] = {}
    for i, comp in enumerate(comps, start=1):
        zid = f"Z{i:02d}"
        for node in comp:
            zones[node] = zid
    return zones


def zone_ids(net: GasNetwork) -> list[str]:
    return sorted(set(compute_zones(net).values()))


def is_connected(net: GasNetwork) -> bool:
    """Connectivity over pipes and compressor branches together."""
    if not net.nodes:
        return True
    adjacency: dict[str, set[str]] = {n.id: set() for n in net.nodes}
    for p in net.pipes:
        if p.from_node in adjacency and p.to_node in adjacency:
            adjacency[p.from_node].add(p.to_node)
            adjacency[p.to_node].add(p.from_node)
    for c in net.compressors:
        if c.from_node in adjacency and c.to_node in adjacency:
            adjacency[c.from_node].add(c.to_node)
            adjacency[c.to_node].add(c.from_node)
    start = net.nodes[0].id
    stack, seen = [start], {start}
    while stack:
        cur = stack.pop()
        for nxt in adjacency[cur]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(net.nodes)


def validate_gas_network(net: GasNetwork) -> ValidationReport:
    report = ValidationReport()
    node_ids = [n.id for n in net.nodes]
    node_set = set(node_ids)
    if len(node_ids) != len(node_set):
        dupes = sorted({n for n in node_ids if node_ids.count(n) > 1})
        report.add("topology", "", f"duplicate node ids: {', '.join(dupes)}")

    for n in net.nodes:
        if n.p_min_pa <= 0:
            report.add("node", n.id, "nonpositive minimum pressure")
        if n.p_min_pa >= n.p_max_pa:
            report.add("node", n.id, "empty pressure band")

    seen_pipes: set[str] = set()
    for p in net.pipes:
        if p.id in seen_pipes:
            report.add("pipe", p.id, "duplicate pipe id")
        seen_pipes.add(p.id)
        for end in (p.from_node, p.to_node):
            if end not in node_set:
                report.add("pipe", p.id, f"unknown endpoint {end}")
        if p.from_node == p.to_node:
            report.add("pipe", p.id, "self-loop")
        if p.length_m <= 0:
            report.add("pipe", p.id, "nonpositive length")
        if p.diameter_m <= 0:
            report.add("pipe", p.id, "nonpositive diameter")
        else:
            expected = math.pi * p.diameter_m**2 / 4.0
            if not np.isclose(p.cross_section_m2, expected, rtol=1e-9, atol=0.0):
                report.add("pipe", p.id, "cross section inconsistent with diameter")
        if not 0 < p.friction <= 0.1:
            report.add("pipe", p.id, "friction outside (0, 0.1]")

    seen_comp: set[str] = set()
    for c in net.compressors:
        if c.id in seen_comp:
            report.add("compressor", c.id, "duplicate compressor id")
        seen_comp.add(c.id)
        for end in (c.from_node, c.to_node):
            if end not in node_set:
                report.add("compressor", c.id, f"unknown endpoint {end}")
        if c.pressure_ratio < 1.0:
            report.add("compressor", c.id, "pressure ratio below 1")
        if c.rated_power_mw <= 0:
            report.add("compressor", c.id, "nonpositive rated power")
        if c.drive not in ("gas", "electric"):
            report.add("compressor", c.id, f"unknown drive {c.drive}")
        if c.drive == "electric" and not c.electric_bus:
            report.add("compressor", c.id, "electric drive without a bus binding")

    seen_inj: set[str] = set()
    for inj in net.injectors:
        if inj.id in seen_inj:
            report.add("injector", inj.id, "duplicate injector id")
        seen_inj.add(inj.id)
        if inj.node not in node_set:
            report.add("injector", inj.id, f"unknown node {inj.node}")
        if inj.kind not in ("terminal", "storage"):
            report.add("injector", inj.id, f"unknown kind {inj.kind}")
        if inj.nominal_capacity_kg_s < 0:
            report.add("injector", inj.id, "negative nominal capacity")
        if not 0 <= inj.scheduled_rate_kg_s <= inj.nominal_capacity_kg_s:
            report.add("injector", inj.id, "scheduled rate outside [0, nominal]")

    seen_demand: set[tuple[str, bool]] = set()
    for d in net.demands:
        if d.node not in node_set:
            report.add("demand", d.node, "unknown node")
        key = (d.node, d.firm)
        if key in seen_demand:
            report.add("demand", d.node, "duplicate profile for (node, firm) pair")
        seen_demand.add(key)
        if any(x < 0 for x in d.profile_kg_s):
            report.add("demand", d.node, "negative off-take")

    if net.properties.sound_speed <= 0:
        report.add("properties", "", "nonpositive sound speed")
    if net.properties.temperature <= 0:
        report.add("properties", "", "nonpositive temperature")
    if net.properties.standard_density <= 0:
        report.add("properties", "", "nonpositive standard density")

    if net.nodes and not is_connected(net):
        report.add("topology", "", "gas network is not connected")
    return report
