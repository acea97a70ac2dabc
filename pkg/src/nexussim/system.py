"""Coupling of the electric and gas networks through gas-fired plants.

Each GFPP converts a gas mass flow M into electric power P = M * HHV * eta,
so the coupling map has to carry the plant efficiency and the heating value
alongside the generator-to-gas-node binding.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .gasnet import GasNetwork, compute_zones, validate_gas_network
from .network import ElectricNetwork, validate_electric_network
from .validation import ValidationReport


class UnboundGfpp(Exception):
    """A gfpp-flagged generator has no entry in the coupling map."""


class DanglingNode(Exception):
    """The coupling map references a gas node absent from the network."""


@dataclass(frozen=True)
class CouplingPoint:
    generator: str
    gas_node: str
    efficiency: float     # overall plant efficiency, (0, 1]
    hhv_j_kg: float       # higher heating value, J/kg


@dataclass(frozen=True)
class CouplingMap:
    entries: tuple[CouplingPoint, ...]

    def for_generator(self, gen_id: str) -> CouplingPoint:
        for e in self.entries:
            if e.generator == gen_id:
                return e
        raise KeyError(gen_id)


@dataclass(frozen=True)
class CoupledSystem:
    """Immutable bundle of both networks plus the resolved coupling map."""

    electric: ElectricNetwork
    gas: GasNetwork
    coupling: CouplingMap

    def zones(self) -> dict[str, str]:
        return compute_zones(self.gas)

    def gfpps_in_zone(self, zone_id: str) -> list[CouplingPoint]:
        zones = self.zones()
        return [e for e in self.coupling.entries if zones[e.gas_node] == zone_id]

    def replace_electric(self, electric: ElectricNetwork) -> "CoupledSystem":
        return replace(self, electric=electric)

    def replace_gas(self, gas: GasNetwork) -> "CoupledSystem":
        return replace(self, gas=gas)


def validate_coupling(
    net_e: ElectricNetwork, net_g: GasNetwork, cmap: CouplingMap
) -> ValidationReport:
    report = ValidationReport()
    gas_nodes = {n.id for n in net_g.nodes}
    gens = {g.id: g for g in net_e.generators}
    seen: set[str] = set()
    for e in cmap.entries:
        if e.generator in seen:
            report.add("coupling", e.generator, "duplicate coupling entry")
        seen.add(e.generator)
        if e.generator not in gens:
            report.add("coupling", e.generator, "unknown generator")
        elif not gens[e.generator].gfpp:
            report.add("coupling", e.generator, "coupled generator is not a GFPP")
        if e.gas_node not in gas_nodes:
            report.add("coupling", e.generator, f"unknown gas node {e.gas_node}")
        if not 0 < e.efficiency <= 1:
            report.add("coupling", e.generator, "efficiency outside (0, 1]")
        if e.hhv_j_kg <= 0:
            report.add("coupling", e.generator, "nonpositive heating value")
    for g in net_e.generators:
        if g.gfpp and g.id not in seen:
            report.add("coupling", g.id, "GFPP missing from coupling map")
    return report


def bind_coupling(
    net_e: ElectricNetwork, net_g: GasNetwork, cmap: CouplingMap
) -> CoupledSystem:
    """Resolve the coupling map against both validated networks.

    Raises UnboundGfpp if a gfpp-flagged generator is missing from the map
    and DanglingNode if the map references a gas node the network lacks.
    """
    rep_e = validate_electric_network(net_e)
    rep_g = validate_gas_network(net_g)
    if not rep_e.ok:
        raise ValueError(f"electric network invalid: {rep_e}")
    if not rep_g.ok:
        raise ValueError(f"gas network invalid: {rep_g}")

    gas_nodes = {n.id for n in net_g.nodes}
    mapped = {e.generator for e in cmap.entries}
    for g in net_e.generators:
        if g.gfpp and g.id not in mapped:
            raise UnboundGfpp(f"GFPP {g.id} missing from coupling map")
    for e in cmap.entries:
        if e.gas_node not in gas_nodes:
            raise DanglingNode(f"coupling for {e.generator} references unknown gas node {e.gas_node}")
        if not 0 < e.efficiency <= 1:
            raise ValueError(f"coupling for {e.generator}: efficiency outside (0, 1]")
        if e.hhv_j_kg <= 0:
            raise ValueError(f"coupling for {e.generator}: nonpositive heating value")
    # Keep exactly one entry per gfpp generator, in network order.
    by_gen = {e.generator: e for e in cmap.entries}
    dupes = len(cmap.entries) - len(by_gen)
    if dupes:
        raise ValueError("coupling map holds duplicate generator entries")
    entries = tuple(by_gen[g.id] for g in net_e.generators if g.gfpp)
    return CoupledSystem(electric=net_e, gas=net_g, coupling=CouplingMap(entries))
