"""Network description files (JSON): loaders, writers, digesting.

Two files describe a system: electric.json (buses, lines, generators,
RES clusters, boundary buses, GFPP couplings) and gas.json (nodes, pipes,
compressors, injectors, gas properties).  Field names mirror the domain
types; pressures are written in bar and converted to Pa on load, heating
values in MJ/kg to J/kg.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .gasnet import Compressor, GasNetwork, GasNode, GasProperties, Injector, Pipe
from .network import Bus, ElectricNetwork, Generator, Line, RenewableCluster
from .system import CouplingMap, CouplingPoint
from .units import bar_to_pa, pa_to_bar

ELECTRIC_FORMAT = "nexus-electric-1"
GAS_FORMAT = "nexus-gas-1"


class NetworkFileError(Exception):
    pass


def load_electric(path: str | Path) -> tuple[ElectricNetwork, CouplingMap]:
    raw = json.loads(Path(path).read_text())
    if raw.get("format") != ELECTRIC_FORMAT:
        raise NetworkFileError(f"{path}: unknown format tag {raw.get('format')!r}")
    buses = tuple(Bus(b["id"], bool(b.get("reference", False))) for b in raw["buses"])
    lines = tuple(
        Line(l["id"], l["from_bus"], l["to_bus"],
             float(l["rating_mw"]), float(l["reactance_pu"]))
        for l in raw.get("lines", [])
    )
    gens = tuple(
        Generator(
            g["id"], g["bus"], g["tech"],
            p_max_mw=float(g["p_max_mw"]),
            p_min_stable_mw=float(g.get("p_min_stable_mw", 0.0)),
            ramp_up_mw_h=float(g.get("ramp_up_mw_h", float("inf"))),
            ramp_down_mw_h=float(g.get("ramp_down_mw_h", float("inf"))),
            min_up_h=int(g.get("min_up_h", 1)),
            min_down_h=int(g.get("min_down_h", 1)),
            cost_energy=float(g.get("cost_energy_per_mwh", 0.0)),
            cost_startup=float(g.get("cost_startup", 0.0)),
            cost_shutdown=float(g.get("cost_shutdown", 0.0)),
            gfpp=bool(g.get("gfpp", g["tech"] in ("OCGT", "CCGT"))),
        )
        for g in raw.get("generators", [])
    )
    clusters = tuple(
        RenewableCluster(c["id"], c["bus"], c["kind"], float(c["capacity_mw"]),
                         float(c.get("curtailment_cost_per_mwh", 0.0)))
        for c in raw.get("clusters", [])
    )
    boundary = tuple(sorted(raw.get("boundary_buses", {}).items()))
    couplings = tuple(
        CouplingPoint(c["generator"], c["gas_node"], float(c["efficiency"]),
                      float(c["hhv_mj_per_kg"]) * 1e6)
        for c in raw.get("couplings", [])
    )
    net = ElectricNetwork(buses, lines, gens, clusters, boundary)
    return net, CouplingMap(couplings)


def load_gas(path: str | Path) -> GasNetwork:
    raw = json.loads(Path(path).read_text())
    if raw.get("format") != GAS_FORMAT:
        raise NetworkFileError(f"{path}: unknown format tag {raw.get('format')!r}")
    pr = raw.get("properties", {})
    props = GasProperties(
        sound_speed=float(pr.get("sound_speed_m_s", 350.0)),
        gas_constant_b=float(pr.get("gas_constant_b_m3_kg", 0.0)),
        gravity=float(pr.get("gravity_m_s2", 9.81)),
        temperature=float(pr.get("temperature_k", 288.15)),
        standard_density=float(pr.get("standard_density_kg_m3", 0.7165)),
    )
    nodes = tuple(
        GasNode(n["id"], bar_to_pa(float(n.get("p_min_bar", 38.0))),
                bar_to_pa(float(n.get("p_max_bar", 95.0))),
                float(n.get("elevation_m", 0.0)))
        for n in raw["nodes"]
    )
    pipes = tuple(
        Pipe(p["id"], p["from_node"], p["to_node"],
             length_m=float(p["length_m"]),
             diameter_m=float(p["diameter_m"]),
             friction=float(p.get("friction", 0.01)),
             height_change_m=float(p.get("height_change_m", 0.0)),
             cross_section_m2=float(p.get("cross_section_m2", 0.0)))
        for p in raw.get("pipes", [])
    )
    comps = tuple(
        Compressor(c["id"], c["from_node"], c["to_node"],
                   pressure_ratio=float(c["pressure_ratio"]),
                   rated_power_mw=float(c.get("rated_power_mw", 50.0)),
                   drive=c.get("drive", "gas"),
                   electric_bus=c.get("electric_bus"))
        for c in raw.get("compressors", [])
    )
    injectors = tuple(
        Injector(i["id"], i["node"], i["kind"],
                 nominal_capacity_kg_s=float(i["nominal_capacity_kg_s"]),
                 scheduled_rate_kg_s=float(i.get("scheduled_rate_kg_s", 0.0)))
        for i in raw.get("injectors", [])
    )
    return GasNetwork(nodes, pipes, comps, injectors, (), props)


def write_electric(net: ElectricNetwork, cmap: CouplingMap, path: str | Path) -> None:
    doc = {
        "format": ELECTRIC_FORMAT,
        "buses": [{"id": b.id, "reference": b.reference} for b in net.buses],
        "lines": [
            {"id": l.id, "from_bus": l.from_bus, "to_bus": l.to_bus,
             "rating_mw": l.rating_mw, "reactance_pu": l.reactance_pu}
            for l in net.lines
        ],
        "generators": [
            {"id": g.id, "bus": g.bus, "tech": g.tech, "p_max_mw": g.p_max_mw,
             "p_min_stable_mw": g.p_min_stable_mw,
             "ramp_up_mw_h": g.ramp_up_mw_h, "ramp_down_mw_h": g.ramp_down_mw_h,
             "min_up_h": g.min_up_h, "min_down_h": g.min_down_h,
             "cost_energy_per_mwh": g.cost_energy,
             "cost_startup": g.cost_startup, "cost_shutdown": g.cost_shutdown,
             "gfpp": g.gfpp}
            for g in net.generators
        ],
        "clusters": [
            {"id": c.id, "bus": c.bus, "kind": c.kind, "capacity_mw": c.capacity_mw,
             "curtailment_cost_per_mwh": c.curtailment_cost}
            for c in net.clusters
        ],
        "boundary_buses": dict(net.boundary_buses),
        "couplings": [
            {"generator": e.generator, "gas_node": e.gas_node,
             "efficiency": e.efficiency, "hhv_mj_per_kg": e.hhv_j_kg / 1e6}
            for e in cmap.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def write_gas(net: GasNetwork, path: str | Path) -> None:
    pr = net.properties
    doc = {
        "format": GAS_FORMAT,
        "properties": {
            "sound_speed_m_s": pr.sound_speed,
            "gas_constant_b_m3_kg": pr.gas_constant_b,
            "gravity_m_s2": pr.gravity,
            "temperature_k": pr.temperature,
            "standard_density_kg_m3": pr.standard_density,
        },
        "nodes": [
            {"id": n.id, "p_min_bar": pa_to_bar(n.p_min_pa),
             "p_max_bar": pa_to_bar(n.p_max_pa), "elevation_m": n.elevation_m}
            for n in net.nodes
        ],
        "pipes": [
            {"id": p.id, "from_node": p.from_node, "to_node": p.to_node,
             "length_m": p.length_m, "diameter_m": p.diameter_m,
             "friction": p.friction, "height_change_m": p.height_change_m}
            for p in net.pipes
        ],
        "compressors": [
            {"id": c.id, "from_node": c.from_node, "to_node": c.to_node,
             "pressure_ratio": c.pressure_ratio, "rated_power_mw": c.rated_power_mw,
             "drive": c.drive, "electric_bus": c.electric_bus}
            for c in net.compressors
        ],
        "injectors": [
            {"id": i.id, "node": i.node, "kind": i.kind,
             "nominal_capacity_kg_s": i.nominal_capacity_kg_s,
             "scheduled_rate_kg_s": i.scheduled_rate_kg_s}
            for i in net.injectors
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def sha256_of(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
