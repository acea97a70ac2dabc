"""Planning-model output bundles and their spatial disaggregation.

A bundle directory holds scenario.json (national capacities and hourly
series, all unit-tagged), load_snapshot.json (per-bus load shares) and
gas_demand_split.json (nodal fractions of the non-electric gas demand).
National quantities are mapped onto the network by three rules: new
capacity lands at the sites of pre-existing plants of the same type,
solar is spread uniformly over the solar-hosting buses, and load scales
a known snapshot.  Every disaggregation conserves the national totals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .gasnet import GasNetwork
from .network import ElectricNetwork, RES_TECHS
from .system import CoupledSystem
from .uc import UcInputs
from .validation import ValidationReport
from .units import mcm_per_day_to_kg_s


class SchemaError(Exception):
    """The bundle violates the documented file layout."""


class UnitError(Exception):
    """A series or quantity lacks its unit tag or uses the wrong unit."""


class NoHostBus(Exception):
    """A technology has national capacity but no pre-existing site."""


class InfeasibleProfile(Exception):
    """A national RES series exceeds the installed capacity of its kind."""


@dataclass
class LoadSnapshot:
    shares: dict[str, float]


@dataclass
class ScenarioBundle:
    pathway: str
    year: int
    horizon: int
    capacity_mw: dict[str, float]
    load_mw: np.ndarray
    wind_mw: np.ndarray
    solar_mw: np.ndarray
    ror_mw: np.ndarray
    interconnector_mw: dict[str, np.ndarray]    # net import (+) per interconnector
    gas_demand_mcm_d: float
    gas_demand_shape: np.ndarray                # 24 weights, mean 1
    gas_export_mcm_d: float
    gas_export_node: str | None
    reserve_mw: float
    load_snapshot: LoadSnapshot = field(default_factory=lambda: LoadSnapshot({}))
    gas_split: dict[str, float] = field(default_factory=dict)
    initial_state: dict[str, tuple[int, float]] = field(default_factory=dict)


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise SchemaError(f"{where}: missing key '{key}'")
    return mapping[key]


def _tagged_series(obj, unit: str, length: int, where: str) -> np.ndarray:
    if not isinstance(obj, dict) or "values" not in obj:
        raise SchemaError(f"{where}: expected a tagged series object")
    if "unit" not in obj:
        raise UnitError(f"{where}: series lacks a unit tag")
    if obj["unit"] != unit:
        raise UnitError(f"{where}: unit '{obj['unit']}', expected '{unit}'")
    values = np.asarray(obj["values"], dtype=float)
    if len(values) != length:
        raise SchemaError(f"{where}: series length {len(values)}, expected {length}")
    return values


def _tagged_value(obj, unit: str, where: str) -> float:
    if not isinstance(obj, dict) or "value" not in obj:
        raise SchemaError(f"{where}: expected a tagged value object")
    if "unit" not in obj:
        raise UnitError(f"{where}: value lacks a unit tag")
    if obj["unit"] != unit:
        raise UnitError(f"{where}: unit '{obj['unit']}', expected '{unit}'")
    return float(obj["value"])


def load_bundle(path: str | Path) -> ScenarioBundle:
    """Read and validate a scenario bundle directory."""
    path = Path(path)
    scenario_file = path / "scenario.json"
    if not scenario_file.exists():
        raise SchemaError(f"{path}: scenario.json not found")
    raw = json.loads(scenario_file.read_text())
    if raw.get("format") != "nexus-scenario-1":
        raise SchemaError(f"{scenario_file}: unknown format tag {raw.get('format')!r}")
    h = int(_require(raw, "horizon_hours", str(scenario_file)))
    if h < 1:
        raise SchemaError(f"{scenario_file}: nonpositive horizon")

    cap_obj = _require(raw, "capacity", str(scenario_file))
    if "unit" not in cap_obj:
        raise UnitError(f"{scenario_file}: capacity lacks a unit tag")
    if cap_obj["unit"] != "MW":
        raise UnitError(f"{scenario_file}: capacity unit must be MW")
    capacity = {k: float(v) for k, v in cap_obj["values"].items()}
    for tech, mw in capacity.items():
        if mw < 0:
            raise SchemaError(f"{scenario_file}: negative capacity for {tech}")

    load = _tagged_series(_require(raw, "load", str(scenario_file)), "MW", h, "load")
    wind = _tagged_series(_require(raw, "wind", str(scenario_file)), "MW", h, "wind")
    solar = _tagged_series(_require(raw, "solar", str(scenario_file)), "MW", h, "solar")
    ror = _tagged_series(raw.get("ror", {"unit": "MW", "values": [0.0] * h}),
                         "MW", h, "ror")
    inter = {}
    for ic, obj in raw.get("interconnectors", {}).items():
        inter[ic] = _tagged_series(obj, "MW", h, f"interconnector {ic}")

    gas_obj = _require(raw, "non_electric_gas_demand", str(scenario_file))
    gas_total = _tagged_value(gas_obj, "mcm_per_day", "non_electric_gas_demand")
    shape = np.asarray(gas_obj.get("hourly_shape", [1.0] * 24), dtype=float)
    if len(shape) != 24:
        raise SchemaError(f"{scenario_file}: gas demand shape needs 24 weights")
    if np.any(shape < 0):
        raise SchemaError(f"{scenario_file}: negative gas demand shape weight")
    if shape.mean() > 0:
        shape = shape / shape.mean()

    export_obj = raw.get("gas_export")
    if export_obj is not None:
        export = _tagged_value(export_obj, "mcm_per_day", "gas_export")
        export_node = export_obj.get("node")
        if export > 0 and not export_node:
            raise SchemaError(f"{scenario_file}: gas export without a boundary node")
    else:
        export, export_node = 0.0, None

    reserve = _tagged_value(raw.get("reserve", {"unit": "MW", "value": 0.0}),
                            "MW", "reserve")

    snapshot_file = path / "load_snapshot.json"
    if not snapshot_file.exists():
        raise SchemaError(f"{path}: load_snapshot.json not found")
    snap = json.loads(snapshot_file.read_text())
    shares = {k: float(v) for k, v in _require(snap, "shares", str(snapshot_file)).items()}
    total = sum(shares.values())
    if abs(total - 1.0) > 1e-9:
        raise SchemaError(f"{snapshot_file}: shares sum to {total}, expected 1")

    split_file = path / "gas_demand_split.json"
    if not split_file.exists():
        raise SchemaError(f"{path}: gas_demand_split.json not found")
    split_raw = json.loads(split_file.read_text())
    split = {k: float(v) for k, v in _require(split_raw, "fractions", str(split_file)).items()}
    total = sum(split.values())
    if abs(total - 1.0) > 1e-9:
        raise SchemaError(f"{split_file}: fractions sum to {total}, expected 1")

    initial = {}
    for gid, st in raw.get("initial_state", {}).items():
        initial[gid] = (int(st.get("committed", 0)), float(st.get("output_mw", 0.0)))

    return ScenarioBundle(
        pathway=str(raw.get("pathway", "unnamed")),
        year=int(raw.get("year", 0)),
        horizon=h,
        capacity_mw=capacity,
        load_mw=load, wind_mw=wind, solar_mw=solar, ror_mw=ror,
        interconnector_mw=inter,
        gas_demand_mcm_d=gas_total,
        gas_demand_shape=shape,
        gas_export_mcm_d=export,
        gas_export_node=export_node,
        reserve_mw=reserve,
        load_snapshot=LoadSnapshot(shares),
        gas_split=split,
        initial_state=initial,
    )


def validate_bundle(bundle: ScenarioBundle, sys: CoupledSystem) -> ValidationReport:
    """Cross-checks between a bundle and the networks it will drive."""
    rep = ValidationReport()
    bus_ids = set(sys.electric.bus_ids())
    for bus in bundle.load_snapshot.shares:
        if bus not in bus_ids:
            rep.add("snapshot", bus, "unknown bus in load snapshot")
    gas_nodes = {n.id for n in sys.gas.nodes}
    for node in bundle.gas_split:
        if node not in gas_nodes:
            rep.add("gas_split", node, "unknown gas node in demand split")
    if bundle.gas_export_node and bundle.gas_export_node not in gas_nodes:
        rep.add("gas_export", bundle.gas_export_node, "unknown export node")
    boundary = dict(sys.electric.boundary_buses)
    for ic in bundle.interconnector_mw:
        if ic not in boundary:
            rep.add("interconnector", ic, "no boundary bus mapped in the electric network")
    density = sys.gas.properties.standard_density
    supply_cap = sum(i.nominal_capacity_kg_s for i in sys.gas.injectors)
    need = mcm_per_day_to_kg_s(bundle.gas_demand_mcm_d + bundle.gas_export_mcm_d, density)
    if need > supply_cap:
        rep.add("gas_supply", "", (
            f"peak-day gas requirement {need:.1f} kg/s exceeds injection "
            f"capability {supply_cap:.1f} kg/s"
        ))
    for tech, mw in bundle.capacity_mw.items():
        if mw > 0 and not _hosts(sys.electric, tech):
            rep.add("capacity", tech, "national capacity with no host site in the network")
    return rep


def _hosts(net: ElectricNetwork, tech: str) -> bool:
    if tech in RES_TECHS:
        return any(c.kind == tech for c in net.clusters)
    return any(g.tech == tech for g in net.generators)


# --- disaggregation rules ------------------------------------------------------


def disaggregate_capacity(bundle: ScenarioBundle,
                          net: ElectricNetwork) -> dict[str, dict[str, float]]:
    """National capacity per tech -> per-bus capacity.

    Non-solar capacity lands proportionally to the pre-existing capacity of
    the same tech; solar is split uniformly over the buses hosting a solar
    cluster.  Technologies absent from the bundle keep their network values.
    """
    out: dict[str, dict[str, float]] = {}
    for tech, national in bundle.capacity_mw.items():
        existing: dict[str, float] = {}
        if tech in RES_TECHS:
            for c in net.clusters:
                if c.kind == tech:
                    existing[c.bus] = existing.get(c.bus, 0.0) + c.capacity_mw
        else:
            for g in net.generators:
                if g.tech == tech:
                    existing[g.bus] = existing.get(g.bus, 0.0) + g.p_max_mw
        if not existing:
            if national > 0:
                raise NoHostBus(f"no pre-existing site for tech {tech}")
            continue
        if tech == "solar":
            share = national / len(existing)
            out[tech] = {bus: share for bus in sorted(existing)}
        else:
            total = sum(existing.values())
            if total <= 0:
                raise NoHostBus(f"tech {tech} has hosts with zero capacity")
            out[tech] = {bus: national * mw / total for bus, mw in sorted(existing.items())}
    return out


def apply_capacity(sys: CoupledSystem,
                   allocation: dict[str, dict[str, float]]) -> CoupledSystem:
    """Rescale generators and clusters to the disaggregated capacities."""
    net = sys.electric
    existing_gen: dict[tuple[str, str], float] = {}
    for g in net.generators:
        key = (g.tech, g.bus)
        existing_gen[key] = existing_gen.get(key, 0.0) + g.p_max_mw
    existing_cl: dict[tuple[str, str], float] = {}
    for c in net.clusters:
        key = (c.kind, c.bus)
        existing_cl[key] = existing_cl.get(key, 0.0) + c.capacity_mw

    new_gens = []
    for g in net.generators:
        alloc = allocation.get(g.tech)
        if alloc is None or g.bus not in alloc:
            new_gens.append(g)
            continue
        factor = alloc[g.bus] / existing_gen[(g.tech, g.bus)]
        new_gens.append(g.scaled(factor))
    new_clusters = []
    for c in net.clusters:
        alloc = allocation.get(c.kind)
        if alloc is None or c.bus not in alloc:
            new_clusters.append(c)
            continue
        factor = alloc[c.bus] / existing_cl[(c.kind, c.bus)]
        new_clusters.append(c.scaled(c.capacity_mw * factor))
    electric = replace(net, generators=tuple(new_gens), clusters=tuple(new_clusters))
    return sys.replace_electric(electric)


def disaggregate_load(bundle: ScenarioBundle,
                      snapshot: LoadSnapshot) -> dict[str, np.ndarray]:
    """Per-bus hourly load by proportional scaling of the snapshot shares."""
    total = sum(snapshot.shares.values())
    if abs(total - 1.0) > 1e-9:
        raise SchemaError(f"snapshot shares sum to {total}, expected 1")
    return {bus: share * bundle.load_mw for bus, share in snapshot.shares.items()}


def scale_res_profiles(series_mw: np.ndarray,
                       capacities_mw: dict[str, float]) -> dict[str, np.ndarray]:
    """Split a national RES series over clusters proportionally to capacity.

    Cluster availability is clamped at the cluster capacity and the excess
    is redistributed over the unclamped clusters, iterated to a fixpoint.
    Raises InfeasibleProfile when the series momentarily exceeds the total
    installed capacity.
    """
    ids = sorted(capacities_mw)
    caps = np.array([capacities_mw[i] for i in ids], dtype=float)
    total_cap = caps.sum()
    series = np.asarray(series_mw, dtype=float)
    over = series > total_cap * (1 + 1e-9)
    if over.any():
        hour = int(np.argmax(over)) + 1
        raise InfeasibleProfile(
            f"national series exceeds installed capacity ({total_cap:.1f} MW) "
            f"first at hour {hour}"
        )
    h = len(series)
    out = np.zeros((len(ids), h))
    for t in range(h):
        remaining = float(series[t])
        free = np.ones(len(ids), dtype=bool)
        alloc = np.zeros(len(ids))
        for _ in range(len(ids) + 1):
            if remaining <= 1e-12 or not free.any():
                break
            weights = caps[free]
            share = remaining * weights / weights.sum()
            idx = np.flatnonzero(free)
            headroom = caps[idx] - alloc[idx]
            take = np.minimum(share, headroom)
            alloc[idx] += take
            remaining -= float(take.sum())
            free[idx[headroom - take <= 1e-12]] = False
        out[:, t] = alloc
    return {cid: out[i] for i, cid in enumerate(ids)}


# --- study input assembly ---------------------------------------------------------


def build_study_inputs(sys: CoupledSystem, bundle: ScenarioBundle):
    """Disaggregate a bundle onto the system: returns (scaled system, UcInputs,
    firm gas off-takes by node)."""
    from .coupling import GasScenario

    allocation = disaggregate_capacity(bundle, sys.electric)
    scaled = apply_capacity(sys, allocation)
    bus_load = disaggregate_load(bundle, bundle.load_snapshot)

    availability: dict[str, np.ndarray] = {}
    for kind, series in (("wind", bundle.wind_mw), ("solar", bundle.solar_mw),
                         ("RoR", bundle.ror_mw)):
        caps = {c.id: c.capacity_mw for c in scaled.electric.clusters if c.kind == kind}
        if not caps:
            continue
        availability.update(scale_res_profiles(series, caps))

    boundary = dict(sys.electric.boundary_buses)
    net_import: dict[str, np.ndarray] = {}
    for ic, series in bundle.interconnector_mw.items():
        bus = boundary[ic]
        net_import[bus] = net_import.get(bus, np.zeros(bundle.horizon)) + series

    inputs = UcInputs(
        horizon=bundle.horizon,
        bus_load_mw=bus_load,
        availability_mw=availability,
        net_import_mw=net_import,
        initial_state=dict(bundle.initial_state),
    )

    density = sys.gas.properties.standard_density
    total_kg_s = mcm_per_day_to_kg_s(bundle.gas_demand_mcm_d, density)
    firm: dict[str, np.ndarray] = {}
    for node, frac in bundle.gas_split.items():
        firm[node] = frac * total_kg_s * bundle.gas_demand_shape[: bundle.horizon]
    if bundle.gas_export_mcm_d > 0 and bundle.gas_export_node:
        export_kg_s = mcm_per_day_to_kg_s(bundle.gas_export_mcm_d, density)
        flat = np.full(bundle.horizon, export_kg_s)
        node = bundle.gas_export_node
        firm[node] = firm.get(node, np.zeros(bundle.horizon)) + flat
    return scaled, inputs, GasScenario(firm_offtakes_kg_s=firm)
