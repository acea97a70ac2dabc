"""Security-constrained unit commitment as a mixed-integer linear program.

Cost terms: energy, start-up and shut-down per generator, value of lost
load on shed demand, and per-MWh curtailment prices for wind, solar and
run-of-river clusters.  Constraints: nodal power balance with linearized
(B-theta) flows and line ratings, generator limits with minimum stable
generation, ramp rates, minimum up/down times, a system-wide spinning
reserve requirement over conventional units, renewable availability, a
daily-neutral reservoir balance for pumped storage, and any gas-supply
(fuel) rows accumulated by the coupling loop.

Load shedding and curtailment variables complete every balance, and the
reserve row carries a shortfall slack priced at VOLL, so the problem is
feasible by construction for any commitment pattern.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .mip import MipProblem, MipResult, solve_lp, solve_mip
from .network import CONVENTIONAL_TECHS, ElectricNetwork, Generator
from .validation import ValidationReport

# Lexicographic cost perturbation breaking ties toward lower generator ids.
# Anything below the LP solver's dual tolerance (~1e-7) is invisible to the
# simplex, so this sits slightly above it; it is stripped from every
# reported objective.
TIE_BREAK_EPS = 1e-6


class DimensionMismatch(Exception):
    """A scenario series does not span the problem horizon."""


@dataclass
class UcOptions:
    voll: float = 3000.0              # currency/MWh on shed load and reserve shortfall
    reserve_mw: float = 0.0
    gap_target: float = 1e-3
    time_limit_s: float | None = None
    node_limit: int = 150             # deterministic search cap; honest gap reported
    ps_round_trip: float = 0.75
    ps_reservoir_h: float = 6.0
    dt_h: float = 1.0


@dataclass
class UcInputs:
    """Hourly nodal series driving one commitment horizon."""

    horizon: int
    bus_load_mw: dict[str, np.ndarray]
    availability_mw: dict[str, np.ndarray] = field(default_factory=dict)
    net_import_mw: dict[str, np.ndarray] = field(default_factory=dict)
    initial_state: dict[str, tuple[int, float]] = field(default_factory=dict)


@dataclass
class FuelRow:
    """Aggregate gas-draw cap for the GFPPs of one violated zone.

    Coefficients convert MW dispatched over one period into kg of gas;
    the row enforces sum(coeff * P) <= rhs_kg over the window.
    """

    zone: str
    coeffs: dict[tuple[str, int], float]   # (generator, hour index) -> kg per MW
    rhs_kg: float
    onset_s: float
    duration_s: float
    curtailment_kg: float
    reference_draw_kg: float = 0.0
    clipped: bool = False


class _Builder:
    def __init__(self):
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.cost: list[float] = []
        self.true_cost: list[float] = []
        self.integer: list[bool] = []
        self.index: dict[tuple, int] = {}
        self.eq_rows: list[tuple[dict[int, float], float, tuple]] = []
        self.ub_rows: list[tuple[dict[int, float], float, tuple]] = []

    def var(self, key: tuple, lb: float, ub: float, cost: float,
            true_cost: float | None = None, integer: bool = False) -> int:
        idx = len(self.lb)
        self.index[key] = idx
        self.lb.append(lb)
        self.ub.append(ub)
        self.cost.append(cost)
        self.true_cost.append(cost if true_cost is None else true_cost)
        self.integer.append(integer)
        return idx

    def eq(self, coeffs: dict[int, float], rhs: float, tag: tuple) -> None:
        self.eq_rows.append((coeffs, rhs, tag))

    def le(self, coeffs: dict[int, float], rhs: float, tag: tuple) -> None:
        self.ub_rows.append((coeffs, rhs, tag))

    def compile(self) -> tuple[MipProblem, np.ndarray, list[tuple], list[tuple]]:
        n = len(self.lb)

        def matrix(rows):
            data, ri, ci = [], [], []
            rhs = np.empty(len(rows))
            for r, (coeffs, b, _tag) in enumerate(rows):
                rhs[r] = b
                for c, v in coeffs.items():
                    ri.append(r)
                    ci.append(c)
                    data.append(v)
            mat = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), n)) if rows else None
            return mat, rhs

        a_eq, b_eq = matrix(self.eq_rows)
        a_ub, b_ub = matrix(self.ub_rows)
        problem = MipProblem(
            c=np.array(self.cost),
            a_ub=a_ub, b_ub=b_ub,
            a_eq=a_eq, b_eq=b_eq,
            lb=np.array(self.lb), ub=np.array(self.ub),
            integer=np.array(self.integer),
        )
        return problem, np.array(self.true_cost), \
            [t for *_ , t in self.eq_rows], [t for *_, t in self.ub_rows]


@dataclass
class UcProblem:
    net: ElectricNetwork
    inputs: UcInputs
    options: UcOptions
    fuel_rows: list[FuelRow]
    mip: MipProblem
    true_cost: np.ndarray
    index: dict[tuple, int]
    eq_tags: list[tuple]
    ub_tags: list[tuple]

    @property
    def horizon(self) -> int:
        return self.inputs.horizon

    def idx(self, *key) -> int:
        return self.index[key]

    def count_vars(self, kind: str) -> int:
        return sum(1 for k in self.index if k[0] == kind)

    def count_rows(self, kind: str) -> int:
        return sum(1 for t in self.eq_tags if t[0] == kind) + \
            sum(1 for t in self.ub_tags if t[0] == kind)


@dataclass
class DispatchResult:
    objective: float
    gap: float
    status: str
    commitment: dict[str, np.ndarray]      # 0/1 per generator
    output_mw: dict[str, np.ndarray]
    startup: dict[str, np.ndarray]
    shutdown: dict[str, np.ndarray]
    pump_mw: dict[str, np.ndarray]
    shed_mw: dict[str, np.ndarray]         # per bus
    reserve_short_mw: np.ndarray
    curtailment_mw: dict[str, np.ndarray]  # per cluster
    flow_mw: dict[str, np.ndarray]         # per line
    theta: dict[str, np.ndarray]
    nodes: int = 0

    def total_shed_mwh(self, dt_h: float = 1.0) -> float:
        return float(sum(s.sum() for s in self.shed_mw.values()) * dt_h)

    def total_curtailment_mwh(self, dt_h: float = 1.0) -> float:
        return float(sum(s.sum() for s in self.curtailment_mw.values()) * dt_h)


def _initial(g: Generator, inputs: UcInputs) -> tuple[int, float]:
    return inputs.initial_state.get(g.id, (0, 0.0))


def _island_refs(net: ElectricNetwork) -> dict[str, str]:
    """Bus -> reference bus of its island (declared flag, else smallest id)."""
    out: dict[str, str] = {}
    for island in net.islands():
        refs = sorted(b.id for b in net.buses if b.id in island and b.reference)
        ref = refs[0] if refs else min(island)
        for b in island:
            out[b] = ref
    return out


def build_uc(net: ElectricNetwork, inputs: UcInputs, options: UcOptions,
             fuel_rows: list[FuelRow] | None = None) -> UcProblem:
    """Assemble the commitment MILP for one horizon."""
    fuel_rows = list(fuel_rows or [])
    h = inputs.horizon
    dt = options.dt_h
    for bus, series in inputs.bus_load_mw.items():
        if len(series) != h:
            raise DimensionMismatch(f"load series at {bus} has length {len(series)}, expected {h}")
    for cid, series in inputs.availability_mw.items():
        if len(series) != h:
            raise DimensionMismatch(f"availability series for {cid} has length {len(series)}, expected {h}")
    for bus, series in inputs.net_import_mw.items():
        if len(series) != h:
            raise DimensionMismatch(f"import series at {bus} has length {len(series)}, expected {h}")

    b = _Builder()
    gens = net.generators
    clusters = {c.id: c for c in net.clusters}
    for cid in inputs.availability_mw:
        if cid not in clusters:
            raise DimensionMismatch(f"availability series for unknown cluster {cid}")
    gen_rank = {g.id: i for i, g in enumerate(sorted(gens, key=lambda g: g.id))}
    eta_c = math.sqrt(options.ps_round_trip)
    eta_d = math.sqrt(options.ps_round_trip)

    # --- variables ---------------------------------------------------------
    for g in gens:
        su_cap = max(g.p_min_stable_mw, g.ramp_up_mw_h * dt) \
            if math.isfinite(g.ramp_up_mw_h) else g.p_max_mw
        for t in range(h):
            b.var(("u", g.id, t), 0.0, 1.0, 0.0, integer=True)
            b.var(("a", g.id, t), 0.0, 1.0, g.cost_startup)
            b.var(("b", g.id, t), 0.0, 1.0, g.cost_shutdown)
            # Lexicographic epsilon keeps equal-cost dispatch deterministic.
            b.var(("p", g.id, t), 0.0, g.p_max_mw,
                  (g.cost_energy + TIE_BREAK_EPS * gen_rank[g.id]) * dt,
                  true_cost=g.cost_energy * dt)
        if g.tech == "pumped-storage":
            e_max = options.ps_reservoir_h * g.p_max_mw
            for t in range(h):
                b.var(("q", g.id, t), 0.0, g.p_max_mw, 0.0)
                b.var(("e", g.id, t), 0.0, e_max, 0.0)
        del su_cap
    for cid, avail in inputs.availability_mw.items():
        cl = clusters[cid]
        for t in range(h):
            b.var(("curt", cid, t), 0.0, max(0.0, float(avail[t])),
                  cl.curtailment_cost * dt)
    for bus in net.bus_ids():
        load = inputs.bus_load_mw.get(bus, np.zeros(h))
        imp = inputs.net_import_mw.get(bus, np.zeros(h))
        for t in range(h):
            shed_cap = max(0.0, float(load[t])) + max(0.0, -float(imp[t]))
            b.var(("ls", bus, t), 0.0, shed_cap, options.voll * dt)
    refs = _island_refs(net)
    for bus in net.bus_ids():
        for t in range(h):
            if refs[bus] == bus:
                b.var(("th", bus, t), 0.0, 0.0, 0.0)
            else:
                b.var(("th", bus, t), -np.inf, np.inf, 0.0)
    for ln in net.lines:
        for t in range(h):
            b.var(("f", ln.id, t), -ln.rating_mw, ln.rating_mw, 0.0)
    reserve = options.reserve_mw
    if reserve > 0:
        for t in range(h):
            b.var(("rs", t), 0.0, np.inf, options.voll * dt)

    # --- generator logic ------------------------------------------------------
    for g in gens:
        u0, p0 = _initial(g, inputs)
        ru = g.ramp_up_mw_h * dt if math.isfinite(g.ramp_up_mw_h) else g.p_max_mw
        rd = g.ramp_down_mw_h * dt if math.isfinite(g.ramp_down_mw_h) else g.p_max_mw
        su_cap = max(g.p_min_stable_mw, ru)
        sd_cap = max(g.p_min_stable_mw, rd)
        for t in range(h):
            iu, ia, ib_, ip = (b.index[("u", g.id, t)], b.index[("a", g.id, t)],
                               b.index[("b", g.id, t)], b.index[("p", g.id, t)])
            b.le({ip: 1.0, iu: -g.p_max_mw}, 0.0, ("pmax", g.id, t))
            if g.p_min_stable_mw > 0:
                b.le({ip: -1.0, iu: g.p_min_stable_mw}, 0.0, ("pmin", g.id, t))
            # start/stop logic: a - b = u_t - u_{t-1}; a <= u; b <= 1 - u
            if t == 0:
                b.eq({ia: 1.0, ib_: -1.0, iu: -1.0}, -float(u0), ("logic", g.id, t))
            else:
                iu_prev = b.index[("u", g.id, t - 1)]
                b.eq({ia: 1.0, ib_: -1.0, iu: -1.0, iu_prev: 1.0}, 0.0, ("logic", g.id, t))
            b.le({ia: 1.0, iu: -1.0}, 0.0, ("a_le_u", g.id, t))
            b.le({ib_: 1.0, iu: 1.0}, 1.0, ("b_le_1mu", g.id, t))
            # ramping, with start/stop exemptions up to the min stable level
            if t == 0:
                b.le({ip: 1.0, ia: -su_cap}, p0 + ru * u0, ("ramp_up", g.id, t))
                b.le({ip: -1.0, iu: -rd, ib_: -sd_cap}, -p0, ("ramp_down", g.id, t))
            else:
                ip_prev = b.index[("p", g.id, t - 1)]
                iu_prev = b.index[("u", g.id, t - 1)]
                b.le({ip: 1.0, ip_prev: -1.0, iu_prev: -ru, ia: -su_cap}, 0.0,
                     ("ramp_up", g.id, t))
                b.le({ip_prev: 1.0, ip: -1.0, iu: -rd, ib_: -sd_cap}, 0.0,
                     ("ramp_down", g.id, t))
            # minimum up/down times
            up_lo = max(0, t - g.min_up_h + 1)
            coeffs = {b.index[("a", g.id, tau)]: 1.0 for tau in range(up_lo, t + 1)}
            coeffs[iu] = coeffs.get(iu, 0.0) - 1.0
            b.le(coeffs, 0.0, ("min_up", g.id, t))
            dn_lo = max(0, t - g.min_down_h + 1)
            coeffs = {b.index[("b", g.id, tau)]: 1.0 for tau in range(dn_lo, t + 1)}
            coeffs[iu] = coeffs.get(iu, 0.0) + 1.0
            b.le(coeffs, 1.0, ("min_down", g.id, t))
        if g.tech == "pumped-storage":
            e_max = options.ps_reservoir_h * g.p_max_mw
            e0 = 0.5 * e_max
            for t in range(h):
                iq = b.index[("q", g.id, t)]
                ie = b.index[("e", g.id, t)]
                ip = b.index[("p", g.id, t)]
                iu = b.index[("u", g.id, t)]
                b.le({iq: 1.0, iu: g.p_max_mw}, g.p_max_mw, ("pump_excl", g.id, t))
                coeffs = {ie: 1.0, iq: -eta_c * dt, ip: dt / eta_d}
                if t == 0:
                    b.eq(coeffs, e0, ("reservoir", g.id, t))
                else:
                    coeffs[b.index[("e", g.id, t - 1)]] = -1.0
                    b.eq(coeffs, 0.0, ("reservoir", g.id, t))
            b.eq({b.index[("e", g.id, h - 1)]: 1.0}, e0, ("reservoir_end", g.id))

    # --- network ---------------------------------------------------------------
    for ln in net.lines:
        inv_x = 1.0 / ln.reactance_pu
        for t in range(h):
            b.eq({
                b.index[("f", ln.id, t)]: 1.0,
                b.index[("th", ln.from_bus, t)]: -inv_x,
                b.index[("th", ln.to_bus, t)]: inv_x,
            }, 0.0, ("flow_def", ln.id, t))
    for bus in net.bus_ids():
        load = inputs.bus_load_mw.get(bus, np.zeros(h))
        imp = inputs.net_import_mw.get(bus, np.zeros(h))
        bus_avail = np.zeros(h)
        for t in range(h):
            coeffs: dict[int, float] = {}
            for g in net.generators_at(bus):
                coeffs[b.index[("p", g.id, t)]] = 1.0
                if g.tech == "pumped-storage":
                    coeffs[b.index[("q", g.id, t)]] = -1.0
            for c in net.clusters:
                if c.bus == bus and c.id in inputs.availability_mw:
                    coeffs[b.index[("curt", c.id, t)]] = -1.0
            coeffs[b.index[("ls", bus, t)]] = 1.0
            for ln in net.lines:
                if ln.from_bus == bus:
                    coeffs[b.index[("f", ln.id, t)]] = coeffs.get(b.index[("f", ln.id, t)], 0.0) - 1.0
                elif ln.to_bus == bus:
                    coeffs[b.index[("f", ln.id, t)]] = coeffs.get(b.index[("f", ln.id, t)], 0.0) + 1.0
            avail_here = sum(
                float(inputs.availability_mw[c.id][t])
                for c in net.clusters
                if c.bus == bus and c.id in inputs.availability_mw
            )
            bus_avail[t] = avail_here
            rhs = float(load[t]) - float(imp[t]) - avail_here
            b.eq(coeffs, rhs, ("balance", bus, t))

    # --- reserve ------------------------------------------------------------------
    if reserve > 0:
        for t in range(h):
            coeffs = {b.index[("rs", t)]: -1.0}
            for g in gens:
                if g.tech in CONVENTIONAL_TECHS:
                    coeffs[b.index[("u", g.id, t)]] = -g.p_max_mw
                    coeffs[b.index[("p", g.id, t)]] = 1.0
            b.le(coeffs, -reserve, ("reserve", t))

    # --- accumulated gas-supply rows -------------------------------------------------
    for k, row in enumerate(fuel_rows):
        coeffs = {}
        for (gid, t), coeff in row.coeffs.items():
            coeffs[b.index[("p", gid, t)]] = coeff
        b.le(coeffs, row.rhs_kg, ("fuel", row.zone, k))

    mip, true_cost, eq_tags, ub_tags = b.compile()
    return UcProblem(net, inputs, options, fuel_rows, mip, true_cost,
                     b.index, eq_tags, ub_tags)


# --- repair heuristic -------------------------------------------------------------


def _repair_commitment(u: np.ndarray, min_up: int, min_down: int) -> np.ndarray:
    """Stretch short on/off runs until the pattern honors both dwell times."""
    u = u.astype(int).copy()
    h = len(u)
    # fill short off-gaps first (turning on is always balance-feasible)
    i = 0
    while i < h:
        if u[i] == 0:
            j = i
            while j < h and u[j] == 0:
                j += 1
            interior = i > 0 and j < h
            if interior and (j - i) < min_down:
                u[i:j] = 1
            i = j
        else:
            i += 1
    i = 0
    while i < h:
        if u[i] == 1:
            j = i
            while j < h and u[j] == 1:
                j += 1
            if (j - i) < min_up and j < h:
                extend = min(h, i + min_up)
                u[j:extend] = 1
                j = extend
            i = j
        else:
            i += 1
    return u


def make_uc_heuristic(problem: UcProblem, threshold: float = 0.02):
    """Round the relaxed commitment up and repair dwell-time violations.

    The threshold is deliberately low: over-committing costs at most some
    start-ups and minimum-stable energy, while under-committing prices the
    misjudgment at VOLL.
    """
    gens = problem.net.generators
    h = problem.horizon

    def heuristic(x_relaxed: np.ndarray) -> np.ndarray:
        x = x_relaxed.copy()
        for g in gens:
            u = np.array([x_relaxed[problem.idx("u", g.id, t)] for t in range(h)])
            u = (u > threshold).astype(float)
            u = _repair_commitment(u, g.min_up_h, g.min_down_h)
            for t in range(h):
                x[problem.idx("u", g.id, t)] = u[t]
        return x

    return heuristic


def solve_uc(problem: UcProblem, gap_target: float | None = None,
             time_limit_s: float | None = None) -> DispatchResult:
    """Solve the commitment MILP and unpack a dispatch result.

    The reported objective is evaluated with the unperturbed cost vector
    (tie-break epsilons removed).
    """
    gap = problem.options.gap_target if gap_target is None else gap_target
    tl = problem.options.time_limit_s if time_limit_s is None else time_limit_s
    res = solve_mip(problem.mip, gap_target=gap, time_limit=tl,
                    node_limit=problem.options.node_limit,
                    heuristic=make_uc_heuristic(problem))
    return extract_dispatch(problem, res)


def extract_dispatch(problem: UcProblem, res: MipResult) -> DispatchResult:
    x = res.x
    net, h = problem.net, problem.horizon

    def series(kind: str, ident: str) -> np.ndarray:
        return np.array([x[problem.idx(kind, ident, t)] for t in range(h)])

    commitment = {g.id: np.round(series("u", g.id)).astype(int) for g in net.generators}
    output = {g.id: series("p", g.id) for g in net.generators}
    startup = {g.id: np.round(series("a", g.id)).astype(int) for g in net.generators}
    shutdown = {g.id: np.round(series("b", g.id)).astype(int) for g in net.generators}
    pump = {g.id: series("q", g.id) for g in net.generators if g.tech == "pumped-storage"}
    shed = {bus: series("ls", bus) for bus in net.bus_ids()}
    curt = {cid: series("curt", cid) for cid in problem.inputs.availability_mw}
    flow = {ln.id: series("f", ln.id) for ln in net.lines}
    theta = {bus: series("th", bus) for bus in net.bus_ids()}
    if problem.options.reserve_mw > 0:
        rs = np.array([x[problem.idx("rs", t)] for t in range(h)])
    else:
        rs = np.zeros(h)
    objective = float(problem.true_cost @ x)
    return DispatchResult(
        objective=objective, gap=res.gap, status=res.status,
        commitment=commitment, output_mw=output, startup=startup,
        shutdown=shutdown, pump_mw=pump, shed_mw=shed, reserve_short_mw=rs,
        curtailment_mw=curt, flow_mw=flow, theta=theta, nodes=res.nodes,
    )


# --- independent verification --------------------------------------------------------


def verify_dispatch(result: DispatchResult, problem: UcProblem,
                    rtol: float = 1e-6) -> ValidationReport:
    """Re-evaluate every constraint family and the objective from raw data."""
    rep = ValidationReport()
    net, inputs, options = problem.net, problem.inputs, problem.options
    h, dt = problem.horizon, options.dt_h

    def tol(scale: float) -> float:
        return rtol * max(1.0, abs(scale))

    for g in net.generators:
        u = result.commitment[g.id]
        p = result.output_mw[g.id]
        a = result.startup[g.id]
        bb = result.shutdown[g.id]
        u0, p0 = _initial(g, inputs)
        ru = g.ramp_up_mw_h * dt if math.isfinite(g.ramp_up_mw_h) else g.p_max_mw
        rd = g.ramp_down_mw_h * dt if math.isfinite(g.ramp_down_mw_h) else g.p_max_mw
        su_cap = max(g.p_min_stable_mw, ru)
        sd_cap = max(g.p_min_stable_mw, rd)
        for t in range(h):
            if u[t] not in (0, 1):
                rep.add("commitment", g.id, f"non-binary commitment at t={t}")
            if p[t] > g.p_max_mw * u[t] + tol(g.p_max_mw):
                rep.add("generator", g.id, f"output above committed maximum at t={t}")
            if p[t] < g.p_min_stable_mw * u[t] - tol(g.p_max_mw):
                rep.add("generator", g.id, f"output below minimum stable level at t={t}")
            u_prev = u0 if t == 0 else u[t - 1]
            p_prev = p0 if t == 0 else p[t - 1]
            if a[t] - bb[t] != u[t] - u_prev:
                rep.add("logic", g.id, f"start/stop logic broken at t={t}")
            if a[t] * bb[t] != 0:
                rep.add("logic", g.id, f"simultaneous start and stop at t={t}")
            if p[t] - p_prev > ru * u_prev + su_cap * a[t] + tol(g.p_max_mw):
                rep.add("ramp", g.id, f"up-ramp violated at t={t}")
            if p_prev - p[t] > rd * u[t] + sd_cap * bb[t] + tol(g.p_max_mw):
                rep.add("ramp", g.id, f"down-ramp violated at t={t}")
            if sum(a[max(0, t - g.min_up_h + 1): t + 1]) > u[t]:
                rep.add("min_up", g.id, f"minimum up-time violated at t={t}")
            if sum(bb[max(0, t - g.min_down_h + 1): t + 1]) > 1 - u[t]:
                rep.add("min_down", g.id, f"minimum down-time violated at t={t}")

    for ln in net.lines:
        f = result.flow_mw[ln.id]
        for t in range(h):
            expected = (result.theta[ln.from_bus][t] - result.theta[ln.to_bus][t]) / ln.reactance_pu
            if abs(f[t] - expected) > tol(ln.rating_mw):
                rep.add("flow", ln.id, f"flow inconsistent with angles at t={t}")
            if abs(f[t]) > ln.rating_mw + tol(ln.rating_mw):
                rep.add("line", ln.id, f"overload at t={t}: {f[t]:.3f} MW")

    for bus in net.bus_ids():
        load = inputs.bus_load_mw.get(bus, np.zeros(h))
        imp = inputs.net_import_mw.get(bus, np.zeros(h))
        for t in range(h):
            supply = sum(result.output_mw[g.id][t] for g in net.generators_at(bus))
            supply -= sum(result.pump_mw[g.id][t] for g in net.generators_at(bus)
                          if g.tech == "pumped-storage")
            for c in net.clusters:
                if c.bus == bus and c.id in inputs.availability_mw:
                    supply += float(inputs.availability_mw[c.id][t]) - result.curtailment_mw[c.id][t]
            supply += float(imp[t]) + result.shed_mw[bus][t] - float(load[t])
            flow_out = sum(result.flow_mw[ln.id][t] for ln in net.lines if ln.from_bus == bus)
            flow_out -= sum(result.flow_mw[ln.id][t] for ln in net.lines if ln.to_bus == bus)
            if abs(supply - flow_out) > tol(max(float(load[t]), 1.0)) * 10:
                rep.add("balance", bus, f"power balance broken at t={t}")

    for cid, avail in inputs.availability_mw.items():
        c = result.curtailment_mw[cid]
        for t in range(h):
            if c[t] < -tol(1.0) or c[t] > float(avail[t]) + tol(float(avail[t])):
                rep.add("curtailment", cid, f"outside availability at t={t}")

    if options.reserve_mw > 0:
        for t in range(h):
            headroom = sum(
                g.p_max_mw * result.commitment[g.id][t] - result.output_mw[g.id][t]
                for g in net.generators if g.tech in CONVENTIONAL_TECHS
            )
            if headroom + result.reserve_short_mw[t] < options.reserve_mw - tol(options.reserve_mw):
                rep.add("reserve", "", f"reserve requirement broken at t={t}")

    for k, row in enumerate(problem.fuel_rows):
        draw = sum(coeff * result.output_mw[gid][t] for (gid, t), coeff in row.coeffs.items())
        if draw > row.rhs_kg + rtol * max(1.0, abs(row.rhs_kg)):
            rep.add("fuel", row.zone, f"gas-draw cap exceeded in row {k}")

    objective = 0.0
    for g in net.generators:
        objective += float(result.output_mw[g.id].sum()) * g.cost_energy * dt
        objective += float(result.startup[g.id].sum()) * g.cost_startup
        objective += float(result.shutdown[g.id].sum()) * g.cost_shutdown
    for bus in net.bus_ids():
        objective += float(result.shed_mw[bus].sum()) * options.voll * dt
    objective += float(result.reserve_short_mw.sum()) * options.voll * dt
    clusters = {c.id: c for c in net.clusters}
    for cid in inputs.availability_mw:
        objective += float(result.curtailment_mw[cid].sum()) * clusters[cid].curtailment_cost * dt
    if abs(objective - result.objective) > rtol * max(1.0, abs(objective)):
        rep.add("objective", "", f"reported {result.objective:.6f} vs recomputed {objective:.6f}")
    return rep


# --- brute-force oracle ----------------------------------------------------------------


def _dwell_feasible(u: tuple[int, ...], min_up: int, min_down: int, u0: int) -> bool:
    """Combinatorial min up/down check of a commitment sequence.

    The horizon boundary is open: a run that is still going at the end is
    allowed, matching the windowed inequalities of the MILP.
    """
    h = len(u)
    prev = u0
    for t in range(h):
        if u[t] > prev:  # start: must stay on through min_up (or horizon end)
            for tau in range(t + 1, min(h, t + min_up)):
                if u[tau] == 0:
                    return False
        if u[t] < prev:  # stop: must stay off through min_down
            for tau in range(t + 1, min(h, t + min_down)):
                if u[tau] == 1:
                    return False
        prev = u[t]
    return True


def enumerate_uc(problem: UcProblem) -> float:
    """Exhaustive commitment enumeration with an LP dispatch per pattern.

    Per-generator sequences violating minimum up/down times are discarded
    combinatorially; every surviving pattern combination is priced by an LP
    over the continuous variables.  Returns the best true-cost objective
    (inf if no pattern is feasible).  Kept deliberately independent of the
    branch and bound path.
    """
    gens = problem.net.generators
    h = problem.horizon
    if len(gens) * h > 20:
        raise ValueError("enumeration oracle limited to 20 binaries")
    per_gen_sequences = []
    per_gen_idx = []
    for g in gens:
        u0, _ = _initial(g, problem.inputs)
        feasible = [
            seq for seq in itertools.product((0, 1), repeat=h)
            if _dwell_feasible(seq, g.min_up_h, g.min_down_h, u0)
        ]
        per_gen_sequences.append(feasible)
        per_gen_idx.append([problem.idx("u", g.id, t) for t in range(h)])
    # Patterns are ranked by the perturbed cost (the artifact's documented
    # tie rule) and the winner is reported at its true cost, so the oracle
    # and the solver agree exactly on near-ties.
    best_perturbed = np.inf
    best_true = np.inf
    lb0 = problem.mip.lb
    ub0 = problem.mip.ub
    for combo in itertools.product(*per_gen_sequences):
        lb = lb0.copy()
        ub = ub0.copy()
        for idx_list, seq in zip(per_gen_idx, combo):
            for i, v in zip(idx_list, seq):
                lb[i] = v
                ub[i] = v
        res = solve_lp(problem.mip, lb, ub)
        if res.status == 0 and res.fun < best_perturbed - 1e-12:
            best_perturbed = float(res.fun)
            best_true = float(problem.true_cost @ res.x)
    return best_true
