"""Transient isothermal gas-flow solver on a pipe network.

Model per pipe (1-D, isothermal, density eliminated via rho = p / c^2):

    mass:      dm/dx + (a/c^2) dp/dt = 0
    momentum:  (1/a) dm/dt + dp/dx + lam*c^2*m|m|/(2*d*a^2*p) + g*(dh/l)*p/c^2 = 0

The printed momentum equation mixes rho and p in the gradient term; this
implementation adopts the standard isothermal form with dp/dx throughout.
The temperature term is retained in the data model (GasProperties.gas_constant_b)
but inactive because the closure holds temperature constant.

Discretization: unknowns p and m live on the N+1 grid points of each pipe;
mass and momentum residuals are written per segment (cell) with arithmetic
averages, implicit in time.  Each time step is solved by a short sequence of
intermediate steps, one Newton linearization each, until the residual drops
below tolerance.  Nodes carry a pressure unknown tied to adjacent pipe-end
pressures; compressor branches carry a flow unknown and impose
p_out = ratio * p_in between their end nodes.

For a horizontal pipe the cell-averaged steady momentum residual telescopes
to the exact relation p1^2 - p2^2 = lam*c^2*L*m^2/(d*a^2), so steady states
are reproduced up to solver tolerance independent of the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .gasnet import GasNetwork, compute_zones
from .units import kg_to_mcm

NEWTON_CAP = 50
NEWTON_TOL = 1e-6
PRESSURE_FLOOR = 1.0e3      # Pa; solutions pushed below this are unphysical
FLOW_REGULARIZATION = 1e-3  # kg/s floor on |m| in the friction Jacobian only
DEBOUNCE_STEPS = 2          # a violation must persist this many steps


class NonConvergence(Exception):
    """The per-step fixed-point iteration exceeded its cap."""


class NegativePressure(Exception):
    """The solution left the physical pressure domain."""


class InitInfeasible(Exception):
    """No steady pressure profile within the safety bands balances the flows."""


class ReallocationImpossible(Exception):
    """All candidate injectors outside the violated zones are at capacity."""


@dataclass(frozen=True)
class PipeGrid:
    pipe_id: str
    n_segments: int
    dx_m: float


@dataclass
class GasState:
    time_s: float
    pipe_pressure: dict[str, np.ndarray]   # Pa at the N+1 grid points
    pipe_flow: dict[str, np.ndarray]       # kg/s at the N+1 grid points
    node_pressure: dict[str, float]        # Pa

    def copy(self) -> "GasState":
        return GasState(
            self.time_s,
            {k: v.copy() for k, v in self.pipe_pressure.items()},
            {k: v.copy() for k, v in self.pipe_flow.items()},
            dict(self.node_pressure),
        )


@dataclass
class LinepackRecord:
    time_s: float
    total_kg: float
    total_mcm: float
    per_zone_kg: dict[str, float]


@dataclass(frozen=True)
class PressureViolation:
    node: str
    kind: str               # "min" | "max"
    onset_s: float
    duration_s: float
    worst_pressure_pa: float


@dataclass
class DayTrajectory:
    """Full record of one simulated balancing day."""

    times_s: np.ndarray                     # step-end times, shape (S,)
    node_ids: list[str]
    node_pressure: np.ndarray               # (S, n_nodes), Pa
    pipe_pressure: dict[str, np.ndarray]    # pipe -> (S, N+1), Pa
    linepack: list[LinepackRecord]          # one record per step end
    initial_linepack: LinepackRecord
    violations: list[PressureViolation]
    final_state: GasState
    closure: dict[str, float] = field(default_factory=dict)

    def node_series(self, node_id: str) -> np.ndarray:
        return self.node_pressure[:, self.node_ids.index(node_id)]

    def min_violations(self) -> list[PressureViolation]:
        return [v for v in self.violations if v.kind == "min"]

    def max_violations(self) -> list[PressureViolation]:
        return [v for v in self.violations if v.kind == "max"]


def discretize(net: GasNetwork, target_dx_m: float) -> list[PipeGrid]:
    """Split every pipe into N = max(2, round(l / target_dx)) uniform segments."""
    if target_dx_m <= 0:
        raise ValueError("target_dx must be positive")
    grids = []
    for p in net.pipes:
        n = max(2, int(round(p.length_m / target_dx_m)))
        grids.append(PipeGrid(p.id, n, p.length_m / n))
    return grids


class GasSimulator:
    """Owns the discretization and the sparse solver state for one network.

    A simulator instance is single-threaded; run one per concurrent study.
    """

    def __init__(self, net: GasNetwork, dx_m: float = 10000.0,
                 newton_cap: int = NEWTON_CAP, tol: float = NEWTON_TOL):
        self.net = net
        self.props = net.properties
        self.dx_m = dx_m
        self.newton_cap = newton_cap
        self.tol = tol
        self.grids = discretize(net, dx_m)
        self.zones = compute_zones(net)
        self._build_layout()

    # ----- layout and static structure -------------------------------------

    def _build_layout(self) -> None:
        net, c2 = self.net, self.props.sound_speed**2
        self.node_ids = [n.id for n in net.nodes]
        node_pos = {nid: i for i, nid in enumerate(self.node_ids)}

        self.pipe_p0: dict[str, int] = {}   # var index of p[0] per pipe
        self.pipe_m0: dict[str, int] = {}   # var index of m[0] per pipe
        self.pipe_n: dict[str, int] = {}
        var = 0
        for g in self.grids:
            self.pipe_p0[g.pipe_id] = var
            var += g.n_segments + 1
            self.pipe_m0[g.pipe_id] = var
            var += g.n_segments + 1
            self.pipe_n[g.pipe_id] = g.n_segments
        self.node_var = {nid: var + i for i, nid in enumerate(self.node_ids)}
        var += len(self.node_ids)
        self.comp_var = {c.id: var + i for i, c in enumerate(net.compressors)}
        var += len(net.compressors)
        self.n_vars = var

        # Cell-level arrays concatenated over all pipes.
        cp_lo, cp_hi, cm_lo, cm_hi = [], [], [], []
        c_a, c_dx, c_k, c_s, c_zone = [], [], [], [], []
        pipes = {p.id: p for p in net.pipes}
        for g in self.grids:
            p = pipes[g.pipe_id]
            p0, m0, n = self.pipe_p0[g.pipe_id], self.pipe_m0[g.pipe_id], g.n_segments
            cp_lo.extend(range(p0, p0 + n))
            cp_hi.extend(range(p0 + 1, p0 + n + 1))
            cm_lo.extend(range(m0, m0 + n))
            cm_hi.extend(range(m0 + 1, m0 + n + 1))
            a = p.cross_section_m2
            k = p.friction * c2 / (2.0 * p.diameter_m * a * a)
            s = self.props.gravity * (p.height_change_m / p.length_m) / c2
            c_a.extend([a] * n)
            c_dx.extend([g.dx_m] * n)
            c_k.extend([k] * n)
            c_s.extend([s] * n)
            c_zone.extend([self.zones[p.from_node]] * n)
        self.cp_lo = np.array(cp_lo, dtype=np.int64)
        self.cp_hi = np.array(cp_hi, dtype=np.int64)
        self.cm_lo = np.array(cm_lo, dtype=np.int64)
        self.cm_hi = np.array(cm_hi, dtype=np.int64)
        self.c_a = np.array(c_a)
        self.c_dx = np.array(c_dx)
        self.c_k = np.array(c_k)
        self.c_s = np.array(c_s)
        self.cell_zone = c_zone
        self.n_cells = len(c_a)

        # Row layout: mass+momentum per cell, then continuity per pipe end,
        # then one row per node (balance or pressure BC), then compressors.
        row = 0
        self.mass_row = np.arange(row, row + self.n_cells)
        row += self.n_cells
        self.mom_row = np.arange(row, row + self.n_cells)
        row += self.n_cells
        cont_row, cont_p, cont_node = [], [], []
        bal_flow, bal_sign, bal_node = [], [], []
        for g in self.grids:
            p = pipes[g.pipe_id]
            p0, m0, n = self.pipe_p0[g.pipe_id], self.pipe_m0[g.pipe_id], g.n_segments
            for end_node, p_idx, m_idx, sign in (
                (p.from_node, p0, m0, -1.0),
                (p.to_node, p0 + n, m0 + n, +1.0),
            ):
                cont_row.append(row)
                cont_p.append(p_idx)
                cont_node.append(self.node_var[end_node])
                row += 1
                bal_flow.append(m_idx)
                bal_sign.append(sign)
                bal_node.append(node_pos[end_node])
        for c in net.compressors:
            v = self.comp_var[c.id]
            bal_flow.append(v)
            bal_sign.append(-1.0)
            bal_node.append(node_pos[c.from_node])
            bal_flow.append(v)
            bal_sign.append(+1.0)
            bal_node.append(node_pos[c.to_node])
        self.cont_row = np.array(cont_row, dtype=np.int64)
        self.cont_p = np.array(cont_p, dtype=np.int64)
        self.cont_node = np.array(cont_node, dtype=np.int64)
        self.bal_flow = np.array(bal_flow, dtype=np.int64)
        self.bal_sign = np.array(bal_sign)
        self.bal_node = np.array(bal_node, dtype=np.int64)
        self.node_row = np.arange(row, row + len(self.node_ids))
        row += len(self.node_ids)
        self.comp_row = np.arange(row, row + len(net.compressors))
        row += len(net.compressors)
        self.n_rows = row
        if self.n_rows != self.n_vars:
            raise AssertionError("system is not square")

        # All pressure-typed unknowns, used for positivity damping.
        p_idx = []
        for g in self.grids:
            p0 = self.pipe_p0[g.pipe_id]
            p_idx.extend(range(p0, p0 + g.n_segments + 1))
        p_idx.extend(self.node_var.values())
        self.pressure_idx = np.array(sorted(p_idx), dtype=np.int64)
        self._static_cache: dict = {}

    # ----- packing ----------------------------------------------------------

    def pack(self, state: GasState) -> np.ndarray:
        z = np.zeros(self.n_vars)
        for g in self.grids:
            pid = g.pipe_id
            n = g.n_segments
            z[self.pipe_p0[pid]: self.pipe_p0[pid] + n + 1] = state.pipe_pressure[pid]
            z[self.pipe_m0[pid]: self.pipe_m0[pid] + n + 1] = state.pipe_flow[pid]
        for nid, v in self.node_var.items():
            z[v] = state.node_pressure[nid]
        for c in self.net.compressors:
            # Compressor flow is recovered from the adjacent balances on solve.
            z[self.comp_var[c.id]] = 0.0
        return z

    def unpack(self, z: np.ndarray, time_s: float) -> GasState:
        pp, pf = {}, {}
        for g in self.grids:
            pid, n = g.pipe_id, g.n_segments
            pp[pid] = z[self.pipe_p0[pid]: self.pipe_p0[pid] + n + 1].copy()
            pf[pid] = z[self.pipe_m0[pid]: self.pipe_m0[pid] + n + 1].copy()
        np_ = {nid: float(z[v]) for nid, v in self.node_var.items()}
        return GasState(time_s, pp, pf, np_)

    def flat_state(self, pressure_pa: float) -> GasState:
        """Uniform-pressure, zero-flow state (pre-compressor-boost everywhere)."""
        pp = {g.pipe_id: np.full(g.n_segments + 1, pressure_pa) for g in self.grids}
        pf = {g.pipe_id: np.zeros(g.n_segments + 1) for g in self.grids}
        npress = {nid: pressure_pa for nid in self.node_ids}
        return GasState(0.0, pp, pf, npress)

    # ----- assembly ---------------------------------------------------------

    def _assemble_static(self, dt: float | None, bc_nodes: tuple[str, ...]):
        """COO (rows, cols, vals) of the z-independent Jacobian entries."""
        key = (dt, bc_nodes)
        cached = self._static_cache.get(key)
        if cached is not None:
            return cached
        c2 = self.props.sound_speed**2
        rows_l: list[np.ndarray] = []
        cols_l: list[np.ndarray] = []
        vals_l: list[np.ndarray] = []

        def put(r, c, v):
            r = np.asarray(r, dtype=np.int64).ravel()
            c = np.asarray(c, dtype=np.int64).ravel()
            v = np.broadcast_to(np.asarray(v, dtype=float), r.shape).ravel()
            rows_l.append(r)
            cols_l.append(c)
            vals_l.append(v)

        inv_dx = 1.0 / self.c_dx
        put(self.mass_row, self.cm_hi, inv_dx)
        put(self.mass_row, self.cm_lo, -inv_dx)
        if dt is not None:
            coeff = self.c_a / (2.0 * c2 * dt)
            put(self.mass_row, self.cp_lo, coeff)
            put(self.mass_row, self.cp_hi, coeff)
        put(self.mom_row, self.cp_hi, inv_dx + 0.5 * self.c_s)
        put(self.mom_row, self.cp_lo, -inv_dx + 0.5 * self.c_s)
        if dt is not None:
            tcoef = 1.0 / (2.0 * self.c_a * dt)
            put(self.mom_row, self.cm_lo, tcoef)
            put(self.mom_row, self.cm_hi, tcoef)
        ones = np.ones(len(self.cont_row))
        put(self.cont_row, self.cont_p, ones)
        put(self.cont_row, self.cont_node, -ones)
        bc_set = set(bc_nodes)
        bc_mask = np.array([self.node_ids[i] in bc_set for i in self.bal_node]) \
            if len(self.bal_node) else np.zeros(0, dtype=bool)
        keep = ~bc_mask
        if keep.any():
            put(self.node_row[self.bal_node[keep]], self.bal_flow[keep], self.bal_sign[keep])
        for nid in bc_nodes:
            i = self.node_ids.index(nid)
            put(self.node_row[i], self.node_var[nid], 1.0)
        for j, c in enumerate(self.net.compressors):
            put(self.comp_row[j], self.node_var[c.to_node], 1.0)
            put(self.comp_row[j], self.node_var[c.from_node], -c.pressure_ratio)
        result = (np.concatenate(rows_l), np.concatenate(cols_l), np.concatenate(vals_l))
        self._static_cache[key] = result
        return result

    def _cell_means(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p_bar = 0.5 * (z[self.cp_lo] + z[self.cp_hi])
        m_bar = 0.5 * (z[self.cm_lo] + z[self.cm_hi])
        return p_bar, m_bar

    def _residual(self, z: np.ndarray, z_old: np.ndarray | None, dt: float | None,
                  inj: np.ndarray, off: np.ndarray, bc: dict[str, float]) -> np.ndarray:
        c2 = self.props.sound_speed**2
        r = np.zeros(self.n_rows)
        p_bar, m_bar = self._cell_means(z)
        r[self.mass_row] = (z[self.cm_hi] - z[self.cm_lo]) / self.c_dx
        r[self.mom_row] = (
            (z[self.cp_hi] - z[self.cp_lo]) / self.c_dx
            + self.c_k * m_bar * np.abs(m_bar) / p_bar
            + self.c_s * p_bar
        )
        if dt is not None:
            p_bar_old, m_bar_old = self._cell_means(z_old)
            r[self.mass_row] += self.c_a / c2 * (p_bar - p_bar_old) / dt
            r[self.mom_row] += (m_bar - m_bar_old) / (self.c_a * dt)
        r[self.cont_row] = z[self.cont_p] - z[self.cont_node]
        # Node rows: net inflow + injection - offtake, or the pressure pin.
        flows = np.zeros(len(self.node_ids))
        np.add.at(flows, self.bal_node, self.bal_sign * z[self.bal_flow])
        r[self.node_row] = flows + inj - off
        for nid, p_set in bc.items():
            i = self.node_ids.index(nid)
            r[self.node_row[i]] = z[self.node_var[nid]] - p_set
        for j, c in enumerate(self.net.compressors):
            r[self.comp_row[j]] = z[self.node_var[c.to_node]] - c.pressure_ratio * z[self.node_var[c.from_node]]
        return r

    def _row_weights(self, z: np.ndarray, inj: np.ndarray, off: np.ndarray) -> np.ndarray:
        p_scale = max(float(np.max(z[self.pressure_idx])), 1.0e5)
        m_all = np.abs(np.concatenate([z[self.cm_lo], z[self.cm_hi]]))
        flow_scale = max(1.0, float(m_all.max(initial=0.0)), float(inj.sum()), float(off.sum()))
        w = np.empty(self.n_rows)
        w[self.mass_row] = self.c_dx / flow_scale
        w[self.mom_row] = self.c_dx / p_scale
        w[self.cont_row] = 1.0 / p_scale
        w[self.node_row] = 1.0 / flow_scale
        if len(self.comp_row):
            w[self.comp_row] = 1.0 / p_scale
        return w

    def _solve_system(self, z0: np.ndarray, z_old: np.ndarray | None, dt: float | None,
                      inj: np.ndarray, off: np.ndarray, bc: dict[str, float],
                      cap: int | None = None) -> np.ndarray:
        """Newton iteration (one linearization per intermediate step)."""
        bc_key = tuple(sorted(bc))
        s_rows, s_cols, s_vals = self._assemble_static(dt, bc_key)
        z = z0.copy()
        cap = cap or self.newton_cap
        for _ in range(cap):
            r = self._residual(z, z_old, dt, inj, off, bc)
            w = self._row_weights(z, inj, off)
            if float(np.max(np.abs(r * w))) < self.tol:
                return z
            p_bar, m_bar = self._cell_means(z)
            m_reg = np.maximum(np.abs(m_bar), FLOW_REGULARIZATION)
            fric_m = self.c_k * m_reg / p_bar
            fric_p = -0.5 * self.c_k * m_bar * np.abs(m_bar) / p_bar**2
            d_rows = np.concatenate([self.mom_row] * 4)
            d_cols = np.concatenate([self.cm_lo, self.cm_hi, self.cp_lo, self.cp_hi])
            d_vals = np.concatenate([fric_m, fric_m, fric_p, fric_p])
            jac = sp.coo_matrix(
                (np.concatenate([s_vals, d_vals]),
                 (np.concatenate([s_rows, d_rows]), np.concatenate([s_cols, d_cols]))),
                shape=(self.n_rows, self.n_vars),
            ).tocsc()
            try:
                dz = spla.spsolve(jac, -r)
            except RuntimeError as exc:  # singular factorization
                raise NonConvergence(f"linear solve failed: {exc}") from exc
            if not np.all(np.isfinite(dz)):
                raise NonConvergence("linear solve produced non-finite step")
            # Damp the step so pressures stay strictly positive.
            zp = z[self.pressure_idx]
            dp = dz[self.pressure_idx]
            neg = dp < 0
            alpha = 1.0
            if np.any(neg):
                alpha = min(1.0, 0.9 * float(np.min((zp[neg] - PRESSURE_FLOOR) / -dp[neg])))
            if alpha <= 1e-9:
                raise NegativePressure("pressure driven to the physical floor")
            z = z + alpha * dz
        r = self._residual(z, z_old, dt, inj, off, bc)
        w = self._row_weights(z, inj, off)
        if float(np.max(np.abs(r * w))) < self.tol:
            return z
        raise NonConvergence(
            f"residual {float(np.max(np.abs(r * w))):.3e} after {cap} intermediate steps"
        )

    # ----- node boundary vectors --------------------------------------------

    def _node_vector(self, rates: dict[str, float]) -> np.ndarray:
        v = np.zeros(len(self.node_ids))
        for nid, rate in rates.items():
            v[self.node_ids.index(nid)] += rate
        return v

    # ----- public operations --------------------------------------------------

    def steady_state(self, injections: dict[str, float], offtakes: dict[str, float],
                     ref_node: str | None = None,
                     ref_pressure_pa: float | None = None) -> GasState:
        """Solve the zero-time-derivative form of the flow equations.

        `injections`/`offtakes` are nodal mass rates (kg/s) that must balance
        within 0.1%.  The pressure level is anchored at `ref_node` (default:
        the node receiving the largest injection); with no explicit anchor
        pressure the smallest in-band anchor value is searched, and
        InitInfeasible is raised when no anchor keeps every node inside its
        safety band.
        """
        total_in = sum(injections.values())
        total_out = sum(offtakes.values())
        scale = max(abs(total_in), abs(total_out), 1e-9)
        if abs(total_in - total_out) > 1e-3 * scale:
            raise ValueError(
                f"steady init needs balanced flows: injection {total_in:.3f} "
                f"vs off-take {total_out:.3f} kg/s"
            )
        if ref_node is None:
            if injections:
                ref_node = sorted(injections, key=lambda n: (-injections[n], n))[0]
            else:
                ref_node = self.node_ids[0]
        ref = self.net.node(ref_node)
        inj = self._node_vector(injections)
        off = self._node_vector(offtakes)

        def solve_at(p_ref: float, guess: np.ndarray | None) -> np.ndarray:
            z0 = guess if guess is not None else self.pack(self.flat_state(p_ref))
            return self._solve_system(z0, None, None, inj, off, {ref_node: p_ref}, cap=80)

        if ref_pressure_pa is not None:
            z = solve_at(ref_pressure_pa, None)
            self._check_bands(z)
            return self.unpack(z, 0.0)

        def attempt(p_ref: float, guess):
            # Anchors where the hydraulics collapse count as infeasible.
            try:
                return solve_at(p_ref, guess)
            except (NegativePressure, NonConvergence):
                return None

        # Raising the anchor raises every steady pressure monotonically, so
        # the feasible anchors form an interval: bisect for its two ends and
        # start the day from the middle, leaving headroom for both swings.
        lo, hi = ref.p_min_pa, ref.p_max_pa
        z_hi = attempt(hi, None)
        if z_hi is None or self._min_margin(z_hi) < 0.0:
            raise InitInfeasible("minimum-pressure bound unreachable even at the top anchor")

        z_lo = attempt(lo, z_hi)
        if z_lo is not None and self._min_margin(z_lo) >= 0.0:
            lowest, z_lowest = lo, z_lo
        else:
            a, b, z_lowest = lo, hi, z_hi
            while b - a > 10.0:
                mid = 0.5 * (a + b)
                z = attempt(mid, z_lowest)
                if z is not None and self._min_margin(z) >= 0.0:
                    b, z_lowest = mid, z
                else:
                    a = mid
            lowest = b
        if self._max_margin(z_lowest) < 0.0:
            raise InitInfeasible(
                "no anchor pressure keeps every node inside its safety band"
            )
        if self._max_margin(z_hi) >= 0.0:
            highest = hi
        else:
            a, b, z = lowest, hi, z_lowest
            while b - a > 10.0:
                mid = 0.5 * (a + b)
                z_mid = attempt(mid, z)
                if z_mid is not None and self._max_margin(z_mid) >= 0.0:
                    a, z = mid, z_mid
                else:
                    b = mid
            highest = a
        z = solve_at(0.5 * (lowest + highest), z_lowest)
        self._check_bands(z)
        return self.unpack(z, 0.0)

    def _min_margin(self, z: np.ndarray) -> float:
        return min(
            z[self.node_var[n.id]] - n.p_min_pa for n in self.net.nodes
        )

    def _max_margin(self, z: np.ndarray) -> float:
        return min(
            n.p_max_pa - z[self.node_var[n.id]] for n in self.net.nodes
        )

    def _check_bands(self, z: np.ndarray) -> None:
        for n in self.net.nodes:
            p = z[self.node_var[n.id]]
            if p < n.p_min_pa - 1.0 or p > n.p_max_pa + 1.0:
                raise InitInfeasible(
                    f"node {n.id} at {p / 1e5:.2f} bar outside "
                    f"[{n.p_min_pa / 1e5:.2f}, {n.p_max_pa / 1e5:.2f}] bar"
                )

    def step(self, state: GasState, injections: dict[str, float],
             offtakes: dict[str, float], dt_s: float,
             pressure_bc: dict[str, float] | None = None) -> GasState:
        """Advance one implicit time step; boundaries are rates at t + dt."""
        if dt_s <= 0:
            raise ValueError("dt must be positive")
        if any(v < 0 for v in offtakes.values()):
            raise ValueError("off-takes must be nonnegative")
        inj = self._node_vector(injections)
        off = self._node_vector(offtakes)
        bc = {k: float(v) for k, v in (pressure_bc or {}).items()}
        z_old = self.pack(state)
        z = self._solve_system(z_old.copy(), z_old, dt_s, inj, off, bc)
        if float(np.min(z[self.pressure_idx])) <= PRESSURE_FLOOR:
            raise NegativePressure("solution at or below the pressure floor")
        return self.unpack(z, state.time_s + dt_s)

    # ----- linepack -----------------------------------------------------------

    def linepack_from_vector(self, z: np.ndarray, time_s: float) -> LinepackRecord:
        c2 = self.props.sound_speed**2
        p_bar = 0.5 * (z[self.cp_lo] + z[self.cp_hi])
        cell_kg = p_bar / c2 * self.c_a * self.c_dx
        per_zone: dict[str, float] = {}
        for zid in sorted(set(self.zones.values())):
            per_zone[zid] = 0.0
        for kg, zid in zip(cell_kg, self.cell_zone):
            per_zone[zid] += float(kg)
        total = float(sum(per_zone.values()))
        return LinepackRecord(
            time_s, total, kg_to_mcm(total, self.props.standard_density), per_zone
        )

    def linepack(self, state: GasState) -> LinepackRecord:
        return self.linepack_from_vector(self.pack(state), state.time_s)

    def zone_linepack_capacity(self) -> dict[str, float]:
        """Zone linepack (kg) at a uniform maximum-pressure profile."""
        c2 = self.props.sound_speed**2
        caps: dict[str, float] = {z: 0.0 for z in sorted(set(self.zones.values()))}
        nodes = {n.id: n for n in self.net.nodes}
        pipes = {p.id: p for p in self.net.pipes}
        for g in self.grids:
            p = pipes[g.pipe_id]
            p_max = 0.5 * (nodes[p.from_node].p_max_pa + nodes[p.to_node].p_max_pa)
            caps[self.zones[p.from_node]] += p_max / c2 * p.cross_section_m2 * p.length_m
        return caps

    # ----- day simulation -------------------------------------------------------

    def simulate_day(self, injections: dict[str, float],
                     offtakes_hourly: dict[str, np.ndarray],
                     dt_s: float = 60.0,
                     initial_state: GasState | None = None,
                     ref_node: str | None = None,
                     ref_pressure_pa: float | None = None) -> DayTrajectory:
        """Run a 24-h balancing day with constant injections.

        `offtakes_hourly` maps node -> 24 hourly mass rates (kg/s), held
        piecewise constant within each hour.  The initial state defaults to
        the steady solution for the daily-average off-takes, which makes the
        start linepack-neutral; `ref_node`/`ref_pressure_pa` pin that
        solution's anchor (e.g. to start the day from a low-linepack
        operating point).
        """
        if dt_s <= 0 or 3600.0 % dt_s != 0.0:
            raise ValueError("dt must be positive and divide one hour")
        for nid, series in offtakes_hourly.items():
            if len(series) != 24:
                raise ValueError(f"off-take series at {nid} must have 24 hourly values")
        steps = int(round(86400.0 / dt_s))

        if initial_state is None:
            avg_off = {n: float(np.mean(s)) for n, s in offtakes_hourly.items()}
            initial_state = self.steady_state(injections, avg_off,
                                              ref_node=ref_node,
                                              ref_pressure_pa=ref_pressure_pa)
        inj = self._node_vector(injections)

        z = self.pack(initial_state)
        lp0 = self.linepack_from_vector(z, 0.0)
        times = np.empty(steps)
        node_p = np.empty((steps, len(self.node_ids)))
        pipe_p = {g.pipe_id: np.empty((steps, g.n_segments + 1)) for g in self.grids}
        lp_series: list[LinepackRecord] = []
        node_idx = np.array([self.node_var[n] for n in self.node_ids])

        off_hour = np.zeros((24, len(self.node_ids)))
        for nid, series in offtakes_hourly.items():
            off_hour[:, self.node_ids.index(nid)] += np.asarray(series, dtype=float)

        net_injected = 0.0
        for k in range(1, steps + 1):
            t_new = k * dt_s
            hour = min(23, int((t_new - 0.5 * dt_s) // 3600.0))
            off = off_hour[hour]
            z_new = self._solve_system(z.copy(), z, dt_s, inj, off, {})
            if float(np.min(z_new[self.pressure_idx])) <= PRESSURE_FLOOR:
                raise NegativePressure(f"pressure floor reached at t = {t_new:.0f} s")
            z = z_new
            net_injected += (float(inj.sum()) - float(off.sum())) * dt_s
            times[k - 1] = t_new
            node_p[k - 1] = z[node_idx]
            for g in self.grids:
                pid = g.pipe_id
                pipe_p[pid][k - 1] = z[self.pipe_p0[pid]: self.pipe_p0[pid] + g.n_segments + 1]
            lp_series.append(self.linepack_from_vector(z, t_new))

        violations = self._detect_violations(times, node_p, dt_s)
        lp_end = lp_series[-1].total_kg
        closure = {
            "initial_kg": lp0.total_kg,
            "final_kg": lp_end,
            "net_injected_kg": net_injected,
            "imbalance_kg": lp_end - lp0.total_kg - net_injected,
            "closure_kg": lp_end - lp0.total_kg,
        }
        return DayTrajectory(
            times_s=times,
            node_ids=list(self.node_ids),
            node_pressure=node_p,
            pipe_pressure=pipe_p,
            linepack=lp_series,
            initial_linepack=lp0,
            violations=violations,
            final_state=self.unpack(z, times[-1]),
            closure=closure,
        )

    def _detect_violations(self, times: np.ndarray, node_p: np.ndarray,
                           dt_s: float) -> list[PressureViolation]:
        """Episodes of band violations, debounced over consecutive steps."""
        out: list[PressureViolation] = []
        for j, nid in enumerate(self.node_ids):
            node = self.net.node(nid)
            series = node_p[:, j]
            for kind, mask in (
                ("min", series < node.p_min_pa),
                ("max", series > node.p_max_pa),
            ):
                start = None
                for i in range(len(mask) + 1):
                    active = i < len(mask) and bool(mask[i])
                    if active and start is None:
                        start = i
                    elif not active and start is not None:
                        length = i - start
                        if length >= DEBOUNCE_STEPS:
                            segment = series[start:i]
                            worst = float(segment.min() if kind == "min" else segment.max())
                            out.append(PressureViolation(
                                node=nid,
                                kind=kind,
                                onset_s=float(times[start]),
                                duration_s=length * dt_s,
                                worst_pressure_pa=worst,
                            ))
                        start = None
        out.sort(key=lambda v: (v.onset_s, v.node, v.kind))
        return out


# ----- injector scheduling ------------------------------------------------------


def allocate_injections(net: GasNetwork, total_rate_kg_s: float) -> dict[str, float]:
    """Constant injector rates proportional to nominal capacity."""
    total_cap = sum(i.nominal_capacity_kg_s for i in net.injectors)
    if total_cap <= 0:
        raise ValueError("network has no injection capacity")
    if total_rate_kg_s > total_cap * (1 + 1e-9):
        raise ValueError(
            f"required injection {total_rate_kg_s:.1f} kg/s exceeds "
            f"total capacity {total_cap:.1f} kg/s"
        )
    factor = total_rate_kg_s / total_cap
    return {i.id: i.nominal_capacity_kg_s * factor for i in net.injectors}


def injections_by_node(net: GasNetwork, schedule: dict[str, float]) -> dict[str, float]:
    rates: dict[str, float] = {}
    for inj in net.injectors:
        rate = schedule.get(inj.id, 0.0)
        rates[inj.node] = rates.get(inj.node, 0.0) + rate
    return rates


def reallocate_injections(sim: GasSimulator, violations: list[PressureViolation],
                          linepack: LinepackRecord,
                          schedule: dict[str, float]) -> dict[str, float]:
    """Move injection out of max-pressure zones into low-linepack zones.

    The whole scheduled injection of each violated zone is offered for
    removal; receiving zones absorb it proportionally to their linepack
    headroom (capacity at maximum pressure minus current linepack), each
    injector capped at its nominal capacity.  Total injection is preserved;
    if nothing can be absorbed the reallocation is impossible.
    """
    max_violations = [v for v in violations if v.kind == "max"]
    if not max_violations:
        return dict(schedule)
    zones = sim.zones
    injectors = {i.id: i for i in sim.net.injectors}
    violated = {zones[v.node] for v in max_violations}

    new_schedule = dict(schedule)
    removable = 0.0
    for iid, rate in schedule.items():
        if zones[injectors[iid].node] in violated and rate > 0:
            removable += rate
    if removable <= 0:
        return new_schedule

    caps = sim.zone_linepack_capacity()
    candidates = [
        iid for iid, inj in injectors.items()
        if zones[inj.node] not in violated
        and inj.nominal_capacity_kg_s - new_schedule.get(iid, 0.0) > 1e-12
    ]
    if not candidates:
        raise ReallocationImpossible("all candidate injectors are at capacity")
    absorbable = sum(
        injectors[iid].nominal_capacity_kg_s - new_schedule.get(iid, 0.0)
        for iid in candidates
    )
    moved = min(removable, absorbable)
    if moved <= 0:
        raise ReallocationImpossible("no headroom outside the violated zones")

    # Reduce donors proportionally to their scheduled rate.
    for iid, rate in schedule.items():
        if zones[injectors[iid].node] in violated and rate > 0:
            new_schedule[iid] = rate - moved * rate / removable

    # Distribute to receiving zones by linepack headroom, then within a zone
    # by injector headroom; clipped amounts cascade to the remaining zones.
    remaining = moved
    open_zones = sorted({zones[injectors[iid].node] for iid in candidates})
    while remaining > 1e-12 and open_zones:
        weights = {
            z: max(0.0, caps[z] - linepack.per_zone_kg.get(z, 0.0)) for z in open_zones
        }
        total_w = sum(weights.values())
        if total_w <= 0:
            weights = {z: 1.0 for z in open_zones}
            total_w = float(len(open_zones))
        placed = 0.0
        still_open = []
        for z in open_zones:
            share = remaining * weights[z] / total_w
            zone_injs = [iid for iid in candidates if zones[injectors[iid].node] == z]
            headroom = {
                iid: injectors[iid].nominal_capacity_kg_s - new_schedule[iid]
                for iid in zone_injs
            }
            zone_head = sum(headroom.values())
            take = min(share, zone_head)
            if take > 0:
                for iid in zone_injs:
                    new_schedule[iid] += take * headroom[iid] / zone_head
            placed += take
            if zone_head - take > 1e-12:
                still_open.append(z)
        remaining -= placed
        open_zones = still_open
        if placed <= 1e-15:
            break
    return new_schedule


def simulate_day_with_reallocation(
    sim: GasSimulator,
    schedule: dict[str, float],
    offtakes_hourly: dict[str, np.ndarray],
    dt_s: float = 60.0,
    max_rounds: int = 5,
    ref_node: str | None = None,
    ref_pressure_pa: float | None = None,
) -> tuple[DayTrajectory, dict[str, float], int]:
    """Simulate a day, re-running with reallocated injections on max violations.

    Returns the final trajectory, the injector schedule actually used, and
    the number of reallocation rounds performed.
    """
    current = dict(schedule)
    rounds = 0
    while True:
        traj = sim.simulate_day(injections_by_node(sim.net, current), offtakes_hourly,
                                dt_s, ref_node=ref_node, ref_pressure_pa=ref_pressure_pa)
        max_v = traj.max_violations()
        if not max_v or rounds >= max_rounds:
            return traj, current, rounds
        worst = max(max_v, key=lambda v: v.worst_pressure_pa)
        instant = int(np.searchsorted(traj.times_s, worst.onset_s))
        record = traj.linepack[min(instant, len(traj.linepack) - 1)]
        try:
            revised = reallocate_injections(sim, max_v, record, current)
        except ReallocationImpossible:
            return traj, current, rounds
        if all(abs(revised[k] - current.get(k, 0.0)) < 1e-12 for k in revised):
            return traj, current, rounds
        current = revised
        rounds += 1


# ----- module-level wrappers matching the operation names ------------------------


def steady_state_init(net: GasNetwork, injections: dict[str, float],
                      offtakes: dict[str, float], dx_m: float = 10000.0,
                      **kwargs) -> GasState:
    return GasSimulator(net, dx_m).steady_state(injections, offtakes, **kwargs)


def step_transient(sim: GasSimulator, state: GasState, injections: dict[str, float],
                   offtakes: dict[str, float], dt_s: float) -> GasState:
    return sim.step(state, injections, offtakes, dt_s)


def compute_linepack(sim: GasSimulator, state: GasState) -> LinepackRecord:
    return sim.linepack(state)


def simulate_day(net: GasNetwork, injections: dict[str, float],
                 offtakes_hourly: dict[str, np.ndarray], dt_s: float = 60.0,
                 dx_m: float = 10000.0) -> DayTrajectory:
    return GasSimulator(net, dx_m).simulate_day(injections, offtakes_hourly, dt_s)
