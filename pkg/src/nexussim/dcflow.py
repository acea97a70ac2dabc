"""Linearized (B-theta) power flow on the electric network."""

from __future__ import annotations

import numpy as np

from .network import ElectricNetwork


class SingularTopology(Exception):
    """An island has no reference bus, so angles are undetermined."""


def compute_dc_flows(
    net: ElectricNetwork, injections_mw: dict[str, float]
) -> tuple[dict[str, float], dict[str, float]]:
    """Solve B-theta equations for nodal net injections (MW).

    Injections must balance to zero within each island.  Returns per-line
    flows (positive from_bus -> to_bus) and per-bus angles; Kirchhoff's
    current law holds at every bus to numerical precision.
    """
    theta: dict[str, float] = {}
    for island in net.islands():
        buses = sorted(island)
        refs = [b.id for b in net.buses if b.id in island and b.reference]
        if not refs:
            raise SingularTopology(f"island containing {buses[0]} has no reference bus")
        if len(refs) > 1:
            raise ValueError(f"island containing {buses[0]} has multiple reference buses")
        ref = refs[0]
        inj = np.array([injections_mw.get(b, 0.0) for b in buses])
        if abs(inj.sum()) > 1e-6 * max(1.0, np.abs(inj).max(initial=0.0)):
            raise ValueError(
                f"island containing {buses[0]} has unbalanced injections: {inj.sum():.6g} MW"
            )
        pos = {b: i for i, b in enumerate(buses)}
        n = len(buses)
        b_mat = np.zeros((n, n))
        for ln in net.lines:
            if ln.from_bus in pos and ln.to_bus in pos:
                b = 1.0 / ln.reactance_pu
                i, j = pos[ln.from_bus], pos[ln.to_bus]
                b_mat[i, i] += b
                b_mat[j, j] += b
                b_mat[i, j] -= b
                b_mat[j, i] -= b
        keep = [i for i, b in enumerate(buses) if b != ref]
        if keep:
            reduced = b_mat[np.ix_(keep, keep)]
            try:
                th = np.linalg.solve(reduced, inj[keep])
            except np.linalg.LinAlgError as exc:
                raise SingularTopology(f"island containing {buses[0]}: {exc}") from exc
        else:
            th = np.array([])
        theta[ref] = 0.0
        for i, k in enumerate(keep):
            theta[buses[k]] = float(th[i])

    flows = {
        ln.id: (theta[ln.from_bus] - theta[ln.to_bus]) / ln.reactance_pu
        for ln in net.lines
    }
    return flows, theta
