"""CSV and manifest emission for study results.

All tables are plain CSV with a unit suffix on every numeric column and a
deterministic float format, so reruns with identical inputs produce
byte-identical files (the per-contingency wall_s column is the one
documented exception; comparisons should drop it).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__
from .coupling import CoupledSolution
from .fileio import sha256_of
from .gastransient import DayTrajectory
from .studies import SHARE_COLUMNS, AdequacyReport, ContingencyRecord
from .units import pa_to_bar


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_trajectory(traj: DayTrajectory, out: Path) -> None:
    """linepack.csv and pressures.csv plus the violations log."""
    rows = []
    for rec in traj.linepack:
        for zone in sorted(rec.per_zone_kg):
            rows.append((rec.time_s, zone, rec.per_zone_kg[zone] / rec.total_kg
                         * rec.total_mcm if rec.total_kg else 0.0))
        rows.append((rec.time_s, "total", rec.total_mcm))
    write_csv(out / "linepack.csv", ["time_s", "zone_id", "linepack_mcm"], rows)

    rows = []
    for k, t in enumerate(traj.times_s):
        for j, node in enumerate(traj.node_ids):
            rows.append((t, node, pa_to_bar(traj.node_pressure[k, j])))
    write_csv(out / "pressures.csv", ["time_s", "node_id", "pressure_bar"], rows)

    rows = [
        (v.node, v.kind, v.onset_s, v.duration_s, pa_to_bar(v.worst_pressure_pa))
        for v in traj.violations
    ]
    write_csv(out / "violations.csv",
              ["node_id", "kind", "onset_s", "duration_s", "worst_pressure_bar"], rows)


def write_dispatch(solution: CoupledSolution, out: Path) -> None:
    d = solution.dispatch
    rows = []
    for gid in sorted(d.output_mw):
        for t, (u, p) in enumerate(zip(d.commitment[gid], d.output_mw[gid]), start=1):
            rows.append((t, gid, int(u), p))
    write_csv(out / "dispatch.csv",
              ["t_h", "generator_id", "committed", "output_MW"], rows)

    rows = []
    for bus in sorted(d.shed_mw):
        for t, mw in enumerate(d.shed_mw[bus], start=1):
            rows.append((t, bus, mw))
    write_csv(out / "shed.csv", ["t_h", "bus_id", "shed_MW"], rows)

    rows = []
    for cid in sorted(d.curtailment_mw):
        for t, mw in enumerate(d.curtailment_mw[cid], start=1):
            rows.append((t, cid, mw))
    write_csv(out / "curtailments.csv",
              ["t_h", "cluster_id", "curtailed_MW"], rows)


def write_iteration_log(solution: CoupledSolution, out: Path) -> None:
    lines = []
    for rec in solution.iteration_log:
        lines.append(json.dumps({
            "iteration": rec.iteration,
            "objective": rec.objective,
            "min_violations": rec.min_violations,
            "max_violations": rec.max_violations,
            "reallocation_rounds": rec.reallocation_rounds,
            "constraints_emitted": rec.constraints_emitted,
            "zones": rec.zones,
            "curtailment_kg": rec.curtailment_kg,
        }, sort_keys=True))
    (out / "iterations.jsonl").write_text("\n".join(lines) + ("\n" if lines else ""))


def write_adequacy(report: AdequacyReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    header = [f"{col.replace('/', '_')}_pct" for col in SHARE_COLUMNS]
    row = [report.shares_pct[col] for col in SHARE_COLUMNS]
    write_csv(out / "generation_shares.csv", header, [row])
    write_trajectory(report.solution.trajectory, out)
    write_dispatch(report.solution, out)
    write_iteration_log(report.solution, out)
    summary = {
        "study": "adequacy",
        "objective": report.solution.dispatch.objective,
        "optimality_gap": report.solution.dispatch.gap,
        "shed_MWh": report.shed_mwh,
        "wind_curtailment_GWh": report.wind_curtailment_gwh,
        "solar_curtailment_GWh": report.solar_curtailment_gwh,
        "linepack_min_mcm": report.linepack_min_mcm,
        "linepack_max_mcm": report.linepack_max_mcm,
        "linepack_swing_mcm": report.linepack_swing_mcm,
        "adequacy_without_res_pct": report.adequacy_without_res_pct,
        "pressure_violations": len(report.violations),
        "coupling_iterations": report.solution.iterations,
        "converged": report.solution.converged,
        "gas_curtailed_kg": report.gas_curtailed_kg,
        "gas_curtailed_m3_standard": report.gas_curtailed_m3,
        "shares_pct": {k: report.shares_pct[k] for k in SHARE_COLUMNS},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")


def write_security(records: list[ContingencyRecord], out: Path,
                   base_ens_mwh: float | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        (r.id, r.klass, r.element, r.capacity_lost_mw, r.ens_mwh,
         r.gas_curtailed_kg, r.iterations, r.wall_s, int(r.converged),
         int(r.islanded), int(r.shed_at_electric_compressor_bus), r.error or "")
        for r in records
    ]
    write_csv(out / "contingency_report.csv",
              ["id", "class", "element", "capacity_lost_MW", "ENS_MWh",
               "gas_curtailed_kg", "iterations", "wall_s", "converged",
               "islanded", "shed_at_electric_compressor_bus", "error"],
              rows)
    worst = max(records, key=lambda r: r.ens_mwh, default=None)
    summary = {
        "study": "security",
        "contingencies": len(records),
        "total_ENS_MWh": float(sum(r.ens_mwh for r in records)),
        "total_gas_curtailed_kg": float(sum(r.gas_curtailed_kg for r in records)),
        "with_shedding": sum(1 for r in records if r.ens_mwh > 1e-9),
        "failed": sum(1 for r in records if r.error),
        "worst_case": None if worst is None else {
            "id": worst.id, "ENS_MWh": worst.ens_mwh,
        },
    }
    if base_ens_mwh is not None:
        summary["base_case_ENS_MWh"] = base_ens_mwh
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")


def write_gas_sim(traj: DayTrajectory, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory(traj, out)
    summary = {
        "study": "gas-sim",
        "initial_linepack_mcm": traj.initial_linepack.total_mcm,
        "final_linepack_mcm": traj.linepack[-1].total_mcm,
        "closure_kg": traj.closure.get("closure_kg"),
        "mass_imbalance_kg": traj.closure.get("imbalance_kg"),
        "violations": len(traj.violations),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")


def write_manifest(out: Path, config: dict, input_files: list[Path]) -> None:
    manifest = {
        "tool": "nexussim",
        "version": __version__,
        "config": config,
        "inputs": {
            str(p.name): sha256_of(p) for p in sorted(input_files) if p.exists()
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
