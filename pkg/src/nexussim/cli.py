"""Command-line entry point: validate, adequacy, security, gas-sim, demo.

A scenario directory holds electric.json, gas.json, scenario.json,
load_snapshot.json and gas_demand_split.json.  All outputs land under
--out together with a manifest recording the configuration and the
content hash of every input file.

Exit codes: 0 clean study, 2 validation findings, 3 study-level failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .coupling import CoupleOptions
from .fileio import load_electric, load_gas
from .gasnet import validate_gas_network
from .gastransient import GasSimulator, allocate_injections, injections_by_node
from .network import validate_electric_network
from .report import (
    write_adequacy,
    write_gas_sim,
    write_manifest,
    write_security,
)
from .scenario import load_bundle, validate_bundle
from .studies import (
    ContingencyConfig,
    enumerate_contingencies,
    run_adequacy,
    run_security,
)
from .system import bind_coupling, validate_coupling
from .uc import UcOptions
from .validation import ValidationReport

INPUT_FILES = ("electric.json", "gas.json", "scenario.json",
               "load_snapshot.json", "gas_demand_split.json")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, help="scenario bundle directory")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--reserve-mw", type=float, default=None,
                   help="spinning reserve requirement (default: bundle value)")
    p.add_argument("--gap-target", type=float, default=1e-3)
    p.add_argument("--node-limit", type=int, default=150)
    p.add_argument("--voll", type=float, default=3000.0)
    p.add_argument("--dt-s", type=float, default=60.0)
    p.add_argument("--dx-m", type=float, default=10000.0)
    p.add_argument("--iteration-cap", type=int, default=10)
    p.add_argument("--safety-factor", type=float, default=1.1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nexus",
        description="coupled electric-gas adequacy and N-1 security studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("validate", "check networks, coupling and bundle; report findings"),
        ("adequacy", "extreme-day adequacy study with reserve"),
        ("security", "N-1 contingency sweep (reserve dropped)"),
        ("gas-sim", "standalone 24-h gas simulation of the firm demand"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
    demo = sub.add_parser("demo", help="write a runnable synthetic scenario directory")
    demo.add_argument("--out", required=True)
    demo.add_argument("--kind", choices=("desk", "sweep"), default="desk")
    return parser


def _load_all(scenario_dir: Path):
    net_e, cmap = load_electric(scenario_dir / "electric.json")
    net_g = load_gas(scenario_dir / "gas.json")
    bundle = load_bundle(scenario_dir)
    return net_e, net_g, cmap, bundle


def _options(args) -> CoupleOptions:
    uc = UcOptions(voll=args.voll, gap_target=args.gap_target,
                   node_limit=args.node_limit)
    return CoupleOptions(uc=uc, dt_s=args.dt_s, dx_m=args.dx_m,
                         iteration_cap=args.iteration_cap,
                         safety_factor=args.safety_factor)


def _config_dict(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "command"}


def cmd_validate(args) -> int:
    scenario_dir = Path(args.scenario)
    report = ValidationReport()
    net_e, cmap = load_electric(scenario_dir / "electric.json")
    net_g = load_gas(scenario_dir / "gas.json")
    report.extend(validate_electric_network(net_e))
    report.extend(validate_gas_network(net_g))
    report.extend(validate_coupling(net_e, net_g, cmap))
    if report.ok:
        sys_ = bind_coupling(net_e, net_g, cmap)
        bundle = load_bundle(scenario_dir)
        report.extend(validate_bundle(bundle, sys_))
    print(report)
    return 0 if report.ok else 2


def cmd_adequacy(args) -> int:
    scenario_dir = Path(args.scenario)
    out = Path(args.out or "adequacy-out")
    net_e, net_g, cmap, bundle = _load_all(scenario_dir)
    system = bind_coupling(net_e, net_g, cmap)
    report = run_adequacy(system, bundle, _options(args), reserve_mw=args.reserve_mw)
    write_adequacy(report, out)
    write_manifest(out, _config_dict(args),
                   [scenario_dir / f for f in INPUT_FILES])
    print(f"adequacy study written to {out}")
    print(f"  shed {report.shed_mwh:.3f} MWh, gas curtailed {report.gas_curtailed_kg:.0f} kg, "
          f"linepack swing {report.linepack_swing_mcm:.2f} mcm, "
          f"{len(report.violations)} pressure violations")
    return 0


def cmd_security(args) -> int:
    scenario_dir = Path(args.scenario)
    out = Path(args.out or "security-out")
    net_e, net_g, cmap, bundle = _load_all(scenario_dir)
    system = bind_coupling(net_e, net_g, cmap)
    from .coupling import coupled_solve
    from .scenario import build_study_inputs

    options = _options(args)
    scaled, inputs, gas = build_study_inputs(system, bundle)
    security_options = replace(options, uc=replace(options.uc, reserve_mw=0.0))
    base = coupled_solve(scaled, inputs, gas, security_options)
    base_ens = base.dispatch.total_shed_mwh(security_options.uc.dt_h)
    contingencies = enumerate_contingencies(scaled, ContingencyConfig())
    records = run_security(scaled, inputs, gas, contingencies, options, jobs=args.jobs)
    write_security(records, out, base_ens_mwh=base_ens)
    write_manifest(out, _config_dict(args),
                   [scenario_dir / f for f in INPUT_FILES])
    shedding = sum(1 for r in records if r.ens_mwh > 1e-9)
    print(f"security sweep written to {out}: {len(records)} contingencies, "
          f"{shedding} with shedding, base case {base_ens:.3f} MWh")
    return 0


def cmd_gas_sim(args) -> int:
    scenario_dir = Path(args.scenario)
    out = Path(args.out or "gas-sim-out")
    net_e, net_g, cmap, bundle = _load_all(scenario_dir)
    system = bind_coupling(net_e, net_g, cmap)
    from .scenario import build_study_inputs

    _scaled, _inputs, gas = build_study_inputs(system, bundle)
    sim = GasSimulator(net_g, args.dx_m)
    total_avg = float(sum(s.mean() for s in gas.firm_offtakes_kg_s.values()))
    schedule = allocate_injections(net_g, total_avg)
    traj = sim.simulate_day(injections_by_node(net_g, schedule),
                            gas.firm_offtakes_kg_s, args.dt_s)
    write_gas_sim(traj, out)
    write_manifest(out, _config_dict(args),
                   [scenario_dir / f for f in INPUT_FILES])
    print(f"gas day written to {out}: {len(traj.violations)} violations, "
          f"closure {traj.closure['closure_kg']:.1f} kg")
    return 0


def cmd_demo(args) -> int:
    from .synthetic import write_bundle

    path = write_bundle(args.out, args.kind)
    print(f"wrote {args.kind} scenario to {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "validate": cmd_validate,
        "adequacy": cmd_adequacy,
        "security": cmd_security,
        "gas-sim": cmd_gas_sim,
        "demo": cmd_demo,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
