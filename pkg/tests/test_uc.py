import numpy as np
import pytest

from nexussim.network import Bus, ElectricNetwork, Generator, Line, RenewableCluster
from nexussim.uc import (
    DimensionMismatch,
    FuelRow,
    UcInputs,
    UcOptions,
    build_uc,
    enumerate_uc,
    solve_uc,
    verify_dispatch,
)


def one_bus(*gens):
    return ElectricNetwork(buses=(Bus("B1", reference=True),), lines=(), generators=gens)


CHEAP = Generator("G1", "B1", "coal", 100.0, cost_energy=10.0)
DEAR = Generator("G2", "B1", "oil", 50.0, cost_energy=50.0)


def test_merit_order_dispatch():
    prob = build_uc(one_bus(CHEAP, DEAR), UcInputs(1, {"B1": np.array([120.0])}),
                    UcOptions())
    r = solve_uc(prob, gap_target=1e-9)
    assert r.objective == pytest.approx(2000.0)
    assert r.output_mw["G1"][0] == pytest.approx(100.0)
    assert r.output_mw["G2"][0] == pytest.approx(20.0)
    assert enumerate_uc(prob) == pytest.approx(2000.0)


def test_forced_shedding_priced_at_voll():
    prob = build_uc(one_bus(CHEAP), UcInputs(1, {"B1": np.array([120.0])}),
                    UcOptions(voll=3000.0))
    r = solve_uc(prob, gap_target=1e-9)
    assert r.objective == pytest.approx(10.0 * 100.0 + 3000.0 * 20.0)
    assert r.total_shed_mwh() == pytest.approx(20.0)


def test_zero_demand_all_off():
    prob = build_uc(one_bus(CHEAP), UcInputs(1, {"B1": np.array([0.0])}), UcOptions())
    r = solve_uc(prob, gap_target=1e-9)
    assert r.objective == pytest.approx(0.0)
    assert r.commitment["G1"][0] == 0


def test_variable_and_row_counts():
    prob = build_uc(one_bus(CHEAP, DEAR),
                    UcInputs(3, {"B1": np.array([50.0, 60.0, 70.0])}), UcOptions())
    assert prob.count_vars("u") == 6
    assert prob.count_vars("a") == 6
    assert prob.count_vars("b") == 6
    assert prob.count_rows("balance") == 3


def test_reserve_rows_present_in_adequacy_mode():
    # 8 GW requirement appears as reserve rows with rhs -8000 (<= form).
    prob = build_uc(one_bus(CHEAP, DEAR), UcInputs(2, {"B1": np.array([50.0, 60.0])}),
                    UcOptions(reserve_mw=8000.0))
    assert prob.count_rows("reserve") == 2
    assert prob.count_vars("rs") == 2
    reserve_rhs = [prob.mip.b_ub[i] for i, tag in enumerate(prob.ub_tags)
                   if tag[0] == "reserve"]
    assert reserve_rhs == [-8000.0, -8000.0]


def test_reserve_rows_absent_in_security_mode():
    prob = build_uc(one_bus(CHEAP, DEAR), UcInputs(2, {"B1": np.array([50.0, 60.0])}),
                    UcOptions(reserve_mw=0.0))
    assert prob.count_rows("reserve") == 0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        build_uc(one_bus(CHEAP), UcInputs(24, {"B1": np.zeros(23)}), UcOptions())


def test_idling_beats_cycling_without_min_stable_level():
    gen = Generator("G1", "B1", "coal", 100.0, 0.0, 100.0, 100.0, 1, 1,
                    cost_energy=10.0, cost_startup=500.0, cost_shutdown=100.0)
    load = np.array([50.0, 0.0, 50.0])
    prob = build_uc(one_bus(gen), UcInputs(3, {"B1": load}), UcOptions())
    r = solve_uc(prob, gap_target=1e-9)
    # with p_min = 0 the unit idles through the zero hour: one start, no stop
    assert r.startup["G1"].sum() == 1
    assert r.shutdown["G1"].sum() == 0
    assert r.objective == pytest.approx(10.0 * 100.0 + 500.0)
    assert verify_dispatch(r, prob).ok


def test_min_stable_level_forces_cycling():
    gen = Generator("G1", "B1", "coal", 100.0, 30.0, 100.0, 100.0, 1, 1,
                    cost_energy=10.0, cost_startup=500.0, cost_shutdown=100.0)
    load = np.array([50.0, 0.0, 50.0])
    prob = build_uc(one_bus(gen), UcInputs(3, {"B1": load}), UcOptions())
    r = solve_uc(prob, gap_target=1e-9)
    # overgeneration has no sink, so the zero-load hour forces a shutdown
    assert r.startup["G1"].sum() == 2
    assert r.shutdown["G1"].sum() == 1
    assert r.objective == pytest.approx(10.0 * 100.0 + 2 * 500.0 + 100.0)
    assert verify_dispatch(r, prob).ok


def test_alpha_beta_consistency_and_exclusivity():
    gen = Generator("G1", "B1", "coal", 100.0, 20.0, 60.0, 60.0, 2, 2,
                    cost_energy=10.0, cost_startup=300.0, cost_shutdown=50.0)
    load = np.array([0.0, 80.0, 80.0, 0.0])
    prob = build_uc(one_bus(gen), UcInputs(4, {"B1": load}),
                    UcOptions(voll=5000.0))
    r = solve_uc(prob, gap_target=1e-9)
    u = r.commitment["G1"]
    a = r.startup["G1"]
    b = r.shutdown["G1"]
    u_prev = 0
    for t in range(4):
        assert a[t] - b[t] == u[t] - u_prev
        assert a[t] * b[t] == 0
        u_prev = u[t]


def test_min_up_time_binds():
    gen = Generator("G1", "B1", "coal", 100.0, 30.0, 100.0, 100.0, 3, 1,
                    cost_energy=10.0, cost_startup=10.0)
    # single-hour need in the middle: unit must stay on 3 hours once started
    load = np.array([0.0, 60.0, 0.0, 0.0])
    prob = build_uc(one_bus(gen), UcInputs(4, {"B1": load}), UcOptions(voll=4000.0))
    r = solve_uc(prob, gap_target=1e-9)
    assert verify_dispatch(r, prob).ok
    if r.commitment["G1"].sum() > 0:
        on_hours = int(r.commitment["G1"].sum())
        assert on_hours >= 3


def test_ramp_limits_respected():
    gen = Generator("G1", "B1", "coal", 200.0, 0.0, 40.0, 40.0, 1, 1, cost_energy=5.0)
    load = np.array([40.0, 120.0, 40.0])
    prob = build_uc(one_bus(gen), UcInputs(3, {"B1": load}), UcOptions(voll=1000.0))
    r = solve_uc(prob, gap_target=1e-9)
    assert verify_dispatch(r, prob).ok
    p = r.output_mw["G1"]
    assert p[1] - p[0] <= 40.0 + 1e-6
    # the 120 MW spike cannot be fully served: some shed is inevitable
    assert r.total_shed_mwh() > 0


def test_network_constrained_dispatch():
    net = ElectricNetwork(
        buses=(Bus("B1", True), Bus("B2")),
        lines=(Line("L1", "B1", "B2", 50.0, 0.1),),
        generators=(
            Generator("G1", "B1", "coal", 200.0, cost_energy=10.0),
            Generator("G2", "B2", "oil", 200.0, cost_energy=100.0),
        ),
    )
    prob = build_uc(net, UcInputs(1, {"B2": np.array([120.0])}), UcOptions())
    r = solve_uc(prob, gap_target=1e-9)
    # only 50 MW can be imported over the line, the rest is local and dear
    assert r.flow_mw["L1"][0] == pytest.approx(50.0, abs=1e-6)
    assert r.output_mw["G2"][0] == pytest.approx(70.0, abs=1e-6)
    assert verify_dispatch(r, prob).ok


def test_curtailment_bounded_by_availability():
    net = ElectricNetwork(
        buses=(Bus("B1", True),),
        lines=(),
        generators=(Generator("G1", "B1", "nuclear", 100.0, 80.0, 100.0, 100.0,
                              1, 1, cost_energy=5.0),),
        clusters=(RenewableCluster("W1", "B1", "wind", 100.0, 8.0),),
    )
    avail = {"W1": np.array([90.0])}
    prob = build_uc(net, UcInputs(1, {"B1": np.array([100.0])}, avail), UcOptions())
    r = solve_uc(prob, gap_target=1e-9)
    # nuclear must-run at 80 leaves only 20 MW of room for 90 MW of wind
    assert 0.0 <= r.curtailment_mw["W1"][0] <= 90.0 + 1e-9
    assert verify_dispatch(r, prob).ok


def test_pumped_storage_reservoir_closure():
    gens = (
        Generator("G1", "B1", "coal", 200.0, 0.0, 200.0, 200.0, 1, 1, cost_energy=10.0),
        Generator("PS", "B1", "pumped-storage", 50.0, 0.0, 50.0, 50.0, 1, 1,
                  cost_energy=2.0),
    )
    load = np.array([50.0, 50.0, 120.0, 120.0])
    prob = build_uc(one_bus(*gens), UcInputs(4, {"B1": load}), UcOptions())
    r = solve_uc(prob, gap_target=1e-9)
    assert verify_dispatch(r, prob).ok
    eta = np.sqrt(0.75)
    e = 0.5 * 6.0 * 50.0
    for t in range(4):
        e = e + eta * r.pump_mw["PS"][t] - r.output_mw["PS"][t] / eta
    assert e == pytest.approx(0.5 * 6.0 * 50.0, abs=1e-5)


def test_fuel_row_monotonicity():
    prob = build_uc(one_bus(CHEAP, DEAR), UcInputs(2, {"B1": np.array([120.0, 120.0])}),
                    UcOptions())
    base = solve_uc(prob, gap_target=1e-9).objective
    row = FuelRow(zone="Z01", coeffs={("G1", 0): 1.0, ("G1", 1): 1.0},
                  rhs_kg=150.0, onset_s=0.0, duration_s=86400.0,
                  curtailment_kg=50.0, reference_draw_kg=200.0)
    tightened = build_uc(one_bus(CHEAP, DEAR),
                         UcInputs(2, {"B1": np.array([120.0, 120.0])}),
                         UcOptions(), [row])
    higher = solve_uc(tightened, gap_target=1e-9).objective
    assert higher >= base - 1e-9
    assert higher > base  # the row actually binds here


def test_tie_break_prefers_lower_id():
    # gap_target 0 exhausts the tree, letting the lexicographic epsilon
    # decide between otherwise identical dispatches.
    twin_a = Generator("GA", "B1", "coal", 100.0, cost_energy=10.0)
    twin_b = Generator("GB", "B1", "coal", 100.0, cost_energy=10.0)
    prob = build_uc(one_bus(twin_a, twin_b), UcInputs(1, {"B1": np.array([100.0])}),
                    UcOptions())
    r = solve_uc(prob, gap_target=0.0)
    assert r.output_mw["GA"][0] == pytest.approx(100.0, abs=1e-5)
    assert r.output_mw["GB"][0] == pytest.approx(0.0, abs=1e-5)


def test_solve_is_deterministic():
    prob = build_uc(one_bus(CHEAP, DEAR), UcInputs(2, {"B1": np.array([120.0, 90.0])}),
                    UcOptions())
    first = solve_uc(prob)
    second = solve_uc(prob)
    assert first.objective == second.objective
    for gid in first.output_mw:
        assert np.array_equal(first.output_mw[gid], second.output_mw[gid])
        assert np.array_equal(first.commitment[gid], second.commitment[gid])


def test_verify_catches_tampering():
    prob = build_uc(one_bus(CHEAP, DEAR), UcInputs(1, {"B1": np.array([120.0])}),
                    UcOptions())
    r = solve_uc(prob, gap_target=1e-9)
    assert verify_dispatch(r, prob).ok
    r.output_mw["G1"][0] += 50.0  # exceed committed maximum and break balance
    report = verify_dispatch(r, prob)
    assert not report.ok
    kinds = {f.kind for f in report.findings}
    assert "generator" in kinds or "balance" in kinds
    assert "objective" in kinds


def test_verify_catches_misreported_objective():
    prob = build_uc(one_bus(CHEAP), UcInputs(1, {"B1": np.array([50.0])}), UcOptions())
    r = solve_uc(prob, gap_target=1e-9)
    r.objective *= 1.01
    report = verify_dispatch(r, prob)
    assert any(f.kind == "objective" for f in report.findings)


def test_initial_state_respected():
    gen = Generator("G1", "B1", "coal", 100.0, 40.0, 30.0, 30.0, 2, 2,
                    cost_energy=10.0, cost_startup=1000.0)
    inputs = UcInputs(2, {"B1": np.array([80.0, 80.0])},
                      initial_state={"G1": (1, 80.0)})
    r = solve_uc(build_uc(one_bus(gen), inputs, UcOptions()), gap_target=1e-9)
    # already on: no startup cost is paid
    assert r.startup["G1"].sum() == 0
    assert r.objective == pytest.approx(10.0 * 160.0)


def test_brute_force_equivalence_randomized():
    rng = np.random.default_rng(11)
    for _ in range(12):
        n_gen = int(rng.integers(1, 4))
        horizon = int(rng.integers(1, 4))
        gens = []
        for k in range(n_gen):
            pmax = float(rng.integers(50, 150))
            gens.append(Generator(
                f"G{k}", "B1", "coal", pmax,
                p_min_stable_mw=float(rng.integers(0, 30)),
                ramp_up_mw_h=float(rng.integers(40, 160)),
                ramp_down_mw_h=float(rng.integers(40, 160)),
                min_up_h=int(rng.integers(1, 3)),
                min_down_h=int(rng.integers(1, 3)),
                cost_energy=float(rng.integers(5, 80)),
                cost_startup=float(rng.integers(0, 600)),
                cost_shutdown=float(rng.integers(0, 100)),
            ))
        load = rng.uniform(0, 100 * n_gen, size=horizon)
        prob = build_uc(one_bus(*gens), UcInputs(horizon, {"B1": load}),
                        UcOptions(voll=2000.0))
        got = solve_uc(prob, gap_target=1e-9).objective
        want = enumerate_uc(prob)
        assert got == pytest.approx(want, rel=1e-6, abs=1e-6)
