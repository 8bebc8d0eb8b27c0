import math

import pytest

import hybridwind as hw


def hand_case():
    farm = hw.FarmSpec()
    farm.capacity_mw = 100.0
    st = hw.StorageSpec()
    st.rating_mw = 20.0
    st.duration_h = 2.0
    st.round_trip_efficiency = 0.8
    return farm, st


def test_post_process_step_hand_values():
    farm, st = hand_case()
    assert hw.post_process_step(0.5, 60.0, 10.0, farm, st) == pytest.approx((50.0, 20.0))
    assert hw.post_process_step(0.5, 10.0, 30.0, farm, st) == pytest.approx((36.0, 4.0))


def test_chained_trace():
    farm, st = hand_case()
    tr = hw.simulate_requests([0.5, 0.5, 0.5], [60.0, 10.0, 0.0], farm, st, s0=10.0)
    assert list(tr.delivered) == pytest.approx([50.0, 26.0, 3.2])
    assert list(tr.stored) == pytest.approx([10.0, 20.0, 4.0, 0.8])
    assert len(tr) == 3


def test_contract_violation_raises():
    farm, st = hand_case()
    with pytest.raises(hw.ContractError):
        hw.post_process_step(1.5, 10.0, 0.0, farm, st)
    with pytest.raises(hw.HybridWindError):
        hw.post_process_step(0.5, 10.0, 41.0, farm, st)


def test_synth_and_baseload_report():
    farm = hw.FarmSpec()
    data = hw.synth_dataset(1, 5, farm)
    assert len(data["g"]) == 8760
    assert set(data) >= {"time", "v", "g", "p"}
    st = hw.placeholder_storage("CAES", 100.0, 24.0)
    target = sum(data["g"]) / len(data["g"])
    tr = hw.simulate_baseload(data["g"], target, farm, st)
    years = hw.annual_report(tr, data["g"], data["p"], farm, st)
    assert len(years) == 1 and not years[0].partial
    assert years[0].cove == pytest.approx(hw.cove(tr.delivered, data["p"], farm, st))
    assert math.isfinite(years[0].cove * hw.COVE_DISPLAY_SCALE)


def test_metrics():
    assert hw.rmse([1.0, 2.0], [1.0, 4.0]) == pytest.approx(math.sqrt(2.0))
    assert hw.cross_correlation([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]) == pytest.approx(1.0)
    w = [float(i % 20) for i in range(500)]
    p = [x / 20.0 for x in w]
    assert hw.power_curve_similarity(w, p, w, p) == pytest.approx(1.0)
    assert hw.pinball(0.4, 0.5) == pytest.approx(0.2)


def test_value_factor_constant_dispatch_is_one():
    assert hw.value_factor([5.0] * 4, [10.0, 20.0, 30.0, 40.0]) == pytest.approx(1.0)


def test_walk_is_seeded():
    a = hw.brownian_walk(100, 0.1, 0.01, 3)
    assert a == hw.brownian_walk(100, 0.1, 0.01, 3)
    assert all(0.0 < x < 1.0 for x in a)


def test_cli_exit_codes(tmp_path):
    assert hw.run_cli(["synth", "--years", "0"]) == 2
    out = tmp_path / "synth.csv"
    assert hw.run_cli(["--out-dir", str(tmp_path), "synth", "--years", "1", "-o", str(out)]) == 0
    assert sum(1 for _ in out.open()) == 8761
