import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_instance
from paramdp.model import (AR1Weights, BatteryParams, CommitmentProfile,
                           TariffSchedule, admissible_interval, battery_step,
                           delivered_power, final_cost, stage_cost,
                           state_step)


class TestBatteryStep:
    def test_zero_control_identity(self, battery):
        assert battery_step(0.5, 0.0, battery) == 0.5

    def test_charge(self, battery):
        # 0.5 + 0.95 * 0.2 * 0.5 / 1
        assert battery_step(0.5, 0.2, battery) == pytest.approx(0.595, abs=1e-15)

    def test_discharge(self, battery):
        # 0.5 - (0.19 / 0.95) * 0.5 / 1
        assert battery_step(0.5, -0.19, battery) == pytest.approx(0.4, abs=1e-15)

    def test_rejects_non_finite(self, battery):
        with pytest.raises(ValueError):
            battery_step(float("nan"), 0.0, battery)
        with pytest.raises(ValueError):
            battery_step(0.5, float("inf"), battery)

    def test_piecewise_linear_slopes(self, battery):
        h = 1e-6
        slope_pos = (battery_step(0.5, 2 * h, battery) - battery_step(0.5, h, battery)) / h
        slope_neg = (battery_step(0.5, -h, battery) - battery_step(0.5, -2 * h, battery)) / h
        assert slope_pos == pytest.approx(battery.rho_c * battery.dt_hours / battery.capacity)
        assert slope_neg == pytest.approx(battery.dt_hours / (battery.capacity * battery.rho_d))
        assert slope_neg >= slope_pos  # one breakpoint at zero, nondecreasing order reversed

    @given(soc=st.floats(0.0, 1.0), frac=st.floats(0.0, 1.0))
    @settings(max_examples=200, deadline=None)
    def test_admissible_controls_keep_soc_in_range(self, soc, frac):
        bp = BatteryParams()
        lo, hi = admissible_interval(soc, bp)
        u = lo + frac * (hi - lo)
        nxt = battery_step(soc, u, bp)
        assert -1e-12 <= nxt <= 1.0 + 1e-12


class TestAdmissibleInterval:
    def test_full_battery(self, battery):
        lo, hi = admissible_interval(1.0, battery)
        assert (lo, hi) == (-1.0, 0.0)

    def test_empty_battery(self, battery):
        lo, hi = admissible_interval(0.0, battery)
        assert lo == 0.0
        assert hi == pytest.approx(min(1.0, 1.0 / (0.95 * 0.5)))
        assert hi == 1.0

    @given(soc=st.floats(0.0, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_zero_always_admissible(self, soc):
        lo, hi = admissible_interval(soc, BatteryParams())
        assert lo <= 0.0 <= hi

    def test_rejects_out_of_range(self, battery):
        with pytest.raises(ValueError):
            admissible_interval(1.5, battery)


class TestStateStep:
    def test_plain_recursion(self, battery):
        ar1 = AR1Weights(alpha=[0.9], beta=[0.1])
        assert state_step((0.5, 0.0), 0.0, 0.0, 0, ar1, battery) == (0.5, 0.1)

    def test_clamp_at_zero(self, battery):
        ar1 = AR1Weights(alpha=[0.0], beta=[0.0])
        assert state_step((0.5, 0.0), 0.0, -1.0, 0, ar1, battery) == (0.5, 0.0)

    def test_clamp_at_peak(self, battery):
        ar1 = AR1Weights(alpha=[1.0], beta=[0.0])
        assert state_step((0.0, battery.q_max), 0.0, 1.0, 0, ar1, battery) == \
            (0.0, battery.q_max)


class TestDeliveredPower:
    @pytest.mark.parametrize("gen_next,u,expected",
                             [(0.8, 0.3, 0.5), (0.8, -0.2, 1.0), (0.0, 0.0, 0.0)])
    def test_values(self, gen_next, u, expected):
        assert delivered_power(gen_next, u) == expected


class TestStageCost:
    def test_worked_example(self):
        # d = 0.8, p_t = 0.5, c_t = 0.4, dt = 0.5, penalty 2
        inst = make_instance(1, alpha=[0.0], beta=[0.8], prices=[0.4, 0.4])
        p = np.array([0.5])
        val = stage_cost((0.0, 0.0), 0.0, 0.0, p, 0, inst)
        assert val == pytest.approx(-0.16 + 0.12, abs=1e-15)

    def test_kink_point_has_no_penalty(self):
        inst = make_instance(1, alpha=[0.0], beta=[0.8], prices=[0.4, 0.4])
        val = stage_cost((0.0, 0.0), 0.0, 0.0, np.array([0.8]), 0, inst)
        assert val == pytest.approx(-0.16, abs=1e-15)

    def test_zero_penalty_removes_parameter(self):
        inst = make_instance(1, alpha=[0.0], beta=[0.8], prices=[0.4, 0.4],
                             penalty=0.0)
        v1 = stage_cost((0.0, 0.0), 0.1, 0.0, np.array([0.2]), 0, inst)
        v2 = stage_cost((0.0, 0.0), 0.1, 0.0, np.array([0.9]), 0, inst)
        assert v1 == v2

    def test_only_matching_coordinate_matters(self, tiny_instance):
        p = np.array([0.3, 0.4, 0.5, 0.6])
        base = stage_cost((0.2, 0.5), 0.1, 0.05, p, 1, tiny_instance)
        q = p.copy()
        q[[0, 2, 3]] += 0.17
        assert stage_cost((0.2, 0.5), 0.1, 0.05, q, 1, tiny_instance) == base

    @given(u1=st.floats(-1, 1), u2=st.floats(-1, 1),
           p1=st.floats(0, 1), p2=st.floats(0, 1))
    @settings(max_examples=200, deadline=None)
    def test_midpoint_convexity_in_control_and_parameter(self, u1, u2, p1, p2):
        inst = make_instance(1, alpha=[0.5], beta=[0.3], prices=[0.4, 0.4])
        x, w = (0.5, 0.4), 0.05

        def cost(u, pt):
            return stage_cost(x, u, w, np.array([pt]), 0, inst)

        mid = cost(0.5 * (u1 + u2), 0.5 * (p1 + p2))
        assert mid <= 0.5 * cost(u1, p1) + 0.5 * cost(u2, p2) + 1e-12


class TestFinalCost:
    def test_full_battery(self):
        inst = make_instance(1, prices=[0.4, 0.4])
        assert final_cost((1.0, 0.0), inst) == pytest.approx(-0.4)

    def test_empty_battery(self):
        inst = make_instance(1, prices=[0.4, 0.4])
        assert final_cost((0.0, 0.3), inst) == 0.0

    def test_linear_in_capacity(self):
        big = BatteryParams(capacity=2.0)
        inst1 = make_instance(1, prices=[0.4, 0.4])
        inst2 = make_instance(1, prices=[0.4, 0.4], battery=big)
        assert final_cost((0.7, 0.0), inst2) == 2 * final_cost((0.7, 0.0), inst1)


class TestValidation:
    def test_battery_invariants(self):
        with pytest.raises(ValueError):
            BatteryParams(capacity=0.0)
        with pytest.raises(ValueError):
            BatteryParams(u_min=0.5)
        with pytest.raises(ValueError):
            BatteryParams(rho_c=1.5)

    def test_tariff_invariants(self):
        with pytest.raises(ValueError):
            TariffSchedule(prices=np.array([0.4, -0.1]))
        with pytest.raises(ValueError):
            TariffSchedule(prices=np.array([0.4, 0.4]), penalty=-1.0)

    def test_peak_window_prices(self):
        tariff = TariffSchedule.flat_peak(48)
        assert tariff.prices[37] == 0.4
        assert np.all(tariff.prices[38:42] == 0.6)
        assert tariff.prices[42] == 0.4
        assert tariff.prices[48] == 0.4

    def test_profile_feasibility(self):
        prof = CommitmentProfile(values=np.array([0.2, 0.9]))
        assert prof.is_feasible(1.0)
        assert not prof.is_feasible(0.5)

    def test_instance_rejects_mismatched_horizon(self):
        with pytest.raises(ValueError):
            make_instance(2, alpha=[0.1], beta=[0.0])

    def test_parameter_box(self, tiny_instance):
        assert np.all(tiny_instance.param_lo == 0.0)
        assert np.all(tiny_instance.param_hi == tiny_instance.battery.q_max)
        assert tiny_instance.n_p == 4
