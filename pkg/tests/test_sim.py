import math

import numpy as np
import pytest

from vfalos.config import build_scenario, load_config
from vfalos.sim import (
    SIM_COLUMNS,
    SimLog,
    SimulationDiverged,
    lyapunov_value,
    plant_step,
    run_scenario,
    simulate_plant,
)
from vfalos.stability import NominalParams, run_nominal
from vfalos.vessel import (
    ThrustCommand,
    VesselParams,
    VesselState,
    dynamics_rates,
    kinematics_rates,
)


def test_zero_duration_logs_initial_row_only(straight_cfg):
    straight_cfg["sim"]["duration"] = 0.0
    log = run_scenario(build_scenario(straight_cfg))
    assert len(log) == 1
    assert log["t"][0] == 0.0
    assert log.names == SIM_COLUMNS


def test_row_count_and_uniform_time(straight_cfg):
    sc = build_scenario(straight_cfg)
    log = run_scenario(sc)
    assert len(log) == round(sc.sim.duration / sc.sim.dt) + 1
    assert np.allclose(np.diff(log["t"]), sc.sim.dt)
    assert np.all((log["yaw"] > -math.pi) & (log["yaw"] <= math.pi))


def test_on_path_equilibrium_stays_on_path(straight_cfg):
    straight_cfg["guidance"]["u_max"] = 0.5
    straight_cfg["sim"]["initial_state"]["surge_u"] = 1.0
    log = run_scenario(build_scenario(straight_cfg))
    assert np.max(np.abs(log["y_e"])) <= 1e-3


def test_determinism(straight_cfg):
    a = run_scenario(build_scenario(straight_cfg)).to_csv()
    b = run_scenario(build_scenario(straight_cfg)).to_csv()
    assert a == b


def test_csv_round_trip(tmp_path, straight_cfg):
    straight_cfg["sim"]["duration"] = 2.0
    log = run_scenario(build_scenario(straight_cfg))
    dest = tmp_path / "log.csv"
    log.to_csv(dest)
    back = SimLog.from_csv(dest)
    assert back.names == log.names
    for name in log.names:
        np.testing.assert_array_equal(back[name], log[name])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_is_reported(straight_cfg):
    straight_cfg["vessel"]["mass_matrix"] = [[1e-300, 0, 0], [0, 70, 0], [0, 0, 9]]
    straight_cfg["sim"]["initial_state"]["surge_u"] = 1e200
    with pytest.raises(SimulationDiverged) as info:
        run_scenario(build_scenario(straight_cfg))
    assert info.value.quantity in ("north", "east", "yaw", "surge_u", "sway_v", "yaw_rate_r")
    assert "t =" in str(info.value)


def test_plant_step_matches_hand_rk4():
    params = VesselParams()
    s = VesselState(north=1.0, east=-2.0, yaw=0.3, surge_u=1.2, sway_v=0.1, yaw_rate_r=0.05)
    th = ThrustCommand(20.0, 3.0)
    dt = 0.05

    def f(x):
        st = VesselState.from_array(x)
        return np.array([*kinematics_rates(st), *dynamics_rates(st, th, params)])

    x0 = s.as_array()
    k1 = f(x0)
    k2 = f(x0 + dt / 2 * k1)
    k3 = f(x0 + dt / 2 * k2)
    k4 = f(x0 + dt * k3)
    oracle = x0 + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    got = plant_step(s, th, params, dt).as_array()
    np.testing.assert_allclose(got, oracle, rtol=1e-12, atol=1e-12)


def _spiral(dt, duration=20.0):
    run = simulate_plant(
        VesselState(surge_u=1.0),
        lambda t: ThrustCommand(40.0, 2.0),
        VesselParams(),
        dt,
        duration,
    )
    return run.states[-1]


def test_rk4_fourth_order():
    ref = _spiral(0.1 / 64)
    e1 = np.linalg.norm(_spiral(0.1) - ref)
    e2 = np.linalg.norm(_spiral(0.05) - ref)
    assert 12.0 < e1 / e2 < 20.0


def test_lyapunov_value_examples():
    assert lyapunov_value(0.0, 0.0, 1.0, 0.05) == 0.0
    assert lyapunov_value(2.0, 0.0, 1.0, 0.05) == 2.0
    # (U / (2 gamma)) * beta_err^2 = 10 * 0.01
    assert lyapunov_value(0.0, 0.1, 1.0, 0.05) == pytest.approx(0.1, rel=1e-12)
    with pytest.raises(ValueError):
        lyapunov_value(1.0, 0.0, 0.0, 0.05)


def test_full_loop_follows_nominal_system_as_gains_grow():
    """Straight path, no current, stiff sway: the closed loop approaches the nominal model."""
    devs = []
    for scale in (0.5, 1.0, 2.0, 4.0):
        cfg = load_config(
            overrides=[
                "guidance.law=vfalos",
                "sim.duration=150",
                "sim.initial_state.east=1.0",
                "sim.initial_state.yaw=-0.16514867741462683",  # -atan(1/6)
                "sim.initial_state.surge_u=1.0",
                "vessel.linear_damping=[12, 400, 6]",
                "guidance.u_max=0.0001",
                "guidance.u_min=1.0",
                "disturbance.v_east=0.0",
                f"control.heading.kp={40 * scale}",
                f"control.heading.kd={25 * scale ** 0.5}",
                f"control.heading.output_limit={40 * scale}",
            ]
        )
        cfg["path"] = {"type": "waypoints", "waypoints": [[0, 0], [400, 0]]}
        sc = build_scenario(cfg)
        log = run_scenario(sc)
        p = NominalParams(speed=1.0, lookahead=sc.guidance.lookahead_delta, gain=sc.guidance.adaptation_gain_gamma)
        nom = run_nominal(p, 1.0, 150.0, sc.sim.dt)
        devs.append(float(np.max(np.abs(nom["y_e"] - log["y_e"]))))
    assert all(b < a for a, b in zip(devs, devs[1:])), devs
    assert devs[-1] < 0.1
