import dataclasses
import math

import numpy as np
import pytest

from decrn import (
    ConstantHistory,
    ExpressionHistory,
    IntegrationError,
    PreconditionError,
    SolverConfig,
    check_descent,
    compute_monitors,
    conservation_drift,
    equilibrium_in_class,
    integrate_dde,
    lyapunov_value,
    min_profile,
    parse_network,
    solve_complex_balanced,
)
from decrn.dynamics import DenseSolution


def test_config_validation():
    with pytest.raises(PreconditionError):
        SolverConfig(step=0.0, t_end=1.0)
    with pytest.raises(PreconditionError):
        SolverConfig(step=0.1, t_end=-1.0)
    with pytest.raises(PreconditionError):
        SolverConfig(step=0.1, t_end=1.0, monitor_stride=0)
    with pytest.raises(PreconditionError):
        SolverConfig(step=0.1, t_end=1.0, history_interp="linear")


def test_step_cap_enforced(ex1, ex1_history):
    with pytest.raises(PreconditionError, match="cap"):
        integrate_dde(ex1, ex1_history, SolverConfig(step=0.5, t_end=1.0))


def test_history_must_cover_delays(ex1):
    short = ConstantHistory([1.0, 2.0], tau_max=1.0)
    with pytest.raises(PreconditionError, match="covers"):
        integrate_dde(ex1, short, SolverConfig(step=0.005, t_end=1.0))


def test_equilibrium_history_stays_constant(ex1):
    point = solve_complex_balanced(ex1).point
    psi = ConstantHistory(point, tau_max=ex1.tau_max)
    traj = integrate_dde(ex1, psi, SolverConfig(step=0.01, t_end=50.0), equilibrium=point)
    assert np.abs(traj.states - point).max() <= 1e-12
    assert check_descent(traj).max_jump <= 1e-12


def test_zero_delay_matches_plain_rk4(ex1):
    net = ex1.with_delays([0.0, 0.0, 0.0])
    x0 = np.array([1.0, 2.0])
    psi = ConstantHistory(x0, tau_max=0.0)
    h, t_end = 0.01, 10.0
    traj = integrate_dde(net, psi, SolverConfig(step=h, t_end=t_end))

    # independent plain RK4 oracle on the mass-action ODE
    src = net.source_matrix
    tgt = net.target_matrix
    k = net.rate_constants

    def f(x):
        rates = k * np.prod(x[None, :] ** src, axis=1)
        return tgt.T @ rates - src.T @ rates

    x = x0.copy()
    for _ in range(int(round(t_end / h))):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    assert np.abs(traj.final_state - x).max() <= 1e-12


def test_dense_output_matches_knots(ex1, ex1_history):
    traj = integrate_dde(ex1, ex1_history, SolverConfig(step=0.005, t_end=2.0))
    sample = traj.times[::40]
    assert np.abs(traj.dense(sample) - traj.states[::40]).max() == 0.0
    # негative times delegate to the history
    assert traj.dense(-1.5) == pytest.approx(ex1_history(-1.5))


def test_convergence_to_equilibrium_example1(ex1, ex1_history):
    point = solve_complex_balanced(ex1).point
    traj = integrate_dde(ex1, ex1_history, SolverConfig(step=0.005, t_end=60.0),
                         equilibrium=point)
    assert np.abs(traj.final_state - point).max() <= 1e-3
    assert check_descent(traj).passed
    assert min_profile(traj, 10.0).min() >= 0.3
    assert conservation_drift(traj).size == 0  # full-dimensional network


def test_conservation_drift_example2(ex2, ex2_history):
    target = equilibrium_in_class(ex2, ex2_history).point
    traj = integrate_dde(ex2, ex2_history, SolverConfig(step=0.005, t_end=20.0),
                         equilibrium=target)
    drift = conservation_drift(traj)
    assert drift.shape == (1,)
    assert drift[0] <= 1e-6
    assert traj.conserved[0, 0] == pytest.approx(98.0, abs=1e-9)
    assert check_descent(traj).passed
    assert min_profile(traj, 10.0).min() > 0.0


def test_undelayed_conservation_example2(ex2):
    flat = ex2.with_delays([0.0] * 4)
    psi = ConstantHistory([2.0, 3.0, 1.0], tau_max=0.0)
    traj = integrate_dde(flat, psi, SolverConfig(step=0.005, t_end=10.0))
    assert conservation_drift(traj)[0] <= 1e-8
    assert traj.conserved[0, 0] == pytest.approx(6.0, abs=1e-12)


def test_lyapunov_constant_window_oracle(ex1):
    # constant windows make every integrand constant: closed-form value
    xbar = solve_complex_balanced(ex1).point
    c = np.array([1.0, 2.0])
    psi = ConstantHistory(c, tau_max=ex1.tau_max)
    expected = 0.0
    for j in range(2):
        expected += c[j] * (math.log(c[j]) - math.log(xbar[j]) - 1.0) + xbar[j]
    for rxn in ex1.reactions:
        mono = float(np.prod(c ** rxn.source.vector(2)))
        ref = float(np.prod(xbar ** rxn.source.vector(2)))
        expected += rxn.rate_constant * rxn.delay * (
            mono * (math.log(mono) - math.log(ref) - 1.0) + ref
        )
    value = lyapunov_value(ex1, psi, xbar)
    assert value == pytest.approx(expected, abs=1e-9)
    assert value > 0.0
    # at the equilibrium itself the functional vanishes
    at_eq = lyapunov_value(ex1, ConstantHistory(xbar, tau_max=ex1.tau_max), xbar)
    assert abs(at_eq) <= 1e-12


def test_lyapunov_nonnegative_random_windows(ex1):
    xbar = solve_complex_balanced(ex1).point
    rng = np.random.default_rng(12)
    for _ in range(10):
        c = rng.uniform(0.2, 3.0, size=2)
        psi = ConstantHistory(c, tau_max=ex1.tau_max)
        assert lyapunov_value(ex1, psi, xbar) >= 0.0


def test_lyapunov_domain_errors(ex1):
    xbar = solve_complex_balanced(ex1).point
    with pytest.raises(PreconditionError, match="positive"):
        lyapunov_value(ex1, ConstantHistory([1.0, 2.0], tau_max=ex1.tau_max), [1.0, 0.0])


def test_descent_negative_control(ex1, ex1_history):
    point = solve_complex_balanced(ex1).point
    traj = integrate_dde(ex1, ex1_history, SolverConfig(step=0.005, t_end=20.0),
                         equilibrium=point)
    assert check_descent(traj).passed
    # bump the state mid-run: the entropy monitor must catch the jump
    states = traj.states.copy()
    half = len(states) // 2
    states[half:] *= 1.5
    derivs = traj.derivs.copy()
    dense = DenseSolution(traj.dense.history, traj.dense.h, states, derivs,
                          traj.dense.tau_max, traj.dense.n_steps)
    tampered = dataclasses.replace(traj, states=states, derivs=derivs, dense=dense,
                                   lyapunov=None, conserved=None)
    tampered = compute_monitors(tampered, ex1, equilibrium=point)
    assert not check_descent(tampered).passed


def test_min_profile_validation(ex1, ex1_history):
    traj = integrate_dde(ex1, ex1_history, SolverConfig(step=0.01, t_end=1.0))
    with pytest.raises(PreconditionError):
        min_profile(traj, 2.0)
    assert min_profile(traj, 0.0).shape == (2,)


def test_integration_failure_is_reported():
    net = parse_network("2 A -> 3 A ; k=5 ; tau=1")  # explosive autocatalysis
    psi = ConstantHistory([5.0], tau_max=1.0)
    with pytest.raises(IntegrationError):
        integrate_dde(net, psi, SolverConfig(step=0.01, t_end=20.0))


def test_step_halving_shows_fourth_order(ex2, ex2_history):
    finals = []
    for h in (0.01, 0.005, 0.0025):
        traj = integrate_dde(ex2, ex2_history, SolverConfig(step=h, t_end=5.0,
                                                            monitor_stride=10 ** 6))
        finals.append(traj.final_state)
    change_coarse = np.abs(finals[1] - finals[0]).max()
    change_fine = np.abs(finals[2] - finals[1]).max()
    # classical fourth order: each halving shrinks the change ~16x; allow 8x
    assert change_fine <= change_coarse / 8.0


def test_monitor_grid_includes_endpoint(ex1, ex1_history):
    traj = integrate_dde(ex1, ex1_history, SolverConfig(step=0.005, t_end=1.0,
                                                        monitor_stride=30))
    assert traj.monitor_times[0] == 0.0
    assert traj.monitor_times[-1] == traj.times[-1]
