import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from cstnet.dynamics import (
    DynamicsError,
    StiffnessError,
    jacobian,
    mass_action_rates,
    reduced_jacobian,
    residual,
    simulate,
    steady_state_label,
    vector_field,
)
from cstnet.cst import cst_network
from cstnet.linalg import ExactMatrix, det
from cstnet.network import conservation_laws
from cstnet.parser import load_network, parse_network

from conftest import DATA

EX3 = parse_network("2 X1 + X2 -> 3 X1\nX1 -> X2")
K = (1, 1)


def test_rates_examples():
    assert mass_action_rates(EX3, K, (1, 1)) == (1, 1)
    assert mass_action_rates(EX3, K, (2, Fraction(1, 2))) == (2, 2)
    net = parse_network("0 -> X; k=5\nX -> 0; k=1")
    assert mass_action_rates(net, None, (7,))[0] == 5


def test_rates_exact_vs_float():
    exact = mass_action_rates(EX3, K, ("1/3", 2))
    assert all(isinstance(v, Fraction) for v in exact)
    approx = mass_action_rates(EX3, K, (1 / 3, 2.0))
    assert all(isinstance(v, float) for v in approx)
    assert np.allclose([float(v) for v in exact], approx)


def test_dimension_errors():
    with pytest.raises(DynamicsError):
        mass_action_rates(EX3, (1,), (1, 1))
    with pytest.raises(DynamicsError):
        mass_action_rates(EX3, K, (1, 1, 1))
    with pytest.raises(DynamicsError):
        mass_action_rates(EX3, (1, 0), (1, 1))
    with pytest.raises(DynamicsError):
        jacobian(EX3, K, (0, 1))


def test_jacobian_examples():
    assert jacobian(EX3, K, (1, 1)) == ExactMatrix([[1, 1], [-1, -1]])
    assert jacobian(parse_network("X1 -> X2"), (1,), (1, 1)) == ExactMatrix([[-1, 0], [1, 0]])


def test_jacobian_ignores_inflows():
    net = parse_network("2 X1 + X2 -> 3 X1\nX1 -> X2\n0 -> X1")
    assert jacobian(net, (1, 1, 7), (1, 1)) == jacobian(EX3, K, (1, 1))


def test_reduced_jacobian_examples():
    assert reduced_jacobian(EX3, K, (1, 1)) == 0
    assert reduced_jacobian(EX3, K, (2, Fraction(1, 2))) == -3
    net = cst_network("SST", (1, 1, 1), (2, 1, 1), inflows="all", outflows="all")
    x = (Fraction(1, 2), 2, 3)
    k = [1] * net.n_reactions
    assert reduced_jacobian(net, k, x) == det(jacobian(net, k, x))


def test_residual_examples():
    assert residual(EX3, K, (2, Fraction(1, 2))) == (0, 0)
    assert residual(EX3, K, (1, 2)) == (1, -1)


def test_steady_state_labels():
    assert steady_state_label(EX3, K, (1, 1)) == "degenerate"
    assert steady_state_label(EX3, K, (2, Fraction(1, 2))) == "stable"
    assert steady_state_label(EX3, K, (Fraction(1, 2), 2)) == "unstable"
    with pytest.raises(DynamicsError):
        steady_state_label(EX3, K, (1, 2))


def _finite_difference(f, x, h=1e-6):
    n = x.size
    J = np.empty((n, n))
    for c in range(n):
        step = h * max(1.0, abs(x[c]))
        e = np.zeros(n)
        e[c] = step
        J[:, c] = (f(x + e) - f(x - e)) / (2 * step)
    return J


@pytest.mark.parametrize("name", ["basic/ex3.crn", "basic/net1.crn", "basic/transmutation.crn", "vegfr/net2.crn"])
def test_jacobian_matches_finite_differences(name):
    net = load_network(DATA / name)
    rng = np.random.default_rng(3)
    k = rng.uniform(0.5, 2.0, net.n_reactions)
    f = vector_field(net, k)
    for _ in range(20):
        x = rng.uniform(0.2, 3.0, net.n_species)
        J = jacobian(net, list(k), list(x))
        fd = _finite_difference(f, x)
        assert np.linalg.norm(J - fd) <= 1e-6 * max(1.0, np.linalg.norm(J))


def test_simulation_against_scipy():
    net = load_network(DATA / "basic" / "net1.crn")
    k = [1.0] * net.n_reactions
    x0 = [0.5, 1.0, 2.0]
    traj = simulate(net, k, x0, 5.0, rel_tol=1e-8)
    f = vector_field(net, k)
    ref = solve_ivp(lambda t, y: f(y), (0, 5.0), x0, method="LSODA", rtol=1e-10, atol=1e-12)
    assert np.allclose(traj.final, ref.y[:, -1], rtol=1e-6, atol=1e-8)


def test_ex3_converges_to_stable_root():
    traj = simulate(EX3, K, (3, 0.5), 50.0)
    root = (3.5 + np.sqrt(3.5**2 - 4)) / 2
    assert np.allclose(traj.final, (root, 3.5 - root), atol=1e-3)
    assert max(traj.conservation_drift) <= 10 * traj.rel_tol


def test_ex3_decays_toward_boundary():
    traj = simulate(EX3, K, (0.2, 3.3), 5.0)
    assert np.all(np.diff(traj.states[:, 0]) < 0)
    assert np.all(traj.states >= 0)


def test_steady_state_stays_put():
    traj = simulate(EX3, K, (2, 0.5), 10.0, rel_tol=1e-6)
    assert np.allclose(traj.states, [2, 0.5], rtol=1e-6)


@pytest.mark.parametrize("tol", [1e-3, 1e-6, 1e-9])
def test_conservation_drift_bound(tol):
    net = cst_network("SST", (1, 1, 1), (2, 1, 1))
    laws = conservation_laws(net)
    traj = simulate(net, [1, 2, 1], [1.0, 2.0, 0.5], 3.0, rel_tol=tol)
    assert len(traj.conservation_drift) == len(laws)
    assert max(traj.conservation_drift, default=0) <= 10 * tol


def test_clipping_keeps_states_nonnegative():
    net = parse_network("X -> 0; k=50")
    traj = simulate(net, None, [1.0], 10.0, rel_tol=1e-2)
    assert np.all(traj.states >= 0)


def test_simulate_input_guards():
    with pytest.raises(DynamicsError):
        simulate(EX3, K, (-1, 1), 1.0)
    with pytest.raises(DynamicsError):
        simulate(EX3, K, (1, 1), 1.0, rel_tol=0.5)
    with pytest.raises(DynamicsError):
        simulate(EX3, K, (1, 1), 0.0)


def test_blow_up_reported_as_stiffness():
    # x' = x^2 explodes at t = 1
    net = parse_network("2 X -> 3 X")
    with pytest.raises(StiffnessError):
        simulate(net, [1], [1.0], 2.0)


def test_csv_export():
    traj = simulate(EX3, K, (3, 0.5), 1.0)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,X1,X2"
    assert len(lines) == len(traj.times) + 1
    assert float(lines[-1].split(",")[0]) == pytest.approx(1.0)
