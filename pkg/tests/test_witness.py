import itertools
from dataclasses import replace
from fractions import Fraction

import pytest
import sympy

from cstnet.cst import cst_network, recognize_cst
from cstnet.dynamics import residual
from cstnet.injectivity import craciun_certificate_check
from cstnet.linalg import det
from cstnet.parser import load_network
from cstnet.witness import (
    WitnessError,
    construct_sequestration_certificate,
    construct_transmutation_witness,
    exact_root,
    limit_value,
    nondegeneracy_factor,
    verify_certificate,
    verify_two_state_witness,
)

from conftest import DATA


def structure(kinds, a, b, **flows):
    flows = flows or {"inflows": "all", "outflows": "all"}
    return recognize_cst(cst_network(kinds, a, b, **flows))


def test_exact_root():
    assert exact_root(Fraction(27, 8), 3) == Fraction(3, 2)
    assert exact_root(Fraction(2), 2) is None
    assert exact_root(Fraction(10**40), 4) == 10**10
    assert exact_root(Fraction(0), 2) is None


def test_transmutation_witness_example():
    w = construct_transmutation_witness(structure("TT", (2, 1), (1, 3)))
    assert w.k == (1, 1)
    assert (w.outflow_rate, w.inflow_rate) == (3, 2)
    assert w.state_a == (1, 3) and w.state_b == (2, 12)
    assert w.exact
    rep = verify_two_state_witness(w)
    assert rep.ok, rep.failures
    assert rep.residual_a == (0, 0) and rep.residual_b == (0, 0)
    assert (rep.factor_a, rep.factor_b) == (1, -5)


def test_witness_residual_matches_sympy():
    w = construct_transmutation_witness(structure("TT", (2, 1), (1, 3)))
    x1, x2 = sympy.symbols("x1 x2")
    # dx1 = -2 x1^2 + x2 - 3 x1 + 2, dx2 = 3 x1^2 - x2
    f = [-2 * x1**2 + x2 - 3 * x1 + 2, 3 * x1**2 - x2]
    for state in (w.state_a, w.state_b):
        assert [e.subs({x1: state[0], x2: state[1]}) for e in f] == [0, 0]
    sols = sympy.solve(f, [x1, x2], dict=True)
    positive = {(s[x1], s[x2]) for s in sols if s[x1] > 0 and s[x2] > 0}
    assert positive == {(1, 3), (2, 12)}


def test_perturbed_state_fails_residual():
    w = construct_transmutation_witness(structure("TT", (2, 1), (1, 3)))
    bad = replace(w, state_b=(Fraction(2), Fraction(11)))
    rep = verify_two_state_witness(bad)
    assert not rep.ok
    assert any("residual at state b" in f for f in rep.failures)
    assert rep.residual_b != (0, 0)


def test_vanishing_nondegeneracy_detected():
    w = construct_transmutation_witness(structure("TT", (2, 1), (1, 3)))
    a1 = w.structure.a[0]
    v1 = w.k[0] * w.state_a[0] ** a1
    bad = replace(w, outflow_rate=a1 * v1 / w.k[0])
    assert nondegeneracy_factor(bad, bad.state_a) == 0
    rep = verify_two_state_witness(bad)
    assert any("state a is degenerate" in f for f in rep.failures)


@pytest.mark.parametrize(
    "kinds,a,b,err",
    [
        ("ST", (2, 1), (1, 3), "s = 0"),
        ("TT", (1, 1), (1, 3), "a_i > 1"),
        ("TT", (2, 2), (1, 3), "prod(a) < prod(b)"),
    ],
)
def test_witness_preconditions(kinds, a, b, err):
    with pytest.raises(WitnessError, match=err.replace("(", r"\(").replace(")", r"\)")):
        construct_transmutation_witness(structure(kinds, a, b))


def test_witness_rotates_to_nonlinear_reactant():
    w = construct_transmutation_witness(structure("TTT", (1, 1, 3), (2, 2, 1)))
    assert w.structure.a[0] == 3
    assert verify_two_state_witness(w).ok


def test_numeric_witness_reports_bound():
    # a_2 = 2 with an irrational chain value
    st_ = structure("TT", (2, 2), (3, 3))
    w = construct_transmutation_witness(st_)
    rep = verify_two_state_witness(w)
    assert rep.ok, rep.failures
    assert not w.exact
    assert max(abs(v) for v in rep.residual_a + rep.residual_b) <= Fraction(1, 10**30)


def test_net1_certificate():
    st_ = recognize_cst(load_network(DATA / "basic" / "net1.crn"))
    cert = construct_sequestration_certificate(st_)
    assert cert.d == (1, 2, 2)
    assert cert.epsilon == Fraction(1, 8) and cert.halvings == 3
    assert cert.det_value == Fraction(823, 512)
    assert -cert.det_value < 0
    assert all(v <= 0 for v in cert.row_sums)
    assert verify_certificate(cert)
    assert craciun_certificate_check(cert.network, cert.diagonal)
    assert limit_value(st_) == -4


def test_net1_epsilon_threshold_matches_sympy():
    # (-1)^3 det(G D G_l^T) as a polynomial in epsilon; certificate holds below its root
    st_ = recognize_cst(load_network(DATA / "basic" / "net1.crn"))
    cert = construct_sequestration_certificate(st_)
    e = sympy.Symbol("e", positive=True)
    from cstnet.injectivity import jacobian_criterion_matrices

    G, L, keep = jacobian_criterion_matrices(cert.network)
    diag = [sympy.Rational(d) if not cert.network.reactions[j].is_outflow() else e
            for d, j in zip(cert.diagonal, keep)]
    M = sympy.Matrix(G.tolist()) * sympy.diag(*diag) * sympy.Matrix(L.tolist()).T
    signed = sympy.expand(-M.det())
    root = [r for r in sympy.Poly(signed, e).nroots() if r.is_real and r > 0]
    assert len(root) == 1
    assert cert.epsilon < root[0] < 2 * cert.epsilon


@pytest.mark.parametrize(
    "kinds,a,b,err",
    [
        ("SSS", (1, 1, 1), (2, 1, 1), "even"),
        ("SST", (2, 1, 1), (1, 1, 1), "prod"),
        ("TTT", (1, 1, 1), (2, 1, 1), "even"),
    ],
)
def test_certificate_preconditions(kinds, a, b, err):
    with pytest.raises(WitnessError, match=err):
        construct_sequestration_certificate(structure(kinds, a, b))


def test_certificate_needs_fully_open():
    st_ = structure("SST", (1, 1, 1), (2, 1, 1), outflows="all")
    with pytest.raises(WitnessError):
        construct_sequestration_certificate(st_)


def test_certificate_rotation_puts_sequestration_last():
    st_ = structure("STST", (1, 1, 1, 1), (1, 2, 1, 1))
    cert = construct_sequestration_certificate(st_)
    assert cert.structure.kinds[-1].value == "S"
    assert verify_certificate(cert)
