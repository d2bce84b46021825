"""Checkable evidence of multistationarity for non-injective fully open CSTs.

Two kinds of evidence are produced:

* for transmutation-only cycles with a nonlinear reactant, an explicit pair of
  nondegenerate steady states of the cycle with in- and outflow of one species
  (:class:`TwoStateWitness`);
* for cycles containing sequestrations, a positive diagonal scaling meeting the
  determinant/row-sum sufficient condition (:class:`DeterminantCertificate`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .cst import S, CstStructure, cst_network, cst_reactions
from .injectivity import evaluate_craciun_certificate
from .network import OpennessTag, ReactionNetwork, inflow, outflow, same_compatibility_class
from . import dynamics

NUMERIC_RESIDUAL_BOUND = Fraction(1, 10**30)
_DIGITS = 60


class WitnessError(ValueError):
    pass


def exact_root(value: Fraction, n: int) -> Fraction | None:
    """The positive rational ``n``-th root of ``value`` if there is one."""
    value = Fraction(value)
    if value <= 0:
        return None
    p = _int_root(value.numerator, n)
    q = _int_root(value.denominator, n)
    if p is None or q is None:
        return None
    return Fraction(p, q)


def _int_root(x: int, n: int) -> int | None:
    if n == 1:
        return x
    r = round(x ** (1.0 / n)) if x < 2**1000 else 1 << (x.bit_length() // n)
    # polish against float error
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**n == x:
            return cand
    lo, hi = 0, 1 << (x.bit_length() // n + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**n < x:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**n == x else None


def _mp_to_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * (Fraction(2) ** int(exp))


def _numeric_root(value: Fraction, n: int) -> Fraction:
    with mpmath.workdps(_DIGITS):
        root = mpmath.root(mpmath.mpf(value.numerator) / value.denominator, n)
        return _mp_to_fraction(root)


@dataclass(frozen=True)
class TwoStateWitness:
    structure: CstStructure
    network: ReactionNetwork
    k: tuple[Fraction, ...]
    outflow_rate: Fraction
    inflow_rate: Fraction
    state_a: tuple[Fraction, ...]
    state_b: tuple[Fraction, ...]
    exact: bool = True

    @property
    def rates(self) -> tuple[Fraction, ...]:
        return tuple(self.k) + (self.outflow_rate, self.inflow_rate)


def witness_network(st: CstStructure, k, l1, f1) -> ReactionNetwork:
    reactions = [r.with_rate(rate) for r, rate in zip(cst_reactions(st.species, st.kinds, st.a, st.b), k)]
    x1 = st.species[0]
    return ReactionNetwork(reactions + [outflow(x1, l1), inflow(x1, f1)])


def construct_transmutation_witness(st: CstStructure) -> TwoStateWitness:
    """Two positive steady states at ``x_1 = 1`` and ``x_1 = 2``.

    The cycle is rotated to start at the first species with reactant
    coefficient above one. Rates ``k_2..k_n`` are 1; ``k_1``, the outflow and
    inflow rates make ``x_1 = 1, 2`` the roots of the one-variable steady-state
    polynomial.
    """
    if st.s != 0:
        raise WitnessError("explicit two-state witness needs a transmutation-only cycle (s = 0)")
    if max(st.a) < 2:
        raise WitnessError("explicit two-state witness needs some reactant coefficient a_i > 1")
    if st.prod_a >= st.prod_b:
        raise WitnessError("explicit two-state witness needs prod(a) < prod(b)")
    st = st.rotated(next(i for i, x in enumerate(st.a) if x > 1))
    a, b, n = st.a, st.b, st.n
    k1 = Fraction(1, a[0]) / (Fraction(st.prod_b, st.prod_a) - 1)
    k = (k1,) + (Fraction(1),) * (n - 1)
    l1 = Fraction(2 ** a[0] - 1)
    f1 = Fraction(2 ** a[0] - 2)
    exact = True
    states = []
    for x1 in (Fraction(1), Fraction(2)):
        power = x1 ** a[0]
        x = [x1]
        for i in range(1, n):
            power = k[i - 1] * b[i] / (k[i] * a[i]) * power
            root = exact_root(power, a[i])
            if root is None:
                exact = False
                root = _numeric_root(power, a[i])
            x.append(root)
            # continue the chain from the stored coordinate so residuals stay small
            power = root ** a[i]
        states.append(tuple(x))
    net = witness_network(st, k, l1, f1)
    return TwoStateWitness(st, net, k, l1, f1, states[0], states[1], exact)


def nondegeneracy_factor(w: TwoStateWitness, x) -> Fraction:
    """``-a_1 v_1(x) / k_1 + l_1``: the sign-carrying factor of the Jacobian determinant."""
    v1 = w.k[0] * x[0] ** w.structure.a[0]
    return -w.structure.a[0] * v1 / w.k[0] + w.outflow_rate


def nondegeneracy_quantity(w: TwoStateWitness, x) -> Fraction:
    a = w.structure.a
    v = dynamics.mass_action_rates(w.network, w.rates, x)
    return math.prod(Fraction(ai) ** 2 for ai in a[1:]) * math.prod(v[1 : w.structure.n]) * nondegeneracy_factor(w, x)


@dataclass
class WitnessReport:
    ok: bool
    exact: bool
    residual_a: tuple
    residual_b: tuple
    factor_a: Fraction
    factor_b: Fraction
    quantity_a: Fraction
    quantity_b: Fraction
    jacobian_det_a: Fraction
    jacobian_det_b: Fraction
    same_class: bool
    failures: list[str] = field(default_factory=list)


def verify_two_state_witness(w: TwoStateWitness) -> WitnessReport:
    failures = []
    net = w.network
    if any(r.rate is None for r in net.reactions):
        failures.append("witness network has reactions without rates")
    rates = net.rates()
    for label, x in (("a", w.state_a), ("b", w.state_b)):
        if len(x) != net.n_species or any(v <= 0 for v in x):
            failures.append(f"state {label} is not a strictly positive vector of length {net.n_species}")
    if failures:
        raise WitnessError("; ".join(failures))
    if w.state_a == w.state_b:
        failures.append("the two states coincide")
    res_a = dynamics.residual(net, rates, w.state_a)
    res_b = dynamics.residual(net, rates, w.state_b)
    for label, res in (("a", res_a), ("b", res_b)):
        size = max(abs(v) for v in res)
        if w.exact and size != 0:
            failures.append(f"residual at state {label} is {tuple(str(v) for v in res)}, not zero")
        elif not w.exact and size > NUMERIC_RESIDUAL_BOUND:
            failures.append(f"residual at state {label} exceeds {NUMERIC_RESIDUAL_BOUND}: max {float(size):.3e}")
    fa, fb = nondegeneracy_factor(w, w.state_a), nondegeneracy_factor(w, w.state_b)
    qa, qb = nondegeneracy_quantity(w, w.state_a), nondegeneracy_quantity(w, w.state_b)
    for label, q in (("a", qa), ("b", qb)):
        if q == 0:
            failures.append(f"state {label} is degenerate (nondegeneracy quantity vanishes)")
    ja = dynamics.reduced_jacobian(net, rates, w.state_a)
    jb = dynamics.reduced_jacobian(net, rates, w.state_b)
    same = same_compatibility_class(net, w.state_a, w.state_b)
    if not same:
        failures.append("states lie in different compatibility classes")
    return WitnessReport(not failures, w.exact, res_a, res_b, fa, fb, qa, qb, ja, jb, same, failures)


@dataclass(frozen=True)
class DeterminantCertificate:
    structure: CstStructure
    network: ReactionNetwork
    d: tuple[Fraction, ...]
    epsilon: Fraction
    diagonal: tuple[Fraction, ...]
    det_value: Fraction
    row_sums: tuple[Fraction, ...]
    halvings: int


def _last_sequestration_rotation(st: CstStructure) -> CstStructure:
    last = max(i for i, kind in enumerate(st.kinds) if kind is S)
    return st.rotated(last + 1)


def certificate_diagonal(st: CstStructure, net: ReactionNetwork, d, epsilon) -> tuple[Fraction, ...]:
    """Diagonal of D in ``net``'s reaction order (inflows omitted)."""
    position = dict(zip(st.reaction_index, range(st.n)))
    out = []
    for j, r in enumerate(net.reactions):
        if r.is_inflow():
            continue
        if j in position:
            out.append(d[position[j]])
        elif r.is_outflow():
            out.append(epsilon)
        else:
            raise WitnessError(f"reaction {r} is neither a cycle reaction nor a flow")
    return tuple(out)


def construct_sequestration_certificate(st: CstStructure, max_halvings: int = 200) -> DeterminantCertificate:
    """Scale the cycle by ``d_i = (b_1..b_i)/(a_1..a_i)`` and outflows by a small epsilon.

    The cycle is rotated so its last reaction is a sequestration; epsilon
    starts at 1 and is halved until both inequalities hold.
    """
    if st.s == 0 or st.s % 2:
        raise WitnessError("determinant certificate needs an even, positive number of sequestrations")
    if st.s >= st.n:
        raise WitnessError("determinant certificate needs at least one transmutation (s < n)")
    if st.prod_a >= st.prod_b:
        raise WitnessError("determinant certificate needs prod(a) < prod(b)")
    if st.openness.tag is not OpennessTag.FULLY_OPEN:
        raise WitnessError("determinant certificate needs a fully open network")
    st = _last_sequestration_rotation(st)
    net = st.network
    if net is None or not st.reaction_index:
        net = cst_network(st.kinds, st.a, st.b, inflows="all", outflows="all", species=st.species)
        st = CstStructure(st.species, st.kinds, st.a, st.b, st.openness, net, tuple(range(st.n)))
    d = []
    acc = Fraction(1)
    for i in range(st.n):
        acc = acc * st.b[i] / st.a[i]
        d.append(acc)
    d = tuple(d)
    epsilon = Fraction(1)
    for halvings in range(max_halvings + 1):
        diagonal = certificate_diagonal(st, net, d, epsilon)
        check = evaluate_craciun_certificate(net, diagonal)
        if check.passed:
            return DeterminantCertificate(st, net, d, epsilon, diagonal, check.determinant, check.row_sums, halvings)
        epsilon /= 2
    raise WitnessError(f"no epsilon found within {max_halvings} halvings")


def limit_value(st: CstStructure) -> Fraction:
    """``(prod a - prod b) det(D_1) det(Gamma_l)``, the small-epsilon limit of the signed determinant."""
    st = _last_sequestration_rotation(st)
    d = Fraction(1)
    acc = Fraction(1)
    for i in range(st.n):
        acc = acc * st.b[i] / st.a[i]
        d *= acc
    # det Gamma_l of a cycle with a transmutation is the product of its diagonal
    return (st.prod_a - st.prod_b) * d * st.prod_a


def verify_certificate(cert: DeterminantCertificate) -> bool:
    return evaluate_craciun_certificate(cert.network, cert.diagonal).passed


__all__ = [
    "DeterminantCertificate",
    "TwoStateWitness",
    "WitnessError",
    "WitnessReport",
    "construct_sequestration_certificate",
    "construct_transmutation_witness",
    "exact_root",
    "limit_value",
    "nondegeneracy_factor",
    "nondegeneracy_quantity",
    "verify_certificate",
    "verify_two_state_witness",
]
