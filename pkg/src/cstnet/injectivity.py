"""Injectivity of reaction networks from signed products of minors.

A network is injective when every product ``Gamma[a|b] * A[a|b]`` over
``r x r`` minors (``r = rank Gamma``) that is nonzero has one common sign, and
at least one is nonzero. Under mass action ``A`` is the source matrix; under
general kinetics ``A`` ranges over all matrices sharing its sign pattern.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .linalg import (
    ExactMatrix,
    SignPattern,
    batched_minors,
    det,
    minor_sign_set,
    rank,
    sign,
    subsets,
)
from .network import OpennessTag, ReactionNetwork, build_matrices, classify_openness


class Kinetics(enum.Enum):
    MASS_ACTION = "mass-action"
    GENERAL = "general"


@dataclass(frozen=True)
class Evidence:
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    sign: int


@dataclass(frozen=True)
class InjectivityVerdict:
    kinetics: Kinetics
    injective: bool
    exact: bool
    rank: int
    evidence: tuple[Evidence, ...] = ()
    conflict: tuple[Evidence, Evidence] | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.injective


def _support(gamma_l: ExactMatrix) -> tuple[list[int], list[int]]:
    rows = [i for i in range(gamma_l.rows) if any(gamma_l.row(i))]
    cols = [j for j in range(gamma_l.cols) if any(gamma_l.column(j))]
    return rows, cols


def _verdict(kinetics, r, evidence, conflict, exact=True) -> InjectivityVerdict:
    if conflict is not None:
        return InjectivityVerdict(kinetics, False, exact, r, tuple(evidence), conflict, "minor products of opposite sign")
    if not evidence:
        return InjectivityVerdict(kinetics, False, exact, r, (), None, "rank-deficient evidence")
    return InjectivityVerdict(kinetics, True, exact, r, tuple(evidence), None, "all nonzero minor products agree")


def injective_mass_action(net: ReactionNetwork, *, stop_early: bool = True) -> InjectivityVerdict:
    """Decide injectivity under mass-action kinetics.

    Every reaction is included. With ``stop_early`` the scan ends at the first
    pair of conflicting products.
    """
    gamma, gamma_l = net.matrices()
    return injectivity_from_matrices(gamma, gamma_l, stop_early=stop_early)


def injectivity_from_matrices(
    gamma: ExactMatrix, gamma_l: ExactMatrix, *, stop_early: bool = True
) -> InjectivityVerdict:
    r = rank(gamma)
    rows, cols = _support(gamma_l)
    if r == 0:
        ev = Evidence((), (), 1)
        return _verdict(Kinetics.MASS_ACTION, 0, [ev], None)
    row_sets = subsets(len(rows), r)
    col_sets = subsets(len(cols), r)
    row_sets = [tuple(rows[i] for i in s) for s in row_sets]
    col_sets = [tuple(cols[j] for j in s) for s in col_sets]
    evidence: list[Evidence] = []
    first: Evidence | None = None
    # products vanish off the support of the source matrix
    lmin = batched_minors(gamma_l, row_sets, col_sets)
    gmin = batched_minors(gamma, row_sets, col_sets)
    for a, alpha in enumerate(row_sets):
        la, ga = lmin[a], gmin[a]
        for b, beta in enumerate(col_sets):
            p = la[b] * ga[b]
            if not p:
                continue
            ev = Evidence(alpha, beta, sign(p))
            evidence.append(ev)
            if first is None:
                first = ev
            elif ev.sign != first.sign:
                if stop_early:
                    return _verdict(Kinetics.MASS_ACTION, r, evidence, (first, ev))
                return _finish_scan(r, evidence, (first, ev), lmin, gmin, row_sets, col_sets, a, b)
    return _verdict(Kinetics.MASS_ACTION, r, evidence, None)


def _finish_scan(r, evidence, conflict, lmin, gmin, row_sets, col_sets, a0, b0):
    for a in range(a0, len(row_sets)):
        for b in range(b0 + 1 if a == a0 else 0, len(col_sets)):
            p = lmin[a][b] * gmin[a][b]
            if p:
                evidence.append(Evidence(row_sets[a], col_sets[b], sign(p)))
    return _verdict(Kinetics.MASS_ACTION, r, evidence, conflict)


def injective_general(net: ReactionNetwork) -> InjectivityVerdict:
    """Decide injectivity under general kinetics by term-sign analysis.

    Each minor of the source pattern is expanded over permutations; its
    achievable signs are the signs of its terms. ``exact`` is False when some
    minor paired with a nonzero stoichiometric minor takes several signs.
    """
    gamma, gamma_l = net.matrices()
    pattern = SignPattern.of(gamma_l)
    r = rank(gamma)
    if r == 0:
        return _verdict(Kinetics.GENERAL, 0, [Evidence((), (), 1)], None)
    rows, cols = _support(gamma_l)
    row_sets = [tuple(rows[i] for i in s) for s in subsets(len(rows), r)]
    col_sets = [tuple(cols[j] for j in s) for s in subsets(len(cols), r)]
    gmin = batched_minors(gamma, row_sets, col_sets)
    evidence: list[Evidence] = []
    signs_seen: dict[int, Evidence] = {}
    exact = True
    conflict = None
    for a, alpha in enumerate(row_sets):
        for b, beta in enumerate(col_sets):
            g = sign(gmin[a][b])
            if not g:
                continue
            achievable = minor_sign_set(pattern, alpha, beta)
            if achievable == {0}:
                continue
            if len(achievable) > 1:
                exact = False
                for s in (1, -1):
                    ev = Evidence(alpha, beta, g * s)
                    signs_seen.setdefault(ev.sign, ev)
                continue
            (s,) = achievable
            ev = Evidence(alpha, beta, g * s)
            evidence.append(ev)
            signs_seen.setdefault(ev.sign, ev)
    if len(signs_seen) > 1:
        conflict = (signs_seen[1], signs_seen[-1])
    return _verdict(Kinetics.GENERAL, r, evidence, conflict, exact)


def _without_inflows(net: ReactionNetwork) -> list[int]:
    return [j for j, r in enumerate(net.reactions) if not r.is_inflow()]


def jacobian_criterion_matrices(net: ReactionNetwork) -> tuple[ExactMatrix, ExactMatrix, list[int]]:
    """Stoichiometric and source matrices with inflow reactions omitted."""
    keep = _without_inflows(net)
    gamma, gamma_l = build_matrices(net, keep)
    return gamma, gamma_l, keep


@dataclass(frozen=True)
class CertificateCheck:
    passed: bool
    determinant: Fraction
    signed_determinant: Fraction
    row_sums: tuple
    reasons: tuple[str, ...] = field(default=())

    def __bool__(self) -> bool:
        return self.passed


def evaluate_craciun_certificate(net: ReactionNetwork, D: Sequence) -> CertificateCheck:
    """Evaluate both sufficient-condition inequalities for a positive diagonal ``D``.

    ``D`` lists the diagonal in the network's reaction order with inflows
    removed. Passes when ``(-1)^n det(G D G_l^T) < 0`` and ``G D 1 <= 0``.
    """
    if classify_openness(net).tag is not OpennessTag.FULLY_OPEN:
        raise ValueError("certificate check requires a fully open network")
    gamma, gamma_l, keep = jacobian_criterion_matrices(net)
    if isinstance(D, ExactMatrix):
        if D.rows != D.cols or any(D[i, j] for i in range(D.rows) for j in range(D.cols) if i != j):
            raise ValueError("D must be a square diagonal matrix")
        D = [D[i, i] for i in range(D.rows)]
    D = [Fraction(d) for d in D]
    if len(D) != len(keep):
        raise ValueError(f"D has {len(D)} entries, expected {len(keep)} (reactions without inflows)")
    if any(d <= 0 for d in D):
        raise ValueError("D must be positive")
    n = net.n_species
    scaled = ExactMatrix([[gamma[i, j] * D[j] for j in range(gamma.cols)] for i in range(n)], cols=gamma.cols)
    value = Fraction(det(scaled @ gamma_l.T))
    signed = value if n % 2 == 0 else -value
    row_sums = tuple(Fraction(sum(scaled.row(i))) for i in range(n))
    reasons = []
    if not signed < 0:
        reasons.append(f"(-1)^n det = {signed} is not negative")
    bad = [i for i, v in enumerate(row_sums) if v > 0]
    if bad:
        reasons.append(f"row sums positive at species {[net.species[i] for i in bad]}")
    return CertificateCheck(not reasons, value, signed, row_sums, tuple(reasons))


def craciun_certificate_check(net: ReactionNetwork, D: Sequence) -> bool:
    return evaluate_craciun_certificate(net, D).passed


__all__ = [
    "CertificateCheck",
    "Evidence",
    "InjectivityVerdict",
    "Kinetics",
    "craciun_certificate_check",
    "evaluate_craciun_certificate",
    "injective_general",
    "injective_mass_action",
    "injectivity_from_matrices",
    "jacobian_criterion_matrices",
]
